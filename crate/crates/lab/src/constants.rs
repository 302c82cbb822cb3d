//! Weight-constant dump over random Haar-series weights.

use std::fmt::Write as _;

use anyhow::Result;
use bloomlab_core::weights::{ainf_constant, ap_constant, rh_constant, symmetric_bracket};
use rayon::prelude::*;

use crate::config::ConstantsConfig;
use crate::gen;
use crate::report::{row, Outcome, ResultRow};

const EXPERIMENT: &str = "constants";

pub fn run(cfg: &ConstantsConfig, seed: u64) -> Result<Outcome> {
    let mesh = cfg.mesh.build()?;
    let per_instance: Vec<(Vec<ResultRow>, Vec<String>)> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = gen::instance_rng(seed, i);
            let w = gen::random_weight(&mesh, &mut rng, cfg.amp, cfg.rho);
            let mut rows = Vec::new();
            let mut bad = Vec::new();
            for &p in &cfg.p {
                let ap = ap_constant(&w, p)?.value;
                rows.push(row(EXPERIMENT, Some(i), format!("p={p}"), "ap", ap));
                if ap < 1.0 - 1e-12 {
                    bad.push(format!("instance {i}: [w]_A_{p} = {ap} < 1"));
                }
            }
            for &r in &cfg.rh {
                let rh = rh_constant(&w, r)?;
                rows.push(row(EXPERIMENT, Some(i), format!("r={r}"), "rh", rh));
                if rh < 1.0 - 1e-12 {
                    bad.push(format!("instance {i}: [w]_RH_{r} = {rh} < 1"));
                }
            }
            let ainf = ainf_constant(&w);
            rows.push(row(EXPERIMENT, Some(i), "", "ainf", ainf));
            for sym in &cfg.sym {
                let v = symmetric_bracket(&w, sym.p, sym.r, sym.s.to_ext()?)?;
                let params = format!("p={} r={} s={}", sym.p, sym.r, sym.s.label());
                rows.push(row(EXPERIMENT, Some(i), params, "sym", v));
            }
            Ok((rows, bad))
        })
        .collect::<Result<_>>()?;

    let mut out = Outcome::default();
    for (rows, bad) in per_instance {
        out.rows.extend(rows);
        out.violations.extend(bad);
    }

    let mut s = String::new();
    writeln!(s, "constants: {} instances on {} cells", cfg.instances, mesh.ncells())?;
    for &p in &cfg.p {
        let vals: Vec<f64> = out
            .rows
            .iter()
            .filter(|r| r.metric == "ap" && r.params == format!("p={p}"))
            .map(|r| r.value)
            .collect();
        writeln!(s, "  [w]_A_{p}: min {:.4} max {:.4}", fmin(&vals), fmax(&vals))?;
    }
    let ainfs: Vec<f64> = out.rows.iter().filter(|r| r.metric == "ainf").map(|r| r.value).collect();
    writeln!(s, "  [w]_Ainf: min {:.4} max {:.4}", fmin(&ainfs), fmax(&ainfs))?;
    out.summary = s;
    Ok(out)
}

pub(crate) fn fmin(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn fmax(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
