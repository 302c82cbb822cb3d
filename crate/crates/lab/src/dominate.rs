//! Batch sparse-domination audits: construct the stopping family for a
//! random (b, f, g), check both certificates exactly, and record the
//! empirical constant lhs / (sum of the two sparse forms).

use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::Result;
use bloomlab_core::op::{sparse_dominate, DiscreteOperator, DominationParams, DominationResult};
use bloomlab_core::Mesh;
use rayon::prelude::*;
use serde_json::json;

use crate::config::DominateConfig;
use crate::constants::fmax;
use crate::gen;
use crate::report::{row, Outcome, ResultRow};

const EXPERIMENT: &str = "dominate";

fn audit_json(i: u64, res: &DominationResult) -> serde_json::Value {
    json!({
        "instance": i,
        "c_emp": res.c_emp,
        "family": res.family.len(),
        "levels": res.audits.iter().map(|a| json!({
            "level": a.level,
            "cubes": a.cubes,
            "floor_cubes": a.floor_cubes,
            "selected": a.selected,
            "worst_packing": a.worst_packing,
            "threshold_max": a.threshold_max,
            "phi_max": a.phi_max,
            "phi_mean": a.phi_mean,
        })).collect::<Vec<_>>(),
    })
}

pub fn run(cfg: &DominateConfig, seed: u64) -> Result<Outcome> {
    let s = cfg.s.to_ext()?;
    let params = DominationParams { r: cfg.r, s, m: cfg.m };
    let mesh = Arc::new(Mesh::uniform(1, cfg.depth)?);

    let per: Vec<(Vec<ResultRow>, Vec<String>, serde_json::Value)> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = gen::instance_rng(seed, i);
            let b = gen::haar_series(&mesh, &mut rng, cfg.amp, cfg.rho);
            let f = gen::positive_step(&mesh, &mut rng, cfg.spread);
            let g = gen::positive_step(&mesh, &mut rng, cfg.spread);
            let op = match cfg.operator.as_str() {
                "hilbert" => DiscreteOperator::Hilbert,
                "martingale" => DiscreteOperator::Martingale(gen::random_signs(&mesh, &mut rng)),
                _ => DiscreteOperator::Zero,
            };
            let res = sparse_dominate(&op, &b, &f, &g, &params)?;

            let tag = format!(
                "op={} m={} r={} s={} depth={}",
                cfg.operator,
                cfg.m,
                cfg.r,
                cfg.s.label(),
                cfg.depth
            );
            let mut rows = Vec::new();
            rows.push(row(EXPERIMENT, Some(i), tag.clone(), "c_emp", res.c_emp));
            rows.push(row(EXPERIMENT, Some(i), tag.clone(), "lhs", res.lhs));
            rows.push(row(EXPERIMENT, Some(i), tag.clone(), "form_fg", res.form_fg));
            rows.push(row(EXPERIMENT, Some(i), tag.clone(), "form_gf", res.form_gf));
            rows.push(row(EXPERIMENT, Some(i), tag.clone(), "half_ok", res.half_ok as u8 as f64));
            rows.push(row(EXPERIMENT, Some(i), tag.clone(), "cz_ok", res.cz_ok as u8 as f64));
            rows.push(row(EXPERIMENT, Some(i), tag.clone(), "floor_mass", res.floor_mass));
            rows.push(row(EXPERIMENT, Some(i), tag, "family", res.family.len() as f64));

            let mut bad = Vec::new();
            if !res.half_ok {
                bad.push(format!("instance {i}: 1/2-sparseness certificate failed"));
            }
            if !res.cz_ok {
                bad.push(format!("instance {i}: CZ certificate failed"));
            }
            if !res.c_emp.is_finite() {
                bad.push(format!("instance {i}: C_emp = {} not finite", res.c_emp));
            }
            Ok((rows, bad, audit_json(i, &res)))
        })
        .collect::<Result<_>>()?;

    let mut out = Outcome::default();
    for (rows, bad, audit) in per {
        out.rows.extend(rows);
        out.violations.extend(bad);
        out.audits.push(audit);
    }

    let cs: Vec<f64> = out.rows.iter().filter(|r| r.metric == "c_emp").map(|r| r.value).collect();
    let mut s = String::new();
    writeln!(
        s,
        "dominate: op={} m={} r={} s={} depth={} over {} instances",
        cfg.operator, cfg.m, cfg.r, cfg.s.label(), cfg.depth, cfg.instances
    )?;
    writeln!(
        s,
        "  C_emp max {:.6} mean {:.6}; certificates {}",
        fmax(&cs),
        cs.iter().sum::<f64>() / cs.len().max(1) as f64,
        if out.violations.is_empty() { "all exact" } else { "VIOLATED" }
    )?;
    out.summary = s;
    Ok(out)
}

/// Largest empirical constant of a run — the depth-stability statistic.
pub fn max_c_emp(outcome: &Outcome) -> f64 {
    fmax(
        &outcome
            .rows
            .iter()
            .filter(|r| r.metric == "c_emp")
            .map(|r| r.value)
            .collect::<Vec<_>>(),
    )
}
