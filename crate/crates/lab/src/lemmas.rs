//! Batch checks of the discrete lemmas: interpolation of oscillation
//! averages, covering equivalences, packing and Fefferman–Stein bounds,
//! the A_p duality identity, and the oscillation stopping-time
//! augmentation. Hard identities count violations; the rest record
//! constants for the depth-stability gates.

use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::Result;
use bloomlab_core::sparse::{
    augment_oscillation, cov_check, coveq_check, fh_check, fs_check, lemma_two_check,
    verify_sparseness,
};
use bloomlab_core::weights::duality_identity;
use bloomlab_core::Mesh;
use rand::Rng;
use rayon::prelude::*;

use crate::config::LemmasConfig;
use crate::constants::{fmax, fmin};
use crate::gen;
use crate::report::{row, Outcome, ResultRow};

/// Relative slack floor for the interpolation lemma: float noise only.
pub const TWO_TOL: f64 = 1e-12;
/// Relative tolerance for the identities that are exact as real numbers
/// (cov at p = 1, duality, coveq at p = 1) but summed in different
/// orders on the two sides.
pub const EXACT_TOL: f64 = 1e-12;
pub const DUALITY_TOL: f64 = 1e-10;

pub fn run(cfg: &LemmasConfig, seed: u64) -> Result<Outcome> {
    let experiment = format!("lemmas-{}", cfg.which);
    let per: Vec<(Vec<ResultRow>, Vec<String>)> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| one_instance(cfg, &experiment, seed, i))
        .collect::<Result<_>>()?;

    let mut out = Outcome::default();
    for (rows, bad) in per {
        out.rows.extend(rows);
        out.violations.extend(bad);
    }

    let mut s = String::new();
    writeln!(
        s,
        "{}: {} instances, {} violations",
        experiment,
        cfg.instances,
        out.violations.len()
    )?;
    for metric in ["slack", "ratio", "min_slack", "gap", "carleson"] {
        let vals: Vec<f64> = out
            .rows
            .iter()
            .filter(|r| r.metric == metric)
            .map(|r| r.value)
            .collect();
        if !vals.is_empty() {
            writeln!(s, "  {metric}: min {:.6e} max {:.6e}", fmin(&vals), fmax(&vals))?;
        }
    }
    out.summary = s;
    Ok(out)
}

fn one_instance(
    cfg: &LemmasConfig,
    experiment: &str,
    seed: u64,
    i: u64,
) -> Result<(Vec<ResultRow>, Vec<String>)> {
    let mut rng = gen::instance_rng(seed, i);
    let mut rows = Vec::new();
    let mut bad = Vec::new();

    match cfg.which.as_str() {
        "two" => {
            let depth = rng.gen_range(3..=cfg.depth.max(3));
            let mesh = Arc::new(Mesh::uniform(1, depth)?);
            let b = gen::haar_series(&mesh, &mut rng, cfg.amp, cfg.rho);
            let f = gen::positive_step(&mesh, &mut rng, cfg.spread);
            let g = gen::positive_step(&mesh, &mut rng, cfg.spread);
            let m = rng.gen_range(1..=cfg.m_max);
            let r = cfg.r_choices[rng.gen_range(0..cfg.r_choices.len())];
            let t = cfg.t_choices[rng.gen_range(0..cfg.t_choices.len())];
            let id = gen::random_visible_cube(&mesh, &mut rng);
            let q = mesh.cube(id).clone();
            let (c, slack) = lemma_two_check(&b, &f, &g, &q, r, t, m)?;
            let scale = c[0] + c[m as usize];
            let params = format!("m={m} r={r} t={t} depth={depth}");
            rows.push(row(experiment, Some(i), params.clone(), "slack", slack));
            rows.push(row(experiment, Some(i), params, "scale", scale));
            if slack < -TWO_TOL * scale.max(f64::MIN_POSITIVE) {
                bad.push(format!("instance {i}: interpolation slack {slack} below -{TWO_TOL}*{scale}"));
            }
        }
        "cov" => {
            let mesh = Arc::new(Mesh::uniform(1, cfg.depth)?);
            let coeffs = gen::coefficient_tree(&mesh, &mut rng, cfg.density);
            let w = gen::random_weight(&mesh, &mut rng, cfg.amp, cfg.rho);
            for &p in &cfg.p {
                let rep = cov_check(&coeffs, &w, p)?;
                let params = format!("p={p}");
                rows.push(row(experiment, Some(i), params.clone(), "ratio", rep.ratio));
                rows.push(row(experiment, Some(i), params, "lhs", rep.lhs));
                if p == 1.0 {
                    let scale = rep.lhs.abs().max(rep.rhs.abs()).max(1e-300);
                    if (rep.lhs - rep.rhs).abs() > EXACT_TOL * scale {
                        bad.push(format!(
                            "instance {i}: cov at p=1 split, lhs {} vs rhs {}",
                            rep.lhs, rep.rhs
                        ));
                    }
                }
            }
        }
        "coveq" => {
            let mesh = Arc::new(Mesh::uniform(1, cfg.depth)?);
            let coeffs = gen::coefficient_tree(&mesh, &mut rng, cfg.density);
            for &p in &cfg.p {
                let rep = coveq_check(&coeffs, p)?;
                let params = format!("p={p}");
                rows.push(row(experiment, Some(i), params.clone(), "min_slack", rep.min_slack));
                rows.push(row(experiment, Some(i), params, "scale", rep.scale));
                if rep.min_slack < 0.0 {
                    bad.push(format!("instance {i}: coveq slack {} at p={p}", rep.min_slack));
                }
                if p == 1.0 && rep.min_slack.abs() > EXACT_TOL * rep.scale.max(1e-300) {
                    bad.push(format!(
                        "instance {i}: coveq not exact at p=1, slack {}",
                        rep.min_slack
                    ));
                }
            }
        }
        "fh" => {
            let mesh = Arc::new(Mesh::uniform(1, cfg.depth)?);
            let fam = gen::stopping_family(&mesh, &mut rng);
            let sigma = gen::random_weight(&mesh, &mut rng, cfg.amp, cfg.rho);
            let w = gen::random_weight(&mesh, &mut rng, cfg.amp, cfg.rho);
            let root = mesh.cube(mesh.root_id()).clone();
            let ratio = fh_check(&fam, &root, &sigma, &w, cfg.alpha, cfg.beta, cfg.gamma)?;
            let params = format!("alpha={} beta={} gamma={}", cfg.alpha, cfg.beta, cfg.gamma);
            rows.push(row(experiment, Some(i), params, "ratio", ratio));
        }
        "fs" => {
            let mesh = Arc::new(Mesh::uniform(1, cfg.depth)?);
            let fam = gen::stopping_family(&mesh, &mut rng);
            let f = gen::positive_step(&mesh, &mut rng, cfg.spread);
            let w = gen::random_weight(&mesh, &mut rng, cfg.amp, cfg.rho);
            for &p in &cfg.p {
                if p <= 1.0 {
                    continue;
                }
                let (lhs, rhs) = fs_check(&fam, &f, &w, p, cfg.delta)?;
                let params = format!("p={p} delta={}", cfg.delta);
                rows.push(row(experiment, Some(i), params, "ratio", lhs / rhs));
            }
        }
        "duality" => {
            let mesh = Arc::new(Mesh::uniform(1, cfg.depth)?);
            let w = gen::random_weight(&mesh, &mut rng, cfg.amp, cfg.rho);
            for &p in &cfg.p {
                let (lhs, rhs) = duality_identity(&w, p)?;
                let gap = (lhs - rhs).abs() / lhs.max(rhs).max(1e-300);
                rows.push(row(experiment, Some(i), format!("p={p}"), "gap", gap));
                if gap > DUALITY_TOL {
                    bad.push(format!("instance {i}: duality gap {gap} at p={p}"));
                }
            }
        }
        "oscsparse" => {
            let mesh = Arc::new(Mesh::uniform(1, cfg.depth)?);
            let fam = gen::stopping_family(&mesh, &mut rng);
            let b = gen::haar_series(&mesh, &mut rng, cfg.amp, cfg.rho);
            let before = fam.len();
            let (aug, c) = augment_oscillation(&fam, &b)?;
            let cert = verify_sparseness(&aug);
            rows.push(row(experiment, Some(i), "", "c", c));
            rows.push(row(experiment, Some(i), "", "carleson", cert.carleson));
            rows.push(row(experiment, Some(i), "", "added", (aug.len() - before) as f64));
            if !c.is_finite() {
                bad.push(format!("instance {i}: augmentation constant not finite"));
            }
        }
        other => anyhow::bail!("unknown lemma {other:?}"),
    }
    Ok((rows, bad))
}
