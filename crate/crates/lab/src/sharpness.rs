//! The two power-law commutator examples that exhibit the blow-up rate
//! in the fractional parameter δ.
//!
//! Both examples live on (0,1) with a weight |x|^{(p-1)(1-δ)}. On the
//! "lambda" side the power law is the target weight λ and μ ≡ 1; on the
//! "mu" side the roles flip. The symbol is b = ν (the Bloom weight,
//! itself a power law), f is the matching power law making ‖f‖_{L^p(μ)}
//! = δ^{-1/p}, and the commutator splits as b·Hf − H(bf) with bf again
//! an exact power law — so every input is an exact cell average and the
//! only discretization is the grid itself.
//!
//! No randomness anywhere: a sharpness run is a deterministic function
//! of (side, p, δ list, bands, per_band).

use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::{Context, Result};
use bloomlab_core::op::hilbert_multi;
use bloomlab_core::weights::{ap_constant, bmo_seminorm, lp_norm, Weight};
use bloomlab_core::{Ext, Mesh, StepFunction};

use crate::config::SharpnessConfig;
use crate::report::{row, Outcome};
use crate::slope;

const EXPERIMENT: &str = "sharpness";
/// The paper's dyadic-measured bound on ‖b‖_{BMO_ν} for these symbols
/// is exactly 2; anything above is a hard failure.
pub const BMO_CAP: f64 = 2.0 + 1e-9;

/// Everything measured at one δ.
#[derive(Debug, Clone, Copy)]
pub struct DeltaReport {
    pub delta: f64,
    pub numer: f64,
    pub denom: f64,
    pub ratio: f64,
    pub h1: f64,
    pub h2: f64,
    pub ap: f64,
    pub bmo: f64,
}

/// One δ on one mesh. `side` selects which of μ, λ carries the power law.
pub fn measure(side: &str, p: f64, delta: f64, mesh: &Arc<Mesh>) -> Result<DeltaReport> {
    let c_pow = (p - 1.0) * (1.0 - delta);
    // exponents of ν, f and the product bf; all in (-1, ∞) so the cell
    // masses exist
    let (nu_exp, f_exp, bf_exp, pow_on_lambda) = match side {
        "lambda" => (
            (delta - 1.0) * (p - 1.0) / p,
            (delta - 1.0) / p,
            delta - 1.0,
            true,
        ),
        _ => (
            (1.0 - delta) * (p - 1.0) / p,
            delta - 1.0,
            (delta - 1.0) / p,
            false,
        ),
    };

    let one = Weight::constant(mesh, 1.0)?;
    let pow = Weight::power(mesh, c_pow, 1.0)?;
    let (mu, lambda) = if pow_on_lambda { (&one, &pow) } else { (&pow, &one) };
    let nu = Weight::power(mesh, nu_exp, 1.0)?;
    let b = nu.step().clone();
    let f = StepFunction::power_averages(mesh, f_exp, 1.0)?;
    let bf = StepFunction::power_averages(mesh, bf_exp, 1.0)?;

    let mut transforms = hilbert_multi(mesh, &[f.values(), bf.values()])?;
    let hbf = StepFunction::from_values(mesh, transforms.pop().context("bf transform")?)?;
    let hf = StepFunction::from_values(mesh, transforms.pop().context("f transform")?)?;

    let b_hf = b.mul(&hf)?;
    let comm = b_hf.sub(&hbf)?;
    let pe = Ext::Finite(p);
    Ok(DeltaReport {
        delta,
        numer: lp_norm(&comm, lambda, pe)?,
        denom: lp_norm(&f, mu, pe)?,
        ratio: lp_norm(&comm, lambda, pe)? / lp_norm(&f, mu, pe)?,
        h1: lp_norm(&b_hf, lambda, pe)?,
        h2: lp_norm(&hbf, lambda, pe)?,
        ap: ap_constant(&pow, p)?.value,
        bmo: bmo_seminorm(&b, &nu, 0.0)?,
    })
}

pub fn run(cfg: &SharpnessConfig, _seed: u64) -> Result<Outcome> {
    let mesh = Arc::new(Mesh::graded(cfg.bands, cfg.per_band)?);
    let tag = format!(
        "side={} p={} bands={} per_band={}",
        cfg.side, cfg.p, cfg.bands, cfg.per_band
    );

    let mut out = Outcome::default();
    let mut reports = Vec::new();
    for &k in &cfg.delta_log2 {
        let delta = 0.5f64.powi(k as i32);
        let rep = measure(&cfg.side, cfg.p, delta, &mesh)?;
        let params = format!("{tag} delta=2^-{k}");
        for (metric, value) in [
            ("ratio", rep.ratio),
            ("numer", rep.numer),
            ("denom", rep.denom),
            ("h1", rep.h1),
            ("h2", rep.h2),
            ("ap", rep.ap),
            ("bmo", rep.bmo),
        ] {
            out.rows.push(row(EXPERIMENT, Some(k as u64), params.clone(), metric, value));
        }
        if rep.bmo > BMO_CAP {
            out.violations
                .push(format!("delta=2^-{k}: ‖b‖_BMO_ν = {} exceeds 2", rep.bmo));
        }
        reports.push(rep);
    }

    let mut s = String::new();
    writeln!(s, "sharpness: {tag}")?;
    writeln!(s, "  delta        R = numer/denom   numer        A_p          bmo")?;
    for rep in &reports {
        writeln!(
            s,
            "  {:<12.6e} {:<17.8e} {:<12.6e} {:<12.6e} {:.6}",
            rep.delta, rep.ratio, rep.numer, rep.ap, rep.bmo
        )?;
    }

    let expected = 1.0 + 1.0 / cfg.p;
    let fits = [
        ("slope_numer", reports.iter().map(|r| (r.delta, r.numer)).collect::<Vec<_>>(), expected),
        ("slope_ratio", reports.iter().map(|r| (r.delta, r.ratio)).collect::<Vec<_>>(), expected),
        ("slope_denom", reports.iter().map(|r| (r.delta, r.denom)).collect::<Vec<_>>(), 1.0 / cfg.p),
        ("slope_ap", reports.iter().map(|r| (r.delta, r.ap)).collect::<Vec<_>>(), cfg.p - 1.0),
    ];
    for (metric, pts, target) in fits {
        if let Some(fit) = slope::fit(&pts) {
            let params = fit.params(&tag);
            out.rows.push(row(EXPERIMENT, None, params.clone(), metric, fit.slope));
            out.rows.push(row(EXPERIMENT, None, params, &format!("{metric}_sigma"), fit.sigma));
            writeln!(s, "  {metric}: {:.4} (reference {target:.4}, sigma {:.2e})", fit.slope, fit.sigma)?;
        }
    }

    let delta_min = 0.5f64.powi(*cfg.delta_log2.iter().max().unwrap() as i32);
    if 0.5f64.powi(cfg.bands as i32) > delta_min * delta_min {
        writeln!(
            s,
            "  warning: mesh floor 2^-{} too coarse for delta={delta_min:e} (needs 2^-bands <= delta_min^2)",
            cfg.bands
        )?;
    }
    if cfg.p > 2.0 {
        writeln!(s, "  note: p={} lies outside the blow-up regime (1,2]; rates recorded, not asserted", cfg.p)?;
    }

    if cfg.refine_check {
        let k = *cfg.delta_log2.iter().max().unwrap();
        let delta = 0.5f64.powi(k as i32);
        let finer = Arc::new(Mesh::graded(cfg.bands + 8, cfg.per_band)?);
        let coarse = reports.last().expect("nonempty delta list");
        let fine = measure(&cfg.side, cfg.p, delta, &finer)?;
        let change = (fine.ratio - coarse.ratio).abs() / coarse.ratio;
        out.rows.push(row(
            EXPERIMENT,
            None,
            format!("{tag} delta=2^-{k} bands={}", cfg.bands + 8),
            "refine_rel_change",
            change,
        ));
        writeln!(s, "  refine check at delta=2^-{k}: R changes by {:.3e}", change)?;
        if change >= 0.02 {
            out.violations.push(format!(
                "refinement moved R at delta=2^-{k} by {change:.3e} (convergence gate is 2%)"
            ));
        }
    }

    out.summary = s;
    Ok(out)
}

/// Fitted slope of a metric from a finished run, with its provenance.
pub fn slope_of(outcome: &Outcome, metric: &str) -> Option<(f64, String)> {
    outcome
        .rows
        .iter()
        .find(|r| r.metric == metric)
        .map(|r| (r.value, r.params.clone()))
}
