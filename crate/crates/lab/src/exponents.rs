//! Exact exponent calculus evaluated over a parameter grid. Values land
//! in the rows as nearest doubles; the summary carries the exact
//! rationals.

use std::fmt::Write as _;

use anyhow::Result;
use bloomlab_core::bounds::{
    approx, form_exponents, fractional_form_exponent, incomparability_region, split_verdict,
    symmetric_exponent, SplitVerdict,
};
use bloomlab_core::FormParams;

use crate::config::ExponentsConfig;
use crate::report::{row, Outcome};

const EXPERIMENT: &str = "exponents";

fn verdict_code(v: SplitVerdict) -> f64 {
    match v {
        SplitVerdict::ImprovesLambda => -1.0,
        SplitVerdict::Open => 0.0,
        SplitVerdict::ImprovesMu => 1.0,
    }
}

pub fn run(cfg: &ExponentsConfig, _seed: u64) -> Result<Outcome> {
    let s = cfg.s.to_ext()?;
    let mut out = Outcome::default();
    let mut sum = String::new();
    writeln!(sum, "exponents: r={} s={}", cfg.r, cfg.s.label())?;

    for &p in &cfg.p {
        let qs = cfg.q.clone().unwrap_or_else(|| vec![p]);
        for &q in &qs {
            for &m in &cfg.m {
                let params = FormParams::new(cfg.r, s, p, q, m)?;
                let bundle = form_exponents(&params)?;
                let tag = format!("p={p} q={q} m={m} r={} s={}", cfg.r, cfg.s.label());
                let (b_mu1, b_l12, b_rh) = bundle.primary();
                out.rows.push(row(EXPERIMENT, None, tag.clone(), "beta_mu1", approx(&b_mu1)));
                out.rows.push(row(EXPERIMENT, None, tag.clone(), "beta_lambda12", approx(&b_l12)));
                out.rows.push(row(EXPERIMENT, None, tag.clone(), "beta_rh", approx(&b_rh)));
                write!(sum, "  {tag}: beta_mu1={b_mu1} beta_lambda12={b_l12} beta_rh={b_rh}")?;
                if let Some((b_mu2, b_l2, _)) = bundle.alternative() {
                    out.rows.push(row(EXPERIMENT, None, tag.clone(), "beta_mu2", approx(&b_mu2)));
                    out.rows.push(row(EXPERIMENT, None, tag.clone(), "beta_lambda2", approx(&b_l2)));
                    write!(sum, " beta_mu2={b_mu2} beta_lambda2={b_l2}")?;
                }
                writeln!(sum)?;

                // diagonal comparison calculus
                if (p - q).abs() < f64::EPSILON && p > 1.0 {
                    let se = symmetric_exponent(p, m)?;
                    out.rows.push(row(EXPERIMENT, None, tag.clone(), "symmetric_exponent", approx(&se)));
                    if m >= 2 {
                        let v = split_verdict(p, m)?;
                        out.rows.push(row(EXPERIMENT, None, tag.clone(), "split_verdict", verdict_code(v)));
                        writeln!(sum, "    symmetric={se} verdict={v:?}")?;
                    }
                }
            }
        }
    }

    for &m in &cfg.m {
        if m >= 1 {
            let (lo, hi) = incomparability_region(m)?;
            let tag = format!("m={m}");
            out.rows.push(row(EXPERIMENT, None, tag.clone(), "region_lo", approx(&lo)));
            out.rows.push(row(EXPERIMENT, None, tag, "region_hi", approx(&hi)));
            writeln!(sum, "  incomparability m={m}: [{lo}, {hi}]")?;
        }
    }

    for &alpha in &cfg.alpha {
        let qs = cfg.q.clone().unwrap_or_else(|| cfg.p.clone());
        for &q in &qs {
            if q > cfg.r && s.gt(q) {
                let e = fractional_form_exponent(q, cfg.r, s, alpha)?;
                let tag = format!("q={q} r={} s={} alpha={alpha}", cfg.r, cfg.s.label());
                out.rows.push(row(EXPERIMENT, None, tag, "fractional_exponent", approx(&e)));
                writeln!(sum, "  fractional q={q} alpha={alpha}: {e}")?;
            }
        }
    }

    out.summary = sum;
    Ok(out)
}
