use std::sync::Arc;

use crate::error::{dom_err, par_err, Result};
use crate::params::{Ext, FormParams};
use crate::sparse::family::SparseFamily;
use crate::step::{powr, StepFunction};

fn check_meshes(s: &SparseFamily, fs: &[&StepFunction]) -> Result<()> {
    for f in fs {
        if !Arc::ptr_eq(s.mesh(), f.mesh()) {
            return dom_err("sparse form inputs live on different meshes");
        }
    }
    Ok(())
}

/// ⟨|b - ⟨b⟩_Q|^k |φ|⟩_{e,Q}: the e-power mean over cube `id` of the
/// oscillation factor times |φ|. k = 0 reduces to a plain power mean.
pub(crate) fn osc_avg(
    b: &StepFunction,
    k: u32,
    phi: &StepFunction,
    id: usize,
    e: Ext,
) -> Result<f64> {
    if k == 0 {
        return phi.avg_id(id, e);
    }
    let mesh = b.mesh();
    let mean = b.mean(id);
    match e {
        Ext::Inf => {
            let mut best = 0.0f64;
            mesh.for_each_cell(id, |c| {
                let h = (b.value(c) - mean).abs().powi(k as i32) * phi.value(c).abs();
                best = best.max(h);
            });
            Ok(best)
        }
        Ext::Finite(e) if e > 0.0 => {
            let mut acc = 0.0;
            mesh.for_each_cell(id, |c| {
                let h = (b.value(c) - mean).abs().powi(k as i32) * phi.value(c).abs();
                acc += powr(h, e) * mesh.cell_measure(c);
            });
            Ok((acc / mesh.measure(id)).powf(1.0 / e))
        }
        Ext::Finite(e) => par_err(format!("power mean needs a positive exponent, got {e}")),
    }
}

/// B^m_{S,b,r,s}(f,g) = Σ_Q ⟨|b-⟨b⟩_Q|^m |f|⟩_{r,Q} ⟨|g|⟩_{s',Q} |Q|.
pub fn sparse_form_b(
    s: &SparseFamily,
    b: &StepFunction,
    f: &StepFunction,
    g: &StepFunction,
    params: &FormParams,
) -> Result<f64> {
    check_meshes(s, &[b, f, g])?;
    let mesh = s.mesh();
    let sp = Ext::Finite(params.s_prime());
    let mut acc = 0.0;
    for &id in s.ids() {
        let a = osc_avg(b, params.m, f, id, Ext::Finite(params.r))?;
        let bfac = g.avg_id(id, sp)?;
        acc += a * bfac * mesh.measure(id);
    }
    Ok(acc)
}

/// The dual-position form Σ_Q ⟨|f|⟩_{r,Q} ⟨|b-⟨b⟩_Q|^m |g|⟩_{s',Q} |Q|,
/// the second sum of the domination principle.
pub fn sparse_form_b_dual(
    s: &SparseFamily,
    b: &StepFunction,
    f: &StepFunction,
    g: &StepFunction,
    params: &FormParams,
) -> Result<f64> {
    check_meshes(s, &[b, f, g])?;
    let mesh = s.mesh();
    let sp = Ext::Finite(params.s_prime());
    let mut acc = 0.0;
    for &id in s.ids() {
        let a = f.avg_id(id, Ext::Finite(params.r))?;
        let bfac = osc_avg(b, params.m, g, id, sp)?;
        acc += a * bfac * mesh.measure(id);
    }
    Ok(acc)
}

/// Fractional form Σ_Q ⟨|f|⟩_{r/(1+α),Q} ⟨|g|⟩_{s',Q} |Q|^{1+α/r}.
pub fn fractional_form(
    s: &SparseFamily,
    f: &StepFunction,
    g: &StepFunction,
    r: f64,
    sx: Ext,
    alpha: f64,
) -> Result<f64> {
    if !(r >= 1.0) || !(alpha >= 0.0) {
        return par_err(format!("fractional form needs r >= 1 and α >= 0, got r={r}, α={alpha}"));
    }
    check_meshes(s, &[f, g])?;
    let mesh = s.mesh();
    let e1 = Ext::Finite(r / (1.0 + alpha));
    let e2 = sx.conjugate();
    let mut acc = 0.0;
    for &id in s.ids() {
        acc += f.avg_id(id, e1)?
            * g.avg_id(id, e2)?
            * mesh.measure(id).powf(1.0 + alpha / r);
    }
    Ok(acc)
}

/// Sparse operator A_{S,δ}(φ) = Σ_Q ⟨|φ|⟩_{1/(1+δ),Q} |Q|^δ χ_Q.
pub fn sparse_operator(s: &SparseFamily, phi: &StepFunction, delta: f64) -> Result<StepFunction> {
    if !(delta >= 0.0) {
        return par_err(format!("sparse operator needs δ >= 0, got {delta}"));
    }
    check_meshes(s, &[phi])?;
    let mesh = s.mesh();
    let e = Ext::Finite(1.0 / (1.0 + delta));
    let mut out = vec![0.0f64; mesh.ncells()];
    for &id in s.ids() {
        let term = phi.avg_id(id, e)? * mesh.measure(id).powf(delta);
        mesh.for_each_cell(id, |c| out[c as usize] += term);
    }
    StepFunction::from_values(mesh, out)
}
