//! Test operators and the constructive sparse-domination machinery:
//! the discrete Hilbert transform, Haar martingale transforms, their
//! iterated commutators, the sharp grand maximal truncation, and the
//! recursion that extracts a sparse family dominating ∫|T_b^m f||g|.

mod dominate;
mod hilbert;
mod martingale;

pub use dominate::{sparse_dominate, DominationParams, DominationResult, LevelAudit};
pub use hilbert::{cell_kernel, hilbert, hilbert_at, hilbert_multi, HilbertTable};
pub use martingale::{martingale_transform, SignMap};

use std::sync::Arc;

use crate::error::{dom_err, par_err, Result};
use crate::params::Ext;
use crate::step::{osc_from_pairs, same_mesh, StepFunction};

/// The linear operators the laboratory drives.
#[derive(Clone)]
pub enum DiscreteOperator {
    Hilbert,
    Martingale(SignMap),
    Zero,
}

impl DiscreteOperator {
    pub fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        match self {
            DiscreteOperator::Hilbert => hilbert(f),
            DiscreteOperator::Martingale(signs) => martingale_transform(f, signs),
            DiscreteOperator::Zero => Ok(StepFunction::constant(f.mesh(), 0.0)),
        }
    }
}

fn binom(m: u32, k: u32) -> f64 {
    let mut c = 1.0;
    for i in 0..k.min(m - k) {
        c = c * (m - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Iterated commutator T_b^m f(x) = T((b(x) − b(·))^m f)(x), computed
/// by the binomial expansion Σ_k C(m,k)(−1)^k b^{m−k}·T(b^k f); m = 0
/// is plain Tf. Uses m+1 operator applications.
pub fn commutator(
    t: &DiscreteOperator,
    b: &StepFunction,
    m: u32,
    f: &StepFunction,
) -> Result<StepFunction> {
    if !same_mesh(b, f) {
        return dom_err("symbol and argument live on different meshes");
    }
    let mut acc = StepFunction::constant(f.mesh(), 0.0);
    let mut bk = f.clone(); // b^k · f
    for k in 0..=m {
        let tbkf = t.apply(&bk)?;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let bmk = b.map(|v| v.powi((m - k) as i32));
        acc = acc.add(&tbkf.mul(&bmk)?.scale(sign * binom(m, k)))?;
        if k < m {
            bk = bk.mul(b)?;
        }
    }
    Ok(acc)
}

/// The defining double sum, evaluated per cell: freeze x, apply T to
/// (b(x) − b(·))^m f, read off the value at x. One full operator
/// application per cell — oracle material, not a fast path.
pub fn commutator_direct(
    t: &DiscreteOperator,
    b: &StepFunction,
    m: u32,
    f: &StepFunction,
) -> Result<StepFunction> {
    if !same_mesh(b, f) {
        return dom_err("symbol and argument live on different meshes");
    }
    let mesh = Arc::clone(f.mesh());
    let mut out = vec![0.0f64; mesh.ncells()];
    for (c, slot) in out.iter_mut().enumerate() {
        let bc = b.value(c as u32);
        let shifted = b.map(|v| (bc - v).powi(m as i32)).mul(f)?;
        *slot = t.apply(&shifted)?.value(c as u32);
    }
    StepFunction::from_values(&mesh, out)
}

/// ∫ |T_b^m f|·|g| over the root cube.
pub fn pairing(
    t: &DiscreteOperator,
    b: &StepFunction,
    m: u32,
    f: &StepFunction,
    g: &StepFunction,
) -> Result<f64> {
    if !same_mesh(f, g) {
        return dom_err("f and g live on different meshes");
    }
    let tb = commutator(t, b, m, f)?;
    let mesh = f.mesh();
    Ok(tb
        .values()
        .iter()
        .zip(g.values())
        .zip(mesh.cell_measures())
        .map(|((&a, &b), &m)| a.abs() * b.abs() * m)
        .sum())
}

fn check_osc_exponent(s: Ext) -> Result<()> {
    match s {
        Ext::Finite(v) if v < 1.0 => par_err(format!("oscillation needs s >= 1, got {v}")),
        _ => Ok(()),
    }
}

/// Sharp grand maximal truncation
/// M^#_{T,s} f(x) = sup_{Q∋x} osc_s(T(f χ_{(3Q)^c}); Q), the sup over
/// mesh cubes, with 3Q clipped to the root.
///
/// The martingale transform needs no enumeration: Haar terms of cubes
/// inside Q are annihilated by the cutoff and all others are flat on
/// Q, so T(f χ_{(3Q)^c}) is constant on Q and the sup vanishes
/// identically. The Hilbert path subtracts kernel windows from one
/// full transform instead of re-applying the operator per cube.
pub fn sharp_grand_trunc(t: &DiscreteOperator, f: &StepFunction, s: Ext) -> Result<StepFunction> {
    check_osc_exponent(s)?;
    match t {
        DiscreteOperator::Zero => Ok(StepFunction::constant(f.mesh(), 0.0)),
        DiscreteOperator::Martingale(signs) => {
            if !Arc::ptr_eq(signs.mesh(), f.mesh()) {
                return dom_err("sign map lives on a different mesh");
            }
            Ok(StepFunction::constant(f.mesh(), 0.0))
        }
        DiscreteOperator::Hilbert => sharp_hilbert(f, s),
    }
}

fn sharp_hilbert(f: &StepFunction, s: Ext) -> Result<StepFunction> {
    let mesh = Arc::clone(f.mesh());
    let tf = hilbert(f)?;
    let vals = f.values();
    let mut best = vec![0.0f64; mesh.ncubes()];
    let mut out = vec![0.0f64; mesh.ncells()];
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for id in mesh.ids() {
        let (qa, qz) = mesh.cell_range(id).expect("1-d cubes are cell ranges");
        let reg = mesh.dilate3_region(mesh.cube(id))?;
        let (da, dz) = mesh.region_cells(reg);
        pairs.clear();
        let mut covered = 0.0;
        for c in qa..qz {
            let x = mesh.cell_center(c);
            let mut win = 0.0;
            for j in da..dz {
                let (a, b) = mesh.cell_bounds(j);
                win += vals[j as usize] * cell_kernel(a, b, x);
            }
            pairs.push((tf.value(c) - win, mesh.cell_measure(c)));
            covered += mesh.cell_measure(c);
        }
        // Operator outputs are undefined on the truncation zone, so the
        // oscillation runs over the resolvable part of Q only — this keeps
        // exactly-local transforms flat on every Q they don't see.
        let osc = osc_from_pairs(&mut pairs, covered, s)?;
        let up = mesh.parent_of(id).map_or(0.0, |p| best[p]);
        best[id] = up.max(osc);
        if mesh.is_leaf(id) {
            mesh.for_each_cell(id, |c| out[c as usize] = best[id]);
        }
    }
    StepFunction::from_values(&mesh, out)
}

/// Direct enumeration of the definition — one full operator
/// application per cube. Oracle for the fast paths above.
pub fn sharp_grand_trunc_reference(
    t: &DiscreteOperator,
    f: &StepFunction,
    s: Ext,
) -> Result<StepFunction> {
    check_osc_exponent(s)?;
    let mesh = Arc::clone(f.mesh());
    let mut best = vec![0.0f64; mesh.ncubes()];
    let mut out = vec![0.0f64; mesh.ncells()];
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for id in mesh.ids() {
        let mut masked = f.values().to_vec();
        for c in mesh.dilate3_cells(mesh.cube(id))? {
            masked[c as usize] = 0.0;
        }
        let tg = t.apply(&StepFunction::from_values(&mesh, masked)?)?;
        pairs.clear();
        let mut covered = 0.0;
        mesh.for_each_cell(id, |c| {
            pairs.push((tg.value(c), mesh.cell_measure(c)));
            covered += mesh.cell_measure(c);
        });
        // same zone convention as the fast path: oscillate over the
        // resolvable part of Q
        let osc = osc_from_pairs(&mut pairs, covered, s)?;
        let up = mesh.parent_of(id).map_or(0.0, |p| best[p]);
        best[id] = up.max(osc);
        if mesh.is_leaf(id) {
            mesh.for_each_cell(id, |c| out[c as usize] = best[id]);
        }
    }
    StepFunction::from_values(&mesh, out)
}
