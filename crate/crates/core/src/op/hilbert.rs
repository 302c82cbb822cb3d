//! Discrete Hilbert transform on 1-d meshes.
//!
//! Hf(x) = Σ_j f_j ∫_{cell j} dy/(x−y), evaluated at cell centers. The
//! per-cell integral has the closed form ln|x−a| − ln|x−b|, but that
//! difference loses essentially all digits for far-away cells, so the
//! off-cell branch is computed as log1p(w/(x−b)).

use std::sync::Arc;

use crate::error::{dom_err, Result};
use crate::mesh::Mesh;
use crate::step::StepFunction;

/// ∫_a^b dy/(x−y) for one cell [a,b): principal value ln((x−a)/(b−x))
/// when x lies strictly inside, the cancellation-safe log1p form
/// otherwise. Diverges (±∞) when x sits exactly on a or b.
#[inline]
pub fn cell_kernel(a: f64, b: f64, x: f64) -> f64 {
    if x > a && x < b {
        ((x - a) / (b - x)).ln()
    } else {
        ((b - a) / (x - b)).ln_1p()
    }
}

/// Hf at an arbitrary point, cell boundaries excluded.
pub fn hilbert_at(f: &StepFunction, x: f64) -> Result<f64> {
    let mesh = f.mesh();
    if mesh.dim() != 1 {
        return dom_err("hilbert transform is one-dimensional");
    }
    let mut acc = 0.0;
    for c in 0..mesh.ncells() as u32 {
        let v = f.value(c);
        if v != 0.0 {
            let (a, b) = mesh.cell_bounds(c);
            acc += v * cell_kernel(a, b, x);
        }
    }
    Ok(acc)
}

/// Hf at every cell center; O(#cells²).
pub fn hilbert(f: &StepFunction) -> Result<StepFunction> {
    let mesh = Arc::clone(f.mesh());
    let out = hilbert_multi(&mesh, std::slice::from_ref(&f.values()))?
        .pop()
        .expect("one input, one output");
    StepFunction::from_values(&mesh, out)
}

/// Apply H to several cell-value vectors in one pass, sharing the
/// kernel row per output point. Same O(#cells²) kernel cost as a single
/// transform — the cheap way to run a batch on a large mesh, where a
/// dense kernel table would not fit.
pub fn hilbert_multi<V: AsRef<[f64]>>(mesh: &Arc<Mesh>, inputs: &[V]) -> Result<Vec<Vec<f64>>> {
    if mesh.dim() != 1 {
        return dom_err("hilbert transform is one-dimensional");
    }
    let n = mesh.ncells();
    if inputs.iter().any(|v| v.as_ref().len() != n) {
        return dom_err("input length does not match the mesh");
    }
    let mut outs = vec![vec![0.0; n]; inputs.len()];
    let mut row = vec![0.0; n];
    for c in 0..n {
        let x = mesh.cell_center(c as u32);
        for (j, slot) in row.iter_mut().enumerate() {
            let (a, b) = mesh.cell_bounds(j as u32);
            *slot = cell_kernel(a, b, x);
        }
        for (out, v) in outs.iter_mut().zip(inputs) {
            out[c] = v.as_ref().iter().zip(&row).map(|(x, k)| x * k).sum();
        }
    }
    Ok(outs)
}

/// Dense kernel matrix k[c·n + j] = ∫_{cell j} dy/(x_c − y). Memory is
/// n² doubles — meant for the moderate uniform meshes the domination
/// recursion runs on, where many windowed applications amortize it.
pub struct HilbertTable {
    mesh: Arc<Mesh>,
    n: usize,
    k: Vec<f64>,
}

impl HilbertTable {
    pub fn new(mesh: &Arc<Mesh>) -> Result<Self> {
        if mesh.dim() != 1 {
            return dom_err("hilbert transform is one-dimensional");
        }
        let n = mesh.ncells();
        let mut k = Vec::with_capacity(n * n);
        for c in 0..n {
            let x = mesh.cell_center(c as u32);
            for j in 0..n {
                let (a, b) = mesh.cell_bounds(j as u32);
                k.push(cell_kernel(a, b, x));
            }
        }
        Ok(HilbertTable {
            mesh: Arc::clone(mesh),
            n,
            k,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// H(vals·χ_{cols})(x_c) for each c in rows; half-open ranges.
    pub fn apply_window(&self, vals: &[f64], cols: (u32, u32), rows: (u32, u32)) -> Vec<f64> {
        let n = self.n;
        (rows.0..rows.1)
            .map(|c| {
                let row = &self.k[c as usize * n..(c as usize + 1) * n];
                let mut s = 0.0;
                for j in cols.0..cols.1 {
                    s += vals[j as usize] * row[j as usize];
                }
                s
            })
            .collect()
    }

    pub fn apply(&self, vals: &[f64]) -> Vec<f64> {
        self.apply_window(vals, (0, self.n as u32), (0, self.n as u32))
    }
}
