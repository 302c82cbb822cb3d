//! Haar martingale transform Σ_I ε_I ⟨f,h_I⟩ h_I on 1-d meshes, with
//! h_I = |I|^{−1/2}(χ_left − χ_right) and signs ε_I ∈ {−1,0,1}. Every
//! internal cube of a 1-d mesh splits into two equal halves, so the
//! system is orthonormal and the transform an L² contraction.

use std::sync::Arc;

use crate::error::{dom_err, par_err, Result};
use crate::mesh::Mesh;
use crate::step::StepFunction;

/// One sign per mesh cube id; only ids with two children act.
#[derive(Clone)]
pub struct SignMap {
    mesh: Arc<Mesh>,
    eps: Vec<i8>,
}

impl SignMap {
    pub fn from_fn(mesh: &Arc<Mesh>, mut f: impl FnMut(usize) -> i8) -> Result<Self> {
        if mesh.dim() != 1 {
            return dom_err("haar sign maps need a one-dimensional mesh");
        }
        let eps: Vec<i8> = mesh.ids().map(&mut f).collect();
        if eps.iter().any(|&e| e < -1 || e > 1) {
            return par_err("signs must lie in {-1, 0, 1}");
        }
        Ok(SignMap {
            mesh: Arc::clone(mesh),
            eps,
        })
    }

    pub fn constant(mesh: &Arc<Mesh>, e: i8) -> Result<Self> {
        Self::from_fn(mesh, |_| e)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn get(&self, id: usize) -> i8 {
        self.eps[id]
    }
}

/// Σ_I ε_I ⟨f,h_I⟩ h_I. The coefficient contribution on the left half
/// is ε·(∫_L f − ∫_R f)/|I|, negated on the right half.
pub fn martingale_transform(f: &StepFunction, signs: &SignMap) -> Result<StepFunction> {
    let mesh = Arc::clone(f.mesh());
    if !Arc::ptr_eq(&mesh, signs.mesh()) {
        return dom_err("sign map lives on a different mesh");
    }
    let mut ints = vec![0.0f64; mesh.ncubes()];
    for id in mesh.ids().rev() {
        let kids = mesh.children_of(id);
        if kids.is_empty() {
            let mut s = 0.0;
            mesh.for_each_cell(id, |c| s += f.value(c) * mesh.cell_measure(c));
            ints[id] = s;
        } else {
            ints[id] = kids.iter().map(|&k| ints[k]).sum();
        }
    }
    let mut out = vec![0.0f64; mesh.ncells()];
    for id in mesh.ids() {
        let kids = mesh.children_of(id);
        if signs.get(id) == 0 || kids.len() != 2 {
            continue;
        }
        let c = signs.get(id) as f64 * (ints[kids[0]] - ints[kids[1]]) / mesh.measure(id);
        mesh.for_each_cell(kids[0], |cell| out[cell as usize] += c);
        mesh.for_each_cell(kids[1], |cell| out[cell as usize] -= c);
    }
    StepFunction::from_values(&mesh, out)
}
