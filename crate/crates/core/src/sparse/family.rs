use std::collections::HashSet;
use std::sync::Arc;

use crate::cube::DyadicCube;
use crate::error::{dom_err, Result};
use crate::mesh::{Mesh, Resolved};

/// A finite set of mesh cubes, stored as mesh ids in ascending
/// (topological) order: ancestors precede descendants.
#[derive(Clone, Debug)]
pub struct SparseFamily {
    mesh: Arc<Mesh>,
    ids: Vec<usize>,
}

/// Greedy-certificate sparseness and Carleson packing of a family.
#[derive(Clone, Copy, Debug)]
pub struct Sparseness {
    pub eta: f64,
    pub carleson: f64,
}

impl SparseFamily {
    pub fn from_ids(mesh: &Arc<Mesh>, mut ids: Vec<usize>) -> Result<Self> {
        if ids.iter().any(|&id| id >= mesh.ncubes()) {
            return dom_err("family id out of mesh range");
        }
        ids.sort_unstable();
        ids.dedup();
        Ok(SparseFamily {
            mesh: mesh.clone(),
            ids,
        })
    }

    pub fn from_cubes(mesh: &Arc<Mesh>, cubes: &[DyadicCube]) -> Result<Self> {
        let mut ids = Vec::with_capacity(cubes.len());
        for q in cubes {
            match mesh.resolve(q)? {
                Resolved::Exact(id) => ids.push(id),
                Resolved::SubCell { .. } => {
                    return dom_err("family cube finer than the mesh");
                }
            }
        }
        SparseFamily::from_ids(mesh, ids)
    }

    pub fn root_only(mesh: &Arc<Mesh>) -> Self {
        SparseFamily::from_ids(mesh, vec![mesh.root_id()]).unwrap()
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn union(&self, other: &SparseFamily) -> Result<SparseFamily> {
        if !Arc::ptr_eq(&self.mesh, &other.mesh) {
            return dom_err("families live on different meshes");
        }
        let mut ids = self.ids.clone();
        ids.extend_from_slice(&other.ids);
        SparseFamily::from_ids(&self.mesh, ids)
    }

    /// For each member position, the position of the smallest strictly
    /// containing member (walking the mesh parent chain).
    pub fn ancestor_forest(&self) -> Vec<Option<usize>> {
        let posn: std::collections::HashMap<usize, usize> =
            self.ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        let members: HashSet<usize> = self.ids.iter().copied().collect();
        self.ids
            .iter()
            .map(|&id| {
                let mut cur = self.mesh.parent_of(id);
                while let Some(p) = cur {
                    if members.contains(&p) {
                        return Some(posn[&p]);
                    }
                    cur = self.mesh.parent_of(p);
                }
                None
            })
            .collect()
    }

    /// |E_Q| of the greedy certificate E_Q = Q minus the union of the
    /// family members strictly inside Q.
    pub fn certificate_measures(&self) -> Vec<f64> {
        let forest = self.ancestor_forest();
        let mut removed = vec![0.0f64; self.ids.len()];
        for (k, parent) in forest.iter().enumerate() {
            if let Some(p) = *parent {
                removed[p] += self.mesh.measure(self.ids[k]);
            }
        }
        self.ids
            .iter()
            .zip(&removed)
            .map(|(&id, &r)| self.mesh.measure(id) - r)
            .collect()
    }
}

/// Greedy η = min |E_Q|/|Q| (1 for the empty family) and the packing
/// constant Λ = sup over members R of Σ_{Q ⊆ R} |Q| / |R|.
pub fn verify_sparseness(s: &SparseFamily) -> Sparseness {
    if s.is_empty() {
        return Sparseness {
            eta: 1.0,
            carleson: 0.0,
        };
    }
    let mesh = s.mesh();
    let forest = s.ancestor_forest();
    let mut eta = 1.0f64;
    for (&id, &free) in s.ids().iter().zip(&s.certificate_measures()) {
        eta = eta.min(free / mesh.measure(id));
    }
    let mut below: Vec<f64> = s.ids().iter().map(|&id| mesh.measure(id)).collect();
    for k in (0..s.len()).rev() {
        if let Some(p) = forest[k] {
            below[p] += below[k];
        }
    }
    let mut carleson = 0.0f64;
    for (k, &id) in s.ids().iter().enumerate() {
        carleson = carleson.max(below[k] / mesh.measure(id));
    }
    Sparseness { eta, carleson }
}

/// Nonnegative coefficients λ_Q on finitely many mesh cubes, kept in
/// ascending id order.
#[derive(Clone, Debug)]
pub struct CoefficientMap {
    mesh: Arc<Mesh>,
    entries: Vec<(usize, f64)>,
}

impl CoefficientMap {
    pub fn from_pairs(mesh: &Arc<Mesh>, pairs: Vec<(usize, f64)>) -> Result<Self> {
        let mut entries = pairs;
        if entries.iter().any(|&(id, _)| id >= mesh.ncubes()) {
            return dom_err("coefficient id out of mesh range");
        }
        if entries.iter().any(|&(_, l)| !(l >= 0.0) || !l.is_finite()) {
            return dom_err("coefficients must be finite and nonnegative");
        }
        entries.sort_unstable_by_key(|&(id, _)| id);
        entries.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        Ok(CoefficientMap {
            mesh: mesh.clone(),
            entries,
        })
    }

    pub fn on_family(family: &SparseFamily, coeff: impl FnMut(usize) -> f64) -> Result<Self> {
        let mut f = coeff;
        let pairs = family.ids().iter().map(|&id| (id, f(id))).collect();
        CoefficientMap::from_pairs(family.mesh(), pairs)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn family(&self) -> SparseFamily {
        SparseFamily::from_ids(&self.mesh, self.entries.iter().map(|e| e.0).collect()).unwrap()
    }

    /// Σ λ_Q χ_Q as a step function.
    pub fn pile(&self) -> crate::step::StepFunction {
        let mut vals = vec![0.0f64; self.mesh.ncells()];
        for &(id, l) in &self.entries {
            self.mesh.for_each_cell(id, |c| vals[c as usize] += l);
        }
        crate::step::StepFunction::from_values(&self.mesh, vals).unwrap()
    }
}
