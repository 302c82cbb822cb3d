#![allow(dead_code)]

use std::sync::Arc;

use bloomlab_core::sparse::CoefficientMap;
use bloomlab_core::weights::Weight;
use bloomlab_core::{Mesh, StepFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// exp(U[-spread, spread]) per cell: positive, with spread steering how
/// degenerate the associated weight gets.
pub fn positive_step(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng, spread: f64) -> StepFunction {
    StepFunction::from_fn(mesh, |_| (rng.gen_range(-1.0..1.0) * spread).exp())
}

pub fn signed_step(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng) -> StepFunction {
    StepFunction::from_fn(mesh, |_| rng.gen_range(-1.0..1.0))
}

pub fn weight(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng, spread: f64) -> Weight {
    Weight::from_step(positive_step(mesh, rng, spread)).unwrap()
}

/// Random coefficient tree over cubes the grid can see: every cube with
/// at least one cell joins with probability `density`, coefficients in
/// (0, 1.5].
pub fn coefficient_tree(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng, density: f64) -> CoefficientMap {
    let mut pairs = Vec::new();
    for id in mesh.ids() {
        if mesh.ncells_of(id) > 0 && rng.gen_bool(density) {
            pairs.push((id, rng.gen_range(0.1..1.5)));
        }
    }
    if pairs.is_empty() {
        pairs.push((mesh.root_id(), 1.0));
    }
    CoefficientMap::from_pairs(mesh, pairs).unwrap()
}

/// Random stopping-time family: from each member, each grandchild is
/// admitted with probability 1/3 but at most half of them ever join, so
/// the result is 1/2-sparse by construction.
pub fn stopping_family(
    mesh: &Arc<Mesh>,
    rng: &mut ChaCha8Rng,
) -> bloomlab_core::sparse::SparseFamily {
    let mut ids = vec![mesh.root_id()];
    let mut frontier = vec![mesh.root_id()];
    while let Some(q) = frontier.pop() {
        let mut grandkids = Vec::new();
        for &c in mesh.children_of(q) {
            grandkids.extend_from_slice(mesh.children_of(c));
        }
        if grandkids.is_empty() {
            continue;
        }
        let cap = grandkids.len() / 2;
        let mut taken = 0;
        for &g in &grandkids {
            if taken < cap && rng.gen_bool(1.0 / 3.0) {
                ids.push(g);
                frontier.push(g);
                taken += 1;
            }
        }
    }
    bloomlab_core::sparse::SparseFamily::from_ids(mesh, ids).unwrap()
}
