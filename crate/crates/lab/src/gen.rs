//! Deterministic instance generators.
//!
//! All randomness flows from the pair (master seed, instance id) through
//! splitmix64 into a per-instance ChaCha8 stream, so a parallel batch and
//! a serial one draw identical instances and the merge order cannot leak
//! into the results.

use std::sync::Arc;

use bloomlab_core::op::SignMap;
use bloomlab_core::sparse::{CoefficientMap, SparseFamily};
use bloomlab_core::weights::Weight;
use bloomlab_core::{Mesh, StepFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn instance_rng(seed: u64, id: u64) -> ChaCha8Rng {
    let mut state = seed ^ id.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Mean-zero Haar-band series: every cube with children contributes a
/// martingale increment of size amp·rho^level, split among the children
/// so the cube mean is untouched. Small `amp` keeps exp(series) close to
/// A_1; `rho` near 1 piles oscillation onto every scale and drives the
/// brackets up.
pub fn haar_series(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng, amp: f64, rho: f64) -> StepFunction {
    let mut vals = vec![0.0f64; mesh.ncells()];
    let mut stack = vec![mesh.root_id()];
    while let Some(id) = stack.pop() {
        let kids = mesh.children_of(id);
        if kids.is_empty() {
            continue;
        }
        let size = amp * rho.powi(mesh.cube(id).level() as i32);
        let draws: Vec<f64> = kids.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        for (&kid, &u) in kids.iter().zip(&draws) {
            let inc = size * (u - mean);
            mesh.for_each_cell(kid, |c| vals[c as usize] += inc);
            stack.push(kid);
        }
    }
    StepFunction::from_values(mesh, vals).expect("series built on its own mesh")
}

pub fn random_weight(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng, amp: f64, rho: f64) -> Weight {
    Weight::from_step(haar_series(mesh, rng, amp, rho).map(f64::exp))
        .expect("exp of a finite series is a weight")
}

/// exp(U[-spread, spread]) per cell.
pub fn positive_step(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng, spread: f64) -> StepFunction {
    StepFunction::from_fn(mesh, |_| (rng.gen_range(-1.0..1.0) * spread).exp())
}

pub fn random_signs(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng) -> SignMap {
    SignMap::from_fn(mesh, |_| if rng.gen_bool(0.5) { 1 } else { -1 })
        .expect("sign map on its own mesh")
}

/// Random stopping-time family: from each member, each grandchild joins
/// with probability 1/3 but never more than half of them, so the family
/// is 1/2-sparse by construction.
pub fn stopping_family(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng) -> SparseFamily {
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
    SparseFamily::from_ids(mesh, ids).expect("ids drawn from this mesh")
}

/// Random coefficient tree over cubes the grid can see, coefficients in
/// (0.1, 1.5].
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
    CoefficientMap::from_pairs(mesh, pairs).expect("pairs drawn from this mesh")
}

pub fn random_visible_cube(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng) -> usize {
    let visible: Vec<usize> = mesh.ids().filter(|&id| mesh.ncells_of(id) > 0).collect();
    visible[rng.gen_range(0..visible.len())]
}
