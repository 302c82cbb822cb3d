use std::sync::Arc;

use crate::cube::DyadicCube;
use crate::error::{dom_err, par_err, Result};
use crate::mesh::{Mesh, Region};
use crate::params::{conj, Ext, FormParams};
use crate::step::{power_segment_mass, StepFunction};

/// w(x) = scale * x^exponent on (0,1), recorded so cube masses of any
/// power of w can be evaluated in closed form (truncation zone included).
#[derive(Clone, Copy, Debug)]
pub struct PowerLaw {
    pub exponent: f64,
    pub scale: f64,
}

/// A strictly positive step function used as a measure density. The
/// optional power-law descriptor upgrades cube-mass queries from
/// cell-exact to continuum-exact, which keeps bracket constants of
/// power weights mesh-independent.
#[derive(Clone, Debug)]
pub struct Weight {
    f: StepFunction,
    power: Option<PowerLaw>,
}

/// A supremum over mesh cubes together with the cube attaining it.
#[derive(Clone, Debug)]
pub struct BracketSup {
    pub value: f64,
    pub cube: DyadicCube,
}

/// μ, λ and the Bloom weight ν with ν^(1+α) = μ^(1/(pm)) λ^(-1/(qm)).
/// ν is built cellwise from the step values of μ and λ, so the defining
/// identity holds per cell to machine precision; it carries no power
/// descriptor even when μ and λ do.
#[derive(Clone, Debug)]
pub struct BloomPair {
    pub mu: Weight,
    pub lambda: Weight,
    pub params: FormParams,
    pub nu: Weight,
}

/// Output of the A_p self-improvement formulas.
#[derive(Clone, Copy, Debug)]
pub struct SelfImprove {
    pub epsilon: f64,
    pub new_p: f64,
    pub new_ap_bound: f64,
    pub rh_index: f64,
    pub rh_bound: f64,
}

impl Weight {
    pub fn from_step(f: StepFunction) -> Result<Self> {
        if !f.values().iter().all(|&v| v > 0.0 && v.is_finite()) {
            return dom_err("weights must be strictly positive and finite on every cell");
        }
        Ok(Weight { f, power: None })
    }

    pub fn constant(mesh: &Arc<Mesh>, c: f64) -> Result<Self> {
        Weight::power(mesh, 0.0, c)
    }

    /// scale * x^c with exact cell averages; c = -1 (log masses) is out
    /// of scope and c <= -1 is not locally integrable at 0.
    pub fn power(mesh: &Arc<Mesh>, c: f64, scale: f64) -> Result<Self> {
        if c <= -1.0 {
            return par_err(format!("power-law exponent must exceed -1, got {c}"));
        }
        if !(scale > 0.0) {
            return par_err("power-law scale must be positive");
        }
        let f = StepFunction::power_averages(mesh, c, scale)?;
        let mut w = Weight::from_step(f)?;
        w.power = Some(PowerLaw { exponent: c, scale });
        Ok(w)
    }

    pub fn step(&self) -> &StepFunction {
        &self.f
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.f.mesh()
    }

    pub fn value(&self, cell: u32) -> f64 {
        self.f.value(cell)
    }

    pub fn power_law(&self) -> Option<&PowerLaw> {
        self.power.as_ref()
    }

    /// Pointwise power w^t, keeping the descriptor when present.
    pub fn pow(&self, t: f64) -> Result<Self> {
        let mut w = Weight::from_step(self.f.map(|v| v.powf(t)))?;
        w.power = self.power.map(|pl| PowerLaw {
            exponent: pl.exponent * t,
            scale: pl.scale.powf(t),
        });
        Ok(w)
    }

    /// ∫ over one cell of w (cell value times cell measure; exact in
    /// both representations since cell values are exact averages).
    pub fn cell_mass(&self, cell: u32) -> f64 {
        self.f.value(cell) * self.mesh().cell_measure(cell)
    }

    /// ∫_Q w^t. Descriptor-backed weights integrate the continuum power
    /// law over the cube's true interval (truncation zone included; a
    /// non-integrable combination returns +∞). Step-backed weights sum
    /// cell values, so the zone contributes nothing.
    pub fn mass_pow_id(&self, id: usize, t: f64) -> f64 {
        match &self.power {
            Some(pl) => {
                let q = self.mesh().cube(id);
                power_mass(pl, q.lo(), q.hi(), t)
            }
            None => self.f.cube_integrals_pow(t)[id],
        }
    }

    pub fn mass_id(&self, id: usize) -> f64 {
        self.mass_pow_id(id, 1.0)
    }

    /// ∫ over an interval of w^t (1-d), descriptor-aware.
    pub fn mass_region(&self, reg: Region, t: f64) -> f64 {
        match &self.power {
            Some(pl) => power_mass(pl, reg.lo, reg.hi, t),
            None => self.f.region_integral_pow(reg, t),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.mass_pow_id(self.mesh().root_id(), 1.0)
    }
}

fn power_mass(pl: &PowerLaw, lo: f64, hi: f64, t: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    match power_segment_mass(lo, hi, pl.exponent * t) {
        Ok(m) => pl.scale.powf(t) * m,
        Err(_) => f64::INFINITY,
    }
}

fn sup_over_cubes(mesh: &Mesh, mut f: impl FnMut(usize) -> f64) -> BracketSup {
    let mut best = f64::NEG_INFINITY;
    let mut arg = mesh.root_id();
    for id in mesh.ids() {
        let v = f(id);
        if v > best {
            best = v;
            arg = id;
        }
    }
    BracketSup {
        value: best,
        cube: mesh.cube(arg).clone(),
    }
}

/// [w]_{A_p} = sup_Q ⟨w⟩_Q ⟨w^{-1/(p-1)}⟩_Q^{p-1} over mesh cubes,
/// with the attaining cube.
pub fn ap_constant(w: &Weight, p: f64) -> Result<BracketSup> {
    if !(p > 1.0) {
        return par_err(format!("A_p needs p > 1, got {p}"));
    }
    let mesh = w.mesh();
    Ok(sup_over_cubes(mesh, |id| {
        let meas = mesh.measure(id);
        let m1 = w.mass_pow_id(id, 1.0);
        if m1 <= 0.0 {
            return 0.0;
        }
        let msig = w.mass_pow_id(id, -1.0 / (p - 1.0));
        (m1 / meas) * (msig / meas).powf(p - 1.0)
    }))
}

/// [w]_{RH_r} = sup_Q ⟨w⟩_{r,Q} / ⟨w⟩_{1,Q}.
pub fn rh_constant(w: &Weight, r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return par_err(format!("reverse Hölder needs r >= 1, got {r}"));
    }
    let mesh = w.mesh();
    Ok(sup_over_cubes(mesh, |id| {
        let meas = mesh.measure(id);
        let m1 = w.mass_pow_id(id, 1.0);
        if m1 <= 0.0 {
            return 0.0;
        }
        (w.mass_pow_id(id, r) / meas).powf(1.0 / r) / (m1 / meas)
    })
    .value
    .max(1.0))
}

/// Fujii–Wilson A_∞: sup_Q w(Q)^{-1} ∫_Q M(w χ_Q), the maximal function
/// restricted to mesh cubes inside Q. Uses the step representation of w
/// throughout so numerator and denominator discretize identically.
pub fn ainf_constant(w: &Weight) -> f64 {
    let mesh = w.mesh();
    let ints = w.step().cube_integrals_pow(1.0);
    let mut stack: Vec<(usize, f64)> = Vec::new();
    sup_over_cubes(mesh, |top| {
        let mass = ints[top];
        if mass <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        stack.clear();
        stack.push((top, 0.0));
        while let Some((id, up)) = stack.pop() {
            let run = up.max(ints[id] / mesh.measure(id));
            if mesh.is_leaf(id) {
                acc += run * mesh.measure(id);
            } else {
                for &ch in mesh.children_of(id) {
                    stack.push((ch, run));
                }
            }
        }
        acc / mass
    })
    .value
    .max(1.0)
}

/// Symmetric bracket [w]_{p,(r,s)} = sup_Q ⟨w^{-1}⟩_{pr/(p-r),Q} ⟨w⟩_{sp/(s-p),Q},
/// with the second exponent degenerating to p as s → ∞.
pub fn symmetric_bracket(w: &Weight, p: f64, r: f64, s: Ext) -> Result<f64> {
    if !(r > 0.0 && r < p) || !s.gt(p) {
        return par_err(format!("symmetric bracket needs 0 < r < p < s, got r={r}, p={p}, s={s:?}"));
    }
    let e1 = p * r / (p - r);
    let e2 = match s {
        Ext::Inf => p,
        Ext::Finite(s) => s * p / (s - p),
    };
    let mesh = w.mesh();
    Ok(sup_over_cubes(mesh, |id| {
        let meas = mesh.measure(id);
        let inv = (w.mass_pow_id(id, -e1) / meas).powf(1.0 / e1);
        let fwd = (w.mass_pow_id(id, e2) / meas).powf(1.0 / e2);
        inv * fwd
    })
    .value)
}

/// Both sides of [w^{1-p'}]_{A_{p'}} = [w]_{A_p}^{1/(p-1)}.
pub fn duality_identity(w: &Weight, p: f64) -> Result<(f64, f64)> {
    if !(p > 1.0) {
        return par_err(format!("duality needs p > 1, got {p}"));
    }
    let pp = conj(p);
    let lhs = ap_constant(&w.pow(1.0 - pp)?, pp)?.value;
    let rhs = ap_constant(w, p)?.value.powf(1.0 / (p - 1.0));
    Ok((lhs, rhs))
}

/// ν from ν^(1+α) = μ^(1/(pm)) λ^(-1/(qm)), cellwise.
pub fn bloom_weight(mu: &Weight, lambda: &Weight, params: &FormParams) -> Result<BloomPair> {
    if !Arc::ptr_eq(mu.mesh(), lambda.mesh()) {
        return dom_err("Bloom pair weights live on different meshes");
    }
    let (p, q, m) = (params.p, params.q, params.m as f64);
    let e = 1.0 + params.alpha();
    let nu_step = mu.step().combine(lambda.step(), |u, l| {
        (u.powf(1.0 / (p * m)) * l.powf(-1.0 / (q * m))).powf(1.0 / e)
    })?;
    Ok(BloomPair {
        mu: mu.clone(),
        lambda: lambda.clone(),
        params: params.clone(),
        nu: Weight::from_step(nu_step)?,
    })
}

fn abs_deviation_mass(b: &StepFunction, id: usize) -> f64 {
    let mesh = b.mesh();
    let mean = b.mean(id);
    let mut acc = 0.0;
    let mut covered = 0.0;
    mesh.for_each_cell(id, |c| {
        acc += (b.value(c) - mean).abs() * mesh.cell_measure(c);
        covered += mesh.cell_measure(c);
    });
    // zone part of graded prefixes: b vanishes there
    let gap = mesh.measure(id) - covered;
    if gap > f64::EPSILON * mesh.measure(id) {
        acc += mean.abs() * gap;
    }
    acc
}

/// Ω_ν(b,Q) = ν(Q)^{-1} ∫_Q |b - ⟨b⟩_Q|.
pub fn oscillation(b: &StepFunction, nu: &Weight, q: &DyadicCube) -> Result<f64> {
    if !Arc::ptr_eq(b.mesh(), nu.mesh()) {
        return dom_err("b and ν live on different meshes");
    }
    let id = match b.mesh().resolve(q)? {
        crate::mesh::Resolved::Exact(id) => id,
        crate::mesh::Resolved::SubCell { .. } => return Ok(0.0),
    };
    let mass = nu.mass_id(id);
    if mass <= 0.0 {
        return Ok(0.0);
    }
    Ok(abs_deviation_mass(b, id) / mass)
}

/// Weighted fractional BMO seminorm sup_Q ν(Q)^{-(1+α)} ∫_Q |b - ⟨b⟩_Q|.
/// α is the full fractional exponent in the ν power (0 for classical
/// Bloom BMO).
pub fn bmo_seminorm(b: &StepFunction, nu: &Weight, alpha: f64) -> Result<f64> {
    if !Arc::ptr_eq(b.mesh(), nu.mesh()) {
        return dom_err("b and ν live on different meshes");
    }
    let mesh = b.mesh();
    Ok(sup_over_cubes(mesh, |id| {
        let mass = nu.mass_id(id);
        if mass <= 0.0 {
            return 0.0;
        }
        abs_deviation_mass(b, id) / mass.powf(1.0 + alpha)
    })
    .value
    .max(0.0))
}

/// M^#_ν b = sup_{Q ∋ x} Ω_ν(b,Q), cellwise over mesh cubes. Its sup
/// equals bmo_seminorm(b, ν, 0) exactly.
pub fn weighted_sharp_maximal(b: &StepFunction, nu: &Weight) -> Result<StepFunction> {
    if !Arc::ptr_eq(b.mesh(), nu.mesh()) {
        return dom_err("b and ν live on different meshes");
    }
    let mesh = b.mesh().clone();
    let mut best = vec![0.0f64; mesh.ncubes()];
    let mut out = vec![0.0f64; mesh.ncells()];
    for id in mesh.ids() {
        let mass = nu.mass_id(id);
        let own = if mass <= 0.0 {
            0.0
        } else {
            abs_deviation_mass(b, id) / mass
        };
        let up = mesh.parent_of(id).map_or(0.0, |p| best[p]);
        best[id] = up.max(own);
        if mesh.is_leaf(id) {
            mesh.for_each_cell(id, |c| out[c as usize] = best[id]);
        }
    }
    StepFunction::from_values(&mesh, out)
}

/// ‖f‖_{L^p(w)} = (∫ |f|^p w)^{1/p}, cell-exact, with the largest term
/// factored out so huge values survive the powering.
pub fn lp_norm(f: &StepFunction, w: &Weight, p: Ext) -> Result<f64> {
    if !Arc::ptr_eq(f.mesh(), w.mesh()) {
        return dom_err("f and w live on different meshes");
    }
    match p {
        Ext::Inf => Ok(f.values().iter().fold(0.0f64, |a, &v| a.max(v.abs()))),
        Ext::Finite(p) if p > 0.0 => {
            let terms: Vec<f64> = (0..f.mesh().ncells() as u32)
                .map(|c| f.value(c).abs() * w.cell_mass(c).powf(1.0 / p))
                .collect();
            let top = terms.iter().fold(0.0f64, |a, &v| a.max(v));
            if top == 0.0 {
                return Ok(0.0);
            }
            let sum: f64 = terms.iter().map(|&t| (t / top).powf(p)).sum();
            Ok(top * sum.powf(1.0 / p))
        }
        Ext::Finite(p) => par_err(format!("L^p norm needs p > 0, got {p}")),
    }
}

/// ‖g‖_{L^{q'}(λ^{1-q'})}, the norm dual to L^q(λ).
pub fn lp_dual_norm(g: &StepFunction, lambda: &Weight, q: f64) -> Result<f64> {
    if !(q > 1.0) {
        return par_err(format!("dual norm needs q > 1, got {q}"));
    }
    let qp = conj(q);
    lp_norm(g, &lambda.pow(1.0 - qp)?, Ext::Finite(qp))
}

/// Quantitative self-improvement: w ∈ A_p lies in RH_{1+1/(c_n K)} with
/// constant ≤ c_n, and in A_{p-ε} with constant ≤ c_n K, where K is the
/// A_p constant and ε = (p-1)/(1 + c_n K^{1/(p-1)}).
pub fn rh_self_improve(p: f64, ap_value: f64, c_n: f64) -> Result<SelfImprove> {
    if !(p > 1.0) || !(ap_value >= 1.0) || !(c_n > 0.0) {
        return par_err(format!(
            "self-improvement needs p > 1, [w] >= 1, c_n > 0; got p={p}, [w]={ap_value}, c_n={c_n}"
        ));
    }
    let epsilon = (p - 1.0) / (1.0 + c_n * ap_value.powf(1.0 / (p - 1.0)));
    Ok(SelfImprove {
        epsilon,
        new_p: p - epsilon,
        new_ap_bound: c_n * ap_value,
        rh_index: 1.0 + 1.0 / (c_n * ap_value),
        rh_bound: c_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cell(values: [f64; 2]) -> Weight {
        let mesh = Arc::new(Mesh::uniform(1, 1).unwrap());
        Weight::from_step(StepFunction::from_values(&mesh, values.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn ap_trivial_and_two_cell() {
        let mesh = Arc::new(Mesh::uniform(1, 3).unwrap());
        let one = Weight::constant(&mesh, 1.0).unwrap();
        assert!((ap_constant(&one, 2.0).unwrap().value - 1.0).abs() < 1e-12);

        let w = two_cell([2.0, 1.0]);
        let sup = ap_constant(&w, 2.0).unwrap();
        assert!((sup.value - 9.0 / 8.0).abs() < 1e-12);
        assert_eq!(sup.cube.level(), 0);
    }

    #[test]
    fn ap_scale_invariance() {
        let mesh = Arc::new(Mesh::uniform(1, 3).unwrap());
        let vals = vec![0.5, 2.0, 1.5, 0.7, 3.0, 1.1, 0.9, 2.4];
        let w = Weight::from_step(StepFunction::from_values(&mesh, vals.clone()).unwrap()).unwrap();
        let ws = Weight::from_step(
            StepFunction::from_values(&mesh, vals.iter().map(|v| 17.0 * v).collect()).unwrap(),
        )
        .unwrap();
        for p in [1.5, 2.0, 3.0] {
            let a = ap_constant(&w, p).unwrap().value;
            let b = ap_constant(&ws, p).unwrap().value;
            assert!((a - b).abs() < 1e-10 * a);
        }
    }

    #[test]
    fn rh_oracles() {
        let w = two_cell([2.0, 1.0]);
        let got = rh_constant(&w, 2.0).unwrap();
        let expect = (2.5f64).sqrt() / 1.5;
        assert!((got - expect).abs() < 1e-12);
        assert!((rh_constant(&w, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let c = two_cell([3.0, 3.0]);
        assert!((rh_constant(&c, 2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ainf_oracles() {
        let mesh = Arc::new(Mesh::uniform(1, 2).unwrap());
        let one = Weight::constant(&mesh, 1.0).unwrap();
        assert!((ainf_constant(&one) - 1.0).abs() < 1e-12);
        let w = two_cell([2.0, 1.0]);
        assert!((ainf_constant(&w) - 7.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn duality_two_cell_self_dual() {
        let w = two_cell([2.0, 1.0]);
        let (lhs, rhs) = duality_identity(&w, 2.0).unwrap();
        assert!((lhs - 9.0 / 8.0).abs() < 1e-12);
        assert!((rhs - 9.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_bracket_constant_is_one() {
        let mesh = Arc::new(Mesh::uniform(1, 2).unwrap());
        let one = Weight::constant(&mesh, 1.0).unwrap();
        assert!((symmetric_bracket(&one, 2.0, 1.0, Ext::Finite(4.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((symmetric_bracket(&one, 2.0, 1.0, Ext::Inf).unwrap() - 1.0).abs() < 1e-12);
        assert!(symmetric_bracket(&one, 2.0, 3.0, Ext::Inf).is_err());
    }

    #[test]
    fn bloom_identities() {
        let mesh = Arc::new(Mesh::uniform(1, 2).unwrap());
        let vals = vec![0.5, 2.0, 1.5, 0.7];
        let mu =
            Weight::from_step(StepFunction::from_values(&mesh, vals.clone()).unwrap()).unwrap();
        let params = FormParams::new(1.0, Ext::Inf, 2.0, 2.0, 1).unwrap();
        let same = bloom_weight(&mu, &mu, &params).unwrap();
        for c in 0..4 {
            assert!((same.nu.value(c) - 1.0).abs() < 1e-12);
        }

        let lam = two_cell_on(&mesh, [1.0, 4.0, 0.5, 2.0]);
        let pq = bloom_weight(&mu, &lam, &params).unwrap();
        for c in 0..4 {
            let expect = (mu.value(c) / lam.value(c)).powf(1.0 / (params.p * params.m as f64));
            assert!((pq.nu.value(c) - expect).abs() < 1e-12);
        }

        let frac = FormParams::new(1.0, Ext::Inf, 2.0, 4.0, 1).unwrap();
        let bp = bloom_weight(&mu, &lam, &frac).unwrap();
        let a = frac.alpha();
        for c in 0..4 {
            let lhs = bp.nu.value(c).powf(1.0 + a);
            let rhs = mu.value(c).powf(0.5) * lam.value(c).powf(-0.25);
            assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
        }
    }

    fn two_cell_on(mesh: &Arc<Mesh>, vals: [f64; 4]) -> Weight {
        Weight::from_step(StepFunction::from_values(mesh, vals.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn bmo_half_indicator() {
        let mesh = Arc::new(Mesh::uniform(1, 3).unwrap());
        let one = Weight::constant(&mesh, 1.0).unwrap();
        let b = StepFunction::indicator(&mesh, Region::new(0.0, 0.5)).unwrap();
        let got = bmo_seminorm(&b, &one, 0.0).unwrap();
        assert!((got - 0.5).abs() < 1e-12);
        let scaled = bmo_seminorm(&b.scale(-3.0), &one, 0.0).unwrap();
        assert!((scaled - 1.5).abs() < 1e-12);
        let c = StepFunction::constant(&mesh, 4.2);
        assert_eq!(bmo_seminorm(&c, &one, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn sharp_maximal_sup_is_bmo() {
        let mesh = Arc::new(Mesh::uniform(1, 4).unwrap());
        let one = Weight::constant(&mesh, 1.0).unwrap();
        let b = StepFunction::from_fn(&mesh, |c| ((c * 37 + 11) % 17) as f64 / 5.0);
        let sharp = weighted_sharp_maximal(&b, &one).unwrap();
        let sup = sharp.values().iter().fold(0.0f64, |a, &v| a.max(v));
        let bmo = bmo_seminorm(&b, &one, 0.0).unwrap();
        assert!((sup - bmo).abs() < 1e-12);
    }

    #[test]
    fn sharp_maximal_depth_one() {
        let mesh = Arc::new(Mesh::uniform(1, 1).unwrap());
        let one = Weight::constant(&mesh, 1.0).unwrap();
        let b = StepFunction::from_values(&mesh, vec![1.0, 0.0]).unwrap();
        let sharp = weighted_sharp_maximal(&b, &one).unwrap();
        assert!((sharp.value(0) - 0.5).abs() < 1e-15);
        assert!((sharp.value(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lp_norm_oracles() {
        let mesh = Arc::new(Mesh::uniform(1, 3).unwrap());
        let one = Weight::constant(&mesh, 1.0).unwrap();
        let f = StepFunction::indicator(&mesh, Region::new(0.0, 0.5)).unwrap();
        let got = lp_norm(&f, &one, Ext::Finite(2.0)).unwrap();
        assert!((got - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((lp_norm(&f, &one, Ext::Inf).unwrap() - 1.0).abs() < 1e-15);
        let ones = StepFunction::constant(&mesh, 1.0);
        assert!((lp_norm(&ones, &one, Ext::Finite(3.0)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_mass_closed_form() {
        let mesh = Arc::new(Mesh::graded(40, 16).unwrap());
        let delta = 0.125;
        let u = Weight::power(&mesh, delta - 1.0, 1.0).unwrap();
        let full = u.mass_region(Region::new(0.0, 1.0), 1.0);
        assert!((full - 1.0 / delta).abs() < 1e-10 / delta);
        let half = u.mass_region(Region::new(0.0, 0.5), 1.0);
        assert!((half - 0.5f64.powf(delta) / delta).abs() < 1e-10 / delta);
    }

    #[test]
    fn power_ap_matches_model_every_prefix() {
        let mesh = Arc::new(Mesh::graded(40, 16).unwrap());
        let p = 2.0;
        for delta in [0.25, 0.125] {
            let w = Weight::power(&mesh, (p - 1.0) * (1.0 - delta), 1.0).unwrap();
            let model = delta.powf(1.0 - p) / (p - delta * (p - 1.0));
            let sup = ap_constant(&w, p).unwrap();
            assert!(
                (sup.value - model).abs() < 1e-9 * model,
                "delta={delta}: got {} want {model}",
                sup.value
            );
            for k in [0u32, 5, 20, 41] {
                let q = DyadicCube::line(k, 0);
                let id = match mesh.resolve(&q).unwrap() {
                    crate::mesh::Resolved::Exact(id) => id,
                    _ => unreachable!(),
                };
                let meas = mesh.measure(id);
                let val = (w.mass_pow_id(id, 1.0) / meas)
                    * (w.mass_pow_id(id, -1.0 / (p - 1.0)) / meas).powf(p - 1.0);
                assert!((val - model).abs() < 1e-9 * model, "prefix k={k}");
            }
        }
    }

    #[test]
    fn self_improve_formulas() {
        let s = rh_self_improve(2.0, 1.0, 1.0).unwrap();
        assert!((s.epsilon - 0.5).abs() < 1e-15);
        assert!((s.rh_index - 2.0).abs() < 1e-15);
        let s4 = rh_self_improve(2.0, 4.0, 1.0).unwrap();
        assert!((s4.epsilon - 0.2).abs() < 1e-15);
        assert!(s4.epsilon < s.epsilon);
        assert!((s4.new_p - 1.8).abs() < 1e-15);
        assert!((s4.new_ap_bound - 4.0).abs() < 1e-15);
    }

    #[test]
    fn dual_norm_consistency() {
        // Hölder: |∫ f g| <= ‖f‖_{L^p(λ)} ‖g‖_{L^{p'}(λ^{1-p'})} with
        // equality for the extremal pair g = f^{p-1} λ.
        let mesh = Arc::new(Mesh::uniform(1, 3).unwrap());
        let lam = Weight::from_step(StepFunction::from_fn(&mesh, |c| 0.4 + (c % 5) as f64 * 0.3))
            .unwrap();
        let f = StepFunction::from_fn(&mesh, |c| 0.2 + (c % 3) as f64);
        let p = 2.5;
        let g = f
            .abs_powf(p - 1.0)
            .mul(lam.step())
            .unwrap();
        let lhs = f.dot(&g).unwrap();
        let rhs = lp_norm(&f, &lam, Ext::Finite(p)).unwrap() * lp_dual_norm(&g, &lam, p).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * rhs);
    }
}
