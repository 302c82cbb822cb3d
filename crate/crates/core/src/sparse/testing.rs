use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{dom_err, par_err, Result};
use crate::params::{conj, Ext};
use crate::sparse::family::{CoefficientMap, SparseFamily};
use crate::step::StepFunction;
use crate::weights::{lp_norm, Weight};

/// Local testing constants and the ascent lower bound for the best
/// constant N in Σ_Q λ_Q ⟨f⟩_{r,Q} ⟨g⟩_{s',Q} ≤ N ‖f‖_{L^p(w)} ‖g‖_{L^{q'}(σ)}.
#[derive(Clone, Copy, Debug)]
pub struct TestingReport {
    pub test1: f64,
    pub test2: f64,
    pub n_lower: f64,
}

struct Setup<'a> {
    s: &'a SparseFamily,
    w: &'a Weight,
    sigma: &'a Weight,
    coeffs: &'a CoefficientMap,
    p: f64,
    q: f64,
    r: f64,
    sx: Ext,
}

impl<'a> Setup<'a> {
    fn validate(&self) -> Result<()> {
        let Setup { p, q, r, sx, .. } = *self;
        if !(1.0 < p && p <= q) || !sx.gt(q) || !(r > 0.0 && r < p) {
            return par_err(format!(
                "testing needs 1 < p <= q < s and r in (0,p); got p={p}, q={q}, r={r}, s={sx:?}"
            ));
        }
        for m in [self.w.mesh(), self.sigma.mesh(), self.coeffs.mesh()] {
            if !Arc::ptr_eq(self.s.mesh(), m) {
                return dom_err("testing inputs live on different meshes");
            }
        }
        Ok(())
    }

    fn s_prime(&self) -> f64 {
        match self.sx {
            Ext::Inf => 1.0,
            Ext::Finite(s) => s / (s - 1.0),
        }
    }
}

/// Σ_Q λ_Q ⟨|f|⟩_{r,Q} ⟨|g|⟩_{s',Q}.
pub fn lambda_form(
    coeffs: &CoefficientMap,
    f: &StepFunction,
    g: &StepFunction,
    r: f64,
    sx: Ext,
) -> Result<f64> {
    let sp = Ext::Finite(match sx {
        Ext::Inf => 1.0,
        Ext::Finite(s) => s / (s - 1.0),
    });
    let mut acc = 0.0;
    for &(id, l) in coeffs.entries() {
        if l > 0.0 {
            acc += l * f.avg_id(id, Ext::Finite(r))? * g.avg_id(id, sp)?;
        }
    }
    Ok(acc)
}

/// The two local testing suprema of the two-weight characterization:
/// with u = w^{r/(r-p)}, v = σ^{s'/(s'-q')} and
/// τ_Q = ⟨u⟩_Q^{1/r-1} ⟨v⟩_Q^{-1/s} λ_Q/|Q|, T_R φ = Σ_{Q⊆R} τ_Q ⟨φ⟩_Q χ_Q,
/// test1 = sup_R ‖T_R u‖_{L^q(v)} / u(R)^{1/p} and
/// test2 = sup_R ‖T_R v‖_{L^{p'}(u)} / v(R)^{1/q'}, both over R ∈ S.
pub fn testing_constants(
    s: &SparseFamily,
    w: &Weight,
    sigma: &Weight,
    coeffs: &CoefficientMap,
    p: f64,
    q: f64,
    r: f64,
    sx: Ext,
    starts: &[(StepFunction, StepFunction)],
) -> Result<TestingReport> {
    let setup = Setup {
        s,
        w,
        sigma,
        coeffs,
        p,
        q,
        r,
        sx,
    };
    setup.validate()?;
    if s.is_empty() {
        return Ok(TestingReport {
            test1: 0.0,
            test2: 0.0,
            n_lower: 0.0,
        });
    }
    let mesh = s.mesh();
    let sp = setup.s_prime();
    let qp = conj(q);
    let pp = conj(p);

    let u = w.pow(r / (r - p))?;
    let v = sigma.pow(sp / (sp - qp))?;
    let lam: HashMap<usize, f64> = coeffs.entries().iter().copied().collect();
    let tau: Vec<f64> = s
        .ids()
        .iter()
        .map(|&id| {
            let meas = mesh.measure(id);
            let ubar = u.mass_id(id) / meas;
            let vfac = match sx {
                Ext::Inf => 1.0,
                Ext::Finite(sv) => (v.mass_id(id) / meas).powf(-1.0 / sv),
            };
            ubar.powf(1.0 / r - 1.0) * vfac * lam.get(&id).copied().unwrap_or(0.0) / meas
        })
        .collect();

    let local_norm = |target: &Weight, norm_w: &Weight, exp: f64, rid: usize| -> Result<f64> {
        let mut vals = vec![0.0f64; mesh.ncells()];
        let rq = mesh.cube(rid);
        for (k, &id) in s.ids().iter().enumerate() {
            if tau[k] > 0.0 && rq.contains(mesh.cube(id)) {
                let term = tau[k] * target.mass_id(id) / mesh.measure(id);
                mesh.for_each_cell(id, |c| vals[c as usize] += term);
            }
        }
        lp_norm(&StepFunction::from_values(mesh, vals)?, norm_w, Ext::Finite(exp))
    };

    let mut test1 = 0.0f64;
    let mut test2 = 0.0f64;
    for &rid in s.ids() {
        let um = u.mass_id(rid);
        let vm = v.mass_id(rid);
        if um > 0.0 {
            test1 = test1.max(local_norm(&u, &v, q, rid)? / um.powf(1.0 / p));
        }
        if vm > 0.0 {
            test2 = test2.max(local_norm(&v, &u, pp, rid)? / vm.powf(1.0 / qp));
        }
    }

    let n_lower = n_lower_ascent(&setup, starts)?;
    Ok(TestingReport {
        test1,
        test2,
        n_lower,
    })
}

/// Certified lower bound for N by alternating coordinate ascent: every
/// evaluated ratio is feasible, and the running maximum is returned.
/// For fixed g the stationary f is ((Σ_Q a_Q ⟨f^r⟩_Q^{(1-r)/r}/|Q| χ_Q)/w)^{1/(p-r)}
/// (exact in one step when r = 1), and symmetrically in g.
fn n_lower_ascent(setup: &Setup<'_>, starts: &[(StepFunction, StepFunction)]) -> Result<f64> {
    let mesh = setup.s.mesh();
    let sp = setup.s_prime();
    let qp = conj(setup.q);
    let one = StepFunction::constant(mesh, 1.0);
    let lam_map: HashMap<usize, f64> = setup.coeffs.entries().iter().copied().collect();
    let lam: Vec<f64> = setup
        .s
        .ids()
        .iter()
        .map(|id| lam_map.get(id).copied().unwrap_or(0.0))
        .collect();
    let mut best = 0.0f64;

    let ratio = |f: &StepFunction, g: &StepFunction| -> Result<f64> {
        let num = lambda_form(setup.coeffs, f, g, setup.r, setup.sx)?;
        if num <= 0.0 {
            return Ok(0.0);
        }
        let den = lp_norm(f, setup.w, Ext::Finite(setup.p))?
            * lp_norm(g, setup.sigma, Ext::Finite(qp))?;
        Ok(if den > 0.0 { num / den } else { 0.0 })
    };

    // half-step: maximize Σ a_Q ⟨φ^e⟩_Q^{1/e} over ‖φ‖_{L^t(ω)} = 1
    let half_step = |phi: &StepFunction,
                     a: &[f64],
                     e: f64,
                     t: f64,
                     omega: &Weight|
     -> Result<StepFunction> {
        let mut d = vec![0.0f64; mesh.ncells()];
        for (k, &id) in setup.s.ids().iter().enumerate() {
            if a[k] <= 0.0 {
                continue;
            }
            let avg = phi.avg_id(id, Ext::Finite(e))?;
            if avg <= 0.0 && e != 1.0 {
                continue;
            }
            let coef = a[k] * avg.powf(1.0 - e) / mesh.measure(id);
            mesh.for_each_cell(id, |c| d[c as usize] += coef);
        }
        let next = StepFunction::from_fn(mesh, |c| {
            (d[c as usize] / omega.value(c)).powf(1.0 / (t - e))
        });
        let n = lp_norm(&next, omega, Ext::Finite(t))?;
        Ok(if n > 0.0 { next.scale(1.0 / n) } else { next })
    };

    let default = [(one.clone(), one.clone())];
    let all_starts = if starts.is_empty() { &default[..] } else { starts };
    for (f0, g0) in all_starts.iter().chain(default.iter()) {
        let mut f = f0.map(f64::abs);
        let mut g = g0.map(f64::abs);
        let mut cur = ratio(&f, &g)?;
        best = best.max(cur);
        for _ in 0..60 {
            let ag: Vec<f64> = setup
                .s
                .ids()
                .iter()
                .zip(&lam)
                .map(|(&id, &l)| l * g.avg_id(id, Ext::Finite(sp)).unwrap_or(0.0))
                .collect();
            f = half_step(&f, &ag, setup.r, setup.p, setup.w)?;
            let af: Vec<f64> = setup
                .s
                .ids()
                .iter()
                .zip(&lam)
                .map(|(&id, &l)| l * f.avg_id(id, Ext::Finite(setup.r)).unwrap_or(0.0))
                .collect();
            g = half_step(&g, &af, sp, qp, setup.sigma)?;
            let next = ratio(&f, &g)?;
            best = best.max(next);
            if next <= cur * (1.0 + 1e-6) {
                break;
            }
            cur = next;
        }
    }
    Ok(best)
}
