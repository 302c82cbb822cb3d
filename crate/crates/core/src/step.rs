use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::cube::DyadicCube;
use crate::error::{dom_err, par_err, Result};
use crate::mesh::{Mesh, Region, Resolved};
use crate::params::Ext;

/// A real function constant on the cells of a mesh. Immutable after
/// construction; per-exponent integral caches are memoized behind a
/// mutex so instances can be shared across threads.
///
/// On graded meshes the truncation zone is not a cell: step functions
/// are identically zero there, while cube measures still count it.
pub struct StepFunction {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
    cube_cache: Mutex<HashMap<u64, Arc<Vec<f64>>>>,
    prefix_cache: Mutex<HashMap<u64, Arc<Vec<f64>>>>,
}

impl Clone for StepFunction {
    fn clone(&self) -> Self {
        StepFunction {
            mesh: self.mesh.clone(),
            values: self.values.clone(),
            cube_cache: Mutex::new(self.cube_cache.lock().unwrap().clone()),
            prefix_cache: Mutex::new(self.prefix_cache.lock().unwrap().clone()),
        }
    }
}

impl std::fmt::Debug for StepFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StepFunction")
            .field("ncells", &self.values.len())
            .finish()
    }
}

impl PartialEq for StepFunction {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) && self.values == other.values
    }
}

pub fn same_mesh(a: &StepFunction, b: &StepFunction) -> bool {
    Arc::ptr_eq(&a.mesh, &b.mesh)
}

impl StepFunction {
    pub fn from_values(mesh: &Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.ncells() {
            return dom_err(format!(
                "value count {} does not match mesh cells {}",
                values.len(),
                mesh.ncells()
            ));
        }
        Ok(StepFunction {
            mesh: mesh.clone(),
            values,
            cube_cache: Mutex::new(HashMap::new()),
            prefix_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn constant(mesh: &Arc<Mesh>, c: f64) -> Self {
        StepFunction::from_values(mesh, vec![c; mesh.ncells()]).unwrap()
    }

    pub fn from_fn(mesh: &Arc<Mesh>, f: impl FnMut(u32) -> f64) -> Self {
        let n = mesh.ncells() as u32;
        let values = (0..n).map(f).collect();
        StepFunction::from_values(mesh, values).unwrap()
    }

    /// Indicator of a half-open interval (1-d), sampled as the covered
    /// fraction of each cell, so coarse meshes stay mass-exact.
    pub fn indicator(mesh: &Arc<Mesh>, reg: Region) -> Result<Self> {
        if mesh.dim() != 1 {
            return dom_err("indicator regions are 1-d");
        }
        let (a, b) = mesh.region_cells(reg);
        let mut values = vec![0.0; mesh.ncells()];
        for c in a..b {
            let (lo, hi) = mesh.cell_bounds(c);
            let cov = (hi.min(reg.hi) - lo.max(reg.lo)).max(0.0);
            values[c as usize] = cov / (hi - lo);
        }
        StepFunction::from_values(mesh, values)
    }

    /// Exact cell averages of scale * x^c on a 1-d mesh. The only cell
    /// allowed to touch 0 needs c > -1.
    pub fn power_averages(mesh: &Arc<Mesh>, c: f64, scale: f64) -> Result<Self> {
        if mesh.dim() != 1 {
            return dom_err("power averages are 1-d");
        }
        let u = c + 1.0;
        let mut values = Vec::with_capacity(mesh.ncells());
        for cell in 0..mesh.ncells() as u32 {
            let (a, b) = mesh.cell_bounds(cell);
            values.push(scale * power_segment_mass(a, b, c)? / (b - a));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return par_err(format!("power cell average overflows (c = {c}, u = {u})"));
        }
        StepFunction::from_values(mesh, values)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: u32) -> f64 {
        self.values[cell as usize]
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Self {
        let values = self.values.iter().copied().map(f).collect();
        StepFunction::from_values(&self.mesh, values).unwrap()
    }

    pub fn combine(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        if !same_mesh(self, other) {
            return dom_err("step functions live on different meshes");
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        StepFunction::from_values(&self.mesh, values)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn abs_powf(&self, e: f64) -> Self {
        self.map(|v| v.abs().powf(e))
    }

    /// ∫ f dx over the whole root cube (cells only).
    pub fn total_integral(&self) -> f64 {
        self.values
            .iter()
            .zip(self.mesh.cell_measures())
            .map(|(&v, &m)| v * m)
            .sum()
    }

    /// Per-cube ∫_Q |f|^r dx, memoized per exponent, aggregated up the
    /// mesh tree in one reverse-topological sweep.
    pub fn cube_integrals_pow(&self, r: f64) -> Arc<Vec<f64>> {
        let key = r.to_bits();
        if let Some(hit) = self.cube_cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let mesh = &self.mesh;
        let mut acc = vec![0.0f64; mesh.ncubes()];
        for id in mesh.ids().rev() {
            if mesh.is_leaf(id) {
                let mut s = 0.0;
                mesh.for_each_cell(id, |c| {
                    s += powr(self.values[c as usize].abs(), r) * mesh.cell_measure(c);
                });
                acc[id] = s;
            } else {
                acc[id] = mesh.children_of(id).iter().map(|&c| acc[c]).sum();
            }
        }
        let arc = Arc::new(acc);
        self.cube_cache.lock().unwrap().insert(key, arc.clone());
        arc
    }

    /// Prefix sums of |f|^r dx over cells (1-d), for region integrals.
    fn prefix_pow(&self, r: f64) -> Arc<Vec<f64>> {
        let key = r.to_bits();
        if let Some(hit) = self.prefix_cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let mesh = &self.mesh;
        let mut pre = Vec::with_capacity(mesh.ncells() + 1);
        pre.push(0.0);
        let mut run = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            run += powr(v.abs(), r) * mesh.cell_measure(i as u32);
            pre.push(run);
        }
        let arc = Arc::new(pre);
        self.prefix_cache.lock().unwrap().insert(key, arc.clone());
        arc
    }

    /// ∫ over an arbitrary interval of |f|^r, exact across partial cells.
    pub fn region_integral_pow(&self, reg: Region, r: f64) -> f64 {
        debug_assert_eq!(self.mesh.dim(), 1);
        let (a, b) = self.mesh.region_cells(reg);
        if b <= a {
            return 0.0;
        }
        let pre = self.prefix_pow(r);
        let mut s = pre[b as usize] - pre[a as usize];
        let (lo_a, _) = self.mesh.cell_bounds(a);
        if lo_a < reg.lo {
            s -= powr(self.values[a as usize].abs(), r) * (reg.lo - lo_a);
        }
        let (_, hi_b) = self.mesh.cell_bounds(b - 1);
        if hi_b > reg.hi {
            s -= powr(self.values[(b - 1) as usize].abs(), r) * (hi_b - reg.hi);
        }
        s
    }

    /// Signed ∫ f over an interval (r = 1 without the absolute value).
    pub fn region_integral_signed(&self, reg: Region) -> f64 {
        debug_assert_eq!(self.mesh.dim(), 1);
        let (a, b) = self.mesh.region_cells(reg);
        let mut s = 0.0;
        for c in a..b {
            let (lo, hi) = self.mesh.cell_bounds(c);
            let cov = hi.min(reg.hi) - lo.max(reg.lo);
            s += self.values[c as usize] * cov;
        }
        s
    }

    /// Power mean over a region: (|reg|^-1 ∫ |f|^r)^(1/r), ess sup for ∞.
    pub fn avg_region(&self, reg: Region, r: Ext) -> Result<f64> {
        match r {
            Ext::Inf => {
                let (a, b) = self.mesh.region_cells(reg);
                Ok((a..b)
                    .map(|c| self.values[c as usize].abs())
                    .fold(0.0, f64::max))
            }
            Ext::Finite(r) if r > 0.0 => {
                let meas = reg.measure();
                if meas <= 0.0 {
                    return Ok(0.0);
                }
                Ok((self.region_integral_pow(reg, r) / meas).powf(1.0 / r))
            }
            Ext::Finite(r) => par_err(format!("power mean needs r > 0, got {r}")),
        }
    }

    /// ⟨|f|⟩_{r,Q}: the r-th power mean over a dyadic cube of the mesh.
    /// Cubes strictly inside one cell return that cell's |value|.
    pub fn avg(&self, q: &DyadicCube, r: Ext) -> Result<f64> {
        match self.mesh.resolve(q)? {
            Resolved::Exact(id) => self.avg_id(id, r),
            Resolved::SubCell { leaf } => {
                let mut out = 0.0;
                self.mesh.for_each_cell(leaf, |c| out = self.values[c as usize].abs());
                Ok(out)
            }
        }
    }

    pub fn avg_id(&self, id: usize, r: Ext) -> Result<f64> {
        match r {
            Ext::Inf => {
                let mut best = 0.0f64;
                self.mesh.for_each_cell(id, |c| {
                    best = best.max(self.values[c as usize].abs());
                });
                Ok(best)
            }
            Ext::Finite(r) if r > 0.0 => {
                let ints = self.cube_integrals_pow(r);
                Ok((ints[id] / self.mesh.measure(id)).powf(1.0 / r))
            }
            Ext::Finite(r) => par_err(format!("power mean needs r > 0, got {r}")),
        }
    }

    /// Plain average ⟨f⟩_Q (signed, r = 1).
    pub fn mean(&self, id: usize) -> f64 {
        let mut s = 0.0;
        let mesh = &self.mesh;
        mesh.for_each_cell(id, |c| {
            s += self.values[c as usize] * mesh.cell_measure(c);
        });
        s / mesh.measure(id)
    }

    /// osc_s(f;Q) = (|Q|^-2 ∫∫_{QxQ} |f(x)-f(y)|^s)^(1/s); max - min at
    /// s = ∞. Exact double sum over cell pairs (sorted O(k log k) at s=1).
    pub fn osc(&self, q: &DyadicCube, s: Ext) -> Result<f64> {
        let id = match self.mesh.resolve(q)? {
            Resolved::Exact(id) => id,
            Resolved::SubCell { .. } => return Ok(0.0),
        };
        self.osc_id(id, s)
    }

    pub fn osc_id(&self, id: usize, s: Ext) -> Result<f64> {
        let mesh = &self.mesh;
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(mesh.ncells_of(id) + 1);
        let mut covered = 0.0;
        mesh.for_each_cell(id, |c| {
            pairs.push((self.values[c as usize], mesh.cell_measure(c)));
            covered += mesh.cell_measure(c);
        });
        // graded prefixes overlap the truncation zone, where the
        // function is zero; give that mass its own sample point
        let gap = mesh.measure(id) - covered;
        if gap > f64::EPSILON * mesh.measure(id) {
            pairs.push((0.0, gap));
        }
        osc_from_pairs(&mut pairs, mesh.measure(id), s)
    }

    /// Dyadic maximal function M_r f: per cell, the sup of ⟨|f|⟩_{r,Q}
    /// over mesh cubes containing the cell, in one top-down sweep.
    pub fn maximal(&self, r: f64) -> Result<StepFunction> {
        if r <= 0.0 {
            return par_err(format!("maximal exponent must be positive, got {r}"));
        }
        let mesh = &self.mesh;
        let ints = self.cube_integrals_pow(r);
        let mut best = vec![0.0f64; mesh.ncubes()];
        let mut out = vec![0.0f64; mesh.ncells()];
        for id in mesh.ids() {
            let own = (ints[id] / mesh.measure(id)).powf(1.0 / r);
            let up = mesh.parent_of(id).map_or(0.0, |p| best[p]);
            best[id] = up.max(own);
            if mesh.is_leaf(id) {
                mesh.for_each_cell(id, |c| out[c as usize] = best[id]);
            }
        }
        StepFunction::from_values(mesh, out)
    }

    /// ∫ f·g over the root cube.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        if !same_mesh(self, other) {
            return dom_err("step functions live on different meshes");
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.mesh.cell_measures())
            .map(|((&a, &b), &m)| a * b * m)
            .sum())
    }
}

/// The oscillation core behind `osc_id`, on raw (value, mass) samples
/// summing to `total`; shared with the operator module, whose cube
/// restrictions live in scratch vectors rather than StepFunctions.
pub(crate) fn osc_from_pairs(pairs: &mut Vec<(f64, f64)>, total: f64, s: Ext) -> Result<f64> {
    if pairs.len() < 2 {
        return Ok(0.0);
    }
    match s {
        Ext::Inf => {
            let max = pairs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            let min = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            Ok(max - min)
        }
        Ext::Finite(s) if s >= 1.0 => {
            let q2 = total.powi(2);
            if s == 1.0 {
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let (mut mass_lo, mut sum_lo, mut acc) = (0.0, 0.0, 0.0);
                for &(v, m) in pairs.iter() {
                    acc += m * (v * mass_lo - sum_lo);
                    mass_lo += m;
                    sum_lo += v * m;
                }
                Ok(2.0 * acc / q2)
            } else {
                let mut acc = 0.0;
                for i in 0..pairs.len() {
                    for j in 0..i {
                        let (vi, mi) = pairs[i];
                        let (vj, mj) = pairs[j];
                        acc += (vi - vj).abs().powf(s) * mi * mj;
                    }
                }
                Ok((2.0 * acc / q2).powf(1.0 / s))
            }
        }
        Ext::Finite(s) => par_err(format!("oscillation needs s >= 1, got {s}")),
    }
}

/// |x|^r with the exact special cases r = 1, 2 (hot paths).
#[inline]
pub(crate) fn powr(x: f64, r: f64) -> f64 {
    if r == 1.0 {
        x
    } else if r == 2.0 {
        x * x
    } else {
        x.powf(r)
    }
}

/// ∫_a^b x^c dx, cancellation-safe, requiring c > -1 when a = 0.
pub fn power_segment_mass(a: f64, b: f64, c: f64) -> Result<f64> {
    debug_assert!(0.0 <= a && a < b);
    let u = c + 1.0;
    if a == 0.0 {
        if u <= 0.0 {
            return par_err(format!("x^{c} is not integrable at 0"));
        }
        return Ok(b.powf(u) / u);
    }
    if u == 0.0 {
        return Ok((b / a).ln());
    }
    Ok(a.powf(u) * (u * (b / a).ln()).exp_m1() / u)
}
