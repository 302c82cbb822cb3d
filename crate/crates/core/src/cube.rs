use crate::error::{par_err, Result};

/// A dyadic cube of the unit root cube [0,1)^n, addressed by refinement
/// level and per-axis index. Level 0 is the root; each level halves every
/// axis, so a cube at level l has side 2^-l and measure 2^(-n*l).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicCube {
    level: u32,
    index: Vec<u64>,
}

impl DyadicCube {
    pub fn new(level: u32, index: Vec<u64>) -> Result<Self> {
        if index.is_empty() {
            return par_err("cube needs at least one axis");
        }
        if level >= 64 && index.iter().any(|&i| i > 0) || level < 64 {
            let cap = if level >= 63 { u64::MAX } else { 1u64 << level };
            if index.iter().any(|&i| i >= cap) {
                return par_err(format!("index out of range at level {level}"));
            }
        }
        Ok(DyadicCube { level, index })
    }

    pub fn root(dim: u32) -> Self {
        DyadicCube {
            level: 0,
            index: vec![0; dim as usize],
        }
    }

    /// 1-d convenience constructor.
    pub fn line(level: u32, index: u64) -> Self {
        DyadicCube::new(level, vec![index]).expect("valid 1-d cube")
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> &[u64] {
        &self.index
    }

    pub fn dim(&self) -> u32 {
        self.index.len() as u32
    }

    /// |Q| = 2^(-n*level), exact in f64 for every level used here.
    pub fn measure(&self) -> f64 {
        exp2i(-((self.dim() as i64) * self.level as i64))
    }

    pub fn side(&self) -> f64 {
        exp2i(-(self.level as i64))
    }

    /// Per-axis half-open bounds [lo, hi); exact when index < 2^53.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let s = self.side();
        self.index
            .iter()
            .map(|&i| (i as f64 * s, (i + 1) as f64 * s))
            .collect()
    }

    /// Lower/upper endpoint on axis 0 (the only axis for 1-d meshes).
    pub fn lo(&self) -> f64 {
        self.index[0] as f64 * self.side()
    }

    pub fn hi(&self) -> f64 {
        (self.index[0] + 1) as f64 * self.side()
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        if self.level == 0 {
            return None;
        }
        Some(DyadicCube {
            level: self.level - 1,
            index: self.index.iter().map(|&i| i / 2).collect(),
        })
    }

    /// The 2^n children, ordered by the bit pattern of the offset
    /// (axis 0 is the most significant bit).
    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.index.len();
        (0..(1usize << n))
            .map(|bits| {
                let index = self
                    .index
                    .iter()
                    .enumerate()
                    .map(|(ax, &i)| 2 * i + ((bits >> (n - 1 - ax)) as u64 & 1))
                    .collect();
                DyadicCube {
                    level: self.level + 1,
                    index,
                }
            })
            .collect()
    }

    pub fn child(&self, bits: usize) -> DyadicCube {
        let n = self.index.len();
        debug_assert!(bits < (1 << n));
        DyadicCube {
            level: self.level + 1,
            index: self
                .index
                .iter()
                .enumerate()
                .map(|(ax, &i)| 2 * i + ((bits >> (n - 1 - ax)) as u64 & 1))
                .collect(),
        }
    }

    /// True if `self` contains `other` (possibly equal).
    pub fn contains(&self, other: &DyadicCube) -> bool {
        if other.level < self.level || other.dim() != self.dim() {
            return false;
        }
        let shift = other.level - self.level;
        self.index
            .iter()
            .zip(&other.index)
            .all(|(&a, &b)| (b >> shift) == a)
    }

    /// Per-axis bounds of the concentric dilate 3Q intersected with the
    /// root cube. Endpoints are exact dyadic rationals.
    pub fn dilated3_bounds(&self) -> Vec<(f64, f64)> {
        let s = self.side();
        self.index
            .iter()
            .map(|&i| {
                let lo = if i == 0 { 0.0 } else { (i - 1) as f64 * s };
                let hi = ((i + 2) as f64 * s).min(1.0);
                (lo, hi)
            })
            .collect()
    }
}

/// 2^k with integer k, exact (covers the subnormal-free range we use).
pub(crate) fn exp2i(k: i64) -> f64 {
    (k as f64).exp2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parent_of_child_is_identity() {
        let q = DyadicCube::new(3, vec![5, 2]).unwrap();
        for c in q.children() {
            assert_eq!(c.parent().unwrap(), q);
        }
    }

    #[test]
    fn children_partition_measure() {
        let q = DyadicCube::new(2, vec![1, 3]).unwrap();
        let total: f64 = q.children().iter().map(|c| c.measure()).sum();
        assert_eq!(total, q.measure());
    }

    #[test]
    fn measure_is_exact_power() {
        let q = DyadicCube::line(5, 17);
        assert_eq!(q.measure(), 1.0 / 32.0);
        let q2 = DyadicCube::new(3, vec![1, 2]).unwrap();
        assert_eq!(q2.measure(), 1.0 / 64.0);
    }

    #[test]
    fn index_range_checked() {
        assert!(DyadicCube::new(2, vec![4]).is_err());
        assert!(DyadicCube::new(2, vec![3]).is_ok());
    }

    #[test]
    fn dilate_clips_to_root() {
        let q = DyadicCube::line(2, 1); // [1/4, 1/2)
        let b = q.dilated3_bounds();
        assert_eq!(b[0], (0.0, 0.75));
        let r = DyadicCube::root(1);
        assert_eq!(r.dilated3_bounds()[0], (0.0, 1.0));
    }

    #[test]
    fn containment() {
        let q = DyadicCube::line(1, 0);
        let deep = DyadicCube::line(4, 7); // [7/16, 8/16)
        assert!(q.contains(&deep));
        assert!(!DyadicCube::line(1, 1).contains(&deep));
    }
}
