use crate::error::{par_err, Result};

/// An exponent in (0, ∞]. Infinity shows up as the outer integrability
/// index s and in essential-sup averages; the usual limit conventions
/// (s' = 1, dual brackets, reverse Hölder index 1) are centralized here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ext {
    Finite(f64),
    Inf,
}

impl Ext {
    pub fn finite(self) -> Option<f64> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Inf => None,
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, Ext::Inf)
    }

    /// Hölder conjugate x' = x/(x-1); 1' = ∞ and ∞' = 1.
    pub fn conjugate(self) -> Ext {
        match self {
            Ext::Inf => Ext::Finite(1.0),
            Ext::Finite(x) if x == 1.0 => Ext::Inf,
            Ext::Finite(x) => Ext::Finite(x / (x - 1.0)),
        }
    }

    pub fn gt(self, x: f64) -> bool {
        match self {
            Ext::Inf => true,
            Ext::Finite(v) => v > x,
        }
    }
}

impl From<f64> for Ext {
    fn from(v: f64) -> Self {
        if v.is_infinite() {
            Ext::Inf
        } else {
            Ext::Finite(v)
        }
    }
}

/// The exponent tuple (r, s, p, q, m) of the bilinear sparse forms, with
/// the derived fractional index alpha = 1/(pm) - 1/(qm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormParams {
    pub r: f64,
    pub s: Ext,
    pub p: f64,
    pub q: f64,
    pub m: u32,
}

impl FormParams {
    pub fn new(r: f64, s: Ext, p: f64, q: f64, m: u32) -> Result<Self> {
        if !(r >= 1.0) {
            return par_err("r must lie in [1, inf)");
        }
        if m == 0 {
            return par_err("m must be a positive integer");
        }
        if !(p > r && q > r) {
            return par_err("need r < min(p, q)");
        }
        match s {
            Ext::Finite(s) if !(s > p && s > q) => {
                return par_err("need max(p, q) < s");
            }
            Ext::Finite(s) if !s.is_finite() || s <= 1.0 => {
                return par_err("s must be a finite exponent > 1 or Inf");
            }
            _ => {}
        }
        Ok(FormParams { r, s, p, q, m })
    }

    pub fn alpha(&self) -> f64 {
        let m = self.m as f64;
        1.0 / (self.p * m) - 1.0 / (self.q * m)
    }

    pub fn alpha_plus(&self) -> f64 {
        self.alpha().max(0.0)
    }

    /// t = -1/alpha for alpha < 0 (the q < p regime); ∞ on the diagonal.
    pub fn t(&self) -> Option<Ext> {
        let a = self.alpha();
        if a < 0.0 {
            Some(Ext::Finite(-1.0 / a))
        } else if a == 0.0 {
            Some(Ext::Inf)
        } else {
            None
        }
    }

    /// s' with the s = ∞ ⇒ s' = 1 convention.
    pub fn s_prime(&self) -> f64 {
        match self.s {
            Ext::Inf => 1.0,
            Ext::Finite(s) => s / (s - 1.0),
        }
    }

    /// The reverse Hölder index (s/q)' used by the weight constants;
    /// s = ∞ gives 1 (where RH_1 ≡ 1).
    pub fn rh_index(&self) -> f64 {
        match self.s {
            Ext::Inf => 1.0,
            Ext::Finite(s) => {
                let sq = s / self.q;
                sq / (sq - 1.0)
            }
        }
    }
}

pub fn conj(x: f64) -> f64 {
    debug_assert!(x > 1.0);
    x / (x - 1.0)
}
