//! Closed-form exponent and constant calculus for the two-weight
//! commutator estimates.
//!
//! Everything here is evaluated in arbitrary-precision rational
//! arithmetic. Floating-point inputs are converted exactly (every finite
//! f64 is a dyadic rational), so algebraic identities between the
//! formulas hold *exactly*, not up to rounding. Only the final constant
//! evaluators ([`diagonal_constants`], [`BoundDescriptor::eval`]) leave
//! the rational world, since they involve irrational powers.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{par_err, Result};
use crate::params::{Ext, FormParams};

pub type Rational = BigRational;

fn rat(x: f64) -> Result<Rational> {
    match Rational::from_float(x) {
        Some(r) => Ok(r),
        None => par_err("parameters must be finite"),
    }
}

fn rint(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn rmax(a: Rational, b: Rational) -> Rational {
    if a >= b {
        a
    } else {
        b
    }
}

/// Convenience: rational -> nearest f64 (for reporting, never for logic).
pub fn approx(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn recip_pos(den: Rational) -> Result<Rational> {
    if den <= Rational::zero() {
        return par_err("exponent formula hit a nonpositive denominator");
    }
    Ok(Rational::one() / den)
}

/// The four exponents controlling the sparse-form estimates.
///
/// The primary estimate holds for every admissible parameter tuple and
/// costs `[mu]_{A_{p/r}}^{beta_mu1} [lambda]_{A_{q/r}}^{beta_lambda1 +
/// beta_lambda2} [lambda]_{RH_{(s/q)'}}^{beta_lambda2}`. When `m >= 2`
/// and `q <= p` there is an alternative estimate
/// `[mu]_{A_{p/r}}^{beta_mu2} ([lambda]_{A_{q/r}}
/// [lambda]_{RH_{(s/q)'}})^{beta_lambda2}`. The two are incomparable in
/// general and are never merged here; consumers pick per use.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentBundle {
    pub beta_mu1: Rational,
    /// Present iff `m >= 2` and `q <= p`.
    pub beta_mu2: Option<Rational>,
    pub beta_lambda1: Rational,
    pub beta_lambda2: Rational,
}

impl ExponentBundle {
    /// Exponents `(mu A, lambda A, lambda RH)` of the primary estimate.
    pub fn primary(&self) -> (Rational, Rational, Rational) {
        (
            self.beta_mu1.clone(),
            &self.beta_lambda1 + &self.beta_lambda2,
            self.beta_lambda2.clone(),
        )
    }

    /// Exponents of the alternative estimate, when it applies.
    pub fn alternative(&self) -> Option<(Rational, Rational, Rational)> {
        self.beta_mu2.as_ref().map(|b2| {
            (
                b2.clone(),
                self.beta_lambda2.clone(),
                self.beta_lambda2.clone(),
            )
        })
    }
}

/// Evaluates the exponent formulas for the bilinear form estimate at the
/// given `(r, s, p, q, m)`. Handles the floor terms in the two partial
/// sums (empty when `floor(rm) <= 1`) and the `s = inf` limit of the
/// outer lambda exponent.
pub fn form_exponents(params: &FormParams) -> Result<ExponentBundle> {
    // Fields are public; re-run the canonical admissibility checks.
    FormParams::new(params.r, params.s, params.p, params.q, params.m)?;
    let r = rat(params.r)?;
    let p = rat(params.p)?;
    let q = rat(params.q)?;
    let m = rint(params.m as i64);
    let one = Rational::one();

    // alpha = 1/(pm) - 1/(qm); negative when q < p.
    let alpha = &one / (&p * &m) - &one / (&q * &m);
    let alpha_plus = rmax(alpha.clone(), Rational::zero());

    let rm = &r * &m;
    let rm_floor = rm.floor();
    let frac = &rm - &rm_floor;
    let k = match rm_floor.to_integer().to_u64() {
        Some(v) if v <= 4096 => v,
        _ => return par_err("r*m is out of the supported range"),
    };

    // Weight of the fractional (edge) term shared by both partial sums.
    let edge = rmax(
        (&one - &alpha_plus) * recip_pos(&r - &alpha * &p)?,
        recip_pos((&one + &alpha) * &p - &r)?,
    );

    let mut sum_mu = Rational::zero();
    let mut sum_lambda = Rational::zero();
    for j in 1..k {
        let jr = rint(j as i64);
        let term = rmax(
            (&one - &alpha_plus) * recip_pos(&r + &jr * &q * &alpha)?,
            recip_pos((&one - &jr * &alpha) * &q - &r)?,
        );
        sum_mu = sum_mu + &jr / &rm * &term;
        sum_lambda = sum_lambda + (&one - &jr / &rm) * &term;
    }

    let beta_mu1 = rmax(recip_pos(r.clone())?, recip_pos(&p - &r)?)
        + (&one - &one / &rm) * &frac * &edge
        + &q / &p * sum_mu;
    let beta_lambda1 = &p / &q / &rm * &frac * &edge + sum_lambda;
    let beta_lambda2 = outer_lambda_exponent(&q, &r, params.s, &alpha)?;
    let beta_mu2 = if params.m >= 2 && q <= p {
        Some(&rm / (&p - &r))
    } else {
        None
    };

    Ok(ExponentBundle {
        beta_mu1,
        beta_mu2,
        beta_lambda1,
        beta_lambda2,
    })
}

fn outer_lambda_exponent(q: &Rational, r: &Rational, s: Ext, alpha: &Rational) -> Result<Rational> {
    let one = Rational::one();
    let base = recip_pos(q - r)?;
    let slope = &one - alpha / r;
    Ok(match s {
        Ext::Inf => rmax(slope, base),
        Ext::Finite(sv) => {
            let s = rat(sv)?;
            rmax((&s * &slope - &one) * recip_pos(&s - q)?, base)
        }
    })
}

/// The outer exponent of the fractional-form estimate:
/// `max((s(1 - alpha/r) - 1)/(s - q), 1/(q - r))`, with the `s = inf`
/// limit `max(1 - alpha/r, 1/(q - r))`.
pub fn fractional_form_exponent(q: f64, r: f64, s: Ext, alpha: f64) -> Result<Rational> {
    if !(r >= 1.0) || !(q > r) || !s.gt(q) {
        return par_err("need 1 <= r < q < s");
    }
    if !(alpha >= 0.0) {
        return par_err("alpha must be nonnegative");
    }
    outer_lambda_exponent(&rat(q)?, &rat(r)?, s, &rat(alpha)?)
}

/// Growth profile of the local weak (1,1) constants of the operator pair
/// feeding [`diagonal_constants`]. The two slots of the profile are the
/// dual inner index and the oscillation index of the truncation bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiKind {
    /// `psi(a, b) = 1`: both truncation constants are absolute.
    Constant,
    /// `psi(a, b) = b`: constants grow linearly in the second slot.
    LinearSecond,
    /// `psi(a, b) = a + (ln a) b`.
    FirstPlusLogSecond,
}

#[derive(Debug, Clone, Copy)]
pub struct PsiOptions {
    /// Opaque structural constant multiplying both psi arguments. Only
    /// exponents are ever asserted downstream, so 1 is a fine default.
    pub c: f64,
    /// Apply the duality improvement available to essentially
    /// self-adjoint operators with [`PsiKind::LinearSecond`]: the second
    /// slot enters with exponent `min(1, 1/(p-1))` instead of 1.
    pub self_adjoint: bool,
}

impl Default for PsiOptions {
    fn default() -> Self {
        PsiOptions {
            c: 1.0,
            self_adjoint: false,
        }
    }
}

/// Constant package for the diagonal (`p = q`) commutator estimate.
#[derive(Debug, Clone, Copy)]
pub struct DiagonalConstants {
    /// `([mu][lambda])^{(m+1)/2 max(1, 1/(p-1))}`; valid for all m >= 1.
    pub k_symmetric: f64,
    /// `[mu]^{m/(p-1)} [lambda]^{max(1,1/(p-1))} + [mu]^{max(1,1/(p-1))}
    /// [lambda]^m`; valid for m >= 2 and incomparable with the symmetric
    /// branch in general.
    pub k_split: Option<f64>,
    /// `psi(c max^{1/(p-1)}, c max)` where `max = max([mu], [lambda])`.
    pub c_psi: f64,
    pub total_symmetric: f64,
    pub total_split: Option<f64>,
}

pub fn diagonal_constants(
    p: f64,
    m: u32,
    ap_mu: f64,
    ap_lambda: f64,
    psi: PsiKind,
    opts: &PsiOptions,
) -> Result<DiagonalConstants> {
    if !(p > 1.0) || !p.is_finite() {
        return par_err("p must lie in (1, inf)");
    }
    if m == 0 {
        return par_err("m must be a positive integer");
    }
    if !(ap_mu >= 1.0) || !(ap_lambda >= 1.0) {
        return par_err("A_p brackets are always >= 1");
    }
    if !(opts.c > 0.0) || !opts.c.is_finite() {
        return par_err("c must be a positive finite scalar");
    }
    let inv = 1.0 / (p - 1.0);
    let mx = inv.max(1.0);
    let k_symmetric = (ap_mu * ap_lambda).powf(0.5 * (m + 1) as f64 * mx);
    let k_split = (m >= 2).then(|| {
        ap_mu.powf(m as f64 * inv) * ap_lambda.powf(mx)
            + ap_mu.powf(mx) * ap_lambda.powi(m as i32)
    });
    let big = ap_mu.max(ap_lambda);
    let (first, second) = (opts.c * big.powf(inv), opts.c * big);
    let c_psi = match psi {
        PsiKind::Constant => 1.0,
        PsiKind::LinearSecond if opts.self_adjoint => second.powf(inv.min(1.0)),
        PsiKind::LinearSecond => second,
        PsiKind::FirstPlusLogSecond => first + first.ln() * second,
    };
    Ok(DiagonalConstants {
        k_symmetric,
        k_split,
        c_psi,
        total_symmetric: k_symmetric * c_psi,
        total_split: k_split.map(|k| k * c_psi),
    })
}

/// A norm bound of the shape `sum_i [lambda]^{a_i} [mu]^{b_i}` with
/// nonnegative rational exponents; one term in the common monomial case.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundDescriptor {
    terms: Vec<(Rational, Rational)>,
}

impl BoundDescriptor {
    pub fn monomial(lambda_exp: Rational, mu_exp: Rational) -> Result<Self> {
        Self::from_terms(vec![(lambda_exp, mu_exp)])
    }

    pub fn sum(a: (Rational, Rational), b: (Rational, Rational)) -> Result<Self> {
        Self::from_terms(vec![a, b])
    }

    fn from_terms(terms: Vec<(Rational, Rational)>) -> Result<Self> {
        if terms
            .iter()
            .any(|(a, b)| a < &Rational::zero() || b < &Rational::zero())
        {
            return par_err("descriptor exponents must be nonnegative");
        }
        Ok(BoundDescriptor { terms })
    }

    pub fn terms(&self) -> &[(Rational, Rational)] {
        &self.terms
    }

    /// Componentwise maximum of the term exponents: the smallest monomial
    /// dominating the whole descriptor on `[1, inf)^2` (brackets are
    /// always >= 1, and a k-term sum costs at most a factor k).
    pub fn envelope(&self) -> (Rational, Rational) {
        let mut a = Rational::zero();
        let mut b = Rational::zero();
        for (ta, tb) in &self.terms {
            a = rmax(a, ta.clone());
            b = rmax(b, tb.clone());
        }
        (a, b)
    }

    pub fn eval(&self, ap_lambda: f64, ap_mu: f64) -> f64 {
        self.terms
            .iter()
            .map(|(a, b)| ap_lambda.powf(approx(a)) * ap_mu.powf(approx(b)))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    FirstStronger,
    SecondStronger,
    Equal,
    Incomparable,
}

/// Componentwise comparison of descriptor envelopes: a bound is stronger
/// when neither exponent is larger and at least one is strictly smaller.
pub fn compare_bounds(d1: &BoundDescriptor, d2: &BoundDescriptor) -> Comparison {
    let (a1, b1) = d1.envelope();
    let (a2, b2) = d2.envelope();
    let first_le = a1 <= a2 && b1 <= b2;
    let second_le = a2 <= a1 && b2 <= b1;
    match (first_le, second_le) {
        (true, true) => Comparison::Equal,
        (true, false) => Comparison::FirstStronger,
        (false, true) => Comparison::SecondStronger,
        (false, false) => Comparison::Incomparable,
    }
}

/// The diagonal estimate `([lambda][mu])^{(m+1)/2 max(1, 1/(p-1))}`.
pub fn symmetric_descriptor(p: f64, m: u32) -> Result<BoundDescriptor> {
    let e = symmetric_exponent(p, m)?;
    BoundDescriptor::monomial(e.clone(), e)
}

/// Exponent of either bracket in the symmetric diagonal estimate.
pub fn symmetric_exponent(p: f64, m: u32) -> Result<Rational> {
    let p = diag_p(p)?;
    if m == 0 {
        return par_err("m must be a positive integer");
    }
    let mx = rmax(Rational::one(), recip_pos(&p - &Rational::one())?);
    Ok(rint(m as i64 + 1) / rint(2) * mx)
}

/// The two-term `m >= 2` alternative
/// `[lambda]^{max(1,1/(p-1))} [mu]^{m/(p-1)} + [lambda]^m [mu]^{max(1,1/(p-1))}`.
pub fn split_descriptor(p: f64, m: u32) -> Result<BoundDescriptor> {
    let p = diag_p(p)?;
    if m < 2 {
        return par_err("the split estimate needs m >= 2");
    }
    let one = Rational::one();
    let inv = recip_pos(&p - &one)?;
    let mx = rmax(one, inv.clone());
    let m = rint(m as i64);
    BoundDescriptor::sum((mx.clone(), &m * &inv), (m, mx))
}

fn diag_p(p: f64) -> Result<Rational> {
    if !(p > 1.0) || !p.is_finite() {
        return par_err("p must lie in (1, inf)");
    }
    rat(p)
}

/// Closed interval of p where neither diagonal estimate improves on the
/// other and sharpness is open: `[(1+3m)/(2m), (1+3m)/(m+1)]`. Degenerate
/// (a point) at m = 1, where the symmetric estimate is sharp everywhere.
pub fn incomparability_region(m: u32) -> Result<(Rational, Rational)> {
    if m == 0 {
        return par_err("m must be a positive integer");
    }
    let m = rint(m as i64);
    let top = rint(1) + rint(3) * &m;
    Ok((&top / (rint(2) * &m), top / (&m + rint(1))))
}

/// Outcome of pitting the split estimate against the symmetric one at a
/// given diagonal exponent p.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitVerdict {
    /// `p` above the region: the mu exponent drops strictly below the
    /// symmetric one (the lambda exponent gets worse).
    ImprovesMu,
    /// `p` below the region: ditto with the roles of the brackets swapped.
    ImprovesLambda,
    /// `p` inside the closed region: no improvement either way.
    Open,
}

pub fn split_verdict(p: f64, m: u32) -> Result<SplitVerdict> {
    split_verdict_exact(&diag_p(p)?, m)
}

/// Same verdict with an exact rational p, so region endpoints that are
/// not dyadic (7/3, say) can be probed exactly.
pub fn split_verdict_exact(p: &Rational, m: u32) -> Result<SplitVerdict> {
    if m < 2 {
        return par_err("the split estimate needs m >= 2");
    }
    if p <= &Rational::one() {
        return par_err("p must lie in (1, inf)");
    }
    let (lo, hi) = incomparability_region(m)?;
    Ok(if p > &hi {
        SplitVerdict::ImprovesMu
    } else if p < &lo {
        SplitVerdict::ImprovesLambda
    } else {
        SplitVerdict::Open
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn bundle(r: f64, s: Ext, p: f64, qq: f64, m: u32) -> ExponentBundle {
        form_exponents(&FormParams::new(r, s, p, qq, m).unwrap()).unwrap()
    }

    #[test]
    fn diagonal_m1_and_m2_values() {
        let b = bundle(1.0, Ext::Inf, 2.0, 2.0, 1);
        assert_eq!(b.beta_mu1, q(1, 1));
        assert_eq!(b.beta_lambda1, q(0, 1));
        assert_eq!(b.beta_lambda2, q(1, 1));
        assert_eq!(b.beta_mu2, None);

        let b = bundle(1.0, Ext::Inf, 2.0, 2.0, 2);
        assert_eq!(b.beta_mu1, q(3, 2));
        assert_eq!(b.beta_lambda1, q(1, 2));
        assert_eq!(b.beta_lambda2, q(1, 1));
        assert_eq!(b.beta_mu2, Some(q(2, 1)));
    }

    #[test]
    fn integer_rm_collapses_to_closed_form() {
        // For r*m integral, p = q, s = inf the partial sums telescope to
        // (rm+1)/2 resp. (rm-1)/2 times max(1/r, 1/(p-r)).
        for (r, m, p) in [(1.0, 1, 1.7), (1.0, 4, 3.0), (2.0, 2, 3.0), (1.5, 2, 2.5)] {
            let b = bundle(r, Ext::Inf, p, p, m);
            let rm = q((r * m as f64) as i64, 1);
            let mx = rmax(
                Rational::one() / rat(r).unwrap(),
                Rational::one() / (rat(p).unwrap() - rat(r).unwrap()),
            );
            let half = q(1, 2);
            assert_eq!(b.beta_mu1, (&rm + q(1, 1)) * &half * &mx);
            assert_eq!(b.beta_lambda1, (&rm - q(1, 1)) * &half * &mx);
        }
    }

    #[test]
    fn fractional_rm_edge_term() {
        // r = 3/2, m = 1, p = q = 2: floor(rm) = 1, so only the edge term
        // contributes. beta_mu1 = (1 + (1 - 1/rm) frac) max(1/r, 1/(p-r)).
        let b = bundle(1.5, Ext::Inf, 2.0, 2.0, 1);
        assert_eq!(b.beta_mu1, q(7, 3));
        assert_eq!(b.beta_lambda1, q(2, 3));
        // General-form identity: mu1 - lambda1 = max(1/r, 1/(p-r)) + edge
        // corrections must match (rm - k + k(k+1)/(2rm)) max(...) here.
        assert_eq!(b.beta_mu1, (q(1, 2) + q(2, 3)) * q(2, 1));
    }

    #[test]
    fn outer_exponent_finite_and_limit() {
        let b = bundle(1.0, Ext::Finite(4.0), 2.0, 2.0, 1);
        assert_eq!(b.beta_lambda2, q(3, 2));
        let binf = bundle(1.0, Ext::Inf, 2.0, 2.0, 1);
        assert_eq!(binf.beta_lambda2, q(1, 1));
        // Continuity at s = inf.
        let bbig = bundle(1.0, Ext::Finite(1e6), 2.0, 2.0, 1);
        assert!((approx(&bbig.beta_lambda2) - approx(&binf.beta_lambda2)).abs() < 1e-4);
    }

    #[test]
    fn off_diagonal_bundle_is_finite_and_nonnegative() {
        for (p, qq) in [(2.0, 4.0), (4.0, 2.0), (3.0, 1.5), (1.5, 3.0)] {
            for m in 1..=3 {
                for s in [Ext::Inf, Ext::Finite(9.0)] {
                    let b = bundle(1.0, s, p, qq, m);
                    assert!(b.beta_mu1 >= Rational::zero());
                    assert!(b.beta_lambda1 >= Rational::zero());
                    let base = Rational::one() / (rat(qq).unwrap() - Rational::one());
                    assert!(b.beta_lambda2 >= base);
                    assert_eq!(b.beta_mu2.is_some(), m >= 2 && qq <= p);
                }
            }
        }
    }

    #[test]
    fn fractional_exponent_examples() {
        assert_eq!(
            fractional_form_exponent(2.0, 1.0, Ext::Inf, 0.0).unwrap(),
            q(1, 1)
        );
        assert_eq!(
            fractional_form_exponent(2.0, 1.0, Ext::Finite(4.0), 0.25).unwrap(),
            q(1, 1)
        );
        // alpha = 0 reduces to max((s-1)/(s-q), 1/(q-r)).
        assert_eq!(
            fractional_form_exponent(2.0, 1.0, Ext::Finite(4.0), 0.0).unwrap(),
            q(3, 2)
        );
        assert!(fractional_form_exponent(2.0, 1.0, Ext::Finite(4.0), -0.1).is_err());
        assert!(fractional_form_exponent(2.0, 2.5, Ext::Inf, 0.0).is_err());
    }

    #[test]
    fn constants_at_trivial_brackets() {
        for psi in [
            PsiKind::Constant,
            PsiKind::LinearSecond,
            PsiKind::FirstPlusLogSecond,
        ] {
            let c = diagonal_constants(2.0, 1, 1.0, 1.0, psi, &PsiOptions::default()).unwrap();
            assert_eq!(c.k_symmetric, 1.0);
            assert_eq!(c.c_psi, 1.0);
            assert_eq!(c.total_symmetric, 1.0);
            assert!(c.k_split.is_none());
        }
    }

    #[test]
    fn constants_track_the_exponent_displays() {
        let t: f64 = 3.0;
        let c =
            diagonal_constants(2.0, 1, t, t, PsiKind::Constant, &PsiOptions::default()).unwrap();
        assert!((c.k_symmetric - t.powi(2)).abs() < 1e-12);

        let c =
            diagonal_constants(3.0, 2, t, t, PsiKind::Constant, &PsiOptions::default()).unwrap();
        assert!((c.k_symmetric - t.powi(3)).abs() < 1e-12);
        // Split branch: t^{m/(p-1)} t^{max(1,1/(p-1))} + t^{max} t^m.
        assert!((c.k_split.unwrap() - (t.powi(2) + t.powi(3))).abs() < 1e-12);

        let c = diagonal_constants(
            3.0,
            2,
            t,
            t,
            PsiKind::LinearSecond,
            &PsiOptions {
                c: 1.0,
                self_adjoint: true,
            },
        )
        .unwrap();
        assert!((c.c_psi - t.sqrt()).abs() < 1e-12);
        let c = diagonal_constants(
            3.0,
            2,
            t,
            t,
            PsiKind::FirstPlusLogSecond,
            &PsiOptions::default(),
        )
        .unwrap();
        assert!((c.c_psi - (t.sqrt() + t.sqrt().ln() * t)).abs() < 1e-12);
    }

    #[test]
    fn descriptor_comparisons() {
        let d = |a: i64, b: i64| BoundDescriptor::monomial(q(a, 1), q(b, 1)).unwrap();
        assert_eq!(compare_bounds(&d(1, 1), &d(1, 2)), Comparison::FirstStronger);
        assert_eq!(compare_bounds(&d(1, 2), &d(2, 1)), Comparison::Incomparable);
        assert_eq!(compare_bounds(&d(2, 1), &d(1, 1)), Comparison::SecondStronger);
        assert_eq!(compare_bounds(&d(2, 2), &d(2, 2)), Comparison::Equal);
        assert!(BoundDescriptor::monomial(q(-1, 1), q(0, 1)).is_err());
    }

    #[test]
    fn comparison_is_a_partial_order() {
        let grid: Vec<BoundDescriptor> = (0..4)
            .flat_map(|a| (0..4).map(move |b| (a, b)))
            .map(|(a, b)| BoundDescriptor::monomial(q(a, 2), q(b, 2)).unwrap())
            .collect();
        for x in &grid {
            for y in &grid {
                let xy = compare_bounds(x, y);
                let yx = compare_bounds(y, x);
                match xy {
                    Comparison::FirstStronger => assert_eq!(yx, Comparison::SecondStronger),
                    Comparison::SecondStronger => assert_eq!(yx, Comparison::FirstStronger),
                    other => assert_eq!(yx, other),
                }
                for z in &grid {
                    let yz = compare_bounds(y, z);
                    if xy == Comparison::FirstStronger && yz == Comparison::FirstStronger {
                        assert_eq!(compare_bounds(x, z), Comparison::FirstStronger);
                    }
                }
            }
        }
    }

    #[test]
    fn region_endpoints_are_exact() {
        assert_eq!(incomparability_region(2).unwrap(), (q(7, 4), q(7, 3)));
        assert_eq!(incomparability_region(1).unwrap(), (q(2, 1), q(2, 1)));
        assert_eq!(incomparability_region(3).unwrap(), (q(5, 3), q(5, 2)));
    }

    #[test]
    fn split_verdict_matches_the_region() {
        assert_eq!(split_verdict(3.0, 2).unwrap(), SplitVerdict::ImprovesMu);
        assert_eq!(split_verdict(1.5, 2).unwrap(), SplitVerdict::ImprovesLambda);
        assert_eq!(split_verdict(2.0, 2).unwrap(), SplitVerdict::Open);
        // Exactly representable endpoints sit inside the closed region.
        assert_eq!(split_verdict(1.75, 2).unwrap(), SplitVerdict::Open);
        assert_eq!(split_verdict(2.5, 3).unwrap(), SplitVerdict::Open);
        // Non-dyadic endpoint, probed exactly.
        assert_eq!(split_verdict_exact(&q(7, 3), 2).unwrap(), SplitVerdict::Open);
        assert_eq!(
            split_verdict_exact(&(q(7, 3) + q(1, 1000000)), 2).unwrap(),
            SplitVerdict::ImprovesMu
        );
        assert!(split_verdict(3.0, 1).is_err());
    }

    #[test]
    fn verdict_agrees_with_envelope_comparison() {
        for (p, m) in [(3.0, 2), (1.5, 2), (2.0, 2), (4.0, 3), (1.2, 3), (2.0, 4)] {
            let sym = symmetric_descriptor(p, m).unwrap();
            let split = split_descriptor(p, m).unwrap();
            let (sl, sm) = sym.envelope();
            let (el, em) = split.envelope();
            match split_verdict(p, m).unwrap() {
                SplitVerdict::ImprovesMu => {
                    assert!(em < sm && el > sl);
                    assert_eq!(compare_bounds(&sym, &split), Comparison::Incomparable);
                }
                SplitVerdict::ImprovesLambda => {
                    assert!(el < sl && em > sm);
                    assert_eq!(compare_bounds(&sym, &split), Comparison::Incomparable);
                }
                SplitVerdict::Open => {
                    assert!(el >= sl && em >= sm);
                }
            }
        }
    }

    #[test]
    fn split_descriptor_eval_sums_both_terms() {
        let d = split_descriptor(3.0, 2).unwrap();
        let t: f64 = 2.0;
        assert!((d.eval(t, t) - (t.powi(2) + t.powi(3))).abs() < 1e-12);
        assert!(split_descriptor(3.0, 1).is_err());
    }

    #[test]
    fn rejects_inadmissible_tuples() {
        let bad = FormParams {
            r: 2.0,
            s: Ext::Inf,
            p: 1.5,
            q: 3.0,
            m: 1,
        };
        assert!(form_exponents(&bad).is_err());
        assert!(diagonal_constants(1.0, 1, 1.0, 1.0, PsiKind::Constant, &PsiOptions::default())
            .is_err());
        assert!(diagonal_constants(2.0, 0, 1.0, 1.0, PsiKind::Constant, &PsiOptions::default())
            .is_err());
        assert!(diagonal_constants(2.0, 1, 0.5, 1.0, PsiKind::Constant, &PsiOptions::default())
            .is_err());
    }
}
