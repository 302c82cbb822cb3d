//! Log-log slope fits for the scaling-rate experiments.

/// Ordinary least squares of log(value) against log(1/δ), with the
/// outlier rule for the coarsest point: if the largest δ has residual
/// beyond 2σ of the full fit it is dropped and the fit re-run — the
/// smallest deltas carry the asymptotics.
#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Residual standard deviation of the reported fit.
    pub sigma: f64,
    pub n_used: usize,
    pub excluded_largest: bool,
    pub delta_lo: f64,
    pub delta_hi: f64,
}

fn ols(xy: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = xy.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(x, y) in xy {
        sx += x;
        sy += y;
    }
    let (mx, my) = (sx / nf, sy / nf);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in xy {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xy
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let dof = (n.saturating_sub(2)).max(1) as f64;
    Some((slope, intercept, (ss / dof).sqrt()))
}

/// `points` are (δ, value) pairs; nonpositive entries are skipped.
pub fn fit(points: &[(f64, f64)]) -> Option<SlopeFit> {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(d, v)| d > 0.0 && v > 0.0)
        .map(|&(d, v)| (d, v))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let xy: Vec<(f64, f64)> = pts.iter().map(|&(d, v)| ((1.0 / d).ln(), v.ln())).collect();
    let (mut slope, mut intercept, mut sigma) = ols(&xy)?;

    // Largest δ = first after the descending sort. Judge it
    // against the fit of the *other* points: inside the full fit an
    // endpoint outlier inflates σ enough to hide itself.
    let mut excluded_largest = false;
    if pts.len() > 2 {
        if let Some((s2, i2, sig2)) = ols(&xy[1..]) {
            let r0 = (xy[0].1 - (s2 * xy[0].0 + i2)).abs();
            if r0 > (2.0 * sig2).max(1e-9) {
                slope = s2;
                intercept = i2;
                sigma = sig2;
                excluded_largest = true;
                pts.remove(0);
            }
        }
    }
    Some(SlopeFit {
        slope,
        intercept,
        sigma,
        n_used: pts.len(),
        excluded_largest,
        delta_lo: pts[pts.len() - 1].0,
        delta_hi: pts[0].0,
    })
}

impl SlopeFit {
    /// The provenance every reported slope must carry.
    pub fn params(&self, extra: &str) -> String {
        format!(
            "{extra} n={} sigma={} excluded_largest={} delta=[{},{}]",
            self.n_used, self.sigma, self.excluded_largest, self.delta_lo, self.delta_hi
        )
    }
}
