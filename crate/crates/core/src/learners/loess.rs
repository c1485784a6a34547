//! Locally weighted least-squares smoothing with tri-cubic weights.

use crate::error::{Error, Result};

/// Tri-cubic weight `(1 - d^3)^3` for a normalized distance in [0, 1].
#[inline]
pub fn tricubic(delta: f64) -> f64 {
    let d = delta.clamp(0.0, 1.0);
    let c = 1.0 - d * d * d;
    c * c * c
}

/// Smooth `x` by local polynomial regression of the given degree (0 or 1)
/// over the `k` nearest neighbors of each index.
///
/// Neighbor distances are normalized to [0, 1] over the window
/// (`delta = (d - min) / (max - min)`) and mapped through the tri-cubic
/// weight; the fit solves the weighted normal equations. Windows whose
/// weighted design is degenerate fall back to the weighted mean.
pub fn loess_smooth(x: &[f64], k: usize, degree: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if degree > 1 {
        return Err(Error::InvalidParameter(format!(
            "loess degree must be 0 or 1, got {degree}"
        )));
    }
    if k < degree + 1 {
        return Err(Error::InvalidParameter(format!(
            "loess window {k} too small for degree {degree}"
        )));
    }
    if k > n || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "loess window {k} exceeds series length {n}"
        )));
    }

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = neighbor_window(i, n, k);
        out.push(fit_local(x, i, lo, hi, degree));
    }
    Ok(out)
}

/// Index range [lo, hi) of the k nearest neighbors of `i`, ties toward
/// smaller indices.
fn neighbor_window(i: usize, n: usize, k: usize) -> (usize, usize) {
    let mut lo = i;
    let mut hi = i + 1;
    while hi - lo < k {
        let left = lo > 0;
        let right = hi < n;
        if left && (!right || i - (lo - 1) <= hi - i) {
            lo -= 1;
        } else {
            hi += 1;
        }
    }
    (lo, hi)
}

fn fit_local(x: &[f64], center: usize, lo: usize, hi: usize, degree: usize) -> f64 {
    // The window always contains the center, so the minimum distance is 0.
    let span = (hi - 1 - center).max(center - lo) as f64;

    let mut sw = 0.0;
    let mut swy = 0.0;
    let mut swt = 0.0;
    let mut swtt = 0.0;
    let mut swty = 0.0;
    for (j, &xj) in x.iter().enumerate().take(hi).skip(lo) {
        let t = j as f64 - center as f64;
        let w = if span > 0.0 {
            tricubic(t.abs() / span)
        } else {
            1.0
        };
        sw += w;
        swy += w * xj;
        swt += w * t;
        swtt += w * t * t;
        swty += w * t * xj;
    }

    if degree == 1 {
        let det = sw * swtt - swt * swt;
        if det.abs() > 1e-12 * (sw * swtt).abs().max(f64::MIN_POSITIVE) {
            // Intercept of the weighted linear fit, evaluated at the center.
            return (swtt * swy - swt * swty) / det;
        }
    }
    swy / sw
}
