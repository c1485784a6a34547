//! Permutation entropy of ordinal patterns over a sliding window.

use serde::{Deserialize, Serialize};

use crate::data::Series;
use crate::error::{Error, Result};

/// Normalized permutation entropies, aligned so that `values[i]` belongs to
/// the window ending at input index `i + window - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub window: usize,
    pub order: usize,
    pub values: Vec<f64>,
}

/// Plot-ready overlay row: the sample at a window's end together with that
/// window's entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlayRow {
    pub timestamp: i64,
    pub value: f64,
    pub entropy: f64,
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Lehmer index of the ordinal pattern of `window` (ties broken by earlier
/// index ranking smaller).
fn ordinal_pattern_index(window: &[f64]) -> usize {
    let m = window.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| window[a].partial_cmp(&window[b]).unwrap().then(a.cmp(&b)));
    let mut code = 0;
    for i in 0..m {
        let mut smaller_after = 0;
        for j in i + 1..m {
            if order[j] < order[i] {
                smaller_after += 1;
            }
        }
        code = code * (m - i) + smaller_after;
    }
    code
}

/// Sliding-window permutation entropy.
///
/// Every consecutive `order`-tuple inside a window contributes one ordinal
/// pattern; the entropy is the Shannon entropy of the pattern frequencies
/// normalized by `ln(order!)`, so values land in [0, 1]. The window slides
/// one step at a time with O(1) count updates.
pub fn permutation_entropy(x: &[f64], order: usize, window: usize) -> Result<EntropyProfile> {
    if !(2..=7).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "pattern order must be in 2..=7, got {order}"
        )));
    }
    let n_patterns = factorial(order);
    if window < order * n_patterns {
        return Err(Error::InvalidParameter(format!(
            "window {window} too short for order {order} (needs at least {})",
            order * n_patterns
        )));
    }
    if x.len() < window {
        return Err(Error::InsufficientData(format!(
            "series of {} shorter than window {window}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in entropy input".into()));
    }

    let patterns: Vec<usize> = x.windows(order).map(ordinal_pattern_index).collect();

    let per_window = window - order + 1; // patterns per window
    let mut counts = vec![0usize; n_patterns];
    // running sum of c*ln(c) over pattern counts
    let mut c_ln_c = 0.0;
    let add = |counts: &mut [usize], c_ln_c: &mut f64, p: usize, delta: i64| {
        let c = counts[p] as f64;
        if c > 0.0 {
            *c_ln_c -= c * c.ln();
        }
        counts[p] = (counts[p] as i64 + delta) as usize;
        let c = counts[p] as f64;
        if c > 0.0 {
            *c_ln_c += c * c.ln();
        }
    };

    for &p in &patterns[..per_window] {
        add(&mut counts, &mut c_ln_c, p, 1);
    }
    let denom = (n_patterns as f64).ln();
    let d = per_window as f64;
    let entropy_of = |c_ln_c: f64| ((d.ln() - c_ln_c / d) / denom).clamp(0.0, 1.0);

    let mut values = Vec::with_capacity(x.len() - window + 1);
    values.push(entropy_of(c_ln_c));
    for s in 1..=x.len() - window {
        add(&mut counts, &mut c_ln_c, patterns[s - 1], -1);
        add(&mut counts, &mut c_ln_c, patterns[s + per_window - 1], 1);
        values.push(entropy_of(c_ln_c));
    }

    Ok(EntropyProfile {
        window,
        order,
        values,
    })
}

/// Join a profile back onto its series: one row per window, carrying the
/// sample at the window end. Fails when the profile does not align.
pub fn entropy_overlay(series: &Series, profile: &EntropyProfile) -> Result<Vec<OverlayRow>> {
    let expected = series.len().saturating_sub(profile.window - 1);
    if profile.values.len() != expected {
        return Err(Error::InvalidParameter(format!(
            "profile of {} windows does not align with series of {} points (window {})",
            profile.values.len(),
            series.len(),
            profile.window
        )));
    }
    Ok(profile
        .values
        .iter()
        .enumerate()
        .map(|(i, &entropy)| {
            let p = series.points[i + profile.window - 1];
            OverlayRow {
                timestamp: p.timestamp,
                value: p.value,
                entropy,
            }
        })
        .collect())
}
