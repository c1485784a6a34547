//! Helpers shared by the integration test targets.

/// Maximum one-to-one matching between predictions and truths subject to
/// `|p - t| <= window`, by augmenting paths. Independent of the library's
/// greedy matcher; used as its oracle.
pub fn optimal_match_count(pred: &[usize], truth: &[usize], window: usize) -> usize {
    let feasible: Vec<Vec<usize>> = pred
        .iter()
        .map(|&p| {
            truth
                .iter()
                .enumerate()
                .filter(|(_, &t)| p.abs_diff(t) <= window)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut matched_truth: Vec<Option<usize>> = vec![None; truth.len()];

    fn augment(
        i: usize,
        feasible: &[Vec<usize>],
        matched_truth: &mut Vec<Option<usize>>,
        visited: &mut [bool],
    ) -> bool {
        for &j in &feasible[i] {
            if visited[j] {
                continue;
            }
            visited[j] = true;
            if matched_truth[j].is_none()
                || augment(matched_truth[j].unwrap(), feasible, matched_truth, visited)
            {
                matched_truth[j] = Some(i);
                return true;
            }
        }
        false
    }

    let mut count = 0;
    for i in 0..pred.len() {
        let mut visited = vec![false; truth.len()];
        if augment(i, &feasible, &mut matched_truth, &mut visited) {
            count += 1;
        }
    }
    count
}

#[allow(dead_code)]
pub fn sine(n: usize, period: usize) -> Vec<f64> {
    (0..n)
        .map(|t| (2.0 * std::f64::consts::PI * t as f64 / period as f64).sin())
        .collect()
}
