//! Two-stage step-up false-discovery-rate correction
//! (Benjamini-Krieger-Yekutieli).
//!
//! Stage one runs Benjamini-Hochberg at `alpha' = alpha / (1 + alpha)` to
//! estimate the number of true nulls `m0 = m - r1`; stage two rescales the
//! BH-adjusted values by `m0 / m`. Adjusted values carry the `1 + alpha`
//! factor, are clipped to [0, 1], and are monotone non-decreasing in rank.

/// Step-up BH adjustment of p-values given in ascending order.
fn bh_adjust_sorted(sorted: &[f64]) -> Vec<f64> {
    let m = sorted.len() as f64;
    let mut adjusted: Vec<f64> = sorted
        .iter()
        .enumerate()
        .map(|(i, &p)| p * m / (i + 1) as f64)
        .collect();
    let mut running = 1.0f64;
    for value in adjusted.iter_mut().rev() {
        running = running.min(*value);
        *value = running;
    }
    adjusted
}

/// Two-stage adjustment at the conventional `alpha = 0.05`.
pub fn fdr_adjust(p_values: &[f64]) -> Vec<f64> {
    fdr_adjust_with_alpha(p_values, 0.05)
}

/// Two-stage adjustment at a caller-chosen `alpha`.
///
/// Input p-values must lie in [0, 1]; the output is in the input order.
pub fn fdr_adjust_with_alpha(p_values: &[f64], alpha: f64) -> Vec<f64> {
    assert!(
        p_values.iter().all(|p| (0.0..=1.0).contains(p)),
        "p-values must lie in [0, 1]"
    );
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    let m = p_values.len();
    if m == 0 {
        return Vec::new();
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| p_values[i]).collect();

    let alpha_prime = alpha / (1.0 + alpha);
    let bh = bh_adjust_sorted(&sorted);
    let r1 = bh.iter().filter(|&&p| p <= alpha_prime).count();

    let scale = if r1 == 0 || r1 == m {
        1.0 + alpha
    } else {
        (1.0 + alpha) * (m - r1) as f64 / m as f64
    };

    let mut out = vec![0.0; m];
    for (rank, &original_index) in order.iter().enumerate() {
        out[original_index] = (bh[rank] * scale).min(1.0);
    }
    out
}
