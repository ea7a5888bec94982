//! Two-sample statistics: Cohen's d, Student's and Welch's t, the
//! two-sample Kolmogorov-Smirnov statistic, and Cohen's kappa.

use std::collections::HashMap;
use std::hash::Hash;

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::InferenceError;

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_var(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

/// Cohen's d with the (n-1)-weighted pooled standard deviation.
///
/// Zero pooled deviation yields 0 for equal means and a signed infinity
/// otherwise.
pub fn cohens_d(sample_t: &[f64], sample_c: &[f64]) -> Result<f64, InferenceError> {
    if sample_t.len() < 2 || sample_c.len() < 2 {
        return Err(InferenceError::SampleTooSmall {
            test: "cohens_d",
            min: 2,
        });
    }
    let (n_t, n_c) = (sample_t.len() as f64, sample_c.len() as f64);
    let diff = mean(sample_t) - mean(sample_c);
    let pooled = (((n_t - 1.0) * sample_var(sample_t) + (n_c - 1.0) * sample_var(sample_c))
        / (n_t + n_c - 2.0))
        .sqrt();
    if pooled == 0.0 {
        return Ok(if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        });
    }
    Ok(diff / pooled)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestResult {
    pub t_stat: f64,
    pub p_two_sided: f64,
    pub df: f64,
}

fn two_sided_p(t_stat: f64, df: f64) -> f64 {
    if t_stat == 0.0 {
        return 1.0;
    }
    if t_stat.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid t distribution");
    2.0 * dist.cdf(-t_stat.abs())
}

/// Pooled-variance two-sample t-test with `n_T + n_C - 2` degrees of
/// freedom; two-sided p-value from the t CDF (regularized incomplete
/// beta, continued-fraction evaluation).
pub fn t_test(sample_t: &[f64], sample_c: &[f64]) -> Result<TTestResult, InferenceError> {
    if sample_t.len() < 2 || sample_c.len() < 2 {
        return Err(InferenceError::SampleTooSmall {
            test: "t_test",
            min: 2,
        });
    }
    let (n_t, n_c) = (sample_t.len() as f64, sample_c.len() as f64);
    let diff = mean(sample_t) - mean(sample_c);
    let df = n_t + n_c - 2.0;
    let pooled_var =
        ((n_t - 1.0) * sample_var(sample_t) + (n_c - 1.0) * sample_var(sample_c)) / df;
    let se = (pooled_var * (1.0 / n_t + 1.0 / n_c)).sqrt();
    let t_stat = if se == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        }
    } else {
        diff / se
    };
    Ok(TTestResult {
        t_stat,
        p_two_sided: two_sided_p(t_stat, df),
        df,
    })
}

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
/// freedom.
pub fn welch_t_test(sample_t: &[f64], sample_c: &[f64]) -> Result<TTestResult, InferenceError> {
    if sample_t.len() < 2 || sample_c.len() < 2 {
        return Err(InferenceError::SampleTooSmall {
            test: "welch_t_test",
            min: 2,
        });
    }
    let (n_t, n_c) = (sample_t.len() as f64, sample_c.len() as f64);
    let (v_t, v_c) = (sample_var(sample_t), sample_var(sample_c));
    let diff = mean(sample_t) - mean(sample_c);
    let se2 = v_t / n_t + v_c / n_c;
    if se2 == 0.0 {
        let t_stat = if diff == 0.0 { 0.0 } else { f64::INFINITY.copysign(diff) };
        return Ok(TTestResult {
            t_stat,
            p_two_sided: if diff == 0.0 { 1.0 } else { 0.0 },
            df: n_t + n_c - 2.0,
        });
    }
    let df = se2 * se2
        / ((v_t / n_t).powi(2) / (n_t - 1.0) + (v_c / n_c).powi(2) / (n_c - 1.0));
    let t_stat = diff / se2.sqrt();
    Ok(TTestResult {
        t_stat,
        p_two_sided: two_sided_p(t_stat, df),
        df,
    })
}

/// Two-sample Kolmogorov-Smirnov statistic: the supremum of the absolute
/// difference of the empirical CDFs.
pub fn ks_two_sample(sample_a: &[f64], sample_b: &[f64]) -> Result<f64, InferenceError> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(InferenceError::EmptySample);
    }
    let mut a = sample_a.to_vec();
    let mut b = sample_b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (n_a, n_b) = (a.len() as f64, b.len() as f64);

    let mut max = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        let diff = (i as f64 / n_a - j as f64 / n_b).abs();
        if diff > max {
            max = diff;
        }
    }
    Ok(max)
}

/// Cohen's kappa: chance-corrected agreement between two raters.
///
/// When both raters are constant and identical, chance agreement is 1 and
/// kappa is defined as 1.
pub fn cohens_kappa<T: Eq + Hash>(labels_a: &[T], labels_b: &[T]) -> Result<f64, InferenceError> {
    if labels_a.is_empty() || labels_a.len() != labels_b.len() {
        return Err(InferenceError::LabelLengthMismatch);
    }
    let n = labels_a.len() as f64;
    let observed = labels_a
        .iter()
        .zip(labels_b)
        .filter(|(a, b)| a == b)
        .count() as f64
        / n;

    let mut marg_a: HashMap<&T, f64> = HashMap::new();
    let mut marg_b: HashMap<&T, f64> = HashMap::new();
    for (a, b) in labels_a.iter().zip(labels_b) {
        *marg_a.entry(a).or_insert(0.0) += 1.0;
        *marg_b.entry(b).or_insert(0.0) += 1.0;
    }
    let chance: f64 = marg_a
        .iter()
        .filter_map(|(label, ca)| marg_b.get(label).map(|cb| (ca / n) * (cb / n)))
        .sum();

    if chance >= 1.0 {
        return Ok(1.0);
    }
    Ok((observed - chance) / (1.0 - chance))
}
