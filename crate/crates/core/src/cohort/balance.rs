//! Covariate balance diagnostics.
//!
//! The standardized mean difference of a covariate is the absolute group
//! mean difference divided by the pooled standard deviation
//! `sqrt((var_T + var_C) / 2)` (unbiased variances). Matched figures are
//! computed within each retained stratum and averaged weighted by the
//! stratum treatment count.

use serde::{Deserialize, Serialize};

use super::{CohortError, CovariateSchema, CovariateVector, Stratification};
use crate::corpus::Group;

/// Before/after balance of one covariate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovariateBalance {
    pub name: String,
    pub smd_unmatched: f64,
    pub smd_matched: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceReport {
    pub rows: Vec<CovariateBalance>,
    pub max_unmatched: f64,
    pub mean_unmatched: f64,
    pub max_matched: f64,
    pub mean_matched: f64,
    pub threshold: f64,
    pub pass: bool,
}

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

/// Standardized mean difference between two samples.
///
/// Zero pooled variance with equal means is 0; with different means the
/// difference is irreducible and reported as infinity.
pub fn smd(sample_t: &[f64], sample_c: &[f64]) -> f64 {
    let diff = (mean(sample_t) - mean(sample_c)).abs();
    let pooled = ((sample_var(sample_t) + sample_var(sample_c)) / 2.0).sqrt();
    if pooled == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / pooled
    }
}

/// Per-covariate SMD before matching (full sample) and after matching
/// (retained strata, treatment-count weighted).
pub fn balance_report(
    schema: &CovariateSchema,
    vectors: &[CovariateVector],
    strat: &Stratification,
    threshold: f64,
) -> Result<BalanceReport, CohortError> {
    let retained = strat.retained_strata();
    if retained.is_empty() {
        return Err(CohortError::ZeroRetainedStrata {
            n_strata: strat.n_strata(),
            min_stratum_size: 0,
            max_treatment: 0,
            max_control: 0,
        });
    }
    for v in vectors {
        if v.values.len() != schema.len() {
            return Err(CohortError::DimensionMismatch {
                got: v.values.len(),
                want: schema.len(),
            });
        }
    }

    let mut rows = Vec::with_capacity(schema.len());
    for (j, name) in schema.names.iter().enumerate() {
        let column = |pred: &dyn Fn(&CovariateVector) -> bool| -> (Vec<f64>, Vec<f64>) {
            let mut t = Vec::new();
            let mut c = Vec::new();
            for v in vectors.iter().filter(|v| pred(v)) {
                match v.group {
                    Group::Treatment => t.push(v.values[j]),
                    Group::Control => c.push(v.values[j]),
                }
            }
            (t, c)
        };

        let (t_all, c_all) = column(&|_| true);
        let smd_unmatched = smd(&t_all, &c_all);

        let mut weighted = 0.0;
        let mut weight_sum = 0.0;
        for &s in &retained {
            let (t_s, c_s) =
                column(&|v| strat.retained_stratum_of(&v.author_id) == Some(s));
            if t_s.is_empty() || c_s.is_empty() {
                continue;
            }
            let w = strat.treatment_count(s) as f64;
            weighted += w * smd(&t_s, &c_s);
            weight_sum += w;
        }
        let smd_matched = if weight_sum > 0.0 { weighted / weight_sum } else { f64::NAN };

        rows.push(CovariateBalance {
            name: name.clone(),
            smd_unmatched,
            smd_matched,
        });
    }

    let max_unmatched = rows.iter().map(|r| r.smd_unmatched).fold(0.0, f64::max);
    let mean_unmatched = rows.iter().map(|r| r.smd_unmatched).sum::<f64>() / rows.len() as f64;
    let max_matched = rows.iter().map(|r| r.smd_matched).fold(0.0, f64::max);
    let mean_matched = rows.iter().map(|r| r.smd_matched).sum::<f64>() / rows.len() as f64;

    Ok(BalanceReport {
        rows,
        max_unmatched,
        mean_unmatched,
        max_matched,
        mean_matched,
        threshold,
        pass: max_matched < threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smd_direct_formula_evaluation() {
        // means 1.0 vs 0.5, both variances 1.0 => pooled sd 1.0, SMD 0.5
        let base: Vec<f64> = vec![-1.0, 0.0, 0.0, 1.0];
        let var = sample_var(&base);
        let scale = 1.0 / var.sqrt();
        let t: Vec<f64> = base.iter().map(|v| 1.0 + v * scale).collect();
        let c: Vec<f64> = base.iter().map(|v| 0.5 + v * scale).collect();
        assert_relative_eq!(smd(&t, &c), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn identical_distributions_have_zero_smd() {
        let s = vec![0.3, 0.9, 1.8, 2.2];
        assert_relative_eq!(smd(&s, &s), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_variance_rules() {
        assert_eq!(smd(&[2.0, 2.0], &[2.0, 2.0]), 0.0);
        assert!(smd(&[2.0, 2.0], &[3.0, 3.0]).is_infinite());
    }

    #[test]
    fn smd_is_scale_invariant() {
        let t = vec![1.0, 2.0, 3.0, 4.5];
        let c = vec![0.5, 2.5, 2.0, 5.0];
        let base = smd(&t, &c);
        for factor in [0.001, 0.5, 3.0, 1e6] {
            let ts: Vec<f64> = t.iter().map(|v| v * factor).collect();
            let cs: Vec<f64> = c.iter().map(|v| v * factor).collect();
            assert_relative_eq!(smd(&ts, &cs), base, epsilon = 1e-12);
        }
    }
}
