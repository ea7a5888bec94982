//! Study-level outcome reports.
//!
//! One report row per outcome: raw matched-group means, per-stratum and
//! weighted RTEs, effect size, test statistic, and raw/adjusted p-values.
//! Significance testing defaults to stratum-centered samples (each value
//! minus its stratum's pooled mean), so the test reflects the matched
//! within-stratum comparison rather than composition differences across
//! strata; the raw pooled comparison is available through the config.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    cohens_d, fdr_adjust_with_alpha, relative_treatment_effect, t_test, welch_t_test,
    InferenceError, OutcomeCategory, OutcomeKind, OutcomeMatrix,
};
use crate::cohort::Stratification;
use crate::config::{FdrScope, StudyParams};
use crate::corpus::Group;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub outcome: String,
    pub category: OutcomeCategory,
    pub mean_treatment: f64,
    pub mean_control: f64,
    pub n_treatment: usize,
    pub n_control: usize,
    pub per_stratum_rte: Vec<(usize, f64)>,
    pub weighted_rte: Option<f64>,
    pub cohens_d: f64,
    pub t_stat: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
}

/// Conventional significance markers on the adjusted p-value.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Assemble the full outcome table from a measured matrix.
///
/// Outcomes with fewer than two defined values in either group get a null
/// test (`t = 0`, `p = 1`, `d = 0`) rather than failing the whole report.
pub fn estimate_effects(
    matrix: &OutcomeMatrix,
    strat: &Stratification,
    params: &StudyParams,
) -> Result<Vec<OutcomeReport>, InferenceError> {
    let rtes = relative_treatment_effect(matrix, strat)?;

    let mut reports = Vec::with_capacity(matrix.specs.len());
    for (idx, spec) in matrix.specs.iter().enumerate() {
        let values_t = matrix.group_values(idx, Group::Treatment);
        let values_c = matrix.group_values(idx, Group::Control);

        // Center each defined value by its stratum's pooled mean when
        // configured; the reported means stay raw.
        let (test_t, test_c) = if params.center_t_by_stratum {
            let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
            for row in &matrix.rows {
                if let (Some(v), Some(s)) = (row.values[idx], row.stratum) {
                    let e = sums.entry(s).or_insert((0.0, 0));
                    e.0 += v;
                    e.1 += 1;
                }
            }
            let centers: BTreeMap<usize, f64> = sums
                .into_iter()
                .map(|(s, (sum, n))| (s, sum / n as f64))
                .collect();
            let mut t = Vec::new();
            let mut c = Vec::new();
            for row in &matrix.rows {
                if let (Some(v), Some(s)) = (row.values[idx], row.stratum) {
                    let centered = v - centers[&s];
                    match row.group {
                        Group::Treatment => t.push(centered),
                        Group::Control => c.push(centered),
                    }
                }
            }
            (t, c)
        } else {
            (values_t.clone(), values_c.clone())
        };

        let (d, t_stat, p_raw) = if test_t.len() < 2 || test_c.len() < 2 {
            (0.0, 0.0, 1.0)
        } else {
            let test = if params.welch_t {
                welch_t_test(&test_t, &test_c)?
            } else {
                t_test(&test_t, &test_c)?
            };
            (cohens_d(&test_t, &test_c)?, test.t_stat, test.p_two_sided)
        };

        reports.push(OutcomeReport {
            outcome: spec.name.clone(),
            category: spec.category,
            mean_treatment: if values_t.is_empty() { f64::NAN } else { mean(&values_t) },
            mean_control: if values_c.is_empty() { f64::NAN } else { mean(&values_c) },
            n_treatment: values_t.len(),
            n_control: values_c.len(),
            per_stratum_rte: rtes[idx].per_stratum.clone(),
            weighted_rte: rtes[idx].weighted,
            cohens_d: d,
            t_stat,
            p_raw,
            p_adjusted: p_raw, // corrected below
        });
    }

    // Multiple-testing correction: the lexicon-category rows form the
    // adjusted family by default; everything else keeps its raw p.
    let family: Vec<usize> = match params.fdr_scope {
        FdrScope::All => (0..matrix.specs.len()).collect(),
        FdrScope::Liwc => matrix
            .specs
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s.kind, OutcomeKind::LexiconProportion(_)))
            .map(|(i, _)| i)
            .collect(),
    };
    if !family.is_empty() {
        let raw: Vec<f64> = family.iter().map(|&i| reports[i].p_raw).collect();
        let adjusted = fdr_adjust_with_alpha(&raw, params.fdr_alpha);
        for (&i, &p) in family.iter().zip(&adjusted) {
            reports[i].p_adjusted = p;
        }
    }

    Ok(reports)
}
