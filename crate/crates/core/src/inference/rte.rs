//! Relative treatment effects.
//!
//! The per-stratum RTE of an outcome is the ratio of the treatment group
//! mean to the control group mean within that stratum; the study-level
//! figure averages the per-stratum ratios weighted by each stratum's
//! treatment membership count.

use serde::{Deserialize, Serialize};

use super::{InferenceError, OutcomeMatrix};
use crate::cohort::Stratification;
use crate::corpus::Group;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RteEstimate {
    pub outcome: String,
    /// `(stratum index, RTE)` for every retained stratum with a valid
    /// ratio.
    pub per_stratum: Vec<(usize, f64)>,
    /// Treatment-count weighted average of the per-stratum RTEs; absent
    /// when no stratum produced a valid ratio.
    pub weighted: Option<f64>,
    /// Strata dropped for this outcome, with the reason; their weight is
    /// removed from the average.
    pub skipped: Vec<(usize, String)>,
}

/// Per-stratum and weighted RTEs for every outcome in the matrix.
///
/// A stratum is skipped for an outcome when either group has no defined
/// measurement in it or when the control mean is zero (the ratio is
/// undefined); its weight is removed rather than redistributed.
pub fn relative_treatment_effect(
    matrix: &OutcomeMatrix,
    strat: &Stratification,
) -> Result<Vec<RteEstimate>, InferenceError> {
    if matrix.rows.iter().any(|r| r.stratum.is_none()) {
        return Err(InferenceError::MissingStrata);
    }
    let retained = strat.retained_strata();

    let estimates = matrix
        .specs
        .iter()
        .enumerate()
        .map(|(idx, spec)| {
            let mut per_stratum = Vec::new();
            let mut skipped = Vec::new();
            for &s in &retained {
                let mut sum_t = 0.0;
                let mut n_t = 0usize;
                let mut sum_c = 0.0;
                let mut n_c = 0usize;
                for row in matrix.rows.iter().filter(|r| r.stratum == Some(s)) {
                    if let Some(v) = row.values[idx] {
                        match row.group {
                            Group::Treatment => {
                                sum_t += v;
                                n_t += 1;
                            }
                            Group::Control => {
                                sum_c += v;
                                n_c += 1;
                            }
                        }
                    }
                }
                if n_t == 0 || n_c == 0 {
                    skipped.push((s, "no defined measurements in one group".into()));
                    continue;
                }
                let mean_c = sum_c / n_c as f64;
                if mean_c == 0.0 {
                    skipped.push((s, "control mean is zero".into()));
                    continue;
                }
                per_stratum.push((s, (sum_t / n_t as f64) / mean_c));
            }

            let weight_sum: f64 = per_stratum
                .iter()
                .map(|&(s, _)| strat.treatment_count(s) as f64)
                .sum();
            let weighted = if weight_sum > 0.0 {
                Some(
                    per_stratum
                        .iter()
                        .map(|&(s, rte)| strat.treatment_count(s) as f64 * rte)
                        .sum::<f64>()
                        / weight_sum,
                )
            } else {
                None
            };

            RteEstimate {
                outcome: spec.name.clone(),
                per_stratum,
                weighted,
                skipped,
            }
        })
        .collect();

    Ok(estimates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::{stratify, ScoredIndividual};
    use crate::config::StudyParams;
    use crate::corpus::AuthorId;
    use crate::inference::{OutcomeCategory, OutcomeKind, OutcomeRow, OutcomeSpec};
    use approx::assert_relative_eq;

    /// Build a two-stratum world: stratum 0 with `w0` treatment members,
    /// stratum 1 with `w1`, and enough controls everywhere.
    fn fixture(
        w0: usize,
        w1: usize,
        value_of: impl Fn(Group, usize) -> Option<f64>,
    ) -> (OutcomeMatrix, Stratification) {
        let mut scored = Vec::new();
        let mut rows = Vec::new();
        let mut add = |author: String, group: Group, stratum: usize| {
            let score = if stratum == 0 { 0.25 } else { 0.75 };
            scored.push(ScoredIndividual {
                author_id: AuthorId(author.clone()),
                group,
                score,
            });
            rows.push(OutcomeRow {
                author_id: AuthorId(author),
                group,
                stratum: Some(stratum),
                values: vec![value_of(group, stratum)],
            });
        };
        for i in 0..w0 {
            add(format!("t0-{i}"), Group::Treatment, 0);
        }
        for i in 0..w1 {
            add(format!("t1-{i}"), Group::Treatment, 1);
        }
        for i in 0..w0.max(w1) {
            add(format!("c0-{i}"), Group::Control, 0);
            add(format!("c1-{i}"), Group::Control, 1);
        }
        let params = StudyParams {
            n_strata: 2,
            min_stratum_size: 1,
            trim_sd: 1e9,
            ..StudyParams::default()
        };
        let strat = stratify(&scored, &params).unwrap();
        let matrix = OutcomeMatrix {
            specs: vec![OutcomeSpec {
                name: "outcome".into(),
                category: OutcomeCategory::Behavioral,
                kind: OutcomeKind::Activity,
            }],
            rows,
            excluded: vec![],
        };
        (matrix, strat)
    }

    #[test]
    fn equal_means_give_unit_rte() {
        let (matrix, strat) = fixture(50, 150, |_, _| Some(3.5));
        let rte = relative_treatment_effect(&matrix, &strat).unwrap();
        assert_relative_eq!(rte[0].weighted.unwrap(), 1.0, epsilon = 1e-12);
        for &(_, r) in &rte[0].per_stratum {
            assert_relative_eq!(r, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn weighted_average_hand_arithmetic() {
        // stratum 0: RTE 2 with weight 50; stratum 1: RTE 1 with weight 150
        let (matrix, strat) = fixture(50, 150, |group, stratum| {
            Some(match (group, stratum) {
                (Group::Treatment, 0) => 2.0,
                _ => 1.0,
            })
        });
        let rte = relative_treatment_effect(&matrix, &strat).unwrap();
        assert_relative_eq!(rte[0].weighted.unwrap(), 1.25, epsilon = 1e-12);
    }

    #[test]
    fn zero_control_mean_drops_the_stratum_and_its_weight() {
        let (matrix, strat) = fixture(50, 150, |group, stratum| {
            Some(match (group, stratum) {
                (Group::Control, 0) => 0.0,
                (Group::Treatment, 0) => 2.0,
                _ => 1.0,
            })
        });
        let rte = relative_treatment_effect(&matrix, &strat).unwrap();
        assert_eq!(rte[0].skipped.len(), 1);
        assert_relative_eq!(rte[0].weighted.unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn weighted_rte_stays_within_stratum_range() {
        let (matrix, strat) = fixture(80, 120, |group, stratum| {
            Some(match (group, stratum) {
                (Group::Treatment, 0) => 1.8,
                (Group::Treatment, 1) => 0.6,
                _ => 1.0,
            })
        });
        let rte = relative_treatment_effect(&matrix, &strat).unwrap();
        let values: Vec<f64> = rte[0].per_stratum.iter().map(|&(_, r)| r).collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w = rte[0].weighted.unwrap();
        assert!(w >= lo && w <= hi);
    }

    #[test]
    fn rte_is_scale_invariant() {
        let value = |group: Group, stratum: usize| {
            Some(match (group, stratum) {
                (Group::Treatment, _) => 2.5,
                (Group::Control, 0) => 1.5,
                (Group::Control, _) => 2.0,
            })
        };
        let (matrix, strat) = fixture(60, 90, value);
        let base = relative_treatment_effect(&matrix, &strat).unwrap()[0].weighted.unwrap();
        let (scaled_matrix, strat2) = fixture(60, 90, |g, s| value(g, s).map(|v| v * 7.25));
        let scaled = relative_treatment_effect(&scaled_matrix, &strat2).unwrap()[0]
            .weighted
            .unwrap();
        assert_relative_eq!(base, scaled, epsilon = 1e-12);
    }

    #[test]
    fn rows_without_strata_are_rejected() {
        let (mut matrix, strat) = fixture(10, 10, |_, _| Some(1.0));
        matrix.rows[0].stratum = None;
        assert!(relative_treatment_effect(&matrix, &strat).is_err());
    }
}
