//! Equal-width propensity stratification with trimming and minimum-size
//! filtering.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CohortError, ScoredIndividual};
use crate::config::StudyParams;
use crate::corpus::{AuthorId, Group};

/// Strata over the trimmed propensity-score range.
///
/// Individuals outside `mean ± trim_sd·sd` of the pooled score
/// distribution are trimmed; `n_strata` equal-width bins cover the
/// trimmed range; a stratum is retained only when it holds at least
/// `min_stratum_size` individuals of each group. A score equal to the
/// maximum edge falls in the last bin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stratification {
    /// `n_strata + 1` edges spanning the trimmed score range.
    pub bin_edges: Vec<f64>,
    pub trim_bounds: (f64, f64),
    /// Stratum index per trimmed individual.
    pub assignments: BTreeMap<AuthorId, usize>,
    /// Per-stratum retention mask.
    pub retained: Vec<bool>,
    /// Per-stratum (treatment, control) membership counts.
    pub counts: Vec<(usize, usize)>,
    /// Fitted score per individual, including the trimmed-out ones.
    pub scores: BTreeMap<AuthorId, f64>,
    pub groups: BTreeMap<AuthorId, Group>,
    pub trimmed_out: Vec<AuthorId>,
}

impl Stratification {
    pub fn n_strata(&self) -> usize {
        self.retained.len()
    }

    pub fn retained_strata(&self) -> Vec<usize> {
        (0..self.retained.len()).filter(|&s| self.retained[s]).collect()
    }

    /// Stratum of an individual, provided it survived trimming and its
    /// stratum was retained.
    pub fn retained_stratum_of(&self, author: &AuthorId) -> Option<usize> {
        let s = *self.assignments.get(author)?;
        self.retained[s].then_some(s)
    }

    /// Number of treatment individuals in a stratum: the weight used for
    /// stratum-averaged quantities.
    pub fn treatment_count(&self, stratum: usize) -> usize {
        self.counts[stratum].0
    }

    pub fn retained_population(&self) -> (usize, usize) {
        self.retained_strata()
            .iter()
            .fold((0, 0), |(t, c), &s| (t + self.counts[s].0, c + self.counts[s].1))
    }
}

/// Sample standard deviation (n-1 denominator).
fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return 0.0;
    }
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

pub fn stratify(
    scored: &[ScoredIndividual],
    params: &StudyParams,
) -> Result<Stratification, CohortError> {
    let values: Vec<f64> = scored.iter().map(|s| s.score).collect();
    let distinct = {
        let mut v = values.clone();
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
        v.len()
    };
    if distinct < 2 {
        return Err(CohortError::TooFewScores);
    }

    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let sd = sample_sd(&values);
    let trim_bounds = (mean - params.trim_sd * sd, mean + params.trim_sd * sd);

    let mut trimmed_out = Vec::new();
    let mut kept: Vec<&ScoredIndividual> = Vec::with_capacity(scored.len());
    for s in scored {
        if s.score < trim_bounds.0 || s.score > trim_bounds.1 {
            trimmed_out.push(s.author_id.clone());
        } else {
            kept.push(s);
        }
    }

    let min = kept.iter().map(|s| s.score).fold(f64::INFINITY, f64::min);
    let max = kept.iter().map(|s| s.score).fold(f64::NEG_INFINITY, f64::max);
    let n_strata = params.n_strata;
    let width = (max - min) / n_strata as f64;
    let mut bin_edges: Vec<f64> = (0..=n_strata).map(|i| min + i as f64 * width).collect();
    bin_edges[n_strata] = max;

    let mut assignments = BTreeMap::new();
    let mut counts = vec![(0usize, 0usize); n_strata];
    for s in &kept {
        let stratum = if width > 0.0 && s.score < max {
            (((s.score - min) / width) as usize).min(n_strata - 1)
        } else {
            n_strata - 1
        };
        assignments.insert(s.author_id.clone(), stratum);
        match s.group {
            Group::Treatment => counts[stratum].0 += 1,
            Group::Control => counts[stratum].1 += 1,
        }
    }

    let retained: Vec<bool> = counts
        .iter()
        .map(|&(t, c)| t >= params.min_stratum_size && c >= params.min_stratum_size)
        .collect();
    if !retained.iter().any(|&r| r) {
        let (max_treatment, max_control) = counts
            .iter()
            .copied()
            .max_by_key(|&(t, c)| t.min(c))
            .unwrap_or((0, 0));
        return Err(CohortError::ZeroRetainedStrata {
            n_strata,
            min_stratum_size: params.min_stratum_size,
            max_treatment,
            max_control,
        });
    }

    Ok(Stratification {
        bin_edges,
        trim_bounds,
        assignments,
        retained,
        counts,
        scores: scored.iter().map(|s| (s.author_id.clone(), s.score)).collect(),
        groups: scored.iter().map(|s| (s.author_id.clone(), s.group)).collect(),
        trimmed_out,
    })
}
