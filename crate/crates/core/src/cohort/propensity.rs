//! L2-regularized logistic propensity model.
//!
//! Newton/IRLS maximization of the penalized log-likelihood of treatment
//! membership. The objective is the mean log-likelihood minus
//! `l2/2 * ||w||^2` (intercept unpenalized), so fits are exactly
//! invariant under duplicating the sample. Features are z-scored over the
//! pooled sample first; zero-variance features are dropped.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;

use super::{CohortError, CovariateSchema, CovariateVector};
use crate::corpus::{AuthorId, Group};
use crate::rng::substream;

const MAX_ITERATIONS: usize = 60;
const GRADIENT_TOLERANCE: f64 = 1e-10;

/// Fitted model over the retained (non-constant) features.
#[derive(Debug, Clone)]
pub struct PropensityModel {
    /// Retained feature names with their coefficients, in schema order.
    pub coefficients: Vec<(String, f64)>,
    pub intercept: f64,
    /// False when IRLS hit the iteration cap before the gradient
    /// tolerance; scores are still returned.
    pub converged: bool,
}

/// One individual's fitted treatment probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredIndividual {
    pub author_id: AuthorId,
    pub group: Group,
    pub score: f64,
}

#[derive(Debug)]
pub struct PropensityFit {
    pub model: PropensityModel,
    pub scores: Vec<ScoredIndividual>,
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Fit the propensity model and score every individual.
///
/// `l2` is the penalty strength on the mean-log-likelihood scale; `seed`
/// feeds the coefficient initialisation sub-stream.
pub fn fit_propensity(
    schema: &CovariateSchema,
    vectors: &[CovariateVector],
    l2: f64,
    seed: u64,
) -> Result<PropensityFit, CohortError> {
    let n = vectors.len();
    let n_treatment = vectors.iter().filter(|v| v.group == Group::Treatment).count();
    if n_treatment == 0 || n_treatment == n {
        return Err(CohortError::SingleGroup);
    }
    for v in vectors {
        if v.values.len() != schema.len() {
            return Err(CohortError::DimensionMismatch {
                got: v.values.len(),
                want: schema.len(),
            });
        }
    }

    // Pooled z-scoring with population variance: duplication-invariant.
    let p_all = schema.len();
    let mut means = vec![0.0; p_all];
    for v in vectors {
        for (m, x) in means.iter_mut().zip(&v.values) {
            *m += x;
        }
    }
    for m in means.iter_mut() {
        *m /= n as f64;
    }
    let mut sds = vec![0.0; p_all];
    for v in vectors {
        for j in 0..p_all {
            let d = v.values[j] - means[j];
            sds[j] += d * d;
        }
    }
    let mut kept: Vec<usize> = Vec::with_capacity(p_all);
    for (j, s) in sds.iter_mut().enumerate() {
        *s = (*s / n as f64).sqrt();
        if *s > 0.0 {
            kept.push(j);
        }
    }

    let p = kept.len();
    // Design matrix with a leading intercept column.
    let x = DMatrix::from_fn(n, p + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            let col = kept[j - 1];
            (vectors[i].values[col] - means[col]) / sds[col]
        }
    });
    let y = DVector::from_fn(n, |i, _| {
        if vectors[i].group == Group::Treatment {
            1.0
        } else {
            0.0
        }
    });

    let mut rng = substream(seed, "propensity-init");
    let mut beta = DVector::from_fn(p + 1, |_, _| rng.random_range(-1e-3..1e-3));
    let mut converged = false;

    for _ in 0..MAX_ITERATIONS {
        let eta = &x * &beta;
        let probs = eta.map(logistic);

        // Gradient of the penalized objective (mean scale).
        let residual = &probs - &y;
        let mut grad = x.transpose() * &residual / n as f64;
        for j in 1..=p {
            grad[j] += l2 * beta[j];
        }
        if grad.amax() < GRADIENT_TOLERANCE {
            converged = true;
            break;
        }

        // Hessian: X^T W X / n + diag(0, l2, ..., l2).
        let mut weighted = x.clone();
        for i in 0..n {
            let w = (probs[i] * (1.0 - probs[i])).max(1e-12);
            for j in 0..=p {
                weighted[(i, j)] *= w;
            }
        }
        let mut hessian = x.transpose() * weighted / n as f64;
        for j in 1..=p {
            hessian[(j, j)] += l2;
        }

        let step = Cholesky::new(hessian)
            .ok_or_else(|| CohortError::Solver("Hessian not positive definite".into()))?
            .solve(&grad);
        beta -= step;
    }

    let eta = &x * &beta;
    let scores = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| ScoredIndividual {
            author_id: v.author_id.clone(),
            group: v.group,
            score: logistic(eta[i]),
        })
        .collect();

    let coefficients = kept
        .iter()
        .enumerate()
        .map(|(j, &col)| (schema.names[col].clone(), beta[j + 1]))
        .collect();

    Ok(PropensityFit {
        model: PropensityModel {
            coefficients,
            intercept: beta[0],
            converged,
        },
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(names: &[&str]) -> CovariateSchema {
        CovariateSchema {
            names: names.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn vector(author: &str, group: Group, values: Vec<f64>) -> CovariateVector {
        CovariateVector {
            author_id: AuthorId(author.into()),
            group,
            values,
        }
    }

    /// Brute-force AUC over all treatment/control pairs.
    fn auc(scores: &[ScoredIndividual]) -> f64 {
        let t: Vec<f64> = scores.iter().filter(|s| s.group == Group::Treatment).map(|s| s.score).collect();
        let c: Vec<f64> = scores.iter().filter(|s| s.group == Group::Control).map(|s| s.score).collect();
        let mut num = 0.0;
        for &a in &t {
            for &b in &c {
                num += if a > b {
                    1.0
                } else if a == b {
                    0.5
                } else {
                    0.0
                };
            }
        }
        num / (t.len() * c.len()) as f64
    }

    #[test]
    fn zero_signal_covariates_yield_prevalence_scores() {
        let sch = schema(&["x"]);
        let mut vectors = Vec::new();
        for i in 0..40 {
            let group = if i < 10 { Group::Treatment } else { Group::Control };
            vectors.push(vector(&format!("a{i}"), group, vec![3.5]));
        }
        let fit = fit_propensity(&sch, &vectors, 1.0, 0).unwrap();
        for s in &fit.scores {
            assert!(
                (s.score - 0.25).abs() <= 0.02,
                "score {} too far from prevalence",
                s.score
            );
        }
        assert!(fit.model.converged);
        assert!(fit.model.coefficients.is_empty(), "constant feature must be dropped");
    }

    #[test]
    fn separable_covariate_reaches_high_auc() {
        let sch = schema(&["x"]);
        let mut vectors = Vec::new();
        for i in 0..100 {
            vectors.push(vector(&format!("t{i}"), Group::Treatment, vec![1.0 + i as f64 * 0.01]));
            vectors.push(vector(&format!("c{i}"), Group::Control, vec![-1.0 - i as f64 * 0.01]));
        }
        let fit = fit_propensity(&sch, &vectors, 1.0, 0).unwrap();
        assert!(auc(&fit.scores) > 0.95);
    }

    #[test]
    fn duplicating_the_sample_leaves_scores_unchanged() {
        let sch = schema(&["x", "y"]);
        let mut vectors = Vec::new();
        for i in 0..30 {
            let group = if i % 3 == 0 { Group::Treatment } else { Group::Control };
            let x = (i as f64 * 0.37).sin();
            let y = (i as f64 * 0.11).cos();
            vectors.push(vector(&format!("a{i}"), group, vec![x, y]));
        }
        let doubled: Vec<CovariateVector> =
            vectors.iter().chain(vectors.iter()).cloned().collect();
        let fit1 = fit_propensity(&sch, &vectors, 1.0, 0).unwrap();
        let fit2 = fit_propensity(&sch, &doubled, 1.0, 0).unwrap();
        for (a, b) in fit1.scores.iter().zip(fit2.scores.iter()) {
            assert!((a.score - b.score).abs() < 1e-6);
        }
    }

    #[test]
    fn fits_are_deterministic_in_seed() {
        let sch = schema(&["x"]);
        let mut vectors = Vec::new();
        for i in 0..50 {
            let group = if i % 4 == 0 { Group::Treatment } else { Group::Control };
            vectors.push(vector(&format!("a{i}"), group, vec![(i as f64 * 0.7).sin()]));
        }
        let a = fit_propensity(&sch, &vectors, 1.0, 9).unwrap();
        let b = fit_propensity(&sch, &vectors, 1.0, 9).unwrap();
        for (x, y) in a.scores.iter().zip(b.scores.iter()) {
            assert_eq!(x.score, y.score);
        }
    }

    #[test]
    fn single_group_is_an_error() {
        let sch = schema(&["x"]);
        let vectors = vec![vector("a", Group::Control, vec![1.0])];
        assert!(matches!(
            fit_propensity(&sch, &vectors, 1.0, 0),
            Err(CohortError::SingleGroup)
        ));
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        let sch = schema(&["x"]);
        let mut vectors = Vec::new();
        for i in 0..60 {
            let group = if i < 20 { Group::Treatment } else { Group::Control };
            vectors.push(vector(&format!("a{i}"), group, vec![i as f64 * 100.0]));
        }
        let fit = fit_propensity(&sch, &vectors, 0.5, 0).unwrap();
        for s in &fit.scores {
            assert!((0.0..=1.0).contains(&s.score));
        }
    }
}
