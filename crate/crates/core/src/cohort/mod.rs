//! Covariate assembly, propensity modelling, stratification, and balance
//! diagnostics.

mod balance;
mod covariates;
mod propensity;
mod stratify;

pub use balance::{balance_report, smd, BalanceReport, CovariateBalance};
pub use covariates::{build_covariates, CovariateBuild, CovariateSchema, CovariateVector};
pub use propensity::{fit_propensity, PropensityFit, PropensityModel, ScoredIndividual};
pub use stratify::{stratify, Stratification};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CohortError {
    #[error("propensity fit requires both treatment and control individuals")]
    SingleGroup,
    #[error("no usable covariate vectors (all individuals excluded)")]
    EmptyCovariates,
    #[error("stratification requires at least two distinct propensity scores")]
    TooFewScores,
    #[error(
        "no stratum retains at least {min_stratum_size} individuals of each group \
         across {n_strata} strata; largest stratum had {max_treatment} treatment / \
         {max_control} control"
    )]
    ZeroRetainedStrata {
        n_strata: usize,
        min_stratum_size: usize,
        max_treatment: usize,
        max_control: usize,
    },
    #[error("covariate vector length {got} does not match schema length {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("propensity solver failed: {0}")]
    Solver(String),
}
