//! Correlations, hypothesis tests and co-occurrence association measures.

mod correlation;
mod hypothesis;
mod npmi;

pub use correlation::{agreement_rate, average_ranks, pearson, phi, rank_correlation};
pub use hypothesis::{
    normal_cdf, normal_two_sided, paired_t_test, sign_test, student_t_cdf, student_t_two_sided,
    two_proportion_z_test, wilcoxon_rank_sum, EXACT_RANK_SUM_LIMIT,
};
pub use npmi::{delta_npmi, npmi, pmi, CooccurrenceTable};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("samples differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("zero variance")]
    DegenerateVariance,
    #[error("non-finite observation")]
    NonFinite,
    #[error("no co-occurrence of {noun:?} and {verb:?}")]
    ZeroJoint { noun: String, verb: String },
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
}

impl StatsError {
    pub fn code(&self) -> &'static str {
        match self {
            StatsError::LengthMismatch { .. } => "LENGTH_MISMATCH",
            StatsError::TooFewObservations { .. } => "TOO_FEW_OBSERVATIONS",
            StatsError::DegenerateVariance => "DEGENERATE_VARIANCE",
            StatsError::NonFinite => "NON_FINITE",
            StatsError::ZeroJoint { .. } => "ZERO_JOINT",
            StatsError::InvalidCounts(_) => "INVALID_COUNTS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: String,
    /// Sample-size descriptor, e.g. `n=10` or `n1=4,n2=6`.
    pub n: String,
}

impl TestResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

fn check_paired(xs: &[f64], ys: &[f64], needed: usize) -> Result<(), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < needed {
        return Err(StatsError::TooFewObservations {
            needed,
            got: xs.len(),
        });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}
