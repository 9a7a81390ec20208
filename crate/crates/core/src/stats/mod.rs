//! Empirical distribution machinery and verification records.

pub mod dependence;
pub mod goodness;
pub mod report;
pub mod verdicts;

pub use dependence::{
    bootstrap_se, distance_correlation, distance_correlation_test, exp_rate_mle, mean_and_se,
    pearson, sample_sd, PermutationTest, RateEstimate,
};
pub use goodness::{
    chi_square_gof, chi_square_homogeneity, chi_square_sf, kolmogorov_sf, ks_one_sample,
    ks_two_sample, ks_two_sample_threshold, ChiSquare, Ecdf, KsResult,
};
pub use report::{Criterion, Relation, VerificationReport};
pub use verdicts::{exp_stability_check, lln_check, lln_constant, ExpStabilityParams, LlnParams};
