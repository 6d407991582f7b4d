//! Separable direct effect of treatment on recurrent events: counterfactual
//! weights, counterfactual mean curves, the proportional-rate marginal
//! structural model and its score test.

mod analysis;
mod curve;
mod msm;
mod variance;
mod weights;

pub use analysis::{bootstrap_variance, pr_msmat_test, pr_msmat_tests, PrMsmatOptions, SeparableAnalysis, VarianceChoice};
pub use curve::{counterfactual_mean_curve, CounterfactualMeanCurve};
pub use msm::{estimating_equation, fit_pr_msm, score_statistic, treated_at_risk, PrMsmFit};
pub use variance::plugin_variance;
pub use weights::{compute_weights, Truncation, WeightProcess};
