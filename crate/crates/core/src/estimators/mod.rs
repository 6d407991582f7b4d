//! Marginal estimators: Nelson–Aalen, discrete Kaplan–Meier, Ghosh–Lin mean
//! frequency, the per-arm discrete death-hazard model and the while-alive
//! loss family, plus the classical two-arm tests built on them.

mod comparison;
mod curve;
mod hazard;
mod nonparametric;
mod while_alive;

pub use comparison::{
    ghosh_lin_test, ghosh_lin_tests, influence_summaries, while_alive_test, while_alive_tests, InfluenceSummary,
    WaVariance,
};
pub use curve::{CurveKind, StepCurve};
pub use hazard::{fit_death_hazard, ArmHazards, DeathHazardModel, FitDiagnostics, HazardSpec, Link, CLAMP_EPS};
pub use nonparametric::{ghosh_lin_mean, kaplan_meier, nelson_aalen_events};
pub use while_alive::{while_alive_curve, while_alive_loss, WhileAliveLoss};
