//! Simulation designs and the Monte Carlo engine.

mod campaign;
mod continuous;
mod discrete;
mod output;

pub use campaign::{
    run_campaign, CampaignConfig, CampaignResult, MeanCurves, RejectionRate, ReplicationFailure, ReplicationRecord,
    Scenario, ScenarioDesign, ScenarioResult,
};
pub use continuous::{generate_continuous, generate_continuous_discretized, ContinuousDgpConfig};
pub use discrete::{generate_discrete, generate_discrete_clamped, BaselinePattern, DiscreteDgpConfig, DiscreteSample};
pub use output::write_campaign;
