use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::data::{discretize, Arm, Dataset, Exit, RawRecord, TiePolicy, TimeGrid};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Continuous-time design with independent recurrent and terminal
/// processes. Control subjects have events from a Poisson process whose rate
/// starts at `base_rate` and is multiplied by `step_factor` at the end of
/// every epoch, and die at constant hazard `control_hazard`. Treated
/// subjects have the event rate scaled by `rr` and the hazard by `hr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousDgpConfig {
    pub base_rate: f64,
    pub step_factor: f64,
    pub epoch_length: f64,
    pub max_follow_up: f64,
    pub rr: f64,
    pub hr: f64,
    #[serde(default = "default_control_hazard")]
    pub control_hazard: f64,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_control_hazard() -> f64 {
    0.7
}

impl ContinuousDgpConfig {
    /// Rate 2/year rising by `e^0.5` every 1.2 years over 5 years of
    /// follow-up, with the given rate and hazard ratios.
    pub fn reference(rr: f64, hr: f64) -> Self {
        ContinuousDgpConfig {
            base_rate: 2.0,
            step_factor: 0.5f64.exp(),
            epoch_length: 1.2,
            max_follow_up: 5.0,
            rr,
            hr,
            control_hazard: default_control_hazard(),
            n: 500,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("base_rate", self.base_rate),
            ("step_factor", self.step_factor),
            ("epoch_length", self.epoch_length),
            ("max_follow_up", self.max_follow_up),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::input(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("rr", self.rr), ("hr", self.hr), ("control_hazard", self.control_hazard)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::input(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if self.n < 2 {
            return Err(Error::input("at least two subjects are required"));
        }
        Ok(())
    }

    /// Expected number of events by `t` for a subject in `arm` ignoring death.
    pub fn expected_events(&self, arm: Arm, t: f64) -> f64 {
        let scale = if arm == Arm::Treated { self.rr } else { 1.0 };
        let t = t.min(self.max_follow_up);
        let mut total = 0.0;
        let mut start = 0.0;
        let mut rate = self.base_rate * scale;
        while start < t {
            let end = (start + self.epoch_length).min(t);
            total += rate * (end - start);
            start += self.epoch_length;
            rate *= self.step_factor;
        }
        total
    }
}

/// Simulate `n` subjects in continuous time. Arms are fair coin flips; death
/// beyond `max_follow_up` is replaced by censoring there.
pub fn generate_continuous(config: &ContinuousDgpConfig) -> Result<Vec<RawRecord<f64>>> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, 0);
    let unit = Exp::new(1.0).map_err(|e| Error::input(e.to_string()))?;
    let mut records = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let arm = if rng.random_bool(0.5) { Arm::Treated } else { Arm::Control };
        let (rate_scale, hazard) = match arm {
            Arm::Treated => (config.rr, config.control_hazard * config.hr),
            Arm::Control => (1.0, config.control_hazard),
        };
        let death: f64 = unit.sample(&mut rng) / hazard;
        let exit = if death < config.max_follow_up {
            Exit::Death(death)
        } else {
            Exit::Censor(config.max_follow_up)
        };
        let stop = exit.time();
        // Piecewise-constant Poisson process, drawn epoch by epoch.
        let mut events = Vec::new();
        let mut start = 0.0;
        let mut rate = config.base_rate * rate_scale;
        while start < stop && rate > 0.0 {
            let end = (start + config.epoch_length).min(stop);
            let mut t = start;
            loop {
                t += unit.sample(&mut rng) / rate;
                if t >= end {
                    break;
                }
                events.push(t);
            }
            start += config.epoch_length;
            rate *= config.step_factor;
        }
        records.push(RawRecord {
            id: format!("s{i}"),
            arm,
            events,
            exit,
        });
    }
    Ok(records)
}

/// Simulate and map onto `k` equal intervals over the follow-up window,
/// deferring a death that shares an interval with an event.
pub fn generate_continuous_discretized(config: &ContinuousDgpConfig, k: usize) -> Result<Dataset> {
    let records = generate_continuous(config)?;
    let grid = TimeGrid::uniform(k, config.max_follow_up)?;
    discretize(&records, &grid, TiePolicy::DeferDeath)
}
