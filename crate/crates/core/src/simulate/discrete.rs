use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Arm, Dataset, SubjectHistory, TimeGrid};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Baseline recurrence probability `β_{Y,0,k}` per interval. Levels are in
/// units of `1/K`; the step patterns change level every `every` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "snake_case")]
pub enum BaselinePattern {
    Constant { level: f64 },
    Decreasing { start: f64, step: f64, every: usize, end: f64 },
    Increasing { start: f64, step: f64, every: usize, end: f64 },
}

impl BaselinePattern {
    /// `2/K` throughout.
    pub fn constant() -> Self {
        BaselinePattern::Constant { level: 2.0 }
    }

    /// `3/K`, declining by `0.5/K` every 200 intervals down to `1/K`.
    pub fn decreasing() -> Self {
        BaselinePattern::Decreasing {
            start: 3.0,
            step: 0.5,
            every: 200,
            end: 1.0,
        }
    }

    /// `1/K`, rising by `0.5/K` every 200 intervals up to `3/K`.
    pub fn increasing() -> Self {
        BaselinePattern::Increasing {
            start: 1.0,
            step: 0.5,
            every: 200,
            end: 3.0,
        }
    }

    /// Level at interval `k` (1-based), in units of `1/K`.
    pub fn level(&self, k: usize) -> f64 {
        match *self {
            BaselinePattern::Constant { level } => level,
            BaselinePattern::Decreasing { start, step, every, end } => {
                (start - step * ((k - 1) / every) as f64).max(end)
            }
            BaselinePattern::Increasing { start, step, every, end } => {
                (start + step * ((k - 1) / every) as f64).min(end)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            BaselinePattern::Constant { level } => level.is_finite(),
            BaselinePattern::Decreasing { start, step, every, end }
            | BaselinePattern::Increasing { start, step, every, end } => {
                every > 0 && start.is_finite() && step.is_finite() && end.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!("invalid baseline pattern {self:?}")))
        }
    }
}

/// Additive discrete-time design: in interval `k` a subject alive at its
/// start dies with probability `β_{D,0} + β_{D,A} A + β_{Y,D} Y_{k-1}` and,
/// if still alive, has one event with probability `β_{Y,0,k} + β_{Y,A} A`.
/// All coefficients are in units of `1/K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteDgpConfig {
    pub k: usize,
    pub n: usize,
    pub baseline: BaselinePattern,
    pub beta_y_a: f64,
    pub beta_d_0: f64,
    pub beta_d_a: f64,
    pub beta_y_d: f64,
    #[serde(default)]
    pub seed: u64,
}

impl DiscreteDgpConfig {
    /// Null configuration on 1000 intervals with 1000 subjects.
    pub fn reference(baseline: BaselinePattern) -> Self {
        DiscreteDgpConfig {
            k: 1000,
            n: 1000,
            baseline,
            beta_y_a: 0.0,
            beta_d_0: 1.0,
            beta_d_a: -0.5,
            beta_y_d: 0.1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::input("K must be positive"));
        }
        if self.n < 2 {
            return Err(Error::input("at least two subjects are required"));
        }
        for (name, v) in [
            ("beta_y_a", self.beta_y_a),
            ("beta_d_0", self.beta_d_0),
            ("beta_d_a", self.beta_d_a),
            ("beta_y_d", self.beta_y_d),
        ] {
            if !v.is_finite() {
                return Err(Error::input(format!("{name} must be finite, got {v}")));
            }
        }
        self.baseline.validate()
    }
}

/// A generated dataset together with the number of draws whose implied
/// probability fell outside `[0, 1]` and had to be clamped.
#[derive(Debug, Clone)]
pub struct DiscreteSample {
    pub dataset: Dataset,
    pub violations: usize,
}

/// Generate one trial, clamping out-of-range probabilities and counting them.
pub fn generate_discrete_clamped(config: &DiscreteDgpConfig) -> Result<DiscreteSample> {
    config.validate()?;
    let k = config.k;
    let scale = 1.0 / k as f64;
    let mut rng = stream_rng(config.seed, 0);
    let mut violations = 0usize;
    let mut clamp = |p: f64| {
        if (0.0..=1.0).contains(&p) {
            p
        } else {
            violations += 1;
            p.clamp(0.0, 1.0)
        }
    };
    let baseline: Vec<f64> = (1..=k).map(|q| config.baseline.level(q) * scale).collect();
    let mut subjects = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let arm = if rng.random_bool(0.5) { Arm::Treated } else { Arm::Control };
        let a = arm.index() as f64;
        let death_base = (config.beta_d_0 + config.beta_d_a * a) * scale;
        let event_shift = config.beta_y_a * a * scale;
        let mut counts = vec![0u32; k];
        let mut y = 0u32;
        let mut death = None;
        for q in 1..=k {
            let p_d = clamp(death_base + config.beta_y_d * scale * y as f64);
            if rng.random::<f64>() < p_d {
                death = Some(q);
                break;
            }
            let p_y = clamp(baseline[q - 1] + event_shift);
            if rng.random::<f64>() < p_y {
                counts[q - 1] = 1;
                y += 1;
            }
        }
        subjects.push(SubjectHistory::new(format!("s{i}"), arm, counts, death, None)?);
    }
    let dataset = Dataset::new(TimeGrid::unit(k)?, subjects)?;
    Ok(DiscreteSample { dataset, violations })
}

/// Generate one trial; any clamped probability is an error.
pub fn generate_discrete(config: &DiscreteDgpConfig) -> Result<Dataset> {
    let sample = generate_discrete_clamped(config)?;
    if sample.violations > 0 {
        return Err(Error::ProbabilityViolation {
            count: sample.violations,
        });
    }
    Ok(sample.dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patterns_step_every_200() {
        let d = BaselinePattern::decreasing();
        let levels: Vec<f64> = [1, 200, 201, 400, 401, 801, 1000].iter().map(|&k| d.level(k)).collect();
        assert_eq!(levels, vec![3.0, 3.0, 2.5, 2.5, 2.0, 1.0, 1.0]);
        let i = BaselinePattern::increasing();
        assert_eq!(i.level(1), 1.0);
        assert_eq!(i.level(1000), 3.0);
        assert_eq!(i.level(5000), 3.0);
    }

    #[test]
    fn same_seed_same_data() {
        let mut c = DiscreteDgpConfig::reference(BaselinePattern::constant());
        c.k = 50;
        c.n = 40;
        c.seed = 3;
        let a = generate_discrete(&c).unwrap();
        let b = generate_discrete(&c).unwrap();
        assert_eq!(a.subjects(), b.subjects());
        c.seed = 4;
        assert_ne!(generate_discrete(&c).unwrap().subjects(), a.subjects());
    }

    #[test]
    fn violations_are_counted() {
        let mut c = DiscreteDgpConfig::reference(BaselinePattern::constant());
        c.k = 10;
        c.n = 20;
        c.beta_d_0 = -1.0;
        c.beta_d_a = 0.0;
        c.beta_y_d = 0.0;
        let s = generate_discrete_clamped(&c).unwrap();
        assert_eq!(s.violations, 20 * 10);
        assert!(matches!(generate_discrete(&c), Err(Error::ProbabilityViolation { .. })));
    }
}
