use serde::{Deserialize, Serialize};

use crate::data::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::estimators::ArmHazards;
use crate::scalar::Scalar;

/// Bounds applied to every weight after the running product is formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub lower: f64,
    pub upper: f64,
}

impl Truncation {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower <= 1.0 && upper >= 1.0 && upper.is_finite()) {
            return Err(Error::input(format!(
                "weight truncation bounds [{lower}, {upper}] must satisfy 0 < lower <= 1 <= upper"
            )));
        }
        Ok(Truncation { lower, upper })
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            lower: 0.05,
            upper: 20.0,
        }
    }
}

/// Counterfactual weights `Ŵ_{i,t}(a_Y, a_D)` for the subjects of arm `a_Y`,
/// over every interval in which they are at risk.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProcess<T: Scalar = f64> {
    pub a_y: Arm,
    pub a_d: Arm,
    pub truncation: Truncation,
    /// Per subject (dataset order); entry `t - 1` is the weight in interval
    /// `t`. Empty for subjects outside arm `a_Y`.
    pub weights: Vec<Vec<T>>,
    /// Share of stored weights moved onto a truncation bound.
    pub truncated_fraction: f64,
}

impl<T: Scalar> WeightProcess<T> {
    /// Weight of subject `i` (dataset position) in interval `t`.
    pub fn get(&self, i: usize, t: usize) -> Option<T> {
        self.weights.get(i)?.get(t.checked_sub(1)?).copied()
    }
}

/// Running product of survival-odds ratios and, in the death interval, the
/// death-probability ratio, using each subject's own lagged event count.
pub fn compute_weights<T: Scalar>(
    dataset: &Dataset<T>,
    hazards: &ArmHazards<T>,
    a_y: Arm,
    a_d: Arm,
    truncation: Truncation,
) -> Result<WeightProcess<T>> {
    let k = dataset.k();
    for arm in Arm::BOTH {
        let m = hazards.for_arm(arm);
        if m.arm != arm {
            return Err(Error::input(format!(
                "hazard model for arm {arm} was fitted on arm {}",
                m.arm
            )));
        }
        if m.k() != k {
            return Err(Error::input(format!(
                "hazard model for arm {arm} covers {} intervals, dataset has {k}",
                m.k()
            )));
        }
    }
    let (lo, hi) = (T::of(truncation.lower), T::of(truncation.upper));
    let mut stored = 0usize;
    let mut clipped = 0usize;
    let mut weights = Vec::with_capacity(dataset.n());

    let target = hazards.for_arm(a_d);
    let observed = hazards.for_arm(a_y);
    for s in dataset.subjects() {
        if s.arm() != a_y {
            weights.push(Vec::new());
            continue;
        }
        let last = s.last_at_risk();
        stored += last;
        if a_y == a_d {
            weights.push(vec![T::one(); last]);
            continue;
        }
        let mut w = T::one();
        let mut y = 0u64;
        let mut cached: Option<(usize, u64, T, T)> = None;
        let mut row = Vec::with_capacity(last);
        for q in 1..=last {
            let bin = target.bin_of[q - 1];
            let bin_y = observed.bin_of[q - 1];
            let (h_d, h_y) = match cached {
                Some((b, yy, hd, hy)) if b == bin * (k + 1) + bin_y && yy == y => (hd, hy),
                _ => {
                    let hd = target.predict_bin(bin, y);
                    let hy = observed.predict_bin(bin_y, y);
                    for h in [hd, hy] {
                        if !(h > T::zero() && h < T::one()) {
                            return Err(Error::Invariant(format!(
                                "predicted hazard {h} outside (0, 1)"
                            )));
                        }
                    }
                    cached = Some((bin * (k + 1) + bin_y, y, hd, hy));
                    (hd, hy)
                }
            };
            w = if s.died_in(q) {
                w * (h_d / h_y)
            } else {
                w * ((T::one() - h_d) / (T::one() - h_y))
            };
            let bounded = if w < lo {
                clipped += 1;
                lo
            } else if w > hi {
                clipped += 1;
                hi
            } else {
                w
            };
            row.push(bounded);
            y += s.events_in(q) as u64;
        }
        weights.push(row);
    }
    Ok(WeightProcess {
        a_y,
        a_d,
        truncation,
        weights,
        truncated_fraction: if stored > 0 {
            clipped as f64 / stored as f64
        } else {
            0.0
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{SubjectHistory, TimeGrid};
    use crate::estimators::{fit_death_hazard, DeathHazardModel, FitDiagnostics, HazardSpec, Link};

    fn constant_model(arm: Arm, k: usize, p: f64) -> DeathHazardModel {
        DeathHazardModel {
            arm,
            link: Link::Identity,
            bin_of: vec![0; k],
            intercepts: vec![p],
            slope: 0.0,
            diagnostics: FitDiagnostics {
                converged: true,
                iterations: 0,
                log_likelihood: 0.0,
                fallback: false,
            },
        }
    }

    fn toy() -> Dataset {
        Dataset::new(
            TimeGrid::unit(2).unwrap(),
            vec![
                SubjectHistory::new("alive", Arm::Treated, vec![1, 0], None, None).unwrap(),
                SubjectHistory::new("dies", Arm::Treated, vec![0, 0], Some(1), None).unwrap(),
                SubjectHistory::new("ctl", Arm::Control, vec![0, 1], None, None).unwrap(),
            ],
        )
        .unwrap()
    }

    fn hazards() -> ArmHazards {
        ArmHazards {
            control: constant_model(Arm::Control, 2, 0.1),
            treated: constant_model(Arm::Treated, 2, 0.2),
        }
    }

    #[test]
    fn survival_and_death_factors() {
        let w = compute_weights(&toy(), &hazards(), Arm::Treated, Arm::Control, Truncation::default()).unwrap();
        assert!((w.get(0, 1).unwrap() - 0.9 / 0.8).abs() < 1e-15);
        assert!((w.get(0, 2).unwrap() - 1.265625).abs() < 1e-14);
        assert!((w.get(1, 1).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(w.get(1, 2), None);
        assert_eq!(w.get(2, 1), None);
    }

    #[test]
    fn equal_components_give_unit_weights() {
        let d = toy();
        let hz = ArmHazards::fit(&d, HazardSpec::default()).unwrap();
        let w = compute_weights(&d, &hz, Arm::Treated, Arm::Treated, Truncation::default()).unwrap();
        assert!(w.weights.iter().flatten().all(|&x| x == 1.0));
        assert_eq!(w.truncated_fraction, 0.0);
    }

    #[test]
    fn truncation_is_reported() {
        let d = toy();
        let tight = Truncation::new(0.9, 1.1).unwrap();
        let w = compute_weights(&d, &hazards(), Arm::Treated, Arm::Control, tight).unwrap();
        assert_eq!(w.get(0, 1).unwrap(), 1.1);
        assert_eq!(w.get(1, 1).unwrap(), 0.9);
        assert_eq!(w.truncated_fraction, 1.0);
        assert!(Truncation::new(1.5, 2.0).is_err());
    }

    #[test]
    fn mismatched_models_rejected() {
        let d = toy();
        let bad = ArmHazards {
            control: constant_model(Arm::Control, 3, 0.1),
            treated: constant_model(Arm::Treated, 3, 0.2),
        };
        assert!(compute_weights(&d, &bad, Arm::Treated, Arm::Control, Truncation::default()).is_err());
        let swapped = ArmHazards {
            control: fit_death_hazard(&d, Arm::Treated, HazardSpec::default()).unwrap(),
            treated: fit_death_hazard(&d, Arm::Treated, HazardSpec::default()).unwrap(),
        };
        assert!(compute_weights(&d, &swapped, Arm::Treated, Arm::Control, Truncation::default()).is_err());
    }
}
