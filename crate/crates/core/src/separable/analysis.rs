use log::debug;
use serde::{Deserialize, Serialize};

use crate::bootstrap::bootstrap;
use crate::data::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::estimators::{ArmHazards, HazardSpec};
use crate::inference::{Method, TestResult, VarianceMethod};
use crate::scalar::Scalar;
use crate::separable::variance::plugin_variance_increments;
use crate::separable::{
    compute_weights, counterfactual_mean_curve, fit_pr_msm, score_statistic, CounterfactualMeanCurve, PrMsmFit,
    Truncation, WeightProcess,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceChoice {
    Plugin,
    Bootstrap { replicates: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrMsmatOptions {
    /// Level at which the death component is held.
    pub a_d: Arm,
    pub hazard: HazardSpec,
    pub truncation: Truncation,
    pub variance: VarianceChoice,
}

impl Default for PrMsmatOptions {
    fn default() -> Self {
        PrMsmatOptions {
            a_d: Arm::Control,
            hazard: HazardSpec::default(),
            truncation: Truncation::default(),
            variance: VarianceChoice::Plugin,
        }
    }
}

/// Everything fitted once per dataset: hazard models, both weight
/// processes and both counterfactual curves for a fixed `a_D`.
#[derive(Debug, Clone)]
pub struct SeparableAnalysis<T: Scalar = f64> {
    pub a_d: Arm,
    pub hazards: ArmHazards<T>,
    pub weights1: WeightProcess<T>,
    pub weights0: WeightProcess<T>,
    pub curve1: CounterfactualMeanCurve<T>,
    pub curve0: CounterfactualMeanCurve<T>,
}

impl<T: Scalar> SeparableAnalysis<T> {
    pub fn fit(dataset: &Dataset<T>, a_d: Arm, hazard: HazardSpec, truncation: Truncation) -> Result<Self> {
        let hazards = ArmHazards::fit(dataset, hazard)?;
        for arm in Arm::BOTH {
            let d = &hazards.for_arm(arm).diagnostics;
            debug!(
                "death hazard arm {arm}: converged={} iterations={} fallback={}",
                d.converged, d.iterations, d.fallback
            );
        }
        let weights1 = compute_weights(dataset, &hazards, Arm::Treated, a_d, truncation)?;
        let weights0 = compute_weights(dataset, &hazards, Arm::Control, a_d, truncation)?;
        let curve1 = counterfactual_mean_curve(dataset, Arm::Treated, a_d, &weights1)?;
        let curve0 = counterfactual_mean_curve(dataset, Arm::Control, a_d, &weights0)?;
        Ok(SeparableAnalysis {
            a_d,
            hazards,
            weights1,
            weights0,
            curve1,
            curve0,
        })
    }

    pub fn score(&self, dataset: &Dataset<T>, horizon: usize) -> Result<T> {
        score_statistic(&self.curve1, &self.curve0, dataset, horizon)
    }

    pub fn beta(&self, dataset: &Dataset<T>, horizon: usize) -> Result<PrMsmFit<T>> {
        fit_pr_msm(&self.curve1, &self.curve0, dataset, horizon)
    }

    pub fn plugin_variance(&self, dataset: &Dataset<T>, horizon: usize) -> Result<T> {
        crate::separable::plugin_variance(
            dataset,
            &self.curve1,
            &self.curve0,
            &self.weights1,
            &self.weights0,
            horizon,
        )
    }

    /// Share of stored weights clipped to the truncation bounds, over both
    /// weight processes.
    pub fn truncated_fraction(&self) -> f64 {
        let n1: usize = self.weights1.weights.iter().map(Vec::len).sum();
        let n0: usize = self.weights0.weights.iter().map(Vec::len).sum();
        let total = (n1 + n0) as f64;
        if total == 0.0 {
            return 0.0;
        }
        (self.weights1.truncated_fraction * n1 as f64 + self.weights0.truncated_fraction * n0 as f64) / total
    }

    fn scores(&self, dataset: &Dataset<T>, horizons: &[usize]) -> Result<Vec<f64>> {
        horizons.iter().map(|&h| Ok(self.score(dataset, h)?.as_f64())).collect()
    }
}

/// Bootstrap variance of `U_n` at each horizon: every replicate refits the
/// hazard models, weights and curves on a within-arm resample.
pub fn bootstrap_variance<T: Scalar>(
    dataset: &Dataset<T>,
    horizons: &[usize],
    options: &PrMsmatOptions,
    replicates: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let draws = bootstrap(dataset, replicates, seed, |d| {
        SeparableAnalysis::fit(d, options.a_d, options.hazard, options.truncation)?.scores(d, horizons)
    })?;
    Ok(draws.variances())
}

/// PR-MSMaT score test of no separable direct effect at each horizon index.
pub fn pr_msmat_tests<T: Scalar>(
    dataset: &Dataset<T>,
    horizons: &[usize],
    options: &PrMsmatOptions,
) -> Result<Vec<TestResult>> {
    if horizons.is_empty() {
        return Err(Error::input("at least one horizon is required"));
    }
    for &h in horizons {
        dataset.grid().check_interval(h)?;
    }
    let fit = SeparableAnalysis::fit(dataset, options.a_d, options.hazard, options.truncation)?;
    let (variances, method): (Vec<f64>, _) = match options.variance {
        VarianceChoice::Plugin => {
            let inc = plugin_variance_increments(dataset, &fit.curve1, &fit.curve0, &fit.weights1, &fit.weights0)?;
            let v = horizons
                .iter()
                .map(|&h| inc[..h].iter().copied().sum::<T>().as_f64())
                .collect();
            (v, VarianceMethod::Plugin)
        }
        VarianceChoice::Bootstrap { replicates, seed } => (
            bootstrap_variance(dataset, horizons, options, replicates, seed)?,
            VarianceMethod::Bootstrap,
        ),
    };
    let truncated = fit.truncated_fraction();
    horizons
        .iter()
        .zip(variances)
        .map(|(&h, var)| {
            let u = fit.score(dataset, h)?.as_f64();
            let mut r = TestResult::from_score(
                Method::PrMsmat,
                h,
                dataset.grid().time(h).as_f64(),
                u,
                var,
                method,
            )?;
            match fit.beta(dataset, h) {
                Ok(beta) if beta.boundary => {
                    r.beta_boundary = Some("no weighted treated events before the horizon".into());
                }
                Ok(beta) => r.beta_hat = Some(beta.beta.as_f64()),
                // The score test stays valid; only the effect estimate is undefined.
                Err(Error::NoEventsInControl) => {
                    r.beta_boundary = Some("no weighted control events before the horizon".into());
                }
                Err(e) => return Err(e),
            }
            r.a_d = Some(options.a_d.index() as u8);
            r.truncated_fraction = Some(truncated);
            Ok(r)
        })
        .collect()
}

pub fn pr_msmat_test<T: Scalar>(dataset: &Dataset<T>, horizon: usize, options: &PrMsmatOptions) -> Result<TestResult> {
    Ok(pr_msmat_tests(dataset, &[horizon], options)?.remove(0))
}
