//! Two-arm comparator tests on the classical estimators.
//!
//! Both tests linearize the discrete Kaplan–Meier and Ghosh–Lin estimators
//! in the subject frequency weights: the influence of subject `i` is the
//! exact derivative of the estimate with respect to its weight, and the
//! variance is the sum of squared influences.

use serde::{Deserialize, Serialize};

use crate::bootstrap::bootstrap;
use crate::data::{Arm, Dataset, RiskTable};
use crate::error::{Error, Result};
use crate::inference::{Method, TestResult, VarianceMethod};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaVariance {
    #[default]
    Influence,
    Bootstrap { replicates: usize, seed: u64 },
}

/// Per-arm estimates at one horizon with the subject influence values.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceSummary {
    pub arm: Arm,
    pub horizon_index: usize,
    /// Ghosh–Lin mean number of events by the horizon.
    pub mean_events: f64,
    /// Kaplan–Meier restricted mean survival to the horizon.
    pub rmst: f64,
    /// `d mean_events / d w_i` for every subject of the arm.
    pub mean_influence: Vec<f64>,
    /// `d rmst / d w_i` for every subject of the arm.
    pub rmst_influence: Vec<f64>,
}

/// Interval-level quantities of one arm, with prefix sums indexed by the
/// number of intervals included (entry 0 is the empty sum).
struct ArmPrefix {
    at_risk: Vec<f64>,
    surv: Vec<f64>,
    /// Cumulative Ghosh–Lin mean `M(m)`.
    mean: Vec<f64>,
    /// Cumulative restricted mean `RM(m)`.
    rmst: Vec<f64>,
    /// `1 / (r_l (1 - h_l))`, zero when undefined.
    a: Vec<f64>,
    /// `sum_{j<=m} S_j dB_j / r_j`.
    p_rate: Vec<f64>,
    /// `sum_{l<=m} h_l a_l`.
    p_ha: Vec<f64>,
    /// `sum_{l<=m} h_l a_l M(l-1)`.
    p_ham: Vec<f64>,
    /// `sum_{l<=m} h_l a_l RM(l)`.
    p_har: Vec<f64>,
}

impl ArmPrefix {
    fn new(table: &RiskTable, widths: &[f64]) -> ArmPrefix {
        let k = table.k();
        let mut p = ArmPrefix {
            at_risk: table.at_risk.iter().map(|&r| r as f64).collect(),
            surv: Vec::with_capacity(k),
            mean: vec![0.0; k + 1],
            rmst: vec![0.0; k + 1],
            a: vec![0.0; k + 1],
            p_rate: vec![0.0; k + 1],
            p_ha: vec![0.0; k + 1],
            p_ham: vec![0.0; k + 1],
            p_har: vec![0.0; k + 1],
        };
        let mut s_prev = 1.0;
        for j in 1..=k {
            let r = p.at_risk[j - 1];
            let (h, rate) = if r > 0.0 {
                (table.deaths[j - 1] as f64 / r, table.events[j - 1] as f64 / r)
            } else {
                (0.0, 0.0)
            };
            let s = s_prev * (1.0 - h);
            p.surv.push(s);
            p.mean[j] = p.mean[j - 1] + s * rate;
            p.rmst[j] = p.rmst[j - 1] + s_prev * widths[j - 1];
            p.a[j] = if r > 0.0 && h < 1.0 { 1.0 / (r * (1.0 - h)) } else { 0.0 };
            p.p_rate[j] = p.p_rate[j - 1] + if r > 0.0 { s * rate / r } else { 0.0 };
            let ha = h * p.a[j];
            p.p_ha[j] = p.p_ha[j - 1] + ha;
            p.p_ham[j] = p.p_ham[j - 1] + ha * p.mean[j - 1];
            p.p_har[j] = p.p_har[j - 1] + ha * p.rmst[j];
            s_prev = s;
        }
        p
    }
}

/// Influence values of the Ghosh–Lin mean and the restricted mean survival
/// for `arm` at each horizon. Influence vectors follow dataset order.
pub fn influence_summaries<T: Scalar>(
    dataset: &Dataset<T>,
    arm: Arm,
    horizons: &[usize],
) -> Result<Vec<InfluenceSummary>> {
    for &h in horizons {
        dataset.grid().check_interval(h)?;
    }
    let grid = dataset.grid();
    let widths: Vec<f64> = (1..=grid.k()).map(|k| grid.width(k).as_f64()).collect();
    let table = dataset.risk_table(arm);
    let p = ArmPrefix::new(&table, &widths);

    let mut out: Vec<InfluenceSummary> = horizons
        .iter()
        .map(|&h| InfluenceSummary {
            arm,
            horizon_index: h,
            mean_events: p.mean[h],
            rmst: p.rmst[h],
            mean_influence: Vec::with_capacity(dataset.arm_count(arm)),
            rmst_influence: Vec::with_capacity(dataset.arm_count(arm)),
        })
        .collect();

    let mut event_terms: Vec<(usize, f64)> = Vec::new();
    for s in dataset.arm_subjects(arm) {
        let last = s.last_at_risk();
        event_terms.clear();
        for j in 1..=last {
            let c = s.events_in(j);
            if c > 0 {
                event_terms.push((j, p.surv[j - 1] * c as f64 / p.at_risk[j - 1]));
            }
        }
        for summary in &mut out {
            let tau = summary.horizon_index;
            let m = last.min(tau);
            let events: f64 = event_terms.iter().take_while(|(j, _)| *j <= tau).map(|t| t.1).sum();
            let mut if_mean = events - p.p_rate[m] + p.mean[tau] * p.p_ha[m] - p.p_ham[m];
            let mut if_rmst = p.rmst[tau] * p.p_ha[m] - p.p_har[m];
            if let Some(d) = s.death_interval().filter(|&d| d <= tau) {
                if_mean -= p.a[d] * (p.mean[tau] - p.mean[d - 1]);
                if_rmst -= p.a[d] * (p.rmst[tau] - p.rmst[d]);
            }
            summary.mean_influence.push(if_mean);
            summary.rmst_influence.push(if_rmst);
        }
    }
    Ok(out)
}

fn wa_theta<T: Scalar>(dataset: &Dataset<T>, horizons: &[usize]) -> Result<Vec<(f64, [InfluenceSummary; 2])>> {
    let s1 = influence_summaries(dataset, Arm::Treated, horizons)?;
    let s0 = influence_summaries(dataset, Arm::Control, horizons)?;
    s1.into_iter()
        .zip(s0)
        .map(|(t, c)| {
            if !(t.mean_events > 0.0 && c.mean_events > 0.0) {
                return Err(Error::UndefinedEstimand(format!(
                    "log while-alive rate ratio needs events in both arms by horizon {}",
                    t.horizon_index
                )));
            }
            let theta = (t.mean_events / t.rmst).ln() - (c.mean_events / c.rmst).ln();
            Ok((theta, [c, t]))
        })
        .collect()
}

/// While-alive test: `theta = log(ℓ̂_1(τ) / ℓ̂_0(τ))` standardized by its
/// influence-function or bootstrap variance.
pub fn while_alive_tests<T: Scalar>(
    dataset: &Dataset<T>,
    horizons: &[usize],
    variance: WaVariance,
) -> Result<Vec<TestResult>> {
    let thetas = wa_theta(dataset, horizons)?;
    let variances: Vec<f64> = match variance {
        WaVariance::Influence => thetas
            .iter()
            .map(|(_, arms)| {
                arms.iter()
                    .map(|s| {
                        s.mean_influence
                            .iter()
                            .zip(&s.rmst_influence)
                            .map(|(im, ir)| (im / s.mean_events - ir / s.rmst).powi(2))
                            .sum::<f64>()
                    })
                    .sum()
            })
            .collect(),
        WaVariance::Bootstrap { replicates, seed } => bootstrap(dataset, replicates, seed, |d| {
            Ok(wa_theta(d, horizons)?.into_iter().map(|t| t.0).collect())
        })?
        .variances(),
    };
    let method = match variance {
        WaVariance::Influence => VarianceMethod::Influence,
        WaVariance::Bootstrap { .. } => VarianceMethod::Bootstrap,
    };
    thetas
        .iter()
        .zip(variances)
        .map(|((theta, arms), var)| {
            let h = arms[0].horizon_index;
            let mut r = TestResult::from_score(
                Method::WhileAlive,
                h,
                dataset.grid().time(h).as_f64(),
                *theta,
                var,
                method,
            )?;
            r.beta_hat = Some(*theta);
            Ok(r)
        })
        .collect()
}

pub fn while_alive_test<T: Scalar>(dataset: &Dataset<T>, horizon: usize, variance: WaVariance) -> Result<TestResult> {
    Ok(while_alive_tests(dataset, &[horizon], variance)?.remove(0))
}

/// Ghosh–Lin test on `μ̂_1(τ) - μ̂_0(τ)` with influence-function variance.
/// The effect estimate is the log ratio of the two means.
pub fn ghosh_lin_tests<T: Scalar>(dataset: &Dataset<T>, horizons: &[usize]) -> Result<Vec<TestResult>> {
    let s1 = influence_summaries(dataset, Arm::Treated, horizons)?;
    let s0 = influence_summaries(dataset, Arm::Control, horizons)?;
    s1.iter()
        .zip(&s0)
        .map(|(t, c)| {
            let u = t.mean_events - c.mean_events;
            let var: f64 = t.mean_influence.iter().chain(&c.mean_influence).map(|x| x * x).sum();
            let h = t.horizon_index;
            let mut r = TestResult::from_score(
                Method::GhoshLin,
                h,
                dataset.grid().time(h).as_f64(),
                u,
                var,
                VarianceMethod::Influence,
            )?;
            let ratio = (t.mean_events / c.mean_events).ln();
            if ratio.is_finite() {
                r.beta_hat = Some(ratio);
            } else {
                r.beta_boundary = Some("zero mean frequency in one arm".into());
            }
            Ok(r)
        })
        .collect()
}

pub fn ghosh_lin_test<T: Scalar>(dataset: &Dataset<T>, horizon: usize) -> Result<TestResult> {
    Ok(ghosh_lin_tests(dataset, &[horizon])?.remove(0))
}
