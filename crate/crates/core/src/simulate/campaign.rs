use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::estimators::{ghosh_lin_tests, while_alive_curve, while_alive_tests, WaVariance};
use crate::inference::{Direction, Method, TestResult};
use crate::rng::derive_seed;
use crate::separable::{pr_msmat_tests, PrMsmatOptions, VarianceChoice};
use crate::simulate::{generate_continuous_discretized, generate_discrete, ContinuousDgpConfig, DiscreteDgpConfig};

/// Data-generating design of one scenario. The design's own `seed` is
/// ignored; every replication gets a seed derived from the campaign seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioDesign {
    Discrete {
        config: DiscreteDgpConfig,
    },
    /// Continuous-time design analysed on `grid_k` equal intervals.
    Continuous {
        config: ContinuousDgpConfig,
        #[serde(default = "default_grid_k")]
        grid_k: usize,
    },
}

fn default_grid_k() -> usize {
    60
}

impl ScenarioDesign {
    pub fn generate(&self, seed: u64) -> Result<Dataset> {
        match self {
            ScenarioDesign::Discrete { config } => generate_discrete(&DiscreteDgpConfig { seed, ..*config }),
            ScenarioDesign::Continuous { config, grid_k } => {
                generate_continuous_discretized(&ContinuousDgpConfig { seed, ..*config }, *grid_k)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub design: ScenarioDesign,
    /// Horizons in time units; each snaps to the last grid point at or
    /// before it.
    pub horizons: Vec<f64>,
    /// Archive mean survival-completed cumulative loss curves per arm.
    #[serde(default)]
    pub curves: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub scenarios: Vec<Scenario>,
    pub methods: Vec<Method>,
    #[serde(default = "all_directions")]
    pub directions: Vec<Direction>,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub pr_msmat: PrMsmatOptions,
    #[serde(default)]
    pub wa_variance: WaVariance,
    /// Largest tolerated share of failed replications per scenario.
    #[serde(default = "default_max_failure_rate")]
    pub max_failure_rate: f64,
}

fn all_directions() -> Vec<Direction> {
    Direction::ALL.to_vec()
}

fn default_level() -> f64 {
    0.05
}

fn default_max_failure_rate() -> f64 {
    0.01
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() || self.methods.is_empty() || self.directions.is_empty() {
            return Err(Error::input("a campaign needs scenarios, methods and directions"));
        }
        if self.replications == 0 {
            return Err(Error::input("replications must be positive"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::input(format!("level must lie in (0, 1), got {}", self.level)));
        }
        for s in &self.scenarios {
            if s.horizons.is_empty() {
                return Err(Error::input(format!("scenario `{}` has no horizons", s.name)));
            }
        }
        let mut names: Vec<&str> = self.scenarios.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::input("scenario names must be unique"));
        }
        Ok(())
    }
}

/// Every method's results in one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub seed: u64,
    pub results: Vec<TestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationFailure {
    pub replication: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRate {
    pub scenario: String,
    pub method: Method,
    pub direction: Direction,
    pub tau: f64,
    pub replications: usize,
    pub rejections: usize,
    pub rate: f64,
    /// Binomial Monte Carlo standard error of `rate`.
    pub se: f64,
}

/// Across-replication means of `L(t)` per arm and the standard error of
/// their difference at every grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCurves {
    pub times: Vec<f64>,
    pub control: Vec<f64>,
    pub treated: Vec<f64>,
    pub gap_se: Vec<f64>,
}

impl MeanCurves {
    fn from_replications(times: Vec<f64>, curves: &[[Vec<f64>; 2]]) -> Self {
        let n = curves.len() as f64;
        let k = times.len();
        let mut control = vec![0.0; k];
        let mut treated = vec![0.0; k];
        let mut gap_se = vec![0.0; k];
        for j in 0..k {
            control[j] = curves.iter().map(|c| c[0][j]).sum::<f64>() / n;
            treated[j] = curves.iter().map(|c| c[1][j]).sum::<f64>() / n;
            let mean_gap = treated[j] - control[j];
            if curves.len() > 1 {
                let ss: f64 = curves.iter().map(|c| (c[1][j] - c[0][j] - mean_gap).powi(2)).sum();
                gap_se[j] = (ss / (n - 1.0) / n).sqrt();
            }
        }
        MeanCurves {
            times,
            control,
            treated,
            gap_se,
        }
    }

    /// `treated - control` at each grid point.
    pub fn gap(&self) -> Vec<f64> {
        self.treated.iter().zip(&self.control).map(|(t, c)| t - c).collect()
    }

    /// Largest `|gap| / se` over grid points with a positive standard error.
    pub fn max_standardized_gap(&self) -> f64 {
        self.gap()
            .iter()
            .zip(&self.gap_se)
            .filter(|(_, &se)| se > 0.0)
            .map(|(g, se)| g.abs() / se)
            .fold(0.0, f64::max)
    }

    /// Times at which the mean curves cross, linearly interpolated between
    /// the grid points where the gap changes sign.
    pub fn crossings(&self) -> Vec<f64> {
        let gap = self.gap();
        let mut out = Vec::new();
        let mut last: Option<(f64, f64)> = None;
        for (&t, &g) in self.times.iter().zip(&gap) {
            if g == 0.0 {
                continue;
            }
            if let Some((t0, g0)) = last {
                if g0.signum() != g.signum() {
                    out.push(t0 + (t - t0) * g0 / (g0 - g));
                }
            }
            last = Some((t, g));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    pub replications: Vec<ReplicationRecord>,
    pub failures: Vec<ReplicationFailure>,
    pub rejection_rates: Vec<RejectionRate>,
    pub curves: Option<MeanCurves>,
}

impl ScenarioResult {
    pub fn rate(&self, method: Method, direction: Direction, tau: f64) -> Option<&RejectionRate> {
        self.rejection_rates
            .iter()
            .find(|r| r.method == method && r.direction == direction && r.tau == tau)
    }

    /// z statistics of `method` at horizon `tau`, in replication order.
    pub fn z_values(&self, method: Method, tau: f64) -> Vec<f64> {
        self.replications
            .iter()
            .flat_map(|r| r.results.iter())
            .filter(|t| t.method == method && t.tau == tau)
            .map(|t| t.z)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub config: CampaignConfig,
    pub scenarios: Vec<ScenarioResult>,
}

impl CampaignResult {
    pub fn scenario(&self, name: &str) -> Option<&ScenarioResult> {
        self.scenarios.iter().find(|s| s.name == name)
    }
}

struct Outcome {
    record: ReplicationRecord,
    curves: Option<(Vec<f64>, [Vec<f64>; 2])>,
}

fn replicate(config: &CampaignConfig, scenario: &Scenario, replication: usize, seed: u64) -> Result<Outcome> {
    let data = scenario.design.generate(seed)?;
    let grid = data.grid();
    let horizons = scenario
        .horizons
        .iter()
        .map(|&h| grid.horizon_index(h))
        .collect::<Result<Vec<usize>>>()?;
    // Resampling inside a replication draws from its own seed family.
    let mut pr = config.pr_msmat;
    if let VarianceChoice::Bootstrap { replicates, .. } = pr.variance {
        pr.variance = VarianceChoice::Bootstrap {
            replicates,
            seed: derive_seed(seed, 1),
        };
    }
    let wa = match config.wa_variance {
        WaVariance::Bootstrap { replicates, .. } => WaVariance::Bootstrap {
            replicates,
            seed: derive_seed(seed, 2),
        },
        v => v,
    };
    let mut results = Vec::new();
    for &method in &config.methods {
        let r = match method {
            Method::PrMsmat => pr_msmat_tests(&data, &horizons, &pr)?,
            Method::WhileAlive => while_alive_tests(&data, &horizons, wa)?,
            Method::GhoshLin => ghosh_lin_tests(&data, &horizons)?,
        };
        results.extend(r);
    }
    let curves = if scenario.curves {
        let c = while_alive_curve(&data, Arm::Control)?;
        let t = while_alive_curve(&data, Arm::Treated)?;
        Some((c.times.clone(), [c.values, t.values]))
    } else {
        None
    };
    Ok(Outcome {
        record: ReplicationRecord {
            replication,
            seed,
            results,
        },
        curves,
    })
}

/// Run every scenario for `config.replications` replications.
///
/// Replication `r` of scenario `s` uses seed
/// `derive_seed(derive_seed(config.seed, s), r)`, and results are merged in
/// replication order, so the output does not depend on `threads`.
pub fn run_campaign(config: &CampaignConfig, threads: Option<usize>) -> Result<CampaignResult> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::input(format!("cannot start worker pool: {e}")))?;
    let mut scenarios = Vec::with_capacity(config.scenarios.len());
    for (s_idx, scenario) in config.scenarios.iter().enumerate() {
        let scenario_seed = derive_seed(config.seed, s_idx as u64);
        info!("scenario `{}`: {} replications", scenario.name, config.replications);
        let outcomes: Vec<(usize, u64, Result<Outcome>)> = pool.install(|| {
            (0..config.replications)
                .into_par_iter()
                .map(|r| {
                    let seed = derive_seed(scenario_seed, r as u64);
                    (r, seed, replicate(config, scenario, r, seed))
                })
                .collect()
        });
        let mut records = Vec::new();
        let mut failures = Vec::new();
        let mut curves = Vec::new();
        let mut times = Vec::new();
        for (replication, seed, outcome) in outcomes {
            match outcome {
                Ok(o) => {
                    if let Some((t, c)) = o.curves {
                        times = t;
                        curves.push(c);
                    }
                    records.push(o.record);
                }
                Err(e) => {
                    warn!("scenario `{}` replication {replication} (seed {seed}) failed: {e}", scenario.name);
                    failures.push(ReplicationFailure {
                        replication,
                        seed,
                        message: e.to_string(),
                    });
                }
            }
        }
        if failures.len() as f64 > config.max_failure_rate * config.replications as f64 {
            return Err(Error::CampaignFailures {
                scenario: scenario.name.clone(),
                failed: failures.len(),
                total: config.replications,
                first_seed: failures[0].seed,
            });
        }
        let rejection_rates = tally(config, &scenario.name, &records);
        let curves = (!curves.is_empty()).then(|| MeanCurves::from_replications(times, &curves));
        scenarios.push(ScenarioResult {
            name: scenario.name.clone(),
            replications: records,
            failures,
            rejection_rates,
            curves,
        });
    }
    Ok(CampaignResult {
        config: config.clone(),
        scenarios,
    })
}

fn tally(config: &CampaignConfig, scenario: &str, records: &[ReplicationRecord]) -> Vec<RejectionRate> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    // Every successful replication reports the same (method, tau) cells.
    let cells: Vec<(Method, f64)> = first.results.iter().map(|r| (r.method, r.tau)).collect();
    let mut out = Vec::new();
    for (cell, &(method, tau)) in cells.iter().enumerate() {
        for &direction in &config.directions {
            let rejections = records
                .iter()
                .filter(|r| r.results[cell].p_value(direction) < config.level)
                .count();
            let n = records.len();
            let rate = rejections as f64 / n as f64;
            out.push(RejectionRate {
                scenario: scenario.to_string(),
                method,
                direction,
                tau,
                replications: n,
                rejections,
                rate,
                se: (rate * (1.0 - rate) / n as f64).sqrt(),
            });
        }
    }
    out
}
