//! Run configuration: command-line flags merged over an optional JSON file.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use recursep::data::Arm;
use recursep::estimators::{HazardSpec, Link};
use recursep::inference::{Direction, Method};
use recursep::io::GridSpec;
use recursep::separable::{PrMsmatOptions, Truncation, VarianceChoice};
use recursep::simulate::{CampaignConfig, Scenario};
use recursep::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Test,
    Estimate,
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceFlag {
    Plugin,
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkFlag {
    Logit,
    Identity,
}

impl From<LinkFlag> for Link {
    fn from(l: LinkFlag) -> Link {
        match l {
            LinkFlag::Logit => Link::Logit,
            LinkFlag::Identity => Link::Identity,
        }
    }
}

/// Separable-effects tests for recurrent events with a terminal event.
#[derive(Debug, Parser)]
#[command(name = "recursep", version, about)]
pub struct Cli {
    /// What to run.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Long-format CSV with columns id,arm,type,time.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON configuration; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of equal-width grid intervals over [0, largest observed time].
    #[arg(long)]
    pub grid_k: Option<usize>,
    /// Comma-separated horizons in the time unit of the data.
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<f64>>,
    /// Comma-separated methods: PR-MSMaT, WA, GL.
    #[arg(long, value_delimiter = ',')]
    pub method: Option<Vec<String>>,
    /// Level (0 or 1) at which the death component is held.
    #[arg(long)]
    pub a_d: Option<u8>,
    /// Variance estimator for the PR-MSMaT and WA tests.
    #[arg(long, value_enum)]
    pub variance: Option<VarianceFlag>,
    /// Bootstrap replicates.
    #[arg(long)]
    pub bootstrap_b: Option<usize>,
    /// Weight truncation bounds as LOWER,UPPER.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub truncate: Option<Vec<f64>>,
    /// Link of the death-hazard model.
    #[arg(long, value_enum)]
    pub link: Option<LinkFlag>,
    /// Time bins of the death-hazard model.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Contents of a `--config` file. Every field is optional; campaign fields
/// are only read in simulate mode.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mode: Option<Mode>,
    pub input: Option<PathBuf>,
    pub grid_k: Option<usize>,
    /// Explicit grid boundaries; overrides `grid_k`.
    pub grid: Option<Vec<f64>>,
    pub horizons: Option<Vec<f64>>,
    pub methods: Option<Vec<String>>,
    pub a_d: Option<u8>,
    pub variance: Option<VarianceFlag>,
    pub bootstrap_b: Option<usize>,
    pub truncate: Option<[f64; 2]>,
    pub link: Option<LinkFlag>,
    pub bins: Option<usize>,
    pub slope: Option<bool>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub scenarios: Option<Vec<Scenario>>,
    pub replications: Option<usize>,
    pub directions: Option<Vec<Direction>>,
    pub level: Option<f64>,
}

/// Fully resolved configuration, recorded verbatim in `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub input: Option<PathBuf>,
    pub grid: GridSpec,
    pub horizons: Option<Vec<f64>>,
    pub methods: Vec<Method>,
    pub a_d: u8,
    pub variance: VarianceFlag,
    pub bootstrap_b: usize,
    pub truncate: [f64; 2],
    pub link: LinkFlag,
    pub bins: usize,
    pub slope: bool,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub campaign: Option<CampaignConfig>,
}

pub const THREADS_VAR: &str = "RECURSEP_THREADS";

impl RunConfig {
    pub fn resolve(cli: Cli, threads_env: Option<String>) -> Result<RunConfig> {
        let file: FileConfig = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::input(format!("cannot read config `{}`: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::input(format!("config `{}`: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let mode = cli
            .mode
            .or(file.mode)
            .ok_or_else(|| Error::input("--mode is required (test, estimate or simulate)"))?;
        let grid = match (cli.grid_k, file.grid, file.grid_k) {
            (Some(k), _, _) => GridSpec::Uniform { k, tau: None },
            (None, Some(b), _) => GridSpec::Boundaries(b),
            (None, None, Some(k)) => GridSpec::Uniform { k, tau: None },
            (None, None, None) => GridSpec::default(),
        };
        let methods = match cli.method.or(file.methods) {
            Some(names) => names.iter().map(|m| Method::parse(m)).collect::<Result<Vec<_>>>()?,
            None => vec![Method::PrMsmat, Method::WhileAlive, Method::GhoshLin],
        };
        if methods.is_empty() {
            return Err(Error::input("at least one method is required"));
        }
        let a_d = cli.a_d.or(file.a_d).unwrap_or(0);
        if a_d > 1 {
            return Err(Error::input(format!("--a-d must be 0 or 1, got {a_d}")));
        }
        let variance = cli.variance.or(file.variance).unwrap_or(VarianceFlag::Plugin);
        let bootstrap_b = cli.bootstrap_b.or(file.bootstrap_b).unwrap_or(500);
        if variance == VarianceFlag::Bootstrap && bootstrap_b < 2 {
            return Err(Error::input("--bootstrap-b must be at least 2"));
        }
        let truncate = match cli.truncate {
            Some(v) => [v[0], v[1]],
            None => file.truncate.unwrap_or([0.05, 20.0]),
        };
        Truncation::new(truncate[0], truncate[1])?;
        let bins = cli.bins.or(file.bins).unwrap_or(10);
        if bins == 0 {
            return Err(Error::input("--bins must be positive"));
        }
        let threads = match threads_env {
            Some(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&t| t > 0)
                    .ok_or_else(|| Error::input(format!("{THREADS_VAR} must be a positive integer, got `{v}`")))?,
            ),
            None => None,
        };
        let mut cfg = RunConfig {
            mode,
            input: cli.input.or(file.input),
            grid,
            horizons: cli.horizons.or(file.horizons),
            methods,
            a_d,
            variance,
            bootstrap_b,
            truncate,
            link: cli.link.or(file.link).unwrap_or(LinkFlag::Logit),
            bins,
            slope: file.slope.unwrap_or(true),
            seed: cli.seed.or(file.seed).unwrap_or(0),
            out: cli.out.or(file.out).unwrap_or_else(|| PathBuf::from("recursep-out")),
            threads,
            campaign: None,
        };
        if let Some(h) = &cfg.horizons {
            if h.is_empty() || h.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::input("horizons must be positive numbers"));
            }
        }
        if mode == Mode::Simulate {
            let scenarios = file
                .scenarios
                .ok_or_else(|| Error::input("simulate mode needs `scenarios` in the --config file"))?;
            let campaign = CampaignConfig {
                scenarios,
                methods: cfg.methods.clone(),
                directions: file.directions.unwrap_or_else(|| Direction::ALL.to_vec()),
                replications: file.replications.unwrap_or(1000),
                seed: cfg.seed,
                level: file.level.unwrap_or(0.05),
                pr_msmat: cfg.pr_msmat_options(),
                wa_variance: Default::default(),
                max_failure_rate: 0.01,
            };
            campaign.validate()?;
            cfg.campaign = Some(campaign);
        } else if cfg.input.is_none() {
            return Err(Error::input("--input is required in test and estimate modes"));
        }
        Ok(cfg)
    }

    pub fn arm_d(&self) -> Arm {
        if self.a_d == 1 {
            Arm::Treated
        } else {
            Arm::Control
        }
    }

    pub fn pr_msmat_options(&self) -> PrMsmatOptions {
        PrMsmatOptions {
            a_d: self.arm_d(),
            hazard: HazardSpec {
                link: self.link.into(),
                bins: self.bins,
                slope: self.slope,
            },
            truncation: Truncation {
                lower: self.truncate[0],
                upper: self.truncate[1],
            },
            variance: match self.variance {
                VarianceFlag::Plugin => VarianceChoice::Plugin,
                VarianceFlag::Bootstrap => VarianceChoice::Bootstrap {
                    replicates: self.bootstrap_b,
                    seed: self.seed,
                },
            },
        }
    }
}
