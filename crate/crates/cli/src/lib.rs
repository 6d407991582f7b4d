//! Command-line front end: `test`, `estimate` and `simulate` modes.
//!
//! Exit codes: 0 success, 2 input or usage errors, 3 numerical failures.

mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Parser;
use log::info;
use recursep::data::{Arm, Dataset};
use recursep::estimators::{
    ghosh_lin_mean, ghosh_lin_test, kaplan_meier, nelson_aalen_events, while_alive_curve, while_alive_test, WaVariance,
};
use recursep::inference::{Method, TestResult};
use recursep::io::{ingest_csv, write_curve_csv, write_json};
use recursep::separable::{pr_msmat_test, SeparableAnalysis};
use recursep::simulate::{run_campaign, write_campaign};
use recursep::{Error, Result};
use serde::Serialize;

pub use config::{Cli, FileConfig, Mode, RunConfig, THREADS_VAR};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let config = match RunConfig::resolve(cli, std::env::var(THREADS_VAR).ok()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    match execute(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    outputs: Vec<String>,
    failures: Vec<String>,
}

fn write_manifest(config: &RunConfig, outputs: &[PathBuf], failures: Vec<String>) -> Result<()> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        outputs: outputs
            .iter()
            .map(|p| {
                p.strip_prefix(&config.out)
                    .unwrap_or(p)
                    .display()
                    .to_string()
            })
            .collect(),
        failures,
    };
    write_json(&config.out.join("manifest.json"), &manifest)
}

fn execute(config: &RunConfig) -> Result<i32> {
    std::fs::create_dir_all(&config.out)?;
    match config.mode {
        Mode::Test => run_test(config),
        Mode::Estimate => run_estimate(config),
        Mode::Simulate => run_simulate(config),
    }
}

fn load(config: &RunConfig) -> Result<Dataset> {
    let path = config.input.as_deref().expect("input checked during resolution");
    if !path.exists() {
        return Err(Error::input(format!("input file `{}` does not exist", path.display())));
    }
    let data = ingest_csv(path, &config.grid)?;
    info!("loaded {} subjects on {} intervals", data.n(), data.k());
    Ok(data)
}

fn horizon_indices(config: &RunConfig, data: &Dataset) -> Result<Vec<usize>> {
    match &config.horizons {
        Some(h) => h.iter().map(|&t| data.grid().horizon_index(t)).collect(),
        None => Ok(vec![data.k()]),
    }
}

fn run_test(config: &RunConfig) -> Result<i32> {
    let data = load(config)?;
    let horizons = horizon_indices(config, &data)?;
    let options = config.pr_msmat_options();
    let wa = match config.variance {
        config::VarianceFlag::Plugin => WaVariance::Influence,
        config::VarianceFlag::Bootstrap => WaVariance::Bootstrap {
            replicates: config.bootstrap_b,
            seed: config.seed,
        },
    };
    let mut outputs = Vec::new();
    let mut failures = Vec::new();
    let mut table: Vec<(Method, Vec<Option<TestResult>>)> = Vec::new();
    for &method in &config.methods {
        let mut row = Vec::new();
        for &h in &horizons {
            let outcome = match method {
                Method::PrMsmat => pr_msmat_test(&data, h, &options),
                Method::WhileAlive => while_alive_test(&data, h, wa),
                Method::GhoshLin => ghosh_lin_test(&data, h),
            };
            match outcome {
                Ok(r) => {
                    let path = config.out.join(format!("test_{}_k{h}.json", method.label()));
                    write_json(&path, &r)?;
                    outputs.push(path);
                    row.push(Some(r));
                }
                Err(e) if e.is_numerical() => {
                    failures.push(format!("{method} at horizon index {h}: {e}"));
                    row.push(None);
                }
                Err(e) => return Err(e),
            }
        }
        table.push((method, row));
    }
    print!("{}", render_table(&data, &horizons, &table));
    for f in &failures {
        eprintln!("warning: {f}");
    }
    let code = if failures.is_empty() { EXIT_OK } else { EXIT_NUMERICAL };
    write_manifest(config, &outputs, failures)?;
    Ok(code)
}

/// One row per horizon; per method the standardized statistic and
/// `-log10` of the two-sided p-value.
pub fn render_table(data: &Dataset, horizons: &[usize], table: &[(Method, Vec<Option<TestResult>>)]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>10}", "tau");
    for (m, _) in table {
        let _ = write!(out, " {:>10} {:>10}", format!("{m} z"), "-log10 p");
    }
    out.push('\n');
    for (j, &h) in horizons.iter().enumerate() {
        let _ = write!(out, "{:>10}", format!("{}", data.grid().time(h)));
        for (_, row) in table {
            match &row[j] {
                Some(r) => {
                    let _ = write!(out, " {:>10.3} {:>10.3}", r.z, -r.p_two.log10());
                }
                None => {
                    let _ = write!(out, " {:>10} {:>10}", "NA", "NA");
                }
            }
        }
        out.push('\n');
    }
    out
}

fn arm_tag(a: Arm) -> usize {
    a.index()
}

fn run_estimate(config: &RunConfig) -> Result<i32> {
    let data = load(config)?;
    let out = &config.out;
    let mut outputs = Vec::new();
    let mut write = |name: String, start: f64, points: Vec<(f64, f64)>| -> Result<()> {
        let path = out.join(name);
        write_curve_csv(&path, start, points)?;
        outputs.push(path);
        Ok(())
    };
    for arm in Arm::BOTH {
        let a = arm_tag(arm);
        write(format!("km_arm{a}.csv"), 1.0, kaplan_meier(&data, arm)?.points().collect())?;
        write(format!("na_arm{a}.csv"), 0.0, nelson_aalen_events(&data, arm)?.points().collect())?;
        write(format!("gl_arm{a}.csv"), 0.0, ghosh_lin_mean(&data, arm)?.points().collect())?;
        write(format!("wa_loss_arm{a}.csv"), 0.0, while_alive_curve(&data, arm)?.points().collect())?;
    }
    let options = config.pr_msmat_options();
    let fit = SeparableAnalysis::fit(&data, options.a_d, options.hazard, options.truncation)?;
    for curve in [&fit.curve1, &fit.curve0] {
        let points = curve.times.iter().copied().zip(curve.cumulative.iter().copied()).collect();
        write(
            format!("counterfactual_ay{}_ad{}.csv", arm_tag(curve.a_y), arm_tag(curve.a_d)),
            0.0,
            points,
        )?;
    }
    drop(write);
    write_manifest(config, &outputs, Vec::new())?;
    Ok(EXIT_OK)
}

fn run_simulate(config: &RunConfig) -> Result<i32> {
    let campaign = config.campaign.as_ref().expect("campaign resolved in simulate mode");
    let result = run_campaign(campaign, config.threads)?;
    let outputs = write_campaign(&result, &config.out)?;
    write_manifest(config, &outputs, Vec::new())?;
    Ok(EXIT_OK)
}
