use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::inference::Method;
use crate::simulate::{CampaignConfig, CampaignResult, RejectionRate, ReplicationFailure};

#[derive(Serialize)]
struct ReplicationRow<'a> {
    scenario: &'a str,
    replication: usize,
    seed: u64,
    method: Method,
    tau: f64,
    u: f64,
    var: f64,
    z: f64,
    p_two: f64,
    p_left: f64,
    p_right: f64,
    beta_hat: Option<f64>,
    truncated_fraction: Option<f64>,
}

#[derive(Serialize)]
struct CurveRow {
    time: f64,
    control: f64,
    treated: f64,
    gap: f64,
    gap_se: f64,
}

#[derive(Serialize)]
struct ScenarioSummary<'a> {
    name: &'a str,
    successful_replications: usize,
    failures: &'a [ReplicationFailure],
    rejection_rates: &'a [RejectionRate],
    crossings: Option<Vec<f64>>,
    max_standardized_gap: Option<f64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a CampaignConfig,
    scenarios: Vec<ScenarioSummary<'a>>,
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Write `rejection_rates.csv`, `replications.csv`, one
/// `curves_<scenario>.csv` per scenario with archived curves, and
/// `summary.json` into `dir`. Returns the paths written.
pub fn write_campaign(result: &CampaignResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("rejection_rates.csv");
    let mut w = csv::Writer::from_path(&path)?;
    for s in &result.scenarios {
        for r in &s.rejection_rates {
            w.serialize(r)?;
        }
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("replications.csv");
    let mut w = csv::Writer::from_path(&path)?;
    for s in &result.scenarios {
        for rep in &s.replications {
            for t in &rep.results {
                w.serialize(ReplicationRow {
                    scenario: &s.name,
                    replication: rep.replication,
                    seed: rep.seed,
                    method: t.method,
                    tau: t.tau,
                    u: t.u,
                    var: t.var,
                    z: t.z,
                    p_two: t.p_two,
                    p_left: t.p_left,
                    p_right: t.p_right,
                    beta_hat: t.beta_hat,
                    truncated_fraction: t.truncated_fraction,
                })?;
            }
        }
    }
    w.flush()?;
    written.push(path);

    for s in &result.scenarios {
        let Some(c) = &s.curves else { continue };
        let path = dir.join(format!("curves_{}.csv", file_stem(&s.name)));
        let mut w = csv::Writer::from_path(&path)?;
        for j in 0..c.times.len() {
            w.serialize(CurveRow {
                time: c.times[j],
                control: c.control[j],
                treated: c.treated[j],
                gap: c.treated[j] - c.control[j],
                gap_se: c.gap_se[j],
            })?;
        }
        w.flush()?;
        written.push(path);
    }

    let summary = Summary {
        config: &result.config,
        scenarios: result
            .scenarios
            .iter()
            .map(|s| ScenarioSummary {
                name: &s.name,
                successful_replications: s.replications.len(),
                failures: &s.failures,
                rejection_rates: &s.rejection_rates,
                crossings: s.curves.as_ref().map(|c| c.crossings()),
                max_standardized_gap: s.curves.as_ref().map(|c| c.max_standardized_gap()),
            })
            .collect(),
    };
    let path = dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&summary)?)?;
    written.push(path);
    Ok(written)
}
