//! Long-format CSV ingestion and export, curve CSVs and JSON output.
//!
//! Input schema (header required): `id,arm,type,time`, with `arm` 0 or 1,
//! `type` one of `event`, `death`, `censor`, and `time` a nonnegative
//! decimal. Each subject has exactly one `death` or `censor` row and its
//! event rows lie strictly before it.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{discretize, to_raw_record, Arm, Dataset, Exit, RawRecord, TiePolicy, TimeGrid};
use crate::error::{Error, Result};

/// How to build the grid for ingested data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpec {
    /// `k` equal intervals over `[0, tau]`; `tau` defaults to the largest
    /// observed time.
    Uniform { k: usize, tau: Option<f64> },
    /// Explicit boundaries `0 = t_0 < ... < t_K`.
    Boundaries(Vec<f64>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Uniform { k: 100, tau: None }
    }
}

impl GridSpec {
    pub fn build(&self, records: &[RawRecord<f64>]) -> Result<TimeGrid> {
        match self {
            GridSpec::Boundaries(b) => TimeGrid::new(b.clone()),
            GridSpec::Uniform { k, tau } => {
                let tau = match tau {
                    Some(t) => *t,
                    None => records
                        .iter()
                        .flat_map(|r| r.events.iter().copied().chain([r.exit.time()]))
                        .fold(0.0, f64::max),
                };
                if !(tau > 0.0) {
                    return Err(Error::input("cannot build a grid: no positive observed time"));
                }
                TimeGrid::uniform(*k, tau)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
struct Row {
    id: String,
    arm: String,
    #[serde(rename = "type")]
    kind: String,
    time: String,
}

#[derive(Serialize)]
struct OutRow<'a> {
    id: &'a str,
    arm: u8,
    #[serde(rename = "type")]
    kind: &'static str,
    time: f64,
}

/// Parse long-format records from any reader.
pub fn read_records<R: Read>(reader: R) -> Result<Vec<RawRecord<f64>>> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = csv.headers()?.clone();
    for need in ["id", "arm", "type", "time"] {
        if !headers.iter().any(|h| h == need) {
            return Err(Error::Parse {
                line: 1,
                message: format!("missing column `{need}` (expected id,arm,type,time)"),
            });
        }
    }
    let mut order: Vec<String> = Vec::new();
    let mut by_id: HashMap<String, (Arm, Vec<f64>, Option<Exit<f64>>)> = HashMap::new();
    for record in csv.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: Row = record
            .deserialize(Some(&headers))
            .map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let parse = |message: String| Error::Parse { line, message };
        if row.id.is_empty() {
            return Err(parse("empty subject id".into()));
        }
        let arm = match row.arm.as_str() {
            "0" => Arm::Control,
            "1" => Arm::Treated,
            other => return Err(parse(format!("arm must be 0 or 1, got `{other}`"))),
        };
        let time: f64 = row
            .time
            .parse()
            .map_err(|_| parse(format!("time `{}` is not a decimal number", row.time)))?;
        if !time.is_finite() || time < 0.0 {
            return Err(parse(format!("time {time} must be a nonnegative finite number")));
        }
        let entry = by_id.entry(row.id.clone()).or_insert_with(|| {
            order.push(row.id.clone());
            (arm, Vec::new(), None)
        });
        if entry.0 != arm {
            return Err(parse(format!("subject `{}` appears in both arms", row.id)));
        }
        let exit = match row.kind.as_str() {
            "event" => {
                entry.1.push(time);
                None
            }
            "death" => Some(Exit::Death(time)),
            "censor" => Some(Exit::Censor(time)),
            other => {
                return Err(parse(format!(
                    "type must be one of event, death, censor; got `{other}`"
                )))
            }
        };
        if let Some(exit) = exit {
            if entry.2.is_some() {
                return Err(parse(format!("subject `{}` has more than one death/censor row", row.id)));
            }
            entry.2 = Some(exit);
        }
    }
    let mut records = Vec::with_capacity(order.len());
    let mut missing_exit = Vec::new();
    let mut late_events = Vec::new();
    for id in order {
        let (arm, mut events, exit) = by_id.remove(&id).expect("recorded id");
        let Some(exit) = exit else {
            missing_exit.push(id);
            continue;
        };
        if events.iter().any(|&u| u >= exit.time()) {
            late_events.push(id.clone());
        }
        events.sort_by(f64::total_cmp);
        records.push(RawRecord { id, arm, events, exit });
    }
    if !missing_exit.is_empty() {
        return Err(Error::DataIntegrity {
            subject: missing_exit.join(", "),
            message: "no death or censor row".into(),
        });
    }
    if !late_events.is_empty() {
        return Err(Error::DataIntegrity {
            subject: late_events.join(", "),
            message: "event rows at or after the death/censor time".into(),
        });
    }
    Ok(records)
}

/// Read a long-format CSV and discretize it on the grid described by `grid`.
pub fn ingest_csv(path: &Path, grid: &GridSpec) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::input(format!("cannot open `{}`: {e}", path.display())))?;
    let records = read_records(file)?;
    if records.is_empty() {
        return Err(Error::input(format!("`{}` holds no subjects", path.display())));
    }
    let grid = grid.build(&records)?;
    discretize(&records, &grid, TiePolicy::Reject)
}

/// Write `dataset` in the long format; ingesting the file on the same grid
/// reproduces the dataset.
pub fn write_dataset_csv<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in dataset.subjects() {
        let r = to_raw_record(s, dataset.grid());
        let arm = r.arm.index() as u8;
        for &time in &r.events {
            w.serialize(OutRow { id: &r.id, arm, kind: "event", time })?;
        }
        let (kind, time) = match r.exit {
            Exit::Death(t) => ("death", t),
            Exit::Censor(t) => ("censor", t),
        };
        w.serialize(OutRow { id: &r.id, arm, kind, time })?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    write_dataset_csv(dataset, File::create(path)?)
}

#[derive(Serialize)]
struct CurveRow {
    time: f64,
    value: f64,
}

/// Two-column `time,value` CSV of a step curve, starting at `(0, start)`.
pub fn write_curve_csv(path: &Path, start: f64, points: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.serialize(CurveRow { time: 0.0, value: start })?;
    for (time, value) in points {
        w.serialize(CurveRow { time, value })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_orders_subjects() {
        let text = "id,arm,type,time\nb,1,event,0.5\nb,1,death,2\na,0,censor,3\n";
        let r = read_records(text.as_bytes()).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].id, "b");
        assert_eq!(r[0].events, vec![0.5]);
        assert_eq!(r[1].exit, Exit::Censor(3.0));
    }

    #[test]
    fn bad_type_names_line() {
        let text = "id,arm,type,time\na,0,event,1\na,0,relapse,2\n";
        match read_records(text.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("relapse"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn late_events_list_ids() {
        let text = "id,arm,type,time\na,0,event,5\na,0,death,2\nb,1,event,3\nb,1,censor,3\nc,1,censor,1\n";
        match read_records(text.as_bytes()) {
            Err(Error::DataIntegrity { subject, .. }) => assert_eq!(subject, "a, b"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
