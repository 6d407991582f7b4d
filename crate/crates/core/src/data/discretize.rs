use serde::{Deserialize, Serialize};

use crate::data::{Arm, Dataset, SubjectHistory, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How follow-up of a continuous-time record ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exit<T> {
    Death(T),
    Censor(T),
}

impl<T: Copy> Exit<T> {
    pub fn time(&self) -> T {
        match *self {
            Exit::Death(t) | Exit::Censor(t) => t,
        }
    }
}

/// One subject in continuous time, before discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord<T> {
    pub id: String,
    pub arm: Arm,
    pub events: Vec<T>,
    pub exit: Exit<T>,
}

/// What to do when a recurrent event and the death of the same subject land
/// in one grid interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Refuse the record.
    #[default]
    Reject,
    /// Record the death in the following interval (or drop it past the
    /// last interval), keeping every event.
    DeferDeath,
}

/// Map continuous-time records onto `grid`.
///
/// Event, death and censoring times `u` map to the interval `k` with
/// `t_{k-1} < u <= t_k`. A censored subject stays at risk through the
/// interval containing its censoring time. Follow-up beyond `tau` is
/// administratively censored at `tau`.
pub fn discretize<T: Scalar>(
    records: &[RawRecord<T>],
    grid: &TimeGrid<T>,
    ties: TiePolicy,
) -> Result<Dataset<T>> {
    let k = grid.k();
    let mut subjects = Vec::with_capacity(records.len());
    for r in records {
        let integrity = |message: String| Error::DataIntegrity {
            subject: r.id.clone(),
            message,
        };
        let exit_time = r.exit.time();
        if !exit_time.is_finite() || exit_time < T::zero() {
            return Err(Error::input(format!(
                "subject `{}`: exit time {exit_time} is negative or not finite",
                r.id
            )));
        }
        let mut counts = vec![0u32; k];
        for &u in &r.events {
            if !u.is_finite() || u <= T::zero() {
                return Err(Error::input(format!(
                    "subject `{}`: event time {u} must be positive",
                    r.id
                )));
            }
            if u >= exit_time {
                let what = match r.exit {
                    Exit::Death(_) => "death",
                    Exit::Censor(_) => "censoring",
                };
                return Err(integrity(format!(
                    "event at time {u} is not strictly before {what} at time {exit_time}"
                )));
            }
            if let Some(j) = grid.interval_of(u)? {
                counts[j - 1] += 1;
            }
        }
        let (mut death, censor) = match r.exit {
            Exit::Death(u) => {
                if u == T::zero() {
                    return Err(Error::input(format!(
                        "subject `{}`: death at time 0 is invalid",
                        r.id
                    )));
                }
                (grid.interval_of(u)?, None)
            }
            Exit::Censor(u) => {
                let c = grid.interval_of(u)?.map(|j| j + 1).filter(|&c| c <= k);
                (None, c)
            }
        };
        if let Some(d) = death {
            if counts[d - 1] > 0 {
                match ties {
                    TiePolicy::Reject => {
                        return Err(integrity(format!(
                            "recurrent event and death fall in the same interval {d}"
                        )))
                    }
                    TiePolicy::DeferDeath => death = Some(d + 1).filter(|&d| d <= k),
                }
            }
        }
        subjects.push(SubjectHistory::new(
            r.id.clone(),
            r.arm,
            counts,
            death,
            censor,
        )?);
    }
    Dataset::new(grid.clone(), subjects)
}

/// Continuous-time view of a discretized subject: events at interval
/// midpoints, death at the end of its interval, censoring at the end of the
/// last observed interval. `discretize` maps this back to the same history.
pub fn to_raw_record<T: Scalar>(s: &SubjectHistory, grid: &TimeGrid<T>) -> RawRecord<T> {
    let mut events = Vec::new();
    for (j, &c) in s.event_counts().iter().enumerate() {
        for _ in 0..c {
            events.push((grid.time(j) + grid.time(j + 1)) / T::of(2.0));
        }
    }
    let exit = match (s.death_interval(), s.censor_interval()) {
        (Some(d), _) => Exit::Death(grid.time(d)),
        (None, Some(c)) => Exit::Censor(grid.time(c - 1)),
        (None, None) => Exit::Censor(grid.tau()),
    };
    RawRecord {
        id: s.id().to_string(),
        arm: s.arm(),
        events,
        exit,
    }
}
