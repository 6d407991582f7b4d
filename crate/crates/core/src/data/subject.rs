use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary treatment assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Arm {
    Control,
    Treated,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Control, Arm::Treated];

    pub fn index(self) -> usize {
        match self {
            Arm::Control => 0,
            Arm::Treated => 1,
        }
    }

    pub fn from_index(a: usize) -> Result<Arm> {
        match a {
            0 => Ok(Arm::Control),
            1 => Ok(Arm::Treated),
            _ => Err(Error::input(format!("arm must be 0 or 1, got {a}"))),
        }
    }

    pub fn other(self) -> Arm {
        match self {
            Arm::Control => Arm::Treated,
            Arm::Treated => Arm::Control,
        }
    }
}

impl From<Arm> for u8 {
    fn from(a: Arm) -> u8 {
        a.index() as u8
    }
}

impl TryFrom<u8> for Arm {
    type Error = Error;

    fn try_from(v: u8) -> Result<Arm> {
        Arm::from_index(v as usize)
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// One subject's discretized history.
///
/// Interval indices are 1-based. `death_interval = d` means death occurs in
/// `(t_{d-1}, t_d]`; the subject is at risk in `d` but has no recurrent event
/// there. `censor_interval = c` means follow-up ends at the start of `c`.
/// With neither set the subject is followed through the last interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectHistory {
    id: String,
    arm: Arm,
    event_counts: Vec<u32>,
    death_interval: Option<usize>,
    censor_interval: Option<usize>,
}

impl SubjectHistory {
    pub fn new(
        id: impl Into<String>,
        arm: Arm,
        event_counts: Vec<u32>,
        death_interval: Option<usize>,
        censor_interval: Option<usize>,
    ) -> Result<Self> {
        let id = id.into();
        let k = event_counts.len();
        let bad = |message: String| Error::DataIntegrity {
            subject: id.clone(),
            message,
        };
        if k == 0 {
            return Err(bad("history covers no intervals".into()));
        }
        if let Some(d) = death_interval {
            if d == 0 || d > k {
                return Err(bad(format!("death interval {d} outside 1..={k}")));
            }
            if let Some(j) = (d..=k).find(|&j| event_counts[j - 1] > 0) {
                return Err(bad(format!(
                    "recurrent event in interval {j} at or after death interval {d}"
                )));
            }
        }
        if let Some(c) = censor_interval {
            if c == 0 || c > k {
                return Err(bad(format!("censor interval {c} outside 1..={k}")));
            }
            if let Some(j) = (c..=k).find(|&j| event_counts[j - 1] > 0) {
                return Err(bad(format!(
                    "recurrent event in interval {j} at or after censoring interval {c}"
                )));
            }
        }
        if let (Some(d), Some(c)) = (death_interval, censor_interval) {
            if d >= c {
                return Err(bad(format!(
                    "death interval {d} must precede censor interval {c}"
                )));
            }
        }
        Ok(SubjectHistory {
            id,
            arm,
            event_counts,
            death_interval,
            censor_interval,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn arm(&self) -> Arm {
        self.arm
    }

    pub fn event_counts(&self) -> &[u32] {
        &self.event_counts
    }

    pub fn death_interval(&self) -> Option<usize> {
        self.death_interval
    }

    pub fn censor_interval(&self) -> Option<usize> {
        self.censor_interval
    }

    pub fn k(&self) -> usize {
        self.event_counts.len()
    }

    /// Last interval in which the subject is at risk (0 if never).
    pub fn last_at_risk(&self) -> usize {
        match (self.death_interval, self.censor_interval) {
            (Some(d), _) => d,
            (None, Some(c)) => c - 1,
            (None, None) => self.k(),
        }
    }

    /// `Z(t_k)`: alive at the start of interval `k` and still under observation.
    pub fn at_risk(&self, k: usize) -> bool {
        k >= 1 && k <= self.last_at_risk()
    }

    pub fn died_in(&self, k: usize) -> bool {
        self.death_interval == Some(k)
    }

    /// Events in interval `k` (1-based).
    pub fn events_in(&self, k: usize) -> u32 {
        self.event_counts[k - 1]
    }

    /// `Y_k = sum_{j <= k} dY_j`, with `Y_0 = 0`.
    pub fn cumulative_events(&self, k: usize) -> Result<u64> {
        if k > self.k() {
            return Err(Error::IntervalOutOfRange {
                index: k,
                k: self.k(),
            });
        }
        Ok(self.event_counts[..k].iter().map(|&c| c as u64).sum())
    }

    pub fn total_events(&self) -> u64 {
        self.event_counts.iter().map(|&c| c as u64).sum()
    }

    pub(crate) fn with_identity(&self, id: String, arm: Arm) -> SubjectHistory {
        SubjectHistory {
            id,
            arm,
            ..self.clone()
        }
    }
}
