use std::collections::HashMap;

use crate::data::{Arm, SubjectHistory, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Immutable two-arm sample on a shared time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T: Scalar = f64> {
    grid: TimeGrid<T>,
    subjects: Vec<SubjectHistory>,
    arm_counts: [usize; 2],
    index: HashMap<String, usize>,
}

/// Per-interval aggregate counts for one arm; entry `k - 1` describes
/// interval `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiskTable {
    pub at_risk: Vec<usize>,
    pub deaths: Vec<usize>,
    pub events: Vec<u64>,
}

impl RiskTable {
    pub fn k(&self) -> usize {
        self.at_risk.len()
    }
}

impl<T: Scalar> Dataset<T> {
    pub fn new(grid: TimeGrid<T>, subjects: Vec<SubjectHistory>) -> Result<Self> {
        let k = grid.k();
        let mut arm_counts = [0usize; 2];
        let mut index = HashMap::with_capacity(subjects.len());
        for (i, s) in subjects.iter().enumerate() {
            if s.k() != k {
                return Err(Error::DataIntegrity {
                    subject: s.id().to_string(),
                    message: format!("history has {} intervals but the grid has {k}", s.k()),
                });
            }
            if index.insert(s.id().to_string(), i).is_some() {
                return Err(Error::input(format!("duplicate subject id `{}`", s.id())));
            }
            arm_counts[s.arm().index()] += 1;
        }
        if arm_counts.contains(&0) {
            return Err(Error::input(format!(
                "both arms must be nonempty (control {}, treated {})",
                arm_counts[0], arm_counts[1]
            )));
        }
        Ok(Dataset {
            grid,
            subjects,
            arm_counts,
            index,
        })
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn k(&self) -> usize {
        self.grid.k()
    }

    pub fn subjects(&self) -> &[SubjectHistory] {
        &self.subjects
    }

    pub fn n(&self) -> usize {
        self.subjects.len()
    }

    pub fn arm_count(&self, arm: Arm) -> usize {
        self.arm_counts[arm.index()]
    }

    pub fn arm_counts(&self) -> [usize; 2] {
        self.arm_counts
    }

    pub fn subject(&self, id: &str) -> Result<&SubjectHistory> {
        self.index
            .get(id)
            .map(|&i| &self.subjects[i])
            .ok_or_else(|| Error::UnknownSubject(id.to_string()))
    }

    /// At-risk indicator `Z_i(t_k)` for interval `k` in `1..=K`.
    pub fn at_risk(&self, id: &str, k: usize) -> Result<bool> {
        self.grid.check_interval(k)?;
        Ok(self.subject(id)?.at_risk(k))
    }

    pub fn arm_subjects(&self, arm: Arm) -> impl Iterator<Item = &SubjectHistory> + '_ {
        self.subjects.iter().filter(move |s| s.arm() == arm)
    }

    pub fn total_events(&self) -> u64 {
        self.subjects.iter().map(SubjectHistory::total_events).sum()
    }

    /// At-risk counts, deaths and recurrent events per interval for `arm`.
    pub fn risk_table(&self, arm: Arm) -> RiskTable {
        let k = self.k();
        let mut exits = vec![0usize; k + 2];
        let mut deaths = vec![0usize; k];
        let mut events = vec![0u64; k];
        for s in self.arm_subjects(arm) {
            let last = s.last_at_risk();
            exits[last + 1] += 1;
            if let Some(d) = s.death_interval() {
                deaths[d - 1] += 1;
            }
            for (e, &c) in events.iter_mut().zip(&s.event_counts()[..last]) {
                *e += c as u64;
            }
        }
        let mut at_risk = Vec::with_capacity(k);
        let mut current = self.arm_count(arm);
        for j in 1..=k {
            current -= exits[j];
            at_risk.push(current);
        }
        RiskTable {
            at_risk,
            deaths,
            events,
        }
    }

    /// Copy with every arm label flipped.
    pub fn with_arms_swapped(&self) -> Dataset<T> {
        let subjects = self
            .subjects
            .iter()
            .map(|s| s.with_identity(s.id().to_string(), s.arm().other()))
            .collect();
        Dataset::new(self.grid.clone(), subjects).expect("swapping arms keeps a valid dataset")
    }

    /// Copy with the given arm labels (one per subject, in order).
    pub fn with_arms(&self, arms: &[Arm]) -> Result<Dataset<T>> {
        if arms.len() != self.n() {
            return Err(Error::input("one arm label per subject is required"));
        }
        let subjects = self
            .subjects
            .iter()
            .zip(arms)
            .map(|(s, &a)| s.with_identity(s.id().to_string(), a))
            .collect();
        Dataset::new(self.grid.clone(), subjects)
    }

    /// Subjects picked by position, renamed `<id>#<draw>` so repeated picks
    /// stay distinct.
    pub fn resampled(&self, picks: &[usize]) -> Result<Dataset<T>> {
        let subjects = picks
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                let s = &self.subjects[i];
                s.with_identity(format!("{}#{j}", s.id()), s.arm())
            })
            .collect();
        Dataset::new(self.grid.clone(), subjects)
    }

    /// Concatenation with another dataset on the same grid.
    pub fn concat(&self, other: &Dataset<T>) -> Result<Dataset<T>> {
        if self.grid != other.grid {
            return Err(Error::input("datasets live on different grids"));
        }
        let mut subjects = self.subjects.clone();
        subjects.extend(other.subjects.iter().cloned());
        Dataset::new(self.grid.clone(), subjects)
    }

    /// Same subjects on a grid with another scalar type.
    pub fn cast<U: Scalar>(&self) -> Dataset<U> {
        Dataset {
            grid: self.grid.cast(),
            subjects: self.subjects.clone(),
            arm_counts: self.arm_counts,
            index: self.index.clone(),
        }
    }
}
