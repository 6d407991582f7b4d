use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Partition `0 = t_0 < t_1 < ... < t_K = tau` of the follow-up window.
///
/// Interval `k` (1-based) is the left-open, right-closed cell `(t_{k-1}, t_k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct TimeGrid<T: Scalar = f64> {
    boundaries: Vec<T>,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(boundaries: Vec<T>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::input("a time grid needs at least two boundaries"));
        }
        if boundaries[0] != T::zero() {
            return Err(Error::input("the first grid boundary must be 0"));
        }
        if boundaries.iter().any(|b| !b.is_finite()) {
            return Err(Error::input("grid boundaries must be finite"));
        }
        if boundaries.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("grid boundaries must be strictly increasing"));
        }
        Ok(TimeGrid { boundaries })
    }

    /// `k` equal-width intervals over `[0, tau]`.
    pub fn uniform(k: usize, tau: T) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("a time grid needs K >= 1 intervals"));
        }
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(Error::input("grid horizon tau must be positive and finite"));
        }
        let width = tau / T::count(k);
        let mut b: Vec<T> = (0..=k).map(|j| T::count(j) * width).collect();
        b[k] = tau;
        Self::new(b)
    }

    /// Unit-width grid `0, 1, ..., k`.
    pub fn unit(k: usize) -> Result<Self> {
        Self::uniform(k, T::count(k))
    }

    /// Number of intervals K.
    pub fn k(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn tau(&self) -> T {
        self.boundaries[self.k()]
    }

    pub fn boundaries(&self) -> &[T] {
        &self.boundaries
    }

    /// `t_k` for `k` in `0..=K`.
    pub fn time(&self, k: usize) -> T {
        self.boundaries[k]
    }

    /// Width `t_k - t_{k-1}` of interval `k` (1-based).
    pub fn width(&self, k: usize) -> T {
        self.boundaries[k] - self.boundaries[k - 1]
    }

    /// Interval containing `u`: the `k` with `t_{k-1} < u <= t_k`.
    ///
    /// Returns `Some(0)` for `u == 0` and `None` for `u > tau`; negative or
    /// non-finite times are an input error.
    pub fn interval_of(&self, u: T) -> Result<Option<usize>> {
        if !u.is_finite() || u < T::zero() {
            return Err(Error::input(format!("time {u} is negative or not finite")));
        }
        if u == T::zero() {
            return Ok(Some(0));
        }
        if u > self.tau() {
            return Ok(None);
        }
        // First boundary >= u.
        let k = self.boundaries.partition_point(|b| *b < u);
        Ok(Some(k))
    }

    /// Largest `k >= 1` with `t_k <= horizon`, used to snap an analysis
    /// horizon onto the grid.
    pub fn horizon_index(&self, horizon: T) -> Result<usize> {
        if !horizon.is_finite() || horizon > self.tau() {
            return Err(Error::input(format!(
                "horizon {horizon} exceeds the grid horizon {}",
                self.tau()
            )));
        }
        let k = self.boundaries.partition_point(|b| *b <= horizon) - 1;
        if k == 0 {
            return Err(Error::input(format!(
                "horizon {horizon} is shorter than the first grid interval"
            )));
        }
        Ok(k)
    }

    pub fn check_interval(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.k() {
            Err(Error::IntervalOutOfRange {
                index: k,
                k: self.k(),
            })
        } else {
            Ok(())
        }
    }

    pub fn cast<U: Scalar>(&self) -> TimeGrid<U> {
        TimeGrid {
            boundaries: self.boundaries.iter().map(|b| U::of(b.as_f64())).collect(),
        }
    }
}
