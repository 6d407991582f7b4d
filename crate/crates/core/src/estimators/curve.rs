use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Per-interval increments.
    Increment,
    /// Levels at the right endpoint of each interval.
    Cumulative,
}

/// Right-continuous step function on a grid: one value per interval,
/// attached to the interval's right endpoint `t_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCurve<T: Scalar = f64> {
    pub kind: CurveKind,
    pub times: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Scalar> StepCurve<T> {
    pub(crate) fn new(kind: CurveKind, times: Vec<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(times.len(), values.len());
        StepCurve { kind, times, values }
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// Value attached to interval `k` (1-based).
    pub fn at(&self, k: usize) -> T {
        self.values[k - 1]
    }

    pub fn increments(&self) -> StepCurve<T> {
        match self.kind {
            CurveKind::Increment => self.clone(),
            CurveKind::Cumulative => {
                let mut prev = T::zero();
                let values = self
                    .values
                    .iter()
                    .map(|&v| {
                        let d = v - prev;
                        prev = v;
                        d
                    })
                    .collect();
                StepCurve::new(CurveKind::Increment, self.times.clone(), values)
            }
        }
    }

    pub fn cumulative(&self) -> StepCurve<T> {
        match self.kind {
            CurveKind::Cumulative => self.clone(),
            CurveKind::Increment => {
                let mut acc = T::zero();
                let values = self
                    .values
                    .iter()
                    .map(|&v| {
                        acc = acc + v;
                        acc
                    })
                    .collect();
                StepCurve::new(CurveKind::Cumulative, self.times.clone(), values)
            }
        }
    }

    /// `(time, value)` pairs for plotting.
    pub fn points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }
}

pub(crate) fn cumsum<T: Scalar>(xs: &[T]) -> Vec<T> {
    let mut acc = T::zero();
    xs.iter()
        .map(|&x| {
            acc = acc + x;
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increments_and_cumulative_invert() {
        let c = StepCurve::new(CurveKind::Increment, vec![1.0, 2.0, 3.0], vec![0.5, 0.0, 1.5]);
        let cum = c.cumulative();
        assert_eq!(cum.values, vec![0.5, 0.5, 2.0]);
        assert_eq!(cum.increments().values, c.values);
        assert_eq!(cum.at(3), 2.0);
    }
}
