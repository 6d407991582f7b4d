use crate::data::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::estimators::{CurveKind, StepCurve};
use crate::estimators::kaplan_meier;
use crate::scalar::Scalar;
use crate::separable::WeightProcess;

/// Estimated counterfactual mean number of recurrent events had the
/// recurrence component been set to `a_y` and the death component to `a_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualMeanCurve<T: Scalar = f64> {
    pub a_y: Arm,
    pub a_d: Arm,
    pub times: Vec<T>,
    /// `Δμ̂_t = Ŝ_t^{a_y} ΔB̂_t`.
    pub increments: Vec<T>,
    pub cumulative: Vec<T>,
    /// Kaplan–Meier survival of arm `a_y` at each `t_k`.
    pub survival: Vec<T>,
    /// Weighted event rate `ΔB̂_t` among the at-risk subjects of arm `a_y`.
    pub delta_b: Vec<T>,
}

impl<T: Scalar> CounterfactualMeanCurve<T> {
    pub fn k(&self) -> usize {
        self.increments.len()
    }

    pub fn to_step_curve(&self) -> StepCurve<T> {
        StepCurve {
            kind: CurveKind::Cumulative,
            times: self.times.clone(),
            values: self.cumulative.clone(),
        }
    }
}

pub fn counterfactual_mean_curve<T: Scalar>(
    dataset: &Dataset<T>,
    a_y: Arm,
    a_d: Arm,
    weights: &WeightProcess<T>,
) -> Result<CounterfactualMeanCurve<T>> {
    if weights.a_y != a_y || weights.a_d != a_d {
        return Err(Error::input(format!(
            "weights were computed for (a_y={}, a_d={}), curve requested for (a_y={a_y}, a_d={a_d})",
            weights.a_y, weights.a_d
        )));
    }
    if weights.weights.len() != dataset.n() {
        return Err(Error::input("weights were computed on a different dataset"));
    }
    let k = dataset.k();
    let survival = kaplan_meier(dataset, a_y)?.values;
    let mut numer = vec![T::zero(); k];
    let mut at_risk = vec![0usize; k];
    for (s, w) in dataset.subjects().iter().zip(&weights.weights) {
        if s.arm() != a_y {
            continue;
        }
        let last = s.last_at_risk();
        if w.len() != last {
            return Err(Error::input(format!(
                "weights for subject `{}` cover {} intervals, expected {last}",
                s.id(),
                w.len()
            )));
        }
        for t in 1..=last {
            at_risk[t - 1] += 1;
            let c = s.events_in(t);
            if c > 0 {
                numer[t - 1] = numer[t - 1] + w[t - 1] * T::count(c as usize);
            }
        }
    }
    let delta_b: Vec<T> = numer
        .iter()
        .zip(&at_risk)
        .map(|(&num, &r)| if r > 0 { num / T::count(r) } else { T::zero() })
        .collect();
    let increments: Vec<T> = survival.iter().zip(&delta_b).map(|(&s, &b)| s * b).collect();
    let mut acc = T::zero();
    let cumulative = increments
        .iter()
        .map(|&d| {
            acc = acc + d;
            acc
        })
        .collect();
    Ok(CounterfactualMeanCurve {
        a_y,
        a_d,
        times: dataset.grid().boundaries()[1..].to_vec(),
        increments,
        cumulative,
        survival,
        delta_b,
    })
}
