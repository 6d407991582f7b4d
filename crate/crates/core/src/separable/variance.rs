use crate::data::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::separable::{treated_at_risk, CounterfactualMeanCurve, WeightProcess};

/// Per-interval contributions `Σ_i ψ̂_{i,t}² ΔN_{i,t}` to the plug-in
/// variance of the score, with `ψ̂_{i,t} = ±Q(t) Ŝ_t^{A_i} W_{i,t} / D_{A_i}(t)`.
/// Uncertainty from the survival and hazard fits is ignored.
pub(crate) fn plugin_variance_increments<T: Scalar>(
    dataset: &Dataset<T>,
    curve1: &CounterfactualMeanCurve<T>,
    curve0: &CounterfactualMeanCurve<T>,
    weights1: &WeightProcess<T>,
    weights0: &WeightProcess<T>,
) -> Result<Vec<T>> {
    let k = dataset.k();
    if curve1.a_y != Arm::Treated || curve0.a_y != Arm::Control {
        return Err(Error::input("curve1 must target a_y = 1 and curve0 a_y = 0"));
    }
    if weights1.a_y != Arm::Treated || weights0.a_y != Arm::Control {
        return Err(Error::input("weights1 must target a_y = 1 and weights0 a_y = 0"));
    }
    if curve1.k() != k || curve0.k() != k {
        return Err(Error::input("curves and dataset live on different grids"));
    }
    if weights1.weights.len() != dataset.n() || weights0.weights.len() != dataset.n() {
        return Err(Error::input("weights were computed on a different dataset"));
    }
    let q = treated_at_risk(dataset);
    let at_risk = [
        dataset.risk_table(Arm::Control).at_risk,
        dataset.risk_table(Arm::Treated).at_risk,
    ];
    let mut out = vec![T::zero(); k];
    for (i, s) in dataset.subjects().iter().enumerate() {
        let (curve, w) = match s.arm() {
            Arm::Treated => (curve1, &weights1.weights[i]),
            Arm::Control => (curve0, &weights0.weights[i]),
        };
        let d = &at_risk[s.arm().index()];
        for t in 1..=s.last_at_risk() {
            let c = s.events_in(t);
            if c == 0 {
                continue;
            }
            let psi = q[t - 1] * curve.survival[t - 1] * w[t - 1] / T::count(d[t - 1]);
            out[t - 1] = out[t - 1] + psi * psi * T::count(c as usize);
        }
    }
    Ok(out)
}

/// Plug-in estimate of `Var(U_n)` at horizon index `horizon`.
pub fn plugin_variance<T: Scalar>(
    dataset: &Dataset<T>,
    curve1: &CounterfactualMeanCurve<T>,
    curve0: &CounterfactualMeanCurve<T>,
    weights1: &WeightProcess<T>,
    weights0: &WeightProcess<T>,
    horizon: usize,
) -> Result<T> {
    dataset.grid().check_interval(horizon)?;
    let inc = plugin_variance_increments(dataset, curve1, curve0, weights1, weights0)?;
    Ok(inc[..horizon].iter().copied().sum())
}
