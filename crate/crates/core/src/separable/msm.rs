use crate::data::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::separable::CounterfactualMeanCurve;

/// `Q(t) = Σ_i Z_i(t) A_i`, the treated at-risk count per interval.
pub fn treated_at_risk<T: Scalar>(dataset: &Dataset<T>) -> Vec<T> {
    dataset
        .risk_table(Arm::Treated)
        .at_risk
        .into_iter()
        .map(T::count)
        .collect()
}

fn check_pair<T: Scalar>(
    curve1: &CounterfactualMeanCurve<T>,
    curve0: &CounterfactualMeanCurve<T>,
    dataset: &Dataset<T>,
    horizon: usize,
) -> Result<()> {
    if curve1.a_d != curve0.a_d {
        return Err(Error::input("curves hold the death component at different levels"));
    }
    if curve1.k() != dataset.k() || curve0.k() != dataset.k() {
        return Err(Error::input("curves and dataset live on different grids"));
    }
    dataset.grid().check_interval(horizon)
}

/// Score `U_n = Σ_{t<=τ} Q(t) (Δμ̂_t^{1,a_D} - Δμ̂_t^{0,a_D})`.
pub fn score_statistic<T: Scalar>(
    curve1: &CounterfactualMeanCurve<T>,
    curve0: &CounterfactualMeanCurve<T>,
    dataset: &Dataset<T>,
    horizon: usize,
) -> Result<T> {
    check_pair(curve1, curve0, dataset, horizon)?;
    let q = treated_at_risk(dataset);
    Ok((0..horizon)
        .map(|j| q[j] * (curve1.increments[j] - curve0.increments[j]))
        .sum())
}

/// Left-hand side of the proportional-rate estimating equation at `beta`.
pub fn estimating_equation<T: Scalar>(
    beta: T,
    curve1: &CounterfactualMeanCurve<T>,
    curve0: &CounterfactualMeanCurve<T>,
    dataset: &Dataset<T>,
    horizon: usize,
) -> Result<T> {
    check_pair(curve1, curve0, dataset, horizon)?;
    let q = treated_at_risk(dataset);
    let factor = beta.exp();
    Ok((0..horizon)
        .map(|j| q[j] * (curve1.increments[j] - factor * curve0.increments[j]))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrMsmFit<T> {
    /// `log(numerator / denominator)`; `-inf` when the numerator is zero.
    pub beta: T,
    pub numerator: T,
    pub denominator: T,
    /// True when the numerator vanished and `beta` sits on the boundary.
    pub boundary: bool,
}

/// Closed-form root of the estimating equation:
/// `exp(β̂) = Σ Q Δμ̂^{1,a_D} / Σ Q Δμ̂^{0,a_D}` over `t <= τ`.
pub fn fit_pr_msm<T: Scalar>(
    curve1: &CounterfactualMeanCurve<T>,
    curve0: &CounterfactualMeanCurve<T>,
    dataset: &Dataset<T>,
    horizon: usize,
) -> Result<PrMsmFit<T>> {
    check_pair(curve1, curve0, dataset, horizon)?;
    let q = treated_at_risk(dataset);
    let numerator: T = (0..horizon).map(|j| q[j] * curve1.increments[j]).sum();
    let denominator: T = (0..horizon).map(|j| q[j] * curve0.increments[j]).sum();
    if !(denominator > T::zero()) {
        return Err(Error::NoEventsInControl);
    }
    let boundary = !(numerator > T::zero());
    let beta = if boundary {
        T::neg_infinity()
    } else {
        (numerator / denominator).ln()
    };
    Ok(PrMsmFit {
        beta,
        numerator,
        denominator,
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{SubjectHistory, TimeGrid};

    fn curve(a_y: Arm, inc: Vec<f64>) -> CounterfactualMeanCurve {
        let k = inc.len();
        CounterfactualMeanCurve {
            a_y,
            a_d: Arm::Control,
            times: (1..=k).map(|t| t as f64).collect(),
            cumulative: inc.iter().scan(0.0, |a, x| { *a += x; Some(*a) }).collect(),
            increments: inc,
            survival: vec![1.0; k],
            delta_b: vec![0.0; k],
        }
    }

    fn five_treated(k: usize) -> Dataset {
        let mut s: Vec<_> = (0..5)
            .map(|i| SubjectHistory::new(format!("t{i}"), Arm::Treated, vec![0; k], None, None).unwrap())
            .collect();
        s.push(SubjectHistory::new("c", Arm::Control, vec![0; k], None, None).unwrap());
        Dataset::new(TimeGrid::unit(k).unwrap(), s).unwrap()
    }

    #[test]
    fn single_interval_score() {
        let d = five_treated(1);
        let u = score_statistic(&curve(Arm::Treated, vec![0.3]), &curve(Arm::Control, vec![0.1]), &d, 1).unwrap();
        assert!((u - 1.0).abs() < 1e-15);
    }

    #[test]
    fn swapping_curves_negates() {
        let d = five_treated(3);
        let c1 = curve(Arm::Treated, vec![0.3, 0.0, 0.2]);
        let c0 = curve(Arm::Control, vec![0.1, 0.4, 0.1]);
        let u = score_statistic(&c1, &c0, &d, 3).unwrap();
        assert_eq!(score_statistic(&c0, &c1, &d, 3).unwrap(), -u);
        let b = fit_pr_msm(&c1, &c0, &d, 3).unwrap().beta;
        assert!((fit_pr_msm(&c0, &c1, &d, 3).unwrap().beta + b).abs() < 1e-15);
    }

    #[test]
    fn constant_factor_pulls_out() {
        let d = five_treated(3);
        let c0 = curve(Arm::Control, vec![0.1, 0.4, 0.1]);
        let c1 = curve(Arm::Treated, vec![0.2, 0.8, 0.2]);
        let fit = fit_pr_msm(&c1, &c0, &d, 3).unwrap();
        assert!((fit.beta - 2f64.ln()).abs() < 1e-15);
        assert_eq!(fit_pr_msm(&c0, &c0, &d, 3).unwrap().beta, 0.0);
        assert!(estimating_equation(fit.beta, &c1, &c0, &d, 3).unwrap().abs() < 1e-12);
    }

    #[test]
    fn boundaries_are_flagged() {
        let d = five_treated(2);
        let zero = curve(Arm::Treated, vec![0.0, 0.0]);
        let some = curve(Arm::Control, vec![0.1, 0.0]);
        let fit = fit_pr_msm(&zero, &some, &d, 2).unwrap();
        assert!(fit.boundary && fit.beta == f64::NEG_INFINITY);
        assert!(matches!(fit_pr_msm(&some, &zero, &d, 2), Err(Error::NoEventsInControl)));
    }
}
