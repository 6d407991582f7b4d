use crate::data::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::estimators::curve::{CurveKind, StepCurve};
use crate::estimators::nonparametric::{ghosh_lin_increments, km_levels};
use crate::scalar::Scalar;

/// While-alive loss rate and survival-completed cumulative loss at one
/// horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhileAliveLoss<T> {
    /// Ghosh–Lin mean number of events by the horizon.
    pub numerator: T,
    /// Kaplan–Meier restricted mean survival time up to the horizon.
    pub denominator: T,
    /// Events per unit time alive.
    pub walr: T,
    /// `walr * t_tau`.
    pub sccl: T,
}

pub fn while_alive_loss<T: Scalar>(
    dataset: &Dataset<T>,
    arm: Arm,
    tau_index: usize,
) -> Result<WhileAliveLoss<T>> {
    dataset.grid().check_interval(tau_index)?;
    let curve = while_alive_components(dataset, arm)?;
    let (numerator, denominator) = curve[tau_index - 1];
    finish(numerator, denominator, dataset.grid().time(tau_index))
}

fn finish<T: Scalar>(numerator: T, denominator: T, t: T) -> Result<WhileAliveLoss<T>> {
    if !(denominator > T::zero()) {
        return Err(Error::UndefinedEstimand(
            "restricted mean survival time is zero".into(),
        ));
    }
    let walr = numerator / denominator;
    Ok(WhileAliveLoss {
        numerator,
        denominator,
        walr,
        sccl: walr * t,
    })
}

/// `(mean events, restricted mean survival)` through each interval.
fn while_alive_components<T: Scalar>(dataset: &Dataset<T>, arm: Arm) -> Result<Vec<(T, T)>> {
    if dataset.arm_count(arm) == 0 {
        return Err(Error::input(format!("arm {arm} has no subjects")));
    }
    let table = dataset.risk_table(arm);
    let surv = km_levels::<T>(&table);
    let gl = ghosh_lin_increments::<T>(&table);
    let grid = dataset.grid();
    let mut num = T::zero();
    let mut den = T::zero();
    let mut prev_s = T::one();
    Ok((1..=grid.k())
        .map(|k| {
            num = num + gl[k - 1];
            den = den + prev_s * grid.width(k);
            prev_s = surv[k - 1];
            (num, den)
        })
        .collect())
}

/// Survival-completed cumulative loss `L(t_k) = ℓ(t_k) t_k` at every grid
/// point.
pub fn while_alive_curve<T: Scalar>(dataset: &Dataset<T>, arm: Arm) -> Result<StepCurve<T>> {
    let comps = while_alive_components(dataset, arm)?;
    let grid = dataset.grid();
    let values = comps
        .iter()
        .enumerate()
        .map(|(j, &(num, den))| finish(num, den, grid.time(j + 1)).map(|w| w.sccl))
        .collect::<Result<Vec<T>>>()?;
    Ok(StepCurve::new(
        CurveKind::Cumulative,
        grid.boundaries()[1..].to_vec(),
        values,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{SubjectHistory, TimeGrid};

    fn toy() -> Dataset {
        // A: two events, alive through 4. B: one event, dies at the end of
        // interval 2.
        Dataset::new(
            TimeGrid::unit(4).unwrap(),
            vec![
                SubjectHistory::new("A", Arm::Treated, vec![1, 0, 1, 0], None, None).unwrap(),
                SubjectHistory::new("B", Arm::Treated, vec![1, 0, 0, 0], Some(2), None).unwrap(),
                SubjectHistory::new("C", Arm::Control, vec![0, 0, 0, 0], None, None).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn uncensored_toy_matches_plug_in_means() {
        let w = while_alive_loss(&toy(), Arm::Treated, 4).unwrap();
        assert_eq!(w.numerator, 1.5);
        assert_eq!(w.denominator, 3.0);
        assert_eq!(w.walr, 0.5);
        assert_eq!(w.sccl, 2.0);
    }

    #[test]
    fn no_events_gives_zero() {
        let w = while_alive_loss(&toy(), Arm::Control, 3).unwrap();
        assert_eq!((w.walr, w.sccl), (0.0, 0.0));
    }

    #[test]
    fn curve_agrees_with_pointwise() {
        let d = toy();
        let c = while_alive_curve(&d, Arm::Treated).unwrap();
        for k in 1..=4 {
            assert_eq!(c.at(k), while_alive_loss(&d, Arm::Treated, k).unwrap().sccl);
        }
        assert!(while_alive_loss(&d, Arm::Treated, 0).is_err());
    }
}
