use crate::data::{Arm, Dataset, RiskTable};
use crate::error::{Error, Result};
use crate::estimators::curve::{cumsum, CurveKind, StepCurve};
use crate::scalar::Scalar;

fn check_arm<T: Scalar>(dataset: &Dataset<T>, arm: Arm) -> Result<()> {
    if dataset.arm_count(arm) == 0 {
        Err(Error::input(format!("arm {arm} has no subjects")))
    } else {
        Ok(())
    }
}

fn right_endpoints<T: Scalar>(dataset: &Dataset<T>) -> Vec<T> {
    dataset.grid().boundaries()[1..].to_vec()
}

/// `Ŝ(t_k)` for `k = 1..=K` from a risk table.
pub(crate) fn km_levels<T: Scalar>(table: &RiskTable) -> Vec<T> {
    let mut s = T::one();
    table
        .at_risk
        .iter()
        .zip(&table.deaths)
        .map(|(&r, &d)| {
            if r > 0 {
                s = s * (T::one() - T::count(d) / T::count(r));
            }
            s
        })
        .collect()
}

/// Events over at-risk count per interval; zero where nobody is at risk.
pub(crate) fn event_rates<T: Scalar>(table: &RiskTable) -> Vec<T> {
    table
        .at_risk
        .iter()
        .zip(&table.events)
        .map(|(&r, &e)| {
            if r > 0 {
                T::of(e as f64) / T::count(r)
            } else {
                T::zero()
            }
        })
        .collect()
}

/// Ghosh–Lin increments `Ŝ(t_k) · e_k / r_k`.
pub(crate) fn ghosh_lin_increments<T: Scalar>(table: &RiskTable) -> Vec<T> {
    km_levels::<T>(table)
        .into_iter()
        .zip(event_rates::<T>(table))
        .map(|(s, rate)| s * rate)
        .collect()
}

/// Cumulative recurrent-event rate with death treated as censoring.
pub fn nelson_aalen_events<T: Scalar>(dataset: &Dataset<T>, arm: Arm) -> Result<StepCurve<T>> {
    check_arm(dataset, arm)?;
    let rates = event_rates::<T>(&dataset.risk_table(arm));
    Ok(StepCurve::new(
        CurveKind::Cumulative,
        right_endpoints(dataset),
        cumsum(&rates),
    ))
}

/// Discrete Kaplan–Meier survival `Ŝ(t_k) = Π_{j<=k} (1 - d_j / r_j)`.
pub fn kaplan_meier<T: Scalar>(dataset: &Dataset<T>, arm: Arm) -> Result<StepCurve<T>> {
    check_arm(dataset, arm)?;
    Ok(StepCurve::new(
        CurveKind::Cumulative,
        right_endpoints(dataset),
        km_levels(&dataset.risk_table(arm)),
    ))
}

/// Ghosh–Lin marginal mean number of recurrent events, acknowledging that no
/// event follows death.
pub fn ghosh_lin_mean<T: Scalar>(dataset: &Dataset<T>, arm: Arm) -> Result<StepCurve<T>> {
    check_arm(dataset, arm)?;
    let inc = ghosh_lin_increments::<T>(&dataset.risk_table(arm));
    Ok(StepCurve::new(
        CurveKind::Cumulative,
        right_endpoints(dataset),
        cumsum(&inc),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{SubjectHistory, TimeGrid};

    fn ds(k: usize, subjects: Vec<SubjectHistory>) -> Dataset {
        Dataset::new(TimeGrid::unit(k).unwrap(), subjects).unwrap()
    }

    fn s(id: &str, arm: Arm, c: Vec<u32>, d: Option<usize>, cz: Option<usize>) -> SubjectHistory {
        SubjectHistory::new(id, arm, c, d, cz).unwrap()
    }

    #[test]
    fn nelson_aalen_direct_count() {
        let d = ds(
            2,
            vec![
                s("a", Arm::Treated, vec![1, 0], None, None),
                s("b", Arm::Treated, vec![1, 2], None, None),
                s("c", Arm::Control, vec![0, 0], None, None),
            ],
        );
        let na = nelson_aalen_events(&d, Arm::Treated).unwrap();
        assert_eq!(na.increments().values, vec![1.0, 1.0]);
        assert_eq!(na.values, vec![1.0, 2.0]);
        assert_eq!(nelson_aalen_events(&d, Arm::Control).unwrap().values, vec![0.0, 0.0]);
    }

    #[test]
    fn nelson_aalen_stops_after_last_death() {
        let d = ds(
            3,
            vec![
                s("a", Arm::Treated, vec![1, 0, 0], Some(2), None),
                s("c", Arm::Control, vec![0, 0, 0], None, None),
            ],
        );
        let na = nelson_aalen_events(&d, Arm::Treated).unwrap().increments();
        assert_eq!(na.values, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn km_matches_empirical_fraction() {
        let d = ds(
            4,
            vec![
                s("a", Arm::Treated, vec![0; 4], Some(2), None),
                s("b", Arm::Treated, vec![0; 4], Some(3), None),
                s("c", Arm::Treated, vec![0; 4], None, None),
                s("e", Arm::Treated, vec![0; 4], None, None),
                s("z", Arm::Control, vec![0; 4], Some(1), None),
            ],
        );
        let km = kaplan_meier(&d, Arm::Treated).unwrap();
        assert_eq!(km.values, vec![1.0, 0.75, 0.5, 0.5]);
        let km0 = kaplan_meier(&d, Arm::Control).unwrap();
        assert_eq!(km0.values, vec![0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn ghosh_lin_hand_example() {
        let d = ds(
            2,
            vec![
                s("a", Arm::Treated, vec![1, 0], None, None),
                s("b", Arm::Treated, vec![0, 0], Some(1), None),
                s("c", Arm::Control, vec![0, 0], None, None),
            ],
        );
        let gl = ghosh_lin_mean(&d, Arm::Treated).unwrap().increments();
        assert_eq!(gl.values[0], 0.25);
    }

    #[test]
    fn ghosh_lin_equals_nelson_aalen_without_deaths() {
        let d = ds(
            3,
            vec![
                s("a", Arm::Treated, vec![1, 0, 3], None, None),
                s("b", Arm::Treated, vec![0, 2, 0], None, Some(3)),
                s("c", Arm::Control, vec![0, 0, 0], None, None),
            ],
        );
        assert_eq!(
            ghosh_lin_mean(&d, Arm::Treated).unwrap(),
            nelson_aalen_events(&d, Arm::Treated).unwrap()
        );
    }
}
