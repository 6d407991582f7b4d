//! Invariants over random small datasets.

mod common;

use common::{balanced_dataset, dataset, weighted};
use proptest::prelude::*;
use recursep::data::{discretize, to_raw_record, Arm, Dataset, TiePolicy};
use recursep::estimators::{
    ghosh_lin_mean, influence_summaries, kaplan_meier, nelson_aalen_events, while_alive_loss, ArmHazards,
    HazardSpec, Link,
};
use recursep::separable::{
    compute_weights, counterfactual_mean_curve, fit_pr_msm, plugin_variance, score_statistic, SeparableAnalysis,
    Truncation,
};

fn identity_spec() -> HazardSpec {
    HazardSpec { link: Link::Identity, bins: 2, slope: true }
}

fn replicate(d: &Dataset, m: usize) -> Dataset {
    let picks: Vec<usize> = (0..m).flat_map(|_| 0..d.n()).collect();
    d.resampled(&picks).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn kaplan_meier_is_a_survival_curve(d in dataset()) {
        for arm in Arm::BOTH {
            let s = kaplan_meier(&d, arm).unwrap().values;
            let mut prev = 1.0;
            for v in s {
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn ghosh_lin_is_bounded_by_nelson_aalen(d in dataset()) {
        for arm in Arm::BOTH {
            let gl = ghosh_lin_mean(&d, arm).unwrap().values;
            let na = nelson_aalen_events(&d, arm).unwrap().values;
            let table = d.risk_table(arm);
            let mut deaths = 0;
            for k in 0..d.k() {
                deaths += table.deaths[k];
                prop_assert!(gl[k] <= na[k] + 1e-12);
                if deaths == 0 {
                    prop_assert_eq!(gl[k], na[k]);
                }
            }
        }
    }

    #[test]
    fn ghosh_lin_equals_the_unshifted_counterfactual_curve(d in dataset()) {
        let hazards = ArmHazards::fit(&d, identity_spec()).unwrap();
        for arm in Arm::BOTH {
            let w = compute_weights(&d, &hazards, arm, arm, Truncation::default()).unwrap();
            prop_assert!(w.weights.iter().flatten().all(|&x| x == 1.0));
            let c = counterfactual_mean_curve(&d, arm, arm, &w).unwrap();
            let gl = ghosh_lin_mean(&d, arm).unwrap().increments().values;
            for (a, b) in c.increments.iter().zip(&gl) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn weights_respect_truncation(d in dataset(), lo in 0.2f64..1.0, hi in 1.0f64..3.0) {
        let hazards = ArmHazards::fit(&d, identity_spec()).unwrap();
        let t = Truncation::new(lo, hi).unwrap();
        for (a_y, a_d) in [(Arm::Treated, Arm::Control), (Arm::Control, Arm::Treated)] {
            let w = compute_weights(&d, &hazards, a_y, a_d, t).unwrap();
            prop_assert!(w.weights.iter().flatten().all(|&x| x >= lo && x <= hi));
            prop_assert!((0.0..=1.0).contains(&w.truncated_fraction));
        }
    }

    #[test]
    fn while_alive_is_invariant_to_replication_and_relabeling(d in dataset()) {
        let doubled = replicate(&d, 2);
        let relabeled = d.resampled(&(0..d.n()).rev().collect::<Vec<_>>()).unwrap();
        for arm in Arm::BOTH {
            for h in 1..=d.k() {
                let base = while_alive_loss(&d, arm, h).unwrap();
                for other in [&doubled, &relabeled] {
                    let w = while_alive_loss(other, arm, h).unwrap();
                    prop_assert!((w.walr - base.walr).abs() <= 1e-12 * (1.0 + base.walr.abs()));
                }
            }
        }
    }

    #[test]
    fn swapping_arms_and_death_level_negates_the_score(d in balanced_dataset()) {
        let swapped = d.with_arms_swapped();
        for a_d in Arm::BOTH {
            let a = SeparableAnalysis::fit(&d, a_d, identity_spec(), Truncation::default()).unwrap();
            let b = SeparableAnalysis::fit(&swapped, a_d.other(), identity_spec(), Truncation::default()).unwrap();
            for h in 1..=d.k() {
                let (u, v) = (a.score(&d, h).unwrap(), b.score(&swapped, h).unwrap());
                prop_assert!((u + v).abs() <= 1e-9 * (1.0 + u.abs()), "{} vs {}", u, v);
                if let (Ok(x), Ok(y)) = (a.beta(&d, h), b.beta(&swapped, h)) {
                    if !x.boundary && !y.boundary {
                        prop_assert!((x.beta + y.beta).abs() <= 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn swapping_curves_negates_score_and_beta(d in dataset()) {
        let a = SeparableAnalysis::fit(&d, Arm::Control, identity_spec(), Truncation::default()).unwrap();
        let h = d.k();
        let u = score_statistic(&a.curve1, &a.curve0, &d, h).unwrap();
        prop_assert_eq!(score_statistic(&a.curve0, &a.curve1, &d, h).unwrap(), -u);
        if let (Ok(x), Ok(y)) = (fit_pr_msm(&a.curve1, &a.curve0, &d, h), fit_pr_msm(&a.curve0, &a.curve1, &d, h)) {
            if !x.boundary && !y.boundary {
                prop_assert!((x.beta + y.beta).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn replicating_subjects_scales_score_and_variance(d in dataset(), m in 2usize..4) {
        let big = replicate(&d, m);
        let a = SeparableAnalysis::fit(&d, Arm::Control, identity_spec(), Truncation::default()).unwrap();
        let b = SeparableAnalysis::fit(&big, Arm::Control, identity_spec(), Truncation::default()).unwrap();
        let h = d.k();
        let (u, um) = (a.score(&d, h).unwrap(), b.score(&big, h).unwrap());
        prop_assert!((um - m as f64 * u).abs() <= 1e-9 * (1.0 + um.abs()));
        let v = plugin_variance(&d, &a.curve1, &a.curve0, &a.weights1, &a.weights0, h).unwrap();
        let vm = plugin_variance(&big, &b.curve1, &b.curve0, &b.weights1, &b.weights0, h).unwrap();
        prop_assert!((vm - m as f64 * v).abs() <= 1e-9 * (1.0 + vm.abs()));
    }

    #[test]
    fn single_and_double_precision_agree(d in dataset()) {
        let single: Dataset<f32> = d.cast();
        let spec = HazardSpec { link: Link::Identity, bins: 1, slope: false };
        let a = SeparableAnalysis::fit(&d, Arm::Control, spec, Truncation::default()).unwrap();
        let b = SeparableAnalysis::fit(&single, Arm::Control, spec, Truncation::default()).unwrap();
        let (u, v) = (a.score(&d, d.k()).unwrap(), b.score(&single, d.k()).unwrap() as f64);
        prop_assert!((u - v).abs() <= 1e-4 * (1.0 + u.abs()), "{} vs {}", u, v);
    }

    #[test]
    fn influence_functions_match_finite_differences(d in dataset()) {
        let eps = 1e-6;
        for arm in Arm::BOTH {
            let s = &influence_summaries(&d, arm, &[d.k()]).unwrap()[0];
            let members: Vec<usize> =
                d.subjects().iter().enumerate().filter(|(_, x)| x.arm() == arm).map(|(i, _)| i).collect();
            for (pos, &i) in members.iter().enumerate() {
                let mut up = vec![1.0; d.n()];
                let mut down = vec![1.0; d.n()];
                up[i] += eps;
                down[i] -= eps;
                let (hi, lo) = (weighted(&d, arm, &up), weighted(&d, arm, &down));
                let dm = (hi.gl[d.k() - 1] - lo.gl[d.k() - 1]) / (2.0 * eps);
                let dr = (hi.rmst[d.k() - 1] - lo.rmst[d.k() - 1]) / (2.0 * eps);
                prop_assert!((s.mean_influence[pos] - dm).abs() < 1e-5, "{} vs {}", s.mean_influence[pos], dm);
                prop_assert!((s.rmst_influence[pos] - dr).abs() < 1e-5, "{} vs {}", s.rmst_influence[pos], dr);
            }
        }
    }

    #[test]
    fn raw_records_round_trip_through_discretize(d in dataset()) {
        let raw: Vec<_> = d.subjects().iter().map(|s| to_raw_record(s, d.grid())).collect();
        let back = discretize(&raw, d.grid(), TiePolicy::Reject).unwrap();
        prop_assert_eq!(back.subjects(), d.subjects());
    }
}
