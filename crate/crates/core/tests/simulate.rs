//! Simulation designs against closed-form expectations, and the campaign
//! engine's determinism and bookkeeping.

use recursep::data::Arm;
use recursep::inference::{Direction, Method};
use recursep::rng::stream_rng;
use recursep::simulate::{
    generate_continuous, generate_discrete, run_campaign, BaselinePattern, CampaignConfig, ContinuousDgpConfig,
    DiscreteDgpConfig, Scenario, ScenarioDesign,
};

fn discrete(baseline: BaselinePattern) -> DiscreteDgpConfig {
    DiscreteDgpConfig::reference(baseline)
}

fn mean_and_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn no_death_coefficients_means_no_deaths() {
    let c = DiscreteDgpConfig {
        k: 200,
        n: 300,
        beta_d_0: 0.0,
        beta_d_a: 0.0,
        beta_y_d: 0.0,
        ..discrete(BaselinePattern::constant())
    };
    let d = generate_discrete(&c).unwrap();
    assert!(d.subjects().iter().all(|s| s.death_interval().is_none() && s.last_at_risk() == 200));
}

#[test]
fn no_recurrence_coefficients_means_no_events() {
    let c = DiscreteDgpConfig {
        k: 200,
        n: 300,
        baseline: BaselinePattern::Constant { level: 0.0 },
        ..discrete(BaselinePattern::constant())
    };
    assert_eq!(generate_discrete(&c).unwrap().total_events(), 0);
}

#[test]
fn constant_pattern_without_deaths_has_two_events_on_average() {
    let c = DiscreteDgpConfig {
        beta_d_0: 0.0,
        beta_d_a: 0.0,
        beta_y_d: 0.0,
        seed: 17,
        ..discrete(BaselinePattern::constant())
    };
    let d = generate_discrete(&c).unwrap();
    let counts: Vec<f64> = d.subjects().iter().map(|s| s.total_events() as f64).collect();
    let (m, se) = mean_and_se(&counts);
    // Sum of K Bernoulli(2/K) draws.
    assert!((m - 2.0).abs() < 3.0 * se, "mean {m} se {se}");
}

#[test]
fn survivors_have_events_at_the_baseline_rate() {
    let c = DiscreteDgpConfig {
        beta_d_a: 0.0,
        seed: 21,
        ..discrete(BaselinePattern::constant())
    };
    let d = generate_discrete(&c).unwrap();
    // With no treatment effects the arms are identical; pool them.
    let tables = [d.risk_table(Arm::Control), d.risk_table(Arm::Treated)];
    for block in 0..10 {
        let range = block * 100..(block + 1) * 100;
        let exposure: usize = range
            .clone()
            .flat_map(|j| tables.iter().map(move |t| t.at_risk[j] - t.deaths[j]))
            .sum();
        let events: u64 = range.flat_map(|j| tables.iter().map(move |t| t.events[j])).sum();
        let p = 2.0 / 1000.0;
        let se = (p * (1.0 - p) / exposure as f64).sqrt();
        let rate = events as f64 / exposure as f64;
        assert!((rate - p).abs() < 3.0 * se, "block {block}: rate {rate}, se {se}");
    }
}

#[test]
fn continuous_event_counts_match_the_rate_integral() {
    let c = ContinuousDgpConfig {
        control_hazard: 0.0,
        n: 4000,
        seed: 3,
        ..ContinuousDgpConfig::reference(1.0, 1.0)
    };
    let e = 0.5f64.exp();
    let expected = 1.2 * (2.0 + 2.0 * e + 2.0 * e * e + 2.0 * e * e * e) + 0.2 * 2.0 * e.powi(4);
    let recs = generate_continuous(&c).unwrap();
    assert!(recs.iter().all(|r| matches!(r.exit, recursep::data::Exit::Censor(t) if t == 5.0)));
    let counts: Vec<f64> = recs.iter().map(|r| r.events.len() as f64).collect();
    let (m, se) = mean_and_se(&counts);
    assert!((m - expected).abs() < 3.0 * se, "mean {m} vs {expected} (se {se})");

    // Doubling n shrinks the standard error by about 1/sqrt(2).
    let big = generate_continuous(&ContinuousDgpConfig { n: 8000, seed: 4, ..c }).unwrap();
    let (_, se2) = mean_and_se(&big.iter().map(|r| r.events.len() as f64).collect::<Vec<_>>());
    let ratio = se2 / se;
    assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn zero_rate_ratio_gives_no_treated_events() {
    for hr in [0.2, 1.0] {
        let recs = generate_continuous(&ContinuousDgpConfig { n: 300, ..ContinuousDgpConfig::reference(0.0, hr) }).unwrap();
        assert!(recs.iter().filter(|r| r.arm == Arm::Treated).all(|r| r.events.is_empty()));
    }
}

#[test]
fn generators_are_deterministic() {
    let c = DiscreteDgpConfig { k: 100, n: 100, seed: 5, ..discrete(BaselinePattern::increasing()) };
    assert_eq!(generate_discrete(&c).unwrap().subjects(), generate_discrete(&c).unwrap().subjects());
    let cc = ContinuousDgpConfig { n: 100, seed: 5, ..ContinuousDgpConfig::reference(0.75, 0.5) };
    assert_eq!(generate_continuous(&cc).unwrap(), generate_continuous(&cc).unwrap());
    // Streams are independent of one another.
    use rand::Rng;
    let a: u64 = stream_rng(1, 0).random();
    let b: u64 = stream_rng(1, 1).random();
    assert_ne!(a, b);
}

fn small_campaign() -> CampaignConfig {
    let mut pr = recursep::separable::PrMsmatOptions::default();
    pr.hazard.link = recursep::estimators::Link::Identity;
    CampaignConfig {
        scenarios: vec![
            Scenario {
                name: "mirror".into(),
                design: ScenarioDesign::Discrete {
                    config: DiscreteDgpConfig {
                        k: 50,
                        n: 300,
                        baseline: BaselinePattern::Constant { level: 5.0 },
                        beta_y_a: 0.0,
                        beta_d_0: 5.0,
                        beta_d_a: 0.0,
                        beta_y_d: 0.0,
                        seed: 0,
                    },
                },
                horizons: vec![25.0, 50.0],
                curves: false,
            },
            Scenario {
                name: "figure".into(),
                design: ScenarioDesign::Continuous {
                    config: ContinuousDgpConfig { n: 100, ..ContinuousDgpConfig::reference(0.75, 0.2) },
                    grid_k: 60,
                },
                horizons: vec![5.0],
                curves: true,
            },
        ],
        methods: vec![Method::PrMsmat, Method::WhileAlive, Method::GhoshLin],
        directions: Direction::ALL.to_vec(),
        replications: 200,
        seed: 99,
        level: 0.05,
        pr_msmat: pr,
        wa_variance: Default::default(),
        max_failure_rate: 0.01,
    }
}

#[test]
fn campaign_tallies_are_consistent_and_exchangeable_arms_reject_nominally() {
    let r = run_campaign(&small_campaign(), Some(2)).unwrap();
    let mirror = r.scenario("mirror").unwrap();
    assert_eq!(mirror.replications.len() + mirror.failures.len(), 200);
    for rate in &mirror.rejection_rates {
        assert!((0.0..=1.0).contains(&rate.rate));
        assert_eq!(rate.replications, mirror.replications.len());
        if rate.direction == Direction::TwoSided {
            // Fully exchangeable arms: every method rejects about 5% of the time.
            assert!(rate.rate < 0.05 + 3.5 * 0.0154, "{} {}: {}", rate.method, rate.tau, rate.rate);
        }
    }
    let curves = r.scenario("figure").unwrap().curves.as_ref().unwrap();
    assert_eq!(curves.times.len(), 60);
    assert!(curves.gap_se.iter().all(|s| *s >= 0.0));
}

#[test]
fn campaign_results_do_not_depend_on_thread_count() {
    let mut cfg = small_campaign();
    cfg.replications = 24;
    let one = run_campaign(&cfg, Some(1)).unwrap();
    let three = run_campaign(&cfg, Some(3)).unwrap();
    assert_eq!(one, three);
}

#[test]
fn too_many_failures_abort_the_campaign() {
    let mut cfg = small_campaign();
    cfg.replications = 10;
    // Horizon beyond the grid: every replication fails.
    cfg.scenarios[0].horizons = vec![500.0];
    match run_campaign(&cfg, Some(1)) {
        Err(recursep::Error::CampaignFailures { failed, total, .. }) => assert_eq!((failed, total), (10, 10)),
        other => panic!("unexpected {other:?}"),
    }
}
