#![allow(dead_code)]

use proptest::prelude::*;
use recursep::data::{Arm, Dataset, SubjectHistory, TimeGrid};

/// One subject: arm, per-interval counts, and how follow-up ends.
#[derive(Debug, Clone)]
pub struct Spec {
    pub treated: bool,
    pub counts: Vec<u32>,
    /// 0 = followed to K, 1 = dies in `last`, 2 = censored after `last`.
    pub exit: u8,
    pub last: usize,
}

pub fn build(k: usize, specs: &[Spec]) -> Dataset {
    let subjects = specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let arm = if s.treated { Arm::Treated } else { Arm::Control };
            let mut counts = s.counts.clone();
            let (death, censor, active) = match s.exit {
                1 => (Some(s.last), None, s.last - 1),
                2 if s.last < k => (None, Some(s.last + 1), s.last),
                _ => (None, None, k),
            };
            for c in counts.iter_mut().skip(active) {
                *c = 0;
            }
            SubjectHistory::new(format!("id{i}"), arm, counts, death, censor).unwrap()
        })
        .collect();
    Dataset::new(TimeGrid::unit(k).unwrap(), subjects).unwrap()
}

fn spec(k: usize) -> impl Strategy<Value = Spec> {
    (any::<bool>(), prop::collection::vec(0u32..3, k), 0u8..3, 1..=k).prop_map(|(treated, counts, exit, last)| Spec {
        treated,
        counts,
        exit,
        last,
    })
}

/// Small random datasets with both arms present.
pub fn dataset() -> impl Strategy<Value = Dataset> {
    (2usize..7).prop_flat_map(|k| {
        prop::collection::vec(spec(k), 2..14).prop_map(move |mut specs| {
            specs[0].treated = false;
            specs[1].treated = true;
            build(k, &specs)
        })
    })
}

/// Datasets in which every treated subject has a control twin with the
/// same follow-up, so both arms have identical at-risk counts.
pub fn balanced_dataset() -> impl Strategy<Value = Dataset> {
    (2usize..7).prop_flat_map(|k| {
        prop::collection::vec((spec(k), prop::collection::vec(0u32..3, k)), 1..8).prop_map(move |pairs| {
            let mut specs = Vec::new();
            for (s, other) in pairs {
                specs.push(Spec { treated: true, ..s.clone() });
                specs.push(Spec {
                    treated: false,
                    counts: other,
                    ..s
                });
            }
            build(k, &specs)
        })
    })
}

/// Every subject alive through K: arms and events only.
pub fn uncensored(k: usize, specs: &[(bool, Vec<u32>, Option<usize>)]) -> Dataset {
    let subjects = specs
        .iter()
        .enumerate()
        .map(|(i, (t, c, d))| {
            let arm = if *t { Arm::Treated } else { Arm::Control };
            SubjectHistory::new(format!("u{i}"), arm, c.clone(), *d, None).unwrap()
        })
        .collect();
    Dataset::new(TimeGrid::unit(k).unwrap(), subjects).unwrap()
}

/// Brute-force weighted estimators of one arm computed from subject
/// histories and frequency weights.
pub struct Weighted {
    pub survival: Vec<f64>,
    pub gl: Vec<f64>,
    pub rmst: Vec<f64>,
}

pub fn weighted(data: &Dataset, arm: Arm, w: &[f64]) -> Weighted {
    let k = data.k();
    let mut survival = Vec::new();
    let mut gl = Vec::new();
    let mut rmst = Vec::new();
    let (mut s, mut g, mut r) = (1.0, 0.0, 0.0);
    for j in 1..=k {
        let (mut at_risk, mut deaths, mut events) = (0.0, 0.0, 0.0);
        for (i, subj) in data.subjects().iter().enumerate() {
            if subj.arm() != arm || !subj.at_risk(j) {
                continue;
            }
            at_risk += w[i];
            if subj.died_in(j) {
                deaths += w[i];
            }
            events += w[i] * subj.events_in(j) as f64;
        }
        r += s * data.grid().width(j);
        if at_risk > 0.0 {
            s *= 1.0 - deaths / at_risk;
            g += s * events / at_risk;
        }
        survival.push(s);
        gl.push(g);
        rmst.push(r);
    }
    Weighted { survival, gl, rmst }
}
