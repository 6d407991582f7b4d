//! Nonparametric bootstrap over subjects, resampling with replacement within
//! each arm so arm sizes are preserved.

use rand::Rng;
use rayon::prelude::*;

use crate::data::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamRng};
use crate::scalar::Scalar;

/// Share of failed replicates above which the bootstrap errors out.
pub const MAX_FAILURE_SHARE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDraws {
    /// One vector of statistics per successful replicate, in replicate order.
    pub draws: Vec<Vec<f64>>,
    pub failed: usize,
    pub requested: usize,
}

impl BootstrapDraws {
    /// Sample variance (denominator `B - 1`) of each statistic.
    pub fn variances(&self) -> Vec<f64> {
        let m = self.draws.first().map_or(0, Vec::len);
        let b = self.draws.len() as f64;
        (0..m)
            .map(|j| {
                let mean = self.draws.iter().map(|d| d[j]).sum::<f64>() / b;
                self.draws.iter().map(|d| (d[j] - mean).powi(2)).sum::<f64>() / (b - 1.0)
            })
            .collect()
    }
}

pub fn resample_within_arms<T: Scalar>(dataset: &Dataset<T>, rng: &mut StreamRng) -> Result<Dataset<T>> {
    let mut picks = Vec::with_capacity(dataset.n());
    for arm in Arm::BOTH {
        let members: Vec<usize> = dataset
            .subjects()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.arm() == arm)
            .map(|(i, _)| i)
            .collect();
        for _ in 0..members.len() {
            picks.push(members[rng.random_range(0..members.len())]);
        }
    }
    dataset.resampled(&picks)
}

/// Evaluate `stat` on `replicates` resamples. Replicate `b` draws from stream
/// `b` of `seed`, so the output does not depend on the worker count.
pub fn bootstrap<T, F>(dataset: &Dataset<T>, replicates: usize, seed: u64, stat: F) -> Result<BootstrapDraws>
where
    T: Scalar,
    F: Fn(&Dataset<T>) -> Result<Vec<f64>> + Sync,
{
    if replicates < 2 {
        return Err(Error::input("the bootstrap needs at least 2 replicates"));
    }
    let outcomes: Vec<Result<Vec<f64>>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let sample = resample_within_arms(dataset, &mut rng)?;
            let values = stat(&sample)?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::UndefinedEstimand("non-finite bootstrap statistic".into()));
            }
            Ok(values)
        })
        .collect();
    let mut draws = Vec::with_capacity(replicates);
    let mut failed = 0;
    for o in outcomes {
        match o {
            Ok(v) => draws.push(v),
            Err(e) => {
                log::debug!("bootstrap replicate failed: {e}");
                failed += 1;
            }
        }
    }
    if failed as f64 > MAX_FAILURE_SHARE * replicates as f64 || draws.len() < 2 {
        return Err(Error::BootstrapFailures {
            failed,
            total: replicates,
        });
    }
    Ok(BootstrapDraws {
        draws,
        failed,
        requested: replicates,
    })
}
