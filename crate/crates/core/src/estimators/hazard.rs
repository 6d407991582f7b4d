use serde::{Deserialize, Serialize};

use crate::data::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Predictions are clamped to `[CLAMP_EPS, 1 - CLAMP_EPS]`.
pub const CLAMP_EPS: f64 = 1e-6;

const NEWTON_TOL: f64 = 1e-8;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    #[default]
    Logit,
    Identity,
}

/// Form of the discrete death-hazard model fitted per arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HazardSpec {
    pub link: Link,
    /// Number of time bins, cut at equal shares of at-risk exposure.
    pub bins: usize,
    /// Fit the slope on lagged cumulative events; when false it is fixed at 0.
    pub slope: bool,
}

impl Default for HazardSpec {
    fn default() -> Self {
        HazardSpec {
            link: Link::Logit,
            bins: 10,
            slope: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Set when separation or an unidentifiable slope forced the bin-level
    /// empirical rates with a zero slope.
    pub fallback: bool,
}

/// Discrete-time death hazard `P(D_q = 1 | alive, Y_{q-1} = y, A = arm)`
/// with a per-bin intercept and a common slope on `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeathHazardModel<T: Scalar = f64> {
    pub arm: Arm,
    pub link: Link,
    /// Bin index of each interval (entry `q - 1` for interval `q`).
    pub bin_of: Vec<usize>,
    pub intercepts: Vec<T>,
    pub slope: T,
    pub diagnostics: FitDiagnostics,
}

impl<T: Scalar> DeathHazardModel<T> {
    pub fn k(&self) -> usize {
        self.bin_of.len()
    }

    pub fn bins(&self) -> usize {
        self.intercepts.len()
    }

    /// Predicted death probability in interval `q` given `Y_{q-1} = y`.
    pub fn predict(&self, q: usize, y: u64) -> T {
        self.predict_bin(self.bin_of[q - 1], y)
    }

    pub(crate) fn predict_bin(&self, bin: usize, y: u64) -> T {
        let eta = self.intercepts[bin].as_f64() + self.slope.as_f64() * y as f64;
        T::of(clamp_prob(self.link.inverse(eta)))
    }
}

/// Death-hazard models for both arms on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmHazards<T: Scalar = f64> {
    pub control: DeathHazardModel<T>,
    pub treated: DeathHazardModel<T>,
}

impl<T: Scalar> ArmHazards<T> {
    pub fn fit(dataset: &Dataset<T>, spec: HazardSpec) -> Result<Self> {
        Ok(ArmHazards {
            control: fit_death_hazard(dataset, Arm::Control, spec)?,
            treated: fit_death_hazard(dataset, Arm::Treated, spec)?,
        })
    }

    pub fn for_arm(&self, arm: Arm) -> &DeathHazardModel<T> {
        match arm {
            Arm::Control => &self.control,
            Arm::Treated => &self.treated,
        }
    }
}

impl Link {
    fn inverse(self, eta: f64) -> f64 {
        match self {
            Link::Logit => 1.0 / (1.0 + (-eta).exp()),
            Link::Identity => eta,
        }
    }
}

fn clamp_prob(p: f64) -> f64 {
    if p.is_nan() {
        return CLAMP_EPS;
    }
    p.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)
}

/// Exposure and deaths per (bin, lagged count) cell.
struct Cells {
    /// `cells[b][y] = (exposure, deaths)`.
    cells: Vec<Vec<(f64, f64)>>,
}

impl Cells {
    fn iter(&self) -> impl Iterator<Item = (usize, u64, f64, f64)> + '_ {
        self.cells.iter().enumerate().flat_map(|(b, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| c.0 > 0.0)
                .map(move |(y, &(n, d))| (b, y as u64, n, d))
        })
    }

    fn bin_totals(&self, b: usize) -> (f64, f64) {
        self.cells[b]
            .iter()
            .fold((0.0, 0.0), |acc, c| (acc.0 + c.0, acc.1 + c.1))
    }
}

/// Interval-to-bin map cutting `[1, K]` into `min(bins, K)` contiguous bins of
/// roughly equal exposure. With `bins >= K` every interval is its own bin.
fn exposure_bins(exposure: &[usize], bins: usize) -> Vec<usize> {
    let k = exposure.len();
    let b = bins.clamp(1, k);
    let total: f64 = exposure.iter().map(|&e| e as f64).sum();
    let mut ends: Vec<usize> = Vec::with_capacity(b);
    let mut cum = 0.0;
    let mut q = 0usize;
    for j in 1..b {
        let target = total * j as f64 / b as f64;
        let lo = ends.last().copied().unwrap_or(0) + 1;
        let hi = k - (b - j);
        q = q.max(lo.saturating_sub(1));
        // Advance until the cumulative exposure through q reaches the target.
        while q < hi && (q < lo || cum < target) {
            cum += exposure[q] as f64;
            q += 1;
        }
        ends.push(q);
    }
    ends.push(k);
    let mut bin_of = vec![0; k];
    let mut start = 0;
    for (bin, &end) in ends.iter().enumerate() {
        for slot in &mut bin_of[start..end] {
            *slot = bin;
        }
        start = end;
    }
    bin_of
}

/// Fit the per-arm discrete death-hazard model on every at-risk
/// subject-interval of `arm`.
///
/// Logit models use damped Newton steps on the Bernoulli log-likelihood;
/// identity models use least squares on the subject-interval outcomes.
pub fn fit_death_hazard<T: Scalar>(
    dataset: &Dataset<T>,
    arm: Arm,
    spec: HazardSpec,
) -> Result<DeathHazardModel<T>> {
    if dataset.arm_count(arm) == 0 {
        return Err(Error::input(format!("arm {arm} has no subjects")));
    }
    if spec.bins == 0 {
        return Err(Error::input("the hazard model needs at least one time bin"));
    }
    let k = dataset.k();
    let table = dataset.risk_table(arm);
    let bin_of = exposure_bins(&table.at_risk, spec.bins);
    let n_bins = bin_of[k - 1] + 1;

    let mut cells = Cells {
        cells: vec![Vec::new(); n_bins],
    };
    for s in dataset.arm_subjects(arm) {
        let mut y = 0usize;
        for q in 1..=s.last_at_risk() {
            let row = &mut cells.cells[bin_of[q - 1]];
            if row.len() <= y {
                row.resize(y + 1, (0.0, 0.0));
            }
            row[y].0 += 1.0;
            if s.died_in(q) {
                row[y].1 += 1.0;
            }
            y += s.events_in(q) as usize;
        }
    }

    let occupied: Vec<bool> = (0..n_bins).map(|b| cells.bin_totals(b).0 > 0.0).collect();
    if !occupied.iter().any(|&o| o) {
        return Err(Error::input(format!(
            "arm {arm} has no at-risk subject-intervals"
        )));
    }
    let slope_identified = spec.slope && slope_has_variation(&cells);

    let (intercepts, slope, diagnostics) = match spec.link {
        Link::Identity => fit_identity(&cells, slope_identified, spec.slope),
        Link::Logit => {
            let separated = (0..n_bins).any(|b| {
                let (n, d) = cells.bin_totals(b);
                n > 0.0 && (d == 0.0 || d == n)
            });
            if separated || (spec.slope && !slope_identified) {
                fallback_rates(&cells, Link::Logit)
            } else {
                fit_logit(&cells, spec.slope, T::epsilon().as_f64())?
            }
        }
    };
    let intercepts = fill_unoccupied(intercepts, &occupied);

    Ok(DeathHazardModel {
        arm,
        link: spec.link,
        bin_of,
        intercepts: intercepts.into_iter().map(T::of).collect(),
        slope: T::of(slope),
        diagnostics,
    })
}

fn slope_has_variation(cells: &Cells) -> bool {
    cells
        .cells
        .iter()
        .any(|row| row.iter().filter(|c| c.0 > 0.0).count() > 1)
}

/// Bins nobody occupies borrow the nearest earlier occupied intercept (or the
/// first occupied one).
fn fill_unoccupied(mut intercepts: Vec<f64>, occupied: &[bool]) -> Vec<f64> {
    let first = occupied.iter().position(|&o| o).expect("some bin occupied");
    let mut last = intercepts[first];
    for (b, v) in intercepts.iter_mut().enumerate() {
        if occupied[b] {
            last = *v;
        } else {
            *v = last;
        }
    }
    intercepts
}

fn bernoulli_loglik(cells: &Cells, link: Link, intercepts: &[f64], slope: f64) -> f64 {
    cells
        .iter()
        .map(|(b, y, n, d)| {
            let p = clamp_prob(link.inverse(intercepts[b] + slope * y as f64));
            d * p.ln() + (n - d) * (1.0 - p).ln()
        })
        .sum()
}

fn fallback_rates(cells: &Cells, link: Link) -> (Vec<f64>, f64, FitDiagnostics) {
    let intercepts: Vec<f64> = (0..cells.cells.len())
        .map(|b| {
            let (n, d) = cells.bin_totals(b);
            let rate = if n > 0.0 { d / n } else { 0.0 };
            match link {
                Link::Identity => rate,
                Link::Logit => (rate / (1.0 - rate)).ln(),
            }
        })
        .collect();
    let ll = bernoulli_loglik(cells, link, &intercepts, 0.0);
    (
        intercepts,
        0.0,
        FitDiagnostics {
            converged: true,
            iterations: 0,
            log_likelihood: ll,
            fallback: true,
        },
    )
}

/// Least squares of the 0/1 death outcomes on bin dummies plus `y`, solved in
/// closed form through the within-bin regression.
fn fit_identity(cells: &Cells, slope_identified: bool, slope_requested: bool) -> (Vec<f64>, f64, FitDiagnostics) {
    let n_bins = cells.cells.len();
    let mut mean_y = vec![0.0; n_bins];
    let mut mean_r = vec![0.0; n_bins];
    for b in 0..n_bins {
        let (n, d) = cells.bin_totals(b);
        if n > 0.0 {
            mean_r[b] = d / n;
            mean_y[b] = cells.cells[b]
                .iter()
                .enumerate()
                .map(|(y, c)| y as f64 * c.0)
                .sum::<f64>()
                / n;
        }
    }
    let mut slope = 0.0;
    if slope_identified {
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (b, y, n, d) in cells.iter() {
            let dy = y as f64 - mean_y[b];
            sxy += dy * (d - n * mean_r[b]);
            sxx += n * dy * dy;
        }
        slope = sxy / sxx;
    }
    let intercepts: Vec<f64> = (0..n_bins).map(|b| mean_r[b] - slope * mean_y[b]).collect();
    let ll = bernoulli_loglik(cells, Link::Identity, &intercepts, slope);
    (
        intercepts,
        slope,
        FitDiagnostics {
            converged: true,
            iterations: 1,
            log_likelihood: ll,
            fallback: slope_requested && !slope_identified,
        },
    )
}

/// Damped Newton–Raphson for the logit model. The information matrix has
/// arrow structure (diagonal in the intercepts plus the slope row), so each
/// step is solved through the Schur complement of the slope entry.
fn fit_logit(cells: &Cells, with_slope: bool, scalar_eps: f64) -> Result<(Vec<f64>, f64, FitDiagnostics)> {
    let n_bins = cells.cells.len();
    let tol = NEWTON_TOL.max(10.0 * scalar_eps);
    let mut alpha: Vec<f64> = (0..n_bins)
        .map(|b| {
            let (n, d) = cells.bin_totals(b);
            if n > 0.0 {
                let r = d / n;
                (r / (1.0 - r)).ln()
            } else {
                0.0
            }
        })
        .collect();
    let mut gamma = 0.0;
    let mut ll = bernoulli_loglik(cells, Link::Logit, &alpha, gamma);
    let mut max_change = f64::INFINITY;

    for iter in 1..=NEWTON_MAX_ITER {
        let mut g_a = vec![0.0; n_bins];
        let mut h_a = vec![0.0; n_bins];
        let mut c_a = vec![0.0; n_bins];
        let (mut g_g, mut h_gg) = (0.0, 0.0);
        for (b, y, n, d) in cells.iter() {
            let y = y as f64;
            let p = Link::Logit.inverse(alpha[b] + gamma * y);
            let resid = d - n * p;
            let w = n * p * (1.0 - p);
            g_a[b] += resid;
            h_a[b] += w;
            c_a[b] += w * y;
            g_g += resid * y;
            h_gg += w * y * y;
        }
        let mut d_gamma = 0.0;
        if with_slope {
            let mut schur = h_gg;
            let mut rhs = g_g;
            for b in 0..n_bins {
                if h_a[b] > 0.0 {
                    schur -= c_a[b] * c_a[b] / h_a[b];
                    rhs -= c_a[b] * g_a[b] / h_a[b];
                }
            }
            if !(schur > 0.0) {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    max_change,
                    log_likelihood: ll,
                });
            }
            d_gamma = rhs / schur;
        }
        let d_alpha: Vec<f64> = (0..n_bins)
            .map(|b| {
                if h_a[b] > 0.0 {
                    (g_a[b] - c_a[b] * d_gamma) / h_a[b]
                } else {
                    0.0
                }
            })
            .collect();

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial_a: Vec<f64> = alpha.iter().zip(&d_alpha).map(|(a, d)| a + step * d).collect();
            let trial_g = gamma + step * d_gamma;
            let trial_ll = bernoulli_loglik(cells, Link::Logit, &trial_a, trial_g);
            if trial_ll >= ll - 1e-12 * ll.abs() {
                accepted = Some((trial_a, trial_g, trial_ll));
                break;
            }
            step *= 0.5;
        }
        let Some((new_a, new_g, new_ll)) = accepted else {
            return Err(Error::NonConvergence {
                iterations: iter,
                max_change,
                log_likelihood: ll,
            });
        };
        max_change = d_alpha
            .iter()
            .map(|d| (step * d).abs())
            .fold((step * d_gamma).abs(), f64::max);
        alpha = new_a;
        gamma = new_g;
        ll = new_ll;
        if max_change < tol {
            return Ok((
                alpha,
                gamma,
                FitDiagnostics {
                    converged: true,
                    iterations: iter,
                    log_likelihood: ll,
                    fallback: false,
                },
            ));
        }
    }
    Err(Error::NonConvergence {
        iterations: NEWTON_MAX_ITER,
        max_change,
        log_likelihood: ll,
    })
}
