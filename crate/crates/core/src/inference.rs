//! Test results shared by every method: standardized statistic, directional
//! p-values and the flat JSON record written by the command line.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Separable-effects proportional-rate score test.
    #[serde(rename = "PR-MSMaT")]
    PrMsmat,
    /// While-alive loss-rate ratio test.
    #[serde(rename = "WA")]
    WhileAlive,
    /// Ghosh–Lin mean frequency difference test.
    #[serde(rename = "GL")]
    GhoshLin,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::PrMsmat => "PR-MSMaT",
            Method::WhileAlive => "WA",
            Method::GhoshLin => "GL",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s.to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "PRMSMAT" => Ok(Method::PrMsmat),
            "WA" => Ok(Method::WhileAlive),
            "GL" => Ok(Method::GhoshLin),
            _ => Err(Error::input(format!("unknown method `{s}` (expected PR-MSMaT, WA or GL)"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Alternative hypothesis direction for the effect `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `H1: theta != 0`.
    TwoSided,
    /// `H1: theta < 0`.
    Left,
    /// `H1: theta > 0`.
    Right,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::TwoSided, Direction::Left, Direction::Right];

    pub fn label(self) -> &'static str {
        match self {
            Direction::TwoSided => "two_sided",
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    Plugin,
    Bootstrap,
    Influence,
}

/// Outcome of one test at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    pub horizon_index: usize,
    /// Grid time of the horizon.
    pub tau: f64,
    /// Score statistic (or the method's analogue).
    pub u: f64,
    pub var: f64,
    pub z: f64,
    pub p_two: f64,
    pub p_left: f64,
    pub p_right: f64,
    /// Effect estimate; `None` at a boundary (e.g. a log of zero).
    pub beta_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_boundary: Option<String>,
    pub a_d: Option<u8>,
    pub variance_method: VarianceMethod,
    pub truncated_fraction: Option<f64>,
}

/// `(p_two, p_left, p_right)` for a standard-normal statistic.
pub fn normal_p_values(z: f64) -> (f64, f64, f64) {
    let std = Normal::standard();
    let left = std.cdf(z);
    let right = std.sf(z);
    let two = (2.0 * std.cdf(-z.abs())).min(1.0);
    (two, left, right)
}

impl TestResult {
    /// Standardize `u` by `var` and attach p-values.
    pub fn from_score(
        method: Method,
        horizon_index: usize,
        tau: f64,
        u: f64,
        var: f64,
        variance_method: VarianceMethod,
    ) -> Result<TestResult> {
        if !(var > 0.0) || !var.is_finite() {
            return Err(Error::DegenerateVariance(format!(
                "{method} variance at horizon {tau} is {var}"
            )));
        }
        if !u.is_finite() {
            return Err(Error::UndefinedEstimand(format!(
                "{method} statistic at horizon {tau} is {u}"
            )));
        }
        let z = u / var.sqrt();
        let (p_two, p_left, p_right) = normal_p_values(z);
        Ok(TestResult {
            method,
            horizon_index,
            tau,
            u,
            var,
            z,
            p_two,
            p_left,
            p_right,
            beta_hat: None,
            beta_boundary: None,
            a_d: None,
            variance_method,
            truncated_fraction: None,
        })
    }

    pub fn p_value(&self, direction: Direction) -> f64 {
        match direction {
            Direction::TwoSided => self.p_two,
            Direction::Left => self.p_left,
            Direction::Right => self.p_right,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_values_at_zero() {
        let (two, left, right) = normal_p_values(0.0);
        assert_eq!(two, 1.0);
        assert!((left - 0.5).abs() < 1e-15);
        assert!((right - 0.5).abs() < 1e-15);
    }

    #[test]
    fn p_values_at_196() {
        let (two, left, right) = normal_p_values(1.959963984540054);
        assert!((two - 0.05).abs() < 1e-9);
        assert!((right - 0.025).abs() < 1e-9);
        assert!((left - 0.975).abs() < 1e-9);
    }

    #[test]
    fn degenerate_variance_is_an_error() {
        assert!(matches!(
            TestResult::from_score(Method::PrMsmat, 1, 1.0, 0.0, 0.0, VarianceMethod::Plugin),
            Err(Error::DegenerateVariance(_))
        ));
    }

    #[test]
    fn method_labels_parse() {
        for m in [Method::PrMsmat, Method::WhileAlive, Method::GhoshLin] {
            assert_eq!(Method::parse(m.label()).unwrap(), m);
        }
        assert_eq!(Method::parse("pr_msmat").unwrap(), Method::PrMsmat);
        assert!(Method::parse("cox").is_err());
    }
}
