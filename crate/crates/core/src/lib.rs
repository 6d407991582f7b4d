//! Separable direct effects of treatment on recurrent events in the
//! presence of a terminal event.
//!
//! The crate provides discrete-time data structures, the classical
//! nonparametric estimators (Nelson–Aalen, Kaplan–Meier, Ghosh–Lin,
//! while-alive loss rate), the PR-MSMaT score test of no separable direct
//! effect, simulation designs and a Monte Carlo engine.
//!
//! Estimators are generic over the scalar type (`f32` or `f64`); the
//! aliases at the crate root fix the common `f64` and `f32` instantiations.

pub mod bootstrap;
pub mod data;
pub mod error;
pub mod estimators;
pub mod inference;
pub mod io;
pub mod rng;
pub mod scalar;
pub mod separable;
pub mod simulate;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Dataset64 = data::Dataset<f64>;
pub type Dataset32 = data::Dataset<f32>;
pub type TimeGrid64 = data::TimeGrid<f64>;
pub type TimeGrid32 = data::TimeGrid<f32>;
pub type StepCurve64 = estimators::StepCurve<f64>;
pub type StepCurve32 = estimators::StepCurve<f32>;
pub type ArmHazards64 = estimators::ArmHazards<f64>;
pub type ArmHazards32 = estimators::ArmHazards<f32>;
pub type WeightProcess64 = separable::WeightProcess<f64>;
pub type WeightProcess32 = separable::WeightProcess<f32>;
pub type CounterfactualMeanCurve64 = separable::CounterfactualMeanCurve<f64>;
pub type CounterfactualMeanCurve32 = separable::CounterfactualMeanCurve<f32>;
pub type SeparableAnalysis64 = separable::SeparableAnalysis<f64>;
pub type SeparableAnalysis32 = separable::SeparableAnalysis<f32>;
