//! Discrete-time data model: the time grid, per-subject event histories and
//! dataset-level counting-process views.

mod dataset;
mod discretize;
mod grid;
mod subject;

pub use dataset::{Dataset, RiskTable};
pub use discretize::{discretize, to_raw_record, Exit, RawRecord, TiePolicy};
pub use grid::TimeGrid;
pub use subject::{Arm, SubjectHistory};
