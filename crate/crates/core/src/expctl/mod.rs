//! Experiment control: scenario files, the run matrix and its outputs.

pub mod matrix;
pub mod output;
pub mod scenario;

pub use matrix::{cells, run_cells, run_one, Cell, RunError, RunRecord, METRICS};
pub use scenario::{Scenario, ScenarioError, Variant};
