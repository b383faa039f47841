//! Experiment drivers behind the command-line tool: configuration, reports and
//! the counting, equidistribution, angular and volume checks.

mod angular;
mod config;
mod count;
mod equidist;
mod report;
mod volume;

pub use angular::{angular_check, standard_harmonics, Harmonic};
pub use config::Config;
pub use count::{census_cost_estimate, count_check, run_census};
pub use equidist::{equidist_check, Observable};
pub use report::{Check, ExperimentReport, Status};
pub use volume::volume_check;
