//! Integer points of `SL(d, Z)` in Cartan balls and the angular statistic.

pub mod angular;
pub mod enumerate;
pub mod integer;

pub use angular::{angular_grid, angular_statistic, angular_statistics, flag_angle, AngularOptions, AngularResult};
pub use enumerate::{count, count_strip, enumerate, integer_cartan, par_fold, EnumConfig, StripCounts};
pub use integer::IntegerGroupElement;
