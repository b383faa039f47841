//! Compact periodic orbits of the diagonal group attached to loxodromic lattice elements.

pub mod census;
pub mod charpoly;
pub mod forms;
pub mod sample;
pub mod units;

pub use charpoly::{char_poly, is_compact_torus, is_irreducible_q, subset_sum_zero, CharPoly, TorusVerdict};
pub use units::{count_regular_periods, period_lattice, unit_search, vol_a_torus, PeriodLattice};
pub use census::{class_census, conjugacy, read_jsonl, write_jsonl, CensusOptions, ConjugacyVerdict, TorusRecord};
pub use sample::{torus_sample, TorusFrame};
