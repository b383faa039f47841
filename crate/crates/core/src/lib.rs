//! Geometry, measure theory and arithmetic of maximal flat periodic tori for
//! `G = SL(d, R)` and `Gamma = SL(d, Z)`.

pub mod arith;
pub mod boundary;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod lie;
pub mod quadrature;
pub mod random;
pub mod reduce;
pub mod systole;
pub mod tori;
pub mod volume;

pub use error::{Error, Result};
