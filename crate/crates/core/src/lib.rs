//! Finite-field machinery for locating curves of maximal gonality over small fields.

pub mod arith;
pub mod error;
pub mod fixtures;
pub mod gfield;
pub mod homforms;
pub mod projplane;
pub mod quartic_census;
pub mod searchkit;
pub mod weilkit;

pub use error::{Error, Result};
