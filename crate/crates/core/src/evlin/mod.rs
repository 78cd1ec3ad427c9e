//! Eventually-linear exponent maps and eventually periodic sets of positive
//! integers, with exact arithmetic throughout.

mod arith;
mod epset;
mod map;

pub use epset::EPSet;
pub use map::{compose, compose_family, first_difference, maps_equal, power, EvLinMap, PartitionError, Piece};
