//! Finite disjoint unions of free monogenic semigroups.
//!
//! A semigroup `S = ⋃ N_a` is given by one eventually-linear map per ordered
//! generator pair. From that data this crate solves the word problem, computes
//! the sets `T(a,x,b)` of exponents sent from block `a` to block `b` by `x`,
//! extracts a finite presentation, and builds explicit finite quotients that
//! separate any two distinct elements.
//!
//! Start with [`model::parse_spec`], then see the runnable programs under
//! `examples/`.

pub mod analysis;
pub mod cli;
pub mod evlin;
pub mod model;
pub mod presentation;
pub mod residual;
pub mod validate;
pub mod wordprob;

pub use evlin::{EPSet, EvLinMap, Piece};
pub use model::{parse_spec, Element, Gen, ModelError, SemigroupSpec, Word};
