//! Exact-arithmetic machinery for finitely additive signed measures on
//! finite Boolean algebras.
//!
//! Finite set algebras are stored as partitions of a fixed atom universe
//! ([`boolalg`]), measures and arbitrary set functions live on them
//! ([`measure`]), and everything numeric is an exact [`Rational`]. On top of
//! that sit an exact simplex solver and vertex enumeration ([`lpcore`]), the
//! constructive common-extension algorithms ([`extend`]), and the
//! approximation-parameter machinery with a finite-scale simulator of the
//! condition-extension strategy ([`approx`]).

pub mod approx;
pub mod boolalg;
pub mod error;
pub mod extend;
pub mod fuzz;
pub mod limits;
pub mod lpcore;
pub mod measure;
pub mod rational;

pub use boolalg::{AdAlgebra, AtomSet, AtomUniverse, Subalgebra};
pub use error::{Error, Result};
pub use limits::Limits;
pub use measure::{SetFunction, SetFunctionSequence, SetFunctionTable, SignedMeasure};
pub use rational::Rational;
