//! Constructive common extensions.
//!
//! [`sc`] computes the chain functional of a consistent pair by a longest
//! path over the inclusion order; its value equals the least norm of a
//! common extension, which gives an LP-free route to the same number
//! [`min_norm_common_extension`](crate::lpcore::min_norm_common_extension)
//! computes. The remaining functions are extension procedures with explicit
//! norm guarantees: small pairs, bounded single-measure extensions with
//! rebalancing, transportation matrices with controlled absolute mass, and
//! the pair extensions for cylinder algebras and almost-disjoint truncations.

mod chain;
mod bounded;
mod structured;
mod transport;

pub use chain::{sc, ChainCertificate};
pub use bounded::{bounded_extension, small_pair_extension};
pub use structured::{ad_pair_extension, free_pair_extension};
pub use transport::{transport, TransportInstance};
