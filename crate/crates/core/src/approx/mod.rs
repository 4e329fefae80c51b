//! Approximation parameters and the finite-scale extension strategy.
//!
//! [`exact_o`] computes the extension-quality parameter `O_n(B)` on small
//! algebras by vertex enumeration, [`upper_o`] certifies `O_n(B) <= epsilon`
//! from bounds on the proper subalgebras, [`lep_pair_check`] decides the
//! pair extension property for two algebras, and [`approx_run`] simulates
//! the condition-extension strategy over an ordered family of algebras.

mod bound;
mod lep;
mod run;

pub use bound::{certificate_delta, exact_o, upper_o, Bound, OBoundTable};
pub use lep::{lep_pair_check, LepVerdict};
pub use run::{
    approx_run, BoundRecord, ClaimAViolation, Condition, FamilyMember, MeasureRecord, RunConfig, RunReport,
    TrailEntry,
};
