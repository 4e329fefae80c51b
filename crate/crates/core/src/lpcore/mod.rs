//! Exact rational linear programming, small-polytope vertex enumeration and
//! the optimisation formulations built on them.
//!
//! Everything here is exact: pivots use [`Rational`](crate::Rational) and the
//! entering/leaving choice follows Bland's rule with lowest-index ties, so a
//! given program always produces the same basic solution.

mod formulations;
mod linalg;
mod simplex;
mod vertices;

pub use formulations::{best_approx, min_max_deviation, min_norm_common_extension, o_n, NormCap};
pub use simplex::{solve_lp, Constraint, LinearProgram, Relation, Sense, SolveResult};
pub use vertices::{Polytope, PolytopeVertices};
