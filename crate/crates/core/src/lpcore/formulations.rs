//! Measure problems posed as linear programs.
//!
//! A measure on an algebra with `k` blocks is written as `p - q` with
//! `p, q >= 0` per block, so the variation norm is bounded by (and at a
//! basic optimum equal to) `sum(p + q)`. Absolute values never need
//! iteration.

use num_traits::{Signed, Zero};

use super::simplex::{solve_lp, LinearProgram, Relation, Sense, SolveResult};
use crate::boolalg::Subalgebra;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::measure::{consistent, SetFunction, SetFunctionTable, SignedMeasure};
use crate::rational::{int, Rational};

/// Upper bound on the variation norm of the measure being optimised.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormCap {
    Unbounded,
    AtMost(Rational),
}

fn split_measure(target: &Subalgebra, x: &[Rational]) -> SignedMeasure {
    let k = target.num_blocks();
    let values = (0..k).map(|b| &x[2 * b] - &x[2 * b + 1]).collect();
    SignedMeasure::new(target.clone(), values).expect("one value per block")
}

/// Adds `restrict(mu, dom(nu)) = nu` as one equality per block of `nu`'s
/// domain.
fn add_restriction(lp: &mut LinearProgram, target: &Subalgebra, nu: &SignedMeasure) -> Result<()> {
    if !nu.domain().is_coarser_than(target) {
        return Err(Error::domain(format!(
            "target {target:?} does not contain the domain {:?}",
            nu.domain()
        )));
    }
    for (block, value) in nu.domain().blocks().iter().zip(nu.values()) {
        let terms: Vec<(usize, Rational)> = target
            .blocks_within(*block)
            .flat_map(|b| [(2 * b, int(1)), (2 * b + 1, int(-1))])
            .collect();
        lp.add_sparse(&terms, Relation::Eq, value.clone())?;
    }
    Ok(())
}

fn add_norm_cap(lp: &mut LinearProgram, k: usize, cap: &NormCap) -> Result<()> {
    if let NormCap::AtMost(r) = cap {
        let terms: Vec<(usize, Rational)> = (0..2 * k).map(|j| (j, int(1))).collect();
        lp.add_sparse(&terms, Relation::Le, r.clone())?;
    }
    Ok(())
}

/// A common extension of `nu1` and `nu2` to `target` (default: the join of
/// their domains) of least variation norm, with that norm.
pub fn min_norm_common_extension(
    nu1: &SignedMeasure,
    nu2: &SignedMeasure,
    target: Option<&Subalgebra>,
) -> Result<(Rational, SignedMeasure)> {
    if !consistent(nu1, nu2)? {
        return Err(Error::precondition("measures disagree on the intersection algebra"));
    }
    let joined;
    let target = match target {
        Some(t) => t,
        None => {
            joined = nu1.domain().join(nu2.domain())?;
            &joined
        }
    };
    let k = target.num_blocks();
    let mut lp = LinearProgram::new(Sense::Minimize, vec![int(1); 2 * k]);
    add_restriction(&mut lp, target, nu1)?;
    add_restriction(&mut lp, target, nu2)?;
    match solve_lp(&lp) {
        SolveResult::Optimal { value, vertex } => Ok((value, split_measure(target, &vertex))),
        // A consistent pair on one finite universe always has a common
        // extension, so anything else is a solver defect.
        other => unreachable!("common-extension LP returned {other:?}"),
    }
}

/// `min dist(target, mu, phi)` over measures `mu` on `target` with the given
/// norm cap that extend every measure in `fixed`. `None` when no such `mu`
/// exists.
///
/// Solved by constraint generation over the `2^k` elements: the LP starts
/// with the blocks and the full set, and the most violated elements are
/// added until the relaxed optimum is feasible for every element.
pub fn min_max_deviation(
    target: &Subalgebra,
    phi: &SetFunctionTable,
    fixed: &[&SignedMeasure],
    cap: &NormCap,
    limits: &Limits,
) -> Result<Option<(Rational, SignedMeasure)>> {
    if !target.is_coarser_than(phi.domain()) {
        return Err(Error::domain(format!(
            "{target:?} is not contained in the set function's domain"
        )));
    }
    let elements = target.elements(limits.max_enum_blocks)?;
    let phi_values: Vec<Rational> = elements
        .iter()
        .map(|s| phi.eval(*s))
        .collect::<Result<_>>()?;
    let k = target.num_blocks();
    let t = 2 * k;
    let full = (1u64 << k) - 1;
    let mut active: Vec<u64> = (0..k).map(|b| 1u64 << b).collect();
    if k > 1 {
        active.push(full);
    }
    loop {
        let mut objective = vec![Rational::zero(); t + 1];
        objective[t] = int(1);
        let mut lp = LinearProgram::new(Sense::Minimize, objective);
        for nu in fixed {
            add_restriction(&mut lp, target, nu)?;
        }
        add_norm_cap(&mut lp, k, cap)?;
        lp.add_sparse(&[(t, int(1))], Relation::Ge, phi_values[0].abs())?;
        for &mask in &active {
            let mut terms: Vec<(usize, Rational)> = (0..k)
                .filter(|b| mask >> b & 1 == 1)
                .flat_map(|b| [(2 * b, int(1)), (2 * b + 1, int(-1))])
                .collect();
            terms.push((t, int(-1)));
            lp.add_sparse(&terms, Relation::Le, phi_values[mask as usize].clone())?;
            terms.pop();
            terms.push((t, int(1)));
            lp.add_sparse(&terms, Relation::Ge, phi_values[mask as usize].clone())?;
        }
        let (value, x) = match solve_lp(&lp) {
            SolveResult::Optimal { value, vertex } => (value, vertex),
            SolveResult::Infeasible => return Ok(None),
            SolveResult::Unbounded => unreachable!("deviation is bounded below by zero"),
        };
        let mu = split_measure(target, &x);
        let mut violated: Vec<(Rational, u64)> = (1..=full)
            .filter_map(|mask| {
                let dev = (mu.value_mask(mask) - &phi_values[mask as usize]).abs();
                (dev > value).then_some((dev, mask))
            })
            .collect();
        if violated.is_empty() {
            return Ok(Some((value, mu)));
        }
        violated.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let take = (2 * k).max(8);
        active.extend(violated.into_iter().take(take).map(|(_, m)| m));
    }
}

/// Best approximation of `phi` on `algebra` by a measure of norm at most
/// `norm_cap`: the optimal sup-distance and a minimiser.
pub fn best_approx(
    algebra: &Subalgebra,
    phi: &SetFunctionTable,
    norm_cap: &Rational,
    limits: &Limits,
) -> Result<(Rational, SignedMeasure)> {
    if norm_cap.is_negative() {
        return Err(Error::precondition("norm cap must be nonnegative"));
    }
    let found = min_max_deviation(algebra, phi, &[], &NormCap::AtMost(norm_cap.clone()), limits)?;
    Ok(found.expect("the zero measure is always feasible"))
}

/// `o_n(B)`: distance from `phi` to the unit ball of measures on `algebra`.
pub fn o_n(algebra: &Subalgebra, phi: &SetFunctionTable, limits: &Limits) -> Result<Rational> {
    Ok(best_approx(algebra, phi, &int(1), limits)?.0)
}
