use num_traits::{Signed, Zero};

use crate::boolalg::Subalgebra;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::lpcore::min_norm_common_extension;
use crate::measure::{consistent, dist, SignedMeasure};
use crate::rational::{int, Rational};

fn positive_delta(delta: &Rational) -> Result<()> {
    if delta.is_positive() {
        Ok(())
    } else {
        Err(Error::precondition("delta must be positive"))
    }
}

/// Checks `|nu(S) - base(S)| < delta` on every element of `nu`'s domain;
/// without a base, `|nu(S)| < delta`.
fn within(nu: &SignedMeasure, base: Option<&SignedMeasure>, delta: &Rational, limits: &Limits, label: &str) -> Result<()> {
    let d = nu.domain();
    let worst = match base {
        Some(b) => dist(d, nu, b, limits)?,
        None => dist(d, nu, &SignedMeasure::zero(d.clone()), limits)?,
    };
    if worst < *delta {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "{label} deviates by {worst} on its domain, not below delta = {delta}"
        )))
    }
}

/// A common extension of a consistent pair that stays close to zero (no
/// base) or to `base`.
///
/// Without a base both measures must be below `delta` in absolute value on
/// every element of their domains, and the result has norm at most
/// `2 N delta`, `N` the block count of `target`. With a base on `target`
/// the same is applied to `nu_i - base` and the base is added back, so the
/// result is within `2 N delta` of the base in norm. The extension is the
/// LP minimiser, hence rational.
pub fn small_pair_extension(
    nu1: &SignedMeasure,
    nu2: &SignedMeasure,
    target: &Subalgebra,
    base: Option<&SignedMeasure>,
    delta: &Rational,
    limits: &Limits,
) -> Result<SignedMeasure> {
    positive_delta(delta)?;
    if !consistent(nu1, nu2)? {
        return Err(Error::precondition("measures disagree on the intersection algebra"));
    }
    let bound = int(2 * target.num_blocks() as i64) * delta;
    match base {
        None => {
            within(nu1, None, delta, limits, "nu1")?;
            within(nu2, None, delta, limits, "nu2")?;
            let (value, lambda) = min_norm_common_extension(nu1, nu2, Some(target))?;
            debug_assert!(value <= bound);
            Ok(lambda)
        }
        Some(base) => {
            if base.domain() != target {
                return Err(Error::domain("base measure must live on the target algebra"));
            }
            let r1 = base.restrict(nu1.domain())?;
            let r2 = base.restrict(nu2.domain())?;
            within(nu1, Some(&r1), delta, limits, "nu1")?;
            within(nu2, Some(&r2), delta, limits, "nu2")?;
            let d1 = nu1.sub(&r1)?;
            let d2 = nu2.sub(&r2)?;
            let (value, lambda) = min_norm_common_extension(&d1, &d2, Some(target))?;
            debug_assert!(value <= bound);
            base.add(&lambda)
        }
    }
}

/// Extends `nu` from its domain `C` to `target` with norm at most
/// `max(1, ||nu||)` while staying within `3 delta` of `base` on every
/// element.
///
/// The difference `nu - base` is put on the lowest-indexed target block of
/// each `C`-block and added to `base`. If the norm then exceeds the bound,
/// mass is cancelled inside each `C`-block between its positive and
/// nonpositive target blocks, greedily in block order, up to a total of
/// `min(delta, p)` where `p` is the cancellable amount.
pub fn bounded_extension(
    nu: &SignedMeasure,
    target: &Subalgebra,
    base: &SignedMeasure,
    delta: &Rational,
    limits: &Limits,
) -> Result<SignedMeasure> {
    positive_delta(delta)?;
    let coarse = nu.domain();
    if !coarse.is_coarser_than(target) {
        return Err(Error::precondition("measure's domain is not coarser than the target"));
    }
    if base.domain() != target {
        return Err(Error::precondition("base measure must live on the target algebra"));
    }
    if base.norm() > int(1) {
        return Err(Error::precondition(format!("base has norm {} above 1", base.norm())));
    }
    let restricted = base.restrict(coarse)?;
    within(nu, Some(&restricted), delta, limits, "nu")?;

    let lift = nu.sub(&restricted)?.concentrate_on(target)?;
    let mut values: Vec<Rational> = base.add(&lift)?.values().to_vec();
    let bound = nu.norm().max(int(1));
    if crate::rational::abs_sum(&values) <= bound {
        return SignedMeasure::new(target.clone(), values);
    }

    let groups: Vec<(Vec<usize>, Vec<usize>)> = coarse
        .blocks()
        .iter()
        .map(|c| target.blocks_within(*c).partition(|&b| values[b].is_positive()))
        .collect();
    let slack: Vec<Rational> = groups
        .iter()
        .map(|(plus, minus)| {
            let p: Rational = plus.iter().map(|&b| values[b].clone()).sum();
            let m: Rational = minus.iter().map(|&b| values[b].abs()).sum();
            p.min(m)
        })
        .collect();
    let p: Rational = slack.iter().sum();
    let mut remaining = delta.clone().min(p);
    for ((plus, minus), room) in groups.iter().zip(&slack) {
        if remaining.is_zero() {
            break;
        }
        let t = room.clone().min(remaining.clone());
        remaining -= &t;
        let mut left = t.clone();
        for &b in plus {
            let d = values[b].clone().min(left.clone());
            values[b] -= &d;
            left -= d;
        }
        let mut left = t;
        for &b in minus {
            let d = values[b].abs().min(left.clone());
            values[b] += &d;
            left -= d;
        }
    }
    SignedMeasure::new(target.clone(), values)
}
