use rayon::prelude::*;
use serde::Serialize;

use super::bound::{add_consistency, measure_at};
use crate::boolalg::Subalgebra;
use crate::error::{Error, Result};
use crate::extend::sc;
use crate::limits::Limits;
use crate::lpcore::Polytope;
use crate::measure::SignedMeasure;
use crate::rational::{int, Rational};

/// Outcome of the pair extension check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LepVerdict {
    /// Whether every consistent pair of norm at most 1 has a common
    /// extension of norm at most `r`.
    pub holds: bool,
    /// The least norm of a common extension, maximised over such pairs.
    pub max_sc: Rational,
    /// A pair attaining `max_sc`.
    pub witness: Option<(SignedMeasure, SignedMeasure)>,
}

#[derive(Serialize)]
struct VerdictRepr<'a> {
    holds: bool,
    #[serde(with = "crate::rational::serde_str")]
    max_sc: &'a Rational,
    witness: Option<[Vec<String>; 2]>,
}

impl Serialize for LepVerdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let fmt = |m: &SignedMeasure| m.values().iter().map(crate::rational::format).collect();
        VerdictRepr {
            holds: self.holds,
            max_sc: &self.max_sc,
            witness: self.witness.as_ref().map(|(a, b)| [fmt(a), fmt(b)]),
        }
        .serialize(s)
    }
}

/// Largest block count per algebra for which the unit ball is written out
/// facet by facet.
const MAX_BALL_BLOCKS: usize = 10;

/// Decides whether consistent pairs in the unit balls of `b1` and `b2`
/// always have a common extension of norm at most `r`.
///
/// The least extension norm equals the chain functional, which is convex in
/// the pair, so its maximum over the polytope of consistent unit-ball pairs
/// is attained at a vertex. All vertices are enumerated and the chain
/// functional evaluated at each; the first maximiser in vertex order is
/// returned as the witness.
pub fn lep_pair_check(b1: &Subalgebra, b2: &Subalgebra, r: &Rational, limits: &Limits) -> Result<LepVerdict> {
    if b1.universe() != b2.universe() {
        return Err(Error::domain("algebras live on different universes"));
    }
    if *r < int(1) {
        return Err(Error::precondition(format!("norm parameter r = {r} must be at least 1")));
    }
    let (k1, k2) = (b1.num_blocks(), b2.num_blocks());
    if k1.max(k2) > MAX_BALL_BLOCKS {
        return Err(Error::resource(format!(
            "unit-ball description over {} blocks exceeds cap {MAX_BALL_BLOCKS}",
            k1.max(k2)
        )));
    }
    let mut poly = Polytope::new(k1 + k2);
    for (offset, k) in [(0, k1), (k1, k2)] {
        for signs in 0..1u64 << k {
            let mut a = vec![int(0); k1 + k2];
            for b in 0..k {
                a[offset + b] = if signs >> b & 1 == 1 { int(-1) } else { int(1) };
            }
            poly.add_le(a, int(1))?;
        }
    }
    add_consistency(&mut poly, b1, 0, b2, k1)?;
    let verts = poly.vertices(limits)?.vertices;
    let values: Vec<Rational> = verts
        .par_iter()
        .map(|x| Ok(sc(&measure_at(b1, x, 0), &measure_at(b2, x, k1), limits)?.0))
        .collect::<Result<_>>()?;
    let (best, max_sc) = values
        .iter()
        .enumerate()
        .fold((0usize, int(0)), |(bi, bv), (i, v)| if *v > bv { (i, v.clone()) } else { (bi, bv) });
    let witness = verts.get(best).map(|x| (measure_at(b1, x, 0), measure_at(b2, x, k1)));
    Ok(LepVerdict {
        holds: max_sc <= *r,
        max_sc,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolalg::{cylinder_algebra, AtomSet, AtomUniverse};

    fn alg(n: usize, blocks: &[&[usize]]) -> Subalgebra {
        Subalgebra::from_blocks(
            AtomUniverse::new(n).unwrap(),
            blocks.iter().map(|b| AtomSet::from_atoms(b.iter().copied()).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn same_algebra_extends_itself() {
        let a = alg(3, &[&[0], &[1, 2]]);
        let v = lep_pair_check(&a, &a, &int(1), &Limits::default()).unwrap();
        assert!(v.holds);
        assert_eq!(v.max_sc, int(1));
    }

    #[test]
    fn cylinder_pair_has_two() {
        let b0 = cylinder_algebra(2, &[0]).unwrap();
        let b1 = cylinder_algebra(2, &[1]).unwrap();
        let v = lep_pair_check(&b0, &b1, &int(2), &Limits::default()).unwrap();
        assert!(v.holds);
        assert!(v.max_sc <= int(2));
    }

    #[test]
    fn monotone_in_r() {
        let a = alg(3, &[&[0], &[1, 2]]);
        let b = alg(3, &[&[0, 1], &[2]]);
        let l = Limits::default();
        let v = lep_pair_check(&a, &b, &int(1), &l).unwrap();
        let w = lep_pair_check(&a, &b, &int(3), &l).unwrap();
        assert_eq!(v.max_sc, w.max_sc);
        assert!(!v.holds || w.holds);
    }
}
