use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::boolalg::Subalgebra;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::lpcore::{min_max_deviation, o_n, NormCap, Polytope};
use crate::measure::{SetFunction, SetFunctionSequence, SetFunctionTable, SignedMeasure};
use crate::rational::{int, ratio, Rational};

/// A value of the extension-quality parameter: computed exactly, certified
/// from above, or infinite (no common extension within the norm cap).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Bound {
    Exact(#[serde(with = "crate::rational::serde_str")] Rational),
    Upper(#[serde(with = "crate::rational::serde_str")] Rational),
    Infinite,
}

impl Bound {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Bound::Exact(v) | Bound::Upper(v) => Some(v),
            Bound::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Bound::Infinite)
    }
}

/// `O_n(B)` entries for one norm parameter `r`.
#[derive(Clone, Debug)]
pub struct OBoundTable {
    r: Rational,
    entries: BTreeMap<(usize, Subalgebra), Bound>,
}

impl OBoundTable {
    pub fn new(r: Rational) -> OBoundTable {
        OBoundTable {
            r,
            entries: BTreeMap::new(),
        }
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub fn get(&self, algebra: &Subalgebra, n: usize) -> Option<&Bound> {
        self.entries.get(&(n, algebra.clone()))
    }

    pub fn insert(&mut self, algebra: Subalgebra, n: usize, bound: Bound) {
        self.entries.insert((n, algebra), bound);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries ordered by index, then algebra.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Subalgebra, &Bound)> {
        self.entries.iter().map(|((n, a), b)| (*n, a, b))
    }

    /// Fills exact entries for every subalgebra of `top` and every index in
    /// `indices`, coarsest algebras first.
    pub fn fill_exact(
        top: &Subalgebra,
        indices: &[usize],
        phi_seq: &SetFunctionSequence,
        r: &Rational,
        limits: &Limits,
    ) -> Result<OBoundTable> {
        let mut table = OBoundTable::new(r.clone());
        table.extend_exact(top, indices, phi_seq, limits)?;
        Ok(table)
    }

    /// Adds exact entries for `top` and its subalgebras that are missing.
    pub fn extend_exact(
        &mut self,
        top: &Subalgebra,
        indices: &[usize],
        phi_seq: &SetFunctionSequence,
        limits: &Limits,
    ) -> Result<()> {
        check_cap(top, limits)?;
        let subs = top.subalgebras(limits.max_enum_blocks)?;
        let r = self.r.clone();
        for &n in indices {
            for s in &subs {
                if self.get(s, n).is_none() {
                    let b = exact_o(s, n, phi_seq, &r, self, limits)?;
                    self.insert(s.clone(), n, b);
                }
            }
        }
        Ok(())
    }
}

fn check_cap(b: &Subalgebra, limits: &Limits) -> Result<()> {
    if b.num_blocks() > limits.max_exact_blocks {
        return Err(Error::resource(format!(
            "exact O on {} blocks exceeds cap {}",
            b.num_blocks(),
            limits.max_exact_blocks
        )));
    }
    Ok(())
}

fn unit(len: usize, at: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); len];
    v[at] = int(1);
    v
}

/// `sum_b s_b x_(offset+b) <= cap` for every sign vector `s`, which is
/// `||x|| <= cap` for the `k` coordinates starting at `offset`.
fn add_norm_ball(poly: &mut Polytope, offset: usize, k: usize, cap: &Rational) -> Result<()> {
    for signs in 0..1u64 << k {
        let mut a = vec![Rational::zero(); poly.dim()];
        for b in 0..k {
            a[offset + b] = if signs >> b & 1 == 1 { int(-1) } else { int(1) };
        }
        poly.add_le(a, cap.clone())?;
    }
    Ok(())
}

/// `|x(S) - phi(S)| <= bound` for every nonempty element `S` of `alg`.
/// False when the empty set alone already violates the bound.
fn add_dist_band(
    poly: &mut Polytope,
    offset: usize,
    alg: &Subalgebra,
    phi: &SetFunctionTable,
    bound: &Rational,
) -> Result<bool> {
    if phi.eval(crate::boolalg::AtomSet::EMPTY)?.abs() > *bound {
        return Ok(false);
    }
    let k = alg.num_blocks();
    for mask in 1..1u64 << k {
        let target = phi.eval(alg.element(mask))?;
        let mut a = vec![Rational::zero(); poly.dim()];
        for b in (0..k).filter(|b| mask >> b & 1 == 1) {
            a[offset + b] = int(1);
        }
        poly.add_le(a.clone(), &target + bound)?;
        poly.add_ge(a, &target - bound)?;
    }
    Ok(true)
}

pub(crate) fn add_consistency(
    poly: &mut Polytope,
    b1: &Subalgebra,
    off1: usize,
    b2: &Subalgebra,
    off2: usize,
) -> Result<()> {
    let common = b1.intersect(b2)?;
    for &block in common.blocks() {
        let mut a = vec![Rational::zero(); poly.dim()];
        for b in b1.blocks_within(block) {
            a[off1 + b] += int(1);
        }
        for b in b2.blocks_within(block) {
            a[off2 + b] -= int(1);
        }
        poly.add_eq(a, Rational::zero())?;
    }
    Ok(())
}

pub(crate) fn measure_at(alg: &Subalgebra, x: &[Rational], offset: usize) -> SignedMeasure {
    SignedMeasure::new(alg.clone(), x[offset..offset + alg.num_blocks()].to_vec()).expect("one value per block")
}

/// Worst-case value over a list of vertex evaluations: `None` means some
/// vertex admits no extension.
fn merge(values: Vec<Option<Rational>>) -> Option<Rational> {
    values
        .into_iter()
        .try_fold(Rational::zero(), |acc, v| v.map(|v| acc.max(v)))
}

fn proper_bound(table: &OBoundTable, c: &Subalgebra, n: usize) -> Result<Bound> {
    table.get(c, n).cloned().ok_or_else(|| {
        Error::precondition(format!("no O bound recorded for proper subalgebra {c:?} at index {n}"))
    })
}

/// Exact `O_n(B) = C_0 + o_n(B) + 1/(n+1)`.
///
/// `C_0` is the largest optimal deviation over two families of vertices,
/// each of which carries a convex value function so the maximum over the
/// closed region is attained at a vertex:
///
/// * for every unordered pair of proper subalgebras, the vertices of the
///   polytope of consistent pairs with norm at most `r` and deviation at
///   most the recorded bound; the value is the least deviation of a common
///   extension to `B` with norm at most `r`, and a vertex without one makes
///   the result infinite;
/// * for every proper subalgebra, the vertices of the unit-ball piece and of
///   each orthant piece `{s . nu >= 1}`, on which the extension norm cap
///   `max(||nu||, 1)` is affine.
pub fn exact_o(
    b: &Subalgebra,
    n: usize,
    phi_seq: &SetFunctionSequence,
    r: &Rational,
    table: &OBoundTable,
    limits: &Limits,
) -> Result<Bound> {
    if *r <= int(1) {
        return Err(Error::precondition(format!("norm parameter r = {r} must exceed 1")));
    }
    let slack = ratio(1, n as i64 + 1);
    if b.is_trivial() {
        return Ok(Bound::Exact(slack));
    }
    check_cap(b, limits)?;
    let phi = phi_seq.get(n)?;
    let proper = b.proper_subalgebras(limits.max_enum_blocks)?;
    let bounds: Vec<Bound> = proper.iter().map(|c| proper_bound(table, c, n)).collect::<Result<_>>()?;

    let mut pair_polys: Vec<(usize, usize, Polytope)> = Vec::new();
    for i in 0..proper.len() {
        for j in i..proper.len() {
            let (b1, b2) = (&proper[i], &proper[j]);
            let (k1, k2) = (b1.num_blocks(), b2.num_blocks());
            let mut poly = Polytope::new(k1 + k2);
            add_norm_ball(&mut poly, 0, k1, r)?;
            add_norm_ball(&mut poly, k1, k2, r)?;
            let mut nonempty = true;
            if let Some(o) = bounds[i].finite() {
                nonempty &= add_dist_band(&mut poly, 0, b1, phi, o)?;
            }
            if let Some(o) = bounds[j].finite() {
                nonempty &= add_dist_band(&mut poly, k1, b2, phi, o)?;
            }
            add_consistency(&mut poly, b1, 0, b2, k1)?;
            if nonempty {
                pair_polys.push((i, j, poly));
            }
        }
    }
    let pair_values: Vec<Option<Rational>> = pair_polys
        .par_iter()
        .map(|(i, j, poly)| -> Result<Vec<Option<Rational>>> {
            let (b1, b2) = (&proper[*i], &proper[*j]);
            let verts = poly.vertices(limits)?.vertices;
            verts
                .par_iter()
                .map(|x| {
                    let nu1 = measure_at(b1, x, 0);
                    let nu2 = measure_at(b2, x, b1.num_blocks());
                    Ok(min_max_deviation(b, phi, &[&nu1, &nu2], &NormCap::AtMost(r.clone()), limits)?
                        .map(|(v, _)| v))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let Some(c_pairs) = merge(pair_values) else {
        return Ok(Bound::Infinite);
    };

    let mut single_regions: Vec<(usize, Polytope)> = Vec::new();
    for (i, c) in proper.iter().enumerate() {
        let k = c.num_blocks();
        let band = |poly: &mut Polytope| -> Result<bool> {
            match bounds[i].finite() {
                Some(o) => add_dist_band(poly, 0, c, phi, o),
                None => Ok(true),
            }
        };
        let mut ball = Polytope::new(k);
        add_norm_ball(&mut ball, 0, k, &int(1))?;
        if band(&mut ball)? {
            single_regions.push((i, ball));
        }
        for signs in 0..1u64 << k {
            let s = |b: usize| if signs >> b & 1 == 1 { int(-1) } else { int(1) };
            let mut piece = Polytope::new(k);
            add_norm_ball(&mut piece, 0, k, r)?;
            for bl in 0..k {
                piece.add_ge(unit(k, bl).into_iter().map(|v| v * s(bl)).collect(), Rational::zero())?;
            }
            piece.add_ge((0..k).map(s).collect(), int(1))?;
            if band(&mut piece)? {
                single_regions.push((i, piece));
            }
        }
    }
    let single_values: Vec<Option<Rational>> = single_regions
        .par_iter()
        .map(|(i, poly)| -> Result<Vec<Option<Rational>>> {
            let c = &proper[*i];
            let verts = poly.vertices(limits)?.vertices;
            verts
                .par_iter()
                .map(|x| {
                    let nu = measure_at(c, x, 0);
                    let cap = nu.norm().max(int(1));
                    Ok(min_max_deviation(b, phi, &[&nu], &NormCap::AtMost(cap), limits)?.map(|(v, _)| v))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let c_single = merge(single_values).expect("a norm-preserving extension always exists");

    let c0 = c_pairs.max(c_single);
    Ok(Bound::Exact(c0 + o_n(b, phi, limits)? + slack))
}

/// The step size used to certify `O_n(B) <= epsilon`: `epsilon / m` for the
/// least integer `m` with `4 N delta < r - 1` and `(4N + 1) delta < epsilon`,
/// `N` the number of blocks.
pub fn certificate_delta(blocks: usize, r: &Rational, epsilon: &Rational) -> Rational {
    let four_n = int(4 * blocks as i64);
    let lower = (&four_n + int(1)).max(&four_n * epsilon / (r - int(1)));
    let m = lower.floor() + int(1);
    epsilon / m
}

/// The certified upper bound `epsilon` for `O_n(B)` when `o_n(B)` and every
/// proper-subalgebra bound lie below the certificate step, else `None`.
pub fn upper_o(
    b: &Subalgebra,
    o_value: &Rational,
    proper_bounds: &[Rational],
    r: &Rational,
    epsilon: &Rational,
) -> Option<Rational> {
    if *r <= int(1) || !epsilon.is_positive() {
        return None;
    }
    let delta = certificate_delta(b.num_blocks(), r, epsilon);
    (*o_value < delta && proper_bounds.iter().all(|v| *v < delta)).then(|| epsilon.clone())
}
