use std::collections::BTreeSet;

use crate::boolalg::{cylinder_algebra, AdAlgebra, AtomSet};
use crate::error::{Error, Result};
use crate::measure::{consistent, SignedMeasure};
use crate::rational::Rational;

use super::transport::{transport, TransportInstance};

fn require_consistent(nu1: &SignedMeasure, nu2: &SignedMeasure) -> Result<()> {
    if consistent(nu1, nu2)? {
        Ok(())
    } else {
        Err(Error::precondition("measures disagree on the intersection algebra"))
    }
}

/// Common extension of measures on two cylinder algebras of `{0,1}^d`.
///
/// For every block `C` of the algebra of the shared coordinates, the blocks
/// of each input inside `C` give the marginals of a transportation problem;
/// entry `(i, j)` of its solution is the value on the intersection of the
/// `i`-th and `j`-th blocks, which is a block of the joined cylinder
/// algebra. Hence `|nu|(C) <= max(|nu1|(C), |nu2|(C))` for every `C`.
pub fn free_pair_extension(nu1: &SignedMeasure, nu2: &SignedMeasure) -> Result<SignedMeasure> {
    let not_cylinder = || Error::domain("free pair extension needs two cylinder algebras");
    let (d1, f1) = nu1.domain().cylinder_coords().ok_or_else(not_cylinder)?;
    let (d2, f2) = nu2.domain().cylinder_coords().ok_or_else(not_cylinder)?;
    if d1 != d2 {
        return Err(Error::domain(format!("cylinder dimensions differ: {d1} vs {d2}")));
    }
    require_consistent(nu1, nu2)?;
    let f1: BTreeSet<usize> = f1.into_iter().collect();
    let f2: BTreeSet<usize> = f2.into_iter().collect();
    let shared: Vec<usize> = f1.intersection(&f2).copied().collect();
    let all: Vec<usize> = f1.union(&f2).copied().collect();
    let common = cylinder_algebra(d1, &shared)?;
    let target = cylinder_algebra(d1, &all)?;
    let (dom1, dom2) = (nu1.domain(), nu2.domain());
    let mut values = vec![Rational::from_integer(0.into()); target.num_blocks()];
    for &c in common.blocks() {
        let rows: Vec<usize> = dom1.blocks_within(c).collect();
        let cols: Vec<usize> = dom2.blocks_within(c).collect();
        let inst = TransportInstance {
            a: rows.iter().map(|&i| nu1.values()[i].clone()).collect(),
            b: cols.iter().map(|&j| nu2.values()[j].clone()).collect(),
        };
        let x = transport(&inst)?;
        for (ri, &i) in rows.iter().enumerate() {
            for (cj, &j) in cols.iter().enumerate() {
                let cell = dom1.blocks()[i].intersection(dom2.blocks()[j]);
                let atom = cell.first().expect("independent coordinates meet");
                let block = target.block_of(atom).expect("atom in universe");
                values[block] = x[ri][cj].clone();
            }
        }
    }
    SignedMeasure::new(target, values)
}

fn least_outside(set: AtomSet, excluded: AtomSet, what: &str) -> Result<usize> {
    set.difference(excluded)
        .first()
        .ok_or_else(|| Error::precondition(format!("no witness atom for {what}: truncation too small")))
}

/// Common extension of measures on two almost-disjoint truncations with
/// the same prefix.
///
/// Generators present in both algebras are the shared ones `A`; the rest
/// are `B_i` (first only) and `C_j` (second only). The measure is the
/// common part on the prefix singletons and shared generators, plus point
/// masses carrying each `B_i`, `C_j` value at the least atom of the
/// generator outside the shared set `X`, plus the difference of the two
/// residual values at the least atom outside `X` and all generators. The
/// result lives on the join of the two domains.
pub fn ad_pair_extension(
    alg1: &AdAlgebra,
    nu1: &SignedMeasure,
    alg2: &AdAlgebra,
    nu2: &SignedMeasure,
) -> Result<SignedMeasure> {
    if alg1.universe() != alg2.universe() || alg1.prefix() != alg2.prefix() {
        return Err(Error::domain("truncations must share the universe and the prefix"));
    }
    if *nu1.domain() != alg1.algebra() || *nu2.domain() != alg2.algebra() {
        return Err(Error::domain("measures must live on the given truncations"));
    }
    require_consistent(nu1, nu2)?;
    let head = alg1.head();
    let g1 = alg1.generators();
    let g2 = alg2.generators();
    let shared: Vec<AtomSet> = g1.iter().filter(|g| g2.contains(g)).copied().collect();
    let only1: Vec<AtomSet> = g1.iter().filter(|g| !g2.contains(g)).copied().collect();
    let only2: Vec<AtomSet> = g2.iter().filter(|g| !g1.contains(g)).copied().collect();

    let mut x_set = head;
    for a in &shared {
        x_set = x_set.union(*a);
    }
    for b in &only1 {
        for c in &only2 {
            x_set = x_set.union(b.intersection(*c));
        }
    }
    let mut covered = x_set;
    for g in only1.iter().chain(&only2) {
        covered = covered.union(*g);
    }
    let xs: Vec<usize> = only1
        .iter()
        .map(|b| least_outside(*b, x_set, &format!("generator {b}")))
        .collect::<Result<_>>()?;
    let ys: Vec<usize> = only2
        .iter()
        .map(|c| least_outside(*c, x_set, &format!("generator {c}")))
        .collect::<Result<_>>()?;
    let x = least_outside(alg1.universe().full(), covered, "the residual")?;

    let target = nu1.domain().join(nu2.domain())?;
    let mut values = vec![Rational::from_integer(0.into()); target.num_blocks()];
    let mut put = |atom: usize, w: Rational| {
        let block = target.block_of(atom).expect("atom in universe");
        values[block] += w;
    };
    let v1 = |set: AtomSet| nu1.value(set);
    let v2 = |set: AtomSet| nu2.value(set);
    for s in 0..alg1.prefix() {
        put(s, v1(AtomSet::singleton(s))?);
    }
    for a in &shared {
        let tail = a.difference(head);
        if let Some(t) = tail.first() {
            put(t, v1(tail)?);
        }
    }
    for (b, &xi) in only1.iter().zip(&xs) {
        put(xi, v1(b.difference(head))?);
    }
    for (c, &yj) in only2.iter().zip(&ys) {
        put(yj, v2(c.difference(head))?);
    }
    let residual = |alg: &AdAlgebra| {
        alg.generators()
            .iter()
            .fold(alg.universe().full().difference(head), |acc, g| acc.difference(*g))
    };
    let rho1 = v1(residual(alg1))?;
    let tails2: Rational = only2.iter().map(|c| v2(c.difference(head))).sum::<Result<Rational>>()?;
    // nu1's residual carries the C_j mass placed at the y_j, so the
    // remainder of the first residual goes to x
    put(x, rho1 - tails2);
    SignedMeasure::new(target, values)
}
