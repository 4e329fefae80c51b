//! Finite set algebras over a fixed atom universe, stored as partitions.
//!
//! Every subalgebra of the powerset of a finite set is determined by its
//! atoms (here called *blocks*), so a [`Subalgebra`] is a partition of
//! `0..N` in canonical order: blocks sorted by least atom. Two algebras are
//! equal exactly when their block lists are equal.
//!
//! Two structured families are provided. Cylinder algebras live on `2^d`
//! atoms read as binary strings of length `d` (coordinate 0 is the most
//! significant bit); `cylinder_algebra(d, F)` collects the sets determined by
//! the coordinates in `F`. Almost-disjoint truncations
//! ([`AdAlgebra`]) are generated by all subsets of an initial segment
//! `{0, .., n-1}` together with generators that pairwise meet only inside
//! that segment; they are the finite shadows of algebras generated by an
//! almost disjoint family and the finite sets.

use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported universe: atom sets are single machine words.
pub const MAX_ATOMS: usize = 64;

/// A set of atoms, one bit per atom.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AtomSet(pub u64);

impl AtomSet {
    pub const EMPTY: AtomSet = AtomSet(0);

    pub fn full(size: usize) -> AtomSet {
        if size >= 64 {
            AtomSet(u64::MAX)
        } else {
            AtomSet((1u64 << size) - 1)
        }
    }

    pub fn singleton(atom: usize) -> AtomSet {
        debug_assert!(atom < MAX_ATOMS);
        AtomSet(1u64 << atom)
    }

    pub fn from_atoms<I: IntoIterator<Item = usize>>(atoms: I) -> Result<AtomSet> {
        let mut bits = 0u64;
        for a in atoms {
            if a >= MAX_ATOMS {
                return Err(Error::domain(format!("atom index {a} exceeds {MAX_ATOMS}")));
            }
            bits |= 1u64 << a;
        }
        Ok(AtomSet(bits))
    }

    pub fn contains(self, atom: usize) -> bool {
        atom < MAX_ATOMS && self.0 >> atom & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: AtomSet) -> AtomSet {
        AtomSet(self.0 | other.0)
    }

    pub fn intersection(self, other: AtomSet) -> AtomSet {
        AtomSet(self.0 & other.0)
    }

    pub fn difference(self, other: AtomSet) -> AtomSet {
        AtomSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: AtomSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: AtomSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn atoms(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let a = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(a)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.atoms().collect()
    }
}

impl fmt::Debug for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.atoms()).finish()
    }
}

impl fmt::Display for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.atoms().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

/// The ground set `0..size`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct AtomUniverse {
    size: usize,
}

impl AtomUniverse {
    pub fn new(size: usize) -> Result<AtomUniverse> {
        if size == 0 {
            return Err(Error::domain("atom universe must be nonempty"));
        }
        if size > MAX_ATOMS {
            return Err(Error::domain(format!(
                "atom universe of {size} atoms exceeds the {MAX_ATOMS}-atom limit"
            )));
        }
        Ok(AtomUniverse { size })
    }

    pub fn size(self) -> usize {
        self.size
    }

    pub fn full(self) -> AtomSet {
        AtomSet::full(self.size)
    }

    pub fn check(self, set: AtomSet) -> Result<()> {
        if set.is_subset(self.full()) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "set {set} has atoms outside the universe of size {}",
                self.size
            )))
        }
    }
}

/// A finite subalgebra, stored as its partition into blocks.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subalgebra {
    universe: AtomUniverse,
    blocks: Vec<AtomSet>,
}

impl fmt::Debug for Subalgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subalgebra[{}]{{", self.universe.size)?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "}}")
    }
}

impl Subalgebra {
    /// Builds an algebra from an explicit partition, canonicalizing order.
    pub fn from_blocks(universe: AtomUniverse, mut blocks: Vec<AtomSet>) -> Result<Subalgebra> {
        let mut seen = AtomSet::EMPTY;
        for &b in &blocks {
            universe.check(b)?;
            if b.is_empty() {
                return Err(Error::domain("blocks must be nonempty"));
            }
            if !b.is_disjoint(seen) {
                return Err(Error::domain(format!("block {b} overlaps another block")));
            }
            seen = seen.union(b);
        }
        if seen != universe.full() {
            return Err(Error::domain("blocks do not cover the universe"));
        }
        blocks.sort_by_key(|b| b.first());
        Ok(Subalgebra { universe, blocks })
    }

    fn from_canonical(universe: AtomUniverse, mut blocks: Vec<AtomSet>) -> Subalgebra {
        blocks.sort_by_key(|b| b.first());
        Subalgebra { universe, blocks }
    }

    pub fn trivial(universe: AtomUniverse) -> Subalgebra {
        Subalgebra {
            universe,
            blocks: vec![universe.full()],
        }
    }

    pub fn discrete(universe: AtomUniverse) -> Subalgebra {
        Subalgebra {
            universe,
            blocks: (0..universe.size()).map(AtomSet::singleton).collect(),
        }
    }

    /// The smallest algebra containing every given set: atoms are grouped by
    /// their membership pattern across the generators.
    pub fn generated(universe: AtomUniverse, sets: &[AtomSet]) -> Result<Subalgebra> {
        for &s in sets {
            universe.check(s)?;
        }
        let mut blocks: Vec<AtomSet> = vec![universe.full()];
        for &s in sets {
            blocks = blocks
                .into_iter()
                .flat_map(|b| [b.intersection(s), b.difference(s)])
                .filter(|b| !b.is_empty())
                .collect();
        }
        Ok(Subalgebra::from_canonical(universe, blocks))
    }

    pub fn universe(&self) -> AtomUniverse {
        self.universe
    }

    pub fn blocks(&self) -> &[AtomSet] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    fn same_universe(&self, other: &Subalgebra) -> Result<()> {
        if self.universe == other.universe {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "universe mismatch: {} vs {} atoms",
                self.universe.size(),
                other.universe.size()
            )))
        }
    }

    /// Sets lying in both algebras: the blocks are the connected components
    /// of the overlap graph between the two block lists.
    pub fn intersect(&self, other: &Subalgebra) -> Result<Subalgebra> {
        self.same_universe(other)?;
        let mut remaining: Vec<AtomSet> = self.blocks.clone();
        let mut out = Vec::new();
        while let Some(seed) = remaining.pop() {
            let mut component = seed;
            loop {
                let mut grown = component;
                for &b in other.blocks.iter().chain(remaining.iter()) {
                    if !b.is_disjoint(component) {
                        grown = grown.union(b);
                    }
                }
                if grown == component {
                    break;
                }
                component = grown;
            }
            remaining.retain(|b| b.is_disjoint(component));
            out.push(component);
        }
        Ok(Subalgebra::from_canonical(self.universe, out))
    }

    /// Common refinement: the algebra generated by both.
    pub fn join(&self, other: &Subalgebra) -> Result<Subalgebra> {
        self.same_universe(other)?;
        let blocks = self
            .blocks
            .iter()
            .flat_map(|a| other.blocks.iter().map(move |b| a.intersection(*b)))
            .filter(|b| !b.is_empty())
            .collect();
        Ok(Subalgebra::from_canonical(self.universe, blocks))
    }

    /// Whether every block of `self` is a union of blocks of `finer`, i.e.
    /// `self` is a subalgebra of `finer`.
    pub fn is_coarser_than(&self, finer: &Subalgebra) -> bool {
        self.universe == finer.universe
            && finer
                .blocks
                .iter()
                .all(|fb| self.blocks.iter().any(|cb| fb.is_subset(*cb)))
    }

    /// Whether the set is a union of blocks.
    pub fn contains(&self, set: AtomSet) -> bool {
        self.element_mask(set).is_some()
    }

    /// Block-index mask of an element, or `None` when the set is not a union
    /// of blocks.
    pub fn element_mask(&self, set: AtomSet) -> Option<u64> {
        if !set.is_subset(self.universe.full()) {
            return None;
        }
        let mut mask = 0u64;
        for (i, b) in self.blocks.iter().enumerate() {
            if b.is_subset(set) {
                mask |= 1 << i;
            } else if !b.is_disjoint(set) {
                return None;
            }
        }
        Some(mask)
    }

    /// The element made of the blocks selected by `mask`.
    pub fn element(&self, mask: u64) -> AtomSet {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(AtomSet::EMPTY, |acc, (_, b)| acc.union(*b))
    }

    pub fn element_count(&self) -> u128 {
        1u128 << self.blocks.len()
    }

    /// All `2^blocks` elements, indexed by block mask.
    pub fn elements(&self, max_blocks: usize) -> Result<Vec<AtomSet>> {
        if self.blocks.len() > max_blocks {
            return Err(Error::resource(format!(
                "{} blocks exceed the element enumeration cap of {max_blocks}",
                self.blocks.len()
            )));
        }
        Ok((0..1u64 << self.blocks.len()).map(|m| self.element(m)).collect())
    }

    /// Indices of the blocks of `self` contained in `set`.
    pub fn blocks_within(&self, set: AtomSet) -> impl Iterator<Item = usize> + '_ {
        self.blocks
            .iter()
            .enumerate()
            .filter(move |(_, b)| b.is_subset(set))
            .map(|(i, _)| i)
    }

    /// Index of the unique block containing `atom`.
    pub fn block_of(&self, atom: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(atom))
    }

    /// Every subalgebra of `self` (including itself and the trivial one), in
    /// order of increasing block count, ties broken by restricted-growth
    /// enumeration order.
    pub fn subalgebras(&self, max_blocks: usize) -> Result<Vec<Subalgebra>> {
        let k = self.blocks.len();
        if k > max_blocks {
            return Err(Error::resource(format!(
                "subalgebra enumeration over {k} blocks exceeds cap {max_blocks}"
            )));
        }
        let mut out = Vec::new();
        let mut labels = vec![0usize; k];
        fn rec(
            i: usize,
            used: usize,
            labels: &mut Vec<usize>,
            blocks: &[AtomSet],
            universe: AtomUniverse,
            out: &mut Vec<Subalgebra>,
        ) {
            if i == blocks.len() {
                let mut merged = vec![AtomSet::EMPTY; used];
                for (b, &l) in blocks.iter().zip(labels.iter()) {
                    merged[l] = merged[l].union(*b);
                }
                out.push(Subalgebra::from_canonical(universe, merged));
                return;
            }
            for l in 0..=used {
                labels[i] = l;
                rec(i + 1, used.max(l + 1), labels, blocks, universe, out);
            }
        }
        if k == 0 {
            return Ok(out);
        }
        labels[0] = 0;
        rec(1, 1, &mut labels, &self.blocks, self.universe, &mut out);
        out.sort_by_key(|s| s.num_blocks());
        Ok(out)
    }

    /// Every subalgebra except `self`.
    pub fn proper_subalgebras(&self, max_blocks: usize) -> Result<Vec<Subalgebra>> {
        let mut all = self.subalgebras(max_blocks)?;
        all.retain(|s| s != self);
        Ok(all)
    }

    /// Coordinates determining this algebra when the universe is read as
    /// `{0,1}^d`, or `None` if it is not a cylinder algebra.
    pub fn cylinder_coords(&self) -> Option<(usize, Vec<usize>)> {
        let n = self.universe.size();
        if !n.is_power_of_two() {
            return None;
        }
        let d = n.trailing_zeros() as usize;
        let coords: Vec<usize> = (0..d)
            .filter(|&c| self.contains(coordinate_set(d, c)))
            .collect();
        let candidate = cylinder_algebra(d, &coords).ok()?;
        (candidate == *self).then_some((d, coords))
    }
}

/// Atoms of `{0,1}^d` whose coordinate `c` equals 1.
fn coordinate_set(d: usize, c: usize) -> AtomSet {
    let bit = d - 1 - c;
    AtomSet((0..1usize << d).filter(|t| t >> bit & 1 == 1).fold(0u64, |acc, t| acc | 1 << t))
}

/// The algebra of subsets of `{0,1}^d` determined by the coordinates in
/// `coords`. Atom `t` is the binary string of `t` written with `d` digits,
/// coordinate 0 first.
pub fn cylinder_algebra(d: usize, coords: &[usize]) -> Result<Subalgebra> {
    if d == 0 || d > 6 {
        return Err(Error::domain(format!("cylinder dimension {d} outside 1..=6")));
    }
    if let Some(&c) = coords.iter().find(|&&c| c >= d) {
        return Err(Error::domain(format!("coordinate {c} out of range for dimension {d}")));
    }
    let universe = AtomUniverse::new(1 << d)?;
    let sets: Vec<AtomSet> = coords.iter().map(|&c| coordinate_set(d, c)).collect();
    Subalgebra::generated(universe, &sets)
}

/// An almost-disjoint truncation `<n, A_1, .., A_k>`: the algebra generated
/// by the singletons below `n` and generators that pairwise meet only inside
/// `{0, .., n-1}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdAlgebra {
    universe: AtomUniverse,
    prefix: usize,
    generators: Vec<AtomSet>,
}

impl AdAlgebra {
    pub fn new(universe: AtomUniverse, prefix: usize, generators: Vec<AtomSet>) -> Result<AdAlgebra> {
        if prefix > universe.size() {
            return Err(Error::domain(format!(
                "prefix {prefix} exceeds universe size {}",
                universe.size()
            )));
        }
        for &g in &generators {
            universe.check(g)?;
        }
        let head = AtomSet::full(prefix);
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if !a.intersection(*b).is_subset(head) {
                    return Err(Error::precondition(format!(
                        "generators {a} and {b} meet outside the first {prefix} atoms"
                    )));
                }
            }
        }
        Ok(AdAlgebra {
            universe,
            prefix,
            generators,
        })
    }

    pub fn universe(&self) -> AtomUniverse {
        self.universe
    }

    pub fn prefix(&self) -> usize {
        self.prefix
    }

    pub fn generators(&self) -> &[AtomSet] {
        &self.generators
    }

    /// Initial segment `{0, .., n-1}`.
    pub fn head(&self) -> AtomSet {
        AtomSet::full(self.prefix)
    }

    /// Blocks: the singletons below `n`, each generator minus the head (when
    /// nonempty), and the leftover residual (when nonempty).
    pub fn algebra(&self) -> Subalgebra {
        let head = self.head();
        let mut blocks: Vec<AtomSet> = (0..self.prefix).map(AtomSet::singleton).collect();
        let mut covered = head;
        for g in &self.generators {
            let tail = g.difference(head);
            if !tail.is_empty() && !blocks.contains(&tail) {
                blocks.push(tail);
            }
            covered = covered.union(tail);
        }
        let residual = self.universe.full().difference(covered);
        if !residual.is_empty() {
            blocks.push(residual);
        }
        Subalgebra::from_canonical(self.universe, blocks)
    }
}

/// `ad_truncation(ground, n, generators)` as a plain subalgebra.
pub fn ad_truncation(ground: AtomUniverse, prefix: usize, generators: &[AtomSet]) -> Result<Subalgebra> {
    Ok(AdAlgebra::new(ground, prefix, generators.to_vec())?.algebra())
}

#[derive(Serialize, Deserialize)]
struct SubalgebraRepr {
    universe: usize,
    blocks: Vec<Vec<usize>>,
}

impl Serialize for Subalgebra {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubalgebraRepr {
            universe: self.universe.size(),
            blocks: self.blocks.iter().map(|b| b.to_vec()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subalgebra {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SubalgebraRepr::deserialize(d)?;
        let universe = AtomUniverse::new(repr.universe).map_err(de::Error::custom)?;
        let blocks = repr
            .blocks
            .into_iter()
            .map(AtomSet::from_atoms)
            .collect::<Result<Vec<_>>>()
            .map_err(de::Error::custom)?;
        Subalgebra::from_blocks(universe, blocks).map_err(de::Error::custom)
    }
}
