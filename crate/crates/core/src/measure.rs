//! Signed measures and arbitrary set functions on finite subalgebras.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::boolalg::{AtomSet, AtomUniverse, Subalgebra};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::rational::{self, Rational};

/// A finitely additive rational measure, determined by its block values.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SignedMeasure {
    domain: Subalgebra,
    values: Vec<Rational>,
}

impl SignedMeasure {
    pub fn new(domain: Subalgebra, values: Vec<Rational>) -> Result<SignedMeasure> {
        if values.len() != domain.num_blocks() {
            return Err(Error::domain(format!(
                "{} block values given for an algebra with {} blocks",
                values.len(),
                domain.num_blocks()
            )));
        }
        Ok(SignedMeasure { domain, values })
    }

    pub fn zero(domain: Subalgebra) -> SignedMeasure {
        let values = vec![Rational::zero(); domain.num_blocks()];
        SignedMeasure { domain, values }
    }

    /// `weight` times the Dirac mass at `atom`, seen on `domain`.
    pub fn point_mass(domain: Subalgebra, atom: usize, weight: Rational) -> Result<SignedMeasure> {
        let block = domain
            .block_of(atom)
            .ok_or_else(|| Error::domain(format!("atom {atom} outside the universe")))?;
        let mut m = SignedMeasure::zero(domain);
        m.values[block] = weight;
        Ok(m)
    }

    pub fn domain(&self) -> &Subalgebra {
        &self.domain
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn universe(&self) -> AtomUniverse {
        self.domain.universe()
    }

    pub fn value_mask(&self, mask: u64) -> Rational {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(Rational::zero(), |acc, (_, v)| acc + v)
    }

    pub fn value(&self, set: AtomSet) -> Result<Rational> {
        let mask = self
            .domain
            .element_mask(set)
            .ok_or_else(|| Error::domain(format!("set {set} is not in the measure's algebra")))?;
        Ok(self.value_mask(mask))
    }

    pub fn total(&self) -> Rational {
        self.values.iter().fold(Rational::zero(), |acc, v| acc + v)
    }

    /// Total variation: the sum of absolute block values.
    pub fn norm(&self) -> Rational {
        rational::abs_sum(&self.values)
    }

    /// Restriction to a coarser algebra; each coarse block gets the sum of the
    /// fine blocks it contains.
    pub fn restrict(&self, coarser: &Subalgebra) -> Result<SignedMeasure> {
        if !coarser.is_coarser_than(&self.domain) {
            return Err(Error::domain(format!(
                "{coarser:?} is not coarser than the measure's algebra {:?}",
                self.domain
            )));
        }
        let mut values = vec![Rational::zero(); coarser.num_blocks()];
        for (block, v) in self.domain.blocks().iter().zip(&self.values) {
            let target = coarser
                .block_of(block.first().expect("blocks are nonempty"))
                .expect("coarser algebra covers the universe");
            values[target] += v;
        }
        Ok(SignedMeasure {
            domain: coarser.clone(),
            values,
        })
    }

    fn same_domain(&self, other: &SignedMeasure) -> Result<()> {
        if self.domain == other.domain {
            Ok(())
        } else {
            Err(Error::domain("measures live on different algebras"))
        }
    }

    pub fn add(&self, other: &SignedMeasure) -> Result<SignedMeasure> {
        self.same_domain(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(SignedMeasure {
            domain: self.domain.clone(),
            values,
        })
    }

    pub fn sub(&self, other: &SignedMeasure) -> Result<SignedMeasure> {
        self.same_domain(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(SignedMeasure {
            domain: self.domain.clone(),
            values,
        })
    }

    pub fn scale(&self, factor: &Rational) -> SignedMeasure {
        SignedMeasure {
            domain: self.domain.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Re-expresses the measure on a finer algebra by putting each block's
    /// value on the lowest-indexed fine block inside it.
    pub fn concentrate_on(&self, finer: &Subalgebra) -> Result<SignedMeasure> {
        if !self.domain.is_coarser_than(finer) {
            return Err(Error::domain("target algebra is not finer than the measure's domain"));
        }
        let mut values = vec![Rational::zero(); finer.num_blocks()];
        for (block, v) in self.domain.blocks().iter().zip(&self.values) {
            let first = finer
                .blocks_within(*block)
                .next()
                .expect("finer algebra refines every block");
            values[first] = v.clone();
        }
        Ok(SignedMeasure {
            domain: finer.clone(),
            values,
        })
    }
}

/// Whether the two measures agree on every set of the intersection algebra.
pub fn consistent(a: &SignedMeasure, b: &SignedMeasure) -> Result<bool> {
    let common = a.domain().intersect(b.domain())?;
    Ok(a.restrict(&common)? == b.restrict(&common)?)
}

/// An arbitrary function from the elements of an algebra into `[-1, 1]`,
/// stored by block mask.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SetFunctionTable {
    domain: Subalgebra,
    values: Vec<Rational>,
}

impl SetFunctionTable {
    /// Builds a table from one value per element. Every element must appear
    /// exactly once.
    pub fn new(domain: Subalgebra, entries: BTreeMap<AtomSet, Rational>, limits: &Limits) -> Result<Self> {
        let count = 1usize
            .checked_shl(domain.num_blocks() as u32)
            .filter(|_| domain.num_blocks() <= limits.max_enum_blocks)
            .ok_or_else(|| Error::resource("set-function table exceeds the enumeration cap"))?;
        let mut values: Vec<Option<Rational>> = vec![None; count];
        for (set, v) in entries {
            let mask = domain
                .element_mask(set)
                .ok_or_else(|| Error::domain(format!("table key {set} is not an element of the algebra")))?;
            values[mask as usize] = Some(v);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(m, v)| {
                v.ok_or_else(|| {
                    Error::domain(format!("table has no entry for element {}", domain.element(m as u64)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(domain, values)
    }

    /// Builds a table from values indexed by block mask.
    pub fn from_values(domain: Subalgebra, values: Vec<Rational>) -> Result<Self> {
        if domain.num_blocks() >= 64 || values.len() as u128 != domain.element_count() {
            return Err(Error::domain("table size does not match the algebra's element count"));
        }
        if let Some(v) = values.iter().find(|v| v.abs() > rational::one()) {
            return Err(Error::domain(format!("table value {v} outside [-1, 1]")));
        }
        Ok(SetFunctionTable { domain, values })
    }

    pub fn from_fn(domain: Subalgebra, limits: &Limits, f: impl Fn(AtomSet) -> Rational) -> Result<Self> {
        let values = domain.elements(limits.max_enum_blocks)?.into_iter().map(f).collect();
        Self::from_values(domain, values)
    }

    /// The table of a measure's values; fails when some value leaves `[-1, 1]`.
    pub fn from_measure(mu: &SignedMeasure, limits: &Limits) -> Result<Self> {
        let k = mu.domain().num_blocks();
        if k > limits.max_enum_blocks {
            return Err(Error::resource("measure table exceeds the enumeration cap"));
        }
        let values = (0..1u64 << k).map(|m| mu.value_mask(m)).collect();
        Self::from_values(mu.domain().clone(), values)
    }

    pub fn domain(&self) -> &Subalgebra {
        &self.domain
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value_mask(&self, mask: u64) -> &Rational {
        &self.values[mask as usize]
    }

    /// The measure this table coincides with, if it is additive over blocks
    /// (and vanishes on the empty set).
    pub fn to_measure(&self) -> Option<SignedMeasure> {
        let k = self.domain.num_blocks();
        let block_values: Vec<Rational> = (0..k).map(|i| self.values[1 << i].clone()).collect();
        let mu = SignedMeasure::new(self.domain.clone(), block_values).ok()?;
        (0..1u64 << k)
            .all(|m| mu.value_mask(m) == self.values[m as usize])
            .then_some(mu)
    }
}

/// Anything that can be evaluated on the elements of some algebra.
pub trait SetFunction {
    fn domain(&self) -> &Subalgebra;
    fn eval(&self, set: AtomSet) -> Result<Rational>;
}

impl SetFunction for SignedMeasure {
    fn domain(&self) -> &Subalgebra {
        &self.domain
    }

    fn eval(&self, set: AtomSet) -> Result<Rational> {
        self.value(set)
    }
}

impl SetFunction for SetFunctionTable {
    fn domain(&self) -> &Subalgebra {
        &self.domain
    }

    fn eval(&self, set: AtomSet) -> Result<Rational> {
        let mask = self
            .domain
            .element_mask(set)
            .ok_or_else(|| Error::domain(format!("set {set} is not in the table's algebra")))?;
        Ok(self.values[mask as usize].clone())
    }
}

/// `max |f(S) - g(S)|` over all elements `S` of `algebra`.
pub fn dist(algebra: &Subalgebra, f: &dyn SetFunction, g: &dyn SetFunction, limits: &Limits) -> Result<Rational> {
    for side in [f.domain(), g.domain()] {
        if !algebra.is_coarser_than(side) {
            return Err(Error::domain(format!(
                "{algebra:?} is not contained in the function domain {side:?}"
            )));
        }
    }
    let mut best = Rational::zero();
    for set in algebra.elements(limits.max_enum_blocks)? {
        let d = (f.eval(set)? - g.eval(set)?).abs();
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

/// The sequence of set functions `n -> phi_n`, all on one universe.
#[derive(Clone, Debug, Default)]
pub struct SetFunctionSequence {
    entries: BTreeMap<usize, SetFunctionTable>,
}

impl SetFunctionSequence {
    pub fn new(entries: Vec<(usize, SetFunctionTable)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut universe: Option<AtomUniverse> = None;
        for (n, table) in entries {
            let u = table.domain().universe();
            if universe.is_some_and(|x| x != u) {
                return Err(Error::domain("sequence tables live on different universes"));
            }
            universe = Some(u);
            if map.insert(n, table).is_some() {
                return Err(Error::domain(format!("duplicate sequence index {n}")));
            }
        }
        Ok(SetFunctionSequence { entries: map })
    }

    pub fn get(&self, n: usize) -> Result<&SetFunctionTable> {
        self.entries
            .get(&n)
            .ok_or_else(|| Error::precondition(format!("no set function for index {n}")))
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &SetFunctionTable)> {
        self.entries.iter().map(|(n, t)| (*n, t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
