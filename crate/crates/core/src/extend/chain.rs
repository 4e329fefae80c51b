use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::boolalg::AtomSet;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::measure::{consistent, SignedMeasure};
use crate::rational::Rational;

/// A strictly increasing chain from the empty set to the full set, drawn
/// from the union of two algebras, with its summed absolute increments.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainCertificate {
    #[serde(serialize_with = "serialize_chain")]
    pub chain: Vec<AtomSet>,
    #[serde(with = "crate::rational::serde_str")]
    pub total: Rational,
}

fn serialize_chain<S: serde::Serializer>(chain: &[AtomSet], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(chain.len()))?;
    for set in chain {
        seq.serialize_element(&set.to_vec())?;
    }
    seq.end()
}

impl ChainCertificate {
    /// Recomputes the summed increments of `eta` along the chain.
    pub fn total_for(&self, nu1: &SignedMeasure, nu2: &SignedMeasure) -> Result<Rational> {
        let eta = |s: AtomSet| -> Result<Rational> {
            nu1.value(s).or_else(|_| nu2.value(s))
        };
        let mut total = Rational::zero();
        for w in self.chain.windows(2) {
            if !(w[0].is_subset(w[1]) && w[0] != w[1]) {
                return Err(Error::domain("chain is not strictly increasing"));
            }
            total += (eta(w[1])? - eta(w[0])?).abs();
        }
        Ok(total)
    }
}

/// The chain functional of a consistent pair and a maximising chain.
///
/// `eta` is `nu1` on the first algebra and `nu2` on the second (well defined
/// on the overlap by consistency). The supremum over chains is a longest
/// path in the DAG of elements ordered by strict inclusion, with edge weight
/// `|eta(B') - eta(B)|`. Nodes are processed by cardinality, which is a
/// topological order; ties keep the first predecessor found.
pub fn sc(nu1: &SignedMeasure, nu2: &SignedMeasure, limits: &Limits) -> Result<(Rational, ChainCertificate)> {
    if !consistent(nu1, nu2)? {
        return Err(Error::precondition("measures disagree on the intersection algebra"));
    }
    let (k1, k2) = (nu1.domain().num_blocks(), nu2.domain().num_blocks());
    let count = 1u128.checked_shl(k1 as u32).unwrap_or(u128::MAX)
        .saturating_add(1u128.checked_shl(k2 as u32).unwrap_or(u128::MAX));
    if count > limits.max_chain_elements as u128 {
        return Err(Error::resource(format!(
            "chain search over {count} elements exceeds cap {}",
            limits.max_chain_elements
        )));
    }
    let mut eta: BTreeMap<AtomSet, Rational> = BTreeMap::new();
    for nu in [nu1, nu2] {
        let d = nu.domain();
        for mask in 0..1u64 << d.num_blocks() {
            eta.entry(d.element(mask)).or_insert_with(|| nu.value_mask(mask));
        }
    }
    let mut nodes: Vec<(AtomSet, Rational)> = eta.into_iter().collect();
    nodes.sort_by_key(|(s, _)| (s.len(), *s));
    let n = nodes.len();
    let mut best: Vec<Option<Rational>> = vec![None; n];
    let mut prev: Vec<usize> = vec![usize::MAX; n];
    best[0] = Some(Rational::zero());
    for j in 1..n {
        let (sj, vj) = &nodes[j];
        let mut top: Option<(Rational, usize)> = None;
        for i in 0..j {
            let (si, vi) = &nodes[i];
            if si.len() >= sj.len() || !si.is_subset(*sj) {
                continue;
            }
            let Some(bi) = &best[i] else { continue };
            let cand = bi + (vj - vi).abs();
            if top.as_ref().is_none_or(|(t, _)| cand > *t) {
                top = Some((cand, i));
            }
        }
        if let Some((v, i)) = top {
            best[j] = Some(v);
            prev[j] = i;
        }
    }
    let last = n - 1;
    let total = best[last].clone().expect("the full set is reachable from the empty set");
    let mut chain = vec![nodes[last].0];
    let mut at = last;
    while at != 0 {
        at = prev[at];
        chain.push(nodes[at].0);
    }
    chain.reverse();
    Ok((total.clone(), ChainCertificate { chain, total }))
}
