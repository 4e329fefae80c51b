//! Fixed benchmark inputs, generated once from fixed seeds.

use chargext::boolalg::cylinder_algebra;
use chargext::extend::TransportInstance;
use chargext::fuzz::{BoundedTriple, Fuzzer};
use chargext::rational::ratio;
use chargext::{AtomUniverse, Limits, SetFunctionSequence, SetFunctionTable, SignedMeasure, Subalgebra};

pub fn consistent_pairs(atoms: usize, count: usize) -> Vec<(SignedMeasure, SignedMeasure)> {
    let mut f = Fuzzer::new(atoms as u64);
    (0..count).map(|_| f.consistent_pair(atoms, atoms, 12)).collect()
}

pub fn transport_instances(dim: usize, count: usize) -> Vec<TransportInstance> {
    let mut f = Fuzzer::new(100 + dim as u64);
    (0..count).map(|i| f.transport_instance(dim, i % 2 == 0)).collect()
}

pub fn bounded_triples(count: usize) -> Vec<BoundedTriple> {
    let mut f = Fuzzer::new(200);
    (0..count).map(|_| f.bounded_triple()).collect()
}

pub fn cylinder_pair(d: usize) -> (Subalgebra, Subalgebra) {
    (cylinder_algebra(d, &[0, 1]).unwrap(), cylinder_algebra(d, &[1, 2]).unwrap())
}

/// The discrete algebra on `atoms` atoms with a perturbed measure as the
/// single entry of a sequence at index `n`.
pub fn discrete_sequence(atoms: usize, n: usize) -> (Subalgebra, SetFunctionSequence) {
    let top = Subalgebra::discrete(AtomUniverse::new(atoms).unwrap());
    let mut f = Fuzzer::new(300 + atoms as u64);
    let rho = f.measure(&top, 6, Some(&ratio(1, 2)));
    let eps = ratio(1, n as i64 + 2);
    let table = SetFunctionTable::from_fn(top.clone(), &Limits::default(), |s| {
        if s.is_empty() {
            ratio(0, 1)
        } else if s.len() % 2 == 0 {
            rho.value(s).unwrap() + &eps
        } else {
            rho.value(s).unwrap() - &eps
        }
    })
    .unwrap();
    (top, SetFunctionSequence::new(vec![(n, table)]).unwrap())
}
