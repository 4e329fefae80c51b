//! Randomized invariants. Instances come from the seeded [`Fuzzer`], with
//! proptest choosing the seeds and shrinking on failure.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use proptest::prelude::*;

use chargext::approx::{exact_o, lep_pair_check, OBoundTable};
use chargext::boolalg::cylinder_algebra;
use chargext::extend::{ad_pair_extension, bounded_extension, free_pair_extension, sc, transport};
use chargext::fuzz::Fuzzer;
use chargext::lpcore::{best_approx, min_norm_common_extension, o_n, solve_lp, LinearProgram, Polytope, Relation, Sense};
use chargext::measure::{consistent, dist};
use chargext::rational::{abs_sum, int, ratio};
use chargext::{AtomSet, AtomUniverse, Limits, Rational, SetFunction, SetFunctionSequence, SetFunctionTable, SignedMeasure, Subalgebra};

fn limits() -> Limits {
    Limits::default()
}

fn elements(b: &Subalgebra) -> Vec<AtomSet> {
    b.elements(16).unwrap()
}

fn table_on(f: &mut Fuzzer, alg: &Subalgebra) -> SetFunctionTable {
    let count = 1usize << alg.num_blocks();
    let values = (0..count).map(|m| if m == 0 { int(0) } else { f.rational(6) }).collect();
    SetFunctionTable::from_values(alg.clone(), values).unwrap()
}

fn random_alg(f: &mut Fuzzer, lo: usize, hi: usize) -> Subalgebra {
    let size = f.range(lo, hi);
    f.partition(AtomUniverse::new(size).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn intersection_elements_are_common_elements(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let u = AtomUniverse::new(f.range(1, 10)).unwrap();
        let (b1, b2) = (f.partition(u), f.partition(u));
        let meet = b1.intersect(&b2).unwrap();
        let mut expected: Vec<AtomSet> = elements(&b1).into_iter().filter(|s| b2.contains(*s)).collect();
        let mut got = elements(&meet);
        expected.sort();
        got.sort();
        prop_assert_eq!(expected, got);
        prop_assert_eq!(meet.element_count(), 1u128 << meet.num_blocks());
    }

    #[test]
    fn generated_closure_and_absorption(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let u = AtomUniverse::new(f.range(1, 8)).unwrap();
        let (b1, b2) = (f.partition(u), f.partition(u));
        prop_assert_eq!(&Subalgebra::generated(u, &elements(&b1)).unwrap(), &b1);
        prop_assert_eq!(&b1.intersect(&b1.join(&b2).unwrap()).unwrap(), &b1);
        prop_assert_eq!(&b1.join(&b1.intersect(&b2).unwrap()).unwrap(), &b1);
    }

    #[test]
    fn cylinder_intersection_is_shared_coordinates(d in 1usize..6, m1 in any::<u8>(), m2 in any::<u8>()) {
        let coords = |m: u8| (0..d).filter(|c| m >> c & 1 == 1).collect::<Vec<_>>();
        let (f1, f2) = (coords(m1), coords(m2));
        let shared: Vec<usize> = f1.iter().copied().filter(|c| f2.contains(c)).collect();
        let meet = cylinder_algebra(d, &f1).unwrap().intersect(&cylinder_algebra(d, &f2).unwrap()).unwrap();
        prop_assert_eq!(meet, cylinder_algebra(d, &shared).unwrap());
    }

    #[test]
    fn dist_is_a_pseudometric(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let b = random_alg(&mut f, 1, 5);
        let (x, y, z) = (table_on(&mut f, &b), table_on(&mut f, &b), table_on(&mut f, &b));
        let l = limits();
        let xy = dist(&b, &x, &y, &l).unwrap();
        prop_assert_eq!(&xy, &dist(&b, &y, &x, &l).unwrap());
        prop_assert!(xy <= dist(&b, &x, &z, &l).unwrap() + dist(&b, &z, &y, &l).unwrap());
        prop_assert!(dist(&b, &x, &x, &l).unwrap().is_zero());
    }

    #[test]
    fn restriction_and_distance_bounds(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let b = random_alg(&mut f, 1, 7);
        let c = f.coarsening(&b);
        let mu = f.measure(&b, 8, Some(&int(1)));
        let nu = f.measure(&b, 8, None);
        prop_assert!(mu.restrict(&c).unwrap().norm() <= mu.norm());
        prop_assert_eq!(mu.norm(), abs_sum(mu.values()));
        prop_assert!(dist(&b, &mu, &nu, &limits()).unwrap() <= mu.sub(&nu).unwrap().norm());
        let table = SetFunctionTable::from_measure(&mu, &limits()).unwrap();
        prop_assert_eq!(table.to_measure(), Some(mu.clone()));
        for s in elements(&b) {
            let by_blocks: Rational = b.blocks_within(s).map(|i| mu.values()[i].clone()).sum();
            prop_assert_eq!(mu.value(s).unwrap(), by_blocks);
        }
    }

    #[test]
    fn least_extension_restricts_and_matches_chains(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let (nu1, nu2) = f.consistent_pair(2, 6, 10);
        let (value, lam) = min_norm_common_extension(&nu1, &nu2, None).unwrap();
        prop_assert_eq!(&lam.norm(), &value);
        prop_assert_eq!(&lam.restrict(nu1.domain()).unwrap(), &nu1);
        prop_assert_eq!(&lam.restrict(nu2.domain()).unwrap(), &nu2);
        let (chain, cert) = sc(&nu1, &nu2, &limits()).unwrap();
        prop_assert_eq!(&chain, &value);
        prop_assert!(chain >= nu1.norm().max(nu2.norm()));
        prop_assert!(cert.chain.windows(2).all(|w| w[0].is_subset(w[1]) && w[0] != w[1]));
        prop_assert_eq!(cert.total_for(&nu1, &nu2).unwrap(), chain);
    }

    #[test]
    fn chain_functional_of_a_measure_with_itself_is_its_norm(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let b = random_alg(&mut f, 1, 8);
        let nu = f.measure(&b, 12, None);
        prop_assert_eq!(sc(&nu, &nu, &limits()).unwrap().0, nu.norm());
    }

    #[test]
    fn best_approx_is_monotone_in_the_cap(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let b = random_alg(&mut f, 1, 4);
        let phi = table_on(&mut f, &b);
        let l = limits();
        let caps = [int(0), ratio(1, 2), int(1), int(2)];
        let values: Vec<Rational> = caps.iter().map(|c| best_approx(&b, &phi, c, &l).unwrap().0).collect();
        prop_assert!(values.windows(2).all(|w| w[0] >= w[1]));
        let mu = f.measure(&b, 6, Some(&int(1)));
        let exact = SetFunctionTable::from_measure(&mu, &l).unwrap();
        prop_assert!(best_approx(&b, &exact, &int(1), &l).unwrap().0.is_zero());
    }

    #[test]
    fn transport_marginals_and_mass(seed in any::<u64>(), nonneg in any::<bool>()) {
        let mut f = Fuzzer::new(seed);
        let inst = f.transport_instance(6, nonneg);
        let x = transport(&inst).unwrap();
        for (row, a) in x.iter().zip(&inst.a) {
            prop_assert_eq!(&row.iter().sum::<Rational>(), a);
        }
        for (j, b) in inst.b.iter().enumerate() {
            prop_assert_eq!(&x.iter().map(|row| row[j].clone()).sum::<Rational>(), b);
        }
        let mass = abs_sum(x.iter().flatten());
        prop_assert!(mass <= abs_sum(&inst.a).max(abs_sum(&inst.b)));
        if nonneg {
            prop_assert_eq!(mass, inst.a.iter().sum::<Rational>());
        }
    }

    #[test]
    fn bounded_extension_postconditions(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let t = f.bounded_triple();
        let l = limits();
        let mu = bounded_extension(&t.nu, &t.target, &t.base, &t.delta, &l).unwrap();
        prop_assert_eq!(mu.domain(), &t.target);
        prop_assert_eq!(&mu.restrict(t.nu.domain()).unwrap(), &t.nu);
        prop_assert!(mu.norm() <= t.nu.norm().max(int(1)));
        prop_assert!(dist(&t.target, &mu, &t.base, &l).unwrap() <= int(3) * &t.delta);
    }

    #[test]
    fn free_pair_bound_per_shared_block(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let (nu1, nu2) = f.cylinder_pair(4, 3);
        let out = free_pair_extension(&nu1, &nu2).unwrap();
        prop_assert_eq!(&out.restrict(nu1.domain()).unwrap(), &nu1);
        prop_assert_eq!(&out.restrict(nu2.domain()).unwrap(), &nu2);
        let common = nu1.domain().intersect(nu2.domain()).unwrap();
        let variation = |nu: &SignedMeasure, c: AtomSet| abs_sum(nu.domain().blocks_within(c).map(|b| &nu.values()[b]));
        for &c in common.blocks() {
            prop_assert!(variation(&out, c) <= variation(&nu1, c).max(variation(&nu2, c)));
        }
        if nu1.norm() <= int(1) && nu2.norm() <= int(1) {
            prop_assert!(out.norm() <= int(2));
        }
    }

    #[test]
    fn truncation_pair_extension_within_three(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let p = f.ad_pair(2, 3);
        let out = ad_pair_extension(&p.alg1, &p.nu1, &p.alg2, &p.nu2).unwrap();
        prop_assert_eq!(&out.restrict(p.nu1.domain()).unwrap(), &p.nu1);
        prop_assert_eq!(&out.restrict(p.nu2.domain()).unwrap(), &p.nu2);
        prop_assert!(out.norm() <= int(3));
        prop_assert_eq!(out.total(), p.nu1.total());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simplex_is_deterministic_and_its_vertex_is_exact(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let n = f.range(1, 4);
        let mut lp = LinearProgram::new(Sense::Maximize, (0..n).map(|_| f.rational(4)).collect());
        for _ in 0..f.range(1, 5) {
            let coeffs: Vec<Rational> = (0..n).map(|_| f.rational(3)).collect();
            lp.add(coeffs, Relation::Le, f.fraction(4) + int(1)).unwrap();
        }
        lp.add(vec![int(1); n], Relation::Le, int(4)).unwrap();
        let first = solve_lp(&lp);
        prop_assert_eq!(&first, &solve_lp(&lp));
        if let Some((value, x)) = first.optimal() {
            prop_assert!(lp.is_feasible(&x));
            prop_assert_eq!(lp.objective_value(&x), value);
        }
    }

    #[test]
    fn double_description_matches_basis_enumeration(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let dim = f.range(1, 3);
        let mut poly = Polytope::new(dim);
        for i in 0..dim {
            let mut lo = vec![int(0); dim];
            lo[i] = int(-1);
            poly.add_le(lo.clone(), int(1)).unwrap();
            lo[i] = int(1);
            poly.add_le(lo, int(1)).unwrap();
        }
        for _ in 0..f.range(0, 4) {
            let a: Vec<Rational> = (0..dim).map(|_| f.rational(3)).collect();
            poly.add_le(a, f.fraction(3)).unwrap();
        }
        let mut dd = poly.vertices(&limits()).unwrap().vertices;
        let mut bases = poly.vertices_by_bases().unwrap().vertices;
        dd.sort();
        bases.sort();
        prop_assert_eq!(dd, bases);
    }

    #[test]
    fn exact_bounds_dominate_the_approximation_floor(seed in any::<u64>(), n in 0usize..30) {
        let mut f = Fuzzer::new(seed);
        let top = Subalgebra::discrete(AtomUniverse::new(2).unwrap());
        let phi = table_on(&mut f, &top);
        let seq = SetFunctionSequence::new(vec![(n, phi.clone())]).unwrap();
        let l = limits();
        let r = int(2);
        let table = OBoundTable::fill_exact(&top, &[n], &seq, &r, &l).unwrap();
        for b in top.subalgebras(16).unwrap() {
            let bound = exact_o(&b, n, &seq, &r, &table, &l).unwrap();
            if let Some(v) = bound.finite() {
                prop_assert!(*v >= o_n(&b, &phi, &l).unwrap() + ratio(1, n as i64 + 1));
            }
        }
    }

    #[test]
    fn lep_verdict_is_monotone_in_r(seed in any::<u64>()) {
        let mut f = Fuzzer::new(seed);
        let u = AtomUniverse::new(f.range(2, 4)).unwrap();
        let (b1, b2) = (f.partition(u), f.partition(u));
        let l = limits();
        let rs = [int(1), ratio(3, 2), int(2), int(3)];
        let verdicts: Vec<bool> = rs.iter().map(|r| lep_pair_check(&b1, &b2, r, &l).unwrap().holds).collect();
        prop_assert!(verdicts.windows(2).all(|w| !w[0] || w[1]));
    }
}

/// All measures on `b` with values on the grid `k/4` and norm at most 1.
fn grid_measures(b: &Subalgebra) -> Vec<SignedMeasure> {
    let k = b.num_blocks();
    let steps: Vec<Rational> = (-4..=4).map(|i| ratio(i, 4)).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        let values: Vec<Rational> = idx.iter().map(|&i| steps[i].clone()).collect();
        if abs_sum(&values) <= int(1) {
            out.push(SignedMeasure::new(b.clone(), values).unwrap());
        }
        let mut pos = 0;
        while pos < k && idx[pos] == steps.len() - 1 {
            idx[pos] = 0;
            pos += 1;
        }
        if pos == k {
            return out;
        }
        idx[pos] += 1;
    }
}

#[test]
fn lep_vertex_maximum_dominates_grid() {
    let l = limits();
    let mut f = Fuzzer::new(0x61D);
    for _ in 0..12 {
        let u = AtomUniverse::new(f.range(2, 4)).unwrap();
        let (b1, b2) = (f.partition(u), f.partition(u));
        let verdict = lep_pair_check(&b1, &b2, &int(2), &l).unwrap();
        let (g1, g2) = (grid_measures(&b1), grid_measures(&b2));
        let mut grid_max = int(0);
        for nu1 in &g1 {
            for nu2 in g2.iter().filter(|nu2| consistent(nu1, nu2).unwrap()) {
                grid_max = grid_max.max(sc(nu1, nu2, &l).unwrap().0);
            }
        }
        assert!(grid_max <= verdict.max_sc, "{b1:?} {b2:?}: grid {grid_max} > vertex {}", verdict.max_sc);
    }
}

#[test]
fn exact_measures_are_never_rejected() {
    let l = limits();
    let mut f = Fuzzer::new(7);
    let mut counts = BTreeMap::new();
    for _ in 0..50 {
        let b = random_alg(&mut f, 1, 4);
        let mu = f.measure(&b, 6, Some(&int(1)));
        let phi = SetFunctionTable::from_measure(&mu, &l).unwrap();
        let (v, nu) = best_approx(&b, &phi, &int(1), &l).unwrap();
        assert!(v.is_zero());
        for s in elements(&b) {
            assert_eq!(nu.value(s).unwrap(), phi.eval(s).unwrap());
        }
        *counts.entry(b.num_blocks()).or_insert(0) += 1;
        assert!(mu.values().iter().all(|x| x.abs() <= int(1)));
    }
    assert!(!counts.is_empty());
}
