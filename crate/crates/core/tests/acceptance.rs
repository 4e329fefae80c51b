//! End-to-end acceptance checks. Each test prints one `criterion N: PASS`
//! or `criterion N: FAIL` line before asserting; run with `--nocapture` to
//! see them.

use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};

use chargext::approx::{approx_run, exact_o, lep_pair_check, upper_o, Bound, FamilyMember, OBoundTable, RunConfig};
use chargext::boolalg::cylinder_algebra;
use chargext::extend::{bounded_extension, free_pair_extension, sc, small_pair_extension, transport};
use chargext::fuzz::Fuzzer;
use chargext::lpcore::min_norm_common_extension;
use chargext::measure::dist;
use chargext::rational::{abs_sum, int, parse, ratio};
use chargext::{AtomSet, AtomUniverse, Limits, Rational, SetFunction, SetFunctionSequence, SetFunctionTable, SignedMeasure, Subalgebra};

fn report(id: u32, ok: bool, detail: String) {
    println!("criterion {id}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed < Duration::from_secs(secs)
}

#[test]
fn criterion_01_chain_functional_equals_least_extension_norm() {
    let limits = Limits::default();
    let mut f = Fuzzer::new(0xB125);
    let start = Instant::now();
    let mut mismatches = 0;
    let trials = 1000;
    for _ in 0..trials {
        let (nu1, nu2) = f.consistent_pair(3, 6, 12);
        let (chain, cert) = sc(&nu1, &nu2, &limits).unwrap();
        let (lp, _) = min_norm_common_extension(&nu1, &nu2, None).unwrap();
        if chain != lp || cert.total_for(&nu1, &nu2).unwrap() != chain {
            mismatches += 1;
        }
    }
    let t = start.elapsed();
    report(1, mismatches == 0 && within(t, 60), format!("{trials} pairs, {mismatches} mismatches, {t:.2?}"));
}

#[test]
fn criterion_02_transport_marginals_and_mass() {
    let mut f = Fuzzer::new(0xA3);
    let start = Instant::now();
    let mut bad = 0;
    let trials = 1000;
    for t in 0..trials {
        let nonneg = t % 2 == 1;
        let inst = f.transport_instance(6, nonneg);
        let x = transport(&inst).unwrap();
        let rows_ok = x.iter().zip(&inst.a).all(|(row, a)| row.iter().sum::<Rational>() == *a);
        let cols_ok = (0..inst.b.len()).all(|j| x.iter().map(|row| row[j].clone()).sum::<Rational>() == inst.b[j]);
        let mass = abs_sum(x.iter().flatten());
        let bound = abs_sum(&inst.a).max(abs_sum(&inst.b));
        let mass_ok = mass <= bound && (!nonneg || mass == inst.a.iter().sum::<Rational>());
        if !(rows_ok && cols_ok && mass_ok) {
            bad += 1;
        }
    }
    let t = start.elapsed();
    report(2, bad == 0 && within(t, 10), format!("{trials} instances, {bad} failures, {t:.2?}"));
}

#[test]
fn criterion_03_bounded_extension_postconditions() {
    let limits = Limits::default();
    let mut f = Fuzzer::new(0xA2);
    let trials = 500;
    let (mut bad, mut rebalanced) = (0, 0);
    for _ in 0..trials {
        let tr = f.bounded_triple();
        let c = tr.nu.domain().clone();
        let lifted = tr.base.add(&tr.nu.sub(&tr.base.restrict(&c).unwrap()).unwrap().concentrate_on(&tr.target).unwrap()).unwrap();
        if lifted.norm() > tr.nu.norm().max(int(1)) {
            rebalanced += 1;
        }
        let mu = bounded_extension(&tr.nu, &tr.target, &tr.base, &tr.delta, &limits).unwrap();
        let ok = mu.restrict(&c).unwrap() == tr.nu
            && mu.norm() <= tr.nu.norm().max(int(1))
            && dist(&tr.target, &mu, &tr.base, &limits).unwrap() <= int(3) * &tr.delta;
        if !ok {
            bad += 1;
        }
    }
    report(
        3,
        bad == 0 && rebalanced > 0,
        format!("{trials} triples, {bad} failures, {rebalanced} took the rebalancing branch"),
    );
}

#[test]
fn criterion_04_small_pair_extension_norm() {
    let limits = Limits::default();
    let mut f = Fuzzer::new(0xA1);
    let trials = 500;
    let mut bad = 0;
    for _ in 0..trials {
        let p = f.small_pair();
        let lam = small_pair_extension(&p.nu1, &p.nu2, &p.target, None, &p.delta, &limits).unwrap();
        let bound = int(2 * p.target.num_blocks() as i64) * &p.delta;
        let ok = lam.norm() <= bound
            && lam.restrict(p.nu1.domain()).unwrap() == p.nu1
            && lam.restrict(p.nu2.domain()).unwrap() == p.nu2;
        if !ok {
            bad += 1;
        }
    }
    report(4, bad == 0, format!("{trials} pairs, {bad} failures"));
}

#[test]
fn criterion_05_trivial_algebra_base_case() {
    let t = Subalgebra::trivial(AtomUniverse::new(3).unwrap());
    let table = OBoundTable::new(int(2));
    let seq = SetFunctionSequence::default();
    let bad: Vec<usize> = (0..=50)
        .filter(|&n| exact_o(&t, n, &seq, &int(2), &table, &Limits::default()).unwrap() != Bound::Exact(ratio(1, n as i64 + 1)))
        .collect();
    report(5, bad.is_empty(), format!("n = 0..50, mismatches at {bad:?}"));
}

fn coordinate_sets(d: usize, max: usize) -> Vec<Vec<usize>> {
    (0u32..1 << d)
        .filter(|m| m.count_ones() as usize <= max)
        .map(|m| (0..d).filter(|c| m >> c & 1 == 1).collect())
        .collect()
}

#[test]
fn criterion_06_cylinder_pairs_extend_within_two() {
    let limits = Limits::default();
    let mut pairs = 0;
    let mut failures = Vec::new();
    let mut worst = int(0);
    for d in 1..=4 {
        let fs = coordinate_sets(d, 2);
        for (i, f1) in fs.iter().enumerate() {
            for f2 in &fs[i..] {
                let b1 = cylinder_algebra(d, f1).unwrap();
                let b2 = cylinder_algebra(d, f2).unwrap();
                let v = lep_pair_check(&b1, &b2, &int(2), &limits).unwrap();
                pairs += 1;
                worst = worst.max(v.max_sc.clone());
                if !v.holds {
                    failures.push((d, f1.clone(), f2.clone()));
                }
            }
        }
    }
    let mut f = Fuzzer::new(0xC7);
    let trials = 500;
    let mut over = 0;
    for _ in 0..trials {
        let (nu1, nu2) = f.cylinder_pair(4, 2);
        let out = free_pair_extension(&nu1, &nu2).unwrap();
        let common = nu1.domain().intersect(nu2.domain()).unwrap();
        let variation = |nu: &SignedMeasure, c: AtomSet| abs_sum(nu.domain().blocks_within(c).map(|b| &nu.values()[b]));
        let bound: Rational = common
            .blocks()
            .iter()
            .map(|&c| variation(&nu1, c).max(variation(&nu2, c)))
            .sum();
        let restricts = out.restrict(nu1.domain()).unwrap() == nu1 && out.restrict(nu2.domain()).unwrap() == nu2;
        if out.norm() > bound || !restricts {
            over += 1;
        }
    }
    report(
        6,
        failures.is_empty() && over == 0,
        format!("{pairs} coordinate pairs (max sc {worst}), failing {failures:?}; {trials} fuzzed pairs, {over} over the bound"),
    );
}

#[test]
fn criterion_07_truncation_pairs_extend_within_three() {
    let mut f = Fuzzer::new(0xAD);
    let trials = 500;
    let mut bad = 0;
    for _ in 0..trials {
        let p = f.ad_pair(2, 3);
        let out = chargext::extend::ad_pair_extension(&p.alg1, &p.nu1, &p.alg2, &p.nu2).unwrap();
        let ok = out.norm() <= int(3)
            && out.restrict(p.nu1.domain()).unwrap() == p.nu1
            && out.restrict(p.nu2.domain()).unwrap() == p.nu2;
        if !ok {
            bad += 1;
        }
    }
    report(7, bad == 0, format!("{trials} pairs, {bad} failures"));
}

fn alg(n: usize, blocks: &[&[usize]]) -> Subalgebra {
    Subalgebra::from_blocks(
        AtomUniverse::new(n).unwrap(),
        blocks.iter().map(|b| AtomSet::from_atoms(b.iter().copied()).unwrap()).collect(),
    )
    .unwrap()
}

#[test]
fn criterion_08_crossing_pair_witness() {
    let limits = Limits::default();
    let b1 = alg(4, &[&[0, 1], &[2, 3]]);
    let b2 = alg(4, &[&[0, 2], &[1, 3]]);
    let nu1 = SignedMeasure::new(b1.clone(), vec![int(1), int(-1)]).unwrap();
    let nu2 = SignedMeasure::new(b2.clone(), vec![int(1), int(-1)]).unwrap();
    let (value, _) = sc(&nu1, &nu2, &limits).unwrap();
    let tight = lep_pair_check(&b1, &b2, &ratio(3, 2), &limits).unwrap();
    let loose = lep_pair_check(&b1, &b2, &int(2), &limits).unwrap();
    let ok = value == int(2) && !tight.holds && loose.holds;
    report(
        8,
        ok,
        format!(
            "sc = {value}; at r = 3/2 holds = {} (max sc over unit-ball pairs {}); at r = 2 holds = {}",
            tight.holds, tight.max_sc, loose.holds
        ),
    );
}

/// Every subalgebra entry of `top` at index `n`, exact.
fn tiny_tables(top: &Subalgebra, seq: &SetFunctionSequence, ns: &[usize], r: &Rational) -> OBoundTable {
    OBoundTable::fill_exact(top, ns, seq, r, &Limits::default()).unwrap()
}

#[test]
fn criterion_09_certified_bounds_dominate_exact_values() {
    let limits = Limits::default();
    let r = int(2);
    let mut compared = 0;
    let mut violations = Vec::new();
    let mut f = Fuzzer::new(0x93);
    let epsilons = [ratio(1, 2), int(1), int(2), int(4)];
    for atoms in [2usize, 3] {
        let top = Subalgebra::discrete(AtomUniverse::new(atoms).unwrap());
        for trial in 0..3 {
            // a unit-ball measure with a decaying perturbation
            let rho = f.measure(&top, 6, Some(&ratio(1, 2)));
            let ns: Vec<usize> = vec![20, 40, 80];
            let entries = ns
                .iter()
                .map(|&n| {
                    let eps = ratio(1, n as i64 + 2) * ratio(trial, 2);
                    let table = SetFunctionTable::from_fn(top.clone(), &limits, |s| {
                        if s.is_empty() {
                            Rational::zero()
                        } else {
                            rho.eval(s).unwrap() + if s.len() % 2 == 0 { eps.clone() } else { -eps.clone() }
                        }
                    })
                    .unwrap();
                    (n, table)
                })
                .collect();
            let seq = SetFunctionSequence::new(entries).unwrap();
            let table = tiny_tables(&top, &seq, &ns, &r);
            for &n in &ns {
                for b in top.subalgebras(16).unwrap() {
                    if b.is_trivial() {
                        continue;
                    }
                    let exact = table.get(&b, n).unwrap().clone();
                    let o = chargext::lpcore::o_n(&b, seq.get(n).unwrap(), &limits).unwrap();
                    let proper: Option<Vec<Rational>> = b
                        .proper_subalgebras(16)
                        .unwrap()
                        .iter()
                        .map(|c| table.get(c, n).unwrap().finite().cloned())
                        .collect();
                    let Some(proper) = proper else { continue };
                    for eps in &epsilons {
                        if let Some(up) = upper_o(&b, &o, &proper, &r, eps) {
                            compared += 1;
                            let ok = exact.finite().is_some_and(|e| *e <= up);
                            if !ok {
                                violations.push(format!("{b:?} n={n} eps={eps}: exact {exact:?}"));
                            }
                        }
                    }
                }
            }
        }
    }
    let d2 = Subalgebra::discrete(AtomUniverse::new(2).unwrap());
    let below = ratio(1, 21);
    let concrete = upper_o(&d2, &below, &[below.clone(), below.clone()], &r, &ratio(1, 2));
    report(
        9,
        compared > 0 && violations.is_empty() && concrete == Some(ratio(1, 2)),
        format!("{compared} certified comparisons, violations {violations:?}; concrete step gives {concrete:?}"),
    );
}

#[test]
fn criterion_10_cylinder_family_run() {
    let limits = Limits::default();
    let d = 3;
    let mut coords = coordinate_sets(d, 3);
    coords.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    let family: Vec<FamilyMember> = coords
        .iter()
        .map(|f| FamilyMember::Plain(cylinder_algebra(d, f).unwrap()))
        .collect();
    let top = cylinder_algebra(d, &[0, 1, 2]).unwrap();
    let rho = SignedMeasure::new(
        top.clone(),
        [1, -1, 0, 1, 0, -1, 1, 0].iter().map(|&v| ratio(v, 16)).collect(),
    )
    .unwrap();
    assert!(rho.norm() <= ratio(1, 2));
    let n_max = 8;
    let seq = SetFunctionSequence::new(
        (1..=n_max)
            .map(|n| {
                let eps = ratio(1, n as i64 + 2);
                let table = SetFunctionTable::from_fn(top.clone(), &limits, |s| {
                    let sign = if top.element_mask(s).unwrap().count_ones().is_multiple_of(2) { int(1) } else { int(-1) };
                    rho.value(s).unwrap() + sign * &eps
                })
                .unwrap();
                (n, table)
            })
            .collect(),
    )
    .unwrap();
    let tracked: Vec<AtomSet> = top
        .blocks()
        .iter()
        .copied()
        .chain([AtomSet::from_atoms([0, 1, 2, 3]).unwrap(), AtomSet::from_atoms([0, 2, 4, 6]).unwrap()])
        .collect();
    let r = int(2);
    let start = Instant::now();
    let report_run = approx_run(&family, &seq, &tracked, &RunConfig::new(r.clone(), n_max)).unwrap();
    let elapsed = start.elapsed();

    let mut mismatched = 0;
    let mut norms_ok = report_run.measures.len() == n_max;
    for rec in &report_run.measures {
        let values: Vec<Rational> = rec.values.iter().map(|v| parse(v).unwrap()).collect();
        let nu = SignedMeasure::new(top.clone(), values).unwrap();
        norms_ok &= nu.norm() <= r && parse(&rec.norm).unwrap() == nu.norm();
        for set in &tracked {
            let dev = (nu.value(*set).unwrap() - seq.get(rec.n).unwrap().eval(*set).unwrap()).abs();
            if parse(&report_run.deviations[&set.to_string()][rec.n - 1]).unwrap() != dev {
                mismatched += 1;
            }
        }
    }
    let ok = norms_ok
        && report_run.claim_a_violations.is_empty()
        && report_run.claim_a_checks > 0
        && mismatched == 0
        && within(elapsed, 300);
    report(
        10,
        ok,
        format!(
            "{} stages, {} tracked-set checks, {} violations, {mismatched} deviation mismatches, norms ok = {norms_ok}, {elapsed:.2?}",
            report_run.o_bound_trail.len(),
            report_run.claim_a_checks,
            report_run.claim_a_violations.len()
        ),
    );
}
