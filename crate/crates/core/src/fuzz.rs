//! Seeded generators of random instances for the property suites and the
//! command-line self-test.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boolalg::{cylinder_algebra, AdAlgebra, AtomSet, AtomUniverse, Subalgebra};
use crate::extend::TransportInstance;
use crate::measure::SignedMeasure;
use crate::rational::{abs_sum, int, ratio, Rational};

/// Input of a bounded single-measure extension.
#[derive(Clone, Debug)]
pub struct BoundedTriple {
    pub nu: SignedMeasure,
    pub target: Subalgebra,
    pub base: SignedMeasure,
    pub delta: Rational,
}

/// A consistent pair whose values are all below `delta` in absolute value.
#[derive(Clone, Debug)]
pub struct SmallPair {
    pub nu1: SignedMeasure,
    pub nu2: SignedMeasure,
    pub target: Subalgebra,
    pub delta: Rational,
}

/// Two almost-disjoint truncations with the same prefix and consistent
/// measures of norm at most 1 on them.
#[derive(Clone, Debug)]
pub struct AdPair {
    pub alg1: AdAlgebra,
    pub nu1: SignedMeasure,
    pub alg2: AdAlgebra,
    pub nu2: SignedMeasure,
}

pub struct Fuzzer {
    rng: ChaCha8Rng,
}

impl Fuzzer {
    pub fn new(seed: u64) -> Fuzzer {
        Fuzzer {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    /// A rational `p/q` in `[-1, 1]` with `1 <= q <= max_den`.
    pub fn rational(&mut self, max_den: i64) -> Rational {
        let q = self.rng.random_range(1..=max_den);
        let p = self.rng.random_range(-q..=q);
        ratio(p, q)
    }

    /// A rational in `(0, 1)` with denominator at most `max_den >= 2`.
    pub fn fraction(&mut self, max_den: i64) -> Rational {
        let q = self.rng.random_range(2..=max_den);
        let p = self.rng.random_range(1..q);
        ratio(p, q)
    }

    /// A uniformly random labelling of `items` into groups, returned as the
    /// list of groups (by first occurrence).
    fn groups(&mut self, items: usize) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..items {
            let g = self.rng.random_range(0..=groups.len());
            if g == groups.len() {
                groups.push(vec![i]);
            } else {
                groups[g].push(i);
            }
        }
        groups
    }

    pub fn partition(&mut self, universe: AtomUniverse) -> Subalgebra {
        let blocks = self
            .groups(universe.size())
            .into_iter()
            .map(|g| AtomSet::from_atoms(g).expect("atoms in range"))
            .collect();
        Subalgebra::from_blocks(universe, blocks).expect("a partition of the universe")
    }

    /// A random subalgebra of `alg`, obtained by merging its blocks.
    pub fn coarsening(&mut self, alg: &Subalgebra) -> Subalgebra {
        let blocks = self
            .groups(alg.num_blocks())
            .into_iter()
            .map(|g| g.iter().fold(AtomSet::EMPTY, |acc, &b| acc.union(alg.blocks()[b])))
            .collect();
        Subalgebra::from_blocks(alg.universe(), blocks).expect("merged blocks partition the universe")
    }

    /// Random block values in `[-1, 1]`, about a third of them zero, scaled
    /// down to norm at most `max_norm` when given.
    pub fn measure(&mut self, alg: &Subalgebra, max_den: i64, max_norm: Option<&Rational>) -> SignedMeasure {
        let values: Vec<Rational> = (0..alg.num_blocks())
            .map(|_| if self.coin(0.3) { Rational::zero() } else { self.rational(max_den) })
            .collect();
        let mu = SignedMeasure::new(alg.clone(), values).expect("one value per block");
        match max_norm {
            Some(cap) if mu.norm() > *cap => {
                let f = cap / mu.norm();
                mu.scale(&f)
            }
            _ => mu,
        }
    }

    /// A random measure on `fine` restricting to `coarse`, with norm at most
    /// `max_norm` (which must be at least `coarse`'s norm) when given.
    ///
    /// Each coarse value is split over the fine blocks inside it with
    /// nonnegative weights, so the split has the coarse norm; a zero-sum
    /// perturbation per coarse block is added within the remaining slack.
    pub fn extend_consistent(
        &mut self,
        coarse: &SignedMeasure,
        fine: &Subalgebra,
        max_norm: Option<&Rational>,
    ) -> SignedMeasure {
        let mut split = vec![Rational::zero(); fine.num_blocks()];
        let mut noise = vec![Rational::zero(); fine.num_blocks()];
        for (block, v) in coarse.domain().blocks().iter().zip(coarse.values()) {
            let inside: Vec<usize> = fine.blocks_within(*block).collect();
            let mut w: Vec<i64> = inside.iter().map(|_| self.rng.random_range(0..=3)).collect();
            if w.iter().all(|&x| x == 0) {
                let k = self.below(w.len());
                w[k] = 1;
            }
            let total: i64 = w.iter().sum();
            for (&b, &wi) in inside.iter().zip(&w) {
                split[b] = v * ratio(wi, total);
            }
            if inside.len() > 1 {
                let raw: Vec<Rational> = inside.iter().map(|_| self.rational(6)).collect();
                let mean: Rational = raw.iter().sum::<Rational>() / int(raw.len() as i64);
                for (&b, r) in inside.iter().zip(raw) {
                    noise[b] = r - &mean;
                }
            }
        }
        let noise_norm = abs_sum(&noise);
        let factor = match max_norm {
            _ if noise_norm.is_zero() => Rational::zero(),
            None => int(1),
            Some(cap) => {
                let slack = cap - abs_sum(&split);
                if slack.is_positive() {
                    (slack / &noise_norm * self.fraction(5)).min(int(1))
                } else {
                    Rational::zero()
                }
            }
        };
        let values = split.iter().zip(&noise).map(|(s, n)| s + n * &factor).collect();
        SignedMeasure::new(fine.clone(), values).expect("one value per block")
    }

    /// A consistent pair on two random partitions of a universe with
    /// between `lo` and `hi` atoms.
    pub fn consistent_pair(&mut self, lo: usize, hi: usize, max_den: i64) -> (SignedMeasure, SignedMeasure) {
        let universe = AtomUniverse::new(self.range(lo, hi)).expect("size within range");
        let b1 = self.partition(universe);
        let b2 = self.partition(universe);
        if self.coin(0.5) {
            let discrete = Subalgebra::discrete(universe);
            let lambda = self.measure(&discrete, max_den, None);
            (lambda.restrict(&b1).unwrap(), lambda.restrict(&b2).unwrap())
        } else {
            let nu1 = self.measure(&b1, max_den, None);
            let common = b1.intersect(&b2).expect("same universe");
            let nu2 = self.extend_consistent(&nu1.restrict(&common).unwrap(), &b2, None);
            (nu1, nu2)
        }
    }

    /// A pair of norm at most 1 on the given algebras.
    pub fn unit_pair(&mut self, b1: &Subalgebra, b2: &Subalgebra, max_den: i64) -> (SignedMeasure, SignedMeasure) {
        let nu1 = self.measure(b1, max_den, Some(&int(1)));
        let common = b1.intersect(b2).expect("same universe");
        let nu2 = self.extend_consistent(&nu1.restrict(&common).unwrap(), b2, Some(&int(1)));
        (nu1, nu2)
    }

    /// Marginals with equal totals, dimensions up to `max_dim`.
    pub fn transport_instance(&mut self, max_dim: usize, nonnegative: bool) -> TransportInstance {
        let m = self.range(1, max_dim);
        let n = self.range(1, max_dim);
        let draw = |f: &mut Fuzzer| {
            let v = f.rational(12);
            if nonnegative { v.abs() } else { v }
        };
        let a: Vec<Rational> = (0..m).map(|_| draw(self)).collect();
        let mut b: Vec<Rational> = (0..n).map(|_| draw(self)).collect();
        let gap = a.iter().sum::<Rational>() - b.iter().sum::<Rational>();
        if nonnegative && gap.is_negative() {
            // scale b down instead so every entry stays nonnegative
            let sb: Rational = b.iter().sum();
            let f = a.iter().sum::<Rational>() / sb;
            b = b.iter().map(|x| x * &f).collect();
        } else {
            let j = self.below(n);
            b[j] += gap;
        }
        TransportInstance { a, b }
    }

    pub fn bounded_triple(&mut self) -> BoundedTriple {
        let universe = AtomUniverse::new(self.range(2, 6)).expect("size within range");
        let target = self.partition(universe);
        let coarse = self.coarsening(&target);
        let mut base = self.measure(&target, 12, Some(&int(1)));
        if self.coin(0.5) && !base.norm().is_zero() {
            let f = int(1) / base.norm();
            base = base.scale(&f);
        }
        let delta = self.fraction(8);
        let mut e = self.measure(&coarse, 12, None);
        if !e.norm().is_zero() {
            // norm strictly below delta keeps every element deviation below delta
            let f = &delta / e.norm() * self.fraction(6);
            e = e.scale(&f);
        }
        let nu = base.restrict(&coarse).unwrap().add(&e).unwrap();
        BoundedTriple { nu, target, base, delta }
    }

    pub fn small_pair(&mut self) -> SmallPair {
        let (nu1, nu2) = self.consistent_pair(2, 6, 12);
        let target = if self.coin(0.5) {
            Subalgebra::discrete(nu1.universe())
        } else {
            nu1.domain().join(nu2.domain()).unwrap()
        };
        let largest = |nu: &SignedMeasure| {
            let pos: Rational = nu.values().iter().filter(|v| v.is_positive()).sum();
            let neg: Rational = nu.values().iter().filter(|v| v.is_negative()).map(|v| v.abs()).sum();
            pos.max(neg)
        };
        let top = largest(&nu1).max(largest(&nu2));
        let delta = top + self.fraction(10) * ratio(1, 4);
        SmallPair { nu1, nu2, target, delta }
    }

    /// Cylinder algebras over `{0,1}^d`, `d <= max_d`, each determined by at
    /// most `max_coords` coordinates, with consistent unit-ball measures.
    pub fn cylinder_pair(&mut self, max_d: usize, max_coords: usize) -> (SignedMeasure, SignedMeasure) {
        let d = self.range(1, max_d);
        let mut coords = || {
            let k = self.range(0, max_coords.min(d));
            let mut all: Vec<usize> = (0..d).collect();
            for i in 0..k {
                let j = self.range(i, d - 1);
                all.swap(i, j);
            }
            all.truncate(k);
            all.sort_unstable();
            all
        };
        let f1 = coords();
        let f2 = coords();
        let b1 = cylinder_algebra(d, &f1).expect("valid coordinates");
        let b2 = cylinder_algebra(d, &f2).expect("valid coordinates");
        self.unit_pair(&b1, &b2, 12)
    }

    /// Truncations `<n, A.., B..>` and `<n, A.., C..>` with `m <= max_shared`
    /// shared and `k <= max_own` own generators each.
    pub fn ad_pair(&mut self, max_shared: usize, max_own: usize) -> AdPair {
        let prefix = self.range(0, 2);
        let m = self.range(0, max_shared);
        let k = self.range(0, max_own);
        let mut next = prefix;
        let mut fresh = |f: &mut Fuzzer, lo: usize, hi: usize| {
            let count = f.range(lo, hi);
            let set = AtomSet::from_atoms(next..next + count).expect("within atom cap");
            next += count;
            set
        };
        let head_part = |f: &mut Fuzzer| {
            AtomSet::from_atoms((0..prefix).filter(|_| f.coin(0.5))).expect("within prefix")
        };
        let mut shared = Vec::new();
        for _ in 0..m {
            let h = head_part(self);
            shared.push(h.union(fresh(self, 1, 2)));
        }
        let mut own1: Vec<AtomSet> = (0..k).map(|_| head_part(self)).collect();
        let mut own2: Vec<AtomSet> = (0..k).map(|_| head_part(self)).collect();
        for g in own1.iter_mut().chain(own2.iter_mut()) {
            *g = g.union(fresh(self, 1, 2));
        }
        for i in 0..k {
            for j in 0..k {
                if self.coin(0.3) {
                    let cell = fresh(self, 1, 1);
                    own1[i] = own1[i].union(cell);
                    own2[j] = own2[j].union(cell);
                }
            }
        }
        let _residual = fresh(self, 1, 2);
        let universe = AtomUniverse::new(next).expect("within atom cap");
        let gens1: Vec<AtomSet> = shared.iter().chain(&own1).copied().collect();
        let gens2: Vec<AtomSet> = shared.iter().chain(&own2).copied().collect();
        let alg1 = AdAlgebra::new(universe, prefix, gens1).expect("almost disjoint by construction");
        let alg2 = AdAlgebra::new(universe, prefix, gens2).expect("almost disjoint by construction");
        let (nu1, nu2) = self.unit_pair(&alg1.algebra(), &alg2.algebra(), 12);
        AdPair { alg1, nu1, alg2, nu2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::consistent;

    #[test]
    fn generators_are_deterministic_and_consistent() {
        let mut a = Fuzzer::new(7);
        let mut b = Fuzzer::new(7);
        for _ in 0..50 {
            let (x1, x2) = a.consistent_pair(3, 6, 12);
            let (y1, y2) = b.consistent_pair(3, 6, 12);
            assert_eq!((&x1, &x2), (&y1, &y2));
            assert!(consistent(&x1, &x2).unwrap());
        }
        for _ in 0..50 {
            let (n1, n2) = a.cylinder_pair(4, 2);
            assert!(consistent(&n1, &n2).unwrap());
            assert!(n1.norm() <= int(1) && n2.norm() <= int(1));
            let p = a.ad_pair(2, 3);
            assert!(consistent(&p.nu1, &p.nu2).unwrap());
            assert!(p.nu2.norm() <= int(1));
        }
    }

    #[test]
    fn transport_instances_balance() {
        let mut f = Fuzzer::new(3);
        for nonneg in [false, true] {
            for _ in 0..100 {
                let t = f.transport_instance(6, nonneg);
                assert_eq!(t.a.iter().sum::<Rational>(), t.b.iter().sum::<Rational>());
                if nonneg {
                    assert!(t.a.iter().chain(&t.b).all(|v| !v.is_negative()));
                }
            }
        }
    }
}
