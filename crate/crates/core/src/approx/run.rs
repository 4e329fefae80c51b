use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::bound::{Bound, OBoundTable};
use crate::boolalg::{AdAlgebra, AtomSet, Subalgebra};
use crate::error::{Error, Result};
use crate::extend::{ad_pair_extension, bounded_extension, free_pair_extension};
use crate::limits::Limits;
use crate::lpcore::{best_approx, min_max_deviation, o_n, NormCap};
use crate::measure::{dist, SetFunction, SetFunctionSequence, SignedMeasure};
use crate::rational::{format, int, ratio, Rational};

/// A member of the algebra family. Truncations keep their generators so
/// that pairs of them can use the structured extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyMember {
    Plain(Subalgebra),
    Ad(AdAlgebra),
}

impl FamilyMember {
    pub fn algebra(&self) -> Subalgebra {
        match self {
            FamilyMember::Plain(a) => a.clone(),
            FamilyMember::Ad(a) => a.algebra(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub r: Rational,
    pub n_max: usize,
    /// Algebras with at most this many blocks use the exact parameter;
    /// larger ones use the surrogate.
    pub exact_blocks: usize,
    pub limits: Limits,
}

impl RunConfig {
    pub fn new(r: Rational, n_max: usize) -> RunConfig {
        RunConfig {
            r,
            n_max,
            exact_blocks: 2,
            limits: Limits::default(),
        }
    }
}

/// A condition `(B, n, nu_1..nu_n, k)`; `measures[i - 1]` is `nu_i`.
#[derive(Clone, Debug)]
pub struct Condition {
    pub algebra: Subalgebra,
    pub n: usize,
    pub measures: Vec<SignedMeasure>,
    pub k: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundRecord {
    pub m: usize,
    /// `exact`, `surrogate` or `infinite`.
    pub kind: &'static str,
    pub value: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrailEntry {
    pub stage: usize,
    pub member: Option<usize>,
    pub algebra: Vec<Vec<usize>>,
    pub n: usize,
    pub k: usize,
    pub bounds: Vec<BoundRecord>,
    /// How each `nu_i` reached this algebra: `initial`, `approx`, `kept`,
    /// `free-pair`, `ad-pair`, `bounded` or `lp`.
    pub methods: Vec<&'static str>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureRecord {
    pub n: usize,
    pub values: Vec<String>,
    pub norm: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimAViolation {
    pub set: String,
    pub index: usize,
    pub deviation: String,
    pub k: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub r: String,
    pub algebra: Vec<Vec<usize>>,
    pub measures: Vec<MeasureRecord>,
    /// Per tracked set, `|nu_n(A) - phi_n(A)|` for `n = 1..n_max`.
    pub deviations: BTreeMap<String, Vec<String>>,
    pub o_bound_trail: Vec<TrailEntry>,
    pub claim_a_checks: usize,
    pub claim_a_violations: Vec<ClaimAViolation>,
    #[serde(skip)]
    pub final_condition: Option<Condition>,
    #[serde(skip)]
    pub wall_time: Duration,
}

struct Runner<'a> {
    phi: &'a SetFunctionSequence,
    cfg: &'a RunConfig,
    limits: Limits,
    table: OBoundTable,
}

/// One value of the parameter used for the schedule.
enum Est {
    Exact(Rational),
    Surrogate(Rational),
    Infinite,
}

impl Est {
    fn value(&self) -> Option<&Rational> {
        match self {
            Est::Exact(v) | Est::Surrogate(v) => Some(v),
            Est::Infinite => None,
        }
    }

    fn record(&self, m: usize) -> BoundRecord {
        let (kind, value) = match self {
            Est::Exact(v) => ("exact", Some(format(v))),
            Est::Surrogate(v) => ("surrogate", Some(format(v))),
            Est::Infinite => ("infinite", None),
        };
        BoundRecord { m, kind, value }
    }
}

fn slack(i: usize) -> Rational {
    ratio(1, i as i64 + 1)
}

/// Largest `k >= 1` with `max < 1/k`.
fn k_for(max: &Rational) -> Option<usize> {
    let inv = max.recip();
    let k = inv.ceil() - int(1);
    if k < int(1) {
        return None;
    }
    k.to_integer().try_into().ok()
}

impl Runner<'_> {
    fn exact_capable(&self, alg: &Subalgebra) -> bool {
        alg.num_blocks() <= self.cfg.exact_blocks
    }

    fn exact(&mut self, alg: &Subalgebra, m: usize) -> Result<Bound> {
        if self.table.get(alg, m).is_none() {
            self.table.extend_exact(alg, &[m], self.phi, &self.limits)?;
        }
        Ok(self.table.get(alg, m).cloned().expect("entry just filled"))
    }

    /// `O_m(alg)`, exactly when small enough, otherwise
    /// `max(realized, o_m) + 1/(m+1)` with `realized` the deviation of the
    /// current `nu_m` if there is one.
    fn estimate(&mut self, alg: &Subalgebra, m: usize, nu: Option<&SignedMeasure>) -> Result<Est> {
        if self.exact_capable(alg) {
            return Ok(match self.exact(alg, m)? {
                Bound::Exact(v) | Bound::Upper(v) => Est::Exact(v),
                Bound::Infinite => Est::Infinite,
            });
        }
        let phi = self.phi.get(m)?;
        let mut base = o_n(alg, phi, &self.limits)?;
        if let Some(nu) = nu {
            base = base.max(dist(alg, nu, phi, &self.limits)?);
        }
        Ok(Est::Surrogate(base + slack(m)))
    }

    /// The largest admissible `k` for `(alg, n)`, with the bounds used.
    fn k_at(&mut self, alg: &Subalgebra, n: usize, measures: &[SignedMeasure]) -> Result<(Option<usize>, Vec<BoundRecord>)> {
        let mut records = Vec::new();
        let mut max = Rational::zero();
        let mut finite = true;
        for m in n..=self.cfg.n_max {
            let est = self.estimate(alg, m, measures.get(m - 1))?;
            records.push(est.record(m));
            match est.value() {
                Some(v) => max = max.max(v.clone()),
                None => finite = false,
            }
        }
        Ok((if finite { k_for(&max) } else { None }, records))
    }

    fn approx(&self, alg: &Subalgebra, i: usize) -> Result<SignedMeasure> {
        Ok(best_approx(alg, self.phi.get(i)?, &int(1), &self.limits)?.1)
    }

    /// Extends `nu_i` from `cond.algebra` to `joined`.
    fn extend(
        &mut self,
        i: usize,
        nu: &SignedMeasure,
        old: Option<&FamilyMember>,
        new: &FamilyMember,
        joined: &Subalgebra,
    ) -> Result<(SignedMeasure, &'static str)> {
        let phi = self.phi.get(i)?;
        let cur = nu.domain().clone();
        let f = new.algebra();
        let structured = if f.is_coarser_than(&cur) {
            None
        } else {
            let both_cyl = cur.cylinder_coords().is_some() && f.cylinder_coords().is_some();
            let both_ad = matches!((old, new), (Some(FamilyMember::Ad(_)), FamilyMember::Ad(_)));
            if both_cyl || both_ad {
                let common = cur.intersect(&f)?;
                let part = nu.restrict(&common)?;
                let base = self.approx(&f, i)?;
                let delta = dist(&common, &base, &part, &self.limits)? + slack(i);
                let nu_f = bounded_extension(&part, &f, &base, &delta, &self.limits)?;
                match (old, new) {
                    (Some(FamilyMember::Ad(a)), FamilyMember::Ad(b)) if both_ad => {
                        match ad_pair_extension(a, nu, b, &nu_f) {
                            Ok(m) => Some((m, "ad-pair")),
                            Err(Error::Precondition(_) | Error::Domain(_)) => None,
                            Err(e) => return Err(e),
                        }
                    }
                    _ if both_cyl => Some((free_pair_extension(nu, &nu_f)?, "free-pair")),
                    _ => None,
                }
            } else {
                None
            }
        };
        let (mut mu, mut method) = match structured {
            Some((m, how)) => (m, how),
            None => {
                let base = self.approx(joined, i)?;
                let delta = dist(&cur, &base.restrict(&cur)?, nu, &self.limits)? + slack(i);
                (bounded_extension(nu, joined, &base, &delta, &self.limits)?, "bounded")
            }
        };
        // structured extensions live on the join; re-express on the target
        if mu.domain() != joined {
            mu = mu.concentrate_on(joined)?;
        }
        let too_far = if self.exact_capable(joined) {
            match self.exact(joined, i)? {
                Bound::Exact(o) | Bound::Upper(o) => dist(joined, &mu, phi, &self.limits)? >= o,
                Bound::Infinite => false,
            }
        } else {
            false
        };
        if mu.norm() > self.cfg.r || too_far {
            let cap = if too_far {
                nu.norm().max(int(1))
            } else {
                self.cfg.r.clone()
            };
            match min_max_deviation(joined, phi, &[nu], &NormCap::AtMost(cap), &self.limits)? {
                Some((_, best)) => {
                    mu = best;
                    method = "lp";
                }
                None => {
                    return Err(Error::Infeasible(format!(
                        "no extension of nu_{i} from {cur:?} to {joined:?} within norm {}",
                        self.cfg.r
                    )))
                }
            }
        }
        Ok((mu, method))
    }
}

/// Finite-scale run of the condition-extension strategy over an ordered
/// family.
///
/// Starting from the trivial algebra with `n = 1`, each family member in
/// turn is merged into the current algebra (the join must again be a
/// member). Before merging, `n` is raised on the current algebra to the
/// scheduled index, and further while the merged algebra would force a
/// smaller `k`; every `nu_i` is then extended to the merged algebra. New
/// measures are best approximations in the unit ball. After each stage the
/// deviation on every tracked set that has entered is checked against the
/// `1/k` recorded at its entry.
pub fn approx_run(
    family: &[FamilyMember],
    phi_seq: &SetFunctionSequence,
    tracked: &[AtomSet],
    config: &RunConfig,
) -> Result<RunReport> {
    let start = Instant::now();
    if config.r <= int(1) {
        return Err(Error::precondition(format!("norm parameter r = {} must exceed 1", config.r)));
    }
    if config.n_max == 0 {
        return Err(Error::precondition("n_max must be positive"));
    }
    let Some(first) = family.first() else {
        return Err(Error::precondition("empty family"));
    };
    let universe = first.algebra().universe();
    let algebras: Vec<Subalgebra> = family.iter().map(FamilyMember::algebra).collect();
    if algebras.iter().any(|a| a.universe() != universe) {
        return Err(Error::domain("family members live on different universes"));
    }
    for &set in tracked {
        if !algebras.iter().any(|a| a.contains(set)) {
            return Err(Error::precondition(format!("tracked set {set} lies in no family member")));
        }
    }
    for i in 1..=config.n_max {
        let phi = phi_seq.get(i)?;
        if let Some(a) = algebras.iter().find(|a| !a.is_coarser_than(phi.domain())) {
            return Err(Error::precondition(format!("phi_{i} is not defined on {a:?}")));
        }
    }
    let mut limits = config.limits;
    limits.max_exact_blocks = limits.max_exact_blocks.max(config.exact_blocks);
    let mut run = Runner {
        phi: phi_seq,
        cfg: config,
        limits,
        table: OBoundTable::new(config.r.clone()),
    };

    let trivial = Subalgebra::trivial(universe);
    let mut cond = Condition {
        algebra: trivial.clone(),
        n: 1,
        measures: vec![run.approx(&trivial, 1)?],
        k: 0,
    };
    let (k0, bounds) = run.k_at(&trivial, 1, &cond.measures)?;
    cond.k = k0.ok_or_else(|| Error::Infeasible("no admissible k on the trivial algebra".into()))?;
    let mut member: Option<usize> = None;
    let mut trail = vec![TrailEntry {
        stage: 0,
        member: None,
        algebra: blocks_of(&trivial),
        n: 1,
        k: cond.k,
        bounds,
        methods: vec!["initial"],
    }];
    let mut entered: BTreeMap<AtomSet, (usize, usize)> = BTreeMap::new();
    let mut checks = 0usize;
    let mut violations = Vec::new();
    claim_a(&cond, tracked, phi_seq, &mut entered, &mut checks, &mut violations)?;

    let total = family.len();
    for (t, next) in family.iter().enumerate() {
        let joined = cond.algebra.join(&algebras[t])?;
        let target = algebras
            .iter()
            .position(|a| *a == joined)
            .ok_or_else(|| Error::precondition(format!("join with member {t} is not a family member")))?;
        let scheduled = cond.n.max(((t + 1) * config.n_max).div_ceil(total));
        let old_member = member.map(|m| &family[m]);
        let mut n1 = scheduled;
        let mut staged = cond.measures.clone();
        let mut methods: Vec<&'static str> = vec!["kept"; cond.n];
        let mut extended: Vec<SignedMeasure> = Vec::new();
        let (k_new, bounds) = loop {
            while staged.len() < n1 {
                let i = staged.len() + 1;
                staged.push(run.approx(&cond.algebra, i)?);
                methods.push("approx");
            }
            while extended.len() < n1 {
                let i = extended.len() + 1;
                if joined == cond.algebra {
                    extended.push(staged[i - 1].clone());
                } else {
                    let (mu, how) = run.extend(i, &staged[i - 1], old_member, next, &joined)?;
                    extended.push(mu);
                    methods[i - 1] = how;
                }
            }
            let (k, bounds) = run.k_at(&joined, n1, &extended)?;
            if let Some(k) = k.filter(|&k| k >= cond.k) {
                break (k, bounds);
            }
            if n1 == config.n_max {
                return Err(Error::Infeasible(format!(
                    "no index up to {} keeps k >= {} on {joined:?}",
                    config.n_max, cond.k
                )));
            }
            n1 += 1;
        };
        cond = Condition {
            algebra: joined.clone(),
            n: n1,
            measures: extended,
            k: k_new,
        };
        member = Some(target);
        trail.push(TrailEntry {
            stage: t + 1,
            member: Some(target),
            algebra: blocks_of(&joined),
            n: n1,
            k: k_new,
            bounds,
            methods,
        });
        claim_a(&cond, tracked, phi_seq, &mut entered, &mut checks, &mut violations)?;
    }

    let mut deviations = BTreeMap::new();
    for &set in tracked {
        let devs = (1..=cond.n)
            .map(|i| Ok(format(&(cond.measures[i - 1].value(set)? - phi_seq.get(i)?.eval(set)?).abs())))
            .collect::<Result<Vec<_>>>()?;
        deviations.insert(set.to_string(), devs);
    }
    let measures = cond
        .measures
        .iter()
        .enumerate()
        .map(|(i, m)| MeasureRecord {
            n: i + 1,
            values: m.values().iter().map(format).collect(),
            norm: format(&m.norm()),
        })
        .collect();
    Ok(RunReport {
        r: format(&config.r),
        algebra: blocks_of(&cond.algebra),
        measures,
        deviations,
        o_bound_trail: trail,
        claim_a_checks: checks,
        claim_a_violations: violations,
        final_condition: Some(cond),
        wall_time: start.elapsed(),
    })
}

fn blocks_of(a: &Subalgebra) -> Vec<Vec<usize>> {
    a.blocks().iter().map(|b| b.to_vec()).collect()
}

/// Records entry of tracked sets into the current algebra and checks every
/// entered set against the `1/k` of its entry stage.
fn claim_a(
    cond: &Condition,
    tracked: &[AtomSet],
    phi_seq: &SetFunctionSequence,
    entered: &mut BTreeMap<AtomSet, (usize, usize)>,
    checks: &mut usize,
    violations: &mut Vec<ClaimAViolation>,
) -> Result<()> {
    for &set in tracked {
        if cond.algebra.contains(set) {
            entered.entry(set).or_insert((cond.n, cond.k));
        }
    }
    for (&set, &(n0, k0)) in entered.iter() {
        let limit = ratio(1, k0 as i64);
        for i in n0..=cond.n {
            let dev = (cond.measures[i - 1].value(set)? - phi_seq.get(i)?.eval(set)?).abs();
            *checks += 1;
            if dev >= limit {
                violations.push(ClaimAViolation {
                    set: set.to_string(),
                    index: i,
                    deviation: format(&dev),
                    k: k0,
                });
            }
        }
    }
    Ok(())
}
