use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use chargext::approx::{approx_run, certificate_delta, lep_pair_check, upper_o, Bound, OBoundTable, RunConfig};
use chargext::extend::{sc, transport, TransportInstance};
use chargext::fuzz::Fuzzer;
use chargext::lpcore::{best_approx, min_norm_common_extension};
use chargext::rational::{abs_sum, format, int, max_of};
use chargext::{AtomSet, Limits, Rational, SignedMeasure, Subalgebra};

use crate::instance::Instance;
use crate::CliError;

/// Resolved command parameters.
#[derive(Debug, Default)]
pub struct Settings {
    pub r: Option<Rational>,
    pub n_max: Option<usize>,
    pub epsilon: Option<Rational>,
    pub n: Option<usize>,
    pub seed: u64,
    pub limits: Limits,
}

impl Settings {
    pub fn to_json(&self) -> Value {
        let mut m = BTreeMap::new();
        if let Some(r) = &self.r {
            m.insert("r", json!(format(r)));
        }
        if let Some(n) = self.n_max {
            m.insert("n_max", json!(n));
        }
        if let Some(e) = &self.epsilon {
            m.insert("epsilon", json!(format(e)));
        }
        if let Some(n) = self.n {
            m.insert("n", json!(n));
        }
        m.insert("cap_blocks", json!(self.limits.max_exact_blocks));
        json!(m)
    }

    fn r(&self) -> Result<&Rational, CliError> {
        self.r.as_ref().ok_or_else(|| CliError::Parse("missing norm parameter r (--r or params.r)".into()))
    }
}

pub struct Outcome {
    pub summary: String,
    pub result: Value,
    /// Exit code for a completed run: 0, or 5 when a bound came out
    /// infinite, or 1 for a failing self-test.
    pub code: i32,
}

impl Outcome {
    fn ok(summary: String, result: Value) -> Outcome {
        Outcome { summary, result, code: 0 }
    }
}

fn arg<'a>(args: &'a [String], i: usize, what: &str) -> Result<&'a str, CliError> {
    args.get(i)
        .map(String::as_str)
        .ok_or_else(|| CliError::Parse(format!("missing argument {}: {what}", i + 1)))
}

fn fmt_all(values: &[Rational]) -> Vec<String> {
    values.iter().map(format).collect()
}

fn blocks_json(alg: &Subalgebra) -> Vec<Vec<usize>> {
    alg.blocks().iter().map(|b| b.to_vec()).collect()
}

fn measure_json(mu: &SignedMeasure) -> Value {
    json!({ "blocks": blocks_json(mu.domain()), "values": fmt_all(mu.values()), "norm": format(&mu.norm()) })
}

pub fn run_sc(inst: &Instance, args: &[String], s: &Settings) -> Result<Outcome, CliError> {
    let nu1 = inst.measure(arg(args, 0, "first measure")?)?;
    let nu2 = inst.measure(arg(args, 1, "second measure")?)?;
    let (value, cert) = sc(nu1, nu2, &s.limits)?;
    let chain: Vec<String> = cert.chain.iter().map(AtomSet::to_string).collect();
    let summary = format!("sc = {}\nchain: {}", format(&value), chain.join(" < "));
    Ok(Outcome::ok(summary, json!({ "value": format(&value), "chain": cert })))
}

pub fn run_extend_min(inst: &Instance, args: &[String], _: &Settings) -> Result<Outcome, CliError> {
    let nu1 = inst.measure(arg(args, 0, "first measure")?)?;
    let nu2 = inst.measure(arg(args, 1, "second measure")?)?;
    let target = args.get(2).map(|t| inst.algebra(t)).transpose()?;
    let (value, lam) = min_norm_common_extension(nu1, nu2, target)?;
    let summary = format!("least extension norm = {}\nvalues: {}", format(&value), fmt_all(lam.values()).join(" "));
    Ok(Outcome::ok(summary, json!({ "value": format(&value), "extension": measure_json(&lam) })))
}

pub fn run_transport(inst: &Instance, args: &[String], _: &Settings) -> Result<Outcome, CliError> {
    let a = inst.vector(arg(args, 0, "row marginal")?)?.clone();
    let b = inst.vector(arg(args, 1, "column marginal")?)?.clone();
    let plan = transport(&TransportInstance { a, b })?;
    let mass = abs_sum(plan.iter().flatten());
    let mut summary = format!("total variation = {}\n", format(&mass));
    for row in &plan {
        let _ = writeln!(summary, "  {}", fmt_all(row).join("\t"));
    }
    let rows: Vec<Vec<String>> = plan.iter().map(|r| fmt_all(r)).collect();
    Ok(Outcome::ok(summary.trim_end().to_string(), json!({ "plan": rows, "mass": format(&mass) })))
}

pub fn run_o_n(inst: &Instance, args: &[String], s: &Settings) -> Result<Outcome, CliError> {
    let alg = inst.algebra(arg(args, 0, "algebra")?)?;
    let seq = inst.sequence(arg(args, 1, "sequence")?, s.n.unwrap_or(0))?;
    let mut rows = Vec::new();
    let mut summary = String::from("n\to_n");
    for (n, phi) in seq.iter() {
        if s.n.is_some_and(|m| m != n) {
            continue;
        }
        let (v, nu) = best_approx(alg, phi, &int(1), &s.limits)?;
        let _ = write!(summary, "\n{n}\t{}", format(&v));
        rows.push(json!({ "n": n, "value": format(&v), "minimizer": measure_json(&nu) }));
    }
    Ok(Outcome::ok(summary, json!({ "entries": rows })))
}

fn indices(seq: &chargext::SetFunctionSequence, s: &Settings) -> Vec<usize> {
    match s.n {
        Some(n) => vec![n],
        None => seq.indices().collect(),
    }
}

fn bound_text(b: &Bound) -> String {
    match b {
        Bound::Exact(v) => format(v),
        Bound::Upper(v) => format!("<= {}", format(v)),
        Bound::Infinite => "inf".into(),
    }
}

pub fn run_exact_o(inst: &Instance, args: &[String], s: &Settings) -> Result<Outcome, CliError> {
    let alg = inst.algebra(arg(args, 0, "algebra")?)?;
    let seq = inst.sequence(arg(args, 1, "sequence")?, s.n.unwrap_or(0))?;
    let r = s.r()?;
    let ns = indices(&seq, s);
    let table = OBoundTable::fill_exact(alg, &ns, &seq, r, &s.limits)?;
    let mut summary = String::from("n\tO_n");
    let mut rows = Vec::new();
    let mut infinite = false;
    for &n in &ns {
        let b = table.get(alg, n).expect("filled");
        infinite |= b.is_infinite();
        let _ = write!(summary, "\n{n}\t{}", bound_text(b));
        rows.push(json!({ "n": n, "bound": b }));
    }
    let entries: Vec<Value> = table
        .iter()
        .map(|(n, a, b)| json!({ "n": n, "blocks": blocks_json(a), "bound": b }))
        .collect();
    Ok(Outcome {
        summary,
        result: json!({ "bounds": rows, "table": entries }),
        code: if infinite { 5 } else { 0 },
    })
}

pub fn run_upper_o(inst: &Instance, args: &[String], s: &Settings) -> Result<Outcome, CliError> {
    let alg = inst.algebra(arg(args, 0, "algebra")?)?;
    let seq = inst.sequence(arg(args, 1, "sequence")?, s.n.unwrap_or(0))?;
    let r = s.r()?;
    let eps = s
        .epsilon
        .as_ref()
        .ok_or_else(|| CliError::Parse("missing epsilon (--epsilon or params.epsilon)".into()))?;
    let delta = certificate_delta(alg.num_blocks(), r, eps);
    let ns = indices(&seq, s);
    let proper = alg.proper_subalgebras(s.limits.max_enum_blocks)?;
    let mut table = OBoundTable::new(r.clone());
    for c in &proper {
        table.extend_exact(c, &ns, &seq, &s.limits)?;
    }
    let mut summary = format!("certificate step = {}\nn\to_n\tproper max\tcertified", format(&delta));
    let mut rows = Vec::new();
    for &n in &ns {
        let (o, _) = best_approx(alg, seq.get(n)?, &int(1), &s.limits)?;
        let bounds: Option<Vec<Rational>> = proper
            .iter()
            .map(|c| table.get(c, n).and_then(|b| b.finite().cloned()))
            .collect();
        let certified = bounds.as_ref().and_then(|b| upper_o(alg, &o, b, r, eps));
        let proper_max = match &bounds {
            Some(b) => max_of(b.iter().cloned()).map(|v| format(&v)).unwrap_or_else(|| "-".into()),
            None => "inf".into(),
        };
        let cert_text = certified.as_ref().map(|v| format!("<= {}", format(v))).unwrap_or_else(|| "no".into());
        let _ = write!(summary, "\n{n}\t{}\t{proper_max}\t{cert_text}", format(&o));
        rows.push(json!({
            "n": n,
            "o": format(&o),
            "proper_max": proper_max,
            "certified": certified.map(|v| format(&v)),
        }));
    }
    Ok(Outcome::ok(summary, json!({ "delta": format(&delta), "entries": rows })))
}

pub fn run_lep_check(inst: &Instance, args: &[String], s: &Settings) -> Result<Outcome, CliError> {
    let b1 = inst.algebra(arg(args, 0, "first algebra")?)?;
    let b2 = inst.algebra(arg(args, 1, "second algebra")?)?;
    let r = s.r()?;
    let v = lep_pair_check(b1, b2, r, &s.limits)?;
    let mut summary = format!("holds at r = {}: {}\nmax sc = {}", format(r), v.holds, format(&v.max_sc));
    if let Some((w1, w2)) = &v.witness {
        let _ = write!(
            summary,
            "\nwitness: ({}) / ({})",
            fmt_all(w1.values()).join(", "),
            fmt_all(w2.values()).join(", ")
        );
    }
    Ok(Outcome::ok(summary, serde_json::to_value(&v).expect("serializable")))
}

pub fn run_approx(inst: &Instance, args: &[String], s: &Settings) -> Result<Outcome, CliError> {
    let family = inst.family(arg(args, 0, "family")?)?;
    let seq = inst.sequence(arg(args, 1, "sequence")?, 1)?;
    let n_max = s
        .n_max
        .or_else(|| seq.indices().max())
        .ok_or_else(|| CliError::Parse("missing n_max".into()))?;
    let tracked: Vec<AtomSet> = match args.get(2) {
        Some(name) => inst.set_list(name)?.clone(),
        None => {
            let mut top = Subalgebra::trivial(inst.universe);
            for m in &family {
                top = top.join(&m.algebra())?;
            }
            top.blocks().to_vec()
        }
    };
    let mut cfg = RunConfig::new(s.r()?.clone(), n_max);
    cfg.limits = s.limits;
    let report = approx_run(&family, &seq, &tracked, &cfg)?;
    let mut summary = format!(
        "{} stages, {} tracked-set checks, {} violations\nn\tnorm",
        report.o_bound_trail.len(),
        report.claim_a_checks,
        report.claim_a_violations.len()
    );
    for m in &report.measures {
        let _ = write!(summary, "\n{}\t{}", m.n, m.norm);
    }
    for (set, devs) in &report.deviations {
        let _ = write!(summary, "\n{set}\tlast deviation {}", devs.last().map(String::as_str).unwrap_or("-"));
    }
    Ok(Outcome::ok(summary, serde_json::to_value(&report).expect("serializable")))
}

pub fn run_selftest(s: &Settings) -> Outcome {
    let mut f = Fuzzer::new(s.seed);
    let trials = 200;
    let mut chain_fail = 0;
    for _ in 0..trials {
        let (nu1, nu2) = f.consistent_pair(2, 6, 12);
        let same = match (sc(&nu1, &nu2, &s.limits), min_norm_common_extension(&nu1, &nu2, None)) {
            (Ok((a, _)), Ok((b, _))) => a == b,
            _ => false,
        };
        if !same {
            chain_fail += 1;
        }
    }
    let mut tr_fail = 0;
    for t in 0..trials {
        let inst = f.transport_instance(6, t % 2 == 0);
        let ok = transport(&inst).is_ok_and(|x| {
            x.iter().zip(&inst.a).all(|(row, a)| row.iter().sum::<Rational>() == *a)
                && (0..inst.b.len()).all(|j| x.iter().map(|row| row[j].clone()).sum::<Rational>() == inst.b[j])
                && abs_sum(x.iter().flatten()) <= abs_sum(&inst.a).max(abs_sum(&inst.b))
        });
        if !ok {
            tr_fail += 1;
        }
    }
    let line = |name: &str, fail: usize| {
        format!("{name}: {} passed, {fail} failed", trials - fail)
    };
    Outcome {
        summary: format!("{}\n{}", line("chain functional = least extension norm", chain_fail), line("transport", tr_fail)),
        result: json!({
            "seed": s.seed,
            "chain": { "cases": trials, "failures": chain_fail },
            "transport": { "cases": trials, "failures": tr_fail },
        }),
        code: if chain_fail + tr_fail == 0 { 0 } else { 1 },
    }
}
