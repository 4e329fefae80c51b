//! Instance files: named algebras, measures, tables, sequences and vectors
//! over one atom universe.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use chargext::approx::FamilyMember;
use chargext::boolalg::cylinder_algebra;
use chargext::rational::{format, parse};
use chargext::{AdAlgebra, AtomSet, AtomUniverse, Limits, Rational, SetFunctionSequence, SetFunctionTable, SignedMeasure, Subalgebra};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum RawAlgebra {
    Blocks(Vec<Vec<usize>>),
    Generators(Vec<Vec<usize>>),
    Cylinder { d: usize, coords: Vec<usize> },
    Ad { prefix: usize, generators: Vec<Vec<usize>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMeasure {
    pub algebra: String,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTable {
    pub algebra: String,
    /// Keyed by the element as a sorted atom list, e.g. `"[0,2]"`.
    pub values: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEntry {
    pub n: usize,
    pub table: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_blocks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInstance {
    pub universe: usize,
    #[serde(default)]
    pub algebras: BTreeMap<String, RawAlgebra>,
    #[serde(default)]
    pub measures: BTreeMap<String, RawMeasure>,
    #[serde(default)]
    pub tables: BTreeMap<String, RawTable>,
    #[serde(default)]
    pub sequences: BTreeMap<String, Vec<RawEntry>>,
    #[serde(default)]
    pub vectors: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub families: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub sets: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(default)]
    pub params: Params,
}

/// A loaded and validated instance. `raw` is the canonical form written back
/// into certificates.
pub struct Instance {
    pub raw: RawInstance,
    pub universe: AtomUniverse,
    pub algebras: BTreeMap<String, (Subalgebra, Option<AdAlgebra>)>,
    pub measures: BTreeMap<String, SignedMeasure>,
    pub tables: BTreeMap<String, SetFunctionTable>,
    pub sequences: BTreeMap<String, SetFunctionSequence>,
    pub vectors: BTreeMap<String, Vec<Rational>>,
    pub sets: BTreeMap<String, Vec<AtomSet>>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

fn atoms(list: &[usize]) -> Result<AtomSet, CliError> {
    AtomSet::from_atoms(list.iter().copied()).map_err(|e| bad(e.to_string()))
}

fn canonical_list(list: &[usize]) -> Result<Vec<usize>, CliError> {
    Ok(atoms(list)?.to_vec())
}

fn rational(text: &str, what: &str) -> Result<Rational, CliError> {
    parse(text).map_err(|e| bad(format!("{what}: {e}")))
}

pub fn canonical_rational(text: &str, what: &str) -> Result<String, CliError> {
    Ok(format(&rational(text, what)?))
}

fn element_key(key: &str, what: &str) -> Result<AtomSet, CliError> {
    let list: Vec<usize> = serde_json::from_str(key).map_err(|_| bad(format!("{what}: bad element key {key:?}")))?;
    atoms(&list)
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, name: &str, kind: &str) -> Result<&'a T, CliError> {
    map.get(name).ok_or_else(|| bad(format!("unknown {kind} {name:?}")))
}

/// Strips a certificate wrapper, if any, and parses the instance.
pub fn parse_document(text: &str) -> Result<RawInstance, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(format!("invalid JSON: {e}")))?;
    let inner = match value {
        serde_json::Value::Object(mut map) if map.contains_key("instance") => map.remove("instance").unwrap(),
        other => other,
    };
    serde_json::from_value(inner).map_err(|e| bad(format!("invalid instance: {e}")))
}

impl Instance {
    pub fn load(raw: RawInstance, limits: &Limits) -> Result<Instance, CliError> {
        let universe = AtomUniverse::new(raw.universe).map_err(|e| bad(e.to_string()))?;
        let check = |set: AtomSet, what: &str| universe.check(set).map_err(|e| bad(format!("{what}: {e}")));
        let mut canon = raw.clone();

        let mut algebras = BTreeMap::new();
        for (name, spec) in &raw.algebras {
            let what = format!("algebra {name:?}");
            let lists = |ls: &[Vec<usize>]| -> Result<Vec<AtomSet>, CliError> {
                ls.iter().map(|l| atoms(l).and_then(|s| check(s, &what).map(|_| s))).collect()
            };
            let err = |e: chargext::Error| bad(format!("{what}: {e}"));
            let (alg, ad, canonical) = match spec {
                RawAlgebra::Blocks(bs) => {
                    let alg = Subalgebra::from_blocks(universe, lists(bs)?).map_err(err)?;
                    let canonical = RawAlgebra::Blocks(alg.blocks().iter().map(|b| b.to_vec()).collect());
                    (alg, None, canonical)
                }
                RawAlgebra::Generators(gs) => {
                    let alg = Subalgebra::generated(universe, &lists(gs)?).map_err(err)?;
                    let canonical = RawAlgebra::Generators(gs.iter().map(|g| canonical_list(g)).collect::<Result<_, _>>()?);
                    (alg, None, canonical)
                }
                RawAlgebra::Cylinder { d, coords } => {
                    let alg = cylinder_algebra(*d, coords).map_err(err)?;
                    if alg.universe() != universe {
                        return Err(bad(format!("{what}: cylinder over 2^{d} atoms in a universe of {}", raw.universe)));
                    }
                    let mut coords = coords.clone();
                    coords.sort_unstable();
                    coords.dedup();
                    (alg, None, RawAlgebra::Cylinder { d: *d, coords })
                }
                RawAlgebra::Ad { prefix, generators } => {
                    let ad = AdAlgebra::new(universe, *prefix, lists(generators)?).map_err(err)?;
                    let canonical = RawAlgebra::Ad {
                        prefix: *prefix,
                        generators: ad.generators().iter().map(|g| g.to_vec()).collect(),
                    };
                    (ad.algebra(), Some(ad), canonical)
                }
            };
            canon.algebras.insert(name.clone(), canonical);
            algebras.insert(name.clone(), (alg, ad));
        }

        let mut measures = BTreeMap::new();
        for (name, m) in &raw.measures {
            let what = format!("measure {name:?}");
            let (alg, _) = lookup(&algebras, &m.algebra, "algebra")?;
            let values: Vec<Rational> = m.values.iter().map(|v| rational(v, &what)).collect::<Result<_, _>>()?;
            let mu = SignedMeasure::new(alg.clone(), values).map_err(|e| bad(format!("{what}: {e}")))?;
            canon.measures.get_mut(name).unwrap().values = mu.values().iter().map(format).collect();
            measures.insert(name.clone(), mu);
        }

        let mut tables = BTreeMap::new();
        for (name, t) in &raw.tables {
            let what = format!("table {name:?}");
            let (alg, _) = lookup(&algebras, &t.algebra, "algebra")?;
            let mut entries = BTreeMap::new();
            for (k, v) in &t.values {
                let set = element_key(k, &what)?;
                if entries.insert(set, rational(v, &what)?).is_some() {
                    return Err(bad(format!("{what}: element {set} listed twice")));
                }
            }
            let table = SetFunctionTable::new(alg.clone(), entries.clone(), limits).map_err(|e| bad(format!("{what}: {e}")))?;
            canon.tables.get_mut(name).unwrap().values = entries.iter().map(|(s, v)| (s.to_string(), format(v))).collect();
            tables.insert(name.clone(), table);
        }

        let mut sequences = BTreeMap::new();
        for (name, entries) in &raw.sequences {
            let list = entries
                .iter()
                .map(|e| Ok((e.n, lookup(&tables, &e.table, "table")?.clone())))
                .collect::<Result<Vec<_>, CliError>>()?;
            let seq = SetFunctionSequence::new(list).map_err(|e| bad(format!("sequence {name:?}: {e}")))?;
            sequences.insert(name.clone(), seq);
        }
        for list in canon.sequences.values_mut() {
            list.sort_by_key(|e| e.n);
        }

        let mut vectors = BTreeMap::new();
        for (name, v) in &raw.vectors {
            let what = format!("vector {name:?}");
            let values: Vec<Rational> = v.iter().map(|x| rational(x, &what)).collect::<Result<_, _>>()?;
            canon.vectors.insert(name.clone(), values.iter().map(format).collect());
            vectors.insert(name.clone(), values);
        }

        for (name, members) in &raw.families {
            for m in members {
                lookup(&algebras, m, "algebra").map_err(|e| bad(format!("family {name:?}: {e}")))?;
            }
        }

        let mut sets = BTreeMap::new();
        for (name, list) in &raw.sets {
            let what = format!("set list {name:?}");
            let parsed: Vec<AtomSet> = list
                .iter()
                .map(|l| atoms(l).and_then(|s| check(s, &what).map(|_| s)))
                .collect::<Result<_, _>>()?;
            canon.sets.insert(name.clone(), parsed.iter().map(|s| s.to_vec()).collect());
            sets.insert(name.clone(), parsed);
        }

        for (field, value) in [("r", &mut canon.params.r), ("epsilon", &mut canon.params.epsilon)] {
            if let Some(v) = value {
                *v = canonical_rational(v, &format!("param {field}"))?;
            }
        }

        Ok(Instance {
            raw: canon,
            universe,
            algebras,
            measures,
            tables,
            sequences,
            vectors,
            sets,
        })
    }

    pub fn algebra(&self, name: &str) -> Result<&Subalgebra, CliError> {
        Ok(&lookup(&self.algebras, name, "algebra")?.0)
    }

    pub fn family(&self, name: &str) -> Result<Vec<FamilyMember>, CliError> {
        lookup(&self.raw.families, name, "family")?
            .iter()
            .map(|m| {
                let (alg, ad) = &self.algebras[m];
                Ok(match ad {
                    Some(ad) => FamilyMember::Ad(ad.clone()),
                    None => FamilyMember::Plain(alg.clone()),
                })
            })
            .collect()
    }

    pub fn measure(&self, name: &str) -> Result<&SignedMeasure, CliError> {
        lookup(&self.measures, name, "measure")
    }

    pub fn vector(&self, name: &str) -> Result<&Vec<Rational>, CliError> {
        lookup(&self.vectors, name, "vector")
    }

    pub fn set_list(&self, name: &str) -> Result<&Vec<AtomSet>, CliError> {
        lookup(&self.sets, name, "set list")
    }

    /// A named sequence, or a named table treated as a sequence holding it
    /// at index `default_n`.
    pub fn sequence(&self, name: &str, default_n: usize) -> Result<SetFunctionSequence, CliError> {
        if let Some(seq) = self.sequences.get(name) {
            return Ok(seq.clone());
        }
        let table = lookup(&self.tables, name, "sequence or table")?;
        SetFunctionSequence::new(vec![(default_n, table.clone())]).map_err(|e| bad(e.to_string()))
    }
}
