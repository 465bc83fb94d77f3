//! JSON formats for automata and runs.
//!
//! Automaton file:
//!
//! ```json
//! {
//!   "basis": ["a", "b"],
//!   "locations": [["a"], ["a", "b"]],
//!   "next": [[0, 1], [["a", "b"], ["a"]]],
//!   "lim": [[["a"], 0]],
//!   "initial": [0],
//!   "final": [["a"]],
//!   "fcal": [["a"]]
//! }
//! ```
//!
//! A location may be given by index or by its label array. Optional
//! `alphabet` and `letters` attach a letter to each `next` edge.
//!
//! Run file: nested arrays `["word", [[labels], ...]]`, `["concat", e, ...]`
//! and `["omega", e]`.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::automaton::{AcceptSets, AutomatonError, Labeling, LimitRelation, RunExpr, SimpleAutomaton};
use crate::bits::BitSet;

/// Cap on the number of candidate limit sets when exporting a
/// predicate-backed automaton.
pub const MAX_EXPORT_SETS: usize = 1 << 14;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),
    #[error("no location {0}")]
    UnknownLocation(String),
    #[error("malformed run expression: {0}")]
    BadRun(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("too many limit sets to export (more than {0})")]
    TooManySets(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum LocRef {
    Index(usize),
    Labels(Vec<String>),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct AutomatonFile {
    pub basis: Vec<String>,
    pub locations: Vec<Vec<String>>,
    #[serde(default)]
    pub next: Vec<(LocRef, LocRef)>,
    #[serde(default)]
    pub lim: Vec<(Vec<String>, LocRef)>,
    #[serde(default)]
    pub initial: Vec<LocRef>,
    #[serde(default, rename = "final")]
    pub finals: Vec<LocRef>,
    #[serde(default)]
    pub fcal: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub letters: Option<Vec<usize>>,
}

struct Basis<'a> {
    labels: &'a [String],
    index: HashMap<&'a str, usize>,
}

impl<'a> Basis<'a> {
    fn new(labels: &'a [String]) -> Self {
        let index = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        Basis { labels, index }
    }

    fn set(&self, names: &[String]) -> Result<BitSet, IoError> {
        names
            .iter()
            .map(|n| self.index.get(n.as_str()).copied().ok_or_else(|| IoError::UnknownLabel(n.clone())))
            .collect()
    }

    fn names(&self, s: &BitSet) -> Vec<String> {
        s.iter().map(|i| self.labels[i].clone()).collect()
    }
}

impl AutomatonFile {
    pub fn into_automaton(self) -> Result<SimpleAutomaton, IoError> {
        let basis = Basis::new(&self.basis);
        let locations: Vec<BitSet> = self
            .locations
            .iter()
            .map(|l| basis.set(l))
            .collect::<Result<_, _>>()?;
        let lookup: HashMap<&BitSet, usize> = locations.iter().enumerate().map(|(i, q)| (q, i)).collect();
        let loc = |r: &LocRef| -> Result<usize, IoError> {
            match r {
                LocRef::Index(i) => Ok(*i),
                LocRef::Labels(l) => {
                    let q = basis.set(l)?;
                    lookup.get(&q).copied().ok_or_else(|| IoError::UnknownLocation(format!("{l:?}")))
                }
            }
        };
        let next = self
            .next
            .iter()
            .map(|(a, b)| Ok((loc(a)?, loc(b)?)))
            .collect::<Result<Vec<_>, IoError>>()?;
        let lim = self
            .lim
            .iter()
            .map(|(y, q)| Ok((basis.set(y)?, loc(q)?)))
            .collect::<Result<Vec<_>, IoError>>()?;
        let initial = self.initial.iter().map(loc).collect::<Result<Vec<_>, _>>()?;
        let finals = self.finals.iter().map(loc).collect::<Result<Vec<_>, _>>()?;
        let fcal = self.fcal.iter().map(|y| basis.set(y)).collect::<Result<Vec<_>, _>>()?;
        let a = SimpleAutomaton::new(
            self.basis.clone(),
            locations,
            next,
            LimitRelation::Explicit(lim),
            initial,
            finals,
            AcceptSets::Explicit(fcal),
        )?;
        Ok(match (self.alphabet, self.letters) {
            (Some(alphabet), Some(letters)) => a.with_labeling(Labeling { alphabet, letters })?,
            (None, None) => a,
            _ => return Err(AutomatonError::LabelingMismatch.into()),
        })
    }

    /// Describes `a`. Predicate-backed limit relations and acceptance sets
    /// are tabulated over the nonempty intersections of locations, which
    /// are the only sets a run can produce as `B_lim`.
    pub fn from_automaton(a: &SimpleAutomaton) -> Result<AutomatonFile, IoError> {
        let basis = Basis::new(a.basis());
        let locs = a.locations();
        let name = |i: usize| LocRef::Labels(basis.names(&locs[i]));
        let candidates = || -> Result<Vec<BitSet>, IoError> {
            let mut seen: BTreeSet<BitSet> = locs.iter().cloned().collect();
            let mut frontier: Vec<BitSet> = seen.iter().cloned().collect();
            while let Some(y) = frontier.pop() {
                for q in locs {
                    let z = y.intersection(q);
                    if seen.insert(z.clone()) {
                        if seen.len() > MAX_EXPORT_SETS {
                            return Err(IoError::TooManySets(MAX_EXPORT_SETS));
                        }
                        frontier.push(z);
                    }
                }
            }
            Ok(seen.into_iter().collect())
        };
        let lim: Vec<(BitSet, usize)> = match a.limit_relation() {
            LimitRelation::Explicit(v) => v.clone(),
            LimitRelation::Predicate(p) => {
                let mut out = Vec::new();
                for y in candidates()? {
                    for (i, q) in locs.iter().enumerate() {
                        if p(&y, q) {
                            out.push((y.clone(), i));
                        }
                    }
                }
                out
            }
        };
        let fcal: Vec<BitSet> = match a.accept_sets() {
            AcceptSets::Explicit(v) => v.clone(),
            AcceptSets::Predicate(p) => candidates()?.into_iter().filter(|y| p(y)).collect(),
        };
        Ok(AutomatonFile {
            basis: a.basis().to_vec(),
            locations: locs.iter().map(|q| basis.names(q)).collect(),
            next: a.next_edges().iter().map(|&(i, j)| (name(i), name(j))).collect(),
            lim: lim.iter().map(|(y, q)| (basis.names(y), name(*q))).collect(),
            initial: a.initial_indices().into_iter().map(name).collect(),
            finals: a.final_indices().into_iter().map(name).collect(),
            fcal: fcal.iter().map(|y| basis.names(y)).collect(),
            alphabet: a.labeling().map(|l| l.alphabet.clone()),
            letters: a.labeling().map(|l| l.letters.clone()),
        })
    }
}

pub fn parse_automaton(text: &str) -> Result<SimpleAutomaton, IoError> {
    serde_json::from_str::<AutomatonFile>(text)?.into_automaton()
}

/// Encodes a run, naming set members by `labels`.
pub fn run_to_json(labels: &[String], r: &RunExpr) -> Value {
    let basis = Basis::new(labels);
    fn go(b: &Basis, r: &RunExpr) -> Value {
        match r {
            RunExpr::Word(w) => json!(["word", w.iter().map(|q| b.names(q)).collect::<Vec<_>>()]),
            RunExpr::Concat(parts) => {
                let mut v = vec![json!("concat")];
                v.extend(parts.iter().map(|p| go(b, p)));
                Value::Array(v)
            }
            RunExpr::Omega(body) => json!(["omega", go(b, body)]),
        }
    }
    go(&basis, r)
}

pub fn run_from_json(labels: &[String], v: &Value) -> Result<RunExpr, IoError> {
    let basis = Basis::new(labels);
    fn go(b: &Basis, v: &Value) -> Result<RunExpr, IoError> {
        let bad = |m: &str| IoError::BadRun(m.to_string());
        let arr = v.as_array().ok_or_else(|| bad("expected a tagged array"))?;
        let tag = arr.first().and_then(Value::as_str).ok_or_else(|| bad("missing tag"))?;
        match tag {
            "word" => {
                if arr.len() != 2 {
                    return Err(bad("word takes one list of locations"));
                }
                let locs: Vec<Vec<String>> = serde_json::from_value(arr[1].clone())?;
                Ok(RunExpr::Word(locs.iter().map(|l| b.set(l)).collect::<Result<_, _>>()?))
            }
            "concat" => Ok(RunExpr::Concat(
                arr[1..].iter().map(|e| go(b, e)).collect::<Result<_, _>>()?,
            )),
            "omega" => {
                if arr.len() != 2 {
                    return Err(bad("omega takes one body"));
                }
                Ok(RunExpr::Omega(Box::new(go(b, &arr[1])?)))
            }
            other => Err(IoError::BadRun(format!("unknown tag `{other}`"))),
        }
    }
    go(&basis, v)
}

pub fn parse_run(labels: &[String], text: &str) -> Result<RunExpr, IoError> {
    run_from_json(labels, &serde_json::from_str(text)?)
}
