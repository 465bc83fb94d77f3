//! Simple ordinal automata, finitely presented runs and their checker, and
//! the conversions to and from standard ordinal automata.

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::BitSet;
use crate::ordinal::Ordinal;

pub type LimitPredicate = Arc<dyn Fn(&BitSet, &BitSet) -> bool + Send + Sync>;
pub type SetPredicate = Arc<dyn Fn(&BitSet) -> bool + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("location {0} uses basis element {1} outside the basis")]
    LocationOutsideBasis(usize, usize),
    #[error("duplicate location {0:?}")]
    DuplicateLocation(BitSet),
    #[error("location index {0} out of range")]
    BadIndex(usize),
    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),
    #[error("the automaton has no locations")]
    NoLocations,
    #[error("{0} locations is too many for this conversion (cap {1})")]
    TooLarge(usize, usize),
    #[error("limit relation is predicate-backed; an explicit one is required")]
    NotExplicit,
    #[error("letter count does not match the number of next edges")]
    LabelingMismatch,
}

/// `δ_lim ⊆ 2^B × Q`.
#[derive(Clone)]
pub enum LimitRelation {
    Explicit(Vec<(BitSet, usize)>),
    /// Decides `(Y, q) ∈ δ_lim` given `Y` and the location bits of `q`.
    Predicate(LimitPredicate),
}

/// `𝓕 ⊆ 2^B`.
#[derive(Clone)]
pub enum AcceptSets {
    Explicit(Vec<BitSet>),
    Predicate(SetPredicate),
}

impl fmt::Debug for LimitRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitRelation::Explicit(v) => f.debug_tuple("Explicit").field(v).finish(),
            LimitRelation::Predicate(_) => write!(f, "Predicate(..)"),
        }
    }
}

impl fmt::Debug for AcceptSets {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcceptSets::Explicit(v) => f.debug_tuple("Explicit").field(v).finish(),
            AcceptSets::Predicate(_) => write!(f, "Predicate(..)"),
        }
    }
}

/// A letter per `δ_next` edge, for automata used as language acceptors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    pub alphabet: Vec<String>,
    pub letters: Vec<usize>,
}

/// Read access to a simple ordinal automaton. Implemented by explicit
/// automata and by the lazy views produced from formulas.
pub trait AutomatonView {
    fn basis_len(&self) -> usize;
    fn basis_label(&self, i: usize) -> String;
    fn is_location(&self, q: &BitSet) -> bool;
    fn is_initial(&self, q: &BitSet) -> bool;
    fn is_final(&self, q: &BitSet) -> bool;
    fn next_ok(&self, q: &BitSet, q2: &BitSet) -> bool;
    fn lim_ok(&self, y: &BitSet, q: &BitSet) -> bool;
    fn in_fcal(&self, y: &BitSet) -> bool;
    fn initial_locations(&self) -> Vec<BitSet>;
    fn successors(&self, q: &BitSet) -> Vec<BitSet>;
    /// Locations `q` with `(y, q) ∈ δ_lim`.
    fn limit_targets(&self, y: &BitSet) -> Vec<BitSet>;
    /// Every location, when the view can afford to list them.
    fn all_locations(&self) -> Option<Vec<BitSet>>;
    /// The basis elements that `lim_ok`, `limit_targets` and `in_fcal` read
    /// from a limit set, if not all of them. Saturation keeps only these
    /// elements of each all-set.
    fn limit_support(&self) -> Option<BitSet> {
        None
    }
}

#[derive(Clone, Debug)]
pub struct SimpleAutomaton {
    basis: Vec<String>,
    locations: Vec<BitSet>,
    index: HashMap<BitSet, usize>,
    next: Vec<(usize, usize)>,
    next_set: HashSet<(usize, usize)>,
    succ: Vec<Vec<usize>>,
    labeling: Option<Labeling>,
    lim: LimitRelation,
    lim_index: HashMap<BitSet, Vec<usize>>,
    initial: Vec<bool>,
    finals: Vec<bool>,
    fcal: AcceptSets,
    fcal_set: HashSet<BitSet>,
}

impl SimpleAutomaton {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        basis: Vec<String>,
        locations: Vec<BitSet>,
        next: Vec<(usize, usize)>,
        lim: LimitRelation,
        initial: Vec<usize>,
        finals: Vec<usize>,
        fcal: AcceptSets,
    ) -> Result<Self, AutomatonError> {
        if locations.is_empty() {
            return Err(AutomatonError::NoLocations);
        }
        let n = locations.len();
        let mut index = HashMap::with_capacity_and_hasher(n, Default::default());
        for (i, q) in locations.iter().enumerate() {
            if let Some(b) = q.iter().find(|&b| b >= basis.len()) {
                return Err(AutomatonError::LocationOutsideBasis(i, b));
            }
            if index.insert(q.clone(), i).is_some() {
                return Err(AutomatonError::DuplicateLocation(q.clone()));
            }
        }
        let check = |i: usize| if i < n { Ok(()) } else { Err(AutomatonError::BadIndex(i)) };
        let mut succ = vec![Vec::new(); n];
        let mut next_set = HashSet::default();
        for &(a, b) in &next {
            check(a)?;
            check(b)?;
            if next_set.insert((a, b)) {
                succ[a].push(b);
            }
        }
        let mut lim_index: HashMap<BitSet, Vec<usize>> = HashMap::default();
        if let LimitRelation::Explicit(pairs) = &lim {
            for (y, q) in pairs {
                check(*q)?;
                let e = lim_index.entry(y.clone()).or_default();
                if !e.contains(q) {
                    e.push(*q);
                }
            }
        }
        let mut init = vec![false; n];
        for &i in &initial {
            check(i)?;
            init[i] = true;
        }
        let mut fin = vec![false; n];
        for &i in &finals {
            check(i)?;
            fin[i] = true;
        }
        let fcal_set = match &fcal {
            AcceptSets::Explicit(v) => v.iter().cloned().collect(),
            AcceptSets::Predicate(_) => HashSet::default(),
        };
        Ok(SimpleAutomaton {
            basis,
            locations,
            index,
            next,
            next_set,
            succ,
            labeling: None,
            lim,
            lim_index,
            initial: init,
            finals: fin,
            fcal,
            fcal_set,
        })
    }

    pub fn with_labeling(mut self, labeling: Labeling) -> Result<Self, AutomatonError> {
        if labeling.letters.len() != self.next.len()
            || labeling.letters.iter().any(|&l| l >= labeling.alphabet.len())
        {
            return Err(AutomatonError::LabelingMismatch);
        }
        self.labeling = Some(labeling);
        Ok(self)
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn locations(&self) -> &[BitSet] {
        &self.locations
    }

    pub fn location_index(&self, q: &BitSet) -> Option<usize> {
        self.index.get(q).copied()
    }

    pub fn next_edges(&self) -> &[(usize, usize)] {
        &self.next
    }

    pub fn labeling(&self) -> Option<&Labeling> {
        self.labeling.as_ref()
    }

    pub fn limit_relation(&self) -> &LimitRelation {
        &self.lim
    }

    pub fn accept_sets(&self) -> &AcceptSets {
        &self.fcal
    }

    pub fn initial_indices(&self) -> Vec<usize> {
        (0..self.locations.len()).filter(|&i| self.initial[i]).collect()
    }

    pub fn final_indices(&self) -> Vec<usize> {
        (0..self.locations.len()).filter(|&i| self.finals[i]).collect()
    }
}

impl AutomatonView for SimpleAutomaton {
    fn basis_len(&self) -> usize {
        self.basis.len()
    }

    fn basis_label(&self, i: usize) -> String {
        self.basis[i].clone()
    }

    fn is_location(&self, q: &BitSet) -> bool {
        self.index.contains_key(q)
    }

    fn is_initial(&self, q: &BitSet) -> bool {
        self.location_index(q).is_some_and(|i| self.initial[i])
    }

    fn is_final(&self, q: &BitSet) -> bool {
        self.location_index(q).is_some_and(|i| self.finals[i])
    }

    fn next_ok(&self, q: &BitSet, q2: &BitSet) -> bool {
        match (self.location_index(q), self.location_index(q2)) {
            (Some(a), Some(b)) => self.next_set.contains(&(a, b)),
            _ => false,
        }
    }

    fn lim_ok(&self, y: &BitSet, q: &BitSet) -> bool {
        let Some(i) = self.location_index(q) else {
            return false;
        };
        match &self.lim {
            LimitRelation::Explicit(_) => self.lim_index.get(y).is_some_and(|v| v.contains(&i)),
            LimitRelation::Predicate(p) => p(y, q),
        }
    }

    fn in_fcal(&self, y: &BitSet) -> bool {
        match &self.fcal {
            AcceptSets::Explicit(_) => self.fcal_set.contains(y),
            AcceptSets::Predicate(p) => p(y),
        }
    }

    fn initial_locations(&self) -> Vec<BitSet> {
        self.initial_indices()
            .into_iter()
            .map(|i| self.locations[i].clone())
            .collect()
    }

    fn successors(&self, q: &BitSet) -> Vec<BitSet> {
        self.location_index(q)
            .map(|i| self.succ[i].iter().map(|&j| self.locations[j].clone()).collect())
            .unwrap_or_default()
    }

    fn limit_targets(&self, y: &BitSet) -> Vec<BitSet> {
        match &self.lim {
            LimitRelation::Explicit(_) => self
                .lim_index
                .get(y)
                .map(|v| v.iter().map(|&j| self.locations[j].clone()).collect())
                .unwrap_or_default(),
            LimitRelation::Predicate(p) => {
                self.locations.iter().filter(|q| p(y, q)).cloned().collect()
            }
        }
    }

    fn all_locations(&self) -> Option<Vec<BitSet>> {
        Some(self.locations.clone())
    }
}

/// A finitely presented transfinite run. `Concat` places its parts one
/// after another; `Omega` repeats its body ω times. Whatever follows an
/// `Omega` inside a `Concat` sits at the limit position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RunExpr {
    Word(Vec<BitSet>),
    Concat(Vec<RunExpr>),
    Omega(Box<RunExpr>),
}

impl RunExpr {
    pub fn single(q: BitSet) -> RunExpr {
        RunExpr::Word(vec![q])
    }

    pub fn omega(body: RunExpr) -> RunExpr {
        RunExpr::Omega(Box::new(body))
    }

    /// Concatenation that flattens nested `Concat`s and merges adjacent words.
    pub fn concat<I: IntoIterator<Item = RunExpr>>(parts: I) -> RunExpr {
        let mut out: Vec<RunExpr> = Vec::new();
        let push = |e: RunExpr, out: &mut Vec<RunExpr>| match (out.last_mut(), e) {
            (Some(RunExpr::Word(prev)), RunExpr::Word(w)) => prev.extend(w),
            (_, e) => out.push(e),
        };
        for p in parts {
            match p {
                RunExpr::Concat(inner) => {
                    for e in inner {
                        push(e, &mut out);
                    }
                }
                RunExpr::Word(w) if w.is_empty() => {}
                e => push(e, &mut out),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            RunExpr::Concat(out)
        }
    }

    /// Number of expression nodes.
    pub fn node_count(&self) -> usize {
        match self {
            RunExpr::Word(_) => 1,
            RunExpr::Concat(v) => 1 + v.iter().map(RunExpr::node_count).sum::<usize>(),
            RunExpr::Omega(b) => 1 + b.node_count(),
        }
    }

    /// Applies `f` to every location, keeping the shape.
    pub fn map_locations(&self, f: &mut impl FnMut(&BitSet) -> BitSet) -> RunExpr {
        match self {
            RunExpr::Word(w) => RunExpr::Word(w.iter().map(&mut *f).collect()),
            RunExpr::Concat(v) => RunExpr::Concat(v.iter().map(|e| e.map_locations(f)).collect()),
            RunExpr::Omega(b) => RunExpr::Omega(Box::new(b.map_locations(f))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RunEnd {
    /// Successor length: the last location.
    Last(BitSet),
    /// Limit length: `B_lim`.
    Limit(BitSet),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunAttrs {
    pub length: Ordinal,
    pub first: BitSet,
    pub end: RunEnd,
    pub all: BitSet,
}

impl RunAttrs {
    /// `⟨first, all, last⟩` for successor-length runs.
    pub fn abstraction(&self) -> Option<(BitSet, BitSet, BitSet)> {
        match &self.end {
            RunEnd::Last(q) => Some((self.first.clone(), self.all.clone(), q.clone())),
            RunEnd::Limit(_) => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RunError {
    #[error("empty word at {0}")]
    EmptyWord(String),
    #[error("empty concatenation at {0}")]
    EmptyConcat(String),
    #[error("{loc:?} at {path} is not a location")]
    NotALocation { path: String, loc: BitSet },
    #[error("next-step junction at {path}: {from:?} -> {to:?} is not in δ_next")]
    BadNext { path: String, from: BitSet, to: BitSet },
    #[error("limit junction at {path}: ({blim:?}, {to:?}) is not in δ_lim")]
    BadLimit { path: String, blim: BitSet, to: BitSet },
    #[error("ordinal length overflow")]
    Overflow,
}

/// Attributes of a structurally well-formed run, without consulting any
/// automaton.
pub fn run_attrs(r: &RunExpr) -> Result<RunAttrs, RunError> {
    walk(r, "root".to_string(), &mut |_| Ok(()))
}

enum Check<'a> {
    Loc(&'a str, &'a BitSet),
    Junction(&'a str, &'a RunEnd, &'a BitSet),
}

fn walk(
    r: &RunExpr,
    path: String,
    check: &mut impl FnMut(Check<'_>) -> Result<(), RunError>,
) -> Result<RunAttrs, RunError> {
    match r {
        RunExpr::Word(w) => {
            let Some(first) = w.first() else {
                return Err(RunError::EmptyWord(path));
            };
            let mut all = first.clone();
            for (i, q) in w.iter().enumerate() {
                check(Check::Loc(&format!("{path}.{i}"), q))?;
                if i > 0 {
                    let end = RunEnd::Last(w[i - 1].clone());
                    check(Check::Junction(&format!("{path}.{}->{i}", i - 1), &end, q))?;
                    all = all.intersection(q);
                }
            }
            Ok(RunAttrs {
                length: Ordinal::finite(w.len() as u64),
                first: first.clone(),
                end: RunEnd::Last(w.last().unwrap().clone()),
                all,
            })
        }
        RunExpr::Concat(parts) => {
            let mut acc: Option<RunAttrs> = None;
            for (i, p) in parts.iter().enumerate() {
                let a = walk(p, format!("{path}.{i}"), check)?;
                acc = Some(match acc {
                    None => a,
                    Some(prev) => {
                        check(Check::Junction(&format!("{path}.{}->{i}", i - 1), &prev.end, &a.first))?;
                        RunAttrs {
                            length: prev.length.checked_add(&a.length).ok_or(RunError::Overflow)?,
                            first: prev.first,
                            end: a.end,
                            all: prev.all.intersection(&a.all),
                        }
                    }
                });
            }
            acc.ok_or(RunError::EmptyConcat(path))
        }
        RunExpr::Omega(body) => {
            let a = walk(body, format!("{path}.body"), check)?;
            check(Check::Junction(&format!("{path}.loop"), &a.end, &a.first))?;
            Ok(RunAttrs {
                length: a.length.mul_omega(),
                first: a.first,
                end: RunEnd::Limit(a.all.clone()),
                all: a.all,
            })
        }
    }
}

/// Checks every junction of `r` against `a`'s transition relations and
/// returns the run's attributes. Errors name the first failing junction.
pub fn validate_run<A: AutomatonView + ?Sized>(a: &A, r: &RunExpr) -> Result<RunAttrs, RunError> {
    walk(r, "root".to_string(), &mut |c| match c {
        Check::Loc(path, q) => {
            if a.is_location(q) {
                Ok(())
            } else {
                Err(RunError::NotALocation { path: path.to_string(), loc: q.clone() })
            }
        }
        Check::Junction(path, RunEnd::Last(from), to) => {
            if a.next_ok(from, to) {
                Ok(())
            } else {
                Err(RunError::BadNext { path: path.to_string(), from: from.clone(), to: to.clone() })
            }
        }
        Check::Junction(path, RunEnd::Limit(blim), to) => {
            if a.lim_ok(blim, to) {
                Ok(())
            } else {
                Err(RunError::BadLimit { path: path.to_string(), blim: blim.clone(), to: to.clone() })
            }
        }
    })
}

/// Acceptance of a run whose attributes came from `validate_run`.
pub fn is_accepting<A: AutomatonView + ?Sized>(a: &A, attrs: &RunAttrs) -> bool {
    a.is_initial(&attrs.first)
        && match &attrs.end {
            RunEnd::Last(q) => a.is_final(q),
            RunEnd::Limit(b) => a.in_fcal(b),
        }
}

/// Same first location, same kind of end with equal last location or
/// `B_lim`, and equal all-sets.
pub fn congruent(r1: &RunExpr, r2: &RunExpr) -> Result<bool, RunError> {
    let a = run_attrs(r1)?;
    let b = run_attrs(r2)?;
    Ok(a.first == b.first && a.end == b.end && a.all == b.all)
}

/// An ordinal automaton over locations `0..num_locations` whose limit
/// transitions read the set of cofinally visited locations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardAutomaton {
    pub alphabet: Vec<String>,
    pub num_locations: usize,
    /// `(q, letter, q')`.
    pub next: Vec<(usize, usize, usize)>,
    pub lim: Vec<(BitSet, usize)>,
    pub initial: BitSet,
    pub finals: BitSet,
    pub fcal: Vec<BitSet>,
}

/// Largest location count for which subsets of `Q` are enumerated.
pub const MAX_SUBSET_LOCATIONS: usize = 16;

/// Cap on `|Q|` in `standard_to_simple`, whose basis is `2^Q`.
pub const MAX_STANDARD_LOCATIONS: usize = 12;

/// `(Y, q) ∈ δ'_lim` iff some `(Z, q) ∈ δ_lim` has `Z ⊆ q'` for every
/// `q' ∈ Y` and every `a ∉ Z` missing from some `q' ∈ Y`. `Y` ranges over
/// nonempty sets, as cofinal sets always are. `𝓕'` holds the nonempty `Y`
/// whose intersection is in `𝓕`. Unlabeled automata read a one-letter
/// alphabet.
pub fn simple_to_standard(a: &SimpleAutomaton) -> Result<StandardAutomaton, AutomatonError> {
    let LimitRelation::Explicit(lim) = a.limit_relation() else {
        return Err(AutomatonError::NotExplicit);
    };
    let n = a.locations().len();
    if n > MAX_SUBSET_LOCATIONS {
        return Err(AutomatonError::TooLarge(n, MAX_SUBSET_LOCATIONS));
    }
    let basis_len = a.basis_len();
    let (alphabet, letters) = match a.labeling() {
        Some(l) => (l.alphabet.clone(), l.letters.clone()),
        None => (vec!["a".to_string()], vec![0; a.next_edges().len()]),
    };
    let next = a
        .next_edges()
        .iter()
        .zip(letters)
        .map(|(&(q, q2), l)| (q, l, q2))
        .collect();
    let mut lim_out = Vec::new();
    let mut fcal = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let y: Vec<&BitSet> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &a.locations()[i])
            .collect();
        let ymask = BitSet::from_indices((0..n).filter(|i| mask & (1 << i) != 0));
        for (z, q) in lim {
            let below_all = y.iter().all(|q2| z.is_subset(q2));
            let sharp = (0..basis_len)
                .filter(|&b| !z.contains(b))
                .all(|b| y.iter().any(|q2| !q2.contains(b)));
            if below_all && sharp && !lim_out.contains(&(ymask.clone(), *q)) {
                lim_out.push((ymask.clone(), *q));
            }
        }
        let meet = y
            .iter()
            .skip(1)
            .fold(y[0].clone(), |acc, q2| acc.intersection(q2));
        if a.in_fcal(&meet) {
            fcal.push(ymask);
        }
    }
    Ok(StandardAutomaton {
        alphabet,
        num_locations: n,
        next,
        lim: lim_out,
        initial: a.initial_indices().into_iter().collect(),
        finals: a.final_indices().into_iter().collect(),
        fcal,
    })
}

/// Basis `2^Q`: basis element `m` is the subset of `Q` with bitmask `m`.
/// Location `q` becomes `{Y : q ∈ Y}`; a limit transition on `Y` becomes
/// one on `{a : Y ⊆ a}`, and so do the sets of `𝓕`.
pub fn standard_to_simple(s: &StandardAutomaton) -> Result<SimpleAutomaton, AutomatonError> {
    let n = s.num_locations;
    if n == 0 {
        return Err(AutomatonError::NoLocations);
    }
    if n > MAX_STANDARD_LOCATIONS {
        return Err(AutomatonError::TooLarge(n, MAX_STANDARD_LOCATIONS));
    }
    let width = 1usize << n;
    let mask_of = |y: &BitSet| y.iter().fold(0usize, |m, i| m | (1 << i));
    let lift = |y: &BitSet| -> BitSet {
        let ym = mask_of(y);
        (0..width).filter(|&a| a & ym == ym).collect()
    };
    let basis = (0..width)
        .map(|m| {
            let names: Vec<String> = (0..n).filter(|i| m & (1 << i) != 0).map(|i| format!("q{i}")).collect();
            format!("{{{}}}", names.join(","))
        })
        .collect();
    let locations = (0..n)
        .map(|q| (0..width).filter(|&a| a & (1 << q) != 0).collect())
        .collect();
    for &(q, l, q2) in &s.next {
        if q >= n || q2 >= n || l >= s.alphabet.len() {
            return Err(AutomatonError::BadIndex(q.max(q2)));
        }
    }
    let next = s.next.iter().map(|&(q, _, q2)| (q, q2)).collect();
    let letters = s.next.iter().map(|&(_, l, _)| l).collect();
    let lim = s.lim.iter().map(|(y, q)| (lift(y), *q)).collect();
    let fcal = s.fcal.iter().map(lift).collect();
    SimpleAutomaton::new(
        basis,
        locations,
        next,
        LimitRelation::Explicit(lim),
        s.initial.iter().collect(),
        s.finals.iter().collect(),
        AcceptSets::Explicit(fcal),
    )?
    .with_labeling(Labeling {
        alphabet: s.alphabet.clone(),
        letters,
    })
}
