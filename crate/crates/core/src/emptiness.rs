//! Nonemptiness of simple ordinal automata by saturating the relations
//! `R_0 ⊆ R'_0 ⊆ R_1 ⊆ R'_1 ⊆ …` of run abstractions `⟨first, all, last⟩`,
//! with witness extraction and a demand-driven top-down cross-check.

use std::collections::VecDeque;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::rc::Rc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::automaton::{AutomatonView, RunExpr};
use crate::bits::BitSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmptinessError {
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("full saturation needs an automaton that can list its locations")]
    NotEnumerable,
    #[error("stage bound {n} is out of range (at most {max})")]
    StageOutOfRange { n: usize, max: usize },
    #[error("triple is not in the table")]
    UnknownTriple,
}

/// Which locations seed stage 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    /// Every location; the table is exactly the relations `R'_i`.
    Full,
    /// Initial locations, growing along next and limit transitions. Enough
    /// for deciding nonemptiness; stages of late-discovered triples are
    /// upper bounds.
    Reachable,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub scope: Scope,
    pub max_locations: usize,
    pub max_triples: usize,
    pub max_stages: usize,
    pub timeout: Option<Duration>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            scope: Scope::Reachable,
            max_locations: 1 << 16,
            max_triples: 20_000_000,
            max_stages: 1 << 12,
            timeout: None,
        }
    }
}

impl Config {
    pub fn full() -> Self {
        Config {
            scope: Scope::Full,
            ..Config::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivation {
    /// `⟨q, q ∩ q', q'⟩` for an edge of `δ_next`.
    Base,
    /// Gluing two triples at a shared location.
    Compose(u32, u32),
    /// Prefix to `q''`, a loop on `q''` with all-set `Y`, then `(Y, q') ∈ δ_lim`.
    LimitClose { prefix: u32, looped: u32 },
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    src: u32,
    set: u32,
    dst: u32,
    stage: u32,
    deriv: Derivation,
    /// Location count of the witness tail, saturating.
    size: u64,
}

/// How a nonempty verdict was reached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    /// `q0 ∈ I ∩ F`: a run of length 1.
    InitialFinal,
    /// A triple from an initial to a final location.
    Successor,
    /// An (optional) prefix from an initial location to `q` and a loop on
    /// `q` whose all-set is in `𝓕`.
    Limit,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Empty,
    NonEmpty { witness: RunExpr, reason: Reason },
}

impl Verdict {
    pub fn is_nonempty(&self) -> bool {
        matches!(self, Verdict::NonEmpty { .. })
    }
}

/// The saturated relation with one derivation per triple. All-sets are
/// cut down to [`AutomatonView::limit_support`] when the automaton has one.
#[derive(Debug, Default)]
pub struct RelTable {
    locs: Vec<BitSet>,
    loc_ids: HashMap<BitSet, u32>,
    sets: Vec<BitSet>,
    set_ids: HashMap<BitSet, u32>,
    entries: Vec<Entry>,
    ids: HashMap<(u32, u32, u32), u32>,
    by_src: Vec<Vec<u32>>,
    by_dst: Vec<Vec<u32>>,
    /// Index of the first entry added in each stage.
    stage_start: Vec<usize>,
    scope: Option<Scope>,
}

struct Saturator<'a, A: AutomatonView + ?Sized> {
    a: &'a A,
    cfg: &'a Config,
    t: RelTable,
    started: Instant,
    /// Locations whose successors have been added as base triples.
    expanded: usize,
    lim_cache: HashMap<u32, Rc<Vec<u32>>>,
    support: Option<BitSet>,
}

impl<A: AutomatonView + ?Sized> Saturator<'_, A> {
    fn check_time(&self) -> Result<(), EmptinessError> {
        match self.cfg.timeout {
            Some(d) if self.started.elapsed() > d => {
                Err(EmptinessError::ResourceCap(format!("timeout after {} ms", d.as_millis())))
            }
            _ => Ok(()),
        }
    }

    fn loc(&mut self, q: BitSet) -> Result<u32, EmptinessError> {
        if let Some(&i) = self.t.loc_ids.get(&q) {
            return Ok(i);
        }
        if self.t.locs.len() >= self.cfg.max_locations {
            return Err(EmptinessError::ResourceCap(format!(
                "more than {} locations",
                self.cfg.max_locations
            )));
        }
        let i = self.t.locs.len() as u32;
        self.t.loc_ids.insert(q.clone(), i);
        self.t.locs.push(q);
        self.t.by_src.push(Vec::new());
        self.t.by_dst.push(Vec::new());
        Ok(i)
    }

    fn add(&mut self, src: u32, set: BitSet, dst: u32, stage: u32, deriv: Derivation) -> Result<Option<u32>, EmptinessError> {
        let set = self.t.intern_set(set);
        let size = match deriv {
            Derivation::Base => 1,
            Derivation::Compose(a, b) => self.t.entries[a as usize].size.saturating_add(self.t.entries[b as usize].size),
            Derivation::LimitClose { prefix, looped } => self.t.entries[prefix as usize]
                .size
                .saturating_add(self.t.entries[looped as usize].size)
                .saturating_add(2),
        };
        if let Some(&id) = self.t.ids.get(&(src, set, dst)) {
            // A shorter derivation within the same stage keeps witnesses
            // small; sizes strictly decrease along derivations, so no cycles.
            let e = &mut self.t.entries[id as usize];
            if e.stage == stage && size < e.size {
                e.deriv = deriv;
                e.size = size;
            }
            return Ok(None);
        }
        if self.t.entries.len() >= self.cfg.max_triples {
            return Err(EmptinessError::ResourceCap(format!("more than {} triples", self.cfg.max_triples)));
        }
        let id = self.t.entries.len() as u32;
        self.t.entries.push(Entry { src, set, dst, stage, deriv, size });
        self.t.ids.insert((src, set, dst), id);
        self.t.by_src[src as usize].push(id);
        self.t.by_dst[dst as usize].push(id);
        if id % 4096 == 0 {
            self.check_time()?;
        }
        Ok(Some(id))
    }

    /// Adds base triples for every location not yet expanded.
    fn expand_locations(&mut self, stage: u32, work: &mut Vec<u32>) -> Result<(), EmptinessError> {
        while self.expanded < self.t.locs.len() {
            let qi = self.expanded as u32;
            self.expanded += 1;
            let q = self.t.locs[qi as usize].clone();

            for q2 in self.a.successors(&q) {
                let mut set = q.intersection(&q2);
                if let Some(s) = &self.support {
                    set = set.intersection(s);
                }
                let di = self.loc(q2)?;
                if let Some(id) = self.add(qi, set, di, stage, Derivation::Base)? {
                    work.push(id);
                }
            }
        }
        Ok(())
    }

    /// Closes the table under composition, starting from `work`.
    fn compose_closure(&mut self, stage: u32, mut work: Vec<u32>) -> Result<(), EmptinessError> {
        self.expand_locations(stage, &mut work)?;
        while let Some(t) = work.pop() {
            let e = self.t.entries[t as usize];
            // t followed by u
            let mut i = 0;
            while i < self.t.by_src[e.dst as usize].len() {
                let u = self.t.by_src[e.dst as usize][i];
                let f = self.t.entries[u as usize];
                let set = self.t.sets[e.set as usize].intersection(&self.t.sets[f.set as usize]);
                if let Some(id) = self.add(e.src, set, f.dst, stage, Derivation::Compose(t, u))? {
                    work.push(id);
                }
                i += 1;
            }
            // u followed by t
            let mut i = 0;
            while i < self.t.by_dst[e.src as usize].len() {
                let u = self.t.by_dst[e.src as usize][i];
                let f = self.t.entries[u as usize];
                let set = self.t.sets[f.set as usize].intersection(&self.t.sets[e.set as usize]);
                if let Some(id) = self.add(f.src, set, e.dst, stage, Derivation::Compose(u, t))? {
                    work.push(id);
                }
                i += 1;
            }
            // new locations only appear through the limit step, but Reachable
            // seeding can leave some unexpanded
            self.expand_locations(stage, &mut work)?;
        }
        Ok(())
    }

    fn limit_targets(&mut self, y: u32) -> Result<Rc<Vec<u32>>, EmptinessError> {
        if let Some(v) = self.lim_cache.get(&y) {
            return Ok(v.clone());
        }
        let targets = self.a.limit_targets(&self.t.sets[y as usize].clone());
        let mut ids = Vec::with_capacity(targets.len());
        for q in targets {
            match self.cfg.scope {
                Scope::Full => {
                    if let Some(&i) = self.t.loc_ids.get(&q) {
                        ids.push(i);
                    }
                }
                Scope::Reachable => ids.push(self.loc(q)?),
            }
        }
        let v = Rc::new(ids);
        self.lim_cache.insert(y, v.clone());
        Ok(v)
    }

    /// Applies the limit rule to the entries of `R'_{stage-1}`, using only
    /// combinations that involve an entry added at stage `stage - 1`.
    fn limit_step(&mut self, stage: u32) -> Result<Vec<u32>, EmptinessError> {
        let end = self.t.entries.len();
        let fresh = self.t.stage_start[stage as usize - 1];
        let mut out = Vec::new();
        // fresh loops with any prefix, then fresh prefixes with older loops
        for l in fresh..end {
            let e = self.t.entries[l];
            if e.src != e.dst {
                continue;
            }
            let mut i = 0;
            while i < self.t.by_dst[e.src as usize].len() {
                let p = self.t.by_dst[e.src as usize][i];
                i += 1;
                if (p as usize) < end {
                    self.limit_close(p, l as u32, stage, &mut out)?;
                }
            }
        }
        for p in fresh..end {
            let e = self.t.entries[p];
            let mut i = 0;
            while i < self.t.by_src[e.dst as usize].len() {
                let l = self.t.by_src[e.dst as usize][i];
                i += 1;
                let f = self.t.entries[l as usize];
                if f.dst == f.src && (l as usize) < fresh {
                    self.limit_close(p as u32, l, stage, &mut out)?;
                }
            }
        }
        Ok(out)
    }

    fn limit_close(&mut self, p: u32, l: u32, stage: u32, out: &mut Vec<u32>) -> Result<(), EmptinessError> {
        let pe = self.t.entries[p as usize];
        let le = self.t.entries[l as usize];
        let targets = self.limit_targets(le.set)?;
        let base = self.t.sets[pe.set as usize].intersection(&self.t.sets[le.set as usize]);
        for &q in targets.iter() {
            let set = base.intersection(&self.t.locs[q as usize]);
            if let Some(id) = self.add(pe.src, set, q, stage, Derivation::LimitClose { prefix: p, looped: l })? {
                out.push(id);
            }
        }
        Ok(())
    }

    fn run(mut self) -> Result<RelTable, EmptinessError> {
        let seeds = match self.cfg.scope {
            Scope::Full => self.a.all_locations().ok_or(EmptinessError::NotEnumerable)?,
            Scope::Reachable => self.a.initial_locations(),
        };
        for q in seeds {
            self.loc(q)?;
        }
        self.t.stage_start.push(0);
        self.compose_closure(0, Vec::new())?;
        let mut stage = 1u32;
        loop {
            self.check_time()?;
            if stage as usize > self.cfg.max_stages {
                return Err(EmptinessError::ResourceCap(format!("more than {} stages", self.cfg.max_stages)));
            }
            let before = self.t.entries.len();
            let locs_before = self.t.locs.len();
            self.t.stage_start.push(before);
            let work = self.limit_step(stage)?;
            self.compose_closure(stage, work)?;
            if self.t.entries.len() == before && self.t.locs.len() == locs_before {
                self.t.stage_start.pop();
                break;
            }
            stage += 1;
        }
        self.t.scope = Some(self.cfg.scope);
        Ok(self.t)
    }
}

/// Saturates `a` until no stage adds a triple.
pub fn saturate<A: AutomatonView + ?Sized>(a: &A, cfg: &Config) -> Result<RelTable, EmptinessError> {
    Saturator {
        a,
        cfg,
        t: RelTable::default(),
        started: Instant::now(),
        expanded: 0,
        lim_cache: HashMap::default(),
        support: a.limit_support(),
    }
    .run()
}

/// A triple with its stage: the least `i` with the triple in `R'_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleInfo {
    pub first: BitSet,
    pub all: BitSet,
    pub last: BitSet,
    pub stage: usize,
    pub derivation: Derivation,
}

impl RelTable {
    fn intern_set(&mut self, s: BitSet) -> u32 {
        if let Some(&i) = self.set_ids.get(&s) {
            return i;
        }
        let i = self.sets.len() as u32;
        self.set_ids.insert(s.clone(), i);
        self.sets.push(s);
        i
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn location_count(&self) -> usize {
        self.locs.len()
    }

    /// Number of stages computed: the fixpoint is `R'_{stages-1}`.
    pub fn stages(&self) -> usize {
        self.stage_start.len()
    }

    /// `|R'_i|` for every computed stage `i`.
    pub fn stage_sizes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.stage_start.iter().skip(1).copied().collect();
        out.push(self.entries.len());
        out
    }

    pub fn triple(&self, id: usize) -> TripleInfo {
        let e = self.entries[id];
        TripleInfo {
            first: self.locs[e.src as usize].clone(),
            all: self.sets[e.set as usize].clone(),
            last: self.locs[e.dst as usize].clone(),
            stage: e.stage as usize,
            derivation: e.deriv,
        }
    }

    pub fn triples(&self) -> impl Iterator<Item = TripleInfo> + '_ {
        (0..self.entries.len()).map(|i| self.triple(i))
    }

    pub fn lookup(&self, first: &BitSet, all: &BitSet, last: &BitSet) -> Option<usize> {
        let s = *self.loc_ids.get(first)?;
        let a = *self.set_ids.get(all)?;
        let d = *self.loc_ids.get(last)?;
        self.ids.get(&(s, a, d)).map(|&i| i as usize)
    }

    /// Membership in `R'_n`.
    pub fn in_r_prime(&self, id: usize, n: usize) -> bool {
        self.entries[id].stage as usize <= n
    }

    /// Membership in `R_n`.
    pub fn in_r(&self, id: usize, n: usize) -> bool {
        let e = self.entries[id];
        match e.deriv {
            Derivation::Base | Derivation::LimitClose { .. } => e.stage as usize <= n,
            Derivation::Compose(..) => (e.stage as usize) < n,
        }
    }

    /// A run without its first location whose abstraction, once the first
    /// location is put back, is the triple.
    fn tail(&self, id: u32) -> RunExpr {
        enum Item {
            Triple(u32),
            Omega(u32),
            Loc(u32),
        }
        let mut parts = Vec::new();
        let mut stack = vec![Item::Triple(id)];
        while let Some(it) = stack.pop() {
            match it {
                Item::Loc(q) => parts.push(RunExpr::single(self.locs[q as usize].clone())),
                Item::Omega(l) => parts.push(RunExpr::omega(self.tail(l))),
                Item::Triple(t) => {
                    let e = self.entries[t as usize];
                    match e.deriv {
                        Derivation::Base => stack.push(Item::Loc(e.dst)),
                        Derivation::Compose(a, b) => {
                            stack.push(Item::Triple(b));
                            stack.push(Item::Triple(a));
                        }
                        Derivation::LimitClose { prefix, looped } => {
                            stack.push(Item::Loc(e.dst));
                            stack.push(Item::Omega(looped));
                            stack.push(Item::Triple(prefix));
                        }
                    }
                }
            }
        }
        RunExpr::concat(parts)
    }

    /// A successor-length run whose abstraction is the triple.
    pub fn witness(&self, id: usize) -> RunExpr {
        let e = self.entries[id];
        RunExpr::concat([RunExpr::single(self.locs[e.src as usize].clone()), self.tail(id as u32)])
    }

    /// `q0 · tail(prefix) · tail(loop)^ω`.
    fn lasso(&self, q0: u32, prefix: Option<u32>, looped: u32) -> RunExpr {
        let mut parts = vec![RunExpr::single(self.locs[q0 as usize].clone())];
        if let Some(p) = prefix {
            parts.push(self.tail(p));
        }
        parts.push(RunExpr::omega(self.tail(looped)));
        RunExpr::concat(parts)
    }
}

/// Reads the acceptance conditions off a saturated table.
pub fn decide<A: AutomatonView + ?Sized>(a: &A, t: &RelTable) -> Verdict {
    // (A0)
    let initial: Vec<u32> = (0..t.locs.len() as u32).filter(|&i| a.is_initial(&t.locs[i as usize])).collect();
    if let Some(&q0) = initial.iter().find(|&&i| a.is_final(&t.locs[i as usize])) {
        return Verdict::NonEmpty {
            witness: RunExpr::single(t.locs[q0 as usize].clone()),
            reason: Reason::InitialFinal,
        };
    }
    // (A), preferring the earliest stage, then the shortest witness
    let mut best: Option<u32> = None;
    for &q0 in &initial {
        for &id in &t.by_src[q0 as usize] {
            let e = t.entries[id as usize];
            let key = |x: &Entry| (x.stage, x.size);
            if a.is_final(&t.locs[e.dst as usize]) && best.is_none_or(|b| key(&t.entries[b as usize]) > key(&e)) {
                best = Some(id);
            }
        }
    }
    if let Some(id) = best {
        return Verdict::NonEmpty {
            witness: t.witness(id as usize),
            reason: Reason::Successor,
        };
    }
    // (B)
    let mut fcal_cache: HashMap<u32, bool> = HashMap::default();
    let mut reach: HashMap<u32, (u32, Option<u32>, u64)> = HashMap::default();
    for &q0 in &initial {
        reach.insert(q0, (q0, None, 0));
    }
    for &q0 in &initial {
        for &id in &t.by_src[q0 as usize] {
            let e = &t.entries[id as usize];
            let cand = (q0, Some(id), e.size);
            reach
                .entry(e.dst)
                .and_modify(|r| {
                    if r.2 > e.size {
                        *r = cand;
                    }
                })
                .or_insert(cand);
        }
    }
    let mut found: Option<(u32, Option<u32>, u32, u64)> = None;
    for (id, e) in t.entries.iter().enumerate() {
        if e.src != e.dst {
            continue;
        }
        let Some(&(q0, prefix, psize)) = reach.get(&e.src) else { continue };
        let total = psize.saturating_add(e.size);
        if found.is_some_and(|f| f.3 <= total) {
            continue;
        }
        let ok = *fcal_cache
            .entry(e.set)
            .or_insert_with(|| a.in_fcal(&t.sets[e.set as usize]));
        if ok {
            found = Some((q0, prefix, id as u32, total));
        }
    }
    match found {
        Some((q0, prefix, l, _)) => Verdict::NonEmpty {
            witness: t.lasso(q0, prefix, l),
            reason: Reason::Limit,
        },
        None => Verdict::Empty,
    }
}

/// Saturates and decides.
pub fn check_nonempty<A: AutomatonView + ?Sized>(a: &A, cfg: &Config) -> Result<(Verdict, RelTable), EmptinessError> {
    let t = saturate(a, cfg)?;
    let v = decide(a, &t);
    Ok((v, t))
}

type Reach = Rc<HashSet<(BitSet, BitSet)>>;

/// Membership in `R_n` computed top-down, per source location, with
/// memoization in place of the nondeterministic guesses.
pub struct TopDown<'a, A: AutomatonView + ?Sized> {
    a: &'a A,
    rn: HashMap<(usize, BitSet), Reach>,
    rprime: HashMap<(usize, BitSet), Reach>,
    lim_cache: HashMap<BitSet, Rc<Vec<BitSet>>>,
    started: Instant,
    timeout: Option<Duration>,
}

impl<'a, A: AutomatonView + ?Sized> TopDown<'a, A> {
    pub fn new(a: &'a A) -> Self {
        TopDown {
            a,
            rn: HashMap::default(),
            rprime: HashMap::default(),
            lim_cache: HashMap::default(),
            started: Instant::now(),
            timeout: None,
        }
    }

    pub fn with_timeout(mut self, t: Option<Duration>) -> Self {
        self.timeout = t;
        self
    }

    pub fn max_n(&self) -> usize {
        self.a.basis_len() + 4
    }

    fn check(&self, n: usize) -> Result<(), EmptinessError> {
        if n > self.max_n() {
            return Err(EmptinessError::StageOutOfRange { n, max: self.max_n() });
        }
        match self.timeout {
            Some(d) if self.started.elapsed() > d => {
                Err(EmptinessError::ResourceCap(format!("timeout after {} ms", d.as_millis())))
            }
            _ => Ok(()),
        }
    }

    /// `{(A, q') : ⟨q, A, q'⟩ ∈ R_n}`.
    pub fn r(&mut self, n: usize, q: &BitSet) -> Result<Reach, EmptinessError> {
        self.check(n)?;
        let key = (n, q.clone());
        if let Some(v) = self.rn.get(&key) {
            return Ok(v.clone());
        }
        let mut out: HashSet<(BitSet, BitSet)> = HashSet::default();
        if n == 0 {
            for q2 in self.a.successors(q) {
                out.insert((q.intersection(&q2), q2));
            }
        } else {
            let pre = self.r_prime(n - 1, q)?;
            // (2.) prefix to x, loop on x with all-set Y, (Y, q') ∈ δ_lim
            for (a1, x) in pre.iter() {
                let loops = self.r_prime(n - 1, x)?;
                for (y, x2) in loops.iter() {
                    if x2 != x {
                        continue;
                    }
                    let targets = self.limit_targets(y);
                    let base = a1.intersection(y);
                    for q2 in targets.iter() {
                        out.insert((base.intersection(q2), q2.clone()));
                    }
                }
            }
            // (1.)
            out.extend(pre.iter().cloned());
        }
        let v = Rc::new(out);
        self.rn.insert(key, v.clone());
        Ok(v)
    }

    /// `{(A, q') : ⟨q, A, q'⟩ ∈ R'_n}`: finite sequences of `R_n` triples.
    pub fn r_prime(&mut self, n: usize, q: &BitSet) -> Result<Reach, EmptinessError> {
        self.check(n)?;
        let key = (n, q.clone());
        if let Some(v) = self.rprime.get(&key) {
            return Ok(v.clone());
        }
        let mut seen: HashSet<(BitSet, BitSet)> = HashSet::default();
        let mut queue: VecDeque<(BitSet, BitSet)> = VecDeque::new();
        for e in self.r(n, q)?.iter() {
            if seen.insert(e.clone()) {
                queue.push_back(e.clone());
            }
        }
        while let Some((a1, x)) = queue.pop_front() {
            let step = self.r(n, &x)?;
            for (a2, y) in step.iter() {
                let e = (a1.intersection(a2), y.clone());
                if seen.insert(e.clone()) {
                    queue.push_back(e);
                }
            }
        }
        let v = Rc::new(seen);
        self.rprime.insert(key, v.clone());
        Ok(v)
    }

    fn limit_targets(&mut self, y: &BitSet) -> Rc<Vec<BitSet>> {
        if let Some(v) = self.lim_cache.get(y) {
            return v.clone();
        }
        let v = Rc::new(self.a.limit_targets(y));
        self.lim_cache.insert(y.clone(), v.clone());
        v
    }

    /// Condition (A0), then (A) over `R_{|B|+3}`, then (B) over `R_{|B|+4}`.
    pub fn decide(&mut self) -> Result<bool, EmptinessError> {
        let b = self.a.basis_len();
        let initial = self.a.initial_locations();
        if initial.iter().any(|q| self.a.is_final(q)) {
            return Ok(true);
        }
        for q0 in &initial {
            if self.r(b + 3, q0)?.iter().any(|(_, qf)| self.a.is_final(qf)) {
                return Ok(true);
            }
        }
        for q0 in &initial {
            let mut mids: Vec<BitSet> = vec![q0.clone()];
            mids.extend(self.r(b + 4, q0)?.iter().map(|(_, q)| q.clone()));
            for q in mids {
                let loops = self.r(b + 4, &q)?;
                if loops.iter().any(|(a1, q2)| *q2 == q && self.a.in_fcal(a1)) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// Whether `⟨q, A, q'⟩ ∈ R_n`, for `n ≤ |B| + 4`.
pub fn path_topdown<A: AutomatonView + ?Sized>(
    a: &A,
    first: &BitSet,
    all: &BitSet,
    last: &BitSet,
    n: usize,
) -> Result<bool, EmptinessError> {
    let mut td = TopDown::new(a);
    Ok(td.r(n, first)?.contains(&(all.clone(), last.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{is_accepting, run_attrs, validate_run, AcceptSets, LimitRelation, RunEnd, SimpleAutomaton};
    use crate::ordinal::Ordinal;

    fn set(xs: &[usize]) -> BitSet {
        BitSet::from_indices(xs.iter().copied())
    }

    fn loop_automaton(finals: Vec<usize>, fcal: Vec<BitSet>) -> SimpleAutomaton {
        SimpleAutomaton::new(
            vec!["a".into()],
            vec![set(&[0])],
            vec![(0, 0)],
            LimitRelation::Explicit(vec![(set(&[0]), 0)]),
            vec![0],
            finals,
            AcceptSets::Explicit(fcal),
        )
        .unwrap()
    }

    #[test]
    fn loop_automaton_table() {
        let a = loop_automaton(vec![], vec![]);
        let t = saturate(&a, &Config::full()).unwrap();
        assert_eq!(t.len(), 1);
        let info = t.triple(0);
        assert_eq!((info.first, info.all, info.last), (set(&[0]), set(&[0]), set(&[0])));
        assert_eq!(t.stages(), 1);
    }

    #[test]
    fn cycle_composes_to_self_triple() {
        let a = SimpleAutomaton::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![set(&[0, 1]), set(&[1, 2])],
            vec![(0, 1), (1, 0)],
            LimitRelation::Explicit(vec![]),
            vec![0],
            vec![],
            AcceptSets::Explicit(vec![]),
        )
        .unwrap();
        let t = saturate(&a, &Config::full()).unwrap();
        let id = t.lookup(&set(&[0, 1]), &set(&[1]), &set(&[0, 1])).unwrap();
        assert!(matches!(t.triple(id).derivation, Derivation::Compose(..)));
    }

    #[test]
    fn limit_rule_fires() {
        let a = SimpleAutomaton::new(
            vec!["a".into(), "b".into()],
            vec![set(&[0]), set(&[0, 1])],
            vec![(1, 1)],
            LimitRelation::Explicit(vec![(set(&[0, 1]), 0)]),
            vec![1],
            vec![0],
            AcceptSets::Explicit(vec![]),
        )
        .unwrap();
        let (v, t) = check_nonempty(&a, &Config::full()).unwrap();
        let id = t.lookup(&set(&[0, 1]), &set(&[0]), &set(&[0])).unwrap();
        let info = t.triple(id);
        assert_eq!(info.stage, 1);
        assert!(matches!(info.derivation, Derivation::LimitClose { .. }));
        let Verdict::NonEmpty { witness, reason } = v else { panic!() };
        assert_eq!(reason, Reason::Successor);
        let attrs = validate_run(&a, &witness).unwrap();
        assert!(is_accepting(&a, &attrs));
        assert_eq!(attrs.length, "w+1".parse::<Ordinal>().unwrap());
    }

    #[test]
    fn verdict_examples() {
        let q = set(&[0]);
        let a = loop_automaton(vec![0], vec![q.clone()]);
        let (v, _) = check_nonempty(&a, &Config::default()).unwrap();
        assert!(matches!(v, Verdict::NonEmpty { witness, reason: Reason::InitialFinal } if witness == RunExpr::single(q.clone())));

        let a = loop_automaton(vec![], vec![q.clone()]);
        let (v, _) = check_nonempty(&a, &Config::default()).unwrap();
        let Verdict::NonEmpty { witness, reason } = v else { panic!() };
        assert_eq!(reason, Reason::Limit);
        let attrs = validate_run(&a, &witness).unwrap();
        assert_eq!(attrs.length, Ordinal::omega());
        assert_eq!(attrs.end, RunEnd::Limit(q.clone()));
        assert!(is_accepting(&a, &attrs));

        let a = loop_automaton(vec![], vec![]);
        let (v, _) = check_nonempty(&a, &Config::default()).unwrap();
        assert!(!v.is_nonempty());
        assert!(!TopDown::new(&a).decide().unwrap());
    }

    #[test]
    fn witnesses_match_triples() {
        let a = SimpleAutomaton::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![set(&[0, 1, 2]), set(&[0, 1]), set(&[0])],
            vec![(0, 0), (1, 0)],
            LimitRelation::Explicit(vec![(set(&[0, 1, 2]), 1), (set(&[0, 1]), 2)]),
            vec![0],
            vec![2],
            AcceptSets::Explicit(vec![]),
        )
        .unwrap();
        let t = saturate(&a, &Config::full()).unwrap();
        assert_eq!(t.stages(), 3);
        let (v, _) = check_nonempty(&a, &Config::default()).unwrap();
        let Verdict::NonEmpty { witness, .. } = v else { panic!() };
        assert_eq!(validate_run(&a, &witness).unwrap().length, "w^2+1".parse::<Ordinal>().unwrap());
        for id in 0..t.len() {
            let info = t.triple(id);
            let w = t.witness(id);
            let attrs = validate_run(&a, &w).unwrap();
            assert_eq!(attrs.abstraction(), Some((info.first, info.all, info.last)));
            assert!(attrs.length < Ordinal::omega_pow(info.stage as u32 + 1));
        }
        let _ = run_attrs(&t.witness(0)).unwrap();
    }

    #[test]
    fn topdown_agrees_with_table() {
        let a = SimpleAutomaton::new(
            vec!["a".into(), "b".into()],
            vec![set(&[0]), set(&[0, 1]), set(&[1])],
            vec![(1, 1), (0, 2), (2, 1), (1, 0), (2, 2)],
            LimitRelation::Explicit(vec![(set(&[0, 1]), 0), (set(&[1]), 0), (set(&[]), 1)]),
            vec![1],
            vec![],
            AcceptSets::Explicit(vec![set(&[1])]),
        )
        .unwrap();
        let t = saturate(&a, &Config::full()).unwrap();
        let mut td = TopDown::new(&a);
        let max = td.max_n();
        for n in 0..=max {
            for q in a.locations() {
                let got = td.r(n, q).unwrap();
                let want: HashSet<(BitSet, BitSet)> = (0..t.len())
                    .filter(|&i| t.in_r(i, n))
                    .map(|i| t.triple(i))
                    .filter(|i| &i.first == q)
                    .map(|i| (i.all, i.last))
                    .collect();
                assert_eq!(*got, want, "n={n}");
            }
        }
        assert_eq!(td.decide().unwrap(), decide(&a, &t).is_nonempty());
        assert!(path_topdown(&a, &set(&[0, 1]), &set(&[0, 1]), &set(&[0, 1]), 0).unwrap());
        assert!(matches!(
            path_topdown(&a, &set(&[0]), &set(&[0]), &set(&[0]), max + 1),
            Err(EmptinessError::StageOutOfRange { .. })
        ));
    }

    #[test]
    fn caps_are_errors() {
        let a = loop_automaton(vec![], vec![]);
        let cfg = Config {
            max_triples: 0,
            ..Config::full()
        };
        assert!(matches!(saturate(&a, &cfg), Err(EmptinessError::ResourceCap(_))));
    }
}
