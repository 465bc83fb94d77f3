//! The automaton `A_φ`: locations are the maximally Boolean consistent
//! subsets of the closure, one bit per closure element.
//!
//! Bit `2k` holds the `k`-th positive closure formula and bit `2k+1` its
//! negation (see [`Formulas::closure`]). Only variable, until and since bits
//! are free; negation, conjunction and `⊤` bits follow from them.

use std::sync::Arc;

use rustc_hash::FxHashMap as HashMap;

use thiserror::Error;

use crate::automaton::{AcceptSets, AutomatonView, LimitRelation, RunExpr, SimpleAutomaton};
use crate::bits::BitSet;
use crate::formula::{Closure, Formula, Formulas, Node};

/// Default cap on `|φ|` for [`build_automaton`].
pub const DEFAULT_EXPLICIT_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("closure size {size} exceeds the explicit construction cap {cap}; use the lazy view")]
    TooLarge { size: usize, cap: usize },
}

#[derive(Clone, Copy, Debug)]
enum Base {
    Var,
    True,
    And(usize, usize),
    Until(usize, usize),
    Since(usize, usize),
}

#[derive(Debug)]
struct Inner {
    formula: Formula,
    closure: Closure,
    labels: Vec<String>,
    bases: Vec<Base>,
    root: usize,
    /// `(bit, variable name)` for every variable in the closure.
    vars: Vec<(usize, String)>,
}

/// `A_φ` as a set of predicates and generators; nothing is enumerated up
/// front.
#[derive(Clone, Debug)]
pub struct FormulaAutomaton {
    inner: Arc<Inner>,
}

#[derive(Clone, Copy)]
enum Mode<'a> {
    Any,
    Initial,
    Next(&'a BitSet),
    Limit(&'a BitSet),
}

#[inline]
fn pos(k: usize) -> usize {
    2 * k
}

#[inline]
fn lit(q: &BitSet, p: usize) -> bool {
    q.contains(p)
}

impl FormulaAutomaton {
    pub fn new(fs: &Formulas, phi: Formula) -> Self {
        let closure = fs.closure(phi);
        let at = |f: Formula| closure.position(f).expect("closure is subformula closed");
        let mut bases = Vec::with_capacity(closure.len() / 2);
        let mut vars = Vec::new();
        for (k, &f) in closure.formulas().iter().step_by(2).enumerate() {
            bases.push(match fs.node(f) {
                Node::Var(v) => {
                    vars.push((pos(k), fs.var_name(v).to_string()));
                    Base::Var
                }
                Node::True => Base::True,
                Node::And(a, b) => Base::And(at(a), at(b)),
                Node::Until(a, b) => Base::Until(at(a), at(b)),
                Node::Since(a, b) => Base::Since(at(a), at(b)),
                Node::Not(_) => unreachable!("even closure positions are never negations"),
            });
        }
        let labels = closure.formulas().iter().map(|&f| fs.label(f)).collect();
        let root = at(phi);
        FormulaAutomaton {
            inner: Arc::new(Inner {
                formula: phi,
                closure,
                labels,
                bases,
                root,
                vars,
            }),
        }
    }

    pub fn formula(&self) -> Formula {
        self.inner.formula
    }

    pub fn closure(&self) -> &Closure {
        &self.inner.closure
    }

    /// Number of free bits; `2^free_bits` bounds the location count.
    pub fn free_bits(&self) -> usize {
        self.inner
            .bases
            .iter()
            .filter(|b| matches!(b, Base::Var | Base::Until(..) | Base::Since(..)))
            .count()
    }

    pub fn variables(&self) -> Vec<String> {
        self.inner.vars.iter().map(|(_, v)| v.clone()).collect()
    }

    /// `mod(r)`: each location replaced by the set of (indices into
    /// [`Self::variables`] of) the variables it contains.
    pub fn project_model(&self, r: &RunExpr) -> RunExpr {
        r.map_locations(&mut |q| self.project_location(q))
    }

    pub fn project_location(&self, q: &BitSet) -> BitSet {
        self.inner
            .vars
            .iter()
            .enumerate()
            .filter(|(_, (bit, _))| q.contains(*bit))
            .map(|(i, _)| i)
            .collect()
    }

    fn enumerate(&self, mode: Mode<'_>) -> Vec<BitSet> {
        let mut out = Vec::new();
        let mut cur = BitSet::new();
        self.extend(0, mode, &mut cur, &mut out);
        out
    }

    fn extend(&self, k: usize, mode: Mode<'_>, cur: &mut BitSet, out: &mut Vec<BitSet>) {
        let inner = &*self.inner;
        if k == inner.bases.len() {
            if !matches!(mode, Mode::Initial) || lit(cur, inner.root) {
                out.push(cur.clone());
            }
            return;
        }
        let p = pos(k);
        let choices: &[bool] = match inner.bases[k] {
            Base::True => &[true],
            Base::And(a, b) => {
                if lit(cur, a) && lit(cur, b) {
                    &[true]
                } else {
                    &[false]
                }
            }
            Base::Var => &[false, true],
            Base::Since(a, b) => match mode {
                Mode::Any => &[false, true],
                Mode::Initial => &[false],
                // next_S: ψ1 S ψ2 ∈ q' iff ψ2 ∈ q or ψ1, ψ1 S ψ2 ∈ q
                Mode::Next(q) => {
                    if lit(q, b) || (lit(q, a) && lit(q, p)) {
                        &[true]
                    } else {
                        &[false]
                    }
                }
                // lim_S: ψ1 S ψ2 ∈ q iff ψ1 ∈ Y and ψ1 S ψ2 ∈ Y
                Mode::Limit(y) => {
                    if lit(y, a) && lit(y, p) {
                        &[true]
                    } else {
                        &[false]
                    }
                }
            },
            Base::Until(..) => &[false, true],
        };
        for &v in choices {
            if let Base::Until(a, b) = inner.bases[k] {
                if !until_ok(mode, cur, p, a, b, v) {
                    continue;
                }
            }
            cur.set(p, v);
            cur.set(p + 1, !v);
            self.extend(k + 1, mode, cur, out);
        }
        cur.remove(p);
        cur.remove(p + 1);
    }
}

/// Whether giving the until bit `p` (with argument literals `a`, `b`) the
/// value `v` in the partially built `q` is compatible with `mode`.
fn until_ok(mode: Mode<'_>, q: &BitSet, p: usize, a: usize, b: usize, v: bool) -> bool {
    match mode {
        Mode::Any | Mode::Initial => true,
        // next_U: ψ1 U ψ2 ∈ q iff ψ2 ∈ q' or ψ1, ψ1 U ψ2 ∈ q'
        Mode::Next(prev) => lit(prev, p) == (lit(q, b) || (lit(q, a) && v)),
        Mode::Limit(y) => lim_until(y, q, p, a, b, v),
    }
}

fn lim_until(y: &BitSet, q: &BitSet, p: usize, a: usize, b: usize, v: bool) -> bool {
    // lim_U1
    if lit(y, a) && lit(y, b ^ 1) && lit(y, p) && !(lit(q, b) || (lit(q, a) && v)) {
        return false;
    }
    // lim_U2
    if lit(q, a) && v && lit(y, a) && !lit(y, p) {
        return false;
    }
    // lim_U3
    if lit(y, a) && lit(q, b) && !lit(y, p) {
        return false;
    }
    true
}

impl AutomatonView for FormulaAutomaton {
    fn basis_len(&self) -> usize {
        self.inner.closure.len()
    }

    fn basis_label(&self, i: usize) -> String {
        self.inner.labels[i].clone()
    }

    fn is_location(&self, q: &BitSet) -> bool {
        let inner = &*self.inner;
        if q.iter().any(|i| i >= inner.closure.len()) {
            return false;
        }
        inner.bases.iter().enumerate().all(|(k, base)| {
            let p = pos(k);
            let v = lit(q, p);
            if v == lit(q, p + 1) {
                return false;
            }
            match *base {
                Base::True => v,
                Base::And(a, b) => v == (lit(q, a) && lit(q, b)),
                _ => true,
            }
        })
    }

    fn is_initial(&self, q: &BitSet) -> bool {
        self.is_location(q)
            && lit(q, self.inner.root)
            && self.inner.bases.iter().enumerate().all(|(k, b)| !matches!(b, Base::Since(..)) || !lit(q, pos(k)))
    }

    fn is_final(&self, q: &BitSet) -> bool {
        self.is_location(q)
            && self.inner.bases.iter().enumerate().all(|(k, b)| !matches!(b, Base::Until(..)) || !lit(q, pos(k)))
    }

    fn next_ok(&self, q: &BitSet, q2: &BitSet) -> bool {
        if !self.is_location(q) || !self.is_location(q2) {
            return false;
        }
        self.inner.bases.iter().enumerate().all(|(k, base)| {
            let p = pos(k);
            match *base {
                Base::Until(a, b) => lit(q, p) == (lit(q2, b) || (lit(q2, a) && lit(q2, p))),
                Base::Since(a, b) => lit(q2, p) == (lit(q, b) || (lit(q, a) && lit(q, p))),
                _ => true,
            }
        })
    }

    fn lim_ok(&self, y: &BitSet, q: &BitSet) -> bool {
        if !self.is_location(q) {
            return false;
        }
        self.inner.bases.iter().enumerate().all(|(k, base)| {
            let p = pos(k);
            match *base {
                Base::Until(a, b) => lim_until(y, q, p, a, b, lit(q, p)),
                Base::Since(a, _) => lit(q, p) == (lit(y, a) && lit(y, p)),
                _ => true,
            }
        })
    }

    fn in_fcal(&self, y: &BitSet) -> bool {
        self.inner.bases.iter().enumerate().all(|(k, base)| match *base {
            Base::Until(a, b) => !(lit(y, a) && lit(y, b ^ 1) && lit(y, pos(k))),
            _ => true,
        })
    }

    fn initial_locations(&self) -> Vec<BitSet> {
        self.enumerate(Mode::Initial)
    }

    fn successors(&self, q: &BitSet) -> Vec<BitSet> {
        if !self.is_location(q) {
            return Vec::new();
        }
        self.enumerate(Mode::Next(q))
    }

    fn limit_targets(&self, y: &BitSet) -> Vec<BitSet> {
        self.enumerate(Mode::Limit(y))
    }

    fn all_locations(&self) -> Option<Vec<BitSet>> {
        (self.free_bits() <= 20).then(|| self.enumerate(Mode::Any))
    }

    fn limit_support(&self) -> Option<BitSet> {
        let mut s = BitSet::new();
        for (k, base) in self.inner.bases.iter().enumerate() {
            match *base {
                Base::Until(a, b) => {
                    s.insert(a);
                    s.insert(b ^ 1);
                    s.insert(pos(k));
                }
                Base::Since(a, _) => {
                    s.insert(a);
                    s.insert(pos(k));
                }
                _ => {}
            }
        }
        Some(s)
    }
}

/// `A_φ` with `Q`, `I`, `F` and `δ_next` listed explicitly. `δ_lim` and `𝓕`
/// stay predicate-backed since they range over all of `2^B`.
pub fn build_automaton(fs: &Formulas, phi: Formula, cap: usize) -> Result<SimpleAutomaton, TranslateError> {
    let view = FormulaAutomaton::new(fs, phi);
    let size = view.basis_len();
    if size > cap {
        return Err(TranslateError::TooLarge { size, cap });
    }
    let locations = view.enumerate(Mode::Any);
    let index: HashMap<&BitSet, usize> =
        locations.iter().enumerate().map(|(i, q)| (q, i)).collect();
    let mut next = Vec::new();
    for (i, q) in locations.iter().enumerate() {
        for q2 in view.successors(q) {
            next.push((i, index[&q2]));
        }
    }
    let initial = (0..locations.len()).filter(|&i| view.is_initial(&locations[i])).collect();
    let finals = (0..locations.len()).filter(|&i| view.is_final(&locations[i])).collect();
    let basis = (0..size).map(|i| view.basis_label(i)).collect();
    let lv = view.clone();
    let fv = view.clone();
    Ok(SimpleAutomaton::new(
        basis,
        locations,
        next,
        LimitRelation::Predicate(Arc::new(move |y, q| lv.lim_ok(y, q))),
        initial,
        finals,
        AcceptSets::Predicate(Arc::new(move |y| fv.in_fcal(y))),
    )
    .expect("enumerated locations are distinct and in range"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn view(src: &str) -> (Formulas, FormulaAutomaton) {
        let mut fs = Formulas::new();
        let f = fs.parse(src).unwrap();
        let v = FormulaAutomaton::new(&fs, f);
        (fs, v)
    }

    fn bit(v: &FormulaAutomaton, fs: &mut Formulas, src: &str) -> usize {
        let f = fs.parse(src).unwrap();
        v.closure().position(f).unwrap()
    }

    #[test]
    fn single_variable() {
        let mut fs = Formulas::new();
        let p = fs.parse("p").unwrap();
        let a = build_automaton(&fs, p, DEFAULT_EXPLICIT_CAP).unwrap();
        assert_eq!(a.locations(), &[BitSet::from_indices([1]), BitSet::from_indices([0])]);
        assert_eq!(a.initial_indices(), vec![1]);
        assert_eq!(a.final_indices(), vec![0, 1]);
        assert_eq!(a.next_edges().len(), 4);
        for m in 0..4usize {
            let y: BitSet = (0..2).filter(|i| m & (1 << i) != 0).collect();
            assert!(a.in_fcal(&y));
        }
    }

    #[test]
    fn until_next_condition() {
        let (mut fs, v) = view("p U q");
        let (p, q, u) = (bit(&v, &mut fs, "p"), bit(&v, &mut fs, "q"), bit(&v, &mut fs, "p U q"));
        let locs = v.all_locations().unwrap();
        assert_eq!(locs.len(), 8);
        for src in locs.iter().filter(|l| l.contains(u) && !l.contains(q)) {
            for dst in v.successors(src) {
                assert!(dst.contains(q) || (dst.contains(p) && dst.contains(u)));
            }
        }
        // the generator and the predicate agree
        for a in &locs {
            for b in &locs {
                assert_eq!(v.next_ok(a, b), v.successors(a).contains(b));
            }
        }
    }

    #[test]
    fn since_next_condition() {
        let (mut fs, v) = view("p S q");
        let (p, q, s) = (bit(&v, &mut fs, "p"), bit(&v, &mut fs, "q"), bit(&v, &mut fs, "p S q"));
        let locs = v.all_locations().unwrap();
        for a in &locs {
            for b in v.successors(a) {
                assert_eq!(b.contains(s), a.contains(q) || (a.contains(p) && a.contains(s)));
            }
        }
        for i in v.initial_locations() {
            assert!(!i.contains(s));
        }
    }

    #[test]
    fn limit_and_fcal_examples() {
        let (mut fs, v) = view("p U r");
        let (p, r, u) = (bit(&v, &mut fs, "p"), bit(&v, &mut fs, "r"), bit(&v, &mut fs, "p U r"));
        let y = BitSet::from_indices([p, r ^ 1, u]);
        for q in v.all_locations().unwrap() {
            if !q.contains(r) && !q.contains(p) {
                assert!(!v.lim_ok(&y, &q));
            }
        }
        assert!(!v.in_fcal(&y));
        assert!(v.in_fcal(&BitSet::from_indices([p, r ^ 1])));
    }

    #[test]
    fn structural_initial_and_final() {
        let (mut fs, v) = view("(p S q) U (X- p & G q)");
        let locs = v.all_locations().unwrap();
        let s_bits: Vec<usize> = v
            .closure()
            .formulas()
            .iter()
            .enumerate()
            .filter(|(_, &f)| matches!(fs.node(f), Node::Since(..)))
            .map(|(i, _)| i)
            .collect();
        let u_bits: Vec<usize> = v
            .closure()
            .formulas()
            .iter()
            .enumerate()
            .filter(|(_, &f)| matches!(fs.node(f), Node::Until(..)))
            .map(|(i, _)| i)
            .collect();
        for q in &locs {
            if v.is_initial(q) {
                assert!(s_bits.iter().all(|&b| !q.contains(b)));
            }
            if v.is_final(q) {
                assert!(u_bits.iter().all(|&b| !q.contains(b)));
            }
        }
        let init: Vec<BitSet> = locs.iter().filter(|q| v.is_initial(q)).cloned().collect();
        assert_eq!(init, v.initial_locations());
        let _ = bit(&v, &mut fs, "p");
    }

    fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> BitSet {
        (0..n).filter(|_| rng.gen_bool(0.5)).collect()
    }

    #[test]
    fn lazy_limit_generator_matches_predicate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for src in ["p U q", "(p U q) U (p S !q)", "G F p & F G !p", "!(p U (q S p))"] {
            let (_, v) = view(src);
            let locs = v.all_locations().unwrap();
            for _ in 0..300 {
                let y = random_subset(&mut rng, v.basis_len());
                let expect: Vec<BitSet> = locs.iter().filter(|q| v.lim_ok(&y, q)).cloned().collect();
                assert_eq!(v.limit_targets(&y), expect, "{src}");
            }
        }
    }

    proptest! {
        #[test]
        fn locations_are_consistent(m in 0u64..4096) {
            let (_, v) = view("(p U q) & !(q S (p & q))");
            let q: BitSet = (0..v.basis_len()).filter(|i| m & (1 << i) != 0).collect();
            let all = v.all_locations().unwrap();
            prop_assert_eq!(v.is_location(&q), all.contains(&q));
        }
    }
}
