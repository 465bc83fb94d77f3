//! Ground truth for testing: direct semantic evaluation on finite and lasso
//! models, brute-force model enumeration, and seeded random generators.
//!
//! Nothing here shares code with the automaton pipeline beyond the formula
//! arena itself.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{AcceptSets, LimitRelation, SimpleAutomaton, StandardAutomaton};
use crate::bits::BitSet;
use crate::formula::{Closure, Formula, Formulas, Node};
use crate::ordinal::Ordinal;
use crate::solver::quant::{Bound, QuantFormula};

pub type Letter = BTreeSet<String>;

/// A model of finite length `n ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FiniteModel(pub Vec<Letter>);

/// The ω-model `u·v^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LassoModel {
    pub u: Vec<Letter>,
    pub v: Vec<Letter>,
}

/// Largest `n·|vars|` accepted by [`enum_sat_finite`].
pub const ENUM_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("position {pos} out of range for length {len}")]
    OutOfRange { pos: usize, len: usize },
    #[error("models have length at least 1")]
    EmptyModel,
    #[error("lasso loop is empty")]
    EmptyLoop,
    #[error("{n} positions over {vars} variables exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, vars: usize, cap: usize },
    #[error("lasso evaluation did not stabilise after {0} loop copies")]
    Unstable(usize),
}

pub fn letter<S: AsRef<str>>(vars: &[S]) -> Letter {
    vars.iter().map(|s| s.as_ref().to_string()).collect()
}

/// Truth table of every closure member over positions `0..n`. Until is
/// resolved by `until`, which gets the tables of both arguments.
fn tables(
    fs: &Formulas,
    cl: &Closure,
    letters: &[Letter],
    until: &dyn Fn(usize, &[bool], &[bool]) -> bool,
) -> Vec<Vec<bool>> {
    let n = letters.len();
    let mut t: Vec<Vec<bool>> = Vec::with_capacity(cl.len());
    for &g in cl.formulas() {
        let at = |h: Formula, t: &Vec<Vec<bool>>| t[cl.position(h).unwrap()].clone();
        let col = match fs.node(g) {
            Node::Var(id) => {
                let name = fs.var_name(id);
                letters.iter().map(|l| l.contains(name)).collect()
            }
            Node::True => vec![true; n],
            Node::Not(h) => at(h, &t).into_iter().map(|b| !b).collect(),
            Node::And(a, b) => {
                let (x, y) = (at(a, &t), at(b, &t));
                x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
            }
            Node::Until(a, b) => {
                let (x, y) = (at(a, &t), at(b, &t));
                (0..n).map(|i| until(i, &x, &y)).collect()
            }
            Node::Since(a, b) => {
                let (x, y) = (at(a, &t), at(b, &t));
                (0..n)
                    .map(|i| (0..i).any(|j| y[j] && (j + 1..i).all(|k| x[k])))
                    .collect()
            }
        };
        t.push(col);
    }
    t
}

fn finite_until(i: usize, x: &[bool], y: &[bool]) -> bool {
    (i + 1..x.len()).any(|j| y[j] && (i + 1..j).all(|k| x[k]))
}

/// `σ, β ⊨ φ` for a finite model, by scanning positions.
pub fn eval_finite(fs: &Formulas, phi: Formula, sigma: &FiniteModel, beta: usize) -> Result<bool, OracleError> {
    Ok(eval_finite_all(fs, phi, sigma)?[beta_checked(beta, sigma.0.len())?])
}

/// Truth of `φ` at every position of `σ`.
pub fn eval_finite_all(fs: &Formulas, phi: Formula, sigma: &FiniteModel) -> Result<Vec<bool>, OracleError> {
    if sigma.0.is_empty() {
        return Err(OracleError::EmptyModel);
    }
    let cl = fs.closure(phi);
    let mut t = tables(fs, &cl, &sigma.0, &finite_until);
    Ok(t.swap_remove(cl.position(phi).unwrap()))
}

fn beta_checked(beta: usize, len: usize) -> Result<usize, OracleError> {
    if beta < len {
        Ok(beta)
    } else {
        Err(OracleError::OutOfRange { pos: beta, len })
    }
}

/// Searches all models of length `n` over `vars` for one satisfying `φ` at
/// 0 and returns the first in enumeration order.
///
/// All `2^{n·|vars|}` models are evaluated together: model `m` gives
/// variable `v` at position `i` the value of bit `i·|vars| + v` of `m`, and
/// each (formula, position) pair carries one bit per model.
pub fn enum_sat_finite<S: AsRef<str>>(
    fs: &Formulas,
    phi: Formula,
    n: usize,
    vars: &[S],
) -> Result<Option<FiniteModel>, OracleError> {
    if n == 0 {
        return Err(OracleError::EmptyModel);
    }
    let k = vars.len();
    if n * k > ENUM_CAP {
        return Err(OracleError::CapExceeded { n, vars: k, cap: ENUM_CAP });
    }
    let models = 1usize << (n * k);
    let words = models.div_ceil(64);
    let zero = vec![0u64; words];
    let mut ones = vec![u64::MAX; words];
    if models % 64 != 0 {
        ones[words - 1] = (1u64 << models) - 1;
    }
    let and = |a: &[u64], b: &[u64]| -> Vec<u64> { a.iter().zip(b).map(|(x, y)| x & y).collect() };
    let or_into = |a: &mut [u64], b: &[u64]| a.iter_mut().zip(b).for_each(|(x, y)| *x |= y);
    let var_col = |bit: usize| -> Vec<u64> {
        (0..words)
            .map(|w| {
                (0..64)
                    .filter(|&j| {
                        let m = w * 64 + j;
                        m < models && m >> bit & 1 == 1
                    })
                    .fold(0u64, |acc, j| acc | 1 << j)
            })
            .collect()
    };
    let cl = fs.closure(phi);
    // t[f][i]: the models satisfying closure member f at position i
    let mut t: Vec<Vec<Vec<u64>>> = Vec::with_capacity(cl.len());
    for &g in cl.formulas() {
        let at = |h: Formula| cl.position(h).unwrap();
        let col: Vec<Vec<u64>> = match fs.node(g) {
            Node::Var(id) => {
                let name = fs.var_name(id);
                match vars.iter().position(|v| v.as_ref() == name) {
                    Some(v) => (0..n).map(|i| var_col(i * k + v)).collect(),
                    None => vec![zero.clone(); n],
                }
            }
            Node::True => vec![ones.clone(); n],
            Node::Not(h) => t[at(h)]
                .iter()
                .map(|c| c.iter().zip(&ones).map(|(x, o)| !x & o).collect())
                .collect(),
            Node::And(a, b) => (0..n).map(|i| and(&t[at(a)][i], &t[at(b)][i])).collect(),
            Node::Until(a, b) => {
                let (x, y) = (&t[at(a)], &t[at(b)]);
                (0..n)
                    .map(|i| {
                        let mut acc = zero.clone();
                        let mut run = ones.clone();
                        for j in i + 1..n {
                            or_into(&mut acc, &and(&run, &y[j]));
                            run = and(&run, &x[j]);
                        }
                        acc
                    })
                    .collect()
            }
            Node::Since(a, b) => {
                let (x, y) = (&t[at(a)], &t[at(b)]);
                (0..n)
                    .map(|i| {
                        let mut acc = zero.clone();
                        let mut run = ones.clone();
                        for j in (0..i).rev() {
                            or_into(&mut acc, &and(&run, &y[j]));
                            run = and(&run, &x[j]);
                        }
                        acc
                    })
                    .collect()
            }
        };
        t.push(col);
    }
    let root = &t[cl.position(phi).unwrap()][0];
    let Some(m) = root
        .iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    else {
        return Ok(None);
    };
    let letters = (0..n)
        .map(|i| {
            (0..k)
                .filter(|&v| m >> (i * k + v) & 1 == 1)
                .map(|v| vars[v].as_ref().to_string())
                .collect()
        })
        .collect();
    Ok(Some(FiniteModel(letters)))
}

/// `u·v^ω, β ⊨ φ` for `β < |u| + 2|v|`.
///
/// The model is unrolled to `u·v^c`. Past operators scan the explicit
/// prefix; future operators walk forward and wrap from the end of the
/// unrolling back one loop length. The result is accepted once every
/// subformula agrees on the last two copies, otherwise `c` is doubled.
pub fn eval_lasso(fs: &Formulas, phi: Formula, m: &LassoModel, beta: usize) -> Result<bool, OracleError> {
    let (u, v) = (m.u.len(), m.v.len());
    if v == 0 {
        return Err(OracleError::EmptyLoop);
    }
    beta_checked(beta, u + 2 * v)?;
    let cl = fs.closure(phi);
    let root = cl.position(phi).unwrap();
    let max_copies = 2 * cl.len() + 8;
    let mut c = 3;
    loop {
        let mut letters = m.u.clone();
        for _ in 0..c {
            letters.extend(m.v.iter().cloned());
        }
        let len = letters.len();
        let until = |i: usize, x: &[bool], y: &[bool]| {
            let mut j = i;
            for _ in 0..len + v {
                j = if j + 1 < len { j + 1 } else { j + 1 - v };
                if y[j] {
                    return true;
                }
                if !x[j] {
                    return false;
                }
            }
            false
        };
        let t = tables(fs, &cl, &letters, &until);
        let last = u + (c - 1) * v;
        let stable = t
            .iter()
            .all(|col| (0..v).all(|i| col[last - v + i] == col[last + i]));
        if stable {
            return Ok(t[root][beta]);
        }
        if c >= max_copies {
            return Err(OracleError::Unstable(c));
        }
        c = (2 * c).min(max_copies);
    }
}

/// Random formula with at most `size` nodes (so `|sub| ≤ 2·size`) over
/// `vars`, built with all core connectives.
pub fn gen_formula<S: AsRef<str>>(fs: &mut Formulas, seed: u64, size: usize, vars: &[S]) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_formula_rng(fs, &mut rng, size.max(1), vars)
}

pub fn gen_formula_rng<S: AsRef<str>, R: Rng>(fs: &mut Formulas, rng: &mut R, size: usize, vars: &[S]) -> Formula {
    if size <= 1 || (size == 2 && rng.gen_bool(0.3)) {
        if vars.is_empty() || rng.gen_bool(0.1) {
            return fs.top();
        }
        let v = vars.choose(rng).unwrap();
        return fs.var(v.as_ref());
    }
    if size == 2 || rng.gen_bool(0.2) {
        let a = gen_formula_rng(fs, rng, size - 1, vars);
        return fs.not(a);
    }
    let left = rng.gen_range(1..=size - 2);
    let a = gen_formula_rng(fs, rng, left, vars);
    let b = gen_formula_rng(fs, rng, size - 1 - left, vars);
    match rng.gen_range(0..4) {
        0 => fs.and(a, b),
        1 => fs.or(a, b),
        2 => fs.until(a, b),
        _ => fs.since(a, b),
    }
}

/// Every formula over `vars` built from `!`, `&`, `U` and `S` whose
/// closure has at most `max_closure` members, optionally with `true` as an
/// extra leaf. `!!f` is identified with `f`, so each formula appears once;
/// the order is fixed.
pub fn corpus<S: AsRef<str>>(fs: &mut Formulas, vars: &[S], with_true: bool, max_closure: usize) -> Vec<Formula> {
    let max_bases = max_closure / 2;
    let mut leaves: Vec<Formula> = vars.iter().map(|v| fs.var(v.as_ref())).collect();
    if with_true {
        leaves.push(fs.top());
    }
    if max_bases == 0 {
        return Vec::new();
    }
    // each base formula with the sorted bases of its closure
    let mut bases: Vec<(Formula, Vec<Formula>)> = leaves.iter().map(|&f| (f, vec![f])).collect();
    let mut seen: std::collections::HashSet<Formula> = leaves.iter().copied().collect();
    let mut emit = |fs: &mut Formulas, bases: &mut Vec<(Formula, Vec<Formula>)>, a: usize, b: usize| {
        let mut under: Vec<Formula> = bases[a].1.iter().chain(&bases[b].1).copied().collect();
        under.sort();
        under.dedup();
        if under.len() + 1 > max_bases {
            return;
        }
        for (x, y) in [(false, false), (false, true), (true, false), (true, true)] {
            let l = if x { fs.not(bases[a].0) } else { bases[a].0 };
            let r = if y { fs.not(bases[b].0) } else { bases[b].0 };
            for op in 0..3 {
                let f = match op {
                    0 => fs.and(l, r),
                    1 => fs.until(l, r),
                    _ => fs.since(l, r),
                };
                if seen.insert(f) {
                    let mut own = under.clone();
                    own.push(f);
                    own.sort();
                    bases.push((f, own));
                }
            }
        }
    };
    let mut index: std::collections::HashMap<Formula, usize> = std::collections::HashMap::new();
    let mut done = 0;
    let mut small_done = 0;
    while done < bases.len() {
        let end = bases.len();
        // Unless one child is a base of the other, each child misses a base
        // of the other, so each has at most `max_bases - 2` bases.
        let small: Vec<usize> = (0..end).filter(|&i| bases[i].1.len() + 2 <= max_bases).collect();
        for &i in &small {
            for &j in &small {
                if i >= small_done || j >= small_done {
                    emit(fs, &mut bases, i, j);
                }
            }
        }
        small_done = end;
        for (i, b) in bases.iter().enumerate().skip(index.len()) {
            index.insert(b.0, i);
        }
        for i in done..end {
            let subs = bases[i].1.clone();
            for s in subs {
                let j = index[&s];
                emit(fs, &mut bases, i, j);
                emit(fs, &mut bases, j, i);
            }
        }
        done = end;
    }
    let mut out = Vec::with_capacity(2 * bases.len());
    for (b, _) in bases {
        out.push(b);
        out.push(fs.not(b));
    }
    out
}

/// Knobs for [`gen_automaton_with`].
#[derive(Clone, Debug)]
pub struct AutomatonGen {
    pub basis: usize,
    pub max_locations: usize,
    pub max_limits: usize,
    pub max_fcal: usize,
}

impl AutomatonGen {
    pub fn new(basis: usize) -> Self {
        AutomatonGen { basis, max_locations: 8, max_limits: 5, max_fcal: 3 }
    }
}

pub fn gen_automaton(seed: u64, basis: usize) -> SimpleAutomaton {
    gen_automaton_with(seed, &AutomatonGen::new(basis))
}

/// Random explicit automaton. Limit sets and members of `𝓕` are mostly
/// intersections of random groups of locations, since only those can be
/// the `B_lim` of a run; an occasional arbitrary subset keeps the rest of
/// `2^B` exercised.
pub fn gen_automaton_with(seed: u64, g: &AutomatonGen) -> SimpleAutomaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = g.basis.max(1);
    let universe = 1usize << b;
    let n = rng.gen_range(1..=g.max_locations.max(1).min(universe));
    let mut masks: Vec<usize> = (0..universe).collect();
    masks.shuffle(&mut rng);
    let locations: Vec<BitSet> = masks[..n].iter().map(|&m| mask_set(m, b)).collect();

    let density: f64 = rng.gen_range(0.15..0.6);
    let next: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|_| rng.gen_bool(density))
        .collect();

    // Random walks along next edges, and along limit transitions added so
    // far, supply the intersections of cycles, which is what runs produce
    // as limit sets.
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in &next {
        succ[i].push(j);
    }
    let sample_y = |rng: &mut ChaCha8Rng, succ: &[Vec<usize>]| -> BitSet {
        if rng.gen_bool(0.85) {
            let mut path = vec![rng.gen_range(0..n)];
            for _ in 0..2 * n {
                let here = *path.last().unwrap();
                let Some(&to) = succ[here].choose(rng) else { break };
                if let Some(k) = path.iter().position(|&x| x == to) {
                    return path[k..]
                        .iter()
                        .fold(BitSet::full(b), |y, &i| y.intersection(&locations[i]));
                }
                path.push(to);
            }
        }
        if rng.gen_bool(0.2) {
            return mask_set(rng.gen_range(0..universe), b);
        }
        let k = rng.gen_range(1..=n.min(3));
        let mut y = BitSet::full(b);
        for _ in 0..k {
            y = y.intersection(&locations[rng.gen_range(0..n)]);
        }
        y
    };
    let mut lim: Vec<(BitSet, usize)> = Vec::new();
    for _ in 0..rng.gen_range(1..=g.max_limits.max(1)) {
        let y = sample_y(&mut rng, &succ);
        let to = rng.gen_range(0..n);
        for (i, q) in locations.iter().enumerate() {
            if y.is_subset(q) && !succ[i].contains(&to) {
                succ[i].push(to);
            }
        }
        lim.push((y, to));
    }
    let fcal: Vec<BitSet> = (0..rng.gen_range(0..=g.max_fcal)).map(|_| sample_y(&mut rng, &succ)).collect();
    let initial: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    let finals: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
    let basis: Vec<String> = (0..b).map(|i| format!("b{i}")).collect();
    SimpleAutomaton::new(
        basis,
        locations,
        next,
        LimitRelation::Explicit(dedup(lim)),
        initial,
        finals,
        AcceptSets::Explicit(dedup(fcal)),
    )
    .expect("generated automaton is well formed")
}

fn dedup<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v.dedup();
    v
}

fn mask_set(m: usize, bits: usize) -> BitSet {
    BitSet::from_indices((0..bits).filter(|i| m >> i & 1 == 1))
}

/// Random standard automaton with `locations` states over `letters`
/// letters.
pub fn gen_standard_automaton(seed: u64, locations: usize, letters: usize) -> StandardAutomaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = locations.max(1);
    let k = letters.max(1);
    let density: f64 = rng.gen_range(0.1..0.4);
    let mut next = Vec::new();
    for q in 0..n {
        for a in 0..k {
            for q2 in 0..n {
                if rng.gen_bool(density) {
                    next.push((q, a, q2));
                }
            }
        }
    }
    let subset = |rng: &mut ChaCha8Rng| -> BitSet {
        let m = rng.gen_range(1..1usize << n);
        mask_set(m, n)
    };
    let lim = (0..rng.gen_range(0..=3)).map(|_| (subset(&mut rng), rng.gen_range(0..n))).collect();
    let fcal = (0..rng.gen_range(0..=2)).map(|_| subset(&mut rng)).collect();
    let initial = BitSet::from_indices((0..n).filter(|_| rng.gen_bool(0.5)));
    let finals = BitSet::from_indices((0..n).filter(|_| rng.gen_bool(0.4)));
    StandardAutomaton {
        alphabet: (0..k).map(|i| char::from(b'a' + i as u8).to_string()).collect(),
        num_locations: n,
        next,
        lim: dedup(lim),
        initial,
        finals,
        fcal: dedup(fcal),
    }
}

pub fn gen_lasso<S: AsRef<str>>(seed: u64, vars: &[S], max_u: usize, max_v: usize) -> LassoModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let word = |rng: &mut ChaCha8Rng, len: usize| -> Vec<Letter> {
        (0..len)
            .map(|_| {
                vars.iter()
                    .filter(|_| rng.gen_bool(0.5))
                    .map(|v| v.as_ref().to_string())
                    .collect()
            })
            .collect()
    };
    let lu = rng.gen_range(0..=max_u);
    let lv = rng.gen_range(1..=max_v.max(1));
    LassoModel { u: word(&mut rng, lu), v: word(&mut rng, lv) }
}

/// Random quantitative formula of about `size` nodes with exponents below
/// `ω^3` and occasional `U^{ω^ω}`.
pub fn gen_quant<S: AsRef<str>>(seed: u64, size: usize, vars: &[S]) -> QuantFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_quant_rng(&mut rng, size.max(1), vars)
}

fn gen_ordinal<R: Rng>(rng: &mut R, allow_zero: bool) -> Ordinal {
    let mut terms = Vec::new();
    for k in (0..3u32).rev() {
        if rng.gen_bool(0.45) {
            terms.push((k, rng.gen_range(1..=3u64)));
        }
    }
    if terms.is_empty() && !allow_zero {
        terms.push((rng.gen_range(0..3), 1));
    }
    Ordinal::from_terms(terms).expect("decreasing exponents")
}

fn gen_quant_rng<S: AsRef<str>, R: Rng>(rng: &mut R, size: usize, vars: &[S]) -> QuantFormula {
    use QuantFormula as Q;
    if size <= 1 {
        return match vars.choose(rng) {
            Some(v) if rng.gen_bool(0.9) => Q::Var(v.as_ref().to_string()),
            _ => Q::True,
        };
    }
    if size == 2 || rng.gen_bool(0.3) {
        let a = gen_quant_rng(rng, size - 1, vars);
        return match rng.gen_range(0..3) {
            0 => Q::Not(Box::new(a)),
            _ => Q::next_pow(gen_ordinal(rng, false), a),
        };
    }
    let left = rng.gen_range(1..=size - 2);
    let a = gen_quant_rng(rng, left, vars);
    let b = gen_quant_rng(rng, size - 1 - left, vars);
    match rng.gen_range(0..6) {
        0 => a.and(b),
        1 => a.or(b),
        2 => Q::Until(Box::new(a), Box::new(b)),
        3 => Q::Since(Box::new(a), Box::new(b)),
        4 if rng.gen_bool(0.15) => Q::until_pow(Bound::OmegaOmega, a, b),
        _ => Q::until_pow(Bound::Ordinal(gen_ordinal(rng, true)), a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::def_formula;

    fn model(letters: &[&[&str]]) -> FiniteModel {
        FiniteModel(letters.iter().map(|l| letter(l)).collect())
    }

    #[test]
    fn strict_until_needs_intermediate_positions() {
        let mut fs = Formulas::new();
        let f = fs.parse("p U p").unwrap();
        let m = model(&[&["p"], &[], &["p"]]);
        assert!(!eval_finite(&fs, f, &m, 0).unwrap());
        assert!(!eval_finite(&fs, f, &m, 2).unwrap());
        let s = fs.parse("true S p").unwrap();
        assert!(!eval_finite(&fs, s, &m, 0).unwrap());
        assert!(eval_finite(&fs, s, &m, 1).unwrap());
        assert!(eval_finite(&fs, f, &m, 3).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let mut fs = Formulas::new();
        let f = fs.parse("p U q").unwrap();
        assert!(enum_sat_finite(&fs, f, 1, &["p", "q"]).unwrap().is_none());
        let m = enum_sat_finite(&fs, f, 2, &["p", "q"]).unwrap().unwrap();
        assert!(eval_finite(&fs, f, &m, 0).unwrap());
        let d3 = def_formula(&mut fs, &Ordinal::finite(3)).unwrap();
        for n in 1..=6 {
            let none: [&str; 0] = [];
            assert_eq!(enum_sat_finite(&fs, d3, n, &none).unwrap().is_some(), n == 3, "n={n}");
        }
        assert!(matches!(
            enum_sat_finite(&fs, f, 11, &["p", "q"]),
            Err(OracleError::CapExceeded { .. })
        ));
    }

    #[test]
    fn enumeration_matches_scanning() {
        let mut fs = Formulas::new();
        for seed in 0..200 {
            let f = gen_formula(&mut fs, seed, 7, &["p", "q"]);
            for n in 1..=3 {
                let found = enum_sat_finite(&fs, f, n, &["p", "q"]).unwrap();
                let mut first = None;
                for m in 0u32..1 << (2 * n) {
                    let sigma = FiniteModel(
                        (0..n)
                            .map(|i| {
                                ["p", "q"]
                                    .iter()
                                    .enumerate()
                                    .filter(|(v, _)| m >> (2 * i + v) & 1 == 1)
                                    .map(|(_, s)| s.to_string())
                                    .collect()
                            })
                            .collect(),
                    );
                    if eval_finite(&fs, f, &sigma, 0).unwrap() {
                        first = Some(sigma);
                        break;
                    }
                }
                assert_eq!(found, first, "{} n={n}", fs.display(f));
            }
        }
    }

    #[test]
    fn corpus_counts() {
        // counts from a separate naive pairwise enumeration
        let mut fs = Formulas::new();
        for (with_true, max, want) in [(false, 4, 52), (false, 6, 1828), (true, 4, 78), (true, 6, 2814)] {
            let c = corpus(&mut fs, &["p", "q"], with_true, max);
            assert_eq!(c.len(), want);
            assert!(c.iter().all(|&f| fs.size(f) <= max));
            let distinct: std::collections::HashSet<_> = c.iter().collect();
            assert_eq!(distinct.len(), c.len());
        }
    }

    #[test]
    fn lasso_examples() {
        let mut fs = Formulas::new();
        let ps = LassoModel { u: vec![], v: vec![letter(&["p"])] };
        let g = fs.parse("G p").unwrap();
        assert!(eval_lasso(&fs, g, &ps, 0).unwrap());
        let dw = def_formula(&mut fs, &Ordinal::omega()).unwrap();
        assert!(eval_lasso(&fs, dw, &ps, 0).unwrap());
        let once = LassoModel { u: vec![letter(&["p"])], v: vec![Letter::new()] };
        let f = fs.parse("F+ p").unwrap();
        assert!(!eval_lasso(&fs, f, &once, 0).unwrap());
        let gf = fs.parse("G F q").unwrap();
        let alt = LassoModel { u: vec![letter(&["q"])], v: vec![Letter::new(), letter(&["q"])] };
        assert!(eval_lasso(&fs, gf, &alt, 2).unwrap());
        assert!(!eval_lasso(&fs, gf, &once, 0).unwrap());
    }

    #[test]
    fn nested_since_needs_more_copies() {
        let mut fs = Formulas::new();
        // Counts loop iterations through the past; still periodic eventually.
        let f = fs.parse("F (X- X- X- X- X- p)").unwrap();
        let m = LassoModel { u: vec![], v: vec![letter(&["p"])] };
        assert!(eval_lasso(&fs, f, &m, 0).unwrap());
    }

    #[test]
    fn generators_are_deterministic_and_bounded() {
        let mut fs = Formulas::new();
        for s in 0..50 {
            let a = gen_formula(&mut fs, s, 6, &["p", "q"]);
            let b = gen_formula(&mut fs, s, 6, &["p", "q"]);
            assert_eq!(a, b);
            assert!(fs.size(a) <= 12);
            let x = gen_automaton(s, 3);
            let y = gen_automaton(s, 3);
            assert_eq!(x.locations(), y.locations());
            assert_eq!(x.next_edges(), y.next_edges());
            assert!(x.locations().iter().all(|q| q.iter().all(|i| i < 3)));
            assert_eq!(x.basis().len(), 3);
            assert_eq!(gen_standard_automaton(s, 3, 2), gen_standard_automaton(s, 3, 2));
            assert_eq!(gen_quant(s, 8, &["p"]), gen_quant(s, 8, &["p"]));
        }
    }
}
