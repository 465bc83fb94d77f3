use proptest::prelude::*;

use ordsat::automaton::{congruent, is_accepting, run_attrs, validate_run, AutomatonView, RunExpr};
use ordsat::bits::BitSet;
use ordsat::emptiness::{check_nonempty, Config};
use ordsat::formula::{Formula, Formulas, Node};
use ordsat::oracle::{eval_finite, eval_finite_all, eval_lasso, gen_automaton, gen_formula, FiniteModel, LassoModel, Letter};
use ordsat::ordinal::{CodeLevel, Ordinal};
use ordsat::translate::{build_automaton, FormulaAutomaton};

const VARS: [&str; 2] = ["p", "q"];

fn ordinal() -> impl Strategy<Value = Ordinal> {
    prop::collection::btree_map(0u32..7, 1u64..5, 1..4).prop_map(|m| {
        let terms: Vec<(u32, u64)> = m.into_iter().rev().collect();
        Ordinal::from_terms(terms).unwrap()
    })
}

fn letters(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(
        (any::<bool>(), any::<bool>()).prop_map(|(p, q)| {
            let mut l = Letter::new();
            if p {
                l.insert("p".to_string());
            }
            if q {
                l.insert("q".to_string());
            }
            l
        }),
        len,
    )
}

/// Formulas built only from variables, boolean connectives and `S`.
fn past_formula(fs: &mut Formulas, seed: u64, size: usize) -> Formula {
    let f = gen_formula(fs, seed, size, &VARS);
    strip_until(fs, f)
}

fn strip_until(fs: &mut Formulas, f: Formula) -> Formula {
    match fs.node(f) {
        Node::Var(_) | Node::True => f,
        Node::Not(a) => {
            let a = strip_until(fs, a);
            fs.not(a)
        }
        Node::And(a, b) => {
            let (a, b) = (strip_until(fs, a), strip_until(fs, b));
            fs.and(a, b)
        }
        Node::Until(a, b) | Node::Since(a, b) => {
            let (a, b) = (strip_until(fs, a), strip_until(fs, b));
            fs.since(a, b)
        }
    }
}

/// The location of `A_φ` holding the closure members true at `pos`.
fn hintikka(view: &FormulaAutomaton, truth: impl Fn(Formula) -> bool) -> BitSet {
    view.closure()
        .formulas()
        .iter()
        .enumerate()
        .filter(|(_, &g)| truth(g))
        .map(|(i, _)| i)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn display_parses_back(seed in any::<u64>(), size in 1usize..12) {
        let mut fs = Formulas::new();
        let f = gen_formula(&mut fs, seed, size, &["p", "q", "r"]);
        let text = fs.display(f);
        prop_assert_eq!(fs.parse(&text).unwrap(), f);
        let mut fresh = Formulas::new();
        let g = fresh.parse(&text).unwrap();
        prop_assert_eq!(fresh.display(g), text);
    }

    #[test]
    fn closure_is_closed(seed in any::<u64>(), size in 1usize..12) {
        let mut fs = Formulas::new();
        let f = gen_formula(&mut fs, seed, size, &VARS);
        let cl = fs.closure(f);
        prop_assert_eq!(cl.len() % 2, 0);
        prop_assert!(cl.contains(f));
        prop_assert!(cl.len() <= 2 * size + 2);
        for (i, &g) in cl.formulas().iter().enumerate() {
            if i % 2 == 1 {
                prop_assert_eq!(fs.node(g), Node::Not(cl.formulas()[i - 1]));
                continue;
            }
            prop_assert!(!matches!(fs.node(g), Node::Not(_)));
            match fs.node(g) {
                Node::And(a, b) | Node::Until(a, b) | Node::Since(a, b) => {
                    prop_assert!(cl.contains(a) && cl.contains(b));
                }
                _ => {}
            }
        }
    }

    #[test]
    fn trunc_is_idempotent(a in ordinal(), n in 1u32..6) {
        let t = a.trunc(n).unwrap();
        prop_assert_eq!(t.trunc(n).unwrap(), t.clone());
        prop_assert!(a.n_equivalent(&t, n).unwrap());
        prop_assert!(t < Ordinal::omega_pow(n + 1));
        prop_assert!(t <= a);
    }

    #[test]
    fn n_equivalence_is_an_equivalence(a in ordinal(), b in ordinal(), c in ordinal(), n in 1u32..5) {
        prop_assert!(a.n_equivalent(&a, n).unwrap());
        prop_assert_eq!(a.n_equivalent(&b, n).unwrap(), b.n_equivalent(&a, n).unwrap());
        if a.n_equivalent(&b, n).unwrap() && b.n_equivalent(&c, n).unwrap() {
            prop_assert!(a.n_equivalent(&c, n).unwrap());
        }
        if a.n_equivalent(&b, n + 1).unwrap() {
            prop_assert!(a.n_equivalent(&b, n).unwrap());
        }
    }

    #[test]
    fn codes_round_trip(a in ordinal(), m in 1u32..8, n in 1u32..8) {
        let c = a.code(CodeLevel::Omega);
        prop_assert_eq!(c.to_ordinal(), Some(a.clone()));
        let c = a.code(CodeLevel::Finite(m));
        prop_assert_eq!(c.to_ordinal().is_some(), a < Ordinal::omega_pow(m));
        if n <= m {
            prop_assert_eq!(c.trunc(n).unwrap(), a.trunc(n).unwrap());
        } else {
            prop_assert!(c.trunc(n).is_err());
        }
        let text = c.to_string();
        prop_assert_eq!(ordsat::ordinal::OrdinalCode::parse(&text, c.m).unwrap(), c);
    }

    #[test]
    fn past_formulas_see_only_the_prefix(seed in any::<u64>(), size in 1usize..8, u in letters(1..5), v in letters(1..4)) {
        let mut fs = Formulas::new();
        let f = past_formula(&mut fs, seed, size);
        let lasso = LassoModel { u: u.clone(), v: v.clone() };
        let mut unrolled = u.clone();
        unrolled.extend(v.iter().cloned());
        unrolled.extend(v.iter().cloned());
        let finite = FiniteModel(unrolled);
        for beta in 0..u.len() + 2 * v.len() {
            prop_assert_eq!(eval_finite(&fs, f, &finite, beta).unwrap(), eval_lasso(&fs, f, &lasso, beta).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The word of Hintikka locations of any finite model is a run of
    /// `A_φ`, accepting exactly when the model satisfies `φ`.
    #[test]
    fn finite_hintikka_runs(seed in any::<u64>(), size in 1usize..8, w in letters(1..7)) {
        let mut fs = Formulas::new();
        let f = gen_formula(&mut fs, seed, size, &VARS);
        let view = FormulaAutomaton::new(&fs, f);
        let model = FiniteModel(w);
        let cl = view.closure().formulas().to_vec();
        let cols: Vec<Vec<bool>> = cl.iter().map(|&g| eval_finite_all(&fs, g, &model).unwrap()).collect();
        let word: Vec<BitSet> = (0..model.0.len())
            .map(|i| hintikka(&view, |g| cols[cl.iter().position(|&h| h == g).unwrap()][i]))
            .collect();
        let run = RunExpr::Word(word);
        let attrs = validate_run(&view, &run).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(is_accepting(&view, &attrs), eval_finite(&fs, f, &model, 0).unwrap());
    }

    /// Same for ω-models `u·v^ω`, read off far enough into the loop that
    /// past formulas have settled.
    #[test]
    fn lasso_hintikka_runs(seed in any::<u64>(), size in 1usize..7, u in letters(1..4), v in letters(1..4)) {
        let mut fs = Formulas::new();
        let f = gen_formula(&mut fs, seed, size, &VARS);
        let view = FormulaAutomaton::new(&fs, f);
        let k = view.closure().len() + 1;
        let mut prefix = u.clone();
        for _ in 0..k {
            prefix.extend(v.iter().cloned());
        }
        let shifted = LassoModel { u: prefix.clone(), v: v.clone() };
        let loc = |i: usize| hintikka(&view, |g| eval_lasso(&fs, g, &shifted, i).unwrap());
        let head: Vec<BitSet> = (0..prefix.len()).map(loc).collect();
        let body: Vec<BitSet> = (prefix.len()..prefix.len() + v.len()).map(loc).collect();
        let next: Vec<BitSet> = (prefix.len() + v.len()..prefix.len() + 2 * v.len()).map(loc).collect();
        prop_assert_eq!(&body, &next);
        let run = RunExpr::concat([RunExpr::Word(head), RunExpr::omega(RunExpr::Word(body))]);
        let attrs = validate_run(&view, &run).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let model = LassoModel { u, v };
        prop_assert_eq!(is_accepting(&view, &attrs), eval_lasso(&fs, f, &model, 0).unwrap());
    }

    /// The lazy view and the explicit automaton agree on locations,
    /// transitions, acceptance and the verdict.
    #[test]
    fn lazy_matches_explicit(seed in any::<u64>(), size in 1usize..5) {
        let mut fs = Formulas::new();
        let f = gen_formula(&mut fs, seed, size, &VARS);
        let lazy = FormulaAutomaton::new(&fs, f);
        let explicit = build_automaton(&fs, f, 12).unwrap();
        let n = lazy.closure().len();
        let mut locs = Vec::new();
        for mask in 0u32..(1 << n) {
            let q: BitSet = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            prop_assert_eq!(lazy.is_location(&q), explicit.is_location(&q));
            if lazy.is_location(&q) {
                locs.push(q);
            }
        }
        prop_assert_eq!(locs.len(), explicit.locations().len());
        for q in &locs {
            prop_assert_eq!(lazy.is_initial(q), explicit.is_initial(q));
            prop_assert_eq!(lazy.is_final(q), explicit.is_final(q));
            prop_assert_eq!(lazy.in_fcal(q), explicit.in_fcal(q));
            for q2 in &locs {
                prop_assert_eq!(lazy.next_ok(q, q2), explicit.next_ok(q, q2));
                let y = q.intersection(q2);
                prop_assert_eq!(lazy.in_fcal(&y), explicit.in_fcal(&y));
                for q3 in &locs {
                    prop_assert_eq!(lazy.lim_ok(&y, q3), explicit.lim_ok(&y, q3));
                }
            }
        }
        let a = check_nonempty(&lazy, &Config::default()).unwrap().0.is_nonempty();
        let b = check_nonempty(&explicit, &Config::default()).unwrap().0.is_nonempty();
        prop_assert_eq!(a, b);
    }

    /// `validate_run` on finite words and simple lassos against a direct
    /// reading of the transition relations.
    #[test]
    fn validate_matches_naive(seed in any::<u64>(), basis in 1usize..4, picks in prop::collection::vec(any::<prop::sample::Index>(), 1..6), tail in prop::collection::vec(any::<prop::sample::Index>(), 0..3)) {
        let a = gen_automaton(seed, basis);
        let locs = a.locations();
        let word: Vec<BitSet> = picks.iter().map(|i| locs[i.index(locs.len())].clone()).collect();
        let after: Vec<BitSet> = tail.iter().map(|i| locs[i.index(locs.len())].clone()).collect();
        let steps_ok = |w: &[BitSet]| w.windows(2).all(|p| a.next_ok(&p[0], &p[1]));

        let naive_word = steps_ok(&word);
        prop_assert_eq!(validate_run(&a, &RunExpr::Word(word.clone())).is_ok(), naive_word);

        let blim = word.iter().skip(1).fold(word[0].clone(), |acc, q| acc.intersection(q));
        let looped = naive_word && a.next_ok(word.last().unwrap(), &word[0]);
        let naive_lasso = looped
            && (after.is_empty() || (a.lim_ok(&blim, &after[0]) && steps_ok(&after)));
        let mut parts = vec![RunExpr::omega(RunExpr::Word(word.clone()))];
        if !after.is_empty() {
            parts.push(RunExpr::Word(after.clone()));
        }
        let run = RunExpr::concat(parts);
        let got = validate_run(&a, &run);
        prop_assert_eq!(got.is_ok(), naive_lasso);
        if let Ok(attrs) = got {
            prop_assert_eq!(attrs.length, &Ordinal::omega() + &Ordinal::finite(after.len() as u64));
        }
    }

    #[test]
    fn congruence_is_an_equivalence(seed in any::<u64>(), basis in 1usize..3, shape in prop::collection::vec((any::<prop::sample::Index>(), 0u8..3), 3)) {
        let a = gen_automaton(seed, basis);
        let locs = a.locations();
        let runs: Vec<RunExpr> = shape
            .iter()
            .map(|(i, kind)| {
                let q = locs[i.index(locs.len())].clone();
                match kind {
                    0 => RunExpr::single(q),
                    1 => RunExpr::Word(vec![q.clone(), q]),
                    _ => RunExpr::omega(RunExpr::single(q)),
                }
            })
            .collect();
        for r in &runs {
            prop_assert!(congruent(r, r).unwrap());
        }
        for r in &runs {
            for s in &runs {
                prop_assert_eq!(congruent(r, s).unwrap(), congruent(s, r).unwrap());
                for t in &runs {
                    if congruent(r, s).unwrap() && congruent(s, t).unwrap() {
                        prop_assert!(congruent(r, t).unwrap());
                    }
                }
                if congruent(r, s).unwrap() {
                    let (x, y) = (run_attrs(r).unwrap(), run_attrs(s).unwrap());
                    prop_assert_eq!(x.abstraction(), y.abstraction());
                }
            }
        }
    }
}
