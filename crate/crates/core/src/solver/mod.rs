//! End-to-end satisfiability: over all countable ordinals, at a fixed
//! length given as an ordinal or as a code, and for the quantitative
//! operators `X^β`, `U^β`.

pub mod quant;

use thiserror::Error;

use crate::automaton::{is_accepting, validate_run, RunError, RunExpr};
use crate::emptiness::{check_nonempty, Config, EmptinessError, TopDown, Verdict};
use crate::formula::{Formula, Formulas};
use crate::ordinal::{def_formula, Ordinal, OrdinalCode, OrdinalError};
use crate::translate::FormulaAutomaton;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Emptiness(#[from] EmptinessError),
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
    #[error("witness rejected by the run checker: {0}")]
    InvalidWitness(#[from] RunError),
    #[error("witness is a valid run but not accepting")]
    NotAccepting,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    #[default]
    Saturate,
    /// The memoized top-down procedure; decides without producing a witness.
    TopDown,
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub config: Config,
    pub engine: Engine,
}

/// An accepting run of `A_φ`, already re-checked, with its model.
#[derive(Clone, Debug)]
pub struct Witness {
    pub run: RunExpr,
    /// The run with each location replaced by its set of variables, as
    /// indices into `vars`.
    pub model: RunExpr,
    pub vars: Vec<String>,
    pub length: Ordinal,
}

#[derive(Clone, Debug)]
pub struct SatOutcome {
    pub sat: bool,
    pub witness: Option<Witness>,
    /// `|φ|` of the formula handed to the automaton construction.
    pub size: usize,
    pub triples: usize,
    pub stages: usize,
}

/// Decides whether `φ` has a model of some countable length.
pub fn sat(fs: &Formulas, phi: Formula, opts: &SolveOptions) -> Result<SatOutcome, SolveError> {
    let view = FormulaAutomaton::new(fs, phi);
    let size = view.closure().len();
    match opts.engine {
        Engine::TopDown => {
            let sat = TopDown::new(&view).with_timeout(opts.config.timeout).decide()?;
            Ok(SatOutcome {
                sat,
                witness: None,
                size,
                triples: 0,
                stages: 0,
            })
        }
        Engine::Saturate => {
            let (verdict, table) = check_nonempty(&view, &opts.config)?;
            let witness = match verdict {
                Verdict::Empty => None,
                Verdict::NonEmpty { witness, .. } => {
                    let attrs = validate_run(&view, &witness)?;
                    if !is_accepting(&view, &attrs) {
                        return Err(SolveError::NotAccepting);
                    }
                    Some(Witness {
                        model: view.project_model(&witness),
                        vars: view.variables(),
                        run: witness,
                        length: attrs.length,
                    })
                }
            };
            Ok(SatOutcome {
                sat: witness.is_some(),
                witness,
                size,
                triples: table.len(),
                stages: table.stages(),
            })
        }
    }
}

/// A model length: an ordinal below ω^ω, or a code for any countable one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Length {
    Ordinal(Ordinal),
    Code(OrdinalCode),
}

/// `trunc_{|φ|+2}` of the length, the only part of it `φ` can observe.
pub fn truncated_length(fs: &Formulas, phi: Formula, alpha: &Length) -> Result<Ordinal, SolveError> {
    let n = fs.size(phi) as u32 + 2;
    Ok(match alpha {
        Length::Ordinal(a) => a.trunc(n)?,
        Length::Code(c) => c.trunc(n)?,
    })
}

/// Decides whether `φ` has a model of length `α`, as satisfiability of
/// `φ ∧ def_β` with `β = trunc_{|φ|+2}(α)`.
pub fn sat_at(fs: &mut Formulas, phi: Formula, alpha: &Length, opts: &SolveOptions) -> Result<(SatOutcome, Ordinal), SolveError> {
    let beta = truncated_length(fs, phi, alpha)?;
    let def = def_formula(fs, &beta)?;
    let conj = fs.and(phi, def);
    Ok((sat(fs, conj, opts)?, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::CodeLevel;

    fn solve(src: &str) -> SatOutcome {
        let mut fs = Formulas::new();
        let f = fs.parse(src).unwrap();
        sat(&fs, f, &SolveOptions::default()).unwrap()
    }

    fn solve_at(src: &str, alpha: &str) -> bool {
        let mut fs = Formulas::new();
        let f = fs.parse(src).unwrap();
        let a = Length::Ordinal(alpha.parse().unwrap());
        sat_at(&mut fs, f, &a, &SolveOptions::default()).unwrap().0.sat
    }

    #[test]
    fn sat_examples() {
        let r = solve("p");
        assert!(r.sat);
        assert_eq!(r.witness.unwrap().length, Ordinal::finite(1));
        assert!(!solve("p & !p").sat);
        assert!(!solve("G p & F !p").sat);
        assert!(!solve("G F p & F G !p").sat);
        let r = solve("F+ true & G+ F+ true");
        assert!(r.sat);
        assert!(r.witness.unwrap().length.is_limit());
    }

    #[test]
    fn sat_at_examples() {
        assert!(solve_at("!F+ true", "1"));
        assert!(!solve_at("!F+ true", "2"));
        assert!(solve_at("p", "w"));
        assert!(solve_at("G+ X- true & F+ true & G+ X true", "w"));
        assert!(!solve_at("G+ X- true & F+ true & G+ X true", "w+1"));
        assert!(!solve_at("G+ X- true & F+ true & G+ X true", "3"));
    }

    #[test]
    fn limit_positions() {
        // a position after 0 with no predecessor
        assert!(solve_at("F+ !X- true", "w*2"));
        assert!(solve_at("F+ !X- true", "w+3"));
        assert!(!solve_at("F+ !X- true", "w"));
        assert!(!solve_at("F+ !X- true", "5"));
    }

    #[test]
    fn engines_agree() {
        for src in ["p U q", "G p & F !p", "G+ F+ p", "(p S q) U !p", "!F+ true & X- true"] {
            let mut fs = Formulas::new();
            let f = fs.parse(src).unwrap();
            let a = sat(&fs, f, &SolveOptions::default()).unwrap().sat;
            let opts = SolveOptions { engine: Engine::TopDown, ..Default::default() };
            let b = sat(&fs, f, &opts).unwrap().sat;
            assert_eq!(a, b, "{src}");
        }
    }

    #[test]
    fn code_levels() {
        let mut fs = Formulas::new();
        let f = fs.parse("p").unwrap();
        let code = OrdinalCode::parse("(-1, -)", CodeLevel::Finite(2)).unwrap();
        assert!(matches!(
            sat_at(&mut fs, f, &Length::Code(code), &SolveOptions::default()),
            Err(SolveError::Ordinal(OrdinalError::CodeLevelTooSmall { .. }))
        ));
        let code = OrdinalCode::parse("(-1, [1,0])", CodeLevel::Omega).unwrap();
        let (r, beta) = sat_at(&mut fs, f, &Length::Code(code), &SolveOptions::default()).unwrap();
        assert!(r.sat);
        assert_eq!(beta, "w^4+w".parse().unwrap());
        assert!(matches!(
            sat_at(&mut fs, f, &Length::Ordinal(Ordinal::zero()), &SolveOptions::default()),
            Err(SolveError::Ordinal(OrdinalError::Zero))
        ));
    }
}
