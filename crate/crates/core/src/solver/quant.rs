//! Quantitative operators `X^β` and `U^β` and their translation into
//! LTL(U,S).
//!
//! `σ, β ⊨ X^γ ψ` iff `β + γ` is a position satisfying `ψ`;
//! `σ, β ⊨ ψ1 U^γ ψ2` iff `ψ2` holds at some `β + δ`, `0 < δ < γ`, with `ψ1`
//! at every `β + δ'`, `0 < δ' < δ`. Coefficients of `γ` are read in unary
//! when measuring formula size.

use std::fmt;

use thiserror::Error;

use crate::formula::{lex, DerivedOp, Formula, Formulas, ParseError, Tok};
use crate::ordinal::{theta, CodeLevel, Ordinal, OrdinalError};

/// The bound of `U^β`: an ordinal below ω^ω, or ω^ω itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Ordinal(Ordinal),
    OmegaOmega,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Ordinal(o) => write!(f, "{o}"),
            Bound::OmegaOmega => write!(f, "w^w"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QuantFormula {
    Var(String),
    True,
    Not(Box<QuantFormula>),
    And(Box<QuantFormula>, Box<QuantFormula>),
    Or(Box<QuantFormula>, Box<QuantFormula>),
    Until(Box<QuantFormula>, Box<QuantFormula>),
    Since(Box<QuantFormula>, Box<QuantFormula>),
    Derived(DerivedOp, Box<QuantFormula>),
    NextPow(Ordinal, Box<QuantFormula>),
    UntilPow(Bound, Box<QuantFormula>, Box<QuantFormula>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuantError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
    #[error("exponent {0} is outside level {1}")]
    OutsideLevel(String, CodeLevel),
}

use QuantFormula as Q;

fn bx(q: Q) -> Box<Q> {
    Box::new(q)
}

impl QuantFormula {
    pub fn not(self) -> Q {
        match self {
            Q::Not(inner) => *inner,
            q => Q::Not(bx(q)),
        }
    }

    pub fn and(self, other: Q) -> Q {
        Q::And(bx(self), bx(other))
    }

    pub fn or(self, other: Q) -> Q {
        Q::Or(bx(self), bx(other))
    }

    pub fn next_pow(beta: Ordinal, q: Q) -> Q {
        Q::NextPow(beta, bx(q))
    }

    pub fn until_pow(beta: Bound, a: Q, b: Q) -> Q {
        Q::UntilPow(beta, bx(a), bx(b))
    }

    /// `Σ_nodes (1 + Σ_j a_j·(k_j + 1))` over the exponents `Σ ω^{k_j}·a_j`.
    pub fn size(&self) -> u64 {
        fn weight(o: &Ordinal) -> u64 {
            o.terms().iter().map(|&(k, a)| a * (k as u64 + 1)).sum()
        }
        match self {
            Q::Var(_) | Q::True => 1,
            Q::Not(a) | Q::Derived(_, a) => 1 + a.size(),
            Q::And(a, b) | Q::Or(a, b) | Q::Until(a, b) | Q::Since(a, b) => 1 + a.size() + b.size(),
            Q::NextPow(o, a) => 1 + weight(o) + a.size(),
            Q::UntilPow(bound, a, b) => {
                let w = match bound {
                    Bound::Ordinal(o) => weight(o),
                    Bound::OmegaOmega => 1,
                };
                1 + w + a.size() + b.size()
            }
        }
    }

    /// Checks exponents against level `k`: `X^β` needs `β < ω^k` and `U^β`
    /// needs `β ≤ ω^k`; `U^{ω^ω}` needs level ω.
    pub fn check_level(&self, level: CodeLevel) -> Result<(), QuantError> {
        let below = |o: &Ordinal| match level {
            CodeLevel::Omega => true,
            CodeLevel::Finite(k) => o < &Ordinal::omega_pow(k),
        };
        match self {
            Q::Var(_) | Q::True => Ok(()),
            Q::Not(a) | Q::Derived(_, a) => a.check_level(level),
            Q::And(a, b) | Q::Or(a, b) | Q::Until(a, b) | Q::Since(a, b) => {
                a.check_level(level)?;
                b.check_level(level)
            }
            Q::NextPow(o, a) => {
                if !below(o) {
                    return Err(QuantError::OutsideLevel(o.to_string(), level));
                }
                a.check_level(level)
            }
            Q::UntilPow(bound, a, b) => {
                let ok = match (bound, level) {
                    (Bound::OmegaOmega, l) => l == CodeLevel::Omega,
                    (Bound::Ordinal(o), CodeLevel::Finite(k)) => o <= &Ordinal::omega_pow(k),
                    (Bound::Ordinal(_), CodeLevel::Omega) => true,
                };
                if !ok {
                    return Err(QuantError::OutsideLevel(bound.to_string(), level));
                }
                a.check_level(level)?;
                b.check_level(level)
            }
        }
    }

    /// Rewrites into the operators `X^{ω^i}`, `U^{ω^i}` and `U^{ω^ω}` only.
    pub fn normalize(&self) -> Q {
        match self {
            Q::Var(_) | Q::True => self.clone(),
            Q::Not(a) => Q::Not(bx(a.normalize())),
            Q::Derived(op, a) => Q::Derived(*op, bx(a.normalize())),
            Q::And(a, b) => a.normalize().and(b.normalize()),
            Q::Or(a, b) => a.normalize().or(b.normalize()),
            Q::Until(a, b) => Q::Until(bx(a.normalize()), bx(b.normalize())),
            Q::Since(a, b) => Q::Since(bx(a.normalize()), bx(b.normalize())),
            Q::NextPow(o, a) => {
                // X^{β1+β2} = X^{β1} X^{β2}: largest exponent outermost
                let mut out = a.normalize();
                for &(k, c) in o.terms().iter().rev() {
                    for _ in 0..c {
                        out = Q::next_pow(Ordinal::omega_pow(k), out);
                    }
                }
                out
            }
            Q::UntilPow(Bound::OmegaOmega, a, b) => Q::until_pow(Bound::OmegaOmega, a.normalize(), b.normalize()),
            Q::UntilPow(Bound::Ordinal(o), a, b) => until_chain(o, &a.normalize(), &b.normalize()),
        }
    }
}

fn bottom() -> Q {
    Q::True.not()
}

/// `ψ1 U^β ψ2` with `β = δ + β'`, `δ = ω^{k1}` the first term of `β`:
/// either the witness lies before `δ`, or `ψ1` holds up to `δ` and the
/// witness is at `δ` or within `β'` after it.
fn until_chain(beta: &Ordinal, a: &Q, b: &Q) -> Q {
    let Some(&(k, c)) = beta.terms().first() else {
        return bottom();
    };
    let delta = Ordinal::omega_pow(k);
    let mut rest = beta.terms().to_vec();
    if c > 1 {
        rest[0].1 -= 1;
    } else {
        rest.remove(0);
    }
    let here = Q::until_pow(Bound::Ordinal(delta.clone()), a.clone(), b.clone());
    if rest.is_empty() {
        return here;
    }
    let rest = Ordinal::from_terms(rest).expect("suffix of a CNF is a CNF");
    let hold = Q::until_pow(Bound::Ordinal(delta.clone()), Q::True, a.clone().not()).not();
    let after = b.clone().or(a.clone().and(until_chain(&rest, a, b)));
    here.or(hold.and(Q::next_pow(delta, after)))
}

/// The homomorphic translation of a normalized formula, with
/// `t(X^{ω^i} ψ) = ¬θ_i U (θ_i ∧ t(ψ))`,
/// `t(ψ1 U^{ω^i} ψ2) = (¬θ_i ∧ t(ψ1)) U (¬θ_i ∧ t(ψ2))` and
/// `t(ψ1 U^{ω^ω} ψ2) = t(ψ1) U t(ψ2)`.
fn translate_normalized(fs: &mut Formulas, q: &Q) -> Formula {
    match q {
        Q::Var(v) => fs.var(v),
        Q::True => fs.top(),
        Q::Not(a) => {
            let a = translate_normalized(fs, a);
            fs.not(a)
        }
        Q::And(a, b) => {
            let (a, b) = (translate_normalized(fs, a), translate_normalized(fs, b));
            fs.and(a, b)
        }
        Q::Or(a, b) => {
            let (a, b) = (translate_normalized(fs, a), translate_normalized(fs, b));
            fs.or(a, b)
        }
        Q::Until(a, b) | Q::UntilPow(Bound::OmegaOmega, a, b) => {
            let (a, b) = (translate_normalized(fs, a), translate_normalized(fs, b));
            fs.until(a, b)
        }
        Q::Since(a, b) => {
            let (a, b) = (translate_normalized(fs, a), translate_normalized(fs, b));
            fs.since(a, b)
        }
        Q::Derived(op, a) => {
            let a = translate_normalized(fs, a);
            fs.expand(*op, a)
        }
        Q::NextPow(o, a) => {
            let i = single_power(o);
            let a = translate_normalized(fs, a);
            let th = theta(fs, i);
            let nth = fs.not(th);
            let g = fs.and(th, a);
            fs.until(nth, g)
        }
        Q::UntilPow(Bound::Ordinal(o), a, b) => {
            let i = single_power(o);
            let (a, b) = (translate_normalized(fs, a), translate_normalized(fs, b));
            let th = theta(fs, i);
            let nth = fs.not(th);
            let l = fs.and(nth, a);
            let r = fs.and(nth, b);
            fs.until(l, r)
        }
    }
}

fn single_power(o: &Ordinal) -> u32 {
    match o.terms() {
        [(k, 1)] => *k,
        _ => panic!("normalized formulas only carry exponents ω^i, got {o}"),
    }
}

/// Level check, normalization, then `t`.
pub fn translate_quant(fs: &mut Formulas, q: &Q, level: CodeLevel) -> Result<Formula, QuantError> {
    q.check_level(level)?;
    Ok(translate_normalized(fs, &q.normalize()))
}

/// Parses the formula grammar extended with `X^[β] ψ` and `ψ1 U^[β] ψ2`
/// (same precedence as `X` and `U`); `β` is an ordinal or `w^w`.
pub fn parse_quant(text: &str) -> Result<Q, QuantError> {
    let tokens = lex(text)?;
    let mut p = QParser { tokens, pos: 0 };
    let q = p.binary()?;
    match p.peek() {
        Tok::End => Ok(q),
        _ => Err(p.syntax("unexpected trailing input").into()),
    }
}

fn parse_bound(s: &str) -> Result<Bound, QuantError> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if matches!(compact.as_str(), "w^w" | "ω^ω") {
        return Ok(Bound::OmegaOmega);
    }
    Ok(Bound::Ordinal(compact.parse()?))
}

struct QParser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
}

impl QParser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, msg: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.tokens[self.pos].0,
            msg: msg.to_string(),
        }
    }

    fn binary(&mut self) -> Result<Q, QuantError> {
        let lhs = self.disjunction()?;
        match self.peek().clone() {
            Tok::Until => {
                self.bump();
                Ok(Q::Until(bx(lhs), bx(self.binary()?)))
            }
            Tok::Since => {
                self.bump();
                Ok(Q::Since(bx(lhs), bx(self.binary()?)))
            }
            Tok::UntilPow(b) => {
                self.bump();
                let bound = parse_bound(&b)?;
                Ok(Q::until_pow(bound, lhs, self.binary()?))
            }
            _ => Ok(lhs),
        }
    }

    fn disjunction(&mut self) -> Result<Q, QuantError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = lhs.or(self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Q, QuantError> {
        let mut lhs = self.prefix()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = lhs.and(self.prefix()?);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Q, QuantError> {
        let t = self.peek().clone();
        let op = match t {
            Tok::Not => None,
            Tok::Next => Some(DerivedOp::Next),
            Tok::Prev => Some(DerivedOp::Prev),
            Tok::Eventually => Some(DerivedOp::Eventually),
            Tok::EventuallyStrict => Some(DerivedOp::EventuallyStrict),
            Tok::Always => Some(DerivedOp::Always),
            Tok::AlwaysStrict => Some(DerivedOp::AlwaysStrict),
            Tok::NextPow(b) => {
                self.bump();
                let o: Ordinal = b.parse()?;
                return Ok(Q::next_pow(o, self.prefix()?));
            }
            _ => return self.atom(),
        };
        self.bump();
        let arg = self.prefix()?;
        Ok(match op {
            None => Q::Not(bx(arg)),
            Some(op) => Q::Derived(op, bx(arg)),
        })
    }

    fn atom(&mut self) -> Result<Q, QuantError> {
        match self.bump() {
            Tok::Ident(name) => Ok(Q::Var(name)),
            Tok::True => Ok(Q::True),
            Tok::False => Ok(bottom()),
            Tok::LParen => {
                let q = self.binary()?;
                match self.bump() {
                    Tok::RParen => Ok(q),
                    _ => Err(self.syntax("expected `)`").into()),
                }
            }
            Tok::End => Err(self.syntax("unexpected end of input").into()),
            _ => Err(self.syntax("unexpected token").into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn next_omega_clause() {
        let mut fs = Formulas::new();
        let q = parse_quant("X^[w] p").unwrap();
        let f = translate_quant(&mut fs, &q, CodeLevel::Finite(2)).unwrap();
        let t1 = theta(&mut fs, 1);
        let p = fs.var("p");
        let nt1 = fs.not(t1);
        let g = fs.and(t1, p);
        assert_eq!(f, fs.until(nt1, g));
    }

    #[test]
    fn until_omega_omega_is_until() {
        let mut fs = Formulas::new();
        let q = parse_quant("p U^[w^w] q").unwrap();
        let f = translate_quant(&mut fs, &q, CodeLevel::Omega).unwrap();
        assert_eq!(f, fs.parse("p U q").unwrap());
        assert!(matches!(
            translate_quant(&mut fs, &q, CodeLevel::Finite(3)),
            Err(QuantError::OutsideLevel(..))
        ));
    }

    #[test]
    fn next_power_normalization() {
        let q = parse_quant("X^[w+2] p").unwrap();
        assert_eq!(q.normalize(), parse_quant("X^[w] X^[1] X^[1] p").unwrap());
        let q = parse_quant("X^[w^2*2+w] p").unwrap();
        assert_eq!(q.normalize(), parse_quant("X^[w^2] X^[w^2] X^[w] p").unwrap());
        assert_eq!(parse_quant("X^[0] p").unwrap().normalize(), Q::Var("p".into()));
    }

    #[test]
    fn until_power_normalization() {
        let q = parse_quant("p U^[w] q").unwrap();
        assert_eq!(q.normalize(), q);
        let two = parse_quant("p U^[2] q").unwrap().normalize();
        let expected = parse_quant(
            "(p U^[1] q) | (!(true U^[1] !p) & X^[1] (q | (p & (p U^[1] q))))",
        )
        .unwrap();
        assert_eq!(two, expected);
        assert_eq!(parse_quant("p U^[0] q").unwrap().normalize(), bottom());
    }

    #[test]
    fn level_checks() {
        let q = parse_quant("X^[w^2] p").unwrap();
        assert!(q.check_level(CodeLevel::Finite(2)).is_err());
        assert!(q.check_level(CodeLevel::Finite(3)).is_ok());
        let q = parse_quant("p U^[w^2] q").unwrap();
        assert!(q.check_level(CodeLevel::Finite(2)).is_ok());
        assert!(q.check_level(CodeLevel::Finite(1)).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_quant("X^[w^] p"), Err(QuantError::Ordinal(_))));
        assert!(matches!(parse_quant("p U^[w"), Err(QuantError::Parse(_))));
        assert!(matches!(parse_quant("(p"), Err(QuantError::Parse(_))));
    }
}
