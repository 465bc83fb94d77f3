//! Ordinals below ω^ω in Cantor normal form, truncation, m-codes, and the
//! variable-free formulas that pin down positions and model lengths.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::{Formula, Formulas};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrdinalError {
    #[error("cannot parse ordinal `{0}`: {1}")]
    Parse(String, String),
    #[error("exponents must strictly decrease")]
    NonDecreasingExponents,
    #[error("coefficients must be positive")]
    ZeroCoefficient,
    #[error("the ordinal must be positive")]
    Zero,
    #[error("coefficient overflow")]
    Overflow,
    #[error("invalid ordinal code: {0}")]
    InvalidCode(String),
    #[error("code level {have} is below the required level {need}")]
    CodeLevelTooSmall { have: u32, need: u32 },
}

/// `ω^k1·a1 + … + ω^km·am` with `k1 > … > km` and every `ai ≥ 1`. The empty
/// sum is 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Ordinal {
    terms: Vec<(u32, u64)>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn finite(n: u64) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            Ordinal {
                terms: vec![(0, n)],
            }
        }
    }

    pub fn omega() -> Self {
        Self::omega_pow(1)
    }

    /// `ω^k`.
    pub fn omega_pow(k: u32) -> Self {
        Ordinal {
            terms: vec![(k, 1)],
        }
    }

    pub fn from_terms(terms: Vec<(u32, u64)>) -> Result<Self, OrdinalError> {
        if terms.iter().any(|&(_, a)| a == 0) {
            return Err(OrdinalError::ZeroCoefficient);
        }
        if terms.windows(2).any(|w| w[0].0 <= w[1].0) {
            return Err(OrdinalError::NonDecreasingExponents);
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[(u32, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_successor(&self) -> bool {
        self.terms.last().is_some_and(|&(k, _)| k == 0)
    }

    pub fn is_limit(&self) -> bool {
        self.terms.last().is_some_and(|&(k, _)| k > 0)
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|&(k, _)| k == 0)
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(0, n)] => Some(*n),
            _ => None,
        }
    }

    pub fn leading_exponent(&self) -> Option<u32> {
        self.terms.first().map(|&(k, _)| k)
    }

    pub fn checked_add(&self, rhs: &Ordinal) -> Option<Ordinal> {
        let Some(&(k, a)) = rhs.terms.first() else {
            return Some(self.clone());
        };
        let mut terms: Vec<(u32, u64)> = self.terms.iter().copied().filter(|&(e, _)| e > k).collect();
        let carry = self
            .terms
            .iter()
            .find(|&&(e, _)| e == k)
            .map_or(0, |&(_, c)| c);
        terms.push((k, a.checked_add(carry)?));
        terms.extend_from_slice(&rhs.terms[1..]);
        Some(Ordinal { terms })
    }

    /// `self · ω`.
    pub fn mul_omega(&self) -> Ordinal {
        match self.leading_exponent() {
            None => Ordinal::zero(),
            Some(k) => Ordinal::omega_pow(k + 1),
        }
    }

    /// Predecessor of a successor ordinal.
    pub fn predecessor(&self) -> Option<Ordinal> {
        let mut terms = self.terms.clone();
        match terms.last_mut() {
            Some((0, a)) => {
                *a -= 1;
                if *a == 0 {
                    terms.pop();
                }
                Some(Ordinal { terms })
            }
            _ => None,
        }
    }

    /// Splits `self = ω^n·γ + β` with `β < ω^n`; returns whether `γ > 0`
    /// together with `β`.
    fn split_at(&self, n: u32) -> (bool, Ordinal) {
        let high = self.terms.iter().any(|&(k, _)| k >= n);
        let low = self.terms.iter().copied().filter(|&(k, _)| k < n).collect();
        (high, Ordinal { terms: low })
    }

    /// `trunc_n(α) = ω^n·min(γ, 1) + β` where `α = ω^n·γ + β`, `β < ω^n`.
    pub fn trunc(&self, n: u32) -> Result<Ordinal, OrdinalError> {
        if self.is_zero() {
            return Err(OrdinalError::Zero);
        }
        let (high, low) = self.split_at(n);
        Ok(if high {
            Ordinal::omega_pow(n)
                .checked_add(&low)
                .expect("no carry into a fresh leading term")
        } else {
            low
        })
    }

    /// `α ≈_n β`.
    pub fn n_equivalent(&self, other: &Ordinal, n: u32) -> Result<bool, OrdinalError> {
        Ok(self.trunc(n)? == other.trunc(n)?)
    }

    pub fn code(&self, m: CodeLevel) -> OrdinalCode {
        let (high, low) = match m {
            CodeLevel::Omega => (false, self.clone()),
            CodeLevel::Finite(m) => self.split_at(m),
        };
        OrdinalCode {
            m,
            quotient_positive: high,
            remainder: dense_coefficients(&low),
        }
    }
}

impl std::ops::Add for &Ordinal {
    type Output = Ordinal;

    fn add(self, rhs: &Ordinal) -> Ordinal {
        self.checked_add(rhs).expect("ordinal coefficient overflow")
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (&(k1, a1), &(k2, a2)) in self.terms.iter().zip(other.terms.iter()) {
            match k1.cmp(&k2).then(a1.cmp(&a2)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, &(k, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            match (k, a) {
                (0, a) => write!(f, "{a}")?,
                (1, 1) => write!(f, "w")?,
                (1, a) => write!(f, "w*{a}")?,
                (k, 1) => write!(f, "w^{k}")?,
                (k, a) => write!(f, "w^{k}*{a}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    /// Grammar: `term ('+' term)*` with `term ::= nat | w ['^' nat] ['*' nat]`.
    /// `ω` is accepted for `w`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |msg: &str| OrdinalError::Parse(s.to_string(), msg.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let compact = compact.replace('ω', "w");
        if compact.is_empty() {
            return Err(err("empty input"));
        }
        if compact == "0" {
            return Ok(Ordinal::zero());
        }
        let mut terms = Vec::new();
        for part in compact.split('+') {
            let nat = |t: &str| t.parse::<u64>().map_err(|_| err("expected a natural number"));
            let term = if let Some(rest) = part.strip_prefix('w') {
                let (exp_part, coef) = match rest.split_once('*') {
                    Some((e, c)) => (e, nat(c)?),
                    None => (rest, 1),
                };
                let exp = if exp_part.is_empty() {
                    1
                } else {
                    let e = exp_part
                        .strip_prefix('^')
                        .ok_or_else(|| err("expected `^` after `w`"))?;
                    u32::try_from(nat(e)?).map_err(|_| OrdinalError::Overflow)?
                };
                (exp, coef)
            } else {
                (0, nat(part)?)
            };
            terms.push(term);
        }
        Ordinal::from_terms(terms)
    }
}

fn dense_coefficients(o: &Ordinal) -> Option<Vec<u64>> {
    let top = o.leading_exponent()?;
    let mut out = vec![0; top as usize + 1];
    for &(k, a) in o.terms() {
        out[(top - k) as usize] = a;
    }
    Some(out)
}

/// The `m` of an m-code: a positive natural or ω.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CodeLevel {
    Finite(u32),
    Omega,
}

impl CodeLevel {
    pub fn at_least(self, n: u32) -> bool {
        match self {
            CodeLevel::Omega => true,
            CodeLevel::Finite(m) => m >= n,
        }
    }
}

impl FromStr for CodeLevel {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "w" | "ω" | "omega" => Ok(CodeLevel::Omega),
            t => t
                .parse::<u32>()
                .ok()
                .filter(|&m| m >= 1)
                .map(CodeLevel::Finite)
                .ok_or_else(|| OrdinalError::InvalidCode(format!("bad code level `{s}`"))),
        }
    }
}

impl fmt::Display for CodeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeLevel::Omega => write!(f, "w"),
            CodeLevel::Finite(m) => write!(f, "{m}"),
        }
    }
}

/// The m-code `(p_m(α), t_m(α))` of a countable ordinal
/// `α = ω^m·α' + ζ`, `ζ < ω^m`.
///
/// `p` is -2 when `α' = 0` and -1 otherwise; `t` is the coefficient tuple
/// `(a_n, …, a_0)` of `ζ` (with `a_n ≠ 0`) or -3 when `ζ = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrdinalCode {
    pub m: CodeLevel,
    quotient_positive: bool,
    remainder: Option<Vec<u64>>,
}

impl OrdinalCode {
    pub fn new(m: CodeLevel, p: i8, t: Option<Vec<u64>>) -> Result<Self, OrdinalError> {
        let quotient_positive = match p {
            -2 => false,
            -1 => true,
            _ => return Err(OrdinalError::InvalidCode(format!("p must be -2 or -1, got {p}"))),
        };
        if let Some(t) = &t {
            if t.first().copied().unwrap_or(0) == 0 {
                return Err(OrdinalError::InvalidCode(
                    "leading coefficient of t must be nonzero".into(),
                ));
            }
            if let CodeLevel::Finite(m) = m {
                if t.len() > m as usize {
                    return Err(OrdinalError::InvalidCode(format!(
                        "remainder has degree {} but must be below ω^{m}",
                        t.len() - 1
                    )));
                }
            }
        }
        Ok(OrdinalCode {
            m,
            quotient_positive,
            remainder: t,
        })
    }

    pub fn p(&self) -> i8 {
        if self.quotient_positive {
            -1
        } else {
            -2
        }
    }

    /// `None` stands for the marker -3.
    pub fn t(&self) -> Option<&[u64]> {
        self.remainder.as_deref()
    }

    /// ζ as an ordinal.
    pub fn remainder(&self) -> Ordinal {
        let Some(t) = &self.remainder else {
            return Ordinal::zero();
        };
        let n = t.len() - 1;
        let terms = t
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a > 0)
            .map(|(i, &a)| ((n - i) as u32, a))
            .collect();
        Ordinal { terms }
    }

    pub fn is_zero(&self) -> bool {
        !self.quotient_positive && self.remainder.is_none()
    }

    /// The exact ordinal, when the code determines it (`p = -2`).
    pub fn to_ordinal(&self) -> Option<Ordinal> {
        (!self.quotient_positive).then(|| self.remainder())
    }

    /// The `m1`-code of the same ordinal, for `m1 ≤ m`.
    pub fn lower(&self, m1: u32) -> Result<OrdinalCode, OrdinalError> {
        if !self.m.at_least(m1) {
            let CodeLevel::Finite(have) = self.m else { unreachable!() };
            return Err(OrdinalError::CodeLevelTooSmall { have, need: m1 });
        }
        let (high, low) = self.remainder().split_at(m1);
        Ok(OrdinalCode {
            m: CodeLevel::Finite(m1),
            quotient_positive: self.quotient_positive || high,
            remainder: dense_coefficients(&low),
        })
    }

    /// `trunc_n` of the coded ordinal; needs `m ≥ n`.
    pub fn trunc(&self, n: u32) -> Result<Ordinal, OrdinalError> {
        if self.is_zero() {
            return Err(OrdinalError::Zero);
        }
        let lowered = self.lower(n)?;
        let low = lowered.remainder();
        Ok(if lowered.quotient_positive {
            &Ordinal::omega_pow(n) + &low
        } else {
            low
        })
    }
}

impl fmt::Display for OrdinalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.remainder {
            None => write!(f, "({}, -)", self.p()),
            Some(t) => {
                let parts: Vec<String> = t.iter().map(u64::to_string).collect();
                write!(f, "({}, [{}])", self.p(), parts.join(","))
            }
        }
    }
}

impl OrdinalCode {
    /// Parses `(p, [a_n,…,a_0])` or `(p, -)`; `<…>` or no brackets also work.
    pub fn parse(text: &str, m: CodeLevel) -> Result<OrdinalCode, OrdinalError> {
        let bad = || OrdinalError::InvalidCode(format!("cannot parse code `{text}`"));
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let s = s
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .or_else(|| s.strip_prefix('<').and_then(|s| s.strip_suffix('>')))
            .unwrap_or(&s);
        let (p, t) = s.split_once(',').ok_or_else(bad)?;
        let p: i8 = p.parse().map_err(|_| bad())?;
        let t = if t == "-" || t == "-3" {
            None
        } else {
            let inner = t
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(bad)?;
            Some(
                inner
                    .split(',')
                    .map(|x| x.parse::<u64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        };
        OrdinalCode::new(m, p, t)
    }
}

/// `θ_0 = ⊤`, `θ_{i+1} = θ_i ∧ ¬(¬θ_i S θ_i)`: holds exactly at positions
/// that are multiples of ω^i.
pub fn theta(fs: &mut Formulas, i: u32) -> Formula {
    let mut t = fs.top();
    for _ in 0..i {
        let nt = fs.not(t);
        let s = fs.since(nt, t);
        let ns = fs.not(s);
        t = fs.and(t, ns);
    }
    t
}

/// A variable-free formula that holds at position 0 exactly in models of
/// length `α`.
pub fn def_formula(fs: &mut Formulas, alpha: &Ordinal) -> Result<Formula, OrdinalError> {
    if alpha.is_zero() {
        return Err(OrdinalError::Zero);
    }
    Ok(def_rec(fs, alpha))
}

fn def_rec(fs: &mut Formulas, alpha: &Ordinal) -> Formula {
    let top = fs.top();
    if let Some(n) = alpha.as_finite() {
        // t(1) = ¬F⁺⊤, t(n) = X t(n-1)
        let last = fs.eventually_strict(top);
        let mut f = fs.not(last);
        for _ in 1..n {
            f = fs.next(f);
        }
        return f;
    }
    let terms = alpha.terms();
    let (k1, a1) = terms[0];
    if a1 >= 2 || terms.len() > 1 {
        let mut rest = terms.to_vec();
        if a1 >= 2 {
            rest[0].1 -= 1;
        } else {
            rest.remove(0);
        }
        let inner = def_rec(fs, &Ordinal { terms: rest });
        let th = theta(fs, k1);
        let nth = fs.not(th);
        let guard = fs.and(th, inner);
        return fs.until(nth, guard);
    }
    if k1 == 1 {
        // G⁺X⁻¹⊤ ∧ F⁺⊤ ∧ G⁺X⊤
        let prev = fs.prev(top);
        let a = fs.always_strict(prev);
        let b = fs.eventually_strict(top);
        let next = fs.next(top);
        let c = fs.always_strict(next);
        let ab = fs.and(a, b);
        return fs.and(ab, c);
    }
    // G⁺¬θ_k ∧ G F⁺ θ_{k-1}
    let th = theta(fs, k1);
    let nth = fs.not(th);
    let a = fs.always_strict(nth);
    let lower = theta(fs, k1 - 1);
    let ev = fs.eventually_strict(lower);
    let b = fs.always(ev);
    fs.and(a, b)
}
