//! LTL(U, S) formulas as a hash-consed DAG.
//!
//! All formulas live in a [`Formulas`] arena. Structurally equal formulas get
//! the same [`Formula`] handle, and `!!f` is identified with `f` at
//! construction time, so no `Not(Not(_))` node ever exists.
//!
//! The arena is a plain owned value: interning needs `&mut Formulas`, and the
//! borrow checker rules out concurrent interning. Handles are `Copy` and are
//! only meaningful together with the arena that produced them.

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::fmt::Write as _;

use thiserror::Error;

/// Handle to an interned formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Formula(u32);

impl Formula {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Var(u32),
    True,
    Not(Formula),
    And(Formula, Formula),
    Until(Formula, Formula),
    Since(Formula, Formula),
}

/// Abbreviations that expand into the core connectives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DerivedOp {
    /// `G f = f & !(true U !f)`
    Always,
    /// `G+ f = !(true U !f)`
    AlwaysStrict,
    /// `F f = !G !f`
    Eventually,
    /// `F+ f = !G+ !f`
    EventuallyStrict,
    /// `X f = false U f`
    Next,
    /// `X- f = false S f`
    Prev,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown operator `{op}` at offset {pos}")]
    UnknownOperator { pos: usize, op: String },
}

#[derive(Default, Clone)]
pub struct Formulas {
    nodes: Vec<Node>,
    index: HashMap<Node, Formula>,
    names: Vec<String>,
    name_index: HashMap<String, u32>,
}

impl Formulas {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, node: Node) -> Formula {
        if let Some(&f) = self.index.get(&node) {
            return f;
        }
        let f = Formula(u32::try_from(self.nodes.len()).expect("formula arena overflow"));
        self.nodes.push(node);
        self.index.insert(node, f);
        // Every non-negated node gets its negation interned eagerly so that
        // closures can be computed without mutating the arena.
        if !matches!(node, Node::Not(_)) {
            self.intern(Node::Not(f));
        }
        f
    }

    fn negation_of(&self, base: Formula) -> Formula {
        self.index[&Node::Not(base)]
    }

    pub fn node(&self, f: Formula) -> Node {
        self.nodes[f.index()]
    }

    pub fn var(&mut self, name: &str) -> Formula {
        let id = match self.name_index.get(name) {
            Some(&id) => id,
            None => {
                let id = self.names.len() as u32;
                self.names.push(name.to_string());
                self.name_index.insert(name.to_string(), id);
                id
            }
        };
        self.intern(Node::Var(id))
    }

    pub fn var_name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn top(&mut self) -> Formula {
        self.intern(Node::True)
    }

    pub fn bottom(&mut self) -> Formula {
        let t = self.top();
        self.not(t)
    }

    pub fn not(&mut self, f: Formula) -> Formula {
        match self.node(f) {
            Node::Not(g) => g,
            _ => self.intern(Node::Not(f)),
        }
    }

    pub fn and(&mut self, a: Formula, b: Formula) -> Formula {
        self.intern(Node::And(a, b))
    }

    /// `a | b` as `!(!a & !b)`.
    pub fn or(&mut self, a: Formula, b: Formula) -> Formula {
        let na = self.not(a);
        let nb = self.not(b);
        let c = self.and(na, nb);
        self.not(c)
    }

    pub fn until(&mut self, a: Formula, b: Formula) -> Formula {
        self.intern(Node::Until(a, b))
    }

    pub fn since(&mut self, a: Formula, b: Formula) -> Formula {
        self.intern(Node::Since(a, b))
    }

    /// Conjunction of a non-empty list, folded to the left.
    pub fn and_all(&mut self, fs: &[Formula]) -> Formula {
        let mut it = fs.iter().copied();
        let first = it.next().expect("and_all of an empty list");
        it.fold(first, |acc, f| self.and(acc, f))
    }

    pub fn expand(&mut self, op: DerivedOp, f: Formula) -> Formula {
        match op {
            DerivedOp::Always => {
                let g = self.expand(DerivedOp::AlwaysStrict, f);
                self.and(f, g)
            }
            DerivedOp::AlwaysStrict => {
                let t = self.top();
                let nf = self.not(f);
                let u = self.until(t, nf);
                self.not(u)
            }
            DerivedOp::Eventually => {
                let nf = self.not(f);
                let g = self.expand(DerivedOp::Always, nf);
                self.not(g)
            }
            DerivedOp::EventuallyStrict => {
                let nf = self.not(f);
                let g = self.expand(DerivedOp::AlwaysStrict, nf);
                self.not(g)
            }
            DerivedOp::Next => {
                let b = self.bottom();
                self.until(b, f)
            }
            DerivedOp::Prev => {
                let b = self.bottom();
                self.since(b, f)
            }
        }
    }

    pub fn always(&mut self, f: Formula) -> Formula {
        self.expand(DerivedOp::Always, f)
    }
    pub fn always_strict(&mut self, f: Formula) -> Formula {
        self.expand(DerivedOp::AlwaysStrict, f)
    }
    pub fn eventually(&mut self, f: Formula) -> Formula {
        self.expand(DerivedOp::Eventually, f)
    }
    pub fn eventually_strict(&mut self, f: Formula) -> Formula {
        self.expand(DerivedOp::EventuallyStrict, f)
    }
    pub fn next(&mut self, f: Formula) -> Formula {
        self.expand(DerivedOp::Next, f)
    }
    pub fn prev(&mut self, f: Formula) -> Formula {
        self.expand(DerivedOp::Prev, f)
    }

    /// Names of the propositional variables occurring in `f`, sorted.
    pub fn vars_of(&self, f: Formula) -> Vec<String> {
        let mut names: Vec<String> = self
            .closure(f)
            .formulas()
            .iter()
            .filter_map(|&g| match self.node(g) {
                Node::Var(id) => Some(self.var_name(id).to_string()),
                _ => None,
            })
            .collect();
        names.sort();
        names.dedup();
        names
    }

    /// `sub(f)`: every subformula and its negation, once each.
    ///
    /// Order: the DAG is walked in post-order (children before parents, left
    /// before right) and each formula that is not itself a negation is
    /// emitted at its first visit, immediately followed by its negation. So
    /// position `2k` holds a non-negated formula and `2k + 1` its negation,
    /// and every proper subformula precedes the formulas containing it.
    pub fn closure(&self, f: Formula) -> Closure {
        let mut formulas = Vec::new();
        let mut index = HashMap::default();
        // (formula, children already pushed)
        let mut stack = vec![(f, false)];
        let mut visited = HashSet::default();
        while let Some((g, expanded)) = stack.pop() {
            let base = match self.node(g) {
                Node::Not(h) => h,
                _ => g,
            };
            if visited.contains(&base) {
                continue;
            }
            if expanded {
                visited.insert(base);
                let neg = self.negation_of(base);
                index.insert(base, formulas.len());
                formulas.push(base);
                index.insert(neg, formulas.len());
                formulas.push(neg);
                continue;
            }
            stack.push((base, true));
            match self.node(base) {
                Node::And(a, b) | Node::Until(a, b) | Node::Since(a, b) => {
                    stack.push((b, false));
                    stack.push((a, false));
                }
                Node::Var(_) | Node::True => {}
                Node::Not(_) => unreachable!("base of a negation is never a negation"),
            }
        }
        Closure { formulas, index }
    }

    /// Formula size: the cardinality of `sub(f)`.
    pub fn size(&self, f: Formula) -> usize {
        self.closure(f).len()
    }

    /// Prints the formula with only core connectives, fully parenthesized;
    /// [`Formulas::parse`] reads the output back to the same handle.
    pub fn display(&self, f: Formula) -> String {
        let mut out = String::new();
        self.write(f, &mut out);
        out
    }

    fn write(&self, f: Formula, out: &mut String) {
        match self.node(f) {
            Node::Var(id) => out.push_str(self.var_name(id)),
            Node::True => out.push_str("true"),
            Node::Not(g) if self.node(g) == Node::True => out.push_str("false"),
            Node::Not(g) => {
                out.push('!');
                self.write(g, out);
            }
            Node::And(a, b) => self.write_binary(a, "&", b, out),
            Node::Until(a, b) => self.write_binary(a, "U", b, out),
            Node::Since(a, b) => self.write_binary(a, "S", b, out),
        }
    }

    fn write_binary(&self, a: Formula, op: &str, b: Formula, out: &mut String) {
        out.push('(');
        self.write(a, out);
        let _ = write!(out, " {op} ");
        self.write(b, out);
        out.push(')');
    }

    /// Number of nodes in the tree unfolding of `f`, saturating.
    pub fn tree_size(&self, f: Formula) -> u64 {
        let mut memo: HashMap<Formula, u64> = HashMap::default();
        self.tree_size_memo(f, &mut memo)
    }

    fn tree_size_memo(&self, f: Formula, memo: &mut HashMap<Formula, u64>) -> u64 {
        if let Some(&s) = memo.get(&f) {
            return s;
        }
        let s = match self.node(f) {
            Node::Var(_) | Node::True => 1,
            Node::Not(g) => 1 + self.tree_size_memo(g, memo),
            Node::And(a, b) | Node::Until(a, b) | Node::Since(a, b) => {
                let sa = self.tree_size_memo(a, memo);
                let sb = self.tree_size_memo(b, memo);
                sa.saturating_add(sb).saturating_add(1)
            }
        };
        memo.insert(f, s);
        s
    }

    /// A short label: the printed form when small, else `#<handle>`.
    pub fn label(&self, f: Formula) -> String {
        if self.tree_size(f) <= 24 {
            self.display(f)
        } else {
            match self.node(f) {
                Node::Not(g) => format!("!#{}", g.0),
                _ => format!("#{}", f.0),
            }
        }
    }

    pub fn parse(&mut self, text: &str) -> Result<Formula, ParseError> {
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            fs: self,
        };
        let f = p.binary_temporal()?;
        p.expect_end()?;
        Ok(f)
    }
}

/// `sub(φ)` in the fixed order documented on [`Formulas::closure`].
#[derive(Clone, Debug)]
pub struct Closure {
    formulas: Vec<Formula>,
    index: HashMap<Formula, usize>,
}

impl Closure {
    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn position(&self, f: Formula) -> Option<usize> {
        self.index.get(&f).copied()
    }

    pub fn contains(&self, f: Formula) -> bool {
        self.index.contains_key(&f)
    }
}

// ---------------------------------------------------------------------------
// Lexer and parser

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Until,
    Since,
    Next,
    Prev,
    Eventually,
    EventuallyStrict,
    Always,
    AlwaysStrict,
    /// `X^[ord]`
    NextPow(String),
    /// `U^[ord]`
    UntilPow(String),
    LParen,
    RParen,
    End,
}

pub(crate) fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            '(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            '!' | '~' => {
                out.push((start, Tok::Not));
                i += 1;
            }
            '&' => {
                i += 1;
                if i < bytes.len() && bytes[i] == b'&' {
                    i += 1;
                }
                out.push((start, Tok::And));
            }
            '|' => {
                i += 1;
                if i < bytes.len() && bytes[i] == b'|' {
                    i += 1;
                }
                out.push((start, Tok::Or));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                let suffix = bytes.get(i).map(|&b| b as char);
                let tok = match (word, suffix) {
                    ("X", Some('-')) => {
                        i += 1;
                        Tok::Prev
                    }
                    ("F", Some('+')) => {
                        i += 1;
                        Tok::EventuallyStrict
                    }
                    ("G", Some('+')) => {
                        i += 1;
                        Tok::AlwaysStrict
                    }
                    ("X", Some('^')) | ("U", Some('^')) => {
                        let (arg, end) = lex_power(text, i, start)?;
                        i = end;
                        if word == "X" {
                            Tok::NextPow(arg)
                        } else {
                            Tok::UntilPow(arg)
                        }
                    }
                    ("X" | "F" | "G" | "U" | "S", Some('+' | '-' | '^')) => {
                        return Err(ParseError::UnknownOperator {
                            pos: start,
                            op: text[start..=i].to_string(),
                        });
                    }
                    ("true", _) => Tok::True,
                    ("false", _) => Tok::False,
                    ("U", _) => Tok::Until,
                    ("S", _) => Tok::Since,
                    ("X", _) => Tok::Next,
                    ("F", _) => Tok::Eventually,
                    ("G", _) => Tok::Always,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((start, tok));
            }
            c if c.is_ascii_digit() => {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: "identifiers must not start with a digit".into(),
                });
            }
            _ => {
                // Unknown operator symbols: report the whole run of punctuation.
                let mut end = i;
                for (off, ch) in text[i..].char_indices() {
                    if ch.is_alphanumeric() || ch.is_whitespace() || "()!~&|_".contains(ch) {
                        break;
                    }
                    end = i + off + ch.len_utf8();
                }
                return Err(ParseError::UnknownOperator {
                    pos: start,
                    op: text[start..end].to_string(),
                });
            }
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

/// Reads `^[ ... ]` starting at the caret; returns the bracket contents and
/// the offset after `]`.
fn lex_power(text: &str, caret: usize, op_start: usize) -> Result<(String, usize), ParseError> {
    let rest = &text[caret + 1..];
    if !rest.starts_with('[') {
        return Err(ParseError::Syntax {
            pos: caret,
            msg: "expected `[` after `^`".into(),
        });
    }
    match rest.find(']') {
        Some(close) => Ok((rest[1..close].trim().to_string(), caret + 1 + close + 1)),
        None => Err(ParseError::Syntax {
            pos: op_start,
            msg: "unterminated `^[`".into(),
        }),
    }
}

struct Parser<'a> {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    fs: &'a mut Formulas,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::End => Ok(()),
            t => Err(self.unexpected(t)),
        }
    }

    fn unexpected(&self, t: &Tok) -> ParseError {
        match t {
            Tok::NextPow(_) | Tok::UntilPow(_) => ParseError::UnknownOperator {
                pos: self.offset(),
                op: "^[..]".into(),
            },
            Tok::End => ParseError::Syntax {
                pos: self.offset(),
                msg: "unexpected end of input".into(),
            },
            t => ParseError::Syntax {
                pos: self.offset(),
                msg: format!("unexpected token {t:?}"),
            },
        }
    }

    // U and S: right associative, lowest precedence.
    fn binary_temporal(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        match self.peek() {
            Tok::Until => {
                self.bump();
                let rhs = self.binary_temporal()?;
                Ok(self.fs.until(lhs, rhs))
            }
            Tok::Since => {
                self.bump();
                let rhs = self.binary_temporal()?;
                Ok(self.fs.since(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = self.fs.or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.prefix()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.prefix()?;
            lhs = self.fs.and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Formula, ParseError> {
        let op = match self.peek() {
            Tok::Not => None,
            Tok::Next => Some(DerivedOp::Next),
            Tok::Prev => Some(DerivedOp::Prev),
            Tok::Eventually => Some(DerivedOp::Eventually),
            Tok::EventuallyStrict => Some(DerivedOp::EventuallyStrict),
            Tok::Always => Some(DerivedOp::Always),
            Tok::AlwaysStrict => Some(DerivedOp::AlwaysStrict),
            _ => return self.atom(),
        };
        self.bump();
        let arg = self.prefix()?;
        Ok(match op {
            None => self.fs.not(arg),
            Some(op) => self.fs.expand(op, arg),
        })
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let t = self.peek().clone();
        match t {
            Tok::Ident(name) => {
                self.bump();
                Ok(self.fs.var(&name))
            }
            Tok::True => {
                self.bump();
                Ok(self.fs.top())
            }
            Tok::False => {
                self.bump();
                Ok(self.fs.bottom())
            }
            Tok::LParen => {
                self.bump();
                let f = self.binary_temporal()?;
                match self.peek() {
                    Tok::RParen => {
                        self.bump();
                        Ok(f)
                    }
                    t => Err(self.unexpected(&t.clone())),
                }
            }
            t => Err(self.unexpected(&t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        let mut fs = Formulas::new();
        let f = fs.parse("p & !p").unwrap();
        let p = fs.var("p");
        let np = fs.not(p);
        assert_eq!(fs.node(f), Node::And(p, np));

        assert_eq!(fs.parse("!!p").unwrap(), p);

        let g = fs.parse("G p").unwrap();
        let t = fs.top();
        let u = fs.until(t, np);
        let nu = fs.not(u);
        let expected = fs.and(p, nu);
        assert_eq!(g, expected);
    }

    #[test]
    fn derived_operators() {
        let mut fs = Formulas::new();
        let p = fs.var("p");
        let bot = fs.bottom();
        let x = fs.next(p);
        assert_eq!(fs.node(x), Node::Until(bot, p));
        let y = fs.prev(p);
        assert_eq!(fs.node(y), Node::Since(bot, p));

        // F p = !(!p & !(true U p))
        let f = fs.eventually(p);
        let t = fs.top();
        let np = fs.not(p);
        let tu = fs.until(t, p);
        let ntu = fs.not(tu);
        let c = fs.and(np, ntu);
        assert_eq!(f, fs.not(c));

        // F+ p = true U p
        assert_eq!(fs.eventually_strict(p), tu);
        assert_eq!(fs.parse("F+ p").unwrap(), tu);
        assert_eq!(fs.parse("X- p").unwrap(), y);
        assert_eq!(fs.parse("X p").unwrap(), x);
    }

    #[test]
    fn precedence() {
        let mut fs = Formulas::new();
        let a = fs.parse("p & q U r | s S t").unwrap();
        let b = fs.parse("(p & q) U ((r | s) S t)").unwrap();
        assert_eq!(a, b);
        let c = fs.parse("!p U q").unwrap();
        let d = fs.parse("(!p) U q").unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn closure_examples() {
        let mut fs = Formulas::new();
        let p = fs.parse("p").unwrap();
        assert_eq!(fs.closure(p).len(), 2);

        let puq = fs.parse("p U q").unwrap();
        let c = fs.closure(puq);
        let names: Vec<String> = c.formulas().iter().map(|&f| fs.display(f)).collect();
        assert_eq!(names, ["p", "!p", "q", "!q", "(p U q)", "!(p U q)"]);

        let pp = fs.parse("p & p").unwrap();
        assert_eq!(fs.closure(pp).len(), 4);

        let f = fs.parse("false").unwrap();
        assert_eq!(fs.closure(f).len(), 2);
    }

    #[test]
    fn parse_errors() {
        let mut fs = Formulas::new();
        assert!(matches!(fs.parse("p &"), Err(ParseError::Syntax { .. })));
        assert!(matches!(fs.parse("(p"), Err(ParseError::Syntax { .. })));
        assert!(matches!(
            fs.parse("p -> q"),
            Err(ParseError::UnknownOperator { pos: 2, .. })
        ));
        assert!(matches!(
            fs.parse("X+ p"),
            Err(ParseError::UnknownOperator { .. })
        ));
        assert!(matches!(
            fs.parse("X^[w] p"),
            Err(ParseError::UnknownOperator { .. })
        ));
        assert!(matches!(fs.parse("p q"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn derived_growth_is_linear_in_dag_size() {
        let mut fs = Formulas::new();
        let mut f = fs.var("p");
        let mut sizes = Vec::new();
        for _ in 0..12 {
            f = fs.always(f);
            f = fs.eventually_strict(f);
            f = fs.next(f);
            sizes.push(fs.size(f));
        }
        let steps: Vec<usize> = sizes.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.iter().all(|&s| s == steps[0]), "{sizes:?}");
        assert!(steps[0] <= 12);
    }
}
