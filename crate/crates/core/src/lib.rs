//! Satisfiability of linear-time temporal logic with strict Until and Since
//! over countable ordinals.
//!
//! Formulas are translated into simple ordinal automata, whose locations are
//! sets over a finite basis; nonemptiness is decided by saturating a relation
//! of run abstractions, and every positive answer comes with a finitely
//! presented transfinite run that can be re-checked independently.

pub mod bits;
pub mod formula;
pub mod ordinal;
pub mod automaton;
pub mod translate;
pub mod emptiness;
pub mod solver;
pub mod oracle;
pub mod io;

pub use bits::BitSet;
pub use formula::{Closure, DerivedOp, Formula, Formulas, Node, ParseError};
pub use ordinal::{def_formula, theta, CodeLevel, Ordinal, OrdinalCode, OrdinalError};
