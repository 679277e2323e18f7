//! LTL formulae in negation normal form.
//!
//! Two syntax trees live here: [`Expr`] is what the parser produces and allows
//! `!` over any subformula, [`Formula`] is the normalized tree the rest of the
//! crate works with, where negation only ever sits on an atom. [`to_nnf`] moves
//! from one to the other.
//!
//! Concrete syntax (tightest binding first):
//!
//! ```text
//! !φ  Xφ  Wφ  Fφ (<>φ)  Gφ ([]φ)     prefix operators
//! φ U ψ                              right-associative
//! φ & ψ                              left-associative
//! φ | ψ                              left-associative
//! ```
//!
//! Atoms are identifiers over `[a-z][a-z0-9_]*`; `true` is the only constant.

mod index;
mod parser;

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub use index::{subformulas, FormulaId, Node, SubformulaIndex};
pub use parser::{parse_expr, ParseError};

/// An LTL formula in negation normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    Atom(String),
    NegAtom(String),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    /// Strong next: false on the last cell.
    Next(Box<Formula>),
    /// Weak next: true on the last cell.
    WeakNext(Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn neg_atom(name: impl Into<String>) -> Self {
        Formula::NegAtom(name.into())
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn until(self, other: Formula) -> Self {
        Formula::Until(Box::new(self), Box::new(other))
    }

    pub fn next(self) -> Self {
        Formula::Next(Box::new(self))
    }

    pub fn weak_next(self) -> Self {
        Formula::WeakNext(Box::new(self))
    }

    pub fn eventually(self) -> Self {
        Formula::Eventually(Box::new(self))
    }

    pub fn always(self) -> Self {
        Formula::Always(Box::new(self))
    }

    /// Immediate subformulae, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::Atom(_) | Formula::NegAtom(_) => vec![],
            Formula::Or(l, r) | Formula::And(l, r) | Formula::Until(l, r) => vec![l, r],
            Formula::Next(s) | Formula::WeakNext(s) | Formula::Eventually(s) | Formula::Always(s) => {
                vec![s]
            }
        }
    }

    /// Height of the syntax tree; leaves have depth 0.
    pub fn depth(&self) -> usize {
        self.children().into_iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    /// True when the formula mentions `◇` or `□` anywhere.
    pub fn has_eventually_or_always(&self) -> bool {
        matches!(self, Formula::Eventually(_) | Formula::Always(_))
            || self.children().into_iter().any(Formula::has_eventually_or_always)
    }

    /// True when no temporal operator occurs in the formula.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::True | Formula::Atom(_) | Formula::NegAtom(_) => true,
            Formula::Or(l, r) | Formula::And(l, r) => l.is_propositional() && r.is_propositional(),
            _ => false,
        }
    }

    /// Atom names in first-occurrence order, without repeats.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Formula::Atom(a) | Formula::NegAtom(a) => {
                if !out.contains(&a.as_str()) {
                    out.push(a);
                }
            }
            _ => self.children().into_iter().for_each(|c| c.collect_atoms(out)),
        }
    }

    /// Renders with the compact mathematical notation used in rule listings,
    /// e.g. `a∨◇b`, `Xa`, `(a∧b)Uc`.
    pub fn symbolic(&self) -> impl fmt::Display + '_ {
        Styled(self, &SYMBOLIC)
    }

    /// Like [`Formula::symbolic`] but with `¬` for negation and `X̄` for weak
    /// next, as used inside FLTL judgements.
    pub fn judgement_notation(&self) -> impl fmt::Display + '_ {
        Styled(self, &JUDGEMENT)
    }
}

/// Parses concrete syntax and normalizes it into NNF.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let expr = parse_expr(text)?;
    Ok(to_nnf(&expr)?)
}

/// ASCII rendering with minimal parentheses; inverse of [`parse_formula`].
pub fn format_formula(f: &Formula) -> String {
    f.to_string()
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_styled(self, &ASCII, f)
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl std::str::FromStr for Formula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// A formula with unrestricted negation, as written by the user.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    True,
    Atom(String),
    Not(Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Until(Box<Expr>, Box<Expr>),
    Next(Box<Expr>),
    WeakNext(Box<Expr>),
    Eventually(Box<Expr>),
    Always(Box<Expr>),
}

impl std::ops::Not for Expr {
    type Output = Expr;

    fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }
}

impl From<&Formula> for Expr {
    fn from(f: &Formula) -> Self {
        let b = |f: &Formula| Box::new(Expr::from(f));
        match f {
            Formula::True => Expr::True,
            Formula::Atom(a) => Expr::Atom(a.clone()),
            Formula::NegAtom(a) => !Expr::Atom(a.clone()),
            Formula::Or(l, r) => Expr::Or(b(l), b(r)),
            Formula::And(l, r) => Expr::And(b(l), b(r)),
            Formula::Until(l, r) => Expr::Until(b(l), b(r)),
            Formula::Next(s) => Expr::Next(b(s)),
            Formula::WeakNext(s) => Expr::WeakNext(b(s)),
            Formula::Eventually(s) => Expr::Eventually(b(s)),
            Formula::Always(s) => Expr::Always(b(s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NnfError {
    #[error("negated until `{0}` has no negation normal form without a release operator")]
    NegatedUntil(String),
    #[error("`!true` cannot be expressed: the grammar has no false constant")]
    NegatedTrue,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Nnf(#[from] NnfError),
}

/// Pushes negation down to the atoms.
///
/// `!X` and `!W` swap into each other, `!F`/`!G` likewise, De Morgan handles
/// `&`/`|`, and double negation cancels. Negated until and negated `true` are
/// rejected.
pub fn to_nnf(expr: &Expr) -> Result<Formula, NnfError> {
    nnf(expr, false)
}

fn nnf(expr: &Expr, negated: bool) -> Result<Formula, NnfError> {
    let go = |e: &Expr, n: bool| nnf(e, n).map(Box::new);
    Ok(match (expr, negated) {
        (Expr::True, false) => Formula::True,
        (Expr::True, true) => return Err(NnfError::NegatedTrue),
        (Expr::Atom(a), false) => Formula::Atom(a.clone()),
        (Expr::Atom(a), true) => Formula::NegAtom(a.clone()),
        (Expr::Not(inner), n) => return nnf(inner, !n),
        (Expr::Or(l, r), false) => Formula::Or(go(l, false)?, go(r, false)?),
        (Expr::Or(l, r), true) => Formula::And(go(l, true)?, go(r, true)?),
        (Expr::And(l, r), false) => Formula::And(go(l, false)?, go(r, false)?),
        (Expr::And(l, r), true) => Formula::Or(go(l, true)?, go(r, true)?),
        (Expr::Until(l, r), false) => Formula::Until(go(l, false)?, go(r, false)?),
        (Expr::Until(l, r), true) => {
            let shown = Formula::Until(go(l, false)?, go(r, false)?);
            return Err(NnfError::NegatedUntil(shown.to_string()));
        }
        (Expr::Next(s), false) => Formula::Next(go(s, false)?),
        (Expr::Next(s), true) => Formula::WeakNext(go(s, true)?),
        (Expr::WeakNext(s), false) => Formula::WeakNext(go(s, false)?),
        (Expr::WeakNext(s), true) => Formula::Next(go(s, true)?),
        (Expr::Eventually(s), false) => Formula::Eventually(go(s, false)?),
        (Expr::Eventually(s), true) => Formula::Always(go(s, true)?),
        (Expr::Always(s), false) => Formula::Always(go(s, false)?),
        (Expr::Always(s), true) => Formula::Eventually(go(s, true)?),
    })
}

struct Style {
    or: &'static str,
    and: &'static str,
    until: &'static str,
    not: &'static str,
    next: &'static str,
    weak_next: &'static str,
    eventually: &'static str,
    always: &'static str,
    /// Separator between a prefix operator and its operand.
    prefix_gap: &'static str,
}

const ASCII: Style = Style {
    or: " | ",
    and: " & ",
    until: " U ",
    not: "!",
    next: "X",
    weak_next: "W",
    eventually: "F",
    always: "G",
    prefix_gap: " ",
};

const SYMBOLIC: Style = Style {
    or: "∨",
    and: "∧",
    until: "U",
    not: "!",
    next: "X",
    weak_next: "W",
    eventually: "◇",
    always: "□",
    prefix_gap: "",
};

const JUDGEMENT: Style = Style { not: "¬", weak_next: "X\u{0304}", ..SYMBOLIC };

struct Styled<'a>(&'a Formula, &'static Style);

impl fmt::Display for Styled<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_styled(self.0, self.1, f)
    }
}

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Until(..) => 3,
        Formula::Next(_) | Formula::WeakNext(_) | Formula::Eventually(_) | Formula::Always(_) => 4,
        Formula::True | Formula::Atom(_) | Formula::NegAtom(_) => 5,
    }
}

fn write_operand(f: &Formula, min: u8, style: &Style, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if precedence(f) < min {
        out.write_str("(")?;
        write_styled(f, style, out)?;
        out.write_str(")")
    } else {
        write_styled(f, style, out)
    }
}

fn write_styled(f: &Formula, style: &Style, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let (op, l, r, lmin, rmin) = match f {
        Formula::True => return out.write_str("true"),
        Formula::Atom(a) => return out.write_str(a),
        Formula::NegAtom(a) => return write!(out, "{}{}", style.not, a),
        Formula::Next(s) | Formula::WeakNext(s) | Formula::Eventually(s) | Formula::Always(s) => {
            let op = match f {
                Formula::Next(_) => style.next,
                Formula::WeakNext(_) => style.weak_next,
                Formula::Eventually(_) => style.eventually,
                _ => style.always,
            };
            out.write_str(op)?;
            out.write_str(style.prefix_gap)?;
            return write_operand(s, 4, style, out);
        }
        Formula::Or(l, r) => (style.or, l, r, 1, 2),
        Formula::And(l, r) => (style.and, l, r, 2, 3),
        Formula::Until(l, r) => (style.until, l, r, 4, 3),
    };
    write_operand(l, lmin, style, out)?;
    out.write_str(op)?;
    write_operand(r, rmin, style, out)
}
