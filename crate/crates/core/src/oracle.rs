//! Brute-force finite-trace (FLTL) semantics, written independently of the
//! rule tables so that agreement between the two is meaningful.

use std::fmt;

use thiserror::Error;

use crate::formula::{Expr, Formula};
use crate::trace::Trace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("position {position} is outside a trace of {len} cells")]
    OutOfRange { position: usize, len: usize },
}

fn check(trace: &Trace, i: usize) -> Result<(), OracleError> {
    if i < trace.len() {
        Ok(())
    } else {
        Err(OracleError::OutOfRange { position: i, len: trace.len() })
    }
}

/// `[u, i ⊨ f]`.
pub fn oracle_eval(f: &Formula, trace: &Trace, i: usize) -> Result<bool, OracleError> {
    check(trace, i)?;
    Ok(holds(f, trace, i))
}

fn holds(f: &Formula, u: &Trace, i: usize) -> bool {
    let n = u.len();
    match f {
        Formula::True => true,
        Formula::Atom(a) => u.cells()[i].contains(a),
        Formula::NegAtom(a) => !u.cells()[i].contains(a),
        Formula::Or(l, r) => holds(l, u, i) || holds(r, u, i),
        Formula::And(l, r) => holds(l, u, i) && holds(r, u, i),
        Formula::Next(s) => i + 1 < n && holds(s, u, i + 1),
        Formula::WeakNext(s) => i + 1 >= n || holds(s, u, i + 1),
        Formula::Eventually(s) => (i..n).any(|j| holds(s, u, j)),
        Formula::Always(s) => (i..n).all(|j| holds(s, u, j)),
        Formula::Until(l, r) => (i..n).any(|j| holds(r, u, j) && (i..j).all(|k| holds(l, u, k))),
    }
}

/// Like [`oracle_eval`], with `!φ` read as the complement of `φ`.
pub fn oracle_eval_expr(e: &Expr, trace: &Trace, i: usize) -> Result<bool, OracleError> {
    check(trace, i)?;
    Ok(holds_expr(e, trace, i))
}

fn holds_expr(e: &Expr, u: &Trace, i: usize) -> bool {
    let n = u.len();
    match e {
        Expr::True => true,
        Expr::Atom(a) => u.cells()[i].contains(a),
        Expr::Not(s) => !holds_expr(s, u, i),
        Expr::Or(l, r) => holds_expr(l, u, i) || holds_expr(r, u, i),
        Expr::And(l, r) => holds_expr(l, u, i) && holds_expr(r, u, i),
        Expr::Next(s) => i + 1 < n && holds_expr(s, u, i + 1),
        Expr::WeakNext(s) => i + 1 >= n || holds_expr(s, u, i + 1),
        Expr::Eventually(s) => (i..n).any(|j| holds_expr(s, u, j)),
        Expr::Always(s) => (i..n).all(|j| holds_expr(s, u, j)),
        Expr::Until(l, r) => (i..n).any(|j| holds_expr(r, u, j) && (i..j).all(|k| holds_expr(l, u, k))),
    }
}

/// An FLTL judgement: constants, leaves `[u, i ⊨ φ]_F`, and their
/// combinations by `⊔` (or) and `⊓` (and).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Judgement {
    Top,
    Bottom,
    Holds { position: usize, formula: Formula },
    Join(Box<Judgement>, Box<Judgement>),
    Meet(Box<Judgement>, Box<Judgement>),
}

impl Judgement {
    pub fn holds(position: usize, formula: Formula) -> Self {
        Judgement::Holds { position, formula }
    }

    pub fn join(self, other: Judgement) -> Self {
        Judgement::Join(Box::new(self), Box::new(other))
    }

    pub fn meet(self, other: Judgement) -> Self {
        Judgement::Meet(Box::new(self), Box::new(other))
    }

    fn is_compound(&self) -> bool {
        matches!(self, Judgement::Join(..) | Judgement::Meet(..))
    }
}

impl fmt::Display for Judgement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |j: &Judgement, f: &mut fmt::Formatter<'_>| {
            if j.is_compound() {
                write!(f, "({j})")
            } else {
                write!(f, "{j}")
            }
        };
        match self {
            Judgement::Top => f.write_str("⊤"),
            Judgement::Bottom => f.write_str("⊥"),
            Judgement::Holds { position, formula } => {
                write!(f, "[u,{position}⊨{}]_F", formula.judgement_notation())
            }
            Judgement::Join(l, r) => {
                child(l, f)?;
                f.write_str(" ⊔ ")?;
                child(r, f)
            }
            Judgement::Meet(l, r) => {
                child(l, f)?;
                f.write_str(" ⊓ ")?;
                child(r, f)
            }
        }
    }
}

pub fn eval_judgement(j: &Judgement, trace: &Trace) -> Result<bool, OracleError> {
    Ok(match j {
        Judgement::Top => true,
        Judgement::Bottom => false,
        Judgement::Holds { position, formula } => oracle_eval(formula, trace, *position)?,
        Judgement::Join(l, r) => eval_judgement(l, trace)? | eval_judgement(r, trace)?,
        Judgement::Meet(l, r) => eval_judgement(l, trace)? & eval_judgement(r, trace)?,
    })
}
