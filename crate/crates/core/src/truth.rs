//! The annotated three-valued truth domain and the operator evaluation tables.
//!
//! An undecided value carries a [`Mode`] recording which operands can still
//! decide the formula: `?L`/`?R` mean only the left/right operand matters from
//! now on, `?B` both, `?A` the full until unfolding, `?M` a next operator that
//! mirrors its (now monitored) operand.

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Activation variant of a rule, and annotation of an undecided value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Plain,
    Left,
    Right,
    Both,
    All,
    Mirror,
}

/// The activation variant carried by a rule name, e.g. the `B` of `R[a∨b]B`.
pub type EvalMode = Mode;

impl Mode {
    pub const ALL: [Mode; 6] = [Mode::Plain, Mode::Left, Mode::Right, Mode::Both, Mode::All, Mode::Mirror];

    pub fn suffix(self) -> &'static str {
        match self {
            Mode::Plain => "",
            Mode::Left => "L",
            Mode::Right => "R",
            Mode::Both => "B",
            Mode::All => "A",
            Mode::Mirror => "M",
        }
    }

    /// Left and right swapped; every other mode is fixed.
    pub fn mirrored(self) -> Mode {
        match self {
            Mode::Left => Mode::Right,
            Mode::Right => Mode::Left,
            m => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TruthValue {
    True,
    False,
    Undecided(Mode),
}

impl TruthValue {
    pub const UNDECIDED: TruthValue = TruthValue::Undecided(Mode::Plain);

    /// Every value of the domain, in rendering order.
    pub fn all() -> impl Iterator<Item = TruthValue> {
        [TruthValue::True, TruthValue::False]
            .into_iter()
            .chain(Mode::ALL.into_iter().map(TruthValue::Undecided))
    }

    pub fn is_decided(self) -> bool {
        !matches!(self, TruthValue::Undecided(_))
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            TruthValue::True
        } else {
            TruthValue::False
        }
    }

    /// `Some(b)` for decided values.
    pub fn as_bool(self) -> Option<bool> {
        match self {
            TruthValue::True => Some(true),
            TruthValue::False => Some(false),
            TruthValue::Undecided(_) => None,
        }
    }

    /// Swaps `T`↔`F` and `?L`↔`?R`.
    pub fn dual(self) -> Self {
        match self {
            TruthValue::True => TruthValue::False,
            TruthValue::False => TruthValue::True,
            TruthValue::Undecided(m) => TruthValue::Undecided(m.mirrored()),
        }
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruthValue::True => f.write_str("T"),
            TruthValue::False => f.write_str("F"),
            TruthValue::Undecided(m) => write!(f, "?{}", m.suffix()),
        }
    }
}

impl Serialize for TruthValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Or,
    And,
    Until,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Eventually,
    Always,
    Next,
    WeakNext,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("mode {mode:?} is not legal for {op}")]
    IllegalMode { op: &'static str, mode: Mode },
}

impl BinaryOp {
    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Or => "disjunction",
            BinaryOp::And => "conjunction",
            BinaryOp::Until => "until",
        }
    }

    pub fn legal_modes(self) -> &'static [Mode] {
        match self {
            BinaryOp::Or | BinaryOp::And => &[Mode::Both, Mode::Left, Mode::Right],
            BinaryOp::Until => &[Mode::All, Mode::Both, Mode::Left, Mode::Right],
        }
    }
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Eventually => "eventually",
            UnaryOp::Always => "always",
            UnaryOp::Next => "next",
            UnaryOp::WeakNext => "weak next",
        }
    }

    pub fn legal_modes(self) -> &'static [Mode] {
        match self {
            UnaryOp::Eventually | UnaryOp::Always => &[Mode::Plain],
            UnaryOp::Next | UnaryOp::WeakNext => &[Mode::Plain, Mode::Mirror],
        }
    }
}

use TruthValue::{False as F, True as T, Undecided as U};

/// One cell of the evaluation table of a binary operator.
///
/// In modes `L` and `R` only one operand is consulted and the other argument
/// is ignored. Until modes `B`, `L` and `R` are the single-instance tables;
/// the monitor refines them with its witness bookkeeping.
pub fn eval_binary(
    op: BinaryOp,
    mode: Mode,
    left: TruthValue,
    right: TruthValue,
) -> Result<TruthValue, DomainError> {
    if !op.legal_modes().contains(&mode) {
        return Err(DomainError::IllegalMode { op: op.name(), mode });
    }
    let unary = |v: TruthValue, m: Mode| match v {
        T => T,
        F => F,
        U(_) => U(m),
    };
    Ok(match (op, mode) {
        (BinaryOp::Or, Mode::Both) => match (left, right) {
            (T, _) | (_, T) => T,
            (F, F) => F,
            (U(_), U(_)) => U(Mode::Both),
            (U(_), F) => U(Mode::Left),
            (F, U(_)) => U(Mode::Right),
        },
        (BinaryOp::And, Mode::Both) => match (left, right) {
            (F, _) | (_, F) => F,
            (T, T) => T,
            (U(_), U(_)) => U(Mode::Both),
            (U(_), T) => U(Mode::Left),
            (T, U(_)) => U(Mode::Right),
        },
        (BinaryOp::Until, Mode::All) => match (left, right) {
            (_, T) => T,
            (F, F) => F,
            (T, F) => U(Mode::All),
            (U(_), F) => U(Mode::Both),
            (U(_), U(_)) | (T, U(_)) => U(Mode::All),
            (F, U(_)) => U(Mode::Right),
        },
        (BinaryOp::Until, Mode::Both) => match left {
            F => F,
            _ => U(Mode::Both),
        },
        (_, Mode::Left) => unary(left, Mode::Left),
        (_, Mode::Right) => unary(right, Mode::Right),
        _ => unreachable!("legal modes checked above"),
    })
}

/// One cell of the evaluation table of a unary operator, with the end-of-trace
/// rule folded in when `at_end` holds.
pub fn eval_unary(op: UnaryOp, mode: Mode, sub: TruthValue, at_end: bool) -> Result<TruthValue, DomainError> {
    if !op.legal_modes().contains(&mode) {
        return Err(DomainError::IllegalMode { op: op.name(), mode });
    }
    Ok(match (op, mode) {
        (UnaryOp::Eventually, _) => match sub {
            T => T,
            _ if at_end => F,
            _ => TruthValue::UNDECIDED,
        },
        (UnaryOp::Always, _) => match sub {
            F => F,
            _ if at_end => T,
            _ => TruthValue::UNDECIDED,
        },
        (UnaryOp::Next, Mode::Plain) if at_end => F,
        (UnaryOp::WeakNext, Mode::Plain) if at_end => T,
        (UnaryOp::Next | UnaryOp::WeakNext, Mode::Plain) => TruthValue::UNDECIDED,
        (UnaryOp::Next | UnaryOp::WeakNext, _) => match sub {
            T => T,
            F => F,
            U(_) => U(Mode::Mirror),
        },
    })
}
