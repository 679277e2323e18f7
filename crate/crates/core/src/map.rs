//! Translation of monitor states into FLTL judgements, and a checker that the
//! judgement keeps its truth value along a run.
//!
//! Each live instance `(φ, e)` stands for `[u, e ⊨ φ]_F`. A decided
//! evaluation maps to `⊤`/`⊥`; otherwise the annotation (from the evaluation
//! or the activation) selects the shape: `L`/`R` project onto one operand,
//! `B` combines both, `M` follows the operand of a next operator one cell
//! later. Until instances unfold over their witness ledger.

use std::sync::Arc;

use thiserror::Error;

use crate::compile::compile;
use crate::engine::{EngineError, Monitor, StepEvent, Tri, Verdict};
use crate::formula::{Formula, FormulaId, Node};
use crate::oracle::{eval_judgement, oracle_eval, Judgement, OracleError};
use crate::trace::Trace;
use crate::truth::{Mode, TruthValue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("`{0}` contains F or G, which have no judgement form")]
    Unsupported(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Constants absorbed from the until ledger simplify away; everything else is
/// kept as written.
enum Part {
    Const(bool),
    Expr(Judgement),
}

impl Part {
    fn join(self, other: Part) -> Part {
        match (self, other) {
            (Part::Const(true), _) | (_, Part::Const(true)) => Part::Const(true),
            (Part::Const(false), p) | (p, Part::Const(false)) => p,
            (Part::Expr(a), Part::Expr(b)) => Part::Expr(a.join(b)),
        }
    }

    fn meet(self, other: Part) -> Part {
        match (self, other) {
            (Part::Const(false), _) | (_, Part::Const(false)) => Part::Const(false),
            (Part::Const(true), p) | (p, Part::Const(true)) => p,
            (Part::Expr(a), Part::Expr(b)) => Part::Expr(a.meet(b)),
        }
    }

    fn judgement(self) -> Judgement {
        match self {
            Part::Const(true) => Judgement::Top,
            Part::Const(false) => Judgement::Bottom,
            Part::Expr(j) => j,
        }
    }
}

/// The judgement a monitor state stands for.
pub fn map_state(m: &Monitor) -> Result<Judgement, MapError> {
    match m.terminal() {
        Some(Verdict::Success) => return Ok(Judgement::Top),
        Some(Verdict::Failure) => return Ok(Judgement::Bottom),
        _ => {}
    }
    let f = m.system().formula();
    if f.has_eventually_or_always() {
        return Err(MapError::Unsupported(f.to_string()));
    }
    map_instance(m, m.system().root(), 0)
}

fn leaf(m: &Monitor, id: FormulaId, epoch: usize) -> Judgement {
    Judgement::holds(epoch, m.system().index().formula(id).clone())
}

fn live(m: &Monitor, id: FormulaId, epoch: usize) -> bool {
    m.evaluation(id, epoch).is_some() || m.active_mode(id, epoch).is_some()
}

fn map_instance(m: &Monitor, id: FormulaId, epoch: usize) -> Result<Judgement, MapError> {
    let aux = match m.evaluation(id, epoch) {
        Some(TruthValue::True) => return Ok(Judgement::Top),
        Some(TruthValue::False) => return Ok(Judgement::Bottom),
        Some(TruthValue::Undecided(mode)) => mode,
        None => match m.active_mode(id, epoch) {
            Some(mode) => mode,
            None => return Ok(leaf(m, id, epoch)),
        },
    };
    let node = m.system().index().node(id);
    Ok(match *node {
        Node::True | Node::Atom(_) | Node::NegAtom(_) => leaf(m, id, epoch),
        Node::Or(l, r) | Node::And(l, r) => match aux {
            Mode::Left => map_instance(m, l, epoch)?,
            Mode::Right => map_instance(m, r, epoch)?,
            _ => {
                let (a, b) = (map_instance(m, l, epoch)?, map_instance(m, r, epoch)?);
                if matches!(node, Node::Or(..)) {
                    a.join(b)
                } else {
                    a.meet(b)
                }
            }
        },
        Node::Next(sub) | Node::WeakNext(sub) => {
            if aux == Mode::Mirror {
                map_instance(m, sub, epoch + 1)?
            } else {
                leaf(m, id, epoch)
            }
        }
        Node::Until(l, r) => map_until(m, id, epoch, l, r)?,
        Node::Eventually(_) | Node::Always(_) => {
            return Err(MapError::Unsupported(m.system().index().formula(id).to_string()))
        }
    })
}

fn map_until(
    m: &Monitor,
    id: FormulaId,
    epoch: usize,
    l: FormulaId,
    r: FormulaId,
) -> Result<Judgement, MapError> {
    let until = m.system().index().formula(id).clone();
    let next_until = |at: usize| Judgement::holds(at, until.clone().next());
    let ledger = m.ledger(id, epoch);
    let (entries, open, n) = match ledger {
        Some(lg) => (lg.entries(), lg.is_open(), lg.next()),
        None => (&[][..], true, epoch),
    };
    let mut acc = if !open {
        Part::Const(false)
    } else if live(m, l, n) && live(m, r, n) {
        let unfolded = map_instance(m, r, n)?.join(map_instance(m, l, n)?.meet(next_until(n)));
        Part::Expr(unfolded)
    } else if n > epoch {
        Part::Expr(next_until(n - 1))
    } else {
        Part::Expr(leaf(m, id, epoch))
    };
    for entry in entries.iter().rev() {
        let side = |tri: Tri, sub: FormulaId| -> Result<Part, MapError> {
            Ok(match tri {
                Tri::True => Part::Const(true),
                Tri::False => Part::Const(false),
                Tri::Pending => Part::Expr(map_instance(m, sub, entry.cell)?),
            })
        };
        acc = side(entry.right, r)?.join(side(entry.left, l)?.meet(acc));
    }
    Ok(acc.judgement())
}

/// One mapped state along a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapStep {
    /// Cell the state belongs to; it advances when reactivation fires.
    pub index: usize,
    pub state: String,
    pub judgement: Judgement,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapReport {
    pub formula: Formula,
    pub trace: Trace,
    pub steps: Vec<MapStep>,
    /// `[u, 0 ⊨ φ]` by the oracle.
    pub expected: bool,
    pub verdict: Verdict,
    /// First step whose judgement disagrees with `expected`.
    pub violation: Option<usize>,
}

impl MapReport {
    /// No violation, and the terminal judgement is the constant matching the verdict.
    pub fn passed(&self) -> bool {
        let terminal = match self.verdict {
            Verdict::Success => Judgement::Top,
            Verdict::Failure => Judgement::Bottom,
            Verdict::Undecided => return false,
        };
        self.violation.is_none()
            && self.steps.last().map(|s| &s.judgement) == Some(&terminal)
            && Verdict::from_bool(self.expected) == self.verdict
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "{:>3} | {} | {} | {} | {}\n",
                i + 1,
                s.index,
                s.state,
                s.judgement,
                if s.value { "⊤" } else { "⊥" }
            ));
        }
        out.push_str(&format!(
            "verdict {} / oracle {}: {}\n",
            self.verdict,
            Verdict::from_bool(self.expected),
            if self.passed() { "pass" } else { "FAIL" }
        ));
        out
    }
}

/// Runs the monitor over `trace`, mapping the state after every change:
/// the initial state, observations added, each evaluation, the verdict, and
/// each reactivation.
pub fn check_run(formula: &Formula, trace: &Trace) -> Result<MapReport, MapError> {
    if formula.has_eventually_or_always() {
        return Err(MapError::Unsupported(formula.to_string()));
    }
    if trace.is_empty() {
        return Err(EngineError::EmptyTrace.into());
    }
    let expected = oracle_eval(formula, trace, 0)?;
    let mut monitor = Monitor::new(Arc::new(compile(formula)));
    let mut steps = Vec::new();
    let record = |m: &Monitor, steps: &mut Vec<MapStep>| -> Result<(), MapError> {
        let judgement = map_state(m)?;
        let value = eval_judgement(&judgement, trace)?;
        steps.push(MapStep { index: m.cell(), state: m.render_state(), judgement, value });
        Ok(())
    };
    record(&monitor, &mut steps)?;
    let last = trace.len() - 1;
    let mut verdict = Verdict::Undecided;
    for (i, cell) in trace.cells().iter().enumerate() {
        let mut failure = None;
        verdict = monitor.step_observed(cell, i == last, |m, _event: StepEvent| {
            if failure.is_none() {
                if let Err(e) = record(m, &mut steps) {
                    failure = Some(e);
                }
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        if verdict.is_decided() {
            break;
        }
    }
    let violation = steps.iter().position(|s| s.value != expected);
    Ok(MapReport { formula: formula.clone(), trace: trace.clone(), steps, expected, verdict, violation })
}
