//! The monitoring cycle: add observations, fire evaluation rules, then either
//! stop on a verdict or fire reactivation rules to build the next state.
//!
//! Every activation carries the cell at which its subformula instance was
//! spawned (its epoch), so an instance evaluates `[u, epoch ⊨ φ]`. Operands are
//! looked up by epoch: `∨`, `∧` and `U` read their operands at the same epoch,
//! `X`/`W` in mirror mode read epoch + 1, and `◇`/`□` combine every live
//! instance of their operand spawned at or after their own epoch. Until
//! instances keep an [`UntilLedger`] of candidate witness positions.

mod explain;
mod ledger;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::compile::{Condition, EvaluationRule, Guard, Output, RuleName, RuleSystem};
use crate::formula::{FormulaId, Node};
use crate::trace::Trace;
use crate::truth::{Mode, TruthValue};

pub use explain::{explain, CellSnapshot, EvaluationRecord, SnapshotRecord};
use ledger::{kleene_and, kleene_or};
pub use ledger::{Closure, Entry, Tri, UntilLedger};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Success,
    Failure,
    Undecided,
}

impl Verdict {
    pub fn from_value(v: TruthValue) -> Verdict {
        match v {
            TruthValue::True => Verdict::Success,
            TruthValue::False => Verdict::Failure,
            TruthValue::Undecided(_) => Verdict::Undecided,
        }
    }

    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Success
        } else {
            Verdict::Failure
        }
    }

    pub fn is_decided(self) -> bool {
        self != Verdict::Undecided
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Success => "SUCCESS",
            Verdict::Failure => "FAILURE",
            Verdict::Undecided => "?",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("the monitor already reported {0}; no further cells are accepted")]
    StepAfterTerminal(Verdict),
    #[error("cannot monitor an empty trace")]
    EmptyTrace,
    #[error("no value for operand {formula} at epoch {epoch} in cell {cell}")]
    MissingOperand { formula: FormulaId, epoch: usize, cell: usize },
    #[error("no evaluation rule of {name:?} applies in cell {cell}")]
    NoRuleApplies { name: RuleName, cell: usize },
    #[error("undecided value {value} of {formula} has no reactivation rule")]
    NoReactivation { formula: FormulaId, value: TruthValue },
    #[error("the last cell was processed but the property is still undecided")]
    UndecidedAtEnd,
}

/// One live subformula instance: rule name plus spawn epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance {
    pub formula: FormulaId,
    pub epoch: usize,
    pub mode: Mode,
}

impl Instance {
    pub fn name(&self) -> RuleName {
        RuleName::new(self.formula, self.mode)
    }
}

/// Points inside a step at which the state changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    ObservationsAdded,
    Evaluated { formula: FormulaId, epoch: usize, value: TruthValue },
    Terminal(Verdict),
    Reactivated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub cell: usize,
    pub verdict: Verdict,
    pub root: TruthValue,
    pub snapshot: CellSnapshot,
}

/// Online monitor over one compiled rule system.
#[derive(Debug, Clone)]
pub struct Monitor {
    system: Arc<RuleSystem>,
    cell: usize,
    active: BTreeSet<Instance>,
    observations: BTreeSet<String>,
    at_end: bool,
    evaluations: BTreeMap<(FormulaId, usize), TruthValue>,
    ledgers: BTreeMap<(FormulaId, usize), UntilLedger>,
    terminal: Option<Verdict>,
}

impl Monitor {
    pub fn new(system: Arc<RuleSystem>) -> Self {
        let active = system
            .initial_state()
            .iter()
            .map(|n| Instance { formula: n.formula, epoch: 0, mode: n.mode })
            .collect();
        Monitor {
            system,
            cell: 0,
            active,
            observations: BTreeSet::new(),
            at_end: false,
            evaluations: BTreeMap::new(),
            ledgers: BTreeMap::new(),
            terminal: None,
        }
    }

    pub fn system(&self) -> &RuleSystem {
        &self.system
    }

    /// Index of the cell the next step reads (or the deciding cell once terminal).
    pub fn cell(&self) -> usize {
        self.cell
    }

    pub fn terminal(&self) -> Option<Verdict> {
        self.terminal
    }

    pub fn active(&self) -> &BTreeSet<Instance> {
        &self.active
    }

    pub fn observations(&self) -> &BTreeSet<String> {
        &self.observations
    }

    pub fn at_end(&self) -> bool {
        self.at_end
    }

    /// Truth evaluations of the current cell, keyed by (formula, epoch).
    pub fn evaluations(&self) -> &BTreeMap<(FormulaId, usize), TruthValue> {
        &self.evaluations
    }

    pub fn evaluation(&self, formula: FormulaId, epoch: usize) -> Option<TruthValue> {
        self.evaluations.get(&(formula, epoch)).copied()
    }

    pub fn ledger(&self, formula: FormulaId, epoch: usize) -> Option<&UntilLedger> {
        self.ledgers.get(&(formula, epoch))
    }

    /// Activation mode of the live instance `(formula, epoch)`, if any.
    pub fn active_mode(&self, formula: FormulaId, epoch: usize) -> Option<Mode> {
        let lo = Instance { formula, epoch, mode: Mode::ALL[0] };
        self.active.range(lo..).next().filter(|i| i.formula == formula && i.epoch == epoch).map(|i| i.mode)
    }

    /// Number of items held: activations, observations, evaluations and
    /// ledger entries.
    pub fn state_size(&self) -> usize {
        self.active.len()
            + self.observations.len()
            + self.evaluations.len()
            + self.ledgers.values().map(|l| l.entries().len() + 1).sum::<usize>()
    }

    /// Processes one cell and reports the resulting verdict, with a snapshot
    /// of the cell for [`explain`].
    pub fn step(&mut self, obs: &BTreeSet<String>, is_last: bool) -> Result<StepOutcome, EngineError> {
        let state: Vec<Instance> = self.active.iter().copied().collect();
        let mut evaluated = Vec::new();
        let cell = self.cell;
        let verdict = self.step_observed(obs, is_last, |_, event| {
            if let StepEvent::Evaluated { formula, epoch, value } = event {
                evaluated.push((formula, epoch, value));
            }
        })?;
        let root_id = self.system.root();
        let root = evaluated
            .iter()
            .find(|&&(f, e, _)| f == root_id && e == 0)
            .map_or(TruthValue::UNDECIDED, |&(_, _, v)| v);
        let snapshot = CellSnapshot {
            cell,
            state,
            observations: obs.iter().cloned().collect(),
            end: is_last,
            evaluations: evaluated,
            terminal: self.terminal,
            next: if self.terminal.is_none() { Some(self.active.iter().copied().collect()) } else { None },
        };
        Ok(StepOutcome { cell, verdict, root, snapshot })
    }

    /// Processes one cell, calling `observer` after every state change.
    pub fn step_observed(
        &mut self,
        obs: &BTreeSet<String>,
        is_last: bool,
        mut observer: impl FnMut(&Monitor, StepEvent),
    ) -> Result<Verdict, EngineError> {
        if let Some(v) = self.terminal {
            return Err(EngineError::StepAfterTerminal(v));
        }
        self.observations.clone_from(obs);
        self.at_end = is_last;
        observer(self, StepEvent::ObservationsAdded);

        let system = Arc::clone(&self.system);
        let pending: Vec<Instance> = self.active.iter().copied().collect();
        for inst in pending {
            let value = self.evaluate(&system, inst)?;
            self.evaluations.insert((inst.formula, inst.epoch), value);
            observer(self, StepEvent::Evaluated { formula: inst.formula, epoch: inst.epoch, value });
        }

        let root = self.evaluation(system.root(), 0);
        if let Some(verdict) = root.and_then(|v| self.terminal_output(&system, v)) {
            self.terminal = Some(verdict);
            observer(self, StepEvent::Terminal(verdict));
            return Ok(verdict);
        }
        if is_last {
            return Err(EngineError::UndecidedAtEnd);
        }
        self.reactivate(&system)?;
        observer(self, StepEvent::Reactivated);
        Ok(Verdict::Undecided)
    }

    fn terminal_output(&self, system: &RuleSystem, root: TruthValue) -> Option<Verdict> {
        system.evaluation_rules().iter().rev().find_map(|r| match (&r.guard, r.output) {
            (Guard::Evaluated { formula, value }, Output::Success)
                if *formula == system.root() && *value == root =>
            {
                Some(Verdict::Success)
            }
            (Guard::Evaluated { formula, value }, Output::Failure)
                if *formula == system.root() && *value == root =>
            {
                Some(Verdict::Failure)
            }
            _ => None,
        })
    }

    fn reactivate(&mut self, system: &RuleSystem) -> Result<(), EngineError> {
        let next = self.cell + 1;
        let mut active = BTreeSet::new();
        for (&(formula, epoch), &value) in &self.evaluations {
            let TruthValue::Undecided(mode) = value else { continue };
            let rule = system
                .reactivation_for(formula, mode)
                .ok_or(EngineError::NoReactivation { formula, value })?;
            for name in &rule.consequent {
                let epoch = if name.formula == formula { epoch } else { next };
                active.insert(Instance { formula: name.formula, epoch, mode: name.mode });
            }
        }
        self.active = active;
        self.evaluations.clear();
        self.observations.clear();
        self.cell = next;
        Ok(())
    }

    fn evaluate(&mut self, system: &RuleSystem, inst: Instance) -> Result<TruthValue, EngineError> {
        let node = system.index().node(inst.formula);
        if let Node::Until(l, r) = *node {
            return self.evaluate_until(inst, l, r);
        }
        let name = inst.name();
        let mut value = None;
        for rule in system.rules_for(name) {
            if self.applies(rule, node, inst.epoch)? {
                value = Some(rule_value(rule));
                break;
            }
        }
        let mut value = value.ok_or(EngineError::NoRuleApplies { name, cell: self.cell })?;
        if self.at_end {
            for rule in system.end_rules_for(inst.formula) {
                let Guard::Evaluated { value: guard, .. } = rule.guard else { continue };
                if guard == value && self.applies(rule, node, inst.epoch)? {
                    value = rule_value(rule);
                    break;
                }
            }
        }
        Ok(value)
    }

    fn applies(&self, rule: &EvaluationRule, node: &Node, epoch: usize) -> Result<bool, EngineError> {
        for c in &rule.conditions {
            let holds = match c {
                Condition::Observed { atom, present } => self.observations.contains(atom) == *present,
                Condition::Value { formula, pattern } => {
                    pattern.matches(self.operand(node, *formula, epoch)?)
                }
                Condition::End => self.at_end,
            };
            if !holds {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn lookup(&self, formula: FormulaId, epoch: usize) -> Result<TruthValue, EngineError> {
        self.evaluation(formula, epoch).ok_or(EngineError::MissingOperand { formula, epoch, cell: self.cell })
    }

    /// Value of `operand` as seen by an instance of `node` spawned at `epoch`.
    fn operand(&self, node: &Node, operand: FormulaId, epoch: usize) -> Result<TruthValue, EngineError> {
        match node {
            Node::Next(_) | Node::WeakNext(_) => self.lookup(operand, epoch + 1),
            Node::Eventually(_) | Node::Always(_) => {
                let mut live = self
                    .evaluations
                    .range((operand, epoch)..=(operand, usize::MAX))
                    .map(|(_, &v)| v)
                    .peekable();
                if live.peek().is_none() {
                    return Err(EngineError::MissingOperand { formula: operand, epoch, cell: self.cell });
                }
                Ok(if matches!(node, Node::Eventually(_)) {
                    live.fold(TruthValue::False, kleene_or)
                } else {
                    live.fold(TruthValue::True, kleene_and)
                })
            }
            _ => self.lookup(operand, epoch),
        }
    }

    fn evaluate_until(
        &mut self,
        inst: Instance,
        l: FormulaId,
        r: FormulaId,
    ) -> Result<TruthValue, EngineError> {
        let key = (inst.formula, inst.epoch);
        let mut ledger = self.ledgers.remove(&key).unwrap_or_else(|| UntilLedger::new(inst.epoch));
        let cell = self.cell;
        ledger.record(
            cell,
            |j| Ok((self.evaluation(l, j), self.evaluation(r, j))),
            |j| EngineError::MissingOperand { formula: l, epoch: j, cell },
        )?;
        let value = ledger.value(self.at_end);
        if !value.is_decided() {
            self.ledgers.insert(key, ledger);
        }
        Ok(value)
    }
}

fn rule_value(rule: &EvaluationRule) -> TruthValue {
    match rule.output {
        Output::Value { value, .. } => value,
        Output::Success => TruthValue::True,
        Output::Failure => TruthValue::False,
    }
}

/// A complete run over a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub verdict: Verdict,
    /// Cell at which the verdict was reached; later cells were not read.
    pub decided_at: usize,
    pub outcomes: Vec<StepOutcome>,
}

/// Monitors `trace`, marking its last cell as END, and stops at the first verdict.
pub fn run_trace(system: &Arc<RuleSystem>, trace: &Trace) -> Result<Run, EngineError> {
    if trace.is_empty() {
        return Err(EngineError::EmptyTrace);
    }
    let mut monitor = Monitor::new(Arc::clone(system));
    let mut outcomes = Vec::new();
    let last = trace.len() - 1;
    for (i, cell) in trace.cells().iter().enumerate() {
        let outcome = monitor.step(cell, i == last)?;
        let verdict = outcome.verdict;
        outcomes.push(outcome);
        if verdict.is_decided() {
            return Ok(Run { verdict, decided_at: i, outcomes });
        }
    }
    Err(EngineError::UndecidedAtEnd)
}

/// Verdict and deciding cell, without snapshots.
pub fn verdict_of(system: &Arc<RuleSystem>, trace: &Trace) -> Result<(Verdict, usize), EngineError> {
    if trace.is_empty() {
        return Err(EngineError::EmptyTrace);
    }
    let mut monitor = Monitor::new(Arc::clone(system));
    let last = trace.len() - 1;
    for (i, cell) in trace.cells().iter().enumerate() {
        let verdict = monitor.step_observed(cell, i == last, |_, _| {})?;
        if verdict.is_decided() {
            return Ok((verdict, i));
        }
    }
    Err(EngineError::UndecidedAtEnd)
}
