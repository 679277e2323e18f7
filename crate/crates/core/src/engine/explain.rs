use std::collections::BTreeMap;

use serde::Serialize;

use super::{Instance, Monitor, StepOutcome, Verdict};
use crate::compile::RuleSystem;
use crate::formula::FormulaId;
use crate::truth::TruthValue;

/// What happened in one cell: the state before it, the observations, the
/// evaluations in firing order, and either the verdict or the next state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSnapshot {
    pub cell: usize,
    pub state: Vec<Instance>,
    pub observations: Vec<String>,
    pub end: bool,
    pub evaluations: Vec<(FormulaId, usize, TruthValue)>,
    pub terminal: Option<Verdict>,
    pub next: Option<Vec<Instance>>,
}

/// Rule names of a row; epochs are shown only for formulae with more than
/// one live instance in that row.
fn names(system: &RuleSystem, row: &[Instance]) -> Vec<String> {
    let mut epochs: BTreeMap<FormulaId, usize> = BTreeMap::new();
    for inst in row {
        *epochs.entry(inst.formula).or_default() += 1;
    }
    row.iter()
        .map(|inst| {
            let name = system.name(inst.name());
            if epochs[&inst.formula] > 1 {
                format!("{name}@{}", inst.epoch)
            } else {
                name
            }
        })
        .collect()
}

fn evaluations(system: &RuleSystem, evals: &[(FormulaId, usize, TruthValue)]) -> Vec<String> {
    let mut epochs: BTreeMap<FormulaId, usize> = BTreeMap::new();
    for (f, _, _) in evals {
        *epochs.entry(*f).or_default() += 1;
    }
    evals
        .iter()
        .map(|&(f, e, v)| {
            let text = system.evaluation_text(f, v);
            if epochs[&f] > 1 {
                format!("{text}@{e}")
            } else {
                text
            }
        })
        .collect()
}

impl CellSnapshot {
    /// The four rows of this cell (three plus `STOP` for the deciding cell).
    pub fn render(&self, system: &RuleSystem) -> String {
        let state = names(system, &self.state);
        let mut with_obs = state.clone();
        with_obs.extend(self.observations.iter().cloned());
        if self.end {
            with_obs.push("END".to_string());
        }
        let mut evals = evaluations(system, &self.evaluations);
        if let Some(v) = self.terminal {
            evals.push(v.to_string());
        }
        let mut out = format!(
            "state | {}\n+ obs | {}\neval  | {}\n",
            state.join(", "),
            with_obs.join(", "),
            evals.join(", ")
        );
        match (&self.next, self.terminal) {
            (_, Some(Verdict::Success)) => out.push_str("STOP  | PROPERTY SATISFIED\n"),
            (_, Some(_)) => out.push_str("STOP  | PROPERTY VIOLATED\n"),
            (Some(next), None) => {
                out.push_str(&format!("react | {}\n", names(system, next).join(", ")));
            }
            (None, None) => {}
        }
        out
    }

    pub fn record(&self, system: &RuleSystem) -> SnapshotRecord {
        SnapshotRecord {
            cell: self.cell,
            verdict: self.terminal.unwrap_or(Verdict::Undecided),
            evaluations: self
                .evaluations
                .iter()
                .map(|&(f, epoch, value)| EvaluationRecord {
                    formula: system.index().formula(f).symbolic().to_string(),
                    epoch,
                    value,
                })
                .collect(),
        }
    }
}

/// Machine-readable form of one cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SnapshotRecord {
    pub cell: usize,
    pub verdict: Verdict,
    pub evaluations: Vec<EvaluationRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvaluationRecord {
    pub formula: String,
    pub epoch: usize,
    pub value: TruthValue,
}

impl Monitor {
    /// The current state as one line: activations, observations (and `END`),
    /// then the evaluations made so far in this cell. A decided monitor shows
    /// only its verdict.
    pub fn render_state(&self) -> String {
        if let Some(v) = self.terminal() {
            return v.to_string();
        }
        let system = self.system();
        let row: Vec<Instance> = self.active().iter().copied().collect();
        let mut items = names(system, &row);
        items.extend(self.observations().iter().cloned());
        if self.at_end() {
            items.push("END".to_string());
        }
        let evals: Vec<(FormulaId, usize, TruthValue)> =
            self.evaluations().iter().map(|(&(f, e), &v)| (f, e, v)).collect();
        items.extend(evaluations(system, &evals));
        items.join(", ")
    }
}

/// The evolution table of a run, one block per cell.
pub fn explain(system: &RuleSystem, outcomes: &[StepOutcome]) -> String {
    outcomes.iter().map(|o| o.snapshot.render(system)).collect::<Vec<_>>().join("\n")
}
