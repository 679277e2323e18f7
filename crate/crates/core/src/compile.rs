//! Compilation of a formula into a rule system: evaluation rules, reactivation
//! rules and the initial state.
//!
//! The subformulae are visited in post-order. Every distinct subformula adds
//! one evaluation rule per cell of its operator's evaluation tables, plus an
//! end-of-trace rule for `◇`, `□`, `X` and `W`; the root additionally gets the
//! `SUCCESS`/`FAILURE` rules, which come last. Because operands always have
//! smaller ids than the formulae using them, firing the rules in list order
//! evaluates every operand before its parent.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::formula::{Formula, FormulaId, Node, SubformulaIndex};
use crate::truth::{eval_binary, eval_unary, BinaryOp, Mode, TruthValue, UnaryOp};

/// Per-subformula upper bound on the number of evaluation rules: the until
/// tables (7 cells in mode `A`, 3 in each of `B`, `L`, `R`).
pub const RULES_PER_SUBFORMULA: usize = 16;

/// `R[φ]` followed by the activation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleName {
    pub formula: FormulaId,
    pub mode: Mode,
}

impl RuleName {
    pub fn new(formula: FormulaId, mode: Mode) -> Self {
        RuleName { formula, mode }
    }
}

/// Condition on an operand value. `?` matches every undecided annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    True,
    False,
    Undecided,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::True, Pattern::Undecided, Pattern::False];

    pub fn matches(self, v: TruthValue) -> bool {
        matches!(
            (self, v),
            (Pattern::True, TruthValue::True)
                | (Pattern::False, TruthValue::False)
                | (Pattern::Undecided, TruthValue::Undecided(_))
        )
    }

    /// A value matched by this pattern.
    pub fn representative(self) -> TruthValue {
        match self {
            Pattern::True => TruthValue::True,
            Pattern::False => TruthValue::False,
            Pattern::Undecided => TruthValue::UNDECIDED,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pattern::True => "T",
            Pattern::False => "F",
            Pattern::Undecided => "?",
        })
    }
}

/// What makes a rule eligible: an active rule name, or (for end-of-trace and
/// terminal rules) a truth evaluation already in the state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Guard {
    Active(RuleName),
    Evaluated { formula: FormulaId, value: TruthValue },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    Observed { atom: String, present: bool },
    Value { formula: FormulaId, pattern: Pattern },
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    Value { formula: FormulaId, value: TruthValue },
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvaluationRule {
    pub guard: Guard,
    pub conditions: Vec<Condition>,
    pub output: Output,
}

impl EvaluationRule {
    /// Formula whose evaluation this rule belongs to (the root for terminal rules).
    pub fn formula(&self) -> FormulaId {
        match self.guard {
            Guard::Active(name) => name.formula,
            Guard::Evaluated { formula, .. } => formula,
        }
    }
}

/// Binds an undecided evaluation in one cell to the rule names active in the
/// next. Names for the trigger formula continue the same instance; names for
/// its subformulae start fresh instances in the next cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReactivationRule {
    pub formula: FormulaId,
    pub trigger: Mode,
    pub consequent: Vec<RuleName>,
}

/// A compiled monitor: `⟨R_E, R_R, S⟩` plus lookup tables for the engine.
#[derive(Debug, Clone)]
pub struct RuleSystem {
    index: SubformulaIndex,
    evaluation: Vec<EvaluationRule>,
    reactivation: Vec<ReactivationRule>,
    initial: Vec<RuleName>,
    by_name: Vec<Vec<usize>>,
    end_rules: Vec<Vec<usize>>,
    reactivation_by_trigger: Vec<Option<usize>>,
}

fn slot(name: RuleName) -> usize {
    name.formula.0 * Mode::ALL.len() + name.mode as usize
}

impl RuleSystem {
    pub fn index(&self) -> &SubformulaIndex {
        &self.index
    }

    pub fn root(&self) -> FormulaId {
        self.index.root()
    }

    pub fn formula(&self) -> &Formula {
        self.index.formula(self.root())
    }

    pub fn evaluation_rules(&self) -> &[EvaluationRule] {
        &self.evaluation
    }

    pub fn reactivation_rules(&self) -> &[ReactivationRule] {
        &self.reactivation
    }

    pub fn initial_state(&self) -> &[RuleName] {
        &self.initial
    }

    /// Table rules guarded by `name`, in firing order.
    pub fn rules_for(&self, name: RuleName) -> impl Iterator<Item = &EvaluationRule> {
        self.by_name[slot(name)].iter().map(|&i| &self.evaluation[i])
    }

    /// End-of-trace rules refining an evaluation of `formula`.
    pub fn end_rules_for(&self, formula: FormulaId) -> impl Iterator<Item = &EvaluationRule> {
        self.end_rules[formula.0].iter().map(|&i| &self.evaluation[i])
    }

    pub fn reactivation_for(&self, formula: FormulaId, trigger: Mode) -> Option<&ReactivationRule> {
        self.reactivation_by_trigger[slot(RuleName::new(formula, trigger))].map(|i| &self.reactivation[i])
    }

    /// Edits the evaluation rules in place and rebuilds the lookup tables.
    /// Used to inject faults when testing the differential harness.
    pub fn modify_evaluation_rules(&mut self, edit: impl FnOnce(&mut Vec<EvaluationRule>)) {
        edit(&mut self.evaluation);
        self.rebuild_lookups();
    }

    fn rebuild_lookups(&mut self) {
        let slots = self.index.len() * Mode::ALL.len();
        self.by_name = vec![Vec::new(); slots];
        self.end_rules = vec![Vec::new(); self.index.len()];
        for (i, rule) in self.evaluation.iter().enumerate() {
            match (&rule.guard, rule.output) {
                (Guard::Active(name), _) => self.by_name[slot(*name)].push(i),
                (Guard::Evaluated { formula, .. }, Output::Value { .. }) => self.end_rules[formula.0].push(i),
                (Guard::Evaluated { .. }, _) => {}
            }
        }
        self.reactivation_by_trigger = vec![None; slots];
        for (i, rule) in self.reactivation.iter().enumerate() {
            self.reactivation_by_trigger[slot(RuleName::new(rule.formula, rule.trigger))] = Some(i);
        }
    }

    /// Checks that no two rules with the same guard can fire on the same
    /// input. Returns the offending pair of rule positions otherwise.
    pub fn check_exclusive(&self) -> Result<(), (usize, usize)> {
        for (i, a) in self.evaluation.iter().enumerate() {
            for (j, b) in self.evaluation.iter().enumerate().skip(i + 1) {
                if a.guard == b.guard && conditions_overlap(&a.conditions, &b.conditions) {
                    return Err((i, j));
                }
            }
        }
        Ok(())
    }

    /// Checks that for every rule name and every combination of operand
    /// values and observations, exactly one of its rules applies. Returns the
    /// first name where none or several do, with the number that applied.
    pub fn check_total(&self) -> Result<(), (RuleName, usize)> {
        let names: BTreeSet<RuleName> = self
            .evaluation
            .iter()
            .filter_map(|r| match r.guard {
                Guard::Active(name) => Some(name),
                Guard::Evaluated { .. } => None,
            })
            .collect();
        for name in names {
            let rules: Vec<&EvaluationRule> = self.rules_for(name).collect();
            let mut operands = BTreeSet::new();
            let mut atoms = BTreeSet::new();
            for c in rules.iter().flat_map(|r| &r.conditions) {
                match c {
                    Condition::Value { formula, .. } => {
                        operands.insert(*formula);
                    }
                    Condition::Observed { atom, .. } => {
                        atoms.insert(atom.as_str());
                    }
                    Condition::End => {}
                }
            }
            let operands: Vec<FormulaId> = operands.into_iter().collect();
            let atoms: Vec<&str> = atoms.into_iter().collect();
            let combos = Pattern::ALL.len().pow(operands.len() as u32) << atoms.len();
            for combo in 0..combos {
                let observed = |atom: &str| {
                    let k = atoms.iter().position(|a| *a == atom).expect("collected above");
                    combo & (1 << k) != 0
                };
                let value = |f: FormulaId| {
                    let k = operands.iter().position(|o| *o == f).expect("collected above") as u32;
                    Pattern::ALL[(combo >> atoms.len()) / Pattern::ALL.len().pow(k) % Pattern::ALL.len()]
                };
                let applied = rules
                    .iter()
                    .filter(|r| {
                        r.conditions.iter().all(|c| match c {
                            Condition::Observed { atom, present } => observed(atom) == *present,
                            Condition::Value { formula, pattern } => value(*formula) == *pattern,
                            Condition::End => false,
                        })
                    })
                    .count();
                if applied != 1 {
                    return Err((name, applied));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self, name: RuleName) -> String {
        format!("R[{}]{}", self.index.formula(name.formula).symbolic(), name.mode.suffix())
    }

    pub fn evaluation_text(&self, formula: FormulaId, value: TruthValue) -> String {
        format!("[{}]{}", self.index.formula(formula).symbolic(), value)
    }

    fn condition_text(&self, c: &Condition) -> String {
        match c {
            Condition::Observed { atom, present: true } => format!("{atom} is observed"),
            Condition::Observed { atom, present: false } => format!("{atom} is not observed"),
            Condition::Value { formula, pattern } => {
                format!("[{}]{}", self.index.formula(*formula).symbolic(), pattern)
            }
            Condition::End => "[END]".to_string(),
        }
    }

    fn guard_text(&self, g: &Guard) -> String {
        match g {
            Guard::Active(name) => self.name(*name),
            Guard::Evaluated { formula, value } => self.evaluation_text(*formula, *value),
        }
    }

    fn output_text(&self, o: &Output) -> String {
        match o {
            Output::Value { formula, value } => self.evaluation_text(*formula, *value),
            Output::Success => "SUCCESS".to_string(),
            Output::Failure => "FAILURE".to_string(),
        }
    }

    pub fn render_evaluation_rule(&self, rule: &EvaluationRule) -> String {
        let mut lhs = vec![self.guard_text(&rule.guard)];
        lhs.extend(rule.conditions.iter().map(|c| self.condition_text(c)));
        format!("{} → {}", lhs.join(", "), self.output_text(&rule.output))
    }

    pub fn render_reactivation_rule(&self, rule: &ReactivationRule) -> String {
        let names: Vec<String> = rule.consequent.iter().map(|&n| self.name(n)).collect();
        format!(
            "{} → {}",
            self.evaluation_text(rule.formula, TruthValue::Undecided(rule.trigger)),
            names.join(", ")
        )
    }

    pub fn render_names(&self, names: &[RuleName]) -> String {
        names.iter().map(|&n| self.name(n)).collect::<Vec<_>>().join(", ")
    }

    /// Machine-readable dump, one record per rule in firing order.
    pub fn records(&self) -> Vec<RuleRecord> {
        let eval = self.evaluation.iter().map(|r| RuleRecord {
            kind: RuleKind::Evaluation,
            guard: self.guard_text(&r.guard),
            conditions: r.conditions.iter().map(|c| self.condition_text(c)).collect(),
            output: vec![self.output_text(&r.output)],
        });
        let react = self.reactivation.iter().map(|r| RuleRecord {
            kind: RuleKind::Reactivation,
            guard: self.evaluation_text(r.formula, TruthValue::Undecided(r.trigger)),
            conditions: vec![],
            output: r.consequent.iter().map(|&n| self.name(n)).collect(),
        });
        eval.chain(react).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Evaluation,
    Reactivation,
}

/// One rule of the machine-readable dump. Field order is part of the format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleRecord {
    pub kind: RuleKind,
    pub guard: String,
    pub conditions: Vec<String>,
    pub output: Vec<String>,
}

fn conditions_overlap(a: &[Condition], b: &[Condition]) -> bool {
    for ca in a {
        for cb in b {
            let clash = match (ca, cb) {
                (
                    Condition::Observed { atom: x, present: p },
                    Condition::Observed { atom: y, present: q },
                ) => x == y && p != q,
                (
                    Condition::Value { formula: x, pattern: p },
                    Condition::Value { formula: y, pattern: q },
                ) => x == y && p != q,
                _ => false,
            };
            if clash {
                return false;
            }
        }
    }
    true
}

/// Upper bound on the number of evaluation rules `compile(f)` emits.
pub fn rule_count_bound(f: &Formula) -> usize {
    RULES_PER_SUBFORMULA * SubformulaIndex::new(f).len() + 2
}

/// Builds the rule system monitoring `f`.
pub fn compile(f: &Formula) -> RuleSystem {
    let index = SubformulaIndex::new(f);
    let mut evaluation = Vec::new();
    let mut reactivation = Vec::new();
    // Initial state of the subsystem rooted at each subformula.
    let mut initial: Vec<BTreeSet<RuleName>> = Vec::with_capacity(index.len());

    for id in index.ids() {
        let node = index.node(id);
        let mut builder = TableBuilder { id, rules: &mut evaluation };
        let mut react = |trigger: Mode, names: BTreeSet<RuleName>| {
            reactivation.push(ReactivationRule {
                formula: id,
                trigger,
                consequent: names.into_iter().collect(),
            })
        };
        let start = match *node {
            Node::True => {
                builder.push(Mode::Plain, vec![], TruthValue::True);
                BTreeSet::from([RuleName::new(id, Mode::Plain)])
            }
            Node::Atom(ref a) | Node::NegAtom(ref a) => {
                let positive = matches!(node, Node::Atom(_));
                for present in [true, false] {
                    let cond = Condition::Observed { atom: a.clone(), present };
                    builder.push(Mode::Plain, vec![cond], TruthValue::from_bool(present == positive));
                }
                BTreeSet::from([RuleName::new(id, Mode::Plain)])
            }
            Node::Or(l, r) | Node::And(l, r) => {
                let op = if matches!(node, Node::Or(..)) { BinaryOp::Or } else { BinaryOp::And };
                for lp in Pattern::ALL {
                    for rp in Pattern::ALL {
                        builder.binary(op, Mode::Both, (l, Some(lp)), (r, Some(rp)));
                    }
                }
                builder.unary_tables(op, l, r);
                for z in [Mode::Both, Mode::Left, Mode::Right] {
                    react(z, BTreeSet::from([RuleName::new(id, z)]));
                }
                let mut s = &initial[l.0] | &initial[r.0];
                s.insert(RuleName::new(id, Mode::Both));
                s
            }
            Node::Until(l, r) => {
                let op = BinaryOp::Until;
                builder.binary(op, Mode::All, (l, None), (r, Some(Pattern::True)));
                for lp in Pattern::ALL {
                    for rp in [Pattern::Undecided, Pattern::False] {
                        builder.binary(op, Mode::All, (l, Some(lp)), (r, Some(rp)));
                    }
                }
                for lp in Pattern::ALL {
                    builder.binary(op, Mode::Both, (l, Some(lp)), (r, None));
                }
                builder.unary_tables(op, l, r);
                let operands = &initial[l.0] | &initial[r.0];
                for z in [Mode::All, Mode::Both, Mode::Left, Mode::Right] {
                    let mut names = operands.clone();
                    names.insert(RuleName::new(id, z));
                    react(z, names);
                }
                let mut s = operands;
                s.insert(RuleName::new(id, Mode::All));
                s
            }
            Node::Eventually(sub) | Node::Always(sub) => {
                let op =
                    if matches!(node, Node::Eventually(_)) { UnaryOp::Eventually } else { UnaryOp::Always };
                for p in Pattern::ALL {
                    let out = eval_unary(op, Mode::Plain, p.representative(), false).expect("legal");
                    builder.push(Mode::Plain, vec![Condition::Value { formula: sub, pattern: p }], out);
                }
                builder.end_rule(eval_unary(op, Mode::Plain, TruthValue::UNDECIDED, true).expect("legal"));
                let mut names = initial[sub.0].clone();
                names.insert(RuleName::new(id, Mode::Plain));
                react(Mode::Plain, names.clone());
                names
            }
            Node::Next(sub) | Node::WeakNext(sub) => {
                let op = if matches!(node, Node::Next(_)) { UnaryOp::Next } else { UnaryOp::WeakNext };
                let pending = eval_unary(op, Mode::Plain, TruthValue::UNDECIDED, false).expect("legal");
                builder.push(Mode::Plain, vec![], pending);
                builder.end_rule(eval_unary(op, Mode::Plain, TruthValue::UNDECIDED, true).expect("legal"));
                for p in Pattern::ALL {
                    let out = eval_unary(op, Mode::Mirror, p.representative(), false).expect("legal");
                    builder.push(Mode::Mirror, vec![Condition::Value { formula: sub, pattern: p }], out);
                }
                let mut names = initial[sub.0].clone();
                names.insert(RuleName::new(id, Mode::Mirror));
                react(Mode::Plain, names);
                react(Mode::Mirror, BTreeSet::from([RuleName::new(id, Mode::Mirror)]));
                BTreeSet::from([RuleName::new(id, Mode::Plain)])
            }
        };
        initial.push(start);
    }

    let root = index.root();
    evaluation.push(EvaluationRule {
        guard: Guard::Evaluated { formula: root, value: TruthValue::True },
        conditions: vec![],
        output: Output::Success,
    });
    evaluation.push(EvaluationRule {
        guard: Guard::Evaluated { formula: root, value: TruthValue::False },
        conditions: vec![],
        output: Output::Failure,
    });

    let mut system = RuleSystem {
        initial: initial[root.0].iter().copied().collect(),
        index,
        evaluation,
        reactivation,
        by_name: Vec::new(),
        end_rules: Vec::new(),
        reactivation_by_trigger: Vec::new(),
    };
    system.rebuild_lookups();
    assert!(system.check_exclusive().is_ok(), "overlapping evaluation table cells");
    system
}

struct TableBuilder<'a> {
    id: FormulaId,
    rules: &'a mut Vec<EvaluationRule>,
}

impl TableBuilder<'_> {
    fn push(&mut self, mode: Mode, conditions: Vec<Condition>, value: TruthValue) {
        self.rules.push(EvaluationRule {
            guard: Guard::Active(RuleName::new(self.id, mode)),
            conditions,
            output: Output::Value { formula: self.id, value },
        });
    }

    /// One cell of a binary table. `None` leaves that operand unconstrained.
    fn binary(
        &mut self,
        op: BinaryOp,
        mode: Mode,
        (l, lp): (FormulaId, Option<Pattern>),
        (r, rp): (FormulaId, Option<Pattern>),
    ) {
        let rep = |p: Option<Pattern>| p.map_or(TruthValue::UNDECIDED, Pattern::representative);
        let out = eval_binary(op, mode, rep(lp), rep(rp)).expect("legal mode");
        let mut conditions = Vec::new();
        if let Some(pattern) = lp {
            conditions.push(Condition::Value { formula: l, pattern });
        }
        if let Some(pattern) = rp {
            conditions.push(Condition::Value { formula: r, pattern });
        }
        self.push(mode, conditions, out);
    }

    /// The single-operand `L` and `R` tables.
    fn unary_tables(&mut self, op: BinaryOp, l: FormulaId, r: FormulaId) {
        for p in Pattern::ALL {
            self.binary(op, Mode::Left, (l, Some(p)), (r, None));
        }
        for p in Pattern::ALL {
            self.binary(op, Mode::Right, (l, None), (r, Some(p)));
        }
    }

    fn end_rule(&mut self, value: TruthValue) {
        self.rules.push(EvaluationRule {
            guard: Guard::Evaluated { formula: self.id, value: TruthValue::UNDECIDED },
            conditions: vec![Condition::End],
            output: Output::Value { formula: self.id, value },
        });
    }
}

/// Rule listing in firing order, one rule per line: evaluation rules first,
/// then reactivation rules.
pub fn dump_rules(sys: &RuleSystem) -> String {
    let mut out = String::new();
    for r in sys.evaluation_rules() {
        out.push_str(&sys.render_evaluation_rule(r));
        out.push('\n');
    }
    for r in sys.reactivation_rules() {
        out.push_str(&sys.render_reactivation_rule(r));
        out.push('\n');
    }
    out
}

/// The full listing with section headers and the initial state.
pub fn render_listing(sys: &RuleSystem) -> String {
    let mut out = String::from("EVALUATION RULES\n");
    for r in sys.evaluation_rules() {
        out.push_str(&sys.render_evaluation_rule(r));
        out.push('\n');
    }
    out.push_str("\nREACTIVATION RULES\n");
    for r in sys.reactivation_rules() {
        out.push_str(&sys.render_reactivation_rule(r));
        out.push('\n');
    }
    out.push_str("\nINITIAL STATE\n");
    out.push_str(&sys.render_names(sys.initial_state()));
    out.push('\n');
    out
}
