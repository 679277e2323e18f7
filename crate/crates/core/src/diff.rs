//! Differential testing of the monitor against the oracle.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compile::{compile, Condition, Output, Pattern, RuleSystem};
use crate::corpus::{count_formulas, enumerate_formulas, nth_formula, random_formula_with, SamplerConfig};
use crate::engine::{verdict_of, Verdict};
use crate::formula::{Formula, FormulaId, Node};
use crate::oracle::oracle_eval;
use crate::trace::{random_trace, Trace};
use crate::truth::TruthValue;

/// Densities cycled through when generating traces.
pub const DENSITIES: [f64; 4] = [0.0, 0.3, 0.7, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct DiffConfig {
    pub max_depth: usize,
    pub atoms: Vec<String>,
    /// Traces per formula.
    pub traces: usize,
    /// Trace lengths cycle through `1..=max_length`.
    pub max_length: usize,
    pub seed: u64,
    /// Corpora up to this size are enumerated; larger ones are sampled.
    pub exhaustive_limit: u128,
    /// Number of formulae drawn when sampling.
    pub samples: usize,
    /// Counterexamples kept in the report.
    pub keep: usize,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig {
            max_depth: 2,
            atoms: vec!["a".into(), "b".into()],
            traces: 50,
            max_length: 5,
            seed: 0,
            exhaustive_limit: 100_000,
            samples: 10_000,
            keep: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub formula: String,
    pub trace: String,
    /// Engine verdict, or the engine error.
    pub engine: String,
    pub oracle: Verdict,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DiffReport {
    pub formulas: usize,
    pub runs: usize,
    pub exhaustive: bool,
    pub mismatches: usize,
    /// Runs that reached the last cell without a verdict (or failed).
    pub undecided_at_end: usize,
    /// Runs decided before their last cell.
    pub early: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl DiffReport {
    pub fn merge(&mut self, other: DiffReport, keep: usize) {
        self.formulas += other.formulas;
        self.runs += other.runs;
        self.exhaustive &= other.exhaustive;
        self.mismatches += other.mismatches;
        self.undecided_at_end += other.undecided_at_end;
        self.early += other.early;
        let room = keep.saturating_sub(self.counterexamples.len());
        self.counterexamples.extend(other.counterexamples.into_iter().take(room));
    }
}

/// The trace pool for the `k`-th formula of a run seeded with `seed`.
pub fn trace_pool(config: &DiffConfig, k: u64) -> Vec<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let max_length = config.max_length.max(1);
    (0..config.traces)
        .map(|i| {
            let length = 1 + i % max_length;
            let density = DENSITIES[(i / max_length) % DENSITIES.len()];
            random_trace(&mut rng, &config.atoms, length, density)
        })
        .collect()
}

/// Checks one formula against its trace pool.
pub fn check_formula(
    formula: &Formula,
    system: &Arc<RuleSystem>,
    traces: &[Trace],
    keep: usize,
) -> DiffReport {
    let mut report = DiffReport { formulas: 1, exhaustive: true, ..DiffReport::default() };
    for trace in traces {
        report.runs += 1;
        let expected = Verdict::from_bool(oracle_eval(formula, trace, 0).expect("nonempty trace"));
        let engine = verdict_of(system, trace);
        let agrees = match &engine {
            Ok((v, at)) => {
                if *at + 1 < trace.len() {
                    report.early += 1;
                }
                *v == expected
            }
            Err(_) => {
                report.undecided_at_end += 1;
                false
            }
        };
        if !agrees {
            report.mismatches += 1;
            if report.counterexamples.len() < keep {
                report.counterexamples.push(Counterexample {
                    formula: formula.to_string(),
                    trace: trace.to_string(),
                    engine: match engine {
                        Ok((v, _)) => v.to_string(),
                        Err(e) => e.to_string(),
                    },
                    oracle: expected,
                });
            }
        }
    }
    report
}

/// The formulae a configuration covers, and whether that is the whole corpus.
/// Corpora too large to enumerate are sampled uniformly by index; corpora too
/// large to count are sampled by random growth.
pub fn corpus(config: &DiffConfig) -> (Vec<Formula>, bool) {
    let atoms: Vec<&str> = config.atoms.iter().map(String::as_str).collect();
    match count_formulas(config.max_depth, atoms.len()) {
        Some(n) if n <= config.exhaustive_limit => (enumerate_formulas(config.max_depth, &atoms), true),
        Some(total) => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let formulas = (0..config.samples)
                .map(|_| {
                    nth_formula(config.max_depth, &atoms, rng.gen_range(0..total)).expect("index in range")
                })
                .collect();
            (formulas, false)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let sampler = SamplerConfig::new(config.max_depth);
            let formulas =
                (0..config.samples).map(|_| random_formula_with(&sampler, &atoms, &mut rng)).collect();
            (formulas, false)
        }
    }
}

/// Runs the comparison, compiling each formula with `compile_fn`.
pub fn run_diff_with(config: &DiffConfig, compile_fn: impl Fn(&Formula) -> RuleSystem) -> DiffReport {
    let (formulas, exhaustive) = corpus(config);
    let mut report = DiffReport { exhaustive, ..DiffReport::default() };
    for (k, formula) in formulas.iter().enumerate() {
        let system = Arc::new(compile_fn(formula));
        let traces = trace_pool(config, k as u64);
        let one = check_formula(formula, &system, &traces, config.keep);
        report.merge(one, config.keep);
    }
    report.exhaustive = exhaustive;
    report
}

pub fn run_diff(config: &DiffConfig) -> DiffReport {
    run_diff_with(config, compile)
}

/// Fault injection for testing the harness itself: every disjunction maps
/// two false operands to true.
pub fn corrupt_disjunction(sys: &mut RuleSystem) {
    let disjunctions: Vec<FormulaId> =
        sys.index().ids().filter(|&id| matches!(sys.index().node(id), Node::Or(..))).collect();
    sys.modify_evaluation_rules(|rules| {
        for rule in rules.iter_mut() {
            let both_false = rule.conditions.len() == 2
                && rule
                    .conditions
                    .iter()
                    .all(|c| matches!(c, Condition::Value { pattern: Pattern::False, .. }));
            let formula = rule.formula();
            if both_false && disjunctions.contains(&formula) {
                rule.output = Output::Value { formula, value: TruthValue::True };
            }
        }
    });
}
