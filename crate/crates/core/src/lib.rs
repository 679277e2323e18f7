//! Rule-based runtime verification of LTL properties over finite traces.
//!
//! A formula in negation normal form is compiled into a [`RuleSystem`]:
//! evaluation rules that compute the three-valued truth of every subformula
//! within a cell, reactivation rules that decide which rules are active in the
//! next cell, and an initial state. A [`Monitor`] runs the system cell by
//! cell and stops at the first irrevocable verdict; on the last cell of a
//! trace the verdict is always binary and agrees with finite-trace LTL.
//!
//! ```
//! use std::sync::Arc;
//! use rulerunner::{compile, parse_formula, run_trace, Trace, Verdict};
//!
//! let formula = parse_formula("a | F b").unwrap();
//! let system = Arc::new(compile(&formula));
//! let trace: Trace = "[c - a - b,d - b]".parse().unwrap();
//! let run = run_trace(&system, &trace).unwrap();
//! assert_eq!((run.verdict, run.decided_at), (Verdict::Success, 2));
//! ```

pub mod compile;
pub mod corpus;
pub mod diff;
pub mod engine;
pub mod formula;
pub mod map;
pub mod oracle;
pub mod trace;
pub mod truth;

pub use compile::{compile, dump_rules, render_listing, rule_count_bound, RuleName, RuleSystem};
pub use engine::{explain, run_trace, verdict_of, Monitor, Run, StepOutcome, Verdict};
pub use formula::{format_formula, parse_formula, subformulas, to_nnf, Formula};
pub use map::{check_run, map_state, MapReport};
pub use oracle::{eval_judgement, oracle_eval, Judgement};
pub use trace::{gen_traces, parse_trace_inline, read_trace_file, GenParams, Trace};
pub use truth::{eval_binary, eval_unary, Mode, TruthValue};
