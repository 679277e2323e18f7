//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rulerunner::corpus::{count_formulas, random_formula_with, SamplerConfig};
use rulerunner::diff::{run_diff, DiffConfig, DiffReport, DENSITIES};
use rulerunner::trace::random_trace;
use rulerunner::truth::{BinaryOp, UnaryOp};
use rulerunner::{
    check_run, compile, eval_binary, eval_unary, gen_traces, oracle_eval, parse_formula, render_listing,
    run_trace, Formula, GenParams, Mode, Monitor, Trace, TruthValue, Verdict,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

const EVOLUTION: &str = "\
state | R[a], R[b], R[◇b], R[a∨◇b]B
+ obs | R[a], R[b], R[◇b], R[a∨◇b]B, c
eval  | [a]F, [b]F, [◇b]?, [a∨◇b]?R
react | R[b], R[◇b], R[a∨◇b]R

state | R[b], R[◇b], R[a∨◇b]R
+ obs | R[b], R[◇b], R[a∨◇b]R, a
eval  | [b]F, [◇b]?, [a∨◇b]?R
react | R[b], R[◇b], R[a∨◇b]R

state | R[b], R[◇b], R[a∨◇b]R
+ obs | R[b], R[◇b], R[a∨◇b]R, b, d
eval  | [b]T, [◇b]T, [a∨◇b]T, SUCCESS
STOP  | PROPERTY SATISFIED
";

fn golden_run() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_rulerunner"))
        .args(["run", "a | F b", "--trace", "[c - a - b,d - b]", "--explain"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let text = String::from_utf8_lossy(&out.stdout);
    let expected = format!("{EVOLUTION}SUCCESS at cell 2\n");
    let tokens = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
    ensure(tokens(&text) == tokens(&expected), format!("output differs:\n{text}"))?;
    ensure(out.status.code() == Some(0), "exit code")?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;

    // Feed cells one at a time and record which ones the monitor asked for.
    let sys = Arc::new(compile(&parse_formula("a | F b").unwrap()));
    let trace: Trace = "[c - a - b,d - b]".parse().unwrap();
    let mut monitor = Monitor::new(sys);
    let mut read = 0;
    for (i, cell) in trace.cells().iter().enumerate() {
        read += 1;
        if monitor.step(cell, i + 1 == trace.len()).map_err(|e| e.to_string())?.verdict.is_decided() {
            break;
        }
    }
    ensure(read == 3, format!("read {read} cells"))?;
    Ok(format!("3 blocks token-for-token, 3 of 4 cells read, {elapsed:.0?}"))
}

const LISTING: &[&str] = &[
    "R[a], a is observed → [a]T",
    "R[a], a is not observed → [a]F",
    "R[b], b is observed → [b]T",
    "R[b], b is not observed → [b]F",
    "R[◇b], [b]T → [◇b]T",
    "R[◇b], [b]? → [◇b]?",
    "R[◇b], [b]F → [◇b]?",
    "[◇b]?, [END] → [◇b]F",
    "R[a∨◇b]B, [a]T, [◇b]T → [a∨◇b]T",
    "R[a∨◇b]B, [a]T, [◇b]? → [a∨◇b]T",
    "R[a∨◇b]B, [a]T, [◇b]F → [a∨◇b]T",
    "R[a∨◇b]B, [a]?, [◇b]T → [a∨◇b]T",
    "R[a∨◇b]B, [a]?, [◇b]? → [a∨◇b]?B",
    "R[a∨◇b]B, [a]?, [◇b]F → [a∨◇b]?L",
    "R[a∨◇b]B, [a]F, [◇b]T → [a∨◇b]T",
    "R[a∨◇b]B, [a]F, [◇b]? → [a∨◇b]?R",
    "R[a∨◇b]B, [a]F, [◇b]F → [a∨◇b]F",
    "R[a∨◇b]L, [a]T → [a∨◇b]T",
    "R[a∨◇b]L, [a]? → [a∨◇b]?L",
    "R[a∨◇b]L, [a]F → [a∨◇b]F",
    "R[a∨◇b]R, [◇b]T → [a∨◇b]T",
    "R[a∨◇b]R, [◇b]? → [a∨◇b]?R",
    "R[a∨◇b]R, [◇b]F → [a∨◇b]F",
    "[a∨◇b]T → SUCCESS",
    "[a∨◇b]F → FAILURE",
    "[◇b]? → R[b], R[◇b]",
    "[a∨◇b]?B → R[a∨◇b]B",
    "[a∨◇b]?L → R[a∨◇b]L",
    "[a∨◇b]?R → R[a∨◇b]R",
];

fn compile_golden() -> Outcome {
    let sys = compile(&parse_formula("a | F b").unwrap());
    let (e, r) = (sys.evaluation_rules().len(), sys.reactivation_rules().len());
    ensure(e == 25 && r == 4, format!("{e} evaluation, {r} reactivation rules"))?;
    let initial = sys.render_names(sys.initial_state());
    ensure(initial == "R[a], R[b], R[◇b], R[a∨◇b]B", format!("initial state {initial}"))?;
    let squash = |s: &str| s.split_whitespace().collect::<String>();
    let listing: Vec<String> = render_listing(&sys).lines().map(squash).collect();
    if let Some(missing) = LISTING.iter().find(|l| !listing.contains(&squash(l))) {
        return Err(format!("missing rule `{missing}`"));
    }
    Ok(format!("25 + 4 rules, {} listed rules verbatim, initial state matches", LISTING.len()))
}

fn map_golden() -> Outcome {
    let report = check_run(&parse_formula("a | X b").unwrap(), &"[b - b]".parse().unwrap())
        .map_err(|e| e.to_string())?;
    let expected = [
        (0, "R[a], R[Xb], R[a∨Xb]B", "[u,0⊨a]_F ⊔ [u,0⊨Xb]_F"),
        (0, "R[a], R[Xb], R[a∨Xb]B, b", "[u,0⊨a]_F ⊔ [u,0⊨Xb]_F"),
        (0, "R[a], R[Xb], R[a∨Xb]B, b, [a]F", "⊥ ⊔ [u,0⊨Xb]_F"),
        (0, "R[a], R[Xb], R[a∨Xb]B, b, [a]F, [Xb]?", "⊥ ⊔ [u,0⊨Xb]_F"),
        (0, "R[a], R[Xb], R[a∨Xb]B, b, [a]F, [Xb]?, [a∨Xb]?R", "[u,0⊨Xb]_F"),
        (1, "R[b], R[Xb]M, R[a∨Xb]R", "[u,1⊨b]_F"),
        (1, "R[b], R[Xb]M, R[a∨Xb]R, b, END", "[u,1⊨b]_F"),
        (1, "R[b], R[Xb]M, R[a∨Xb]R, b, END, [b]T", "⊤"),
        (1, "R[b], R[Xb]M, R[a∨Xb]R, b, END, [b]T, [Xb]T", "⊤"),
        (1, "R[b], R[Xb]M, R[a∨Xb]R, b, END, [b]T, [Xb]T, [a∨Xb]T", "⊤"),
        (1, "SUCCESS", "⊤"),
    ];
    ensure(report.steps.len() == expected.len(), format!("{} steps", report.steps.len()))?;
    for (i, (step, want)) in report.steps.iter().zip(expected).enumerate() {
        let got = (step.index, step.state.as_str(), step.judgement.to_string());
        ensure((got.0, got.1, got.2.as_str()) == want, format!("row {}: {got:?}", i + 1))?;
    }
    ensure(report.passed(), report.render())?;
    Ok("11 steps match, value ⊤ at every step, ends ⊤".into())
}

/// Depth-3 formulae drawn uniformly from the enumeration on top of the full
/// depth-2 corpus.
const DEPTH3_SAMPLES: usize = 50_000;

fn differential() -> Result<(DiffReport, Duration), String> {
    let start = Instant::now();
    let base = DiffConfig { traces: 200, max_length: 6, seed: 2024, ..DiffConfig::default() };
    let mut report = run_diff(&DiffConfig { max_depth: 2, ..base.clone() });
    ensure(report.exhaustive, "depth-2 corpus was not enumerated")?;
    let sampled = run_diff(&DiffConfig { max_depth: 3, samples: DEPTH3_SAMPLES, ..base });
    report.merge(sampled, 10);
    Ok((report, start.elapsed()))
}

fn soundness((report, elapsed): &(DiffReport, Duration)) -> Outcome {
    let total = count_formulas(3, 2).unwrap();
    let detail = format!(
        "{} formulas ({} at depth ≤ 2 exhaustive + {} of {} at depth 3 sampled), {} runs, {} mismatches, {:.1}s",
        report.formulas,
        report.formulas - DEPTH3_SAMPLES,
        DEPTH3_SAMPLES,
        total,
        report.runs,
        report.mismatches,
        elapsed.as_secs_f64()
    );
    if report.mismatches > 0 {
        return Err(format!("{detail}; first: {:?}", report.counterexamples.first()));
    }
    Ok(detail)
}

fn end_binary((report, _): &(DiffReport, Duration)) -> Outcome {
    ensure(report.undecided_at_end == 0, format!("{} runs undecided at end", report.undecided_at_end))?;
    Ok(format!("{} runs, all binary at the last cell", report.runs))
}

fn random_cells(rng: &mut ChaCha8Rng, n: usize) -> Trace {
    let density = DENSITIES[rng.gen_range(0..DENSITIES.len())];
    random_trace(rng, &["a".to_string(), "b".to_string()], n, density)
}

fn extension_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sampler = SamplerConfig::new(3);
    let (mut pairs, mut tried) = (0, 0);
    while pairs < 1500 {
        tried += 1;
        ensure(tried < 1_000_000, "too few early verdicts")?;
        let f = random_formula_with(&sampler, &["a", "b"], &mut rng);
        let len = rng.gen_range(2..=6);
        let trace = random_cells(&mut rng, len);
        let sys = Arc::new(compile(&f));
        let run = run_trace(&sys, &trace).map_err(|e| e.to_string())?;
        if run.decided_at + 1 == trace.len() {
            continue;
        }
        pairs += 1;
        let suffix = random_cells(&mut rng, 3);
        for base in [trace.clone(), trace.prefix(run.decided_at + 1).unwrap()] {
            let extended = base.extended(&suffix);
            let oracle = Verdict::from_bool(oracle_eval(&f, &extended, 0).map_err(|e| e.to_string())?);
            ensure(oracle == run.verdict, format!("{f} on {trace} + {suffix}: {} vs {oracle}", run.verdict))?;
        }
    }
    Ok(format!("{pairs} early-decided pairs, verdict unchanged under 3-cell suffixes"))
}

fn nested_always(n: usize) -> Formula {
    let mut f = Formula::atom("a").always();
    for _ in 1..n {
        f = Formula::atom("a").and(f).always();
    }
    f
}

fn linearity() -> Outcome {
    let count = |n| {
        let sys = compile(&nested_always(n));
        sys.evaluation_rules().len() + sys.reactivation_rules().len()
    };
    let ns = [5usize, 10, 20, 40];
    let counts: Vec<usize> = ns.iter().map(|&n| count(n)).collect();
    let alpha = (counts[1] - counts[0]) / (ns[1] - ns[0]);
    let beta = counts[0] as isize - (alpha * ns[0]) as isize;
    let line = format!("{alpha}·n {} {}", if beta < 0 { '-' } else { '+' }, beta.abs());
    for (&n, &c) in ns.iter().zip(&counts) {
        ensure(c as isize == (alpha * n) as isize + beta, format!("count({n}) = {c} off the line"))?;
    }
    for n in 1..=40 {
        ensure(count(n + 1) - count(n) == alpha, format!("first difference changes at {n}"))?;
    }

    let params =
        GenParams { atoms: vec!["a".into(), "b".into()], length: 100_000, density: 1.0, seed: 7, count: 1 };
    let trace = gen_traces(&params).map_err(|e| e.to_string())?.remove(0);
    let mut monitor = Monitor::new(Arc::new(compile(&parse_formula("G a").unwrap())));
    let start = Instant::now();
    let mut sizes = std::collections::BTreeSet::new();
    let last = trace.len() - 1;
    let mut verdict = Verdict::Undecided;
    for (i, cell) in trace.cells().iter().enumerate() {
        verdict = monitor.step_observed(cell, i == last, |_, _| {}).map_err(|e| e.to_string())?;
        if i < last {
            sizes.insert(monitor.state_size());
        }
    }
    let elapsed = start.elapsed();
    ensure(verdict == Verdict::Success, format!("verdict {verdict}"))?;
    ensure(elapsed < Duration::from_secs(2), format!("took {elapsed:?}"))?;
    ensure(sizes.len() == 1, format!("state sizes {sizes:?}"))?;
    Ok(format!(
        "count(n) = {line} for n in {ns:?}; G a over 100000 cells in {elapsed:.0?}, state size {}",
        sizes.first().unwrap()
    ))
}

fn map_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sampler = SamplerConfig { eventually_always: false, ..SamplerConfig::new(3) };
    let mut steps = 0;
    for k in 0..500 {
        let f = random_formula_with(&sampler, &["a", "b"], &mut rng);
        let len = rng.gen_range(1..=5);
        let trace = random_cells(&mut rng, len);
        let report = check_run(&f, &trace).map_err(|e| format!("{f}: {e}"))?;
        ensure(report.passed(), format!("pair {k}:\n{}", report.render()))?;
        steps += report.steps.len();
    }
    Ok(format!("500 runs, {steps} mapped states, no violations, terminals ⊤/⊥ as the verdict"))
}

fn tables() -> Outcome {
    let mut cells = 0;
    for op in [BinaryOp::Or, BinaryOp::And, BinaryOp::Until] {
        for &mode in op.legal_modes() {
            for l in TruthValue::all() {
                for r in TruthValue::all() {
                    for _at_end in [false, true] {
                        eval_binary(op, mode, l, r).map_err(|e| e.to_string())?;
                        cells += 1;
                    }
                }
            }
        }
    }
    for op in [UnaryOp::Eventually, UnaryOp::Always, UnaryOp::Next, UnaryOp::WeakNext] {
        for &mode in op.legal_modes() {
            for v in TruthValue::all() {
                for at_end in [false, true] {
                    eval_unary(op, mode, v, at_end).map_err(|e| e.to_string())?;
                    cells += 1;
                }
            }
        }
    }
    for text in ["true", "a", "!a", "a | b", "a & b", "a U b", "X a", "W a", "F a", "G a"] {
        let sys = compile(&parse_formula(text).unwrap());
        sys.check_total()
            .map_err(|(name, n)| format!("{text}: {} has {n} applicable rules", sys.name(name)))?;
        sys.check_exclusive().map_err(|p| format!("{text}: overlapping rules {p:?}"))?;
    }
    for l in TruthValue::all() {
        for r in TruthValue::all() {
            let and = eval_binary(BinaryOp::And, Mode::Both, l, r).unwrap();
            let or = eval_binary(BinaryOp::Or, Mode::Both, r.dual(), l.dual()).unwrap();
            ensure(and == or.dual(), format!("duality breaks at ({l}, {r})"))?;
        }
    }
    Ok(format!("{cells} table cells defined, compiled rules total and exclusive, Or-B dual to And-B"))
}

fn main() -> ExitCode {
    let mut failed = false;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {n} {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed = true;
                println!("FAIL {n} {name}: {why} [{secs:.1}s]");
            }
        }
    };
    report(1, "golden evolution", &mut golden_run);
    report(2, "golden rule listing", &mut compile_golden);
    report(3, "golden map table", &mut map_golden);
    let diff = catch_unwind(differential).unwrap_or_else(|_| Err("panicked".into()));
    report(4, "differential soundness", &mut || diff.as_ref().map_err(Clone::clone).and_then(soundness));
    report(5, "early-verdict extension invariance", &mut extension_invariance);
    report(6, "binary verdict at trace end", &mut || {
        diff.as_ref().map_err(Clone::clone).and_then(end_binary)
    });
    report(7, "linearity", &mut linearity);
    report(8, "map invariance", &mut map_property);
    report(9, "table totality and duality", &mut tables);
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
