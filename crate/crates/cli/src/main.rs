use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rulerunner::diff::{corrupt_disjunction, run_diff_with, DiffConfig, DiffReport};
use rulerunner::engine::{EngineError, SnapshotRecord};
use rulerunner::trace::{format_trace_files, parse_cell, parse_trace_files, Cell, TraceError};
use rulerunner::{
    check_run, compile, explain, parse_formula, render_listing, run_trace, Formula, GenParams, Monitor,
    RuleSystem, Trace, Verdict,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "rulerunner",
    version,
    about = "Compile LTL formulae into rule systems and monitor finite traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the rule system of a formula.
    Compile {
        formula: String,
        #[arg(long)]
        json: bool,
    },
    /// Monitor a trace and print the verdict with the deciding cell.
    Run {
        formula: String,
        #[command(flatten)]
        source: TraceSource,
        /// Print the evolution table before the verdict.
        #[arg(long)]
        explain: bool,
        #[arg(long)]
        json: bool,
    },
    /// Print the evolution table of a run.
    Explain {
        formula: String,
        #[command(flatten)]
        source: TraceSource,
    },
    /// Read one cell per line from standard input; `$end` marks the last cell.
    Stream { formula: String },
    /// Generate random traces in file format, separated by `---` lines.
    Gen {
        /// Comma-separated atom alphabet.
        #[arg(long, value_delimiter = ',', default_value = "a,b")]
        atoms: Vec<String>,
        #[arg(long, default_value_t = 10)]
        length: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare monitor verdicts with the reference semantics.
    Diff {
        #[arg(long, default_value_t = 2)]
        max_depth: usize,
        #[arg(long, value_delimiter = ',', default_value = "a,b")]
        atoms: Vec<String>,
        /// Traces per formula.
        #[arg(long, default_value_t = 50)]
        traces: usize,
        #[arg(long, default_value_t = 5)]
        max_length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Formulae drawn when the corpus is too large to enumerate.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Largest corpus that is enumerated in full.
        #[arg(long, default_value_t = 100_000)]
        exhaustive_limit: u128,
        #[arg(long)]
        json: bool,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Map every intermediate state of a run to a judgement and check its value.
    Map {
        formula: String,
        #[command(flatten)]
        source: TraceSource,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct TraceSource {
    /// Inline trace, e.g. "[c - a - b,d - b]".
    #[arg(long)]
    trace: Option<String>,
    /// Trace file, one cell per line; `---` separates traces.
    #[arg(long)]
    file: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<TraceError> for Failure {
    fn from(e: TraceError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::Internal(e.to_string())
    }
}

fn formula(text: &str) -> Result<Formula, Failure> {
    parse_formula(text).map_err(|e| Failure::Usage(format!("formula: {e}")))
}

fn system(text: &str) -> Result<Arc<RuleSystem>, Failure> {
    Ok(Arc::new(compile(&formula(text)?)))
}

impl TraceSource {
    fn load(&self) -> Result<Vec<Trace>, Failure> {
        match (&self.trace, &self.file) {
            (Some(text), _) => Ok(vec![text.parse()?]),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                Ok(parse_trace_files(&text)?)
            }
            (None, None) => Err(Failure::Usage("no trace given".into())),
        }
    }

    fn load_one(&self) -> Result<Trace, Failure> {
        let mut traces = self.load()?;
        if traces.len() != 1 {
            return Err(Failure::Usage(format!("expected one trace, found {}", traces.len())));
        }
        Ok(traces.remove(0))
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Success => 0,
        Verdict::Failure => 1,
        Verdict::Undecided => 3,
    }
}

fn cmd_compile(text: &str, as_json: bool) -> Result<u8, Failure> {
    let sys = system(text)?;
    if as_json {
        let out = json!({
            "formula": sys.formula().to_string(),
            "rules": sys.records(),
            "initial_state": sys.initial_state().iter().map(|&n| sys.name(n)).collect::<Vec<_>>(),
        });
        println!("{out:#}");
    } else {
        print!("{}", render_listing(&sys));
    }
    Ok(0)
}

fn cmd_run(text: &str, source: &TraceSource, show: bool, as_json: bool) -> Result<u8, Failure> {
    let sys = system(text)?;
    let traces = source.load()?;
    let mut code = 0;
    for trace in &traces {
        let run = run_trace(&sys, trace)?;
        if as_json {
            let mut out = json!({ "verdict": run.verdict, "cell": run.decided_at });
            if show {
                let cells: Vec<SnapshotRecord> =
                    run.outcomes.iter().map(|o| o.snapshot.record(&sys)).collect();
                out["cells"] = json!(cells);
            }
            println!("{out}");
        } else {
            if show {
                print!("{}", explain(&sys, &run.outcomes));
            }
            println!("{} at cell {}", run.verdict, run.decided_at);
        }
        code = code.max(verdict_code(run.verdict));
    }
    Ok(code)
}

fn cmd_explain(text: &str, source: &TraceSource) -> Result<u8, Failure> {
    let sys = system(text)?;
    let run = run_trace(&sys, &source.load_one()?)?;
    print!("{}", explain(&sys, &run.outcomes));
    Ok(verdict_code(run.verdict))
}

fn cmd_stream(text: &str) -> Result<u8, Failure> {
    let sys = system(text)?;
    let mut monitor = Monitor::new(Arc::clone(&sys));
    // The monitor before the latest cell, kept so `$end` can replay that cell as the last one.
    let mut last: Option<(Monitor, Cell)> = None;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let emit = |out: &mut io::StdoutLock, v: Verdict| -> Result<u8, Failure> {
        writeln!(out, "{v}").and_then(|_| out.flush()).map_err(|e| Failure::Internal(e.to_string()))?;
        Ok(verdict_code(v))
    };
    let finish = |last: Option<(Monitor, Cell)>| -> Result<Verdict, Failure> {
        let (mut m, cell) = last.unwrap_or_else(|| (Monitor::new(Arc::clone(&sys)), Cell::new()));
        Ok(m.step(&cell, true)?.verdict)
    };
    for (n, line) in io::stdin().lock().lines().enumerate() {
        let line = line.map_err(|e| Failure::Internal(e.to_string()))?;
        let line = line.trim();
        if line == "$end" {
            let v = finish(last)?;
            return emit(&mut out, v);
        }
        let cell = match parse_cell(line) {
            Ok(cell) => cell,
            Err(e) => {
                eprintln!("line {}: {e}; skipped", n + 1);
                continue;
            }
        };
        let before = monitor.clone();
        let v = monitor.step(&cell, false)?.verdict;
        emit(&mut out, v)?;
        if v.is_decided() {
            return Ok(verdict_code(v));
        }
        last = Some((before, cell));
    }
    let v = finish(last)?;
    emit(&mut out, v)
}

fn cmd_gen(params: GenParams, out: Option<PathBuf>) -> Result<u8, Failure> {
    let text = format_trace_files(&rulerunner::gen_traces(&params)?);
    match out {
        Some(path) => fs::write(&path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn print_report(report: &DiffReport) {
    println!("formulas: {}{}", report.formulas, if report.exhaustive { " (all)" } else { " (sampled)" });
    println!("runs: {}", report.runs);
    println!("decided early: {}", report.early);
    println!("undecided at end: {}", report.undecided_at_end);
    println!("mismatches: {}", report.mismatches);
    for c in &report.counterexamples {
        println!("  {} on {}: engine {}, oracle {}", c.formula, c.trace, c.engine, c.oracle);
    }
}

fn cmd_diff(config: DiffConfig, as_json: bool, inject_fault: bool) -> Result<u8, Failure> {
    if let Some(bad) = config.atoms.iter().find(|a| !rulerunner::trace::is_atom_name(a)) {
        return Err(Failure::Usage(format!("invalid atom name `{bad}`")));
    }
    if config.traces == 0 || config.max_length == 0 {
        return Err(Failure::Usage("--traces and --max-length must be at least 1".into()));
    }
    let report = run_diff_with(&config, |f| {
        let mut sys = compile(f);
        if inject_fault {
            corrupt_disjunction(&mut sys);
        }
        sys
    });
    if as_json {
        println!("{}", json!(report));
    } else {
        print_report(&report);
    }
    Ok(if report.mismatches == 0 { 0 } else { 3 })
}

fn cmd_map(text: &str, source: &TraceSource) -> Result<u8, Failure> {
    let f = formula(text)?;
    let report = check_run(&f, &source.load_one()?).map_err(|e| match e {
        rulerunner::map::MapError::Unsupported(_) => Failure::Usage(e.to_string()),
        _ => Failure::Internal(e.to_string()),
    })?;
    print!("{}", report.render());
    Ok(if report.passed() { 0 } else { 3 })
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Compile { formula, json } => cmd_compile(&formula, json),
        Command::Run { formula, source, explain, json } => cmd_run(&formula, &source, explain, json),
        Command::Explain { formula, source } => cmd_explain(&formula, &source),
        Command::Stream { formula } => cmd_stream(&formula),
        Command::Gen { atoms, length, density, seed, count, out } => {
            cmd_gen(GenParams { atoms, length, density, seed, count }, out)
        }
        Command::Diff {
            max_depth,
            atoms,
            traces,
            max_length,
            seed,
            samples,
            exhaustive_limit,
            json,
            inject_fault,
        } => {
            let config = DiffConfig {
                max_depth,
                atoms,
                traces,
                max_length,
                seed,
                exhaustive_limit,
                samples,
                ..DiffConfig::default()
            };
            cmd_diff(config, json, inject_fault)
        }
        Command::Map { formula, source } => cmd_map(&formula, &source),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
