use std::io::Write;
use std::process::{Command, Output, Stdio};

fn rulerunner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rulerunner")).args(args).output().unwrap()
}

fn stream(formula: &str, input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_rulerunner"))
        .args(["stream", formula])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn lines(o: &Output) -> Vec<String> {
    stdout(o).lines().map(String::from).collect()
}

fn section_len(listing: &str, header: &str) -> usize {
    listing.split("\n\n").find(|s| s.starts_with(header)).unwrap().lines().count() - 1
}

#[test]
fn compile_counts_rules() {
    let o = rulerunner(&["compile", "a | F b"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(section_len(&text, "EVALUATION RULES"), 25);
    assert_eq!(section_len(&text, "REACTIVATION RULES"), 4);
    assert!(text.ends_with("INITIAL STATE\nR[a], R[b], R[◇b], R[a∨◇b]B\n"));
    assert_eq!(section_len(&stdout(&rulerunner(&["compile", "a"])), "EVALUATION RULES"), 4);
}

#[test]
fn compile_json_lists_records() {
    let o = rulerunner(&["compile", "a", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rules"].as_array().unwrap().len(), 4);
    assert_eq!(v["initial_state"][0], "R[a]");
}

#[test]
fn malformed_formula_exits_2_with_position() {
    let o = rulerunner(&["compile", "a U"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 3"));
}

#[test]
fn run_reports_deciding_cell() {
    let o = rulerunner(&["run", "a | F b", "--trace", "[c - a - b,d - b]"]);
    assert_eq!((o.status.code(), lines(&o)), (Some(0), vec!["SUCCESS at cell 2".to_string()]));
    let o = rulerunner(&["run", "a", "--trace", "[b]"]);
    assert_eq!((o.status.code(), lines(&o)), (Some(1), vec!["FAILURE at cell 0".to_string()]));
}

#[test]
fn run_rejects_bad_traces() {
    assert_eq!(rulerunner(&["run", "a", "--trace", "[a - ]"]).status.code(), Some(2));
    assert_eq!(rulerunner(&["run", "a", "--trace", "[]"]).status.code(), Some(2));
    assert_eq!(rulerunner(&["run", "a"]).status.code(), Some(2));
    assert_eq!(rulerunner(&["run", "a", "--file", "/nonexistent/trace"]).status.code(), Some(2));
}

#[test]
fn run_explain_follows_the_next_operator() {
    let o = rulerunner(&["run", "a | X b", "--trace", "[b - b]", "--explain"]);
    let text = stdout(&o);
    assert!(text.contains("eval  | [a]F, [Xb]?, [a∨Xb]?R\nreact | R[b], R[Xb]M, R[a∨Xb]R\n"), "{text}");
    assert!(text.contains("eval  | [b]T, [Xb]T, [a∨Xb]T, SUCCESS\nSTOP  | PROPERTY SATISFIED\n"));
    assert!(text.ends_with("SUCCESS at cell 1\n"));
}

#[test]
fn run_json_carries_snapshots() {
    let o = rulerunner(&["run", "a | F b", "--trace", "[c - a - b,d - b]", "--json", "--explain"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "SUCCESS");
    assert_eq!(v["cell"], 2);
    assert_eq!(v["cells"].as_array().unwrap().len(), 3);
}

#[test]
fn run_over_a_file_of_traces() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.txt");
    std::fs::write(&path, "c\na\nb,d\nb\n---\nb\n").unwrap();
    let o = rulerunner(&["run", "a | F b", "--file", path.to_str().unwrap()]);
    assert_eq!(lines(&o), ["SUCCESS at cell 2", "SUCCESS at cell 0"]);
    let o = rulerunner(&["run", "a", "--file", path.to_str().unwrap()]);
    assert_eq!(lines(&o), ["FAILURE at cell 0", "FAILURE at cell 0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn explain_subcommand_prints_blocks() {
    let o = rulerunner(&["explain", "a", "--trace", "[a]"]);
    assert_eq!(
        stdout(&o),
        "state | R[a]\n+ obs | R[a], a, END\neval  | [a]T, SUCCESS\nSTOP  | PROPERTY SATISFIED\n"
    );
}

#[test]
fn stream_worked_example() {
    let o = stream("a | F b", "c\na\nb,d\nb\n");
    assert_eq!(lines(&o), ["?", "?", "SUCCESS"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn stream_end_marker() {
    let o = stream("F a", "$end\n");
    assert_eq!((lines(&o), o.status.code()), (vec!["FAILURE".to_string()], Some(1)));
    let o = stream("G a", "a\n$end\n");
    assert_eq!(lines(&o), ["?", "SUCCESS"]);
}

#[test]
fn stream_skips_malformed_lines() {
    let o = stream("G a", "a\nA!\na\n$end\n");
    assert_eq!(lines(&o), ["?", "?", "SUCCESS"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn stream_eof_ends_the_trace() {
    let o = stream("X a", "b\n");
    assert_eq!(lines(&o), ["?", "FAILURE"]);
}

#[test]
fn gen_densities_and_determinism() {
    let o = rulerunner(&["gen", "--atoms", "a,b", "--length", "4", "--density", "0", "--count", "2"]);
    assert_eq!(stdout(&o), "\n\n\n\n---\n\n\n\n\n");
    let o = rulerunner(&["gen", "--atoms", "a,b", "--length", "3", "--density", "1", "--count", "1"]);
    assert_eq!(stdout(&o), "a,b\na,b\na,b\n");
    let args =
        ["gen", "--atoms", "p,q,r", "--length", "20", "--density", "0.4", "--seed", "9", "--count", "5"];
    assert_eq!(rulerunner(&args).stdout, rulerunner(&args).stdout);
}

#[test]
fn gen_writes_files_that_run_reads() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gen.txt");
    let p = path.to_str().unwrap();
    let o = rulerunner(&["gen", "--length", "6", "--count", "3", "--seed", "2", "--out", p]);
    assert_eq!(o.status.code(), Some(0));
    let o = rulerunner(&["run", "G (a | !a)", "--file", p]);
    assert_eq!(lines(&o), ["SUCCESS at cell 5", "SUCCESS at cell 5", "SUCCESS at cell 5"]);
}

#[test]
fn gen_rejects_bad_flags() {
    assert_eq!(rulerunner(&["gen", "--density", "1.5"]).status.code(), Some(2));
    assert_eq!(rulerunner(&["gen", "--length", "0"]).status.code(), Some(2));
    assert_eq!(rulerunner(&["gen", "--atoms", "A"]).status.code(), Some(2));
    assert_eq!(rulerunner(&["gen", "--count", "x"]).status.code(), Some(2));
}

#[test]
fn diff_depth_zero_is_clean() {
    let o = rulerunner(&["diff", "--max-depth", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("mismatches: 0"));
}

#[test]
fn diff_depth_two_is_clean() {
    let o = rulerunner(&["diff", "--max-depth", "2", "--traces", "50", "--max-length", "5", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["formulas"], 30405);
    assert_eq!(v["mismatches"], 0);
    assert_eq!(v["undecided_at_end"], 0);
}

#[test]
fn diff_catches_a_corrupted_table() {
    let o = rulerunner(&["diff", "--max-depth", "1", "--traces", "20", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(!text.contains("mismatches: 0"));
    assert!(text.contains("engine SUCCESS, oracle FAILURE"));
}

#[test]
fn map_reports_steps() {
    let o = rulerunner(&["map", "a | X b", "--trace", "[b - b]"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(lines(&o).len(), 12);
    assert_eq!(rulerunner(&["map", "F a", "--trace", "[a]"]).status.code(), Some(2));
}
