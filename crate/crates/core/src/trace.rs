//! Traces: finite sequences of observation sets, the inline and line-based
//! file formats, and the seeded random generator.
//!
//! Inline syntax: cells separated by `-`, atoms within a cell by `,`, optional
//! surrounding brackets, `.` for an empty cell: `[c - a - b,d - b]`.
//!
//! File syntax: one cell per line, atoms separated by whitespace or commas, a
//! blank line (or `.`) is an empty cell, lines starting with `#` are comments.
//! Several traces in one file are separated by `---` lines.
//!
//! The last cell of a trace carries the end-of-trace marker implicitly.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Observations of one cell.
pub type Cell = BTreeSet<String>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("a trace needs at least one cell")]
    Empty,
    #[error("invalid atom name `{0}`")]
    InvalidAtom(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

/// Whether `name` is a legal atom: `[a-z][a-z0-9_]*` other than `true`.
pub fn is_atom_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
        && name != "true"
}

/// A nonempty sequence of observation sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Trace {
    cells: Vec<Cell>,
}

impl Trace {
    pub fn new(cells: Vec<Cell>) -> Result<Self, TraceError> {
        if cells.is_empty() {
            return Err(TraceError::Empty);
        }
        if let Some(bad) = cells.iter().flatten().find(|a| !is_atom_name(a)) {
            return Err(TraceError::InvalidAtom(bad.clone()));
        }
        Ok(Trace { cells })
    }

    /// Builds a trace from atom lists, e.g. `&[&["c"], &["a"], &[]]`.
    pub fn from_cells(cells: &[&[&str]]) -> Result<Self, TraceError> {
        Trace::new(cells.iter().map(|c| c.iter().map(|a| a.to_string()).collect()).collect())
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> Option<&Cell> {
        self.cells.get(i)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `self` followed by the cells of `suffix`.
    pub fn extended(&self, suffix: &Trace) -> Trace {
        let mut cells = self.cells.clone();
        cells.extend(suffix.cells.iter().cloned());
        Trace { cells }
    }

    /// The first `n` cells.
    pub fn prefix(&self, n: usize) -> Result<Trace, TraceError> {
        Trace::new(self.cells[..n.min(self.cells.len())].to_vec())
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, cell) in self.cells.iter().enumerate() {
            if i > 0 {
                f.write_str(" - ")?;
            }
            if cell.is_empty() {
                f.write_str(".")?;
            } else {
                f.write_str(&cell.iter().cloned().collect::<Vec<_>>().join(","))?;
            }
        }
        f.write_str("]")
    }
}

impl FromStr for Trace {
    type Err = TraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_trace_inline(s)
    }
}

fn syntax(position: usize, message: impl Into<String>) -> TraceError {
    TraceError::Syntax { position, message: message.into() }
}

/// Parses one inline cell starting at char offset `offset` of the full input.
fn parse_cell_at(text: &str, offset: usize) -> Result<Cell, TraceError> {
    let trimmed = text.trim();
    if trimmed == "." {
        return Ok(Cell::new());
    }
    if trimmed.is_empty() {
        return Err(syntax(offset, "empty cell (write `.` for a cell without observations)"));
    }
    let mut cell = Cell::new();
    let mut pos = offset;
    for part in text.split(',') {
        let lead = part.chars().take_while(|c| c.is_whitespace()).count();
        let atom = part.trim();
        if !is_atom_name(atom) {
            let message =
                if atom.is_empty() { "missing atom".to_string() } else { format!("invalid atom `{atom}`") };
            return Err(syntax(pos + lead, message));
        }
        cell.insert(atom.to_string());
        pos += part.chars().count() + 1;
    }
    Ok(cell)
}

/// Parses a single cell in inline syntax, e.g. `b,d` or `.`.
pub fn parse_cell(text: &str) -> Result<Cell, TraceError> {
    parse_cell_at(text, 0)
}

/// Parses the inline notation `[c - a - b,d - b]`.
pub fn parse_trace_inline(text: &str) -> Result<Trace, TraceError> {
    let chars: Vec<char> = text.chars().collect();
    let mut start = chars.iter().take_while(|c| c.is_whitespace()).count();
    let mut end = chars.len() - chars.iter().rev().take_while(|c| c.is_whitespace()).count();
    if start >= end {
        return Err(TraceError::Empty);
    }
    if chars[start] == '[' {
        if chars[end - 1] != ']' {
            return Err(syntax(end, "missing `]`"));
        }
        start += 1;
        end -= 1;
    } else if chars[end - 1] == ']' {
        return Err(syntax(end - 1, "unmatched `]`"));
    }
    let body: String = chars[start..end].iter().collect();
    if body.trim().is_empty() {
        return Err(TraceError::Empty);
    }
    let mut cells = Vec::new();
    let mut offset = start;
    for part in body.split('-') {
        cells.push(parse_cell_at(part, offset)?);
        offset += part.chars().count() + 1;
    }
    Trace::new(cells)
}

fn file_cell(line: &str, number: usize) -> Result<Cell, TraceError> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed == "." {
        return Ok(Cell::new());
    }
    let mut cell = Cell::new();
    for atom in trimmed.split(|c: char| c == ',' || c.is_whitespace()).filter(|a| !a.is_empty()) {
        if !is_atom_name(atom) {
            return Err(TraceError::Line { line: number, message: format!("invalid atom `{atom}`") });
        }
        cell.insert(atom.to_string());
    }
    Ok(cell)
}

/// Parses one or more traces in file syntax, separated by `---` lines.
pub fn parse_trace_files(text: &str) -> Result<Vec<Trace>, TraceError> {
    let mut traces = Vec::new();
    let mut cells = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let number = i + 1;
        if line.trim_start().starts_with('#') {
            continue;
        }
        if line.trim() == "---" {
            if cells.is_empty() {
                return Err(TraceError::Line { line: number, message: "trace without cells".into() });
            }
            traces.push(Trace::new(std::mem::take(&mut cells))?);
            continue;
        }
        cells.push(file_cell(line, number)?);
    }
    if !cells.is_empty() {
        traces.push(Trace::new(cells)?);
    } else if traces.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(traces)
}

/// Parses exactly one trace in file syntax.
pub fn parse_trace_file(text: &str) -> Result<Trace, TraceError> {
    let mut traces = parse_trace_files(text)?;
    if traces.len() != 1 {
        return Err(TraceError::Line {
            line: 1,
            message: format!("expected one trace, found {}", traces.len()),
        });
    }
    Ok(traces.remove(0))
}

pub fn read_trace_file(path: impl AsRef<Path>) -> Result<Trace, TraceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| TraceError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_trace_file(&text)
}

/// File syntax: one line per cell, atoms joined by `,`, empty cells blank.
pub fn format_trace_file(trace: &Trace) -> String {
    let mut out = String::new();
    for cell in trace.cells() {
        out.push_str(&cell.iter().cloned().collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// Several traces in file syntax, separated by `---` lines.
pub fn format_trace_files(traces: &[Trace]) -> String {
    traces.iter().map(format_trace_file).collect::<Vec<_>>().join("---\n")
}

/// Parameters of the random trace generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub atoms: Vec<String>,
    pub length: usize,
    /// Probability that an atom is present in a cell, independently.
    pub density: f64,
    pub seed: u64,
    pub count: usize,
}

impl GenParams {
    pub fn validate(&self) -> Result<(), TraceError> {
        if let Some(bad) = self.atoms.iter().find(|a| !is_atom_name(a)) {
            return Err(TraceError::InvalidAtom(bad.clone()));
        }
        let distinct: BTreeSet<&String> = self.atoms.iter().collect();
        if distinct.len() != self.atoms.len() {
            return Err(TraceError::InvalidParams("duplicate atom".into()));
        }
        if self.length == 0 {
            return Err(TraceError::InvalidParams("length must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(TraceError::InvalidParams(format!("density {} is outside [0, 1]", self.density)));
        }
        Ok(())
    }
}

/// One random trace drawn from `rng`.
pub fn random_trace(rng: &mut impl Rng, atoms: &[String], length: usize, density: f64) -> Trace {
    let cells =
        (0..length).map(|_| atoms.iter().filter(|_| rng.gen_bool(density)).cloned().collect()).collect();
    Trace { cells }
}

/// `count` traces of exactly `length` cells, deterministic in `seed`.
pub fn gen_traces(params: &GenParams) -> Result<Vec<Trace>, TraceError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    Ok((0..params.count)
        .map(|_| random_trace(&mut rng, &params.atoms, params.length, params.density))
        .collect())
}
