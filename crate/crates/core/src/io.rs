//! Text formats: constraint records (JSON), frame files and weighted-graph files.
//!
//! Frame file:
//!
//! ```text
//! # comment
//! vars: 3
//! constraints: lib.json
//! def u {"arity":1,"values":[[1,1,0,1],[2,1,0,1]]}
//! use OR on x1 x2
//! use u on x3
//! ```
//!
//! Graph file: `nodes: n`, then `weight i a b` and `edge i j` lines (1-based nodes).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_traits::One;

use crate::complex::ComplexRat;
use crate::constraint::{Constraint, MAX_ARITY};
use crate::error::{Error, Result};
use crate::frame::{Application, ConstraintFrame, WeightedGraph};

fn json_error(e: serde_json::Error, line_offset: usize, col_offset: usize) -> Error {
    let col = if e.line() <= 1 { col_offset + e.column() } else { e.column() };
    Error::parse(line_offset + e.line().max(1) - 1, col, e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_constraint(text: &str) -> Result<Constraint> {
    serde_json::from_str(text).map_err(|e| json_error(e, 1, 0))
}

pub fn read_constraint(path: &Path) -> Result<Constraint> {
    parse_constraint(&read(path)?)
}

pub fn write_constraint(c: &Constraint) -> String {
    serde_json::to_string(c).expect("constraint records always serialize")
}

/// A JSON object mapping names to constraint records.
pub fn parse_library(text: &str) -> Result<BTreeMap<String, Constraint>> {
    serde_json::from_str(text).map_err(|e| json_error(e, 1, 0))
}

/// Constraints available in frames without a definition.
pub fn builtin(name: &str) -> Option<Constraint> {
    match name {
        "OR" => Some(Constraint::or()),
        "NAND" => Some(Constraint::nand()),
        "XOR" => Some(Constraint::xor()),
        "EQ" => Some(Constraint::eq(2)),
        "Implies" => Some(Constraint::implies()),
        "Delta0" => Some(Constraint::delta0()),
        "Delta1" => Some(Constraint::delta1()),
        _ => {
            let k: usize = name.strip_prefix("EQ_")?.parse().ok()?;
            (1..=MAX_ARITY).contains(&k).then(|| Constraint::eq(k))
        }
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || "_-.'".contains(c))
}

/// Column (1-based) of the `k`-th whitespace-separated token of `line`.
fn token_column(line: &str, k: usize) -> usize {
    let mut seen = 0;
    let mut prev_ws = true;
    for (i, ch) in line.char_indices() {
        let ws = ch.is_whitespace();
        if prev_ws && !ws {
            if seen == k {
                return i + 1;
            }
            seen += 1;
        }
        prev_ws = ws;
    }
    line.len() + 1
}

/// Parse a frame; `constraints:` lines are resolved by `load`.
pub fn parse_frame_with(text: &str, load: &mut dyn FnMut(&str) -> Result<String>) -> Result<ConstraintFrame> {
    let mut num_vars: Option<usize> = None;
    let mut library: BTreeMap<String, Constraint> = BTreeMap::new();
    let mut apps = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = line.len() - line.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix("vars:") {
            if num_vars.is_some() {
                return Err(Error::parse(ln, lead + 1, "duplicate `vars:` header"));
            }
            let n = rest.trim().parse().map_err(|_| Error::parse(ln, token_column(line, 1), "expected a variable count"))?;
            num_vars = Some(n);
        } else if let Some(rest) = trimmed.strip_prefix("constraints:") {
            let text = load(rest.trim()).map_err(|e| match e {
                Error::Parse { line, column, message } => {
                    Error::parse(ln, token_column(raw, 1), format!("in `{}` at {line}:{column}: {message}", rest.trim()))
                }
                other => other,
            })?;
            for (name, c) in parse_library(&text)? {
                if library.get(&name).is_some_and(|old| *old != c) {
                    return Err(Error::parse(ln, lead + 1, format!("`{name}` redefined")));
                }
                library.insert(name, c);
            }
        } else if let Some(rest) = trimmed.strip_prefix("def ") {
            let rest = rest.trim_start();
            let Some(split) = rest.find(char::is_whitespace) else {
                return Err(Error::parse(ln, token_column(line, 1), "expected `def NAME RECORD`"));
            };
            let name = &rest[..split];
            if !valid_name(name) {
                return Err(Error::parse(ln, token_column(line, 1), format!("bad constraint name `{name}`")));
            }
            let record = rest[split..].trim_start();
            let col = record.as_ptr() as usize - raw.as_ptr() as usize;
            let c: Constraint = serde_json::from_str(record).map_err(|e| json_error(e, ln, col))?;
            if library.get(name).is_some_and(|old| *old != c) {
                return Err(Error::parse(ln, token_column(line, 1), format!("`{name}` redefined")));
            }
            library.insert(name.to_string(), c);
        } else if trimmed.starts_with("use ") {
            let toks: Vec<&str> = trimmed.split_whitespace().collect();
            if toks.len() < 3 || toks[2] != "on" {
                return Err(Error::parse(ln, lead + 1, "expected `use NAME on x1 ...`"));
            }
            let n = num_vars.ok_or_else(|| Error::parse(ln, lead + 1, "`use` before the `vars:` header"))?;
            let name = toks[1];
            if !library.contains_key(name) {
                let c = builtin(name)
                    .ok_or_else(|| Error::parse(ln, token_column(line, 1), format!("unknown constraint `{name}`")))?;
                library.insert(name.to_string(), c);
            }
            let mut scope = Vec::new();
            for (k, t) in toks.iter().enumerate().skip(3) {
                let v: usize = t
                    .strip_prefix('x')
                    .and_then(|d| d.parse().ok())
                    .filter(|&v| (1..=n).contains(&v))
                    .ok_or_else(|| Error::parse(ln, token_column(line, k), format!("expected a variable in x1..x{n}, found `{t}`")))?;
                scope.push(v - 1);
            }
            let arity = library[name].arity();
            if arity != scope.len() {
                return Err(Error::parse(
                    ln,
                    token_column(line, 1),
                    format!("`{name}` has arity {arity} but is applied to {} variable(s)", scope.len()),
                ));
            }
            apps.push(Application { name: name.to_string(), scope });
        } else {
            return Err(Error::parse(ln, lead + 1, format!("unrecognized line `{trimmed}`")));
        }
    }
    let n = num_vars.ok_or_else(|| Error::parse(1, 1, "missing `vars:` header"))?;
    let mut frame = ConstraintFrame::from_parts(n, library, apps)?;
    frame.prune_library();
    Ok(frame)
}

/// Parse a frame that has no `constraints:` lines.
pub fn parse_frame(text: &str) -> Result<ConstraintFrame> {
    parse_frame_with(text, &mut |name| Err(Error::Argument(format!("no loader for constraint file `{name}`"))))
}

/// Read a frame file; companion constraint files are relative to its directory.
pub fn read_frame(path: &Path) -> Result<ConstraintFrame> {
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_frame_with(&read(path)?, &mut |name| read(&dir.join(name)))
}

/// Self-contained form: every library entry is written inline.
pub fn write_frame(frame: &ConstraintFrame) -> String {
    let mut out = format!("vars: {}\n", frame.num_vars());
    for name in frame.used_names() {
        let c = &frame.library()[&name];
        if builtin(&name).as_ref() != Some(c) {
            out.push_str(&format!("def {name} {}\n", write_constraint(c)));
        }
    }
    for a in frame.applications() {
        out.push_str(&format!("use {} on", a.name));
        for v in &a.scope {
            out.push_str(&format!(" x{}", v + 1));
        }
        out.push('\n');
    }
    out
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let mut n: Option<usize> = None;
    let mut weights: Vec<[ComplexRat; 2]> = Vec::new();
    let mut edges = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let node = |k: usize, n: usize| -> Result<usize> {
            toks.get(k)
                .and_then(|t| t.parse::<usize>().ok())
                .filter(|&v| (1..=n).contains(&v))
                .map(|v| v - 1)
                .ok_or_else(|| Error::parse(ln, token_column(line, k), format!("expected a node in 1..{n}")))
        };
        let value = |k: usize| -> Result<ComplexRat> {
            let t = toks.get(k).ok_or_else(|| Error::parse(ln, token_column(line, k), "missing weight value"))?;
            t.parse().map_err(|e: String| Error::parse(ln, token_column(line, k), e))
        };
        match toks[0] {
            "nodes:" => {
                let m = toks
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(ln, token_column(line, 1), "expected a node count"))?;
                if n.is_some() {
                    return Err(Error::parse(ln, 1, "duplicate `nodes:` header"));
                }
                n = Some(m);
                weights = vec![[ComplexRat::one(), ComplexRat::one()]; m];
            }
            "weight" | "edge" => {
                let m = n.ok_or_else(|| Error::parse(ln, 1, "missing `nodes:` header"))?;
                let expected = if toks[0] == "weight" { 4 } else { 3 };
                if toks.len() != expected {
                    return Err(Error::parse(ln, 1, format!("`{}` takes {} argument(s)", toks[0], expected - 1)));
                }
                let i = node(1, m)?;
                if toks[0] == "weight" {
                    weights[i] = [value(2)?, value(3)?];
                } else {
                    edges.push((i, node(2, m)?));
                }
            }
            other => return Err(Error::parse(ln, token_column(line, 0), format!("unrecognized keyword `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| Error::parse(1, 1, "missing `nodes:` header"))?;
    WeightedGraph::new(n, edges, weights)
}

pub fn read_graph(path: &Path) -> Result<WeightedGraph> {
    parse_graph(&read(path)?)
}

pub fn write_graph(g: &WeightedGraph) -> String {
    let mut out = format!("nodes: {}\n", g.num_nodes());
    for (i, w) in g.weights().iter().enumerate() {
        if !(w[0].is_one() && w[1].is_one()) {
            out.push_str(&format!("weight {} {} {}\n", i + 1, w[0], w[1]));
        }
    }
    for (a, b) in g.edges() {
        out.push_str(&format!("edge {} {}\n", a + 1, b + 1));
    }
    out
}
