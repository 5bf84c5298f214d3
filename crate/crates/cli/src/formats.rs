//! Text formats: word2vec-style `.vec` spaces, CSV spaces, anchor id lists,
//! and frequency tables.
//!
//! All writers go through [`write_atomic`]: content lands under the final
//! path only after a successful rename, so a failed run never leaves a
//! partial artifact. Floats are formatted with Rust's shortest round-trip
//! notation, which makes outputs byte-deterministic.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use relspace::space::VectorSet;
use relspace::{EmbeddingSpace, RelativeSpace};

/// Writes `content` to `path` via a temporary file in the same directory and
/// an atomic rename.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .with_context(|| format!("creating temporary file next to {}", path.display()))?;
    tmp.write_all(content.as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Parses the word2vec text layout: a `N d` header line, then `N` lines of
/// `token v1 ... vd`. Errors carry 1-based line numbers.
pub fn parse_vec(content: &str, name: &str) -> Result<EmbeddingSpace> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| anyhow!("line 1: empty file, expected `N d` header"))?;
    let mut parts = header.split_whitespace();
    let n: usize = parts
        .next()
        .ok_or_else(|| anyhow!("line 1: missing sample count"))?
        .parse()
        .with_context(|| "line 1: sample count is not an integer".to_string())?;
    let d: usize = parts
        .next()
        .ok_or_else(|| anyhow!("line 1: missing dimension"))?
        .parse()
        .with_context(|| "line 1: dimension is not an integer".to_string())?;
    if parts.next().is_some() {
        bail!("line 1: header has more than two fields");
    }

    let mut ids = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    let mut seen: HashMap<String, usize> = HashMap::with_capacity(n);
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        if rows.len() == n {
            bail!("line {line_no}: found more than the {n} rows announced in the header");
        }
        let mut fields = line.split_whitespace();
        let token = fields
            .next()
            .ok_or_else(|| anyhow!("line {line_no}: missing token"))?;
        if let Some(previous) = seen.insert(token.to_string(), line_no) {
            bail!("line {line_no}: duplicate token `{token}` (also at line {previous})");
        }
        let mut row = Vec::with_capacity(d);
        for (col, field) in fields.enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                anyhow!("line {line_no}: field {} is not a number: `{field}`", col + 2)
            })?;
            row.push(value);
        }
        if row.len() != d {
            bail!(
                "line {line_no}: row has {} values, header says {d}",
                row.len()
            );
        }
        ids.push(token.to_string());
        rows.push(row);
    }
    if rows.len() != n {
        bail!(
            "line {}: unexpected end of file, header says {n} rows but found {}",
            rows.len() + 2,
            rows.len()
        );
    }
    EmbeddingSpace::from_rows(name, ids, rows).map_err(|e| anyhow!("{e}"))
}

pub fn write_vec(ids: &[String], rows: impl Iterator<Item = Vec<f64>>, dim: usize) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", ids.len(), dim);
    for (id, row) in ids.iter().zip(rows) {
        if id.chars().any(char::is_whitespace) {
            bail!("id `{id}` contains whitespace and cannot be written to .vec");
        }
        out.push_str(id);
        for v in row {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn space_to_vec(space: &EmbeddingSpace) -> Result<String> {
    write_vec(
        space.ids(),
        space.rows().map(|r| r.to_vec()),
        space.dim(),
    )
}

pub fn relative_to_vec(space: &RelativeSpace) -> Result<String> {
    write_vec(
        space.ids(),
        space.rows().map(|r| r.to_vec()),
        space.dim(),
    )
}

/// CSV with an `id,<col>,<col>,...` header row.
pub fn parse_csv_space(content: &str, name: &str) -> Result<EmbeddingSpace> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| anyhow!("line 1: empty file, expected a header"))?;
    if !header.starts_with("id,") {
        bail!("line 1: header must start with `id,`");
    }
    let d = header.split(',').count() - 1;
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let token = fields
            .next()
            .ok_or_else(|| anyhow!("line {line_no}: missing id"))?;
        let mut row = Vec::with_capacity(d);
        for (col, field) in fields.enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                anyhow!("line {line_no}: column {} is not a number: `{field}`", col + 2)
            })?;
            row.push(value);
        }
        if row.len() != d {
            bail!("line {line_no}: row has {} values, header has {d} columns", row.len());
        }
        ids.push(token.to_string());
        rows.push(row);
    }
    EmbeddingSpace::from_rows(name, ids, rows).map_err(|e| anyhow!("{e}"))
}

/// Relative space as CSV; the header names the anchors, in column order.
pub fn relative_to_csv(space: &RelativeSpace) -> String {
    let mut out = String::from("id");
    for a in space.anchor_ids() {
        out.push(',');
        out.push_str(a);
    }
    out.push('\n');
    for (id, row) in space.ids().iter().zip(space.rows()) {
        out.push_str(id);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn space_to_csv(space: &EmbeddingSpace) -> String {
    let mut out = String::from("id");
    for i in 0..space.dim() {
        let _ = write!(out, ",v{i}");
    }
    out.push('\n');
    for (id, row) in space.ids().iter().zip(space.rows()) {
        out.push_str(id);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// One anchor id per line.
pub fn parse_anchor_ids(content: &str) -> Vec<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn anchor_ids_to_string(ids: &[String]) -> String {
    let mut out = String::new();
    for id in ids {
        out.push_str(id);
        out.push('\n');
    }
    out
}

/// Two-column `id,count` CSV; a leading `id,count` header line is allowed.
pub fn parse_frequency_csv(content: &str) -> Result<HashMap<String, u64>> {
    let mut freqs = HashMap::new();
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let (id, count) = line
            .split_once(',')
            .ok_or_else(|| anyhow!("line {line_no}: expected `id,count`"))?;
        let count: u64 = match count.trim().parse() {
            Ok(c) => c,
            Err(_) if line_no == 1 && count.trim() == "count" => continue,
            Err(_) => bail!("line {line_no}: count is not an integer: `{count}`"),
        };
        if freqs.insert(id.to_string(), count).is_some() {
            bail!("line {line_no}: duplicate id `{id}`");
        }
    }
    if freqs.is_empty() {
        bail!("frequency table is empty");
    }
    Ok(freqs)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Loads a space from `.vec` (default) or CSV, picking by flag.
pub fn load_space(path: &Path, format: SpaceFormat, name: &str) -> Result<EmbeddingSpace> {
    let content = read_to_string(path)?;
    match format {
        SpaceFormat::Vec => parse_vec(&content, name)
            .with_context(|| format!("parsing {} as .vec", path.display())),
        SpaceFormat::Csv => parse_csv_space(&content, name)
            .with_context(|| format!("parsing {} as CSV", path.display())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SpaceFormat {
    Vec,
    Csv,
}
