//! Plain-text reference datasets: one sample per line, whitespace separated,
//! coordinates first and solution components after; `#` starts a comment.

use std::io::Write;
use std::path::Path;

use crate::error::{arg, Error, Result};

/// Points with known solution values, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSet {
    pub input_dim: usize,
    pub output_dim: usize,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl LabeledSet {
    pub fn new(input_dim: usize, output_dim: usize) -> Self {
        Self { input_dim, output_dim, x: Vec::new(), u: Vec::new() }
    }

    pub fn len(&self) -> usize {
        if self.input_dim == 0 {
            0
        } else {
            self.x.len() / self.input_dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.x[i * self.input_dim..(i + 1) * self.input_dim]
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.u[i * self.output_dim..(i + 1) * self.output_dim]
    }

    pub fn push(&mut self, x: &[f64], u: &[f64]) {
        debug_assert_eq!(x.len(), self.input_dim);
        debug_assert_eq!(u.len(), self.output_dim);
        self.x.extend_from_slice(x);
        self.u.extend_from_slice(u);
    }

    /// Subset by row indices, in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        let mut out = Self::new(self.input_dim, self.output_dim);
        for &r in rows {
            out.push(self.point(r), self.value(r));
        }
        out
    }
}

pub fn parse_reference(text: &str, input_dim: usize, output_dim: usize) -> Result<LabeledSet> {
    let cols = input_dim + output_dim;
    let mut set = LabeledSet::new(input_dim, output_dim);
    let mut row = Vec::with_capacity(cols);
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        row.clear();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Parse { line: n + 1, msg: format!("'{tok}' is not a number") })?;
            row.push(v);
        }
        if row.len() != cols {
            return Err(Error::Parse { line: n + 1, msg: format!("expected {cols} columns, found {}", row.len()) });
        }
        set.push(&row[..input_dim], &row[input_dim..]);
    }
    Ok(set)
}

pub fn load_reference_dataset(path: &Path, input_dim: usize, output_dim: usize) -> Result<LabeledSet> {
    let text = std::fs::read_to_string(path)?;
    let set = parse_reference(&text, input_dim, output_dim)?;
    if set.is_empty() {
        return arg(format!("reference dataset {} has no samples", path.display()));
    }
    Ok(set)
}

pub fn write_reference<W: Write>(mut w: W, set: &LabeledSet, header: &str) -> Result<()> {
    for line in header.lines() {
        writeln!(w, "# {line}")?;
    }
    for i in 0..set.len() {
        let cols: Vec<String> = set.point(i).iter().chain(set.value(i)).map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", cols.join(" "))?;
    }
    Ok(())
}
