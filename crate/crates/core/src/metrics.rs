//! Test-set error, discrepancy grids and training-curve extraction.

use std::io::Write;

use crate::error::{arg, Error, Result};
use crate::losses::{JetModel, CHUNK};
use crate::network::JetPlan;
use crate::pde::{LabeledSet, PdeProblem, ProblemKind};
use crate::train::TrainRecord;

/// `√(Σ‖û − u‖² / Σ‖u‖²)` over the test set.
pub fn nrmse(model: &mut dyn JetModel, test: &LabeledSet) -> Result<f64> {
    if test.is_empty() {
        return arg("empty test set");
    }
    if test.output_dim != model.output_dim() {
        return arg(format!("test set has {} components, model {}", test.output_dim, model.output_dim()));
    }
    let plan = JetPlan::value_only();
    let (mut num, mut den) = (0.0, 0.0);
    let d = test.input_dim;
    for start in (0..test.len()).step_by(CHUNK) {
        let end = (start + CHUNK).min(test.len());
        let out = model.eval(&test.x[start * d..end * d], &plan);
        for p in start..end {
            for (k, &u) in test.value(p).iter().enumerate() {
                let e = out.get(k, 0, p - start) - u;
                num += e * e;
                den += u * u;
            }
        }
    }
    if den == 0.0 {
        return Err(Error::UndefinedMetric("exact solution is zero on every test point".into()));
    }
    Ok((num / den).sqrt())
}

/// Which plane of the domain a grid covers.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSpec {
    /// Coordinates along the grid's columns and rows.
    pub free: (usize, usize),
    /// A value for every coordinate; entries at the free axes are ignored.
    pub fixed: Vec<f64>,
}

impl SliceSpec {
    /// `(x, y)` at `t = 0.5` for heat, `(x₁, x₂)` with the rest at `0.5` in
    /// ten dimensions, the whole domain otherwise.
    pub fn default_for(problem: &PdeProblem) -> Self {
        let d = problem.input_dim();
        match problem.kind {
            ProblemKind::Heat | ProblemKind::HdPoisson => Self { free: (0, 1), fixed: vec![0.5; d] },
            _ => Self { free: (0, 1), fixed: vec![0.0; d] },
        }
    }
}

/// `|û − u|` on a tensor grid; `values[row · xs.len() + col]` with columns
/// along `xs` and rows along `ys`. Multi-component solutions use the
/// Euclidean norm of the difference.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorGrid {
    pub x_axis: String,
    pub y_axis: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Names and values of the coordinates held fixed.
    pub fixed: Vec<(String, f64)>,
    pub values: Vec<f64>,
}

impl ErrorGrid {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Matrix CSV: `#` lines naming the axes and slice, a header row of
    /// column coordinates, then one row per `ys` entry.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# columns: {}", self.x_axis)?;
        writeln!(w, "# rows: {}", self.y_axis)?;
        for (name, v) in &self.fixed {
            writeln!(w, "# slice: {name}={v}")?;
        }
        let head: Vec<String> = self.xs.iter().map(|x| format!("{x:e}")).collect();
        writeln!(w, "{}\\{},{}", self.y_axis, self.x_axis, head.join(","))?;
        for (r, y) in self.ys.iter().enumerate() {
            let row: Vec<String> =
                self.values[r * self.xs.len()..(r + 1) * self.xs.len()].iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{y:e},{}", row.join(","))?;
        }
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn grid_values(model: &mut dyn JetModel, points: &[f64], exact: &[f64], dim: usize, dout: usize) -> Vec<f64> {
    let plan = JetPlan::value_only();
    let n = points.len() / dim;
    let mut values = Vec::with_capacity(n);
    for start in (0..n).step_by(CHUNK) {
        let end = (start + CHUNK).min(n);
        let out = model.eval(&points[start * dim..end * dim], &plan);
        for p in start..end {
            let sq: f64 = (0..dout).map(|k| (out.get(k, 0, p - start) - exact[p * dout + k]).powi(2)).sum();
            values.push(sq.sqrt());
        }
    }
    values
}

/// Discrepancy against the closed-form solution on an `r × r` grid with
/// inclusive endpoints.
pub fn error_grid(model: &mut dyn JetModel, problem: &PdeProblem, resolution: usize, slice: &SliceSpec) -> Result<ErrorGrid> {
    let d = problem.input_dim();
    if resolution == 0 {
        return arg("grid resolution must be positive");
    }
    let (a, b) = slice.free;
    if slice.fixed.len() != d || a >= d || b >= d || a == b {
        return arg(format!("slice does not describe a plane of the {d}-dimensional domain"));
    }
    let mut fixed = Vec::new();
    for (j, (&v, &(lo, hi))) in slice.fixed.iter().zip(&problem.domain).enumerate() {
        if j != a && j != b {
            if !(lo..=hi).contains(&v) {
                return arg(format!("slice value {}={v} lies outside [{lo}, {hi}]", problem.coords[j]));
            }
            fixed.push((problem.coords[j].to_string(), v));
        }
    }
    let xs = linspace(problem.domain[a].0, problem.domain[a].1, resolution);
    let ys = linspace(problem.domain[b].0, problem.domain[b].1, resolution);
    let mut points = Vec::with_capacity(resolution * resolution * d);
    let mut exact = Vec::new();
    for &y in &ys {
        for &x in &xs {
            let mut p = slice.fixed.clone();
            p[a] = x;
            p[b] = y;
            let u = problem
                .analytic(&p)
                .ok_or_else(|| Error::Unsupported(format!("{} has no closed-form solution", problem.name())))?;
            exact.extend(u);
            points.extend(p);
        }
    }
    let values = grid_values(model, &points, &exact, d, problem.output_dim());
    Ok(ErrorGrid {
        x_axis: problem.coords[a].to_string(),
        y_axis: problem.coords[b].to_string(),
        xs,
        ys,
        fixed,
        values,
    })
}

/// Discrepancy on the native tensor grid of a two-coordinate reference set:
/// columns along the second coordinate, rows along the first.
pub fn reference_error_grid(model: &mut dyn JetModel, problem: &PdeProblem, reference: &LabeledSet) -> Result<ErrorGrid> {
    if reference.input_dim != 2 || problem.input_dim() != 2 {
        return arg("reference grids need two coordinates");
    }
    let uniq = |j: usize| {
        let mut v: Vec<f64> = (0..reference.len()).map(|i| reference.point(i)[j]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (ys, xs) = (uniq(0), uniq(1));
    if ys.len() * xs.len() != reference.len() {
        return arg("reference set is not a full tensor grid");
    }
    let mut order: Vec<usize> = (0..reference.len()).collect();
    order.sort_by(|&i, &j| {
        let (p, q) = (reference.point(i), reference.point(j));
        p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1]))
    });
    let sorted = reference.select(&order);
    let values = grid_values(model, &sorted.x, &sorted.u, 2, sorted.output_dim);
    Ok(ErrorGrid {
        x_axis: problem.coords[1].to_string(),
        y_axis: problem.coords[0].to_string(),
        xs,
        ys,
        fixed: Vec::new(),
        values,
    })
}

/// Epoch-indexed columns of a record: the `epoch` column first, then one per
/// requested name.
pub fn curves(record: &TrainRecord, names: &[&str]) -> Result<Vec<(String, Vec<f64>)>> {
    if record.rows.is_empty() {
        return arg("training record has no epochs");
    }
    let mut out = vec![("epoch".to_string(), record.rows.iter().map(|r| r[0]).collect())];
    for &name in names {
        let Some(c) = record.columns.iter().position(|c| c == name) else {
            return arg(format!("record has no quantity '{name}'; available: {}", record.columns[1..].join(", ")));
        };
        out.push((name.to_string(), record.rows.iter().map(|r| r[c]).collect()));
    }
    Ok(out)
}
