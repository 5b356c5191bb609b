//! Seeded collocation, boundary, labeled and test point generation.

use rand::seq::{index, SliceRandom};
use rand::Rng as _;

use crate::error::{arg, Error, Result};
use crate::pde::{LabeledSet, PdeProblem, Region};
use crate::rng::{stream_rng, streams, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionTag {
    Interior,
    Boundary(usize),
    Labeled,
    Test,
}

/// Points stored row-major, `dim` coordinates each.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub dim: usize,
    pub points: Vec<f64>,
    pub tag: RegionTag,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        let mut points = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            points.extend_from_slice(self.point(r));
        }
        Self { dim: self.dim, points, tag: self.tag }
    }
}

/// `n` points in `domain`; along every axis each of the `n` equal strata
/// holds exactly one point.
pub fn lhs_from(rng: &mut Rng, n: usize, domain: &[(f64, f64)]) -> Vec<f64> {
    let d = domain.len();
    let mut out = vec![0.0; n * d];
    let mut perm: Vec<usize> = (0..n).collect();
    for (j, &(lo, hi)) in domain.iter().enumerate() {
        perm.shuffle(rng);
        let width = (hi - lo) / n as f64;
        for (i, &s) in perm.iter().enumerate() {
            let u: f64 = rng.random();
            out[i * d + j] = (lo + width * (s as f64 + u)).min(hi);
        }
    }
    out
}

pub fn latin_hypercube(n: usize, domain: &[(f64, f64)], seed: u64) -> Result<PointSet> {
    if n == 0 {
        return arg("latin hypercube needs at least one point");
    }
    let mut rng = stream_rng(seed, streams::INTERIOR);
    Ok(PointSet { dim: domain.len(), points: lhs_from(&mut rng, n, domain), tag: RegionTag::Interior })
}

pub fn sample_interior(problem: &PdeProblem, n: usize, seed: u64) -> Result<PointSet> {
    latin_hypercube(n, &problem.domain, seed)
}

pub fn sample_interior_from(rng: &mut Rng, problem: &PdeProblem, n: usize) -> PointSet {
    PointSet { dim: problem.input_dim(), points: lhs_from(rng, n, &problem.domain), tag: RegionTag::Interior }
}

/// `m` points on region `i`. Multi-face regions are filled face by face in
/// order, the first faces taking the remainder (⌈m/2⌉ then ⌊m/2⌋ for two).
pub fn sample_boundary(problem: &PdeProblem, i: usize, m: usize, seed: u64) -> Result<PointSet> {
    if i >= problem.num_terms() {
        return arg(format!("{} has {} boundary terms, got index {i}", problem.name(), problem.num_terms()));
    }
    if m == 0 {
        return arg("boundary sample needs at least one point");
    }
    let mut rng = stream_rng(seed, streams::BOUNDARY + i as u64);
    Ok(sample_boundary_from(&mut rng, problem, i, m))
}

pub fn sample_boundary_from(rng: &mut Rng, problem: &PdeProblem, i: usize, m: usize) -> PointSet {
    let d = problem.input_dim();
    let mut points = lhs_from(rng, m, &problem.domain);
    match &problem.terms[i].region {
        Region::Faces { coord, values } => {
            let nf = values.len();
            let mut row = 0;
            for (f, &v) in values.iter().enumerate() {
                let count = m / nf + usize::from(f < m % nf);
                for r in row..row + count {
                    points[r * d + coord] = v;
                }
                row += count;
            }
        }
        Region::Periodic { coord, lo, .. } => {
            for r in 0..m {
                points[r * d + coord] = *lo;
            }
        }
    }
    PointSet { dim: d, points, tag: RegionTag::Boundary(i) }
}

/// Where exact solution values come from.
#[derive(Clone, Copy, Debug)]
pub enum LabelSource<'a> {
    Analytic,
    Reference(&'a LabeledSet),
}

/// `j` interior points with exact values: fresh LHS points for analytic
/// problems, rows drawn without replacement from a reference set otherwise.
pub fn draw_labeled(problem: &PdeProblem, source: LabelSource<'_>, j: usize, seed: u64) -> Result<LabeledSet> {
    if j == 0 {
        return arg("labeled set needs at least one point");
    }
    let mut rng = stream_rng(seed, streams::LABELED);
    match source {
        LabelSource::Analytic => {
            let pts = lhs_from(&mut rng, j, &problem.domain);
            attach_analytic(problem, &pts)
        }
        LabelSource::Reference(set) => {
            if j > set.len() {
                return arg(format!("requested {j} labeled points from a reference set of {} rows", set.len()));
            }
            let rows = index::sample(&mut rng, set.len(), j).into_vec();
            Ok(set.select(&rows))
        }
    }
}

/// Analytic test set of `n` LHS points.
pub fn analytic_test_set(problem: &PdeProblem, n: usize, seed: u64) -> Result<LabeledSet> {
    if n == 0 {
        return arg("test set needs at least one point");
    }
    let mut rng = stream_rng(seed, streams::TEST_SET);
    let pts = lhs_from(&mut rng, n, &problem.domain);
    attach_analytic(problem, &pts)
}

fn attach_analytic(problem: &PdeProblem, pts: &[f64]) -> Result<LabeledSet> {
    let mut set = LabeledSet::new(problem.input_dim(), problem.output_dim());
    for x in pts.chunks_exact(problem.input_dim()) {
        let u = problem
            .analytic(x)
            .ok_or_else(|| Error::Unsupported(format!("{} has no closed-form solution", problem.name())))?;
        set.push(x, &u);
    }
    Ok(set)
}
