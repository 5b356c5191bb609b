//! The six benchmark problems: equation residuals, boundary operators,
//! domains, analytic solutions and reference data.

mod bundle;
mod oracle;
mod reference;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use bundle::DerivBundle;
pub use oracle::{burgers_cole_hopf, schrodinger_split_step};
pub use reference::{load_reference_dataset, parse_reference, write_reference, LabeledSet};

use crate::autodiff::{Dual2, Scalar};
use crate::error::{arg, Error, Result};
use crate::network::JetPlan;

/// Burgers viscosity `0.01/π`.
pub const BURGERS_NU: f64 = 0.01 / PI;

/// Tolerance for a point to count as lying on a boundary region.
pub const REGION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Burgers,
    Poisson,
    Helmholtz,
    Schrodinger,
    HdPoisson,
    Heat,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 6] = [
        ProblemKind::Burgers,
        ProblemKind::Poisson,
        ProblemKind::Helmholtz,
        ProblemKind::Schrodinger,
        ProblemKind::HdPoisson,
        ProblemKind::Heat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Burgers => "burgers",
            ProblemKind::Poisson => "poisson",
            ProblemKind::Helmholtz => "helmholtz",
            ProblemKind::Schrodinger => "schrodinger",
            ProblemKind::HdPoisson => "hd_poisson",
            ProblemKind::Heat => "heat",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name).ok_or_else(|| {
            let valid: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            Error::Argument(format!("unknown problem '{name}', expected one of: {}", valid.join(", ")))
        })
    }

    pub fn has_analytic(self) -> bool {
        !matches!(self, ProblemKind::Burgers | ProblemKind::Schrodinger)
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a boundary term's points live.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// Coordinate `coord` pinned to one of `values`; the other coordinates
    /// range over the domain.
    Faces { coord: usize, values: Vec<f64> },
    /// Paired points with `coord` at `lo` and at `hi`. Sample sets store the
    /// `lo` member of each pair.
    Periodic { coord: usize, lo: f64, hi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryOp {
    /// `u − g`.
    Dirichlet,
    /// `u(lo) − u(hi)`.
    PeriodicValue,
    /// `∂u/∂x(lo) − ∂u/∂x(hi)` along the periodic coordinate.
    PeriodicDerivative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTerm {
    pub name: &'static str,
    pub region: Region,
    pub op: BoundaryOp,
}

/// A benchmark problem on an axis-aligned box.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeProblem {
    pub kind: ProblemKind,
    /// `(lo, hi)` per input coordinate.
    pub domain: Vec<(f64, f64)>,
    pub coords: Vec<&'static str>,
    pub terms: Vec<BoundaryTerm>,
    /// Helmholtz wavenumber; unused elsewhere.
    pub k: f64,
}

fn dirichlet(name: &'static str, coord: usize, values: Vec<f64>) -> BoundaryTerm {
    BoundaryTerm { name, region: Region::Faces { coord, values }, op: BoundaryOp::Dirichlet }
}

impl PdeProblem {
    /// Builds a problem with the default Helmholtz wavenumber `k = 1`.
    pub fn new(kind: ProblemKind) -> Self {
        Self::with_wavenumber(kind, 1.0)
    }

    pub fn with_wavenumber(kind: ProblemKind, k: f64) -> Self {
        let unit = (0.0, 1.0);
        let (domain, coords, terms) = match kind {
            ProblemKind::Burgers => (
                vec![(0.0, 1.0), (-1.0, 1.0)],
                vec!["t", "x"],
                vec![dirichlet("initial", 0, vec![0.0]), dirichlet("walls", 1, vec![-1.0, 1.0])],
            ),
            ProblemKind::Poisson | ProblemKind::Helmholtz => (
                vec![unit, unit],
                vec!["x", "y"],
                vec![dirichlet("y_faces", 1, vec![0.0, 1.0]), dirichlet("x_faces", 0, vec![0.0, 1.0])],
            ),
            ProblemKind::Schrodinger => (
                vec![(0.0, PI / 2.0), (-5.0, 5.0)],
                vec!["t", "x"],
                vec![
                    dirichlet("initial", 0, vec![0.0]),
                    BoundaryTerm {
                        name: "periodic_value",
                        region: Region::Periodic { coord: 1, lo: -5.0, hi: 5.0 },
                        op: BoundaryOp::PeriodicValue,
                    },
                    BoundaryTerm {
                        name: "periodic_slope",
                        region: Region::Periodic { coord: 1, lo: -5.0, hi: 5.0 },
                        op: BoundaryOp::PeriodicDerivative,
                    },
                ],
            ),
            ProblemKind::HdPoisson => {
                const FACES: [&str; 10] =
                    ["face1", "face2", "face3", "face4", "face5", "face6", "face7", "face8", "face9", "face10"];
                const NAMES: [&str; 10] = ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9", "x10"];
                (
                    vec![unit; 10],
                    NAMES.to_vec(),
                    (0..10).map(|i| dirichlet(FACES[i], i, vec![0.0, 1.0])).collect(),
                )
            }
            ProblemKind::Heat => (
                vec![(-1.0, 1.0), (-1.0, 1.0), (0.0, 1.0)],
                vec!["x", "y", "t"],
                vec![dirichlet("initial", 2, vec![0.0])],
            ),
        };
        Self { kind, domain, coords, terms, k }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn input_dim(&self) -> usize {
        self.domain.len()
    }

    pub fn output_dim(&self) -> usize {
        if self.kind == ProblemKind::Schrodinger {
            2
        } else {
            1
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.input_dim()
            && x.iter().zip(&self.domain).all(|(&v, &(lo, hi))| v >= lo - REGION_TOL && v <= hi + REGION_TOL)
    }

    /// Derivatives the equation residual consumes.
    pub fn equation_plan(&self) -> JetPlan {
        match self.kind {
            ProblemKind::Burgers | ProblemKind::Schrodinger => JetPlan::new(vec![(0, false), (1, true)]),
            ProblemKind::Poisson | ProblemKind::Helmholtz => JetPlan::full(2),
            ProblemKind::HdPoisson => JetPlan::full(10),
            ProblemKind::Heat => JetPlan::new(vec![(0, true), (1, true), (2, false)]),
        }
    }

    /// Derivatives boundary term `i` consumes.
    pub fn term_plan(&self, i: usize) -> JetPlan {
        match (&self.terms[i].op, &self.terms[i].region) {
            (BoundaryOp::PeriodicDerivative, Region::Periodic { coord, .. }) => JetPlan::new(vec![(*coord, false)]),
            _ => JetPlan::value_only(),
        }
    }

    /// Points at which term `i` evaluates the network for the sample `x`.
    pub fn stencil(&self, i: usize, x: &[f64]) -> Vec<Vec<f64>> {
        match &self.terms[i].region {
            Region::Faces { .. } => vec![x.to_vec()],
            Region::Periodic { coord, hi, .. } => {
                let mut partner = x.to_vec();
                partner[*coord] = *hi;
                vec![x.to_vec(), partner]
            }
        }
    }

    pub fn stencil_len(&self, i: usize) -> usize {
        match self.terms[i].region {
            Region::Faces { .. } => 1,
            Region::Periodic { .. } => 2,
        }
    }

    /// Whether `x` lies on the region of term `i`, to [`REGION_TOL`].
    pub fn on_region(&self, i: usize, x: &[f64]) -> bool {
        if !self.in_domain(x) {
            return false;
        }
        match &self.terms[i].region {
            Region::Faces { coord, values } => values.iter().any(|v| (x[*coord] - v).abs() <= REGION_TOL),
            Region::Periodic { coord, lo, .. } => (x[*coord] - lo).abs() <= REGION_TOL,
        }
    }

    /// `L[u] − F` at `x`.
    pub fn residual<S: Scalar>(&self, b: &DerivBundle<S>, x: &[f64]) -> Vec<S> {
        match self.kind {
            ProblemKind::Burgers => {
                let (u, ut, ux, uxx) = (b.u(0), b.d1(0, 0), b.d1(0, 1), b.d2(0, 1));
                vec![ut + u * ux - uxx * BURGERS_NU]
            }
            ProblemKind::Poisson => {
                let f = (PI * x[0]).sin() * (PI * x[1]).sin();
                vec![b.d2(0, 0) + b.d2(0, 1) + f]
            }
            ProblemKind::Helmholtz => vec![b.d2(0, 0) + b.d2(0, 1) + b.u(0) * (self.k * self.k)],
            ProblemKind::Schrodinger => {
                let (u, v) = (b.u(0), b.u(1));
                let m = u * u + v * v;
                vec![
                    -b.d1(1, 0) + b.d2(0, 1) * 0.5 + m * u,
                    b.d1(0, 0) + b.d2(1, 1) * 0.5 + m * v,
                ]
            }
            ProblemKind::HdPoisson => {
                let lap = (1..10).fold(b.d2(0, 0), |acc, j| acc + b.d2(0, j));
                vec![-lap]
            }
            ProblemKind::Heat => vec![b.d1(0, 2) - b.d2(0, 0) - b.d2(0, 1)],
        }
    }

    /// `B_i[u] − g_i` for sample `x`; `bundles` follow [`stencil`](Self::stencil).
    pub fn boundary_residual<S: Scalar>(&self, i: usize, bundles: &[DerivBundle<S>], x: &[f64]) -> Vec<S> {
        let term = &self.terms[i];
        let out = self.output_dim();
        match term.op {
            BoundaryOp::Dirichlet => {
                let g = self.boundary_target(i, x);
                (0..out).map(|k| bundles[0].u(k) - g[k]).collect()
            }
            BoundaryOp::PeriodicValue => (0..out).map(|k| bundles[0].u(k) - bundles[1].u(k)).collect(),
            BoundaryOp::PeriodicDerivative => {
                let Region::Periodic { coord, .. } = term.region else { unreachable!() };
                (0..out).map(|k| bundles[0].d1(k, coord) - bundles[1].d1(k, coord)).collect()
            }
        }
    }

    /// Dirichlet data `g_i(x)`. Zero for non-Dirichlet terms.
    pub fn boundary_target(&self, i: usize, x: &[f64]) -> Vec<f64> {
        if self.terms[i].op != BoundaryOp::Dirichlet {
            return vec![0.0; self.output_dim()];
        }
        match self.kind {
            ProblemKind::Burgers if i == 0 => vec![-(PI * x[1]).sin()],
            ProblemKind::Burgers | ProblemKind::Poisson => vec![0.0],
            ProblemKind::Helmholtz => vec![(self.k * x[0]).sin()],
            ProblemKind::Schrodinger => vec![2.0 / x[1].cosh(), 0.0],
            ProblemKind::HdPoisson => vec![hd_polynomial(x)],
            ProblemKind::Heat => vec![x[0] - x[1]],
        }
    }

    /// Exact solution in any scalar type, where one exists.
    pub fn analytic<S: Scalar>(&self, x: &[S]) -> Option<Vec<S>> {
        match self.kind {
            ProblemKind::Burgers | ProblemKind::Schrodinger => None,
            ProblemKind::Poisson => {
                let c = 1.0 / (2.0 * PI * PI);
                Some(vec![(x[0] * PI).sin() * (x[1] * PI).sin() * c])
            }
            ProblemKind::Helmholtz => Some(vec![(x[0] * self.k).sin()]),
            ProblemKind::HdPoisson => Some(vec![hd_polynomial(x)]),
            ProblemKind::Heat => Some(vec![x[0] - x[1]]),
        }
    }

    /// The equation residual at `x` after validating the bundle shape.
    pub fn residual_checked(&self, b: &DerivBundle<f64>, x: &[f64]) -> Result<Vec<f64>> {
        self.check_bundle(b, x)?;
        Ok(self.residual(b, x))
    }

    /// The boundary residual at `x` after validating shapes and region membership.
    pub fn boundary_residual_checked(&self, i: usize, bundles: &[DerivBundle<f64>], x: &[f64]) -> Result<Vec<f64>> {
        if i >= self.num_terms() {
            return arg(format!("{} has {} boundary terms, got index {i}", self.name(), self.num_terms()));
        }
        if !self.on_region(i, x) {
            return arg(format!("point {x:?} is not on boundary region '{}'", self.terms[i].name));
        }
        if bundles.len() != self.stencil_len(i) {
            return arg(format!("term '{}' needs {} bundles", self.terms[i].name, self.stencil_len(i)));
        }
        for (b, p) in bundles.iter().zip(self.stencil(i, x)) {
            self.check_bundle(b, &p)?;
        }
        Ok(self.boundary_residual(i, bundles, x))
    }

    fn check_bundle(&self, b: &DerivBundle<f64>, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() || b.input_dim() != self.input_dim() || b.output_dim() != self.output_dim() {
            return arg(format!(
                "bundle shape ({} outputs, {} inputs) does not fit {} ({} outputs, {} inputs)",
                b.output_dim(),
                b.input_dim(),
                self.name(),
                self.output_dim(),
                self.input_dim()
            ));
        }
        Ok(())
    }
}

/// `x₁² − x₂² + x₃² − x₄² + x₅x₆ + x₇x₈x₉x₁₀`.
fn hd_polynomial<S: Scalar>(x: &[S]) -> S {
    x[0] * x[0] - x[1] * x[1] + x[2] * x[2] - x[3] * x[3] + x[4] * x[5] + x[6] * x[7] * x[8] * x[9]
}

/// The exact solution at `x`; unsupported for problems without one.
pub fn analytic_solution(problem: &PdeProblem, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != problem.input_dim() {
        return arg(format!("{} expects {} coordinates", problem.name(), problem.input_dim()));
    }
    problem
        .analytic(x)
        .ok_or_else(|| Error::Unsupported(format!("{} has no closed-form solution", problem.name())))
}

/// Derivative bundle of the exact solution at `x`, by seeding each coordinate.
pub fn analytic_bundle(problem: &PdeProblem, x: &[f64]) -> Result<DerivBundle<f64>> {
    let (din, dout) = (problem.input_dim(), problem.output_dim());
    let mut b = DerivBundle::zeros(dout, din);
    for j in 0..din {
        let xs = crate::autodiff::lift_seeded(x, j)?;
        let u: Vec<Dual2> = problem
            .analytic(&xs)
            .ok_or_else(|| Error::Unsupported(format!("{} has no closed-form solution", problem.name())))?;
        for (k, v) in u.iter().enumerate() {
            b.u[k] = v.val;
            b.first[k * din + j] = v.d1;
            b.second[k * din + j] = v.d2;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundle(u: f64, first: &[f64], second: &[f64]) -> DerivBundle<f64> {
        DerivBundle { u: vec![u], first: first.to_vec(), second: second.to_vec() }
    }

    #[test]
    fn burgers_residuals() {
        let p = PdeProblem::new(ProblemKind::Burgers);
        // constant c
        assert_eq!(p.residual(&bundle(0.7, &[0.0, 0.0], &[0.0, 0.0]), &[0.2, 0.3]), vec![0.0]);
        // u(t, x) = x at x = 0.3: u_t = 0, u u_x = 0.3, u_xx = 0
        let r = p.residual_checked(&bundle(0.3, &[0.0, 1.0], &[0.0, 0.0]), &[0.5, 0.3]).unwrap();
        assert!((r[0] - 0.3).abs() < 1e-15);
        // initial term with u ≡ 0 at (0, 0.5): 0 − (−sin(π/2)) = 1
        let zero = bundle(0.0, &[0.0, 0.0], &[0.0, 0.0]);
        let r = p.boundary_residual_checked(0, std::slice::from_ref(&zero), &[0.0, 0.5]).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15);
        assert!(p.boundary_residual_checked(0, &[zero], &[0.1, 0.5]).is_err());
    }

    #[test]
    fn poisson_residual_of_x_squared() {
        let p = PdeProblem::new(ProblemKind::Poisson);
        let r = p.residual(&bundle(0.25, &[1.0, 0.0], &[2.0, 0.0]), &[0.5, 0.5]);
        assert!((r[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn schrodinger_constant_state() {
        let p = PdeProblem::new(ProblemKind::Schrodinger);
        let b = DerivBundle { u: vec![2.0, 0.0], first: vec![0.0; 4], second: vec![0.0; 4] };
        assert_eq!(p.residual_checked(&b, &[0.3, 1.0]).unwrap(), vec![8.0, 0.0]);
        let r = p.boundary_residual_checked(1, &[b.clone(), b.clone()], &[0.3, -5.0]).unwrap();
        assert_eq!(r, vec![0.0, 0.0]);
        assert_eq!(p.stencil(1, &[0.3, -5.0]), vec![vec![0.3, -5.0], vec![0.3, 5.0]]);
        // wrong output dimension
        assert!(p.residual_checked(&bundle(1.0, &[0.0, 0.0], &[0.0, 0.0]), &[0.3, 1.0]).is_err());
    }

    #[test]
    fn helmholtz_exact_solution_on_boundary() {
        let p = PdeProblem::with_wavenumber(ProblemKind::Helmholtz, 2.0);
        for (i, x) in [(0usize, [0.3, 0.0]), (0, [0.8, 1.0]), (1, [0.0, 0.4]), (1, [1.0, 0.6])] {
            let b = analytic_bundle(&p, &x).unwrap();
            let r = p.boundary_residual_checked(i, std::slice::from_ref(&b), &x).unwrap();
            assert!(r[0].abs() < 1e-15);
            assert!(p.residual(&b, &x)[0].abs() < 1e-14);
        }
    }

    #[test]
    fn analytic_values() {
        let p = PdeProblem::new(ProblemKind::Poisson);
        let v = analytic_solution(&p, &[0.5, 0.5]).unwrap()[0];
        assert!((v - 0.050_660_591_821_168_89).abs() < 1e-15);
        let mut x = [0.0; 10];
        x[0] = 1.0;
        assert_eq!(analytic_solution(&PdeProblem::new(ProblemKind::HdPoisson), &x).unwrap(), vec![1.0]);
        let heat = PdeProblem::new(ProblemKind::Heat);
        assert!((analytic_solution(&heat, &[0.7, 0.2, 0.3]).unwrap()[0] - 0.5).abs() < 1e-15);
        assert!(matches!(
            analytic_solution(&PdeProblem::new(ProblemKind::Burgers), &[0.1, 0.1]),
            Err(Error::Unsupported(_))
        ));
    }

    /// The heat solution written as a Gaussian convolution of the initial
    /// data, evaluated by a tensor trapezoid rule.
    #[test]
    fn heat_convolution_integral_is_affine() {
        let (x, y, t) = (0.7f64, 0.2f64, 0.3f64);
        let h = 0.01;
        let n = 1200;
        let mut sum = 0.0;
        for i in 0..=n {
            let z1 = x - 6.0 + h * i as f64;
            for j in 0..=n {
                let z2 = y - 6.0 + h * j as f64;
                let w = (-((x - z1).powi(2) + (y - z2).powi(2)) / (4.0 * t)).exp();
                sum += w * (z1 - z2);
            }
        }
        let u = sum * h * h / (4.0 * PI * t);
        assert!((u - 0.5).abs() < 1e-9, "{u}");
    }

    #[test]
    fn hd_poisson_polynomial_is_harmonic() {
        let p = PdeProblem::new(ProblemKind::HdPoisson);
        let x = [0.1, 0.9, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.2, 0.35];
        let b = analytic_bundle(&p, &x).unwrap();
        assert!(p.residual(&b, &x)[0].abs() < 1e-14);
    }

    #[test]
    fn problem_names_round_trip() {
        for k in ProblemKind::ALL {
            assert_eq!(ProblemKind::from_name(k.name()).unwrap(), k);
        }
        let e = ProblemKind::from_name("navier").unwrap_err().to_string();
        assert!(e.contains("hd_poisson"));
    }
}
