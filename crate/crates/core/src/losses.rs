//! Residual losses, labeled-data loss and adaptive point weighting.
//!
//! Every loss is a weighted sum `Σ w_p s_p` of per-sample squared residual
//! norms. Unweighted means use `w_p = 1/N`, so a weighted set whose weights
//! are still uniform reproduces the plain loss bit for bit.

use crate::autodiff::{Dual2, GradTape, Var};
use crate::error::{arg, Error, Result};
use crate::network::{BatchEngine, JetOutput, JetPlan};
use crate::pde::{DerivBundle, LabeledSet, PdeProblem};
use crate::sampling::PointSet;

/// Samples pushed through the network at once.
pub const CHUNK: usize = 256;

/// Something that produces output jets for a batch of points and can pull a
/// jet-space seed back to its parameters.
pub trait JetModel {
    fn output_dim(&self) -> usize;
    fn num_params(&self) -> usize;
    fn eval(&mut self, points: &[f64], plan: &JetPlan) -> JetOutput;
    /// Adds `∂(Σ seed·jets)/∂params` for the most recent [`eval`](Self::eval).
    fn backprop(&mut self, seed: &[f64], grad: &mut [f64]);
    /// As [`backprop`](Self::backprop), also returning the gradient of the
    /// value-block seed term with respect to the inputs (`points × input_dim`).
    fn backprop_with_input(&mut self, seed: &[f64], grad: &mut [f64]) -> Vec<f64>;
}

/// An MLP with fixed parameters, evaluated by a [`BatchEngine`].
pub struct NetModel<'a> {
    pub engine: &'a mut BatchEngine,
    pub params: &'a [f64],
    pub output_dim: usize,
}

impl JetModel for NetModel<'_> {
    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn num_params(&self) -> usize {
        self.params.len()
    }

    fn eval(&mut self, points: &[f64], plan: &JetPlan) -> JetOutput {
        self.engine.forward(self.params, points, plan)
    }

    fn backprop(&mut self, seed: &[f64], grad: &mut [f64]) {
        self.engine.backward(self.params, seed, grad, false);
    }

    fn backprop_with_input(&mut self, seed: &[f64], grad: &mut [f64]) -> Vec<f64> {
        self.engine.backward(self.params, seed, grad, true).unwrap_or_default()
    }
}

type JetFn = Box<dyn Fn(&[Dual2]) -> Vec<Dual2> + Send + Sync>;

/// A parameter-free closed-form model, differentiated by jets.
pub struct FnModel {
    input_dim: usize,
    output_dim: usize,
    f: JetFn,
    last: Vec<f64>,
}

impl FnModel {
    pub fn new(input_dim: usize, output_dim: usize, f: impl Fn(&[Dual2]) -> Vec<Dual2> + Send + Sync + 'static) -> Self {
        Self { input_dim, output_dim, f: Box::new(f), last: Vec::new() }
    }

    /// The exact solution of `problem` as a model.
    pub fn analytic(problem: &PdeProblem) -> Result<Self> {
        if !problem.kind.has_analytic() {
            return Err(Error::Unsupported(format!("{} has no closed-form solution", problem.name())));
        }
        let p = problem.clone();
        Ok(Self::new(problem.input_dim(), problem.output_dim(), move |x| {
            p.analytic(x).unwrap_or_default()
        }))
    }
}

impl JetModel for FnModel {
    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn num_params(&self) -> usize {
        0
    }

    fn eval(&mut self, points: &[f64], plan: &JetPlan) -> JetOutput {
        let d = self.input_dim;
        let n = points.len() / d;
        let blocks = plan.blocks();
        let mut out = JetOutput { out_dim: self.output_dim, blocks, points: n, data: vec![0.0; self.output_dim * blocks * n] };
        self.last = points.to_vec();
        for (p, x) in points.chunks_exact(d).enumerate() {
            let plain: Vec<Dual2> = x.iter().map(|&v| Dual2::constant(v)).collect();
            for (k, u) in (self.f)(&plain).iter().enumerate() {
                let i = out.index(k, 0, p);
                out.data[i] = u.val;
            }
            for &(c, second) in plan.dirs() {
                let mut xs = plain.clone();
                xs[c] = Dual2::seeded(x[c]);
                let fb = plan.first_block(c).unwrap_or(0);
                for (k, u) in (self.f)(&xs).iter().enumerate() {
                    let i = out.index(k, fb, p);
                    out.data[i] = u.d1;
                    if second {
                        let i = out.index(k, fb + 1, p);
                        out.data[i] = u.d2;
                    }
                }
            }
        }
        out
    }

    fn backprop(&mut self, _seed: &[f64], _grad: &mut [f64]) {}

    fn backprop_with_input(&mut self, seed: &[f64], _grad: &mut [f64]) -> Vec<f64> {
        let d = self.input_dim;
        let n = self.last.len() / d;
        let blocks = seed.len() / (self.output_dim * n).max(1);
        let mut out = vec![0.0; n * d];
        for (p, x) in self.last.chunks_exact(d).enumerate() {
            for c in 0..d {
                let mut xs: Vec<Dual2> = x.iter().map(|&v| Dual2::constant(v)).collect();
                xs[c] = Dual2::seeded(x[c]);
                for (k, u) in (self.f)(&xs).iter().enumerate() {
                    out[p * d + c] += seed[k * blocks * n + p] * u.d1;
                }
            }
        }
        out
    }
}

/// Which residual a loss term measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Equation,
    Boundary(usize),
}

/// One evaluated loss term.
#[derive(Clone, Debug, PartialEq)]
pub struct TermEval {
    /// `Σ w_p s_p`.
    pub loss: f64,
    /// Squared residual norm `s_p` per sample.
    pub sq_errors: Vec<f64>,
}

/// Evaluates `Σ w_p ‖r_p‖²` over `points` (uniform `1/N` weights when
/// `weights` is `None`) and, if `grad` is given as `(buffer, scale)`, adds
/// `scale · ∂loss/∂params` into the buffer.
pub fn evaluate_term(
    model: &mut dyn JetModel,
    problem: &PdeProblem,
    target: Target,
    points: &PointSet,
    weights: Option<&[f64]>,
    mut grad: Option<(&mut [f64], f64)>,
) -> Result<TermEval> {
    let n = points.len();
    if n == 0 {
        return arg("loss over an empty point set");
    }
    if points.dim != problem.input_dim() || model.output_dim() != problem.output_dim() {
        return arg(format!(
            "point/model shape ({} inputs, {} outputs) does not fit {}",
            points.dim,
            model.output_dim(),
            problem.name()
        ));
    }
    if let Some(w) = weights {
        if w.len() != n {
            return arg(format!("{} weights for {n} points", w.len()));
        }
    }
    for x in points.iter() {
        let ok = match target {
            Target::Equation => problem.in_domain(x),
            Target::Boundary(i) => i < problem.num_terms() && problem.on_region(i, x),
        };
        if !ok {
            return arg(format!("point {x:?} lies outside the region of {target:?}"));
        }
    }

    let (plan, stencil) = match target {
        Target::Equation => (problem.equation_plan(), 1),
        Target::Boundary(i) => (problem.term_plan(i), problem.stencil_len(i)),
    };
    let din = problem.input_dim();
    let uniform = 1.0 / n as f64;
    let tape = GradTape::new();
    let mut loss = 0.0;
    let mut sq_errors = Vec::with_capacity(n);
    let mut flat = Vec::new();
    let mut seed = Vec::new();

    for start in (0..n).step_by(CHUNK) {
        let end = (start + CHUNK).min(n);
        flat.clear();
        for s in start..end {
            match target {
                Target::Equation => flat.extend_from_slice(points.point(s)),
                Target::Boundary(i) => {
                    for q in problem.stencil(i, points.point(s)) {
                        flat.extend_from_slice(&q);
                    }
                }
            }
        }
        let jets = model.eval(&flat, &plan);
        if grad.is_some() {
            seed.clear();
            seed.resize(jets.data.len(), 0.0);
        }
        for s in start..end {
            let w = weights.map_or(uniform, |w| w[s]);
            let x = points.point(s);
            let cols: Vec<usize> = (0..stencil).map(|q| (s - start) * stencil + q).collect();
            if let Some((_, scale)) = grad.as_ref() {
                let sq = residual_grad(&tape, problem, target, &jets, &plan, &cols, x, w * scale, &mut seed)?;
                sq_errors.push(sq);
                loss += w * sq;
            } else {
                let bundles: Vec<DerivBundle<f64>> =
                    cols.iter().map(|&c| DerivBundle::from_jets(&jets, &plan, din, c)).collect();
                let r = match target {
                    Target::Equation => problem.residual(&bundles[0], x),
                    Target::Boundary(i) => problem.boundary_residual(i, &bundles, x),
                };
                let sq: f64 = r.iter().map(|v| v * v).sum();
                sq_errors.push(sq);
                loss += w * sq;
            }
        }
        if let Some((g, _)) = grad.as_mut() {
            model.backprop(&seed, g);
        }
    }
    Ok(TermEval { loss, sq_errors })
}

/// Records `‖r‖²` for one sample on the tape with every bundle entry as a
/// parameter, and scatters `factor · ∂‖r‖²/∂entry` into the jet seed.
#[allow(clippy::too_many_arguments)]
fn residual_grad(
    tape: &GradTape,
    problem: &PdeProblem,
    target: Target,
    jets: &JetOutput,
    plan: &JetPlan,
    cols: &[usize],
    x: &[f64],
    factor: f64,
    seed: &mut [f64],
) -> Result<f64> {
    let din = problem.input_dim();
    let dout = problem.output_dim();
    tape.clear();
    // slot order per column: u_k, then (k, coord) first, then (k, coord) second
    let mut slots: Vec<usize> = Vec::new();
    let bundles: Vec<DerivBundle<Var<'_>>> = cols
        .iter()
        .map(|&c| {
            let zero = tape.constant(0.0);
            let mut b = DerivBundle::filled(dout, din, zero);
            for k in 0..dout {
                b.u[k] = tape.param(jets.get(k, 0, c));
                slots.push(jets.index(k, 0, c));
                for &(coord, _) in plan.dirs() {
                    if let Some(blk) = plan.first_block(coord) {
                        b.first[k * din + coord] = tape.param(jets.get(k, blk, c));
                        slots.push(jets.index(k, blk, c));
                    }
                    if let Some(blk) = plan.second_block(coord) {
                        b.second[k * din + coord] = tape.param(jets.get(k, blk, c));
                        slots.push(jets.index(k, blk, c));
                    }
                }
            }
            b
        })
        .collect();
    let r = match target {
        Target::Equation => problem.residual(&bundles[0], x),
        Target::Boundary(i) => problem.boundary_residual(i, &bundles, x),
    };
    let total = r.iter().skip(1).fold(r[0] * r[0], |acc, &v| acc + v * v);
    tape.set_output(total);
    let g = tape.reverse_gradient()?;
    for (slot, gi) in slots.iter().zip(&g) {
        seed[*slot] += factor * gi;
    }
    Ok(total.jet().val)
}

/// `(1/N) Σ ‖L[û] − F‖²`.
pub fn equation_loss(model: &mut dyn JetModel, problem: &PdeProblem, interior: &PointSet) -> Result<f64> {
    Ok(evaluate_term(model, problem, Target::Equation, interior, None, None)?.loss)
}

/// `(1/M) Σ ‖B_i[û] − g_i‖²`.
pub fn boundary_loss(model: &mut dyn JetModel, problem: &PdeProblem, i: usize, pts: &PointSet) -> Result<f64> {
    Ok(evaluate_term(model, problem, Target::Boundary(i), pts, None, None)?.loss)
}

/// Components of a physics-informed loss.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicsLoss {
    /// Mean equation loss `L_f`.
    pub l_f: f64,
    /// Mean boundary losses `L_{b_i}`.
    pub l_b: Vec<f64>,
    /// `L_f + λ Σ L_{b_i}` from the means.
    pub l_pinn: f64,
    /// The same combination from the set weights (equals `l_pinn` while
    /// every weight is uniform).
    pub weighted: f64,
    pub eq_errors: Vec<f64>,
    pub b_errors: Vec<Vec<f64>>,
}

/// `L_f + λ₁ Σ_i L_{b_i}`.
pub fn pinn_loss(
    model: &mut dyn JetModel,
    problem: &PdeProblem,
    interior: &PointSet,
    boundary: &[PointSet],
    lambda: f64,
) -> Result<f64> {
    let mut total = equation_loss(model, problem, interior)?;
    if boundary.len() != problem.num_terms() {
        return arg(format!("{} needs {} boundary sets, got {}", problem.name(), problem.num_terms(), boundary.len()));
    }
    for (i, b) in boundary.iter().enumerate() {
        total += lambda * boundary_loss(model, problem, i, b)?;
    }
    Ok(total)
}

/// `L_PINN + λ₂ L_T`.
pub fn augmented_pinn_loss(
    model: &mut dyn JetModel,
    problem: &PdeProblem,
    interior: &PointSet,
    boundary: &[PointSet],
    labeled: &LabeledSet,
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    Ok(pinn_loss(model, problem, interior, boundary, lambda1)? + lambda2 * labeled_loss(model, labeled, None)?)
}

/// `L_T = (1/J) Σ ‖û(x_T) − u_T‖²`, adding `scale · ∂L_T/∂params` when asked.
pub fn labeled_loss(model: &mut dyn JetModel, labeled: &LabeledSet, grad: Option<(&mut [f64], f64)>) -> Result<f64> {
    let j = labeled.len();
    if j == 0 {
        return arg("labeled loss over an empty set");
    }
    if labeled.output_dim != model.output_dim() {
        return arg(format!("labels have {} components, model {}", labeled.output_dim, model.output_dim()));
    }
    let out = model.eval(&labeled.x, &JetPlan::value_only());
    let inv = 1.0 / j as f64;
    let mut loss = 0.0;
    let mut seed = vec![0.0; out.data.len()];
    for p in 0..j {
        for (k, &u) in labeled.value(p).iter().enumerate() {
            let diff = out.get(k, 0, p) - u;
            loss += inv * diff * diff;
            seed[out.index(k, 0, p)] = 2.0 * inv * diff;
        }
    }
    if let Some((g, scale)) = grad {
        seed.iter_mut().for_each(|s| *s *= scale);
        model.backprop(&seed, g);
    }
    Ok(loss)
}

/// When a point-weighted set counts as finished.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PwTermination {
    /// Hard-to-learn weight mass `ρ ≤ ε`.
    #[default]
    HlMass,
    /// `1 − ρ ≤ ε`.
    Literal,
}

/// A point set with adaptive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPointSet {
    pub points: PointSet,
    /// Nonnegative, summing to one.
    pub weights: Vec<f64>,
    /// Error threshold separating easy points from hard ones.
    pub threshold: f64,
    /// Update magnitude; zero freezes the weights.
    pub magnitude: f64,
    pub epsilon: Option<f64>,
    pub termination: PwTermination,
}

impl WeightedPointSet {
    /// Uniform weights `1/N`.
    pub fn new(points: PointSet, magnitude: f64, threshold: f64) -> Self {
        let n = points.len();
        Self {
            points,
            weights: vec![1.0 / n as f64; n],
            threshold,
            magnitude,
            epsilon: None,
            termination: PwTermination::HlMass,
        }
    }

    /// Weights fixed at `1/N` forever.
    pub fn frozen(points: PointSet) -> Self {
        Self::new(points, 0.0, 0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PwStepReport {
    /// Weight mass on hard-to-learn points before the update.
    pub rho: f64,
    pub alpha: f64,
    pub terminated: bool,
}

/// `+1` for easy points (`error ≤ threshold`), `−1` for hard ones.
pub fn classify(errors: &[f64], threshold: f64) -> Vec<i8> {
    errors.iter().map(|&e| if e <= threshold { 1 } else { -1 }).collect()
}

pub const RHO_CLAMP: f64 = 1e-8;

/// Multiplicative reweighting `ω ← ω·exp(−αβ)` with
/// `α = q·log((1−ρ)/ρ)`, renormalized.
pub fn pw_update(set: &WeightedPointSet, beta: &[i8]) -> Result<(WeightedPointSet, PwStepReport)> {
    if beta.len() != set.len() {
        return arg(format!("{} classes for {} points", beta.len(), set.len()));
    }
    let mass: f64 = set.weights.iter().sum();
    if (mass - 1.0).abs() > 1e-9 || set.weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::State(format!("point weights must be nonnegative and sum to 1, sum is {mass}")));
    }
    let rho: f64 = set.weights.iter().zip(beta).filter(|(_, &b)| b < 0).map(|(w, _)| w).sum();
    let clamped = rho.clamp(RHO_CLAMP, 1.0 - RHO_CLAMP);
    let alpha = set.magnitude * ((1.0 - clamped) / clamped).ln();
    let terminated = match (set.epsilon, set.termination) {
        (None, _) => false,
        (Some(eps), PwTermination::HlMass) => rho <= eps,
        (Some(eps), PwTermination::Literal) => 1.0 - rho <= eps,
    };
    let report = PwStepReport { rho, alpha, terminated };
    let mut next = set.clone();
    let mixed = beta.iter().any(|&b| b > 0) && beta.iter().any(|&b| b < 0);
    if alpha != 0.0 && mixed {
        let up = (-alpha).exp();
        let down = alpha.exp();
        for (w, &b) in next.weights.iter_mut().zip(beta) {
            *w *= if b > 0 { up } else { down };
        }
        let total: f64 = next.weights.iter().sum();
        next.weights.iter_mut().for_each(|w| *w /= total);
    }
    Ok((next, report))
}

/// Evaluates the full physics loss over weighted sets, adding
/// `scale · ∂(weighted)/∂params` into `grad` when given.
pub fn physics_loss(
    model: &mut dyn JetModel,
    problem: &PdeProblem,
    interior: &WeightedPointSet,
    boundary: &[WeightedPointSet],
    lambda: f64,
    mut grad: Option<(&mut [f64], f64)>,
) -> Result<PhysicsLoss> {
    if boundary.len() != problem.num_terms() {
        return arg(format!("{} needs {} boundary sets, got {}", problem.name(), problem.num_terms(), boundary.len()));
    }
    let eq = evaluate_term(
        model,
        problem,
        Target::Equation,
        &interior.points,
        Some(&interior.weights),
        grad.as_mut().map(|(g, s)| (&mut **g, *s)),
    )?;
    let l_f = mean(&eq.sq_errors);
    let mut l_pinn = l_f;
    let mut weighted = eq.loss;
    let mut l_b = Vec::with_capacity(boundary.len());
    let mut b_errors = Vec::with_capacity(boundary.len());
    for (i, set) in boundary.iter().enumerate() {
        let t = evaluate_term(
            model,
            problem,
            Target::Boundary(i),
            &set.points,
            Some(&set.weights),
            grad.as_mut().map(|(g, s)| (&mut **g, *s * lambda)),
        )?;
        let m = mean(&t.sq_errors);
        l_pinn += lambda * m;
        weighted += lambda * t.loss;
        l_b.push(m);
        b_errors.push(t.sq_errors);
    }
    Ok(PhysicsLoss { l_f, l_b, l_pinn, weighted, eq_errors: eq.sq_errors, b_errors })
}

/// `L^PW_f + λ Σ L^PW_{b_i}` from the current weights.
pub fn weighted_pinn_loss(
    model: &mut dyn JetModel,
    problem: &PdeProblem,
    interior: &WeightedPointSet,
    boundary: &[WeightedPointSet],
    lambda: f64,
) -> Result<f64> {
    Ok(physics_loss(model, problem, interior, boundary, lambda, None)?.weighted)
}

/// `Σ s_p · (1/N)`, the same reduction the uniform weights perform.
fn mean(v: &[f64]) -> f64 {
    let w = 1.0 / v.len() as f64;
    v.iter().fold(0.0, |acc, s| acc + w * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_params, InitScheme, MlpSpec, Activation};
    use crate::pde::ProblemKind;
    use crate::sampling::{sample_boundary, sample_interior, RegionTag};
    use proptest::prelude::*;

    fn pts(dim: usize, rows: &[&[f64]], tag: RegionTag) -> PointSet {
        PointSet { dim, points: rows.concat(), tag }
    }

    fn constant(dout: usize, c: f64) -> FnModel {
        FnModel::new(2, dout, move |x| vec![x[0].lift(c); dout])
    }

    use crate::autodiff::Scalar;

    #[test]
    fn equation_loss_examples() {
        let p = PdeProblem::new(ProblemKind::Burgers);
        let mut ident = FnModel::new(2, 1, |x| vec![x[1]]);
        let s = pts(2, &[&[0.5, 0.3], &[0.5, 0.6]], RegionTag::Interior);
        let l = equation_loss(&mut ident, &p, &s).unwrap();
        assert!((l - 0.225).abs() < 1e-15, "{l}");
        let one = pts(2, &[&[0.5, 0.3]], RegionTag::Interior);
        assert!((equation_loss(&mut ident, &p, &one).unwrap() - 0.09).abs() < 1e-15);
        let empty = pts(2, &[], RegionTag::Interior);
        assert!(equation_loss(&mut ident, &p, &empty).is_err());

        let poisson = PdeProblem::new(ProblemKind::Poisson);
        let mut exact = FnModel::analytic(&poisson).unwrap();
        let s = sample_interior(&poisson, 100, 1).unwrap();
        assert!(equation_loss(&mut exact, &poisson, &s).unwrap() < 1e-15);
    }

    #[test]
    fn boundary_loss_examples() {
        let p = PdeProblem::new(ProblemKind::Poisson);
        for m in [1, 4, 7] {
            let b = sample_boundary(&p, 0, m, 2).unwrap();
            assert_eq!(boundary_loss(&mut constant(1, 0.0), &p, 0, &b).unwrap(), 0.0);
            assert!((boundary_loss(&mut constant(1, 1.0), &p, 0, &b).unwrap() - 1.0).abs() < 1e-15);
        }
        let burgers = PdeProblem::new(ProblemKind::Burgers);
        let b = pts(2, &[&[0.0, 0.5]], RegionTag::Boundary(0));
        assert!((boundary_loss(&mut constant(1, 0.0), &burgers, 0, &b).unwrap() - 1.0).abs() < 1e-15);
        let off = pts(2, &[&[0.1, 0.5]], RegionTag::Boundary(0));
        assert!(boundary_loss(&mut constant(1, 0.0), &burgers, 0, &off).is_err());
    }

    #[test]
    fn pinn_loss_combines_terms() {
        for kind in [ProblemKind::Poisson, ProblemKind::Helmholtz, ProblemKind::HdPoisson, ProblemKind::Heat] {
            let p = PdeProblem::new(kind);
            let mut exact = FnModel::analytic(&p).unwrap();
            let int = sample_interior(&p, 50, 3).unwrap();
            let bnd: Vec<_> = (0..p.num_terms()).map(|i| sample_boundary(&p, i, 20, 3).unwrap()).collect();
            assert!(pinn_loss(&mut exact, &p, &int, &bnd, 1.0).unwrap() < 1e-14, "{kind}");
        }
        // ũ ≡ 1 on Poisson: L_f = mean sin²πx sin²πy, each L_b = 1
        let p = PdeProblem::new(ProblemKind::Poisson);
        let int = sample_interior(&p, 40, 3).unwrap();
        let bnd: Vec<_> = (0..2).map(|i| sample_boundary(&p, i, 10, 3).unwrap()).collect();
        let lf = equation_loss(&mut constant(1, 1.0), &p, &int).unwrap();
        let full = pinn_loss(&mut constant(1, 1.0), &p, &int, &bnd, 0.5).unwrap();
        assert!((full - (lf + 0.5 * 2.0)).abs() < 1e-14);
        assert_eq!(pinn_loss(&mut constant(1, 1.0), &p, &int, &bnd, 0.0).unwrap(), lf);
    }

    #[test]
    fn labeled_loss_examples() {
        let mut set = LabeledSet::new(2, 1);
        set.push(&[0.0, 0.0], &[1.0]);
        set.push(&[0.0, 0.0], &[-2.0]);
        assert!((labeled_loss(&mut constant(1, 0.0), &set, None).unwrap() - 2.5).abs() < 1e-15);
        let mut one = LabeledSet::new(2, 1);
        one.push(&[0.3, 0.1], &[0.5]);
        assert_eq!(labeled_loss(&mut constant(1, 0.5), &one, None).unwrap(), 0.0);
        assert_eq!(labeled_loss(&mut constant(1, 1.5), &one, None).unwrap(), 1.0);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&[0.01, 0.03], 0.02), vec![1, -1]);
        assert_eq!(classify(&[0.02], 0.02), vec![1]);
        assert_eq!(classify(&[0.0, 0.0, 0.0], 0.0), vec![1, 1, 1]);
    }

    fn wps(weights: Vec<f64>, q: f64) -> WeightedPointSet {
        let n = weights.len();
        let mut s = WeightedPointSet::new(PointSet { dim: 1, points: vec![0.0; n], tag: RegionTag::Boundary(0) }, q, 0.0);
        s.weights = weights;
        s
    }

    #[test]
    fn pw_update_examples() {
        let (s, r) = pw_update(&wps(vec![0.5, 0.5], 1.0), &[-1, 1]).unwrap();
        assert_eq!((r.rho, r.alpha), (0.5, 0.0));
        assert_eq!(s.weights, vec![0.5, 0.5]);

        let (s, r) = pw_update(&wps(vec![0.25, 0.75], 1.0), &[-1, 1]).unwrap();
        assert_eq!(r.rho, 0.25);
        assert!((r.alpha - 3f64.ln()).abs() < 1e-15);
        assert!((s.weights[0] - 0.75).abs() < 1e-15 && (s.weights[1] - 0.25).abs() < 1e-15);

        for beta in [[1i8, 1, 1], [-1, -1, -1]] {
            let w = vec![0.2, 0.3, 0.5];
            let (s, _) = pw_update(&wps(w.clone(), 1.0), &beta).unwrap();
            assert_eq!(s.weights, w);
        }
        assert!(matches!(pw_update(&wps(vec![0.5, 0.6], 1.0), &[1, 1]), Err(Error::State(_))));
    }

    #[test]
    fn pw_termination_semantics() {
        let mut s = wps(vec![0.95, 0.05], 1.0);
        s.epsilon = Some(0.1);
        assert!(pw_update(&s, &[1, -1]).unwrap().1.terminated);
        assert!(!pw_update(&s, &[-1, 1]).unwrap().1.terminated);
        s.termination = PwTermination::Literal;
        assert!(pw_update(&s, &[-1, 1]).unwrap().1.terminated);
        s.epsilon = None;
        assert!(!pw_update(&s, &[1, 1]).unwrap().1.terminated);
    }

    #[test]
    fn weighted_loss_examples() {
        let p = PdeProblem::new(ProblemKind::Poisson);
        // û ≡ 2 on x=0 and û ≡ 3 on x=1 faces of Poisson's second term
        let mut step = FnModel::new(2, 1, |x| vec![x[0] + 2.0]);
        let points = pts(2, &[&[0.0, 0.3], &[1.0, 0.7]], RegionTag::Boundary(1));
        let interior = WeightedPointSet::frozen(pts(2, &[&[0.5, 0.5]], RegionTag::Interior));
        let y_faces = WeightedPointSet::frozen(pts(2, &[&[0.5, 0.0]], RegionTag::Boundary(0)));
        let mut with = |w: Vec<f64>| {
            let mut b = WeightedPointSet::frozen(points.clone());
            b.weights = w;
            let l = physics_loss(&mut step, &p, &interior, &[y_faces.clone(), b], 1.0, None).unwrap();
            l.weighted - l.l_f - l.l_b[0]
        };
        assert!((with(vec![1.0, 0.0]) - 4.0).abs() < 1e-14);
        assert!((with(vec![0.75, 0.25]) - 5.25).abs() < 1e-14);

        let int = sample_interior(&p, 30, 5).unwrap();
        let bnd: Vec<_> = (0..2).map(|i| sample_boundary(&p, i, 9, 5).unwrap()).collect();
        let mut m = constant(1, 0.3);
        let plain = pinn_loss(&mut m, &p, &int, &bnd, 1.0).unwrap();
        let ws: Vec<_> = bnd.iter().cloned().map(WeightedPointSet::frozen).collect();
        let w = weighted_pinn_loss(&mut m, &p, &WeightedPointSet::frozen(int), &ws, 1.0).unwrap();
        assert!((w - plain).abs() <= 1e-14 * plain, "{w} vs {plain}");
    }

    /// Parameter gradient of the weighted physics loss against central
    /// differences on a small network.
    fn check_physics_gradient(kind: ProblemKind, act: Activation) {
        let p = PdeProblem::new(kind);
        let spec = MlpSpec::new(p.input_dim(), 2, 6, p.output_dim(), act).unwrap();
        let params = init_params(&spec, InitScheme::GlorotUniform, 11, 1).values;
        let mut engine = BatchEngine::new(&spec);
        let int = WeightedPointSet::new(sample_interior(&p, 300, 4).unwrap(), 0.1, 0.0);
        let mut bnd: Vec<_> =
            (0..p.num_terms()).map(|i| WeightedPointSet::new(sample_boundary(&p, i, 7, 4).unwrap(), 0.1, 0.0)).collect();
        bnd[0].weights = (1..=7).map(|k| k as f64 / 28.0).collect();
        let lam = 0.7;
        let mut grad = vec![0.0; params.len()];
        let mut model = NetModel { engine: &mut engine, params: &params, output_dim: p.output_dim() };
        physics_loss(&mut model, &p, &int, &bnd, lam, Some((&mut grad, 1.0))).unwrap();
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let h = 1e-5;
        for i in (0..params.len()).step_by(7) {
            let mut at = |d: f64| {
                let mut q = params.clone();
                q[i] += d;
                let mut m = NetModel { engine: &mut engine, params: &q, output_dim: p.output_dim() };
                physics_loss(&mut m, &p, &int, &bnd, lam, None).unwrap().weighted
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-6 * gnorm.max(1.0), "{kind} param {i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn physics_gradient_matches_finite_differences() {
        check_physics_gradient(ProblemKind::Burgers, Activation::Linear);
        check_physics_gradient(ProblemKind::Schrodinger, Activation::Linear);
        check_physics_gradient(ProblemKind::Heat, Activation::Linear);
        check_physics_gradient(ProblemKind::Poisson, Activation::Sigmoid);
    }

    #[test]
    fn labeled_gradient_matches_finite_differences() {
        let spec = MlpSpec::new(2, 2, 5, 2, Activation::Linear).unwrap();
        let params = init_params(&spec, InitScheme::GlorotUniform, 3, 1).values;
        let mut engine = BatchEngine::new(&spec);
        let mut set = LabeledSet::new(2, 2);
        set.push(&[0.1, 0.4], &[1.0, -1.0]);
        set.push(&[0.7, -0.2], &[0.5, 0.25]);
        let mut grad = vec![0.0; params.len()];
        let mut model = NetModel { engine: &mut engine, params: &params, output_dim: 2 };
        labeled_loss(&mut model, &set, Some((&mut grad, 2.0))).unwrap();
        for i in 0..params.len() {
            let mut at = |d: f64| {
                let mut q = params.clone();
                q[i] += d;
                labeled_loss(&mut NetModel { engine: &mut engine, params: &q, output_dim: 2 }, &set, None).unwrap()
            };
            let fd = 2.0 * (at(1e-6) - at(-1e-6)) / 2e-6;
            assert!((fd - grad[i]).abs() < 1e-7, "{i}: {fd} vs {}", grad[i]);
        }
    }

    fn normalized(raw: Vec<f64>) -> Vec<f64> {
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / s).collect()
    }

    proptest! {
        #[test]
        fn pw_update_keeps_a_distribution(
            raw in prop::collection::vec(0.01f64..1.0, 2..40),
            signs in prop::collection::vec(any::<bool>(), 40),
            q in 0.0f64..5.0,
        ) {
            let n = raw.len();
            let beta: Vec<i8> = signs[..n].iter().map(|&b| if b { 1 } else { -1 }).collect();
            let (s, r) = pw_update(&wps(normalized(raw), q), &beta).unwrap();
            prop_assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(s.weights.iter().all(|&w| w >= 0.0));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&r.rho));
        }

        #[test]
        fn pw_update_stage_behaviour(
            raw in prop::collection::vec(0.01f64..1.0, 2..30),
            signs in prop::collection::vec(any::<bool>(), 30),
            q in 0.01f64..2.0,
        ) {
            let n = raw.len();
            let mut beta: Vec<i8> = signs[..n].iter().map(|&b| if b { 1 } else { -1 }).collect();
            beta[0] = 1;
            beta[1] = -1;
            let w = normalized(raw);
            let (s, r) = pw_update(&wps(w.clone(), q), &beta).unwrap();
            if (r.rho - 0.5).abs() > 1e-9 {
                for k in 0..n {
                    let easy_up = s.weights[k] > w[k];
                    if r.rho > 0.5 {
                        prop_assert_eq!(easy_up, beta[k] > 0);
                    } else {
                        prop_assert_eq!(easy_up, beta[k] < 0);
                    }
                }
            }
        }

        #[test]
        fn pw_update_is_permutation_equivariant(
            raw in prop::collection::vec(0.01f64..1.0, 2..20),
            signs in prop::collection::vec(any::<bool>(), 20),
            shift in 0usize..20,
        ) {
            let n = raw.len();
            let beta: Vec<i8> = signs[..n].iter().map(|&b| if b { 1 } else { -1 }).collect();
            let w = normalized(raw);
            let (a, ra) = pw_update(&wps(w.clone(), 0.7), &beta).unwrap();
            let rot = |v: &[f64]| { let mut v = v.to_vec(); v.rotate_left(shift % n); v };
            let mut rb = beta.clone();
            rb.rotate_left(shift % n);
            let (b, rbr) = pw_update(&wps(rot(&w), 0.7), &rb).unwrap();
            prop_assert!((ra.alpha - rbr.alpha).abs() < 1e-12);
            for (x, y) in rot(&a.weights).iter().zip(&b.weights) {
                prop_assert!((x - y).abs() < 1e-14);
            }
        }

        #[test]
        fn alpha_is_linear_in_magnitude(rho_w in 0.01f64..0.99, q in 0.01f64..3.0) {
            let set = wps(vec![rho_w, 1.0 - rho_w], q);
            let unit = wps(vec![rho_w, 1.0 - rho_w], 1.0);
            let a = pw_update(&set, &[-1, 1]).unwrap().1.alpha;
            let b = pw_update(&unit, &[-1, 1]).unwrap().1.alpha;
            prop_assert!((a - q * b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}
