use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{Dual2, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Part {
    Val,
    D1,
    D2,
}

#[derive(Clone, Copy, Debug)]
enum Unary {
    Tanh,
    Sin,
    Cos,
    Exp,
    Square,
    Recip,
}

impl Unary {
    /// `(f, f', f'', f''')` at `x`.
    fn eval(self, x: f64) -> [f64; 4] {
        match self {
            Unary::Tanh => {
                let t = x.tanh();
                let s = 1.0 - t * t;
                [t, s, -2.0 * t * s, -2.0 * s * (1.0 - 3.0 * t * t)]
            }
            Unary::Sin => {
                let (s, c) = x.sin_cos();
                [s, c, -s, -c]
            }
            Unary::Cos => {
                let (s, c) = x.sin_cos();
                [c, -s, -c, s]
            }
            Unary::Exp => {
                let e = x.exp();
                [e, e, e, e]
            }
            Unary::Square => [x * x, 2.0 * x, 2.0, 0.0],
            Unary::Recip => {
                let r = 1.0 / x;
                let r2 = r * r;
                [r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2]
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Op {
    Param(usize),
    Input,
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Neg(u32),
    AddConst(u32),
    MulConst(u32, f64),
    Unary(u32, Unary),
    /// `bias + Σ w_k a_k`; operands live in `affine_args[start..start + 2n]`
    /// as interleaved (w, a) pairs.
    Affine { bias: u32, start: u32, n: u32 },
    Extract(u32, Part),
}

#[derive(Default)]
struct Inner {
    ops: Vec<Op>,
    vals: Vec<Dual2>,
    /// Constant operand of `AddConst`, indexed like `ops`.
    shifts: Vec<f64>,
    affine_args: Vec<u32>,
    params: Vec<u32>,
    output: Option<u32>,
}

/// Reverse-mode tape over [`Dual2`] payloads.
///
/// Parameters are recorded as `(p, 0, 0)` jets; inputs are arbitrary constant
/// jets (typically seeded coordinates). The reverse sweep propagates adjoints
/// of the full `(val, d1, d2)` triple, so a scalar built from input
/// derivatives of a network can be differentiated with respect to the
/// network's parameters.
#[derive(Default)]
pub struct GradTape {
    inner: RefCell<Inner>,
}

/// Handle to a tape node.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t GradTape,
    idx: u32,
}

impl GradTape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops every recorded node, keeping allocations.
    pub fn clear(&self) {
        let mut t = self.inner.borrow_mut();
        t.ops.clear();
        t.vals.clear();
        t.shifts.clear();
        t.affine_args.clear();
        t.params.clear();
        t.output = None;
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_params(&self) -> usize {
        self.inner.borrow().params.len()
    }

    fn push(&self, op: Op, val: Dual2, shift: f64) -> Var<'_> {
        let mut t = self.inner.borrow_mut();
        let idx = t.ops.len() as u32;
        t.ops.push(op);
        t.vals.push(val);
        t.shifts.push(shift);
        Var { tape: self, idx }
    }

    /// Registers a new differentiable parameter slot.
    pub fn param(&self, value: f64) -> Var<'_> {
        let slot = self.num_params();
        let v = self.push(Op::Param(slot), Dual2::constant(value), 0.0);
        self.inner.borrow_mut().params.push(v.idx);
        v
    }

    /// Records a constant jet.
    pub fn input(&self, value: Dual2) -> Var<'_> {
        self.push(Op::Input, value, 0.0)
    }

    pub fn constant(&self, value: f64) -> Var<'_> {
        self.input(Dual2::constant(value))
    }

    /// Records `bias + Σ weights[k]·inputs[k]` as a single node.
    pub fn affine<'t>(&'t self, weights: &[Var<'t>], inputs: &[Var<'t>], bias: Var<'t>) -> Var<'t> {
        assert_eq!(weights.len(), inputs.len(), "affine operand lengths differ");
        let (start, val) = {
            let mut t = self.inner.borrow_mut();
            let start = t.affine_args.len() as u32;
            let mut acc = t.vals[bias.idx as usize];
            for (w, a) in weights.iter().zip(inputs) {
                acc = acc + t.vals[w.idx as usize] * t.vals[a.idx as usize];
                t.affine_args.push(w.idx);
                t.affine_args.push(a.idx);
            }
            (start, acc)
        };
        self.push(Op::Affine { bias: bias.idx, start, n: weights.len() as u32 }, val, 0.0)
    }

    /// Marks `v` as the scalar output; its `val` component is differentiated.
    pub fn set_output(&self, v: Var<'_>) {
        self.inner.borrow_mut().output = Some(v.idx);
    }

    pub fn output_value(&self) -> Option<f64> {
        let t = self.inner.borrow();
        t.output.map(|o| t.vals[o as usize].val)
    }

    /// Re-evaluates every node with new parameter values, in recording order.
    pub fn replay(&self, params: &[f64]) -> Result<()> {
        let mut guard = self.inner.borrow_mut();
        let t = &mut *guard;
        if params.len() != t.params.len() {
            return Err(Error::Argument(format!(
                "replay expects {} parameters, got {}",
                t.params.len(),
                params.len()
            )));
        }
        for i in 0..t.ops.len() {
            let v = match &t.ops[i] {
                Op::Param(k) => Dual2::constant(params[*k]),
                Op::Input => t.vals[i],
                Op::Add(a, b) => t.vals[*a as usize] + t.vals[*b as usize],
                Op::Sub(a, b) => t.vals[*a as usize] - t.vals[*b as usize],
                Op::Mul(a, b) => t.vals[*a as usize] * t.vals[*b as usize],
                Op::Neg(a) => -t.vals[*a as usize],
                Op::AddConst(a) => t.vals[*a as usize] + t.shifts[i],
                Op::MulConst(a, c) => t.vals[*a as usize] * *c,
                Op::Unary(a, f) => unary_forward(t.vals[*a as usize], *f),
                Op::Affine { bias, start, n } => {
                    let mut acc = t.vals[*bias as usize];
                    for k in 0..*n as usize {
                        let w = t.affine_args[*start as usize + 2 * k] as usize;
                        let a = t.affine_args[*start as usize + 2 * k + 1] as usize;
                        acc = acc + t.vals[w] * t.vals[a];
                    }
                    acc
                }
                Op::Extract(a, p) => extract(t.vals[*a as usize], *p),
            };
            t.vals[i] = v;
        }
        Ok(())
    }

    /// One reverse sweep: `∂(output.val)/∂(parameter k)` for every slot.
    pub fn reverse_gradient(&self) -> Result<Vec<f64>> {
        let t = self.inner.borrow();
        let out = t
            .output
            .ok_or_else(|| Error::State("tape has no recorded output".into()))?;
        let mut adj = vec![[0.0f64; 3]; t.ops.len()];
        adj[out as usize][0] = 1.0;
        let mut grad = vec![0.0; t.params.len()];

        for i in (0..=out as usize).rev() {
            let g = adj[i];
            if g == [0.0; 3] {
                continue;
            }
            match &t.ops[i] {
                Op::Param(k) => grad[*k] += g[0],
                Op::Input => {}
                Op::Add(a, b) => {
                    acc(&mut adj[*a as usize], g);
                    acc(&mut adj[*b as usize], g);
                }
                Op::Sub(a, b) => {
                    acc(&mut adj[*a as usize], g);
                    acc(&mut adj[*b as usize], [-g[0], -g[1], -g[2]]);
                }
                Op::Neg(a) => acc(&mut adj[*a as usize], [-g[0], -g[1], -g[2]]),
                Op::AddConst(a) => acc(&mut adj[*a as usize], g),
                Op::MulConst(a, c) => acc(&mut adj[*a as usize], [g[0] * c, g[1] * c, g[2] * c]),
                Op::Mul(a, b) => {
                    let (va, vb) = (t.vals[*a as usize], t.vals[*b as usize]);
                    acc(&mut adj[*a as usize], mul_adjoint(g, vb));
                    acc(&mut adj[*b as usize], mul_adjoint(g, va));
                }
                Op::Unary(a, f) => {
                    let x = t.vals[*a as usize];
                    let [_, f1, f2, f3] = f.eval(x.val);
                    let ga = [
                        g[0] * f1 + g[1] * f2 * x.d1 + g[2] * (f2 * x.d2 + f3 * x.d1 * x.d1),
                        g[1] * f1 + 2.0 * g[2] * f2 * x.d1,
                        g[2] * f1,
                    ];
                    acc(&mut adj[*a as usize], ga);
                }
                Op::Affine { bias, start, n } => {
                    acc(&mut adj[*bias as usize], g);
                    for k in 0..*n as usize {
                        let w = t.affine_args[*start as usize + 2 * k] as usize;
                        let a = t.affine_args[*start as usize + 2 * k + 1] as usize;
                        let (vw, va) = (t.vals[w], t.vals[a]);
                        acc(&mut adj[w], mul_adjoint(g, va));
                        acc(&mut adj[a], mul_adjoint(g, vw));
                    }
                }
                Op::Extract(a, p) => {
                    let slot = match p {
                        Part::Val => 0,
                        Part::D1 => 1,
                        Part::D2 => 2,
                    };
                    adj[*a as usize][slot] += g[0];
                }
            }
        }
        Ok(grad)
    }
}

#[inline]
fn acc(dst: &mut [f64; 3], g: [f64; 3]) {
    dst[0] += g[0];
    dst[1] += g[1];
    dst[2] += g[2];
}

/// Adjoint of `c = a·b` with respect to `a`, given `b`.
#[inline]
fn mul_adjoint(g: [f64; 3], b: Dual2) -> [f64; 3] {
    [
        g[0] * b.val + g[1] * b.d1 + g[2] * b.d2,
        g[1] * b.val + 2.0 * g[2] * b.d1,
        g[2] * b.val,
    ]
}

fn unary_forward(x: Dual2, f: Unary) -> Dual2 {
    let [f0, f1, f2, _] = f.eval(x.val);
    x.chain(f0, f1, f2)
}

fn extract(x: Dual2, p: Part) -> Dual2 {
    Dual2::constant(match p {
        Part::Val => x.val,
        Part::D1 => x.d1,
        Part::D2 => x.d2,
    })
}

impl<'t> Var<'t> {
    pub fn jet(&self) -> Dual2 {
        self.tape.inner.borrow().vals[self.idx as usize]
    }

    fn jet_of(&self, other: Var<'t>) -> Dual2 {
        self.tape.inner.borrow().vals[other.idx as usize]
    }

    fn unary(self, f: Unary) -> Self {
        let x = self.jet();
        self.tape.push(Op::Unary(self.idx, f), unary_forward(x, f), 0.0)
    }

    fn part(self, p: Part) -> Self {
        self.tape.push(Op::Extract(self.idx, p), extract(self.jet(), p), 0.0)
    }

    /// The primal value as a plain real node.
    pub fn val(self) -> Self {
        self.part(Part::Val)
    }

    /// The first directional derivative as a plain real node.
    pub fn d1(self) -> Self {
        self.part(Part::D1)
    }

    /// The second directional derivative as a plain real node.
    pub fn d2(self) -> Self {
        self.part(Part::D2)
    }

    pub fn tape(&self) -> &'t GradTape {
        self.tape
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let v = self.jet() + self.jet_of(o);
        self.tape.push(Op::Add(self.idx, o.idx), v, 0.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let v = self.jet() - self.jet_of(o);
        self.tape.push(Op::Sub(self.idx, o.idx), v, 0.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let v = self.jet() * self.jet_of(o);
        self.tape.push(Op::Mul(self.idx, o.idx), v, 0.0)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    fn neg(self) -> Self {
        let v = -self.jet();
        self.tape.push(Op::Neg(self.idx), v, 0.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        let v = self.jet() + c;
        self.tape.push(Op::AddConst(self.idx), v, c)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Self;
    fn sub(self, c: f64) -> Self {
        self + (-c)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        let v = self.jet() * c;
        self.tape.push(Op::MulConst(self.idx, c), v, 0.0)
    }
}

impl<'t> Scalar for Var<'t> {
    fn lift(&self, c: f64) -> Self {
        self.tape.constant(c)
    }
    fn value(&self) -> f64 {
        self.jet().val
    }
    fn tanh(self) -> Self {
        self.unary(Unary::Tanh)
    }
    fn sin(self) -> Self {
        self.unary(Unary::Sin)
    }
    fn cos(self) -> Self {
        self.unary(Unary::Cos)
    }
    fn exp(self) -> Self {
        self.unary(Unary::Exp)
    }
    fn recip(self) -> Self {
        self.unary(Unary::Recip)
    }
    fn square(self) -> Self {
        self.unary(Unary::Square)
    }
    fn affine(bias: Self, weights: &[Self], inputs: &[Self]) -> Self {
        bias.tape.affine(weights, inputs, bias)
    }
}
