//! Batched jet propagation through an MLP.
//!
//! A chunk of `P` points is pushed through the network as a set of column
//! blocks: the value block, and for every seeded input coordinate a
//! first-derivative block and optionally a second-derivative block. Each
//! affine layer is one matrix product over all blocks at once; only the
//! activation couples the blocks. The backward pass is the exact adjoint of
//! that computation, so parameter gradients see the input derivatives.
//!
//! Matrices are row-major with `rows = layer width` and
//! `cols = blocks · P`; block `b` of point `p` lives at column `b·P + p`.

use super::spec::{Activation, LayerShape, MlpSpec};

/// Which input-coordinate derivatives to propagate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JetPlan {
    dirs: Vec<(usize, bool)>,
}

impl JetPlan {
    pub fn value_only() -> Self {
        Self::default()
    }

    /// `dirs[k] = (coordinate, needs second derivative)`.
    pub fn new(dirs: Vec<(usize, bool)>) -> Self {
        Self { dirs }
    }

    /// Every coordinate with first and second derivatives.
    pub fn full(input_dim: usize) -> Self {
        Self::new((0..input_dim).map(|c| (c, true)).collect())
    }

    pub fn dirs(&self) -> &[(usize, bool)] {
        &self.dirs
    }

    pub fn blocks(&self) -> usize {
        1 + self.dirs.iter().map(|&(_, s)| 1 + s as usize).sum::<usize>()
    }

    /// Block holding `∂/∂x_coord`, if propagated.
    pub fn first_block(&self, coord: usize) -> Option<usize> {
        let mut b = 1;
        for &(c, second) in &self.dirs {
            if c == coord {
                return Some(b);
            }
            b += 1 + second as usize;
        }
        None
    }

    /// Block holding `∂²/∂x_coord²`, if propagated.
    pub fn second_block(&self, coord: usize) -> Option<usize> {
        let mut b = 1;
        for &(c, second) in &self.dirs {
            if c == coord {
                return second.then_some(b + 1);
            }
            b += 1 + second as usize;
        }
        None
    }

    /// `(first block, optional second block)` per direction, in order.
    fn layout(&self) -> Vec<(usize, Option<usize>)> {
        let mut b = 1;
        self.dirs
            .iter()
            .map(|&(_, second)| {
                let e = (b, second.then_some(b + 1));
                b += 1 + second as usize;
                e
            })
            .collect()
    }
}

/// Network outputs for a chunk: `data[(k · blocks + b) · P + p]`.
#[derive(Clone, Debug)]
pub struct JetOutput {
    pub out_dim: usize,
    pub blocks: usize,
    pub points: usize,
    pub data: Vec<f64>,
}

impl JetOutput {
    #[inline]
    pub fn get(&self, k: usize, block: usize, p: usize) -> f64 {
        self.data[(k * self.blocks + block) * self.points + p]
    }

    #[inline]
    pub fn index(&self, k: usize, block: usize, p: usize) -> usize {
        (k * self.blocks + block) * self.points + p
    }
}

/// Reusable forward/backward state for one network shape.
pub struct BatchEngine {
    layers: Vec<LayerShape>,
    output_activation: Activation,
    input_dim: usize,
    plan: JetPlan,
    points: usize,
    /// Post-activation jets; `acts[0]` is the input.
    acts: Vec<Vec<f64>>,
    /// Pre-activation jets per layer.
    pre: Vec<Vec<f64>>,
    grad_a: Vec<f64>,
    grad_z: Vec<f64>,
}

impl BatchEngine {
    pub fn new(spec: &MlpSpec) -> Self {
        let layers = spec.layers();
        Self {
            acts: vec![Vec::new(); layers.len() + 1],
            pre: vec![Vec::new(); layers.len()],
            layers,
            output_activation: spec.output_activation,
            input_dim: spec.input_dim,
            plan: JetPlan::value_only(),
            points: 0,
            grad_a: Vec::new(),
            grad_z: Vec::new(),
        }
    }

    pub fn plan(&self) -> &JetPlan {
        &self.plan
    }

    /// Propagates `points` (row-major, `P × input_dim`) through the network.
    pub fn forward(&mut self, params: &[f64], points: &[f64], plan: &JetPlan) -> JetOutput {
        let d = self.input_dim;
        assert_eq!(points.len() % d, 0, "point buffer is not a multiple of the input width");
        let p = points.len() / d;
        let blocks = plan.blocks();
        let cols = blocks * p;
        self.plan = plan.clone();
        self.points = p;

        let input = &mut self.acts[0];
        input.clear();
        input.resize(d * cols, 0.0);
        for (i, row) in input.chunks_exact_mut(cols).enumerate() {
            for (q, x) in points.chunks_exact(d).enumerate() {
                row[q] = x[i];
            }
        }
        for (k, &(first, _)) in plan.layout().iter().enumerate() {
            let coord = plan.dirs[k].0;
            let row = &mut input[coord * cols..(coord + 1) * cols];
            row[first * p..(first + 1) * p].fill(1.0);
        }

        let layout = plan.layout();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = self.acts.split_at_mut(l + 1);
            let a_in = &before[l];
            let z = &mut self.pre[l];
            z.clear();
            z.resize(layer.fan_out * cols, 0.0);
            gemm(
                layer.fan_out,
                layer.fan_in,
                cols,
                &params[layer.weight_range()],
                (layer.fan_in as isize, 1),
                a_in,
                (cols as isize, 1),
                0.0,
                z,
                (cols as isize, 1),
            );
            let bias = &params[layer.bias_range()];
            for (o, row) in z.chunks_exact_mut(cols).enumerate() {
                row[..p].iter_mut().for_each(|v| *v += bias[o]);
            }

            let a_out = &mut after[0];
            a_out.clear();
            a_out.resize(layer.fan_out * cols, 0.0);
            let act = if l < last { Some(Act::Tanh) } else { Act::from_head(self.output_activation) };
            match act {
                None => a_out.copy_from_slice(z),
                Some(act) => {
                    for (zr, ar) in z.chunks_exact(cols).zip(a_out.chunks_exact_mut(cols)) {
                        for q in 0..p {
                            let [f0, f1, f2, _] = act.derivs(act.apply(zr[q]));
                            ar[q] = f0;
                            for &(b1, b2) in &layout {
                                let z1 = zr[b1 * p + q];
                                ar[b1 * p + q] = f1 * z1;
                                if let Some(b2) = b2 {
                                    ar[b2 * p + q] = f1 * zr[b2 * p + q] + f2 * z1 * z1;
                                }
                            }
                        }
                    }
                }
            }
        }

        let out = &self.acts[self.layers.len()];
        let out_dim = self.layers[last].fan_out;
        JetOutput { out_dim, blocks, points: p, data: out.clone() }
    }

    /// Accumulates `∂(Σ seed·output)/∂params` into `grad`, using the state of
    /// the most recent [`forward`](Self::forward). `seed` has the layout of
    /// [`JetOutput::data`]. Returns the input-coordinate gradient of the
    /// value block (`P × input_dim`, row-major) when `want_input` is set.
    pub fn backward(
        &mut self,
        params: &[f64],
        seed: &[f64],
        grad: &mut [f64],
        want_input: bool,
    ) -> Option<Vec<f64>> {
        let p = self.points;
        let cols = self.plan.blocks() * p;
        let layout = self.plan.layout();
        let last = self.layers.len() - 1;
        assert_eq!(seed.len(), self.layers[last].fan_out * cols, "seed shape mismatch");

        self.grad_a.clear();
        self.grad_a.extend_from_slice(seed);

        for l in (0..self.layers.len()).rev() {
            let layer = self.layers[l];
            let act = if l < last { Some(Act::Tanh) } else { Act::from_head(self.output_activation) };
            let z = &self.pre[l];
            let a_out = &self.acts[l + 1];
            let gz = &mut self.grad_z;
            gz.clear();
            gz.resize(layer.fan_out * cols, 0.0);
            match act {
                None => gz.copy_from_slice(&self.grad_a),
                Some(act) => {
                    for r in 0..layer.fan_out {
                        let zr = &z[r * cols..(r + 1) * cols];
                        let ar = &a_out[r * cols..(r + 1) * cols];
                        let ga = &self.grad_a[r * cols..(r + 1) * cols];
                        let gzr = &mut gz[r * cols..(r + 1) * cols];
                        for q in 0..p {
                            let [_, f1, f2, f3] = act.derivs(ar[q]);
                            let mut gv = ga[q] * f1;
                            for &(b1, b2) in &layout {
                                let z1 = zr[b1 * p + q];
                                let g1 = ga[b1 * p + q];
                                gv += g1 * f2 * z1;
                                let mut gz1 = g1 * f1;
                                if let Some(b2) = b2 {
                                    let g2 = ga[b2 * p + q];
                                    gv += g2 * (f2 * zr[b2 * p + q] + f3 * z1 * z1);
                                    gz1 += 2.0 * g2 * f2 * z1;
                                    gzr[b2 * p + q] = g2 * f1;
                                }
                                gzr[b1 * p + q] = gz1;
                            }
                            gzr[q] = gv;
                        }
                    }
                }
            }

            // dW += dZ · Aᵀ
            let a_in = &self.acts[l];
            gemm(
                layer.fan_out,
                cols,
                layer.fan_in,
                gz,
                (cols as isize, 1),
                a_in,
                (1, cols as isize),
                1.0,
                &mut grad[layer.weight_range()],
                (layer.fan_in as isize, 1),
            );
            let gb = &mut grad[layer.bias_range()];
            for (o, row) in gz.chunks_exact(cols).enumerate() {
                gb[o] += row[..p].iter().sum::<f64>();
            }

            if l > 0 || want_input {
                // dA_prev = Wᵀ · dZ
                self.grad_a.clear();
                self.grad_a.resize(layer.fan_in * cols, 0.0);
                gemm(
                    layer.fan_in,
                    layer.fan_out,
                    cols,
                    &params[layer.weight_range()],
                    (1, layer.fan_in as isize),
                    gz,
                    (cols as isize, 1),
                    0.0,
                    &mut self.grad_a,
                    (cols as isize, 1),
                );
            }
        }

        want_input.then(|| {
            let d = self.input_dim;
            let mut gx = vec![0.0; p * d];
            for i in 0..d {
                for q in 0..p {
                    gx[q * d + i] = self.grad_a[i * cols + q];
                }
            }
            gx
        })
    }
}

#[derive(Clone, Copy)]
enum Act {
    Tanh,
    Sigmoid,
}

impl Act {
    fn from_head(a: Activation) -> Option<Self> {
        match a {
            Activation::Linear => None,
            Activation::Sigmoid => Some(Act::Sigmoid),
        }
    }

    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Act::Tanh => x.tanh(),
            Act::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        }
    }

    /// `(f, f', f'', f''')` expressed through the activated value `y = f(x)`.
    #[inline]
    fn derivs(self, y: f64) -> [f64; 4] {
        match self {
            Act::Tanh => {
                let s = 1.0 - y * y;
                [y, s, -2.0 * y * s, -2.0 * s * (1.0 - 3.0 * y * y)]
            }
            Act::Sigmoid => {
                let s1 = y * (1.0 - y);
                let s2 = s1 * (1.0 - 2.0 * y);
                [y, s1, s2, s2 * (1.0 - 2.0 * y) - 2.0 * s1 * s1]
            }
        }
    }
}

/// `C = A·B + beta·C` with explicit (row, column) strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (isize, isize),
    b: &[f64],
    (rsb, csb): (isize, isize),
    beta: f64,
    c: &mut [f64],
    (rsc, csc): (isize, isize),
) {
    if m == 0 || n == 0 {
        return;
    }
    let span = |rows: usize, cols: usize, rs: isize, cs: isize| {
        if rows == 0 || cols == 0 {
            0
        } else {
            (rows - 1) as isize * rs + (cols - 1) as isize * cs + 1
        }
    };
    assert!(a.len() as isize >= span(m, k, rsa, csa));
    assert!(b.len() as isize >= span(k, n, rsb, csb));
    assert!(c.len() as isize >= span(m, n, rsc, csc));
    // SAFETY: the asserts above keep every strided access inside the slices,
    // and `c` is uniquely borrowed.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            rsc,
            csc,
        );
    }
}
