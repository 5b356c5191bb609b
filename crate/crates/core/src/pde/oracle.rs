//! Hermetic reference solutions for the two problems without closed forms.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::reference::LabeledSet;
use super::BURGERS_NU;
use crate::error::{arg, Result};

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Burgers solution on `nx` points of `[-1, 1]` and `nt` times `0, 0.01, …`
/// via the Cole–Hopf integral, evaluated by the trapezoid rule with
/// `quad_nodes` nodes and a max-shifted exponent.
///
/// Rows are `(t, x, u)`, time-major.
pub fn burgers_cole_hopf(nx: usize, nt: usize, quad_nodes: usize) -> Result<LabeledSet> {
    if nx < 2 || nt < 1 || quad_nodes < 16 {
        return arg("Cole-Hopf grid needs nx >= 2, nt >= 1, quad_nodes >= 16");
    }
    let xs = linspace(-1.0, 1.0, nx);
    let scale = 1.0 / (2.0 * PI * BURGERS_NU);
    let mut set = LabeledSet::new(2, 1);
    let mut expo = vec![0.0; quad_nodes];
    let mut sines = vec![0.0; quad_nodes];
    for it in 0..nt {
        let t = 0.01 * it as f64;
        for &x in &xs {
            let u = if t == 0.0 {
                -(PI * x).sin()
            } else {
                let four_nu_t = 4.0 * BURGERS_NU * t;
                let half = (140.0 * four_nu_t).sqrt().min(3.0);
                let h = 2.0 * half / (quad_nodes - 1) as f64;
                let mut top = f64::NEG_INFINITY;
                for i in 0..quad_nodes {
                    let eta = -half + h * i as f64;
                    let y = PI * (x - eta);
                    expo[i] = -scale * y.cos() - eta * eta / four_nu_t;
                    sines[i] = y.sin();
                    top = top.max(expo[i]);
                }
                let (mut num, mut den) = (0.0, 0.0);
                for i in 0..quad_nodes {
                    let end = if i == 0 || i == quad_nodes - 1 { 0.5 } else { 1.0 };
                    let w = end * (expo[i] - top).exp();
                    num += w * sines[i];
                    den += w;
                }
                -num / den
            };
            set.push(&[t, x], &[u]);
        }
    }
    Ok(set)
}

/// Focusing Schrödinger solution with `h(0, x) = 2 sech x` on `nx` periodic
/// points of `[-5, 5)` and `nt` times spanning `[0, π/2]`, by Strang
/// split-step Fourier with `substeps` steps between output times.
///
/// Rows are `(t, x, u, v)` with `h = u + iv`, time-major.
pub fn schrodinger_split_step(nx: usize, nt: usize, substeps: usize) -> Result<LabeledSet> {
    if nx < 4 || nt < 2 || substeps < 1 {
        return arg("split-step grid needs nx >= 4, nt >= 2, substeps >= 1");
    }
    let length = 10.0;
    let dx = length / nx as f64;
    let xs: Vec<f64> = (0..nx).map(|j| -5.0 + dx * j as f64).collect();
    let times = linspace(0.0, PI / 2.0, nt);
    let dt = (times[1] - times[0]) / substeps as f64;

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(nx);
    let inv = planner.plan_fft_inverse(nx);
    let half_linear: Vec<Complex64> = (0..nx)
        .map(|j| {
            let m = if j <= nx / 2 { j as f64 } else { j as f64 - nx as f64 };
            let k = 2.0 * PI * m / length;
            Complex64::from_polar(1.0, -0.25 * k * k * dt)
        })
        .collect();
    let norm = 1.0 / nx as f64;
    let linear = |h: &mut [Complex64]| {
        fwd.process(h);
        for (c, f) in h.iter_mut().zip(&half_linear) {
            *c *= f * norm;
        }
        inv.process(h);
    };

    let mut h: Vec<Complex64> = xs.iter().map(|x| Complex64::new(2.0 / x.cosh(), 0.0)).collect();
    let mut set = LabeledSet::new(2, 2);
    for (it, &t) in times.iter().enumerate() {
        if it > 0 {
            for _ in 0..substeps {
                linear(&mut h);
                for c in h.iter_mut() {
                    *c *= Complex64::from_polar(1.0, c.norm_sqr() * dt);
                }
                linear(&mut h);
            }
        }
        for (x, c) in xs.iter().zip(&h) {
            set.push(&[t, *x], &[c.re, c.im]);
        }
    }
    Ok(set)
}
