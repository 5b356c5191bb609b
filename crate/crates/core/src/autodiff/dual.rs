use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Scalar;
use crate::error::{arg, Result};

/// Truncated second-order Taylor number: value, first and second derivative
/// along a single seeded input direction.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual2 {
    pub val: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Dual2 {
    pub const fn new(val: f64, d1: f64, d2: f64) -> Self {
        Self { val, d1, d2 }
    }

    pub const fn constant(val: f64) -> Self {
        Self { val, d1: 0.0, d2: 0.0 }
    }

    pub const fn seeded(val: f64) -> Self {
        Self { val, d1: 1.0, d2: 0.0 }
    }

    /// Applies a scalar function given `f(val)`, `f'(val)` and `f''(val)`.
    #[inline]
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            val: f0,
            d1: f1 * self.d1,
            d2: f1 * self.d2 + f2 * self.d1 * self.d1,
        }
    }
}

/// Lifts a point to jets with coordinate `j` seeded.
pub fn lift_seeded(x: &[f64], j: usize) -> Result<Vec<Dual2>> {
    if j >= x.len() {
        return arg(format!("seed index {j} out of range for dimension {}", x.len()));
    }
    Ok(x.iter()
        .enumerate()
        .map(|(i, &v)| if i == j { Dual2::seeded(v) } else { Dual2::constant(v) })
        .collect())
}

/// `tanh` on a jet.
#[inline]
pub fn dual_tanh(a: Dual2) -> Dual2 {
    let t = a.val.tanh();
    let s = 1.0 - t * t;
    a.chain(t, s, -2.0 * t * s)
}

impl Add for Dual2 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.val + o.val, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Dual2 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.val - o.val, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Dual2 {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.val * o.val,
            self.d1 * o.val + self.val * o.d1,
            self.d2 * o.val + 2.0 * self.d1 * o.d1 + self.val * o.d2,
        )
    }
}

impl Div for Dual2 {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Neg for Dual2 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.val, -self.d1, -self.d2)
    }
}

impl Add<f64> for Dual2 {
    type Output = Self;
    #[inline]
    fn add(self, c: f64) -> Self {
        Self::new(self.val + c, self.d1, self.d2)
    }
}

impl Sub<f64> for Dual2 {
    type Output = Self;
    #[inline]
    fn sub(self, c: f64) -> Self {
        Self::new(self.val - c, self.d1, self.d2)
    }
}

impl Mul<f64> for Dual2 {
    type Output = Self;
    #[inline]
    fn mul(self, c: f64) -> Self {
        Self::new(self.val * c, self.d1 * c, self.d2 * c)
    }
}

impl Scalar for Dual2 {
    fn lift(&self, c: f64) -> Self {
        Dual2::constant(c)
    }
    fn value(&self) -> f64 {
        self.val
    }
    fn tanh(self) -> Self {
        dual_tanh(self)
    }
    fn sin(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(self) -> Self {
        let e = self.val.exp();
        self.chain(e, e, e)
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.val;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
    fn square(self) -> Self {
        self.chain(self.val * self.val, 2.0 * self.val, 2.0)
    }
}
