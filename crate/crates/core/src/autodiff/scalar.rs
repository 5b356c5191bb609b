use std::ops::{Add, Div, Mul, Neg, Sub};

/// Numeric type the network, the PDE operators and the analytic solutions
/// are written against. Implemented by `f64`, [`Dual2`](super::Dual2) and
/// tape variables [`Var`](super::Var).
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    /// A constant living in the same context as `self` (same tape, etc.).
    fn lift(&self, c: f64) -> Self;
    /// Primal value.
    fn value(&self) -> f64;
    fn tanh(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn recip(self) -> Self;

    fn square(self) -> Self {
        self * self
    }

    fn sigmoid(self) -> Self {
        ((-self).exp() + 1.0).recip()
    }

    /// `bias + Σ weights[k]·inputs[k]`, accumulated left to right.
    fn affine(bias: Self, weights: &[Self], inputs: &[Self]) -> Self {
        weights.iter().zip(inputs).fold(bias, |acc, (&w, &a)| acc + w * a)
    }
}

impl Scalar for f64 {
    #[inline]
    fn lift(&self, c: f64) -> Self {
        c
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn recip(self) -> Self {
        f64::recip(self)
    }
}
