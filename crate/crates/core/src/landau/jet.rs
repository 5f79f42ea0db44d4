//! Truncated Taylor arithmetic for exact derivatives in one variable.
//!
//! A [`Jet`] stores `f(x0 + e) = c0 + c1 e + ... + c4 e^4`. Free energies are
//! written once against [`Scalar`] and evaluated either on plain `f64` or on a
//! jet seeded with `x0 + e`, which yields the first four derivatives in `m`
//! without finite-difference noise.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const ORDER: usize = 4;
const N: usize = ORDER + 1;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln_1p(self) -> Self;
    fn asinh(self) -> Self;
    /// `|x|`, differentiated on the side selected by the sign of the value.
    fn abs(self) -> Self;

    fn powi(self, n: u32) -> Self {
        let mut out = Self::constant(1.0);
        for _ in 0..n {
            out = out * self;
        }
        out
    }
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln_1p(self) -> Self {
        f64::ln_1p(self)
    }
    fn asinh(self) -> Self {
        f64::asinh(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [f64; N],
}

impl Jet {
    /// The independent variable at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x0;
        c[1] = 1.0;
        Self { c }
    }

    /// `d^k f / dx^k` for `k = 0..=4`.
    pub fn derivatives(&self) -> [f64; N] {
        let mut out = self.c;
        let mut factorial = 1.0;
        for (k, d) in out.iter_mut().enumerate().skip(1) {
            factorial *= k as f64;
            *d *= factorial;
        }
        out
    }

    /// `f(self)` given `f^(k)(c0) / k!` for `k = 0..=4`.
    fn compose(self, taylor: [f64; N]) -> Self {
        let mut delta = self;
        delta.c[0] = 0.0;
        let mut out = Self::constant(taylor[0]);
        let mut power = Self::constant(1.0);
        for &t in &taylor[1..] {
            power = power * delta;
            out = out + power * t;
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for a in &mut self.c {
            *a = -*a;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut c = [0.0; N];
        for i in 0..N {
            for j in 0..N - i {
                c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Jet { c }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let mut q = [0.0; N];
        for k in 0..N {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= rhs.c[j] * q[k - j];
            }
            q[k] = acc / rhs.c[0];
        }
        Jet { c: q }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for a in &mut self.c {
            *a *= rhs;
        }
        self
    }
}

impl Scalar for Jet {
    fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Self { c }
    }

    fn value(&self) -> f64 {
        self.c[0]
    }

    fn sqrt(self) -> Self {
        let x = self.c[0];
        if x <= 0.0 {
            // only reached when the argument is identically zero
            return Self::constant(0.0);
        }
        let r = x.sqrt();
        self.compose([
            r,
            0.5 / r,
            -0.25 / (r * x) / 2.0,
            0.375 / (r * x * x) / 6.0,
            -0.9375 / (r * x * x * x) / 24.0,
        ])
    }

    fn exp(self) -> Self {
        let e = self.c[0].exp();
        self.compose([e, e, e / 2.0, e / 6.0, e / 24.0])
    }

    fn ln_1p(self) -> Self {
        let x = self.c[0];
        let g = 1.0 / (1.0 + x);
        self.compose([x.ln_1p(), g, -g * g / 2.0, g * g * g / 3.0, -g.powi(4) / 4.0])
    }

    fn asinh(self) -> Self {
        let x = self.c[0];
        let q = 1.0 + x * x;
        let g = q.sqrt().recip();
        self.compose([
            x.asinh(),
            g,
            -x * g / q / 2.0,
            (2.0 * x * x - 1.0) * g / (q * q) / 6.0,
            (9.0 * x - 6.0 * x * x * x) * g / (q * q * q) / 24.0,
        ])
    }

    fn abs(self) -> Self {
        if self.c[0] < 0.0 {
            -self
        } else {
            self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; N], b: [f64; N], tol: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol * y.abs().max(1.0), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn polynomial_derivatives() {
        let x = Jet::variable(2.0);
        let f = x.powi(4) * 3.0 + x.powi(3) * -2.0;
        // 3x^4 - 2x^3 at 2: 32, 72, 120, 132, 72
        close(f.derivatives(), [32.0, 72.0, 120.0, 132.0, 72.0], 1e-14);
    }

    #[test]
    fn elementary_functions() {
        let x0 = 0.7;
        let x = Jet::variable(x0);
        let s = x0.sqrt();
        close(
            x.sqrt().derivatives(),
            [
                s,
                0.5 / s,
                -0.25 / (s * x0),
                0.375 / (s * x0 * x0),
                -0.9375 / (s * x0.powi(3)),
            ],
            1e-13,
        );
        let e = x0.exp();
        close(x.exp().derivatives(), [e; 5], 1e-13);
        let g = 1.0 / (1.0 + x0);
        close(
            x.ln_1p().derivatives(),
            [x0.ln_1p(), g, -g * g, 2.0 * g.powi(3), -6.0 * g.powi(4)],
            1e-13,
        );
        // asinh' = (1 + x^2)^(-1/2), checked through the identity sinh(asinh x) = x
        let y = x.asinh();
        let sinh = (y.exp() - (-y).exp()) * 0.5;
        close(sinh.derivatives(), Jet::variable(x0).derivatives(), 1e-13);
    }

    #[test]
    fn division_inverts_multiplication() {
        let x = Jet::variable(1.3);
        let a = x.powi(2) + 1.0;
        let b = x.exp();
        close(((a * b) / b).derivatives(), a.derivatives(), 1e-13);
    }

    #[test]
    fn abs_follows_sign() {
        let x = Jet::variable(-0.5);
        assert_eq!(x.abs().derivatives()[1], -1.0);
        assert_eq!(Jet::variable(0.5).abs().derivatives()[1], 1.0);
    }
}
