//! Truncated Taylor series in one variable with complex coefficients.
//!
//! A `Jet` of length `n` holds `f(s0), f'(s0), f''(s0)/2!, …` up to order
//! `n − 1`. Arithmetic truncates to the shorter operand; differentiation
//! drops one order. This supplies exact field derivatives along a line for
//! the charge recursions.

use std::ops::{Add, Mul, Neg, Sub};

use crate::matcore::{C64, ONE, ZERO};

pub const JET_MAX: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [C64; JET_MAX],
    len: usize,
}

impl Jet {
    pub fn constant(v: C64, len: usize) -> Jet {
        assert!((1..=JET_MAX).contains(&len), "jet length {len} out of range");
        let mut c = [ZERO; JET_MAX];
        c[0] = v;
        Jet { c, len }
    }

    pub fn zero(len: usize) -> Jet {
        Jet::constant(ZERO, len)
    }

    /// The affine function `s ↦ value + slope·(s − s0)`.
    pub fn variable(value: C64, slope: C64, len: usize) -> Jet {
        let mut j = Jet::constant(value, len);
        if len > 1 {
            j.c[1] = slope;
        }
        j
    }

    pub fn from_coeffs(coeffs: &[C64]) -> Jet {
        let mut j = Jet::zero(coeffs.len());
        j.c[..coeffs.len()].copy_from_slice(coeffs);
        j
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self) -> C64 {
        self.c[0]
    }

    /// Taylor coefficient of order k.
    pub fn coeff(&self, k: usize) -> C64 {
        if k < self.len {
            self.c[k]
        } else {
            ZERO
        }
    }

    /// k-th derivative at the expansion point.
    pub fn derivative_value(&self, k: usize) -> C64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeff(k) * fact
    }

    pub fn truncate(&self, len: usize) -> Jet {
        let mut j = *self;
        j.len = len.min(self.len).max(1);
        for k in j.len..JET_MAX {
            j.c[k] = ZERO;
        }
        j
    }

    /// Derivative; the result is one order shorter (never below length 1).
    pub fn deriv(&self) -> Jet {
        let len = (self.len - 1).max(1);
        let mut c = [ZERO; JET_MAX];
        for k in 0..self.len - 1 {
            c[k] = self.c[k + 1] * (k + 1) as f64;
        }
        Jet { c, len }
    }

    pub fn scale(&self, s: C64) -> Jet {
        let mut j = *self;
        j.c[..j.len].iter_mut().for_each(|z| *z *= s);
        j
    }

    pub fn scale_re(&self, s: f64) -> Jet {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add_const(&self, s: C64) -> Jet {
        let mut j = *self;
        j.c[0] += s;
        j
    }

    pub fn recip(&self) -> Jet {
        let n = self.len;
        let mut r = [ZERO; JET_MAX];
        r[0] = ONE / self.c[0];
        for k in 1..n {
            let mut s = ZERO;
            for j in 1..=k {
                s += self.c[j] * r[k - j];
            }
            r[k] = -s * r[0];
        }
        Jet { c: r, len: n }
    }

    pub fn div(&self, o: &Jet) -> Jet {
        *self * o.recip()
    }

    pub fn exp(&self) -> Jet {
        let n = self.len;
        let mut y = [ZERO; JET_MAX];
        y[0] = self.c[0].exp();
        for k in 1..n {
            let mut s = ZERO;
            for j in 1..=k {
                s += self.c[j] * y[k - j] * j as f64;
            }
            y[k] = s / k as f64;
        }
        Jet { c: y, len: n }
    }

    /// Antiderivative with prescribed value at the expansion point.
    pub fn integrate(&self, value: C64) -> Jet {
        let len = (self.len + 1).min(JET_MAX);
        let mut c = [ZERO; JET_MAX];
        c[0] = value;
        for k in 1..len {
            c[k] = self.c[k - 1] / k as f64;
        }
        Jet { c, len }
    }

    /// arctan, for jets with real-valued base point.
    pub fn atan(&self) -> Jet {
        let d = self.deriv().div(&(*self * *self).add_const(ONE));
        let mut r = d.integrate(self.c[0].atan());
        r = r.truncate(self.len);
        r
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let len = self.len.min(o.len);
        let mut c = [ZERO; JET_MAX];
        for k in 0..len {
            c[k] = self.c[k] + o.c[k];
        }
        Jet { c, len }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale_re(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let len = self.len.min(o.len);
        let mut c = [ZERO; JET_MAX];
        for k in 0..len {
            let mut s = ZERO;
            for j in 0..=k {
                s += self.c[j] * o.c[k - j];
            }
            c[k] = s;
        }
        Jet { c, len }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn exp_of_linear_is_exponential_series() {
        let s = Jet::variable(re(0.3), re(2.0), 8);
        let e = s.exp();
        for k in 0..8 {
            let exact = 0.3f64.exp() * 2f64.powi(k as i32);
            assert!((e.derivative_value(k) - re(exact)).norm() < 1e-12 * exact);
        }
    }

    #[test]
    fn atan_derivatives_match_closed_forms() {
        let x0 = 0.7;
        let s = Jet::variable(re(x0), re(1.0), 6);
        let a = s.atan();
        let d1 = 1.0 / (1.0 + x0 * x0);
        let d2 = -2.0 * x0 / (1.0 + x0 * x0).powi(2);
        let d3 = (6.0 * x0 * x0 - 2.0) / (1.0 + x0 * x0).powi(3);
        assert!((a.value() - re(x0.atan())).norm() < 1e-15);
        assert!((a.derivative_value(1) - re(d1)).norm() < 1e-14);
        assert!((a.derivative_value(2) - re(d2)).norm() < 1e-14);
        assert!((a.derivative_value(3) - re(d3)).norm() < 1e-13);
        assert_eq!(a.len(), 6);
    }

    #[test]
    fn recip_inverts_product() {
        let f = Jet::from_coeffs(&[re(2.0), re(-1.0), C64::new(0.5, 0.2), re(3.0)]);
        let p = f * f.recip();
        assert!((p.value() - ONE).norm() < 1e-15);
        for k in 1..4 {
            assert!(p.coeff(k).norm() < 1e-14);
        }
    }

    #[test]
    fn deriv_drops_one_order() {
        let f = Jet::from_coeffs(&[re(1.0), re(2.0), re(3.0)]);
        let d = f.deriv();
        assert_eq!(d.len(), 2);
        assert_eq!(d.coeff(0), re(2.0));
        assert_eq!(d.coeff(1), re(6.0));
    }
}
