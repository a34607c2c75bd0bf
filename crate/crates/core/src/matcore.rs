//! Complex 2×2 and 4×4 matrices.
//!
//! Kronecker products use the row-major block convention
//! `(a ⊗ b)[(i,k),(j,l)] = a[i][j] · b[k][l]`, i.e. 4×4 index `2i + k`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Below this |μ| the 2×2 exponential switches to its Taylor series.
const EXPM_SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mat2 {
    pub m: [[C64; 2]; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mat4 {
    pub m: [[C64; 4]; 4],
}

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2::new(a, ZERO, ZERO, d)
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Inverse via the adjugate. Returns `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let [[a, b], [c, e]] = self.m;
        Some(Mat2::new(e, -b, -c, a).scale(d.inv()))
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let [[a, b], [c, d]] = self.m;
        Mat2::new(s * a, s * b, s * c, s * d)
    }

    pub fn scale_re(&self, s: f64) -> Mat2 {
        self.scale(C64::new(s, 0.0))
    }

    pub fn dagger(&self) -> Mat2 {
        let [[a, b], [c, d]] = self.m;
        Mat2::new(a.conj(), c.conj(), b.conj(), d.conj())
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.is_finite())
    }

    /// Diagonal part.
    pub fn diagonal(&self) -> Mat2 {
        Mat2::diag(self.m[0][0], self.m[1][1])
    }

    /// Off-diagonal part.
    pub fn off_diagonal(&self) -> Mat2 {
        Mat2::new(ZERO, self.m[0][1], self.m[1][0], ZERO)
    }
}

impl Default for Mat2 {
    fn default() -> Self {
        Mat2::zero()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut r = self;
        r += o;
        r
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        for i in 0..2 {
            for j in 0..2 {
                self.m[i][j] += o.m[i][j];
            }
        }
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale_re(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.m;
        let b = &o.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<Mat2> for C64 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        o.scale(self)
    }
}

impl Mul<Mat2> for f64 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        o.scale_re(self)
    }
}

impl Mat4 {
    pub fn zero() -> Self {
        Mat4 { m: [[ZERO; 4]; 4] }
    }

    pub fn identity() -> Self {
        let mut r = Mat4::zero();
        for i in 0..4 {
            r.m[i][i] = ONE;
        }
        r
    }

    pub fn scale(&self, s: C64) -> Mat4 {
        let mut r = *self;
        r.m.iter_mut().flatten().for_each(|z| *z *= s);
        r
    }

    pub fn norm(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.is_finite())
    }
}

impl Default for Mat4 {
    fn default() -> Self {
        Mat4::zero()
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, o: Mat4) -> Mat4 {
        let mut r = self;
        r += o;
        r
    }
}

impl AddAssign for Mat4 {
    fn add_assign(&mut self, o: Mat4) {
        for i in 0..4 {
            for j in 0..4 {
                self.m[i][j] += o.m[i][j];
            }
        }
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, o: Mat4) -> Mat4 {
        self + o.scale(C64::new(-1.0, 0.0))
    }
}

impl Neg for Mat4 {
    type Output = Mat4;
    fn neg(self) -> Mat4 {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, o: Mat4) -> Mat4 {
        let mut r = Mat4::zero();
        for i in 0..4 {
            for k in 0..4 {
                let a = self.m[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..4 {
                    r.m[i][j] += a * o.m[k][j];
                }
            }
        }
        r
    }
}

/// Pauli matrix σ_k for k ∈ {1, 2, 3}.
pub fn pauli(k: usize) -> Result<Mat2> {
    match k {
        1 => Ok(SIGMA1),
        2 => Ok(SIGMA2),
        3 => Ok(SIGMA3),
        _ => Err(Error::Argument(format!("Pauli index {k} not in 1..=3"))),
    }
}

pub const SIGMA1: Mat2 = Mat2::new(ZERO, ONE, ONE, ZERO);
pub const SIGMA2: Mat2 = Mat2::new(ZERO, C64::new(0.0, -1.0), I, ZERO);
pub const SIGMA3: Mat2 = Mat2::new(ONE, ZERO, ZERO, C64::new(-1.0, 0.0));

/// N = (𝟙 + iσ1)/√2.
pub fn n_matrix() -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Mat2::new(C64::new(s, 0.0), C64::new(0.0, s), C64::new(0.0, s), C64::new(s, 0.0))
}

/// exp(i θ σ3) = diag(e^{iθ}, e^{−iθ}) for complex θ.
pub fn exp_i_sigma3(theta: C64) -> Mat2 {
    Mat2::diag((I * theta).exp(), (-I * theta).exp())
}

pub fn tensor(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut r = Mat4::zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    r.m[2 * i + k][2 * j + l] = a.m[i][j] * b.m[k][l];
                }
            }
        }
    }
    r
}

pub fn comm(a: &Mat2, b: &Mat2) -> Mat2 {
    *a * *b - *b * *a
}

pub fn comm4(a: &Mat4, b: &Mat4) -> Mat4 {
    *a * *b - *b * *a
}

/// Matrix exponential of a 2×2 matrix.
///
/// The trace is split off; the traceless remainder `a0` satisfies
/// `a0² = μ² 𝟙` with `μ² = −det a0`, so `exp(a0) = cosh μ 𝟙 + (sinh μ / μ) a0`.
pub fn expm(a: &Mat2) -> Result<Mat2> {
    if !a.is_finite() {
        return Err(Error::Numeric("expm: non-finite entries".into()));
    }
    let half_tr = a.trace() * 0.5;
    let a0 = *a - Mat2::identity().scale(half_tr);
    let mu2 = -a0.det();
    let mu = mu2.sqrt();
    let (c, s) = if mu.norm() < EXPM_SERIES_THRESHOLD {
        // cosh μ = 1 + μ²/2 + μ⁴/24, sinh μ / μ = 1 + μ²/6 + μ⁴/120
        (
            ONE + mu2 / 2.0 + mu2 * mu2 / 24.0,
            ONE + mu2 / 6.0 + mu2 * mu2 / 120.0,
        )
    } else {
        (mu.cosh(), mu.sinh() / mu)
    };
    let r = (Mat2::identity().scale(c) + a0.scale(s)).scale(half_tr.exp());
    if !r.is_finite() {
        return Err(Error::Numeric("expm: overflow".into()));
    }
    Ok(r)
}
