//! Lax matrices of the sine-Gordon model in both pictures.
//!
//! ```text
//! U = −i(β/4)π σ3 − i k0 sin(βφ/2) σ1 − i k1 cos(βφ/2) σ2,   π = φ_t
//! V = +i(β/4)Π σ3 − i k1 sin(βφ/2) σ1 − i k0 cos(βφ/2) σ2,   Π = −φ_x
//! ```
//! with `k0 = (m/4)(λ + 1/λ)`, `k1 = (m/4)(λ − 1/λ)`. The gauged forms
//! `Û = Ω⁻¹UΩ − Ω⁻¹Ω_x`, `V̂ = Ω⁻¹VΩ − Ω⁻¹Ω_t` with `Ω = exp(i(β/4)φσ3)` are
//! built from their explicit expressions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{FieldEvaluator, FieldSample, ModelParams, Picture};
use crate::matcore::{comm, exp_i_sigma3, n_matrix, Mat2, C64, I, SIGMA1, SIGMA2, SIGMA3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub lambda: C64,
    pub k0: C64,
    pub k1: C64,
    pub m: f64,
}

pub fn spectral(lambda: C64, params: &ModelParams) -> Result<SpectralPoint> {
    if lambda.norm() == 0.0 {
        return Err(Error::Argument(
            "λ = 0 is not a regular spectral point; use the small-λ charge expansion".into(),
        ));
    }
    if !lambda.is_finite() {
        return Err(Error::Argument("λ must be finite".into()));
    }
    let m = params.m;
    let inv = lambda.inv();
    Ok(SpectralPoint { lambda, k0: (lambda + inv) * (m / 4.0), k1: (lambda - inv) * (m / 4.0), m })
}

/// Real-λ convenience wrapper.
pub fn spectral_re(lambda: f64, params: &ModelParams) -> Result<SpectralPoint> {
    spectral(C64::new(lambda, 0.0), params)
}

impl SpectralPoint {
    pub fn is_real(&self) -> bool {
        self.lambda.im == 0.0
    }

    /// Wavenumber of the free problem in the running coordinate of `picture`.
    pub fn k_running(&self, picture: Picture) -> C64 {
        match picture {
            Picture::Space => self.k1,
            Picture::Time => self.k0,
        }
    }
}

/// U∞ = −i k1 σ2.
pub fn u_inf(sp: &SpectralPoint) -> Mat2 {
    SIGMA2.scale(-I * sp.k1)
}

/// V∞ = −i k0 σ2.
pub fn v_inf(sp: &SpectralPoint) -> Mat2 {
    SIGMA2.scale(-I * sp.k0)
}

/// E0(x) = N exp(−i k1 x σ3).
pub fn e0(sp: &SpectralPoint, x: f64) -> Mat2 {
    n_matrix() * exp_i_sigma3(-sp.k1 * x)
}

/// ℰ0(t) = N exp(−i k0 t σ3).
pub fn ce0(sp: &SpectralPoint, t: f64) -> Mat2 {
    n_matrix() * exp_i_sigma3(-sp.k0 * t)
}

/// Free solution in the running coordinate: E0 (space) or ℰ0 (time).
pub fn free_solution(sp: &SpectralPoint, picture: Picture, s: f64) -> Mat2 {
    match picture {
        Picture::Space => e0(sp, s),
        Picture::Time => ce0(sp, s),
    }
}

/// Charge-dressed asymptotic solution exp(iπQσ3/2)·E0(x).
pub fn e_pm(sp: &SpectralPoint, q: i64, x: f64) -> Mat2 {
    exp_i_sigma3(C64::new(std::f64::consts::PI * q as f64 / 2.0, 0.0)) * e0(sp, x)
}

/// Charge-dressed asymptotic solution exp(iπ𝒬σ3/2)·ℰ0(t).
pub fn ce_pm(sp: &SpectralPoint, q: i64, t: f64) -> Mat2 {
    exp_i_sigma3(C64::new(std::f64::consts::PI * q as f64 / 2.0, 0.0)) * ce0(sp, t)
}

/// Ω = exp(i(β/4)φσ3).
pub fn omega(params: &ModelParams, phi: f64) -> Mat2 {
    exp_i_sigma3(C64::new(params.beta * phi / 4.0, 0.0))
}

/// U as a function of the site values (φ, π).
pub fn u_from_values(params: &ModelParams, phi: f64, pi: f64, sp: &SpectralPoint) -> Mat2 {
    let h = params.beta * phi / 2.0;
    SIGMA3.scale(C64::new(0.0, -params.beta / 4.0 * pi))
        + SIGMA1.scale(-I * sp.k0 * h.sin())
        + SIGMA2.scale(-I * sp.k1 * h.cos())
}

/// V as a function of the site values (φ, Π).
pub fn v_from_values(params: &ModelParams, phi: f64, big_pi: f64, sp: &SpectralPoint) -> Mat2 {
    let h = params.beta * phi / 2.0;
    SIGMA3.scale(C64::new(0.0, params.beta / 4.0 * big_pi))
        + SIGMA1.scale(-I * sp.k1 * h.sin())
        + SIGMA2.scale(-I * sp.k0 * h.cos())
}

/// Partial derivatives of a Lax matrix with respect to φ and its conjugate momentum.
#[derive(Clone, Copy, Debug)]
pub struct LaxPartials {
    pub d_phi: Mat2,
    pub d_p: Mat2,
}

/// ∂U/∂φ and ∂U/∂π.
pub fn u_partials(params: &ModelParams, phi: f64, sp: &SpectralPoint) -> LaxPartials {
    let b = params.beta;
    let h = b * phi / 2.0;
    LaxPartials {
        d_phi: SIGMA1.scale(-I * sp.k0 * (b / 2.0 * h.cos())) + SIGMA2.scale(I * sp.k1 * (b / 2.0 * h.sin())),
        d_p: SIGMA3.scale(C64::new(0.0, -b / 4.0)),
    }
}

/// ∂V/∂φ and ∂V/∂Π.
pub fn v_partials(params: &ModelParams, phi: f64, sp: &SpectralPoint) -> LaxPartials {
    let b = params.beta;
    let h = b * phi / 2.0;
    LaxPartials {
        d_phi: SIGMA1.scale(-I * sp.k1 * (b / 2.0 * h.cos())) + SIGMA2.scale(I * sp.k0 * (b / 2.0 * h.sin())),
        d_p: SIGMA3.scale(C64::new(0.0, b / 4.0)),
    }
}

pub fn u_from_sample(params: &ModelParams, s: &FieldSample, sp: &SpectralPoint) -> Mat2 {
    u_from_values(params, s.phi, s.pi(), sp)
}

pub fn v_from_sample(params: &ModelParams, s: &FieldSample, sp: &SpectralPoint) -> Mat2 {
    v_from_values(params, s.phi, s.big_pi(), sp)
}

pub fn build_u(field: &FieldEvaluator, x: f64, t: f64, sp: &SpectralPoint) -> Mat2 {
    u_from_sample(&field.params, &field.sample(x, t), sp)
}

pub fn build_v(field: &FieldEvaluator, x: f64, t: f64, sp: &SpectralPoint) -> Mat2 {
    v_from_sample(&field.params, &field.sample(x, t), sp)
}

/// σ2·exp(iθσ3) = cos θ σ2 − sin θ σ1.
fn sigma2_rotated(theta: f64) -> Mat2 {
    SIGMA2.scale_re(theta.cos()) - SIGMA1.scale_re(theta.sin())
}

/// Û from a field sample.
pub fn u_hat_from_sample(params: &ModelParams, s: &FieldSample, sp: &SpectralPoint) -> Mat2 {
    let q = params.m / 4.0;
    SIGMA3.scale(C64::new(0.0, -params.beta / 4.0 * (s.phi_x + s.pi())))
        + SIGMA2.scale(-I * sp.lambda * q)
        + sigma2_rotated(params.beta * s.phi).scale(I * q / sp.lambda)
}

/// V̂ from a field sample.
pub fn v_hat_from_sample(params: &ModelParams, s: &FieldSample, sp: &SpectralPoint) -> Mat2 {
    let q = params.m / 4.0;
    SIGMA3.scale(C64::new(0.0, -params.beta / 4.0 * (s.phi_t - s.big_pi())))
        + SIGMA2.scale(-I * sp.lambda * q)
        - sigma2_rotated(params.beta * s.phi).scale(I * q / sp.lambda)
}

pub fn build_u_hat(field: &FieldEvaluator, x: f64, t: f64, sp: &SpectralPoint) -> Mat2 {
    u_hat_from_sample(&field.params, &field.sample(x, t), sp)
}

pub fn build_v_hat(field: &FieldEvaluator, x: f64, t: f64, sp: &SpectralPoint) -> Mat2 {
    v_hat_from_sample(&field.params, &field.sample(x, t), sp)
}

/// Gauged generator of the auxiliary problem in the running coordinate.
pub fn gauged_generator(field: &FieldEvaluator, picture: Picture, x: f64, t: f64, sp: &SpectralPoint) -> Mat2 {
    match picture {
        Picture::Space => build_u_hat(field, x, t, sp),
        Picture::Time => build_v_hat(field, x, t, sp),
    }
}

/// ‖U_t − V_x + [U, V]‖_F with central differences of step h.
pub fn zero_curvature_residual(field: &FieldEvaluator, x: f64, t: f64, sp: &SpectralPoint, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Argument("difference step must be positive".into()));
    }
    let ut = (build_u(field, x, t + h, sp) - build_u(field, x, t - h, sp)).scale_re(0.5 / h);
    let vx = (build_v(field, x + h, t, sp) - build_v(field, x - h, t, sp)).scale_re(0.5 / h);
    let u = build_u(field, x, t, sp);
    let v = build_v(field, x, t, sp);
    Ok((ut - vx + comm(&u, &v)).norm())
}

/// ‖Ω⁻¹AΩ − Ω⁻¹∂Ω − Â‖_F, where A is U (space picture, ∂ = ∂_x) or V (time
/// picture, ∂ = ∂_t) and ∂Ω is taken by central differences of step h.
pub fn gauge_consistency_residual(
    field: &FieldEvaluator,
    picture: Picture,
    x: f64,
    t: f64,
    sp: &SpectralPoint,
    h: f64,
) -> f64 {
    let p = &field.params;
    let om = |x: f64, t: f64| omega(p, field.sample(x, t).phi);
    let o = om(x, t);
    let oi = o.inverse().expect("Ω is unitary");
    let (a, d_om, hat) = match picture {
        Picture::Space => (
            build_u(field, x, t, sp),
            (om(x + h, t) - om(x - h, t)).scale_re(0.5 / h),
            build_u_hat(field, x, t, sp),
        ),
        Picture::Time => (
            build_v(field, x, t, sp),
            (om(x, t + h) - om(x, t - h)).scale_re(0.5 / h),
            build_v_hat(field, x, t, sp),
        ),
    };
    (oi * a * o - oi * d_om - hat).norm()
}
