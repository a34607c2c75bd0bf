//! Propagation of the gauged auxiliary problem `dΨ/ds = G(s)Ψ` along x
//! (G = Û, t fixed) or along t (G = V̂, x fixed), regularized monodromy
//! matrices, and half-line Jost-type solutions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{FieldEvaluator, Picture};
use crate::lax::{free_solution, gauged_generator, SpectralPoint};
use crate::matcore::{exp_i_sigma3, expm, Mat2, C64};

/// Field deviation from its vacuum allowed at the ends of a monodromy window.
pub const ASYMPTOTE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Stepper {
    /// Classical fourth-order Runge–Kutta.
    #[default]
    Rk4,
    /// Fourth-order commutator-free Magnus integrator (two exponentials per
    /// step at the Gauss points). Preferred for large |λ|.
    Magnus4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransitionResult {
    pub matrix: Mat2,
    pub from: f64,
    pub to: f64,
    pub picture: Picture,
    pub sp: SpectralPoint,
    pub step_count: usize,
    /// Set when λ has a nonzero imaginary part (generators no longer anti-Hermitian).
    pub complex_lambda: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Monodromy {
    pub matrix: Mat2,
    pub a_entry: C64,
    pub picture: Picture,
    /// Half-width W of the window [−W, W].
    pub truncation: f64,
    pub tail_deviation: f64,
    pub step_count: usize,
}

/// Steps for a segment of the given length: 100·length·max(|k0|, |k1|, m)/π,
/// i.e. 200·W·max(…)/π for a window [−W, W].
pub fn default_nsteps(length: f64, sp: &SpectralPoint) -> usize {
    let k = sp.k0.norm().max(sp.k1.norm()).max(sp.m);
    ((100.0 * length.abs() * k / std::f64::consts::PI).ceil() as usize).max(1)
}

fn check_finite(m: &Mat2, s: f64) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(format!(
            "propagation blew up near s = {s}; use more steps or a real spectral parameter"
        )))
    }
}

/// Visits Ψ at every node of a uniform grid from `from` to `to`, starting from `init`.
fn integrate<F>(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    from: f64,
    to: f64,
    sp: &SpectralPoint,
    nsteps: usize,
    stepper: Stepper,
    init: Mat2,
    mut visit: F,
) -> Result<Mat2>
where
    F: FnMut(usize, f64, &Mat2),
{
    if nsteps == 0 {
        return Err(Error::Argument("nsteps must be at least 1".into()));
    }
    let h = (to - from) / nsteps as f64;
    let gen = |s: f64| {
        let (x, t) = picture.point(fixed, s);
        gauged_generator(field, picture, x, t, sp)
    };
    let mut psi = init;
    visit(0, from, &psi);
    match stepper {
        Stepper::Rk4 => {
            let mut g0 = gen(from);
            for n in 0..nsteps {
                let s = from + n as f64 * h;
                let gm = gen(s + 0.5 * h);
                let g1 = gen(s + h);
                let k1 = g0 * psi;
                let k2 = gm * (psi + k1.scale_re(0.5 * h));
                let k3 = gm * (psi + k2.scale_re(0.5 * h));
                let k4 = g1 * (psi + k3.scale_re(h));
                psi += (k1 + k2.scale_re(2.0) + k3.scale_re(2.0) + k4).scale_re(h / 6.0);
                check_finite(&psi, s)?;
                g0 = g1;
                visit(n + 1, s + h, &psi);
            }
        }
        Stepper::Magnus4 => {
            let r = 3f64.sqrt() / 6.0;
            let (c1, c2) = (0.5 - r, 0.5 + r);
            let a1 = (3.0 - 2.0 * 3f64.sqrt()) / 12.0;
            let a2 = (3.0 + 2.0 * 3f64.sqrt()) / 12.0;
            for n in 0..nsteps {
                let s = from + n as f64 * h;
                let g1 = gen(s + c1 * h);
                let g2 = gen(s + c2 * h);
                let first = expm(&(g1.scale_re(a2 * h) + g2.scale_re(a1 * h)))?;
                let second = expm(&(g1.scale_re(a1 * h) + g2.scale_re(a2 * h)))?;
                psi = second * (first * psi);
                check_finite(&psi, s)?;
                visit(n + 1, s + h, &psi);
            }
        }
    }
    Ok(psi)
}

/// Gauged transition matrix from `from` to `to` along the line at `fixed`, with RK4.
pub fn propagate(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    from: f64,
    to: f64,
    sp: &SpectralPoint,
    nsteps: usize,
) -> Result<TransitionResult> {
    propagate_with(field, picture, fixed, from, to, sp, nsteps, Stepper::Rk4)
}

#[allow(clippy::too_many_arguments)]
pub fn propagate_with(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    from: f64,
    to: f64,
    sp: &SpectralPoint,
    nsteps: usize,
    stepper: Stepper,
) -> Result<TransitionResult> {
    let matrix = integrate(field, picture, fixed, from, to, sp, nsteps, stepper, Mat2::identity(), |_, _, _| {})?;
    Ok(TransitionResult {
        matrix,
        from,
        to,
        picture,
        sp: *sp,
        step_count: nsteps,
        complex_lambda: !sp.is_real(),
    })
}

/// Ψ at every node `from + k·(to − from)/nsteps`, k = 0..=nsteps, for Ψ(from) = `init`.
#[allow(clippy::too_many_arguments)]
pub fn propagate_states(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    from: f64,
    to: f64,
    sp: &SpectralPoint,
    nsteps: usize,
    stepper: Stepper,
    init: Mat2,
) -> Result<Vec<Mat2>> {
    let mut out = Vec::with_capacity(nsteps + 1);
    integrate(field, picture, fixed, from, to, sp, nsteps, stepper, init, |_, _, m| out.push(*m))?;
    Ok(out)
}

/// Largest deviation from the vacuum at the two ends of the window along the line.
pub fn tail_deviation(field: &FieldEvaluator, picture: Picture, fixed: f64, half_width: f64) -> f64 {
    let (xa, ta) = picture.point(fixed, -half_width);
    let (xb, tb) = picture.point(fixed, half_width);
    field.asymptote_deviation(xa, ta).max(field.asymptote_deviation(xb, tb))
}

fn check_settled(field: &FieldEvaluator, picture: Picture, fixed: f64, half_width: f64) -> Result<f64> {
    let dev = tail_deviation(field, picture, fixed, half_width);
    if dev > 0.1 * field.params.vacuum_period() {
        return Err(Error::NonDecaying { distance: dev });
    }
    Ok(dev)
}

/// E0(W)⁻¹ · T̂(W, −W) · E0(−W) (space) or the ℰ0 analogue (time), with RK4.
pub fn monodromy(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    half_width: f64,
    sp: &SpectralPoint,
    nsteps: usize,
) -> Result<Monodromy> {
    monodromy_with(field, picture, fixed, half_width, sp, nsteps, Stepper::Rk4)
}

#[allow(clippy::too_many_arguments)]
pub fn monodromy_with(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    half_width: f64,
    sp: &SpectralPoint,
    nsteps: usize,
    stepper: Stepper,
) -> Result<Monodromy> {
    if !(half_width > 0.0) {
        return Err(Error::Argument("half-width must be positive".into()));
    }
    let dev = tail_deviation(field, picture, fixed, half_width);
    if dev > ASYMPTOTE_TOLERANCE {
        return Err(Error::Truncation { half_width, deviation: dev });
    }
    let w = half_width;
    let start = free_solution(sp, picture, -w);
    let end = integrate(field, picture, fixed, -w, w, sp, nsteps, stepper, start, |_, _, _| {})?;
    let left = free_solution(sp, picture, w)
        .inverse()
        .ok_or_else(|| Error::Numeric("singular free solution".into()))?;
    let matrix = left * end;
    Ok(Monodromy {
        matrix,
        a_entry: matrix.m[0][0],
        picture,
        truncation: w,
        tail_deviation: dev,
        step_count: nsteps,
    })
}

/// T̂₋(x, t): solution started from E0(−W) at −W (space, along x at fixed t)
/// or from ℰ0(−W) (time, along t at fixed x), evaluated at the point (x, t).
#[allow(clippy::too_many_arguments)]
pub fn jost_minus(
    field: &FieldEvaluator,
    picture: Picture,
    x: f64,
    t: f64,
    sp: &SpectralPoint,
    half_width: f64,
    nsteps: usize,
) -> Result<Mat2> {
    jost_minus_with(field, picture, x, t, sp, half_width, nsteps, Stepper::Rk4)
}

#[allow(clippy::too_many_arguments)]
pub fn jost_minus_with(
    field: &FieldEvaluator,
    picture: Picture,
    x: f64,
    t: f64,
    sp: &SpectralPoint,
    half_width: f64,
    nsteps: usize,
    stepper: Stepper,
) -> Result<Mat2> {
    let (fixed, s) = match picture {
        Picture::Space => (t, x),
        Picture::Time => (x, t),
    };
    check_settled(field, picture, fixed, half_width)?;
    let start = free_solution(sp, picture, -half_width);
    integrate(field, picture, fixed, -half_width, s, sp, nsteps, stepper, start, |_, _, _| {})
}

/// T̂₊(x, t): solution fixed by E0(+W) at +W, propagated back to the point.
#[allow(clippy::too_many_arguments)]
pub fn jost_plus(
    field: &FieldEvaluator,
    picture: Picture,
    x: f64,
    t: f64,
    sp: &SpectralPoint,
    half_width: f64,
    nsteps: usize,
) -> Result<Mat2> {
    let (fixed, s) = match picture {
        Picture::Space => (t, x),
        Picture::Time => (x, t),
    };
    check_settled(field, picture, fixed, half_width)?;
    let start = free_solution(sp, picture, half_width);
    integrate(field, picture, fixed, half_width, s, sp, nsteps, Stepper::Rk4, start, |_, _, _| {})
}

/// ‖T̂₋(x,t)·exp(−ik0tσ3) − 𝒯̂₋(x,t)·exp(−ik1xσ3)‖_F.
///
/// Both sides are the same solution of the pair of auxiliary problems only
/// if the field's corner limits agree, i.e. it tends to the same vacuum as
/// x → −∞ and as t → −∞.
pub fn appendix_equality_residual(
    field: &FieldEvaluator,
    x: f64,
    t: f64,
    sp: &SpectralPoint,
    half_width: f64,
    nsteps: usize,
) -> Result<f64> {
    let ts = jost_minus(field, Picture::Space, x, t, sp, half_width, nsteps)?;
    let tt = jost_minus(field, Picture::Time, x, t, sp, half_width, nsteps)?;
    let lhs = ts * exp_i_sigma3(-sp.k0 * t);
    let rhs = tt * exp_i_sigma3(-sp.k1 * x);
    Ok((lhs - rhs).norm())
}
