//! Integrable defect at x = 0 given by frozen Bäcklund relations.
//!
//! The left field φ̃ (x < 0) and right field φ (x > 0) are tied at x = 0 by
//!
//! ```text
//! φ̃_x − φ_t = (m/β)(σ sin β(φ̃+φ)/2 + σ⁻¹ sin β(φ̃−φ)/2)
//! φ̃_t − φ_x = (m/β)(σ sin β(φ̃+φ)/2 − σ⁻¹ sin β(φ̃−φ)/2)
//! ```
//!
//! equivalently `L_t = VL − LṼ` for `L = ΩΩ̃⁻¹ − (iσ/λ)Ω̃⁻¹σ2Ω`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{
    hamiltonian_t, lorentz_gamma, make_kink, make_vacuum, simpson_samples, simpson_samples_c, topological_charges,
    FieldEvaluator, FieldKind, FieldSample, GridWindow, ModelParams, Picture, ASYMPTOTIC_PROBE,
};
use crate::lax::{e0, omega, u_hat_from_sample, v_from_sample, SpectralPoint};
use crate::matcore::{Mat2, C64, I, SIGMA2, SIGMA3, ZERO};
use crate::transition::{monodromy_with, propagate_states, Stepper, ASYMPTOTE_TOLERANCE};

/// Largest defect-condition residual accepted when a pair is assembled.
pub const PAIR_GATE: f64 = 1e-8;

/// Compatibility residual above which a Bäcklund seed is rejected.
pub const SEED_GATE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefectParams {
    pub sigma: f64,
}

impl DefectParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Argument(format!("defect parameter σ must be positive, got {sigma}")));
        }
        Ok(DefectParams { sigma })
    }
}

/// Residuals of the two defect conditions for given values at x = 0.
pub fn defect_conditions(params: &ModelParams, sigma: f64, left: &FieldSample, right: &FieldSample) -> (f64, f64) {
    let (sp, sm) = half_sines(params, left.phi, right.phi);
    let k = params.m / params.beta;
    let r1 = left.phi_x - right.phi_t - k * (sigma * sp + sm / sigma);
    let r2 = left.phi_t - right.phi_x - k * (sigma * sp - sm / sigma);
    (r1, r2)
}

/// sin β(φ̃+φ)/2 and sin β(φ̃−φ)/2.
fn half_sines(params: &ModelParams, left: f64, right: f64) -> (f64, f64) {
    let b = params.beta / 2.0;
    ((b * (left + right)).sin(), (b * (left - right)).sin())
}

fn half_cosines(params: &ModelParams, left: f64, right: f64) -> (f64, f64) {
    let b = params.beta / 2.0;
    ((b * (left + right)).cos(), (b * (left - right)).cos())
}

#[derive(Clone, Debug)]
pub struct DefectPair {
    /// φ̃, describing x < 0.
    pub left: FieldEvaluator,
    /// φ, describing x > 0.
    pub right: FieldEvaluator,
    pub params: ModelParams,
    pub defect: DefectParams,
}

impl DefectPair {
    /// Assembles a pair and checks the defect conditions on t ∈ [−10, 10].
    pub fn new(left: FieldEvaluator, right: FieldEvaluator, defect: DefectParams) -> Result<Self> {
        let params = right.params;
        if left.params != params {
            return Err(Error::Argument("both sides of a defect must share m and β".into()));
        }
        let pair = DefectPair { left, right, params, defect };
        let ts: Vec<f64> = (0..=40).map(|k| -10.0 + 0.5 * k as f64).collect();
        let r = pair.condition_residual(&ts);
        if r > PAIR_GATE {
            return Err(Error::Argument(format!("fields violate the defect conditions (residual {r:.3e})")));
        }
        Ok(pair)
    }

    /// Pair without the defect-condition gate (negative controls).
    pub fn unchecked(left: FieldEvaluator, right: FieldEvaluator, defect: DefectParams) -> Self {
        let params = right.params;
        DefectPair { left, right, params, defect }
    }

    pub fn left_at(&self, t: f64) -> FieldSample {
        self.left.sample(0.0, t)
    }

    pub fn right_at(&self, t: f64) -> FieldSample {
        self.right.sample(0.0, t)
    }

    /// Max over the given times of both defect-condition residuals.
    pub fn condition_residual(&self, ts: &[f64]) -> f64 {
        ts.iter()
            .map(|&t| {
                let (a, b) = defect_conditions(&self.params, self.defect.sigma, &self.left_at(t), &self.right_at(t));
                a.abs().max(b.abs())
            })
            .fold(0.0, f64::max)
    }

    /// (p₊, p₋) with p± = (𝒬̃± + 𝒬±) mod 2, read from the stored fields at x = 0.
    pub fn parities(&self) -> Result<(u8, u8)> {
        let (ql_m, ql_p) = topological_charges(&self.left, 0.0, Picture::Time)?;
        let (qr_m, qr_p) = topological_charges(&self.right, 0.0, Picture::Time)?;
        Ok(((ql_p + qr_p).rem_euclid(2) as u8, (ql_m + qr_m).rem_euclid(2) as u8))
    }
}

/// Kink velocity produced from the vacuum by the defect: v = (1 − σ²)/(1 + σ²).
pub fn bt_velocity(defect: &DefectParams) -> f64 {
    let s2 = defect.sigma * defect.sigma;
    (1.0 - s2) / (1.0 + s2)
}

/// Vacuum on the left, and on the right the kink with orientation −1 and
/// velocity (1 − σ²)/(1 + σ²) (Lorentz factor (σ + σ⁻¹)/2).
pub fn bt_kink_from_vacuum(params: ModelParams, defect: DefectParams, x0: f64) -> Result<DefectPair> {
    let right = make_kink(params, bt_velocity(&defect), x0, -1)?;
    DefectPair::new(make_vacuum(params), right, defect)
}

/// Kink (orientation +1, velocity (1 − σ²)/(1 + σ²)) on the left and vacuum on the right.
pub fn bt_vacuum_from_kink(params: ModelParams, defect: DefectParams, x0: f64) -> Result<DefectPair> {
    let left = make_kink(params, bt_velocity(&defect), x0, 1)?;
    DefectPair::new(left, make_vacuum(params), defect)
}

pub fn vacuum_pair(params: ModelParams, defect: DefectParams) -> DefectPair {
    DefectPair { left: make_vacuum(params), right: make_vacuum(params), params, defect }
}

/// φ on a grid obtained by integrating the Bäcklund relations from a seed φ̃.
#[derive(Debug)]
pub struct GridField {
    pub window: GridWindow,
    pub seed: FieldEvaluator,
    pub sigma: f64,
    pub params: ModelParams,
    phi: Vec<f64>,
    phi_x: Vec<f64>,
    phi_t: Vec<f64>,
    phi_xt: Vec<f64>,
    /// Max |∂_t∂_xφ − ∂_x∂_tφ| over the grid nodes.
    pub compatibility_residual: f64,
}

/// Right-hand sides (φ_x, φ_t) of the Bäcklund relations for the unknown
/// right field given the seed on the left.
fn bt_rhs(params: &ModelParams, sigma: f64, seed: &FieldSample, phi: f64) -> (f64, f64) {
    let (sp, sm) = half_sines(params, seed.phi, phi);
    let k = params.m / params.beta;
    let phi_x = seed.phi_t - k * (sigma * sp - sm / sigma);
    let phi_t = seed.phi_x - k * (sigma * sp + sm / sigma);
    (phi_x, phi_t)
}

/// (∂_tφ_x, ∂_xφ_t) implied by the relations; equal when the seed solves the equation.
fn bt_cross(field_seed: &FieldEvaluator, params: &ModelParams, sigma: f64, x: f64, t: f64, phi: f64) -> (f64, f64) {
    let h = 1e-5;
    let s = field_seed.sample(x, t);
    let psi_tt = (field_seed.sample(x, t + h).phi_t - field_seed.sample(x, t - h).phi_t) / (2.0 * h);
    let psi_xx = (field_seed.sample(x + h, t).phi_x - field_seed.sample(x - h, t).phi_x) / (2.0 * h);
    let (phi_x, phi_t) = bt_rhs(params, sigma, &s, phi);
    let (cp, cm) = half_cosines(params, s.phi, phi);
    let m2 = params.m / 2.0;
    let xt = psi_tt - m2 * (sigma * cp * (s.phi_t + phi_t) - cm / sigma * (s.phi_t - phi_t));
    let tx = psi_xx - m2 * (sigma * cp * (s.phi_x + phi_x) + cm / sigma * (s.phi_x - phi_x));
    (xt, tx)
}

/// RK4 for a scalar ODE, visiting `targets` in order, with steps no longer than `h_max`.
fn march<F: Fn(f64, f64) -> f64>(f: F, s0: f64, y0: f64, targets: &[f64], h_max: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(targets.len());
    let (mut s, mut y) = (s0, y0);
    for &target in targets {
        let n = ((target - s).abs() / h_max).ceil().max(1.0) as usize;
        let h = (target - s) / n as f64;
        for _ in 0..n {
            let k1 = f(s, y);
            let k2 = f(s + h / 2.0, y + h / 2.0 * k1);
            let k3 = f(s + h / 2.0, y + h / 2.0 * k2);
            let k4 = f(s + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            s += h;
        }
        s = target;
        out.push(y);
    }
    out
}

/// Solves the line ODE from `s0` outward to every node of `nodes` (sorted ascending).
fn march_both_ways<F: Fn(f64, f64) -> f64 + Copy>(f: F, s0: f64, y0: f64, nodes: &[f64], h_max: f64) -> Vec<f64> {
    let split = nodes.partition_point(|&s| s < s0);
    let up = march(f, s0, y0, &nodes[split..], h_max);
    let down_targets: Vec<f64> = nodes[..split].iter().rev().copied().collect();
    let mut down = march(f, s0, y0, &down_targets, h_max);
    down.reverse();
    down.extend(up);
    down
}

/// Integrates the Bäcklund relations for φ given φ̃ = `seed`, starting from
/// φ(x0, t0) = `phi0`: first along t = t0 in x, then along every x-node in t.
/// `nsteps` is the number of RK4 substeps per grid cell.
pub fn backlund_integrate(
    seed: &FieldEvaluator,
    defect: DefectParams,
    corner: (f64, f64),
    phi0: f64,
    window: &GridWindow,
    nsteps: usize,
) -> Result<FieldEvaluator> {
    window.validate()?;
    if nsteps == 0 {
        return Err(Error::Argument("nsteps must be at least 1".into()));
    }
    let (x0, t0) = corner;
    let params = seed.params;
    let sigma = defect.sigma;
    let xs: Vec<f64> = (0..window.nx).map(|i| window.x(i)).collect();
    let ts: Vec<f64> = (0..window.nt).map(|j| window.t(j)).collect();
    let fx = |x: f64, y: f64| bt_rhs(&params, sigma, &seed.sample(x, t0), y).0;
    let along_x = march_both_ways(fx, x0, phi0, &xs, window.dx() / nsteps as f64);
    let (nx, nt) = (window.nx, window.nt);
    let mut phi = vec![0.0; nx * nt];
    for (i, &x) in xs.iter().enumerate() {
        let ft = |t: f64, y: f64| bt_rhs(&params, sigma, &seed.sample(x, t), y).1;
        let col = march_both_ways(ft, t0, along_x[i], &ts, window.dt() / nsteps as f64);
        for (j, v) in col.into_iter().enumerate() {
            phi[i * nt + j] = v;
        }
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("Bäcklund integration produced non-finite values".into()));
    }
    let mut phi_x = vec![0.0; nx * nt];
    let mut phi_t = vec![0.0; nx * nt];
    let mut phi_xt = vec![0.0; nx * nt];
    let mut compat: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            let k = i * nt + j;
            let (a, b) = bt_rhs(&params, sigma, &seed.sample(x, t), phi[k]);
            phi_x[k] = a;
            phi_t[k] = b;
            let (xt, tx) = bt_cross(seed, &params, sigma, x, t, phi[k]);
            phi_xt[k] = 0.5 * (xt + tx);
            compat = compat.max((xt - tx).abs());
        }
    }
    if compat > SEED_GATE {
        return Err(Error::InconsistentSeed(compat));
    }
    let grid = GridField {
        window: *window,
        seed: seed.clone(),
        sigma,
        params,
        phi,
        phi_x,
        phi_t,
        phi_xt,
        compatibility_residual: compat,
    };
    Ok(FieldEvaluator { params, kind: FieldKind::Grid(Arc::new(grid)) })
}

impl GridField {
    /// Bicubic Hermite interpolation of φ; derivatives from the Bäcklund
    /// relations at the interpolated value. Points outside the window are
    /// clamped to its boundary.
    pub fn sample(&self, x: f64, t: f64) -> FieldSample {
        let w = &self.window;
        let xc = x.clamp(w.x_min, w.x_max);
        let tc = t.clamp(w.t_min, w.t_max);
        let (dx, dt) = (w.dx(), w.dt());
        let i = (((xc - w.x_min) / dx).floor() as usize).min(w.nx - 2);
        let j = (((tc - w.t_min) / dt).floor() as usize).min(w.nt - 2);
        let u = (xc - w.x(i)) / dx;
        let v = (tc - w.t(j)) / dt;
        let hx = hermite_basis(u);
        let ht = hermite_basis(v);
        let mut phi = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let k = (i + a) * w.nt + (j + b);
                let (bx0, bx1) = (hx[a], hx[2 + a] * dx);
                let (bt0, bt1) = (ht[b], ht[2 + b] * dt);
                phi += self.phi[k] * bx0 * bt0
                    + self.phi_x[k] * bx1 * bt0
                    + self.phi_t[k] * bx0 * bt1
                    + self.phi_xt[k] * bx1 * bt1;
            }
        }
        let seed = self.seed.sample(xc, tc);
        let (phi_x, phi_t) = bt_rhs(&self.params, self.sigma, &seed, phi);
        FieldSample { phi, phi_x, phi_t }
    }

    /// Value stored at grid node (i, j).
    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.phi[i * self.window.nt + j]
    }
}

/// Cubic Hermite basis [h00, h01, h10, h11] at u ∈ [0, 1]: values at the
/// left/right node, then slopes at the left/right node.
fn hermite_basis(u: f64) -> [f64; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    [2.0 * u3 - 3.0 * u2 + 1.0, -2.0 * u3 + 3.0 * u2, u3 - 2.0 * u2 + u, u3 - u2]
}

/// L = ΩΩ̃⁻¹ − (iσ/λ)Ω̃⁻¹σ2Ω at x = 0.
pub fn defect_matrix_l(pair: &DefectPair, t: f64, sp: &SpectralPoint) -> Mat2 {
    defect_matrix_l_sigma(pair, t, sp, pair.defect.sigma)
}

/// L with an explicit σ (which may differ from the pair's, for negative controls).
pub fn defect_matrix_l_sigma(pair: &DefectPair, t: f64, sp: &SpectralPoint, sigma: f64) -> Mat2 {
    let p = &pair.params;
    let om = omega(p, pair.right_at(t).phi);
    let omt_inv = omega(p, -pair.left_at(t).phi);
    om * omt_inv - (omt_inv * SIGMA2 * om).scale(I * sigma / sp.lambda)
}

/// L̂ = Ω⁻¹LΩ̃ = 𝟙 − (iσ/λ)σ2Ω²Ω̃².
pub fn defect_matrix_l_hat(pair: &DefectPair, t: f64, sp: &SpectralPoint) -> Mat2 {
    let p = &pair.params;
    let om_inv = omega(p, -pair.right_at(t).phi);
    let omt = omega(p, pair.left_at(t).phi);
    om_inv * defect_matrix_l(pair, t, sp) * omt
}

/// ‖L_t − (VL − LṼ)‖ at x = 0, L_t by central differences of step h.
pub fn l_equation_residual(pair: &DefectPair, t: f64, sp: &SpectralPoint, h: f64) -> Result<f64> {
    l_equation_residual_sigma(pair, t, sp, h, pair.defect.sigma)
}

pub fn l_equation_residual_sigma(pair: &DefectPair, t: f64, sp: &SpectralPoint, h: f64, sigma: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Argument("difference step must be positive".into()));
    }
    let l = |t: f64| defect_matrix_l_sigma(pair, t, sp, sigma);
    let lt = (l(t + h) - l(t - h)).scale_re(0.5 / h);
    let v = v_from_sample(&pair.params, &pair.right_at(t), sp);
    let vt = v_from_sample(&pair.params, &pair.left_at(t), sp);
    let lv = l(t);
    Ok((lt - (v * lv - lv * vt)).norm())
}

/// Dressing Γ of a solution Ψ = (𝟙 + Γ)D: Γ21 = Ψ21/Ψ11, Γ12 = Ψ12/Ψ22.
fn dressing(psi: &Mat2) -> Mat2 {
    Mat2::new(ZERO, psi.m[0][1] / psi.m[1][1], psi.m[1][0] / psi.m[0][0], ZERO)
}

fn diag_pair(m: &Mat2) -> [C64; 2] {
    [m.m[0][0], m.m[1][1]]
}

/// Space-picture defect monodromy and the pieces of its diagonal logarithm.
#[derive(Clone, Debug, Serialize)]
pub struct DefectMonodromy {
    pub t: f64,
    pub matrix: Mat2,
    /// ln of the diagonal entries of ℳ_S.
    pub ln_diag: [C64; 2],
    /// ∫_0^W (Û_d − ΓÛ_o + ik1σ3) dx.
    pub i_plus: [C64; 2],
    /// ∫_{−W}^0 (Û̃_d + Û̃_oΓ̃ + ik1σ3) dx.
    pub i_minus: [C64; 2],
    /// ∫_{−W}^0 (Û̃_d − Γ̃Û̃_o + ik1σ3) dx, the alternative ordering.
    pub i_minus_reversed: [C64; 2],
    /// ln ½(L̂_d − ΓL̂_o + L̂_oΓ̃ − ΓL̂_dΓ̃).
    pub i_defect: [C64; 2],
    /// Max over the diagonal of |ln ℳ_jj − (I₊ + Ĩ₋ + I_defect)_j| modulo 2πi.
    pub split_gap: f64,
    /// The same with the alternative ordering in Ĩ₋.
    pub split_gap_reversed: f64,
}

/// Principal-branch distance between two logarithms, modulo 2πi.
pub fn log_gap(a: C64, b: C64) -> f64 {
    let d = a - b;
    let two_pi = 2.0 * PI;
    C64::new(d.re, d.im - (d.im / two_pi).round() * two_pi).norm()
}

/// ℳ_S(t) = T̂₊⁻¹(0,t) L̂(t) T̂̃₋(0,t) and the splitting of ln diag ℳ_S into
/// bulk and defect contributions. `nsteps` (rounded up to even) is used on each half-line.
pub fn defect_monodromy_s(
    pair: &DefectPair,
    t: f64,
    sp: &SpectralPoint,
    half_width: f64,
    nsteps: usize,
) -> Result<DefectMonodromy> {
    let w = half_width;
    for (f, s) in [(&pair.right, w), (&pair.left, -w)] {
        let dev = f.asymptote_deviation(s, t);
        if dev > ASYMPTOTE_TOLERANCE {
            return Err(Error::Truncation { half_width: w, deviation: dev });
        }
    }
    let n = nsteps + nsteps % 2;
    let h = w / n as f64;
    let p = &pair.params;
    // right half-line, from +W down to 0
    let right = propagate_states(&pair.right, Picture::Space, t, w, 0.0, sp, n, Stepper::Rk4, e0(sp, w))?;
    // left half-line, from −W up to 0
    let left = propagate_states(&pair.left, Picture::Space, t, -w, 0.0, sp, n, Stepper::Rk4, e0(sp, -w))?;
    let t_plus = right[n];
    let t_minus = left[n];
    let l_hat = defect_matrix_l_hat(pair, t, sp);
    let t_plus_inv = t_plus.inverse().ok_or_else(|| Error::Numeric("singular Jost solution".into()))?;
    let matrix = t_plus_inv * l_hat * t_minus;

    let ik1 = SIGMA3.scale(I * sp.k1);
    let mut plus_vals = [Vec::with_capacity(n + 1), Vec::with_capacity(n + 1)];
    for (k, psi) in right.iter().enumerate().rev() {
        let x = w - k as f64 * h;
        let u = u_hat_from_sample(p, &pair.right.sample(x, t), sp);
        let g = dressing(psi);
        let d = u.diagonal() - g * u.off_diagonal() + ik1;
        plus_vals[0].push(d.m[0][0]);
        plus_vals[1].push(d.m[1][1]);
    }
    let mut minus_vals = [Vec::with_capacity(n + 1), Vec::with_capacity(n + 1)];
    let mut minus_rev_vals = [Vec::with_capacity(n + 1), Vec::with_capacity(n + 1)];
    for (k, psi) in left.iter().enumerate() {
        let x = -w + k as f64 * h;
        let u = u_hat_from_sample(p, &pair.left.sample(x, t), sp);
        let g = dressing(psi);
        let d = u.diagonal() + u.off_diagonal() * g + ik1;
        let r = u.diagonal() - g * u.off_diagonal() + ik1;
        for j in 0..2 {
            minus_vals[j].push(d.m[j][j]);
            minus_rev_vals[j].push(r.m[j][j]);
        }
    }
    let integ = |v: &[Vec<C64>; 2]| [simpson_samples_c(&v[0], h), simpson_samples_c(&v[1], h)];
    let i_plus = integ(&plus_vals);
    let i_minus = integ(&minus_vals);
    let i_minus_reversed = integ(&minus_rev_vals);

    let g = dressing(&t_plus);
    let gt = dressing(&t_minus);
    let (ld, lo) = (l_hat.diagonal(), l_hat.off_diagonal());
    let bracket = (ld - g * lo + lo * gt - g * ld * gt).scale_re(0.5);
    let i_defect = [bracket.m[0][0].ln(), bracket.m[1][1].ln()];
    let ln_diag = [matrix.m[0][0].ln(), matrix.m[1][1].ln()];
    let gap = |im: &[C64; 2]| {
        (0..2)
            .map(|j| log_gap(ln_diag[j], i_plus[j] + im[j] + i_defect[j]))
            .fold(0.0, f64::max)
    };
    Ok(DefectMonodromy {
        t,
        matrix,
        ln_diag,
        i_plus,
        i_minus,
        i_minus_reversed,
        i_defect,
        split_gap: gap(&i_minus),
        split_gap_reversed: gap(&i_minus_reversed),
    })
}

/// Max over the diagonal of |ℳ_jj(t1) − ℳ_jj(t0)|.
pub fn defect_monodromy_drift(a: &DefectMonodromy, b: &DefectMonodromy) -> f64 {
    let (x, y) = (diag_pair(&a.matrix), diag_pair(&b.matrix));
    (0..2).map(|j| (x[j] - y[j]).norm()).fold(0.0, f64::max)
}

fn sign_of(p: u8) -> f64 {
    if p.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// B± = λ/(λ + iσ)·(𝟙 − (iσ/λ)(−1)^{p±}σ3).
pub fn b_factors(sp: &SpectralPoint, defect: &DefectParams, parities: (u8, u8)) -> Result<(Mat2, Mat2)> {
    let lam = sp.lambda;
    let is = I * defect.sigma;
    if (lam + is).norm() < 1e-14 {
        return Err(Error::Singular("λ = −iσ is a pole of B±".into()));
    }
    let pre = lam / (lam + is);
    let b = |p: u8| (Mat2::identity() - SIGMA3.scale(is / lam * sign_of(p))).scale(pre);
    Ok((b(parities.0), b(parities.1)))
}

/// Both candidate forms of the generating-function ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CFunction {
    /// (λ − iσ(−1)^{p₊})(λ + iσ(−1)^{p₋})/(λ + iσ), as printed.
    pub printed: C64,
    /// (λ − iσ(−1)^{p₊})/(λ − iσ(−1)^{p₋}), the ratio of the (1,1) entries of B₊ and B₋.
    pub ratio: C64,
}

pub fn c_function(sp: &SpectralPoint, defect: &DefectParams, parities: (u8, u8)) -> Result<CFunction> {
    let lam = sp.lambda;
    let is = I * defect.sigma;
    let (sp_, sm_) = (sign_of(parities.0), sign_of(parities.1));
    if (lam + is).norm() < 1e-14 || (lam - is * sm_).norm() < 1e-14 {
        return Err(Error::Singular("λ at a pole of C(λ)".into()));
    }
    Ok(CFunction {
        printed: (lam - is * sp_) * (lam + is * sm_) / (lam + is),
        ratio: (lam - is * sp_) / (lam - is * sm_),
    })
}

/// One λ of the generating-relation comparison.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GeneratingRow {
    pub lambda: f64,
    pub ln_a: C64,
    pub ln_a_tilde: C64,
    pub ln_c_printed: C64,
    pub ln_c_alt: C64,
    pub gap_printed: f64,
    pub gap_alt: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratingReport {
    pub sigma: f64,
    pub parities: (u8, u8),
    pub rows: Vec<GeneratingRow>,
    /// |ln C| of each candidate at λ = 10⁶.
    pub large_lambda_printed: f64,
    pub large_lambda_alt: f64,
}

impl GeneratingReport {
    pub fn max_gap_printed(&self) -> f64 {
        self.rows.iter().map(|r| r.gap_printed).fold(0.0, f64::max)
    }

    pub fn max_gap_alt(&self) -> f64 {
        self.rows.iter().map(|r| r.gap_alt).fold(0.0, f64::max)
    }
}

/// Settings for time-picture monodromies on either side of the defect.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TimeMonodromySettings {
    pub half_width: f64,
    pub steps_per_unit: f64,
    pub stepper: Stepper,
}

impl Default for TimeMonodromySettings {
    fn default() -> Self {
        TimeMonodromySettings { half_width: 60.0, steps_per_unit: 200.0, stepper: Stepper::Magnus4 }
    }
}

fn time_monodromy(field: &FieldEvaluator, x: f64, sp: &SpectralPoint, s: &TimeMonodromySettings) -> Result<C64> {
    let k = sp.k0.norm().max(sp.k1.norm()).max(field.params.m);
    let n = (s.steps_per_unit * 2.0 * s.half_width * k).ceil() as usize;
    Ok(monodromy_with(field, Picture::Time, x, s.half_width, sp, n, s.stepper)?.a_entry)
}

/// Compares ln 𝔞 (right field at x_right) − ln 𝔞̃ (left field at x_left) with ln C.
pub fn generating_relation_check(
    pair: &DefectPair,
    x_right: f64,
    x_left: f64,
    lambdas: &[f64],
    settings: &TimeMonodromySettings,
) -> Result<GeneratingReport> {
    let parities = pair.parities()?;
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let sp = crate::lax::spectral_re(lambda, &pair.params)?;
        let a = time_monodromy(&pair.right, x_right, &sp, settings)?;
        let at = time_monodromy(&pair.left, x_left, &sp, settings)?;
        let c = c_function(&sp, &pair.defect, parities)?;
        let (ln_a, ln_a_tilde) = (a.ln(), at.ln());
        let (ln_c_printed, ln_c_alt) = (c.printed.ln(), c.ratio.ln());
        rows.push(GeneratingRow {
            lambda,
            ln_a,
            ln_a_tilde,
            ln_c_printed,
            ln_c_alt,
            gap_printed: log_gap(ln_a - ln_a_tilde, ln_c_printed),
            gap_alt: log_gap(ln_a - ln_a_tilde, ln_c_alt),
        });
    }
    let far = crate::lax::spectral_re(1e6, &pair.params)?;
    let c = c_function(&far, &pair.defect, parities)?;
    Ok(GeneratingReport {
        sigma: pair.defect.sigma,
        parities,
        rows,
        large_lambda_printed: c.printed.ln().norm(),
        large_lambda_alt: c.ratio.ln().norm(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HamShift {
    /// H_T − H̃_T.
    pub lhs: f64,
    /// (2m/β²)(σ + σ⁻¹)((−1)^{p₊} − (−1)^{p₋}).
    pub rhs_printed: f64,
    /// (2m/β²)(σ⁻¹ − σ)((−1)^{p₊} − (−1)^{p₋}).
    pub rhs_alt: f64,
    pub gap_printed: f64,
    pub gap_alt: f64,
}

/// Shift of the equal-space Hamiltonian across the defect; H_T at x_right
/// for the right field and at x_left for the left field, integrated over
/// the window's t-range.
pub fn ham_shift_check(pair: &DefectPair, x_right: f64, x_left: f64, window: &GridWindow) -> Result<HamShift> {
    let (pp, pm) = pair.parities()?;
    let lhs = hamiltonian_t(&pair.right, x_right, window)?.value - hamiltonian_t(&pair.left, x_left, window)?.value;
    let s = pair.defect.sigma;
    let pre = 2.0 * pair.params.m / (pair.params.beta * pair.params.beta) * (sign_of(pp) - sign_of(pm));
    let rhs_printed = pre * (s + 1.0 / s);
    let rhs_alt = pre * (1.0 / s - s);
    Ok(HamShift { lhs, rhs_printed, rhs_alt, gap_printed: (lhs - rhs_printed).abs(), gap_alt: (lhs - rhs_alt).abs() })
}

/// 𝓑 = (2m/β²)(σ cos β(φ̃+φ)/2 + σ⁻¹ cos β(φ̃−φ)/2).
pub fn b_density(params: &ModelParams, sigma: f64, phi: f64, phi_tilde: f64) -> f64 {
    let (cp, cm) = half_cosines(params, phi_tilde, phi);
    2.0 * params.m / (params.beta * params.beta) * (sigma * cp + cm / sigma)
}

/// 𝓛_defect = ½(φ̃φ_t − φφ̃_t) − 𝓑.
pub fn lagrangian_density(params: &ModelParams, sigma: f64, phi: f64, phi_tilde: f64, phi_t: f64, phi_tilde_t: f64) -> f64 {
    0.5 * (phi_tilde * phi_t - phi * phi_tilde_t) - b_density(params, sigma, phi, phi_tilde)
}

/// 𝓛_defect at x = 0 and time t.
pub fn defect_lagrangian(pair: &DefectPair, t: f64) -> f64 {
    let (r, l) = (pair.right_at(t), pair.left_at(t));
    lagrangian_density(&pair.params, pair.defect.sigma, r.phi, l.phi, r.phi_t, l.phi_t)
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratingFunctional {
    pub sigma: f64,
    /// ∫ (𝓛_defect − 𝓛_∓) dt, with 𝓛₋ subtracted for t < 0 and 𝓛₊ for t ≥ 0.
    pub s_value: f64,
    /// lim_{t→−∞} 𝓛_defect.
    pub limit_minus: f64,
    /// lim_{t→+∞} 𝓛_defect.
    pub limit_plus: f64,
    /// Largest |𝓛_defect − limit| at the ends of the window.
    pub tail: f64,
    /// E_T = H̃_T − H_T.
    pub e_shift: f64,
    /// E_{n_T} = J̃_n − J_n for n = −3 … 3, from the ratio form of C(λ).
    pub charge_shifts: Vec<(i32, f64)>,
}

/// Coefficients c_n of ln C(λ) = i Σ c_n λ^{−n} for the ratio form, n = −3 … 3.
pub fn ratio_log_coefficients(sigma: f64, parities: (u8, u8)) -> Vec<(i32, f64)> {
    let (sp, sm) = (sign_of(parities.0), sign_of(parities.1));
    let mut out = Vec::new();
    for n in -3i32..=3 {
        let c = match n.cmp(&0) {
            std::cmp::Ordering::Greater => {
                let k = n;
                let z = (I * sigma * sp).powi(k) - (I * sigma * sm).powi(k);
                (I * z / k as f64).re
            }
            std::cmp::Ordering::Equal => {
                if sp == sm {
                    0.0
                } else {
                    PI
                }
            }
            std::cmp::Ordering::Less => {
                let k = -n;
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                let z = I.powi(k - 1) * (sp.powi(k) - sm.powi(k)) / (k as f64 * sigma.powi(k));
                (z * sign).re
            }
        };
        out.push((n, c));
    }
    out
}

/// S_T over the window's t-range at x = 0, regularized by subtracting the
/// asymptotic values of 𝓛_defect on each half of the time axis.
pub fn s_functional(pair: &DefectPair, window: &GridWindow) -> Result<GeneratingFunctional> {
    window.validate()?;
    let limit_minus = defect_lagrangian(pair, -ASYMPTOTIC_PROBE);
    let limit_plus = defect_lagrangian(pair, ASYMPTOTIC_PROBE);
    let (a, b, n) = window.line(Picture::Time);
    if !(a < 0.0 && b > 0.0) {
        return Err(Error::Argument("S_T window must contain t = 0".into()));
    }
    let reg = |t: f64| defect_lagrangian(pair, t) - if t < 0.0 { limit_minus } else { limit_plus };
    // integrate [a, 0] and [0, b] separately so the subtraction switch sits on a node
    let na = ((n as f64) * (-a) / (b - a)).round().max(3.0) as usize | 1;
    let nb = ((n as f64) * b / (b - a)).round().max(3.0) as usize | 1;
    let left: Vec<f64> = (0..na).map(|k| reg(a * (1.0 - k as f64 / (na - 1) as f64))).collect();
    let right: Vec<f64> = (0..nb).map(|k| reg(b * k as f64 / (nb - 1) as f64)).collect();
    let mut left_fixed = left.clone();
    // the node at t = 0 belongs to the t ≥ 0 branch
    *left_fixed.last_mut().unwrap() = defect_lagrangian(pair, 0.0) - limit_minus;
    let s_value = simpson_samples(&left_fixed, -a / (na - 1) as f64) + simpson_samples(&right, b / (nb - 1) as f64);
    let tail = reg(a).abs().max(reg(b).abs());
    let e_shift = hamiltonian_t(&pair.left, 0.0, window)?.value - hamiltonian_t(&pair.right, 0.0, window)?.value;
    let parities = pair.parities()?;
    let charge_shifts = ratio_log_coefficients(pair.defect.sigma, parities).into_iter().map(|(n, c)| (n, -c)).collect();
    Ok(GeneratingFunctional { sigma: pair.defect.sigma, s_value, limit_minus, limit_plus, tail, e_shift, charge_shifts })
}

/// Max over `ts` of the two Euler–Lagrange residuals
/// `Π − (∂𝓛/∂φ − d/dt ∂𝓛/∂φ_t)` and `Π̃ + (∂𝓛/∂φ̃ − d/dt ∂𝓛/∂φ̃_t)`, with
/// Π = −φ_x, Π̃ = −φ̃_x at x = 0 and d/dt by central differences of step h.
pub fn canonical_residual(pair: &DefectPair, ts: &[f64], h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) {
        return Err(Error::Argument("difference step must be positive".into()));
    }
    let p = &pair.params;
    let s = pair.defect.sigma;
    let k = p.m / p.beta;
    let (mut res_r, mut res_l) = (0.0f64, 0.0f64);
    for &t in ts {
        let (r, l) = (pair.right_at(t), pair.left_at(t));
        let (sp, sm) = half_sines(p, l.phi, r.phi);
        // ∂𝓑/∂φ and ∂𝓑/∂φ̃
        let db_dphi = k * (-s * sp + sm / s);
        let db_dphit = -k * (s * sp + sm / s);
        let dl_dphi = -0.5 * l.phi_t - db_dphi;
        let dl_dphit = 0.5 * r.phi_t - db_dphit;
        // ∂𝓛/∂φ_t = ½φ̃, ∂𝓛/∂φ̃_t = −½φ
        let ddt_right = 0.5 * (pair.left_at(t + h).phi - pair.left_at(t - h).phi) / (2.0 * h);
        let ddt_left = -0.5 * (pair.right_at(t + h).phi - pair.right_at(t - h).phi) / (2.0 * h);
        res_r = res_r.max((r.big_pi() - (dl_dphi - ddt_right)).abs());
        res_l = res_l.max((l.big_pi() + (dl_dphit - ddt_left)).abs());
    }
    Ok((res_r, res_l))
}

/// 𝓛_defect for the vacuum–vacuum pair: −(2m/β²)(σ + σ⁻¹).
pub fn vacuum_lagrangian(params: &ModelParams, defect: &DefectParams) -> f64 {
    -2.0 * params.m / (params.beta * params.beta) * (defect.sigma + 1.0 / defect.sigma)
}

/// Lorentz factor (σ + σ⁻¹)/2 of the kink created by the defect.
pub fn bt_gamma(defect: &DefectParams) -> f64 {
    let g = 0.5 * (defect.sigma + 1.0 / defect.sigma);
    debug_assert!((g - lorentz_gamma(bt_velocity(defect))).abs() < 1e-12);
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::sg_residual;
    use crate::lax::spectral_re;

    fn unit() -> ModelParams {
        ModelParams::unit()
    }

    fn pair(sigma: f64) -> DefectPair {
        bt_kink_from_vacuum(unit(), DefectParams::new(sigma).unwrap(), 0.3).unwrap()
    }

    fn grid_ts() -> Vec<f64> {
        (0..=40).map(|k| -5.0 + 0.25 * k as f64).collect()
    }

    #[test]
    fn rejects_nonpositive_sigma() {
        assert!(DefectParams::new(0.0).is_err());
        assert!(DefectParams::new(-1.0).is_err());
    }

    #[test]
    fn bt_velocities() {
        assert!(bt_velocity(&DefectParams::new(1.0).unwrap()).abs() < 1e-15);
        assert!((bt_velocity(&DefectParams::new(3.0).unwrap()) + 0.8).abs() < 1e-15);
        assert!((bt_gamma(&DefectParams::new(2.0).unwrap()) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn bt_pairs_satisfy_conditions() {
        for sigma in [1.0, 2.0, 3.0] {
            assert!(pair(sigma).condition_residual(&grid_ts()) < 1e-10, "σ = {sigma}");
            let mirror = bt_vacuum_from_kink(unit(), DefectParams::new(sigma).unwrap(), -0.2).unwrap();
            assert!(mirror.condition_residual(&grid_ts()) < 1e-10, "mirror σ = {sigma}");
        }
        let vac = vacuum_pair(unit(), DefectParams::new(2.0).unwrap());
        assert_eq!(vac.condition_residual(&grid_ts()), 0.0);
    }

    #[test]
    fn wrong_orientation_is_rejected() {
        let d = DefectParams::new(2.0).unwrap();
        let right = make_kink(unit(), bt_velocity(&d), 0.0, 1).unwrap();
        assert!(DefectPair::new(make_vacuum(unit()), right, d).is_err());
    }

    #[test]
    fn parities_of_bt_pair() {
        // right kink with orientation −1 at x = 0: φ → 2π/β as t → −∞ when v < 0
        let p = pair(2.0);
        let (pp, pm) = p.parities().unwrap();
        assert_eq!(pp + pm, 1);
        assert_eq!(vacuum_pair(unit(), p.defect).parities().unwrap(), (0, 0));
    }

    #[test]
    fn l_matrix_vacuum_and_large_lambda() {
        let d = DefectParams::new(2.0).unwrap();
        let sp = spectral_re(1.5, &unit()).unwrap();
        let l = defect_matrix_l(&vacuum_pair(unit(), d), 0.4, &sp);
        let expect = Mat2::identity() - SIGMA2.scale(I * 2.0 / 1.5);
        assert!((l - expect).max_abs() < 1e-15);
        let p = pair(2.0);
        let far = spectral_re(1e9, &unit()).unwrap();
        let lim = omega(&p.params, p.right_at(0.4).phi) * omega(&p.params, -p.left_at(0.4).phi);
        assert!((defect_matrix_l(&p, 0.4, &far) - lim).max_abs() < 1e-8);
    }

    #[test]
    fn l_matrix_term_by_term() {
        let p = pair(2.0);
        let sp = spectral_re(0.7, &unit()).unwrap();
        let t = 0.9;
        let (a, b) = (p.right_at(t).phi / 4.0, p.left_at(t).phi / 4.0);
        // ΩΩ̃⁻¹ = diag(e^{i(a−b)}, e^{−i(a−b)}); Ω̃⁻¹σ2Ω has entries ∓i e^{∓i(a+b)} off the diagonal
        let e = |x: f64| C64::new(0.0, x).exp();
        let c = I * 2.0 / 0.7;
        let expect = Mat2::new(e(a - b), -c * (-I) * e(-b) * e(-a), -c * I * e(b) * e(a), e(b - a));
        assert!((defect_matrix_l(&p, t, &sp) - expect).max_abs() < 1e-14);
    }

    #[test]
    fn l_equation_holds_on_valid_pairs() {
        let vac = vacuum_pair(unit(), DefectParams::new(2.0).unwrap());
        let sp = spectral_re(1.5, &unit()).unwrap();
        assert!(l_equation_residual(&vac, 0.3, &sp, 1e-4).unwrap() < 1e-12);
        for sigma in [1.0, 2.0, 3.0] {
            let p = pair(sigma);
            for t in [-1.0, 0.0, 0.7] {
                let r = l_equation_residual(&p, t, &sp, 1e-4).unwrap();
                assert!(r < 1e-6, "σ = {sigma}, t = {t}: {r}");
            }
        }
        let p = pair(2.0);
        let bad = l_equation_residual_sigma(&p, 0.0, &sp, 1e-4, 2.5).unwrap();
        assert!(bad > 1e-2, "{bad}");
    }

    #[test]
    fn monodromy_is_time_independent() {
        let sp = spectral_re(1.5, &unit()).unwrap();
        let vac = vacuum_pair(unit(), DefectParams::new(2.0).unwrap());
        let a = defect_monodromy_s(&vac, 0.0, &sp, 10.0, 400).unwrap();
        let b = defect_monodromy_s(&vac, 1.0, &sp, 10.0, 400).unwrap();
        assert!(defect_monodromy_drift(&a, &b) < 1e-12);
        let p = pair(2.0);
        let a = defect_monodromy_s(&p, 0.0, &sp, 30.0, 6000).unwrap();
        let b = defect_monodromy_s(&p, 1.0, &sp, 30.0, 6000).unwrap();
        let drift = defect_monodromy_drift(&a, &b);
        assert!(drift < 1e-5, "{drift}");
    }

    #[test]
    fn log_splits_into_bulk_and_defect_parts() {
        let sp = spectral_re(1.5, &unit()).unwrap();
        let p = pair(2.0);
        let m = defect_monodromy_s(&p, 0.5, &sp, 30.0, 6000).unwrap();
        assert!(m.split_gap < 1e-5, "{}", m.split_gap);
        // the kink on the left distinguishes the two orderings of the left generator
        let mirror = bt_vacuum_from_kink(unit(), DefectParams::new(2.0).unwrap(), 0.0).unwrap();
        let m = defect_monodromy_s(&mirror, 0.5, &sp, 30.0, 6000).unwrap();
        assert!(m.split_gap < 1e-5, "{}", m.split_gap);
        assert!(m.split_gap_reversed > 1e-3, "{}", m.split_gap_reversed);
    }

    #[test]
    fn c_candidates() {
        let d = DefectParams::new(2.0).unwrap();
        let sp = spectral_re(1.0, &unit()).unwrap();
        assert!((c_function(&sp, &d, (0, 0)).unwrap().ratio - 1.0).norm() < 1e-15);
        let c = c_function(&sp, &d, (0, 1)).unwrap();
        let expect = C64::new(1.0, -2.0) / C64::new(1.0, 2.0);
        assert!((c.ratio - expect).norm() < 1e-15);
        let printed = c_function(&sp, &d, (0, 0)).unwrap().printed;
        assert!((printed - C64::new(1.0, -2.0)).norm() < 1e-15);
        let (bp, bm) = b_factors(&sp, &d, (0, 1)).unwrap();
        assert!((bp.m[0][0] / bm.m[0][0] - c.ratio).norm() < 1e-15);
        let pole = crate::lax::spectral(C64::new(0.0, -2.0), &unit()).unwrap();
        assert!(b_factors(&pole, &d, (0, 0)).is_err());
    }

    #[test]
    fn ratio_log_coefficients_match_series() {
        let sigma = 2.0;
        for parities in [(0u8, 1u8), (1, 0)] {
            let coeffs = ratio_log_coefficients(sigma, parities);
            let d = DefectParams::new(sigma).unwrap();
            for lam in [30.0, 60.0] {
                let sp = spectral_re(lam, &unit()).unwrap();
                let ln_c = c_function(&sp, &d, parities).unwrap().ratio.ln();
                let series: C64 = coeffs.iter().filter(|(n, _)| *n > 0).map(|&(n, c)| I * c / lam.powi(n)).sum();
                assert!((ln_c - series).norm() < 2.0 * (sigma / lam).powi(4), "λ = {lam}");
            }
            for lam in [0.01, 0.02] {
                let sp = spectral_re(lam, &unit()).unwrap();
                let ln_c = c_function(&sp, &d, parities).unwrap().ratio.ln();
                let series: C64 = coeffs.iter().filter(|(n, _)| *n <= 0).map(|&(n, c)| I * c * lam.powi(-n)).sum();
                assert!(log_gap(ln_c, series) < 2.0 * (lam / sigma).powi(4), "λ = {lam}");
            }
        }
    }

    #[test]
    fn ratio_form_matches_time_monodromies() {
        let p = pair(2.0);
        let settings = TimeMonodromySettings::default();
        let report = generating_relation_check(&p, 0.5, -0.5, &[0.5, 1.0, 2.0, 4.0], &settings).unwrap();
        assert!(report.max_gap_alt() < 1e-4, "{}", report.max_gap_alt());
        assert!(report.max_gap_printed() > 1e-2);
        assert!(report.large_lambda_alt < 1e-5);
        assert!(report.large_lambda_printed > 1.0);
        let vac = vacuum_pair(unit(), p.defect);
        let report = generating_relation_check(&vac, 0.5, -0.5, &[1.0], &settings).unwrap();
        assert!(report.rows[0].ln_a.norm() < 1e-10 && report.rows[0].ln_c_alt.norm() < 1e-15);
    }

    #[test]
    fn hamiltonian_shift() {
        let w = GridWindow::new(-1.0, 1.0, -40.0, 40.0, 3, 16001).unwrap();
        let p = pair(2.0);
        let h = ham_shift_check(&p, 0.0, 0.0, &w).unwrap();
        assert!(h.gap_alt < 1e-4, "{h:?}");
        assert!(h.gap_printed > 1.0);
        let vac = ham_shift_check(&vacuum_pair(unit(), p.defect), 0.0, 0.0, &w).unwrap();
        assert_eq!((vac.lhs, vac.rhs_printed, vac.rhs_alt), (0.0, 0.0, 0.0));
    }

    #[test]
    fn lagrangian_values() {
        let d = DefectParams::new(2.0).unwrap();
        let vac = vacuum_pair(unit(), d);
        assert!((defect_lagrangian(&vac, 1.3) + 2.0 * 2.5).abs() < 1e-15);
        assert_eq!(vacuum_lagrangian(&unit(), &d), -5.0);
        let b1 = b_density(&unit(), 2.0, 0.3, 1.1);
        let b2 = b_density(&unit(), 2.0, 0.3, 0.3 - 0.8);
        let b3 = b_density(&unit(), 2.0, 1.1, 0.3);
        // 𝓑 depends on φ̃ − φ only through its cosine
        assert!((b1 - b3).abs() < 1e-15);
        assert!(b2.is_finite());
    }

    #[test]
    fn s_functional_is_finite() {
        let w = GridWindow::new(-1.0, 1.0, -40.0, 40.0, 3, 8001).unwrap();
        let g = s_functional(&pair(2.0), &w).unwrap();
        assert!(g.s_value.is_finite());
        assert!(g.tail < 1e-10, "{}", g.tail);
        let finer = s_functional(&pair(2.0), &GridWindow::new(-1.0, 1.0, -40.0, 40.0, 3, 16001).unwrap()).unwrap();
        assert!((g.s_value - finer.s_value).abs() < 1e-6);
    }

    #[test]
    fn canonical_residuals() {
        let ts = grid_ts();
        let vac = vacuum_pair(unit(), DefectParams::new(2.0).unwrap());
        let (a, b) = canonical_residual(&vac, &ts, 1e-4).unwrap();
        assert!(a < 1e-12 && b < 1e-12);
        let p = pair(2.0);
        let (a, b) = canonical_residual(&p, &ts, 1e-4).unwrap();
        assert!(a < 1e-6 && b < 1e-6, "{a} {b}");
        let bad = DefectPair::unchecked(p.left.clone(), p.right.scaled(1.01), p.defect);
        let (a, b) = canonical_residual(&bad, &ts, 1e-4).unwrap();
        assert!(a.max(b) > 1e-3, "{a} {b}");
    }

    #[test]
    fn backlund_reproduces_kink() {
        let d = DefectParams::new(2.0).unwrap();
        let p = pair(2.0);
        let w = GridWindow::new(-4.0, 4.0, -3.0, 3.0, 81, 61).unwrap();
        let phi0 = p.right.sample(0.0, 0.0).phi;
        let f = backlund_integrate(&make_vacuum(unit()), d, (0.0, 0.0), phi0, &w, 8).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..w.nx {
            for j in 0..w.nt {
                let (x, t) = (w.x(i), w.t(j));
                err = err.max((f.sample(x, t).phi - p.right.sample(x, t).phi).abs());
            }
        }
        assert!(err < 1e-5, "{err}");
        let r = sg_residual(&f, 0.37, 0.21, 1e-3);
        assert!(r < 1e-4, "{r}");
        let zero = backlund_integrate(&make_vacuum(unit()), d, (0.0, 0.0), 0.0, &w, 4).unwrap();
        assert_eq!(zero.sample(1.3, -0.7).phi, 0.0);
    }
}
