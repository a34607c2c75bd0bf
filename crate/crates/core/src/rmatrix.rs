//! The classical r-matrix and lattice checks of the ultralocal Poisson
//! algebra for both canonical brackets.
//!
//! The equal-time bracket {,}_S pairs φ with π = φ_t; the equal-space
//! bracket {,}_T pairs φ with Π = −φ_x. On a lattice of spacing Δ the
//! canonical pairs are `{φ_i, p_j} = δ_ij/Δ` (the Kronecker-δ/Δ
//! regularization of δ(x − y)), so that
//!
//! ```text
//! {U_1(λ), U_2(μ)}_S = +(1/Δ)[r(λ,μ), U_1 + U_2]   at a common site,
//! {V_1(λ), V_2(μ)}_T = −(1/Δ)[r(λ,μ), V_1 + V_2]
//! ```
//! and both vanish between distinct sites.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{topological_charges, FieldEvaluator, FieldSample, ModelParams, Picture};
use crate::lax::{ce_pm, spectral, u_from_values, u_partials, v_from_values, v_partials, LaxPartials, SpectralPoint};
use crate::matcore::{comm4, expm, tensor, Mat2, Mat4, C64, I, SIGMA1, SIGMA2, SIGMA3};

/// Which canonical bracket: equal time (S) or equal space (T).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Bracket {
    S,
    T,
}

impl Bracket {
    /// Sign in front of [r, A_1 + A_2].
    pub fn sign(&self) -> f64 {
        match self {
            Bracket::S => 1.0,
            Bracket::T => -1.0,
        }
    }

    pub fn picture(&self) -> Picture {
        match self {
            Bracket::S => Picture::Space,
            Bracket::T => Picture::Time,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RMatrixValue {
    pub lambda: C64,
    pub mu: C64,
    pub f: C64,
    pub g: C64,
    pub gamma_const: f64,
    pub matrix: Mat4,
}

/// r(λ,μ) = f(𝟙⊗𝟙 − σ3⊗σ3) + g(σ1⊗σ1 + σ2⊗σ2) with
/// f = −γ(λ²+μ²)/(λ²−μ²), g = 2γλμ/(λ²−μ²), γ = β²/16.
pub fn r_matrix(lambda: C64, mu: C64, params: &ModelParams) -> Result<RMatrixValue> {
    let d = lambda * lambda - mu * mu;
    let scale = lambda.norm_sqr().max(mu.norm_sqr()).max(1.0);
    if d.norm() < 1e-14 * scale {
        return Err(Error::Singular(format!("r(λ, μ) is singular at λ² = μ² (λ = {lambda}, μ = {mu})")));
    }
    let gamma = params.beta * params.beta / 16.0;
    let f = -(lambda * lambda + mu * mu) * gamma / d;
    let g = lambda * mu * (2.0 * gamma) / d;
    let id = Mat2::identity();
    let matrix = (tensor(&id, &id) - tensor(&SIGMA3, &SIGMA3)).scale(f)
        + (tensor(&SIGMA1, &SIGMA1) + tensor(&SIGMA2, &SIGMA2)).scale(g);
    Ok(RMatrixValue { lambda, mu, f, g, gamma_const: gamma, matrix })
}

/// The trigonometric display (iγ/sin α)·[[0,0,0,0],[0,cos α,−1,0],[0,−1,cos α,0],[0,0,0,0]].
///
/// With λ = e^{iα}, μ = e^{iα'} one finds r(λ, μ) = 2·r_trig(α − α'): the
/// display carries half the weight of the rational form.
pub fn r_trig(alpha: f64, params: &ModelParams) -> Result<Mat4> {
    let s = alpha.sin();
    if s.abs() < 1e-14 {
        return Err(Error::Singular("trigonometric r-matrix is singular at sin α = 0".into()));
    }
    let gamma = params.beta * params.beta / 16.0;
    let pre = I * (gamma / s);
    let mut m = Mat4::zero();
    m.m[1][1] = pre * alpha.cos();
    m.m[2][2] = pre * alpha.cos();
    m.m[1][2] = -pre;
    m.m[2][1] = -pre;
    Ok(m)
}

/// r±(λ, μ) of the infinite-volume bracket, kept symbolically: the middle
/// block carries a principal-value part and a δ(λ − μ) part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RPlusMinus {
    /// +1 for r₊, −1 for r₋.
    pub sign: i8,
    /// Entries (1,1) and (4,4): −(γ/2)(λ − μ)/(λ + μ).
    pub corner: C64,
    /// Entries (2,2) and (3,3): −(γ/2) p.v. (λ + μ)/(λ − μ), valid off λ = μ.
    pub principal_value: C64,
    /// Weight w of δ(λ − μ) in entry (2,3); entry (3,2) carries −w.
    pub delta_weight: C64,
}

pub fn r_pm(lambda: C64, mu: C64, sign: i8, params: &ModelParams) -> Result<RPlusMinus> {
    if sign != 1 && sign != -1 {
        return Err(Error::Argument("r± sign must be ±1".into()));
    }
    if (lambda + mu).norm() < 1e-14 || (lambda - mu).norm() < 1e-14 {
        return Err(Error::Singular("r± needs λ ≠ ±μ for its regular parts".into()));
    }
    let half = -params.beta * params.beta / 32.0;
    Ok(RPlusMinus {
        sign,
        corner: (lambda - mu) / (lambda + mu) * half,
        principal_value: (lambda + mu) / (lambda - mu) * half,
        delta_weight: -I * std::f64::consts::PI * (lambda + mu) * (sign as f64) * half,
    })
}

fn partials(bracket: Bracket, params: &ModelParams, phi: f64, sp: &SpectralPoint) -> LaxPartials {
    match bracket {
        Bracket::S => u_partials(params, phi, sp),
        Bracket::T => v_partials(params, phi, sp),
    }
}

/// Lax matrix of the picture: U(φ, π) for S, V(φ, Π) for T.
pub fn lax_matrix(bracket: Bracket, params: &ModelParams, phi: f64, p: f64, sp: &SpectralPoint) -> Mat2 {
    match bracket {
        Bracket::S => u_from_values(params, phi, p, sp),
        Bracket::T => v_from_values(params, phi, p, sp),
    }
}

/// Momentum conjugate to φ in the given bracket.
pub fn momentum(bracket: Bracket, s: &FieldSample) -> f64 {
    match bracket {
        Bracket::S => s.pi(),
        Bracket::T => s.big_pi(),
    }
}

/// Same-site bracket {A_1(λ), A_2(μ)} = (1/Δ)(∂_φA(λ)⊗∂_pA(μ) − ∂_pA(λ)⊗∂_φA(μ)).
pub fn site_bracket(bracket: Bracket, params: &ModelParams, phi: f64, sp1: &SpectralPoint, sp2: &SpectralPoint, delta: f64) -> Mat4 {
    let a = partials(bracket, params, phi, sp1);
    let b = partials(bracket, params, phi, sp2);
    (tensor(&a.d_phi, &b.d_p) - tensor(&a.d_p, &b.d_phi)).scale(C64::new(1.0 / delta, 0.0))
}

/// (sign/Δ)[r(λ,μ), A_1(λ) + A_2(μ)] with the sign supplied by the caller.
pub fn ultralocal_rhs(
    bracket: Bracket,
    params: &ModelParams,
    phi: f64,
    p: f64,
    sp1: &SpectralPoint,
    sp2: &SpectralPoint,
    delta: f64,
    sign: f64,
) -> Result<Mat4> {
    let r = r_matrix(sp1.lambda, sp2.lambda, params)?;
    let id = Mat2::identity();
    let sum = tensor(&lax_matrix(bracket, params, phi, p, sp1), &id) + tensor(&id, &lax_matrix(bracket, params, phi, p, sp2));
    Ok(comm4(&r.matrix, &sum).scale(C64::new(sign / delta, 0.0)))
}

/// Max-entry gap between the same-site bracket and its r-matrix form.
pub fn ultralocal_check(
    bracket: Bracket,
    params: &ModelParams,
    sample: &FieldSample,
    sp1: &SpectralPoint,
    sp2: &SpectralPoint,
    delta: f64,
) -> Result<f64> {
    ultralocal_check_with_sign(bracket, params, sample, sp1, sp2, delta, bracket.sign())
}

/// As [`ultralocal_check`] with an explicit sign in front of the commutator
/// (sign-sensitivity controls).
pub fn ultralocal_check_with_sign(
    bracket: Bracket,
    params: &ModelParams,
    sample: &FieldSample,
    sp1: &SpectralPoint,
    sp2: &SpectralPoint,
    delta: f64,
    sign: f64,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Argument("lattice spacing must be positive".into()));
    }
    let p = momentum(bracket, sample);
    let lhs = site_bracket(bracket, params, sample.phi, sp1, sp2, delta);
    let rhs = ultralocal_rhs(bracket, params, sample.phi, p, sp1, sp2, delta, sign)?;
    Ok((lhs - rhs).max_abs())
}

/// Lattice phase space: φ_i and its conjugate momentum p_i on the cell
/// midpoints of an interval, with `{φ_i, p_j} = δ_ij/Δ`.
#[derive(Clone, Debug, Serialize)]
pub struct LatticePhaseSpace {
    pub bracket: Bracket,
    pub params: ModelParams,
    /// Start of the running interval.
    pub start: f64,
    pub delta: f64,
    pub phi: Vec<f64>,
    pub p: Vec<f64>,
}

impl LatticePhaseSpace {
    /// Samples `field` along the running coordinate of the bracket's picture
    /// (x for S, t for T) with the other coordinate at `fixed`.
    pub fn from_field(bracket: Bracket, field: &FieldEvaluator, fixed: f64, interval: (f64, f64), n_sites: usize) -> Result<Self> {
        let (a, b) = interval;
        if !(a < b) || n_sites == 0 {
            return Err(Error::Argument("lattice needs an increasing interval and at least one site".into()));
        }
        let delta = (b - a) / n_sites as f64;
        let picture = bracket.picture();
        let samples: Vec<FieldSample> = (0..n_sites)
            .map(|i| {
                let (x, t) = picture.point(fixed, a + (i as f64 + 0.5) * delta);
                field.sample(x, t)
            })
            .collect();
        Ok(LatticePhaseSpace {
            bracket,
            params: field.params,
            start: a,
            delta,
            phi: samples.iter().map(|s| s.phi).collect(),
            p: samples.iter().map(|s| momentum(bracket, s)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Canonical bracket of site coordinates: {φ_i, p_j} = δ_ij/Δ, {φ, φ} = {p, p} = 0.
    pub fn canonical(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0 / self.delta
        } else {
            0.0
        }
    }

    /// Bracket of the Lax matrices at sites i and j.
    pub fn lax_bracket(&self, i: usize, j: usize, sp1: &SpectralPoint, sp2: &SpectralPoint) -> Mat4 {
        if i != j {
            return Mat4::zero();
        }
        site_bracket(self.bracket, &self.params, self.phi[i], sp1, sp2, self.delta)
    }

    /// Step factor exp(Δ·A_i(λ)).
    fn step(&self, i: usize, sp: &SpectralPoint) -> Result<Mat2> {
        expm(&lax_matrix(self.bracket, &self.params, self.phi[i], self.p[i], sp).scale_re(self.delta))
    }

    /// Lattice transition matrix ∏ exp(Δ·A_i), later sites to the left.
    pub fn transition(&self, sp: &SpectralPoint) -> Result<Mat2> {
        let mut t = Mat2::identity();
        for i in 0..self.len() {
            t = self.step(i, sp)? * t;
        }
        Ok(t)
    }

    /// {T_1(λ), T_2(μ)} by the Leibniz rule over sites. At site i the step
    /// factors obey ∂E_i = Δ·∂A_i·E_i to first order, so
    /// `{E_1, E_2} = Δ²·{A_1, A_2}_site·(E_i(λ) ⊗ E_i(μ))`.
    pub fn transition_bracket(&self, sp1: &SpectralPoint, sp2: &SpectralPoint) -> Result<(Mat2, Mat2, Mat4)> {
        let n = self.len();
        let e1: Vec<Mat2> = (0..n).map(|i| self.step(i, sp1)).collect::<Result<_>>()?;
        let e2: Vec<Mat2> = (0..n).map(|i| self.step(i, sp2)).collect::<Result<_>>()?;
        // prefix[i] = E_{i−1}···E_0, suffix[i] = E_{n−1}···E_{i+1}
        let prefix = |e: &[Mat2]| {
            let mut out = Vec::with_capacity(n + 1);
            let mut acc = Mat2::identity();
            out.push(acc);
            for m in e {
                acc = *m * acc;
                out.push(acc);
            }
            out
        };
        let suffix = |e: &[Mat2]| {
            let mut out = vec![Mat2::identity(); n + 1];
            for i in (0..n).rev() {
                out[i] = out[i + 1] * e[i];
            }
            out
        };
        let (p1, p2, s1, s2) = (prefix(&e1), prefix(&e2), suffix(&e1), suffix(&e2));
        let d2 = C64::new(self.delta * self.delta, 0.0);
        let mut total = Mat4::zero();
        for i in 0..n {
            let site = self.lax_bracket(i, i, sp1, sp2).scale(d2);
            let left = tensor(&s1[i + 1], &s2[i + 1]);
            let right = tensor(&(e1[i] * p1[i]), &(e2[i] * p2[i]));
            total += left * site * right;
        }
        Ok((p1[n], p2[n], total))
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TransitionBracketReport {
    pub n_sites: usize,
    pub delta: f64,
    /// max-entry gap between the Leibniz sum and sign·[r, T(λ) ⊗ T(μ)].
    pub gap: f64,
    /// max-entry size of sign·[r, T(λ) ⊗ T(μ)].
    pub scale: f64,
}

/// Gap of `{T_1(λ), T_2(μ)} = sign·[r(λ,μ), T(λ) ⊗ T(μ)]` on a lattice of
/// `n_sites` over `interval` (sign + for S, − for T). Vanishes at O(Δ).
pub fn transition_bracket_check(
    bracket: Bracket,
    field: &FieldEvaluator,
    fixed: f64,
    interval: (f64, f64),
    sp1: &SpectralPoint,
    sp2: &SpectralPoint,
    n_sites: usize,
) -> Result<TransitionBracketReport> {
    let lattice = LatticePhaseSpace::from_field(bracket, field, fixed, interval, n_sites)?;
    let r = r_matrix(sp1.lambda, sp2.lambda, &field.params)?;
    let (t1, t2, lhs) = lattice.transition_bracket(sp1, sp2)?;
    let rhs = comm4(&r.matrix, &tensor(&t1, &t2)).scale(C64::new(bracket.sign(), 0.0));
    Ok(TransitionBracketReport { n_sites, delta: lattice.delta, gap: (lhs - rhs).max_abs(), scale: rhs.max_abs() })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct InvolutionReport {
    pub n_sites: usize,
    pub lambda: f64,
    pub mu: f64,
    /// 𝔞(λ) and 𝔞(μ) on the lattice.
    pub a_lambda: C64,
    pub a_mu: C64,
    /// |{𝔞(λ), 𝔞(μ)}_T| from the Leibniz sum.
    pub bracket: f64,
}

/// Finite-interval proxy for {𝔞(λ), 𝔞(μ)}_T at position x: the (1,1)⊗(1,1)
/// entry of (ℰ₊(T)⁻¹ ⊗ ℰ₊(T)⁻¹)·{𝒯_1, 𝒯_2}·(ℰ₋(−T) ⊗ ℰ₋(−T)) with the
/// ℰ± end factors built from the field's time charges.
pub fn involution_check(
    field: &FieldEvaluator,
    x: f64,
    lambda: f64,
    mu: f64,
    n_sites: usize,
    half_width: f64,
) -> Result<InvolutionReport> {
    let p = &field.params;
    let sp1 = spectral(C64::new(lambda, 0.0), p)?;
    let sp2 = spectral(C64::new(mu, 0.0), p)?;
    let (qm, qp) = topological_charges(field, x, Picture::Time)?;
    let lattice = LatticePhaseSpace::from_field(Bracket::T, field, x, (-half_width, half_width), n_sites)?;
    let (t1, t2, br) = lattice.transition_bracket(&sp1, &sp2)?;
    let end = |sp: &SpectralPoint| -> Result<(Mat2, Mat2)> {
        let out = ce_pm(sp, qp, half_width)
            .inverse()
            .ok_or_else(|| Error::Numeric("singular end factor".into()))?;
        Ok((out, ce_pm(sp, qm, -half_width)))
    };
    let (o1, i1) = end(&sp1)?;
    let (o2, i2) = end(&sp2)?;
    let dressed = tensor(&o1, &o2) * br * tensor(&i1, &i2);
    Ok(InvolutionReport {
        n_sites,
        lambda,
        mu,
        a_lambda: (o1 * t1 * i1).m[0][0],
        a_mu: (o2 * t2 * i2).m[0][0],
        bracket: dressed.m[0][0].norm(),
    })
}

/// Involution proxy for a defect pair: on the right field at `x_right > 0`
/// and on the left field at `x_left < 0`. The B± factors of the defect
/// monodromy are field-independent and drop out of the bracket.
pub fn involution_check_pair(
    pair: &crate::defect::DefectPair,
    x_right: f64,
    x_left: f64,
    lambda: f64,
    mu: f64,
    n_sites: usize,
    half_width: f64,
) -> Result<(InvolutionReport, InvolutionReport)> {
    if !(x_right > 0.0 && x_left < 0.0) {
        return Err(Error::Argument("probe positions must lie on either side of the defect".into()));
    }
    Ok((
        involution_check(&pair.right, x_right, lambda, mu, n_sites, half_width)?,
        involution_check(&pair.left, x_left, lambda, mu, n_sites, half_width)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_kink, make_vacuum};
    use crate::lax::spectral_re;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn params(beta: f64) -> ModelParams {
        ModelParams::new(1.0, beta).unwrap()
    }

    #[test]
    fn coefficients_at_beta_four() {
        let r = r_matrix(C64::new(2.0, 0.0), C64::new(1.0, 0.0), &params(4.0)).unwrap();
        assert!((r.f - C64::new(-5.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((r.g - C64::new(4.0 / 3.0, 0.0)).norm() < 1e-15);
        assert_eq!(r.gamma_const, 1.0);
        assert!(r.matrix.m[0][0].norm() < 1e-15 && r.matrix.m[3][3].norm() < 1e-15);
    }

    #[test]
    fn singular_on_diagonal() {
        let one = C64::new(1.0, 0.0);
        assert!(r_matrix(one, one, &params(1.0)).is_err());
        assert!(r_matrix(one, -one, &params(1.0)).is_err());
    }

    #[test]
    fn antisymmetric_under_swap() {
        let p = params(1.3);
        let (l, m) = (C64::new(0.7, 0.2), C64::new(1.9, -0.4));
        let a = r_matrix(l, m, &p).unwrap();
        let b = r_matrix(m, l, &p).unwrap();
        assert!((a.f + b.f).norm() < 1e-14 && (a.g + b.g).norm() < 1e-14);
    }

    #[test]
    fn trigonometric_form_is_half_the_rational_one() {
        let p = params(1.7);
        let mut rng = StdRng::seed_from_u64(12345);
        for _ in 0..10 {
            let (a, b): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let r = r_matrix(C64::from_polar(1.0, a), C64::from_polar(1.0, b), &p).unwrap();
            let trig = r_trig(a - b, &p).unwrap();
            assert!((r.matrix - trig.scale(C64::new(2.0, 0.0))).max_abs() < 1e-12);
            assert!((r.matrix - trig).max_abs() > 1e-3);
        }
    }

    #[test]
    fn r_pm_entries() {
        let p = params(4.0);
        let r = r_pm(C64::new(2.0, 0.0), C64::new(1.0, 0.0), 1, &p).unwrap();
        assert!((r.corner - C64::new(-1.0 / 6.0, 0.0)).norm() < 1e-15);
        assert!((r.principal_value - C64::new(-1.5, 0.0)).norm() < 1e-15);
        let rm = r_pm(C64::new(2.0, 0.0), C64::new(1.0, 0.0), -1, &p).unwrap();
        assert!((r.delta_weight + rm.delta_weight).norm() < 1e-15);
    }

    #[test]
    fn ultralocal_identity_both_brackets() {
        let p = params(1.0);
        let sp1 = spectral_re(1.4, &p).unwrap();
        let sp2 = spectral_re(0.6, &p).unwrap();
        let s = FieldSample { phi: 0.8, phi_x: -0.3, phi_t: 1.1 };
        for b in [Bracket::S, Bracket::T] {
            assert!(ultralocal_check(b, &p, &s, &sp1, &sp2, 0.01).unwrap() < 1e-12);
            assert!(ultralocal_check_with_sign(b, &p, &s, &sp1, &sp2, 0.01, -b.sign()).unwrap() > 1e-2);
        }
        let vac = FieldSample { phi: 0.0, phi_x: 0.0, phi_t: 0.0 };
        assert!(site_bracket(Bracket::T, &p, 0.0, &sp1, &sp2, 0.01).max_abs() > 1e-3);
        assert!(ultralocal_check(Bracket::T, &p, &vac, &sp1, &sp2, 0.01).unwrap() < 1e-12);
    }

    #[test]
    fn distinct_sites_commute() {
        let f = make_kink(params(1.0), 0.3, 0.0, 1).unwrap();
        let l = LatticePhaseSpace::from_field(Bracket::T, &f, 0.5, (-2.0, 2.0), 20).unwrap();
        let sp = spectral_re(1.2, &l.params).unwrap();
        assert_eq!(l.lax_bracket(3, 4, &sp, &sp).max_abs(), 0.0);
        assert_eq!(l.canonical(3, 4), 0.0);
        assert_eq!(l.canonical(5, 5), 1.0 / l.delta);
    }

    #[test]
    fn transition_bracket_converges_first_order() {
        let p = params(1.0);
        let f = make_kink(p, 0.4, 0.0, 1).unwrap();
        let sp1 = spectral_re(1.5, &p).unwrap();
        let sp2 = spectral_re(0.8, &p).unwrap();
        let a = transition_bracket_check(Bracket::T, &f, 0.3, (-5.0, 5.0), &sp1, &sp2, 400).unwrap();
        let b = transition_bracket_check(Bracket::T, &f, 0.3, (-5.0, 5.0), &sp1, &sp2, 800).unwrap();
        let ratio = b.gap / a.gap;
        assert!((ratio - 0.5).abs() < 0.15, "{ratio}");
        let swapped = transition_bracket_check(Bracket::T, &f, 0.3, (-5.0, 5.0), &sp2, &sp1, 400).unwrap();
        assert!((swapped.gap - a.gap).abs() < 1e-3 * a.gap);
        let s = transition_bracket_check(Bracket::S, &f, 0.3, (-5.0, 5.0), &sp1, &sp2, 400).unwrap();
        let s2 = transition_bracket_check(Bracket::S, &f, 0.3, (-5.0, 5.0), &sp1, &sp2, 800).unwrap();
        assert!((s2.gap / s.gap - 0.5).abs() < 0.15);
    }

    #[test]
    fn vacuum_transition_bracket_is_order_delta() {
        let p = params(1.0);
        let f = make_vacuum(p);
        let sp1 = spectral_re(1.5, &p).unwrap();
        let sp2 = spectral_re(0.8, &p).unwrap();
        let a = transition_bracket_check(Bracket::T, &f, 0.0, (-5.0, 5.0), &sp1, &sp2, 400).unwrap();
        assert!(a.scale > 1e-2);
        assert!(a.gap < 0.05 * a.scale, "{a:?}");
    }

    #[test]
    fn involution_proxy() {
        let p = params(1.0);
        let vac = involution_check(&make_vacuum(p), 0.0, 1.5, 0.8, 200, 10.0).unwrap();
        assert!(vac.bracket < 1e-12);
        let f = make_kink(p, 0.4, 0.0, 1).unwrap();
        let coarse = involution_check(&f, 0.5, 1.5, 0.8, 400, 30.0).unwrap();
        let fine = involution_check(&f, 0.5, 1.5, 0.8, 800, 30.0).unwrap();
        assert!(fine.bracket < 5e-3, "{fine:?}");
        assert!(fine.bracket <= coarse.bracket || fine.bracket < 1e-12, "{coarse:?} {fine:?}");
    }
}
