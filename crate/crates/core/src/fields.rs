//! Exact sine-Gordon configurations, their energy densities in both
//! pictures, and topological data.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::defect::GridField;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::matcore::{C64, ONE};

/// Distance from the sample point at which asymptotic values are read.
pub const ASYMPTOTIC_PROBE: f64 = 1e3;

/// Tail density above which quadrature results carry a truncation warning.
pub const TAIL_WARNING: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: f64,
    pub beta: f64,
}

impl ModelParams {
    pub fn new(m: f64, beta: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Argument(format!("mass must be positive, got {m}")));
        }
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Argument("coupling β must be nonzero".into()));
        }
        Ok(ModelParams { m, beta })
    }

    /// m = β = 1.
    pub fn unit() -> Self {
        ModelParams { m: 1.0, beta: 1.0 }
    }

    /// Spacing 2π/β between neighbouring vacua.
    pub fn vacuum_period(&self) -> f64 {
        2.0 * PI / self.beta.abs()
    }
}

/// Equal-time or equal-space description.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    /// Evolution in t; quantities are integrated over x at fixed t.
    Space,
    /// Evolution in x; quantities are integrated over t at fixed x.
    Time,
}

impl Picture {
    pub fn name(&self) -> &'static str {
        match self {
            Picture::Space => "space",
            Picture::Time => "time",
        }
    }

    /// The point `(x, t)` on the line at `fixed` with running coordinate `s`.
    pub fn point(&self, fixed: f64, s: f64) -> (f64, f64) {
        match self {
            Picture::Space => (s, fixed),
            Picture::Time => (fixed, s),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldSample {
    pub phi: f64,
    pub phi_x: f64,
    pub phi_t: f64,
}

impl FieldSample {
    /// Momentum conjugate to φ for the equal-time bracket, π = φ_t.
    pub fn pi(&self) -> f64 {
        self.phi_t
    }

    /// Momentum conjugate to φ for the equal-space bracket, Π = −φ_x.
    pub fn big_pi(&self) -> f64 {
        -self.phi_x
    }
}

/// Taylor jets of φ, φ_x, φ_t along a line in the running coordinate.
#[derive(Clone, Copy, Debug)]
pub struct LineJets {
    pub phi: Jet,
    pub phi_x: Jet,
    pub phi_t: Jet,
}

#[derive(Clone, Debug)]
pub enum FieldKind {
    Vacuum,
    Kink { v: f64, x0: f64, orientation: i8 },
    /// Solution obtained by integrating the Bäcklund relations on a grid.
    Grid(Arc<GridField>),
    /// `factor · inner`; not a solution unless the factor is 1. Used for negative controls.
    Scaled { inner: Box<FieldEvaluator>, factor: f64 },
}

#[derive(Clone, Debug)]
pub struct FieldEvaluator {
    pub params: ModelParams,
    pub kind: FieldKind,
}

pub fn make_vacuum(params: ModelParams) -> FieldEvaluator {
    FieldEvaluator { params, kind: FieldKind::Vacuum }
}

/// φ = (4/β) arctan exp(o·mγ(x − vt − x0)).
pub fn make_kink(params: ModelParams, v: f64, x0: f64, orientation: i8) -> Result<FieldEvaluator> {
    if !(v.abs() < 1.0) {
        return Err(Error::Argument(format!("kink velocity must satisfy |v| < 1, got {v}")));
    }
    if orientation != 1 && orientation != -1 {
        return Err(Error::Argument(format!("orientation must be ±1, got {orientation}")));
    }
    Ok(FieldEvaluator { params, kind: FieldKind::Kink { v, x0, orientation } })
}

pub fn lorentz_gamma(v: f64) -> f64 {
    1.0 / (1.0 - v * v).sqrt()
}

/// (4/β)·arctan(e^ξ) and (4/β)·d/dξ arctan(e^ξ), stable for large |ξ|.
fn kink_profile(beta: f64, xi: f64) -> (f64, f64) {
    let u = (-xi.abs()).exp();
    let at = if xi > 0.0 { PI / 2.0 - u.atan() } else { u.atan() };
    let sech = 2.0 * u / (1.0 + u * u);
    (4.0 / beta * at, 2.0 / beta * sech)
}

impl FieldEvaluator {
    pub fn scaled(&self, factor: f64) -> FieldEvaluator {
        FieldEvaluator {
            params: self.params,
            kind: FieldKind::Scaled { inner: Box::new(self.clone()), factor },
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self.kind, FieldKind::Vacuum)
    }

    pub fn sample(&self, x: f64, t: f64) -> FieldSample {
        match &self.kind {
            FieldKind::Vacuum => FieldSample::default(),
            FieldKind::Kink { v, x0, orientation } => {
                let o = *orientation as f64;
                let mg = self.params.m * lorentz_gamma(*v);
                let xi = o * mg * (x - v * t - x0);
                let (phi, dphi) = kink_profile(self.params.beta, xi);
                FieldSample { phi, phi_x: o * mg * dphi, phi_t: -o * mg * v * dphi }
            }
            FieldKind::Grid(g) => g.sample(x, t),
            FieldKind::Scaled { inner, factor } => {
                let s = inner.sample(x, t);
                FieldSample { phi: factor * s.phi, phi_x: factor * s.phi_x, phi_t: factor * s.phi_t }
            }
        }
    }

    /// Exact Taylor jets of the field along the line at `fixed`, expanded at
    /// running coordinate `s`, with `len` coefficients.
    pub fn line_jets(&self, picture: Picture, fixed: f64, s: f64, len: usize) -> Result<LineJets> {
        let (x, t) = picture.point(fixed, s);
        match &self.kind {
            FieldKind::Vacuum => {
                let z = Jet::zero(len);
                Ok(LineJets { phi: z, phi_x: z, phi_t: z })
            }
            FieldKind::Kink { v, x0, orientation } => {
                let o = *orientation as f64;
                let beta = self.params.beta;
                let mg = self.params.m * lorentz_gamma(*v);
                let xi0 = o * mg * (x - v * t - x0);
                let slope = match picture {
                    Picture::Space => o * mg,
                    Picture::Time => -o * mg * v,
                };
                // u = e^{−|ξ|} keeps the jet arithmetic bounded on both sides.
                let sgn = if xi0 > 0.0 { 1.0 } else { -1.0 };
                let u = Jet::variable(C64::new(-sgn * xi0, 0.0), C64::new(-sgn * slope, 0.0), len).exp();
                let at = u.atan();
                let phi = if sgn > 0.0 {
                    (-at).add_const(C64::new(PI / 2.0, 0.0)).scale_re(4.0 / beta)
                } else {
                    at.scale_re(4.0 / beta)
                };
                let sech = u.scale_re(2.0).div(&(u * u).add_const(ONE));
                let dphi = sech.scale_re(2.0 / beta);
                Ok(LineJets {
                    phi,
                    phi_x: dphi.scale_re(o * mg),
                    phi_t: dphi.scale_re(-o * mg * v),
                })
            }
            FieldKind::Scaled { inner, factor } => {
                let j = inner.line_jets(picture, fixed, s, len)?;
                Ok(LineJets {
                    phi: j.phi.scale_re(*factor),
                    phi_x: j.phi_x.scale_re(*factor),
                    phi_t: j.phi_t.scale_re(*factor),
                })
            }
            FieldKind::Grid(_) => Err(Error::Unsupported(
                "exact derivative jets are not available for grid-backed fields".into(),
            )),
        }
    }

    /// Largest of |φ − nearest vacuum|, |φ_x|, |φ_t| at a point.
    pub fn asymptote_deviation(&self, x: f64, t: f64) -> f64 {
        let s = self.sample(x, t);
        let p = self.params.vacuum_period();
        let d = (s.phi - (s.phi / p).round() * p).abs();
        d.max(s.phi_x.abs()).max(s.phi_t.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub nx: usize,
    pub nt: usize,
}

impl GridWindow {
    pub fn new(x_min: f64, x_max: f64, t_min: f64, t_max: f64, nx: usize, nt: usize) -> Result<Self> {
        let w = GridWindow { x_min, x_max, t_min, t_max, nx, nt };
        w.validate()?;
        Ok(w)
    }

    /// Symmetric window `[−w, w]²` with `n` points per axis.
    pub fn symmetric(w: f64, n: usize) -> Self {
        GridWindow { x_min: -w, x_max: w, t_min: -w, t_max: w, nx: n, nt: n }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min < self.x_max && self.t_min < self.t_max) {
            return Err(Error::Argument("grid window bounds must be increasing".into()));
        }
        if self.nx < 2 || self.nt < 2 {
            return Err(Error::Argument("grid window needs at least two points per axis".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.nt - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t_min + j as f64 * self.dt()
    }

    /// Range and point count along the running coordinate of `picture`.
    pub fn line(&self, picture: Picture) -> (f64, f64, usize) {
        match picture {
            Picture::Space => (self.x_min, self.x_max, self.nx),
            Picture::Time => (self.t_min, self.t_max, self.nt),
        }
    }
}

/// A quadrature value together with the integrand magnitude at the window edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    pub tail: f64,
    pub truncation_warning: bool,
}

/// Composite Simpson rule on `n` uniformly spaced samples of `f` over `[a, b]`.
/// An even `n` falls back to Simpson on the first `n − 1` points plus a
/// cubic end correction (Simpson 3/8 on the last four).
pub fn simpson<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> f64 {
    let vals: Vec<f64> = (0..n).map(|i| f(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
    simpson_samples(&vals, (b - a) / (n - 1) as f64)
}

pub fn simpson_samples(vals: &[f64], h: f64) -> f64 {
    simpson_generic(vals, h, 0.0)
}

pub fn simpson_samples_c(vals: &[C64], h: f64) -> C64 {
    simpson_generic(vals, h, C64::new(0.0, 0.0))
}

fn simpson_generic<T>(vals: &[T], h: f64, zero: T) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = vals.len();
    match n {
        0 | 1 => zero,
        2 => (vals[0] + vals[1]) * (h / 2.0),
        3 => (vals[0] + vals[1] * 4.0 + vals[2]) * (h / 3.0),
        _ if n % 2 == 1 => {
            let mut s = vals[0] + vals[n - 1];
            for (i, &v) in vals.iter().enumerate().take(n - 1).skip(1) {
                s = s + v * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * (h / 3.0)
        }
        _ => {
            let head = simpson_generic(&vals[..n - 3], h, zero);
            let t = &vals[n - 4..];
            head + (t[0] + t[1] * 3.0 + t[2] * 3.0 + t[3]) * (3.0 * h / 8.0)
        }
    }
}

fn potential(params: &ModelParams, phi: f64) -> f64 {
    let s = (params.beta * phi / 2.0).sin();
    // 1 − cos βφ = 2 sin²(βφ/2)
    params.m * params.m / (params.beta * params.beta) * 2.0 * s * s
}

/// ℋ_S = ½π² + ½φ_x² + (m²/β²)(1 − cos βφ).
pub fn density_s(params: &ModelParams, s: &FieldSample) -> f64 {
    0.5 * s.pi() * s.pi() + 0.5 * s.phi_x * s.phi_x + potential(params, s.phi)
}

/// ℋ_T = −½Π² − ½φ_t² + (m²/β²)(1 − cos βφ).
pub fn density_t(params: &ModelParams, s: &FieldSample) -> f64 {
    -0.5 * s.big_pi() * s.big_pi() - 0.5 * s.phi_t * s.phi_t + potential(params, s.phi)
}

fn quadrature_line(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    window: &GridWindow,
    density: fn(&ModelParams, &FieldSample) -> f64,
) -> Result<Quadrature> {
    window.validate()?;
    let (a, b, n) = window.line(picture);
    let dens = |s: f64| {
        let (x, t) = picture.point(fixed, s);
        density(&field.params, &field.sample(x, t))
    };
    let tail = dens(a).abs().max(dens(b).abs());
    let value = simpson(a, b, n, dens);
    if !value.is_finite() {
        return Err(Error::Numeric("non-finite energy quadrature".into()));
    }
    Ok(Quadrature { value, tail, truncation_warning: tail > TAIL_WARNING })
}

/// H_S = ∫ ℋ_S dx at fixed t over the window's x-range.
pub fn hamiltonian_s(field: &FieldEvaluator, t: f64, window: &GridWindow) -> Result<Quadrature> {
    quadrature_line(field, Picture::Space, t, window, density_s)
}

/// H_T = ∫ ℋ_T dt at fixed x over the window's t-range.
pub fn hamiltonian_t(field: &FieldEvaluator, x: f64, window: &GridWindow) -> Result<Quadrature> {
    quadrature_line(field, Picture::Time, x, window, density_t)
}

fn round_charge(params: &ModelParams, phi: f64) -> Result<i64> {
    let p = params.vacuum_period();
    let q = (phi / p).round();
    let distance = (phi - q * p).abs();
    if distance > 0.1 * p {
        return Err(Error::NonDecaying { distance });
    }
    Ok(q as i64)
}

/// (Q₋, Q₊) at fixed t (space picture) or (𝒬₋, 𝒬₊) at fixed x (time picture).
pub fn topological_charges(field: &FieldEvaluator, at: f64, picture: Picture) -> Result<(i64, i64)> {
    let (xm, tm) = picture.point(at, -ASYMPTOTIC_PROBE);
    let (xp, tp) = picture.point(at, ASYMPTOTIC_PROBE);
    let qm = round_charge(&field.params, field.sample(xm, tm).phi)?;
    let qp = round_charge(&field.params, field.sample(xp, tp).phi)?;
    Ok((qm, qp))
}

/// φ_tt − φ_xx + (m²/β) sin βφ, with second derivatives from central
/// differences (step h) of the sampled first derivatives.
pub fn sg_residual(field: &FieldEvaluator, x: f64, t: f64, h: f64) -> f64 {
    let ptt = (field.sample(x, t + h).phi_t - field.sample(x, t - h).phi_t) / (2.0 * h);
    let pxx = (field.sample(x + h, t).phi_x - field.sample(x - h, t).phi_x) / (2.0 * h);
    let p = field.params;
    let phi = field.sample(x, t).phi;
    ptt - pxx + p.m * p.m / p.beta * (p.beta * phi).sin()
}

/// φ_tt − φ_xx + (m²/β) sin βφ with all derivatives from second differences of φ.
pub fn sg_residual_from_values(field: &FieldEvaluator, x: f64, t: f64, h: f64) -> f64 {
    let f = |x: f64, t: f64| field.sample(x, t).phi;
    let c = f(x, t);
    let ptt = (f(x, t + h) - 2.0 * c + f(x, t - h)) / (h * h);
    let pxx = (f(x + h, t) - 2.0 * c + f(x - h, t)) / (h * h);
    let p = field.params;
    ptt - pxx + p.m * p.m / p.beta * (p.beta * c).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_kink(v: f64) -> FieldEvaluator {
        make_kink(ModelParams::unit(), v, 0.0, 1).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.0).is_err());
        assert!(ModelParams::new(2.0, -0.5).is_ok());
    }

    #[test]
    fn vacuum_is_zero() {
        let f = make_vacuum(ModelParams::unit());
        assert_eq!(f.sample(3.2, -1.1), FieldSample::default());
        assert_eq!(sg_residual(&f, 0.3, 0.1, 1e-3), 0.0);
        assert_eq!(topological_charges(&f, 0.0, Picture::Space).unwrap(), (0, 0));
        let w = GridWindow::symmetric(10.0, 101);
        assert_eq!(hamiltonian_s(&f, 0.0, &w).unwrap().value, 0.0);
        assert_eq!(hamiltonian_t(&f, 0.0, &w).unwrap().value, 0.0);
    }

    #[test]
    fn kink_basic_values() {
        let k = unit_kink(0.0);
        assert!((k.sample(0.0, 0.0).phi - PI).abs() < 1e-15);
        assert_eq!(topological_charges(&k, 0.0, Picture::Space).unwrap(), (0, 1));
        assert!(make_kink(ModelParams::unit(), 1.0, 0.0, 1).is_err());
        assert!(make_kink(ModelParams::unit(), 0.2, 0.0, 0).is_err());
    }

    #[test]
    fn kink_time_charges_right_of_centre() {
        let k = unit_kink(0.5);
        assert_eq!(topological_charges(&k, 2.0, Picture::Space).unwrap(), (0, 1));
        // at fixed x > x0 the kink centre passes from left to right: φ goes 2π → 0 in t
        assert_eq!(topological_charges(&k, 1.0, Picture::Time).unwrap(), (1, 0));
    }

    #[test]
    fn non_decaying_detected() {
        let k = unit_kink(0.0).scaled(0.5);
        assert!(matches!(
            topological_charges(&k, 0.0, Picture::Space),
            Err(Error::NonDecaying { .. })
        ));
    }

    #[test]
    fn kink_residual_small_at_random_points() {
        // deterministic pseudo-random points
        let params = ModelParams::new(1.3, 0.7).unwrap();
        for (i, v) in [-0.7, -0.2, 0.0, 0.4, 0.9].iter().enumerate() {
            let k = make_kink(params, *v, 0.3, if i % 2 == 0 { 1 } else { -1 }).unwrap();
            for j in 0..4 {
                let x = -2.0 + 1.1 * j as f64 + 0.37 * i as f64;
                let t = 0.8 - 0.45 * j as f64;
                assert!(sg_residual(&k, x, t, 1e-4).abs() < 1e-6);
                assert!(sg_residual_from_values(&k, x, t, 1e-4).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn residual_converges_at_second_order() {
        let k = unit_kink(0.3);
        let r1 = sg_residual(&k, 0.4, 0.2, 1e-2).abs();
        let r2 = sg_residual(&k, 0.4, 0.2, 5e-3).abs();
        let order = (r1 / r2).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn hamiltonian_s_kink() {
        let w = GridWindow::new(-40.0, 40.0, -1.0, 1.0, 16001, 2).unwrap();
        let h0 = hamiltonian_s(&unit_kink(0.0), 0.0, &w).unwrap();
        assert!((h0.value - 8.0).abs() < 1e-6, "{}", h0.value);
        assert!(!h0.truncation_warning);
        let h6 = hamiltonian_s(&unit_kink(0.6), 0.0, &w).unwrap();
        assert!((h6.value - 10.0).abs() < 1e-5);
        // evaluation time does not matter
        let h6b = hamiltonian_s(&unit_kink(0.6), 3.0, &w).unwrap();
        assert!(((h6b.value - h6.value) / h6.value).abs() < 1e-6);
        for v in [0.2, 0.5, 0.8] {
            let hv = hamiltonian_s(&unit_kink(v), 0.0, &w).unwrap();
            assert!((hv.value / h0.value - lorentz_gamma(v)).abs() < 1e-5);
        }
    }

    #[test]
    fn hamiltonian_s_window_too_small_warns() {
        let w = GridWindow::new(-5.0, 5.0, -1.0, 1.0, 1001, 2).unwrap();
        assert!(hamiltonian_s(&unit_kink(0.0), 0.0, &w).unwrap().truncation_warning);
    }

    #[test]
    fn hamiltonian_t_kink() {
        // −8γ|v|/β² for a kink; independent of x and of the sign of v
        let coarse = GridWindow::new(-1.0, 1.0, -80.0, 80.0, 2, 16001).unwrap();
        let fine = GridWindow::new(-1.0, 1.0, -80.0, 80.0, 2, 32001).unwrap();
        let k = unit_kink(0.6);
        let a = hamiltonian_t(&k, 0.0, &coarse).unwrap().value;
        let b = hamiltonian_t(&k, 0.0, &fine).unwrap().value;
        assert!((a - b).abs() < 1e-6);
        assert!((b + 6.0).abs() < 1e-6, "{b}");
        let c = hamiltonian_t(&k, 1.0, &fine).unwrap().value;
        assert!(((c - b) / b).abs() < 1e-6);
        let d = hamiltonian_t(&unit_kink(-0.6), 0.0, &fine).unwrap().value;
        assert!((d - b).abs() < 1e-6);
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let f = |x: f64| 1.0 - 2.0 * x + 3.0 * x * x * x;
        let exact = 2.0 - 4.0 + 3.0 * 4.0; // ∫_0^2
        assert!((simpson(0.0, 2.0, 11, f) - exact).abs() < 1e-12);
        assert!((simpson(0.0, 2.0, 12, f) - exact).abs() < 1e-12);
        assert!((simpson(0.0, 2.0, 4, f) - exact).abs() < 1e-12);
    }

    #[test]
    fn kink_jets_match_samples() {
        let k = make_kink(ModelParams::new(1.2, 0.8).unwrap(), 0.3, 0.1, -1).unwrap();
        for pic in [Picture::Space, Picture::Time] {
            for s in [-3.0, -0.2, 0.5, 4.0] {
                let j = k.line_jets(pic, 0.7, s, 6).unwrap();
                let (x, t) = pic.point(0.7, s);
                let smp = k.sample(x, t);
                assert!((j.phi.value().re - smp.phi).abs() < 1e-13);
                assert!((j.phi_x.value().re - smp.phi_x).abs() < 1e-13);
                assert!((j.phi_t.value().re - smp.phi_t).abs() < 1e-13);
                let dir = match pic {
                    Picture::Space => smp.phi_x,
                    Picture::Time => smp.phi_t,
                };
                assert!((j.phi.derivative_value(1).re - dir).abs() < 1e-12);
                // second derivative against finite differences
                let h = 1e-4;
                let (xp, tp) = pic.point(0.7, s + h);
                let (xm, tm) = pic.point(0.7, s - h);
                let fd = (k.sample(xp, tp).phi_x - k.sample(xm, tm).phi_x) / (2.0 * h);
                assert!((j.phi_x.derivative_value(1).re - fd).abs() < 1e-7);
            }
        }
    }
}
