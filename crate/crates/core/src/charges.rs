//! Conserved charges from the Riccati dressing of the auxiliary problem.
//!
//! Writing the Jost solution as `(𝟙 + Γ)e^Z` with Γ off-diagonal, Γ obeys
//! `Γ_s = Ĝ_o + Ĝ_dΓ − ΓĜ_d − ΓĜ_oΓ` (Ĝ = Û or V̂). Both generators share
//! the structure
//!
//! ```text
//! Ĝ = −i A σ3 − i(m/4)σ2(λ + ε E/λ),   E = exp(iβφσ3)
//! ```
//! with `A = (β/4)(φ_x + φ_t)` in both pictures and `ε = −1` (space),
//! `ε = +1` (time). Expanding `Γ = Σ Γ_n λ^{−n}` gives, with `Γ_0 = iσ1`,
//!
//! ```text
//! Γ_{n+1} = −(2i/m)Γ_n' σ3 − (4A/m)Γ_n + ε(i/2)σ1E δ_{n,1}
//!           + (i/2)(Σ_{p=1}^{n} Γ_p σ1 Γ_{n+1−p} + ε Σ_{p=0}^{n−1} Γ_p σ1 E Γ_{n−1−p})
//! ```
//! and `ln a(λ) = i Σ I_n λ^{−n}` with `I_n` the (1,1) entry of
//! `∫ −(m/4)σ2(Γ_{n+1} + εEΓ_{n−1} − εiσ1 δ_{n,1})`.
//!
//! As λ → 0 the same recursion applies with `E → E⁻¹` and `A → A'` where
//! `A' = (β/4)(π − φ_x)` (space) or `(β/4)(−φ_t − Π)` (time), i.e. φ → −φ
//! with the momentum left unchanged.
//!
//! Field derivatives come from exact Taylor jets supplied by the field.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{simpson_samples_c, FieldEvaluator, GridWindow, Picture};
use crate::jet::Jet;
use crate::lax::{gauged_generator, spectral_re};
use crate::matcore::{Mat2, C64, I, ONE, ZERO};
use crate::transition::{monodromy_with, Stepper};

pub const MAX_ORDER: usize = 8;

/// Which transcription of the δ_{n,1} source term is used.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum RecursionForm {
    /// Source `ε(i/2)σ1E δ_{n,1}`; keeps the vacuum coefficients at zero.
    #[default]
    Derived,
    /// Source `ε(i/2)σ1(E − E⁻¹) δ_{n,1}`, the form as usually printed.
    /// It leaves `Γ_2 = −ε(i/2)σ1` on the vacuum and fails the Riccati check.
    Printed,
}

/// Expansion point of the spectral parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Expansion {
    /// λ → ∞: `Γ = Σ Γ_n λ^{−n}`.
    Infinity,
    /// λ → 0: coefficients G_n of the substituted recursion.
    Zero,
}

/// Off-diagonal matrix `[[0, p], [q, 0]]` with jet entries.
#[derive(Clone, Copy, Debug)]
struct OffJet {
    p: Jet,
    q: Jet,
}

impl OffJet {
    fn zero(len: usize) -> Self {
        OffJet { p: Jet::zero(len), q: Jet::zero(len) }
    }

    fn add(self, o: OffJet) -> OffJet {
        OffJet { p: self.p + o.p, q: self.q + o.q }
    }

    fn scale(self, s: C64) -> OffJet {
        OffJet { p: self.p.scale(s), q: self.q.scale(s) }
    }

    fn mul_scalar(self, a: &Jet) -> OffJet {
        OffJet { p: self.p * *a, q: self.q * *a }
    }

    fn deriv(self) -> OffJet {
        OffJet { p: self.p.deriv(), q: self.q.deriv() }
    }

    /// X σ3.
    fn times_sigma3(self) -> OffJet {
        OffJet { p: -self.p, q: self.q }
    }

    /// X σ1 Y.
    fn sigma1_product(self, o: OffJet) -> OffJet {
        OffJet { p: self.p * o.p, q: self.q * o.q }
    }

    /// X σ1 E Y with E = diag(e, e⁻¹).
    fn sigma1_e_product(self, o: OffJet, e: &Jet, e_inv: &Jet) -> OffJet {
        OffJet { p: self.p * *e * o.p, q: self.q * *e_inv * o.q }
    }

    fn value(&self) -> Mat2 {
        Mat2::new(ZERO, self.p.value(), self.q.value(), ZERO)
    }
}

/// Recursion inputs along a line: diagonal coefficient A, phase jets
/// e = exp(iθ), e⁻¹, and the sign ε.
struct RecursionInput {
    a: Jet,
    e: Jet,
    e_inv: Jet,
    eps: f64,
}

fn run_recursion(inp: &RecursionInput, m: f64, count: usize, form: RecursionForm) -> Vec<OffJet> {
    let len = inp.a.len();
    let mut g = Vec::with_capacity(count);
    let i = Jet::constant(I, len);
    g.push(OffJet { p: i, q: i });
    let eps = C64::new(inp.eps, 0.0);
    let half_i = I * 0.5;
    for n in 0..count.saturating_sub(1) {
        let mut next = g[n].deriv().times_sigma3().scale(-2.0 * I / m);
        next = next.add(g[n].mul_scalar(&inp.a).scale(C64::new(-4.0 / m, 0.0)));
        if n == 1 {
            // σ1E = [[0, e⁻¹], [e, 0]]
            let src = match form {
                RecursionForm::Derived => OffJet { p: inp.e_inv, q: inp.e },
                RecursionForm::Printed => OffJet { p: inp.e_inv - inp.e, q: inp.e - inp.e_inv },
            };
            next = next.add(src.scale(eps * half_i));
        }
        let mut quad = OffJet::zero(len);
        for p in 1..=n {
            quad = quad.add(g[p].sigma1_product(g[n + 1 - p]));
        }
        if n >= 1 {
            let mut s = OffJet::zero(len);
            for p in 0..n {
                s = s.add(g[p].sigma1_e_product(g[n - 1 - p], &inp.e, &inp.e_inv));
            }
            quad = quad.add(s.scale(eps));
        }
        next = next.add(quad.scale(half_i));
        g.push(next);
    }
    g
}

fn picture_sign(picture: Picture) -> f64 {
    match picture {
        Picture::Space => -1.0,
        Picture::Time => 1.0,
    }
}

fn recursion_input(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    s: f64,
    len: usize,
    expansion: Expansion,
) -> Result<RecursionInput> {
    let j = field.line_jets(picture, fixed, s, len)?;
    let beta = field.params.beta;
    let theta = j.phi.scale_re(beta);
    let e = theta.scale(I).exp();
    let e_inv = theta.scale(-I).exp();
    let eps = picture_sign(picture);
    let q = beta / 4.0;
    Ok(match expansion {
        Expansion::Infinity => RecursionInput { a: (j.phi_x + j.phi_t).scale_re(q), e, e_inv, eps },
        Expansion::Zero => {
            let a = match picture {
                // π − φ_x with π = φ_t
                Picture::Space => (j.phi_t - j.phi_x).scale_re(q),
                // −φ_t − Π with Π = −φ_x
                Picture::Time => (j.phi_x - j.phi_t).scale_re(q),
            };
            RecursionInput { a, e: e_inv, e_inv: e, eps }
        }
    })
}

/// Riccati coefficients Γ_0 … Γ_{order+1} at one point of a line.
pub fn riccati_at(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    s: f64,
    order: usize,
    form: RecursionForm,
    expansion: Expansion,
) -> Result<Vec<Mat2>> {
    check_order(order)?;
    let inp = recursion_input(field, picture, fixed, s, order + 3, expansion)?;
    Ok(run_recursion(&inp, field.params.m, order + 2, form).iter().map(|g| g.value()).collect())
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Argument(format!("charge order must be in 1..={MAX_ORDER}, got {order}")));
    }
    Ok(())
}

/// Tabulated Riccati coefficients along a line.
#[derive(Clone, Debug, Serialize)]
pub struct RiccatiCoefficients {
    pub picture: Picture,
    pub expansion: Expansion,
    pub form: RecursionForm,
    pub order: usize,
    pub fixed: f64,
    pub points: Vec<f64>,
    /// `coeffs[n][k]` is coefficient n at `points[k]`, n = 0..=order+1.
    pub coeffs: Vec<Vec<Mat2>>,
}

pub fn riccati_coeffs(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    order: usize,
    points: &[f64],
    form: RecursionForm,
    expansion: Expansion,
) -> Result<RiccatiCoefficients> {
    check_order(order)?;
    let mut coeffs = vec![Vec::with_capacity(points.len()); order + 2];
    for &s in points {
        for (n, g) in riccati_at(field, picture, fixed, s, order, form, expansion)?.into_iter().enumerate() {
            coeffs[n].push(g);
        }
    }
    Ok(RiccatiCoefficients { picture, expansion, form, order, fixed, points: points.to_vec(), coeffs })
}

/// ‖Γ_s − (Ĝ_o + Ĝ_dΓ − ΓĜ_d − ΓĜ_oΓ)‖ for the λ → ∞ series truncated after Γ_N.
pub fn riccati_residual(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    s: f64,
    lambda: f64,
    truncation: usize,
    form: RecursionForm,
) -> Result<f64> {
    check_order(truncation)?;
    let inp = recursion_input(field, picture, fixed, s, truncation + 3, Expansion::Infinity)?;
    let g = run_recursion(&inp, field.params.m, truncation + 1, form);
    let mut gamma = Mat2::zero();
    let mut gamma_s = Mat2::zero();
    for (n, gn) in g.iter().enumerate() {
        let w = C64::new(lambda.powi(-(n as i32)), 0.0);
        gamma += gn.value().scale(w);
        gamma_s += gn.deriv().value().scale(w);
    }
    let sp = spectral_re(lambda, &field.params)?;
    let (x, t) = picture.point(fixed, s);
    let gen = gauged_generator(field, picture, x, t, &sp);
    let (gd, go) = (gen.diagonal(), gen.off_diagonal());
    let rhs = go + gd * gamma - gamma * gd - gamma * go * gamma;
    Ok((gamma_s - rhs).norm())
}

/// (1,1) entries of the charge densities at one point: index 0 holds the
/// density of n = 0 (zero side only) and index n the density of I_n (or I_{−n}).
fn densities_at(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    s: f64,
    order: usize,
    form: RecursionForm,
    expansion: Expansion,
) -> Result<Vec<C64>> {
    let inp = recursion_input(field, picture, fixed, s, order + 3, expansion)?;
    let g = run_recursion(&inp, field.params.m, order + 2, form);
    let m = field.params.m;
    let q: Vec<C64> = g.iter().map(|x| x.q.value()).collect();
    // the (2,1) entry of E Γ (λ → ∞) or E⁻¹G (λ → 0) is e_conj·q with e_conj
    // being inp.e_inv in both cases
    let e21 = inp.e_inv.value();
    let eps = inp.eps;
    let mut out = vec![ZERO; order + 1];
    let line = field.line_jets(picture, fixed, s, 2)?;
    let phi_s = line.phi.derivative_value(1).re;
    if expansion == Expansion::Zero {
        out[0] = C64::new(-field.params.beta / 2.0 * phi_s, 0.0);
    }
    for n in 1..=order {
        let delta = if n == 1 { ONE } else { ZERO };
        // (1,1) entry of −(m/4)σ2 X is i(m/4) X_21
        let x21 = match expansion {
            Expansion::Infinity => q[n + 1] + e21 * q[n - 1] * eps - I * delta * eps,
            Expansion::Zero => match picture {
                Picture::Space => {
                    let sgn = if n % 2 == 1 { 1.0 } else { -1.0 };
                    (e21 * q[n - 1] - q[n + 1]) * sgn - I * delta
                }
                Picture::Time => e21 * q[n - 1] + q[n + 1] - I * delta,
            },
        };
        out[n] = I * (m / 4.0) * x21;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Recursion,
    MonodromyFit,
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::Recursion => "recursion",
            Provenance::MonodromyFit => "monodromy_fit",
        }
    }
}

/// Conserved charges of one picture: `I_n` (space) or `J_n` (time).
#[derive(Clone, Debug, Serialize)]
pub struct ChargeLedger {
    pub picture: Picture,
    /// Time (space picture) or position (time picture) of evaluation.
    pub fixed: f64,
    /// `(n, value)` for n ≥ 1 from the λ → ∞ expansion.
    pub positive: Vec<(i32, C64)>,
    /// `(−n, value)` for n ≥ 0 from the λ → 0 expansion.
    pub zero_side: Vec<(i32, C64)>,
    pub provenance: Provenance,
    /// Largest |density| at the window ends.
    pub tail: f64,
    pub truncation_warning: bool,
}

impl ChargeLedger {
    /// Charge with index n (negative n from the zero side).
    pub fn get(&self, n: i32) -> Option<C64> {
        self.positive
            .iter()
            .chain(self.zero_side.iter())
            .find(|(k, _)| *k == n)
            .map(|(_, v)| *v)
    }

    pub fn entries(&self) -> impl Iterator<Item = &(i32, C64)> {
        self.zero_side.iter().rev().chain(self.positive.iter())
    }

    /// CSV with columns picture, n, value_re, value_im, provenance, drift.
    /// Drift is |value − reference value| when a reference ledger is given.
    pub fn to_csv(&self, reference: Option<&ChargeLedger>) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Numeric(format!("csv: {e}"));
        w.write_record(["picture", "n", "value_re", "value_im", "provenance", "drift"]).map_err(io)?;
        for (n, v) in self.entries() {
            let drift = reference
                .and_then(|r| r.get(*n))
                .map(|r| format!("{:.6e}", (r - v).norm()))
                .unwrap_or_default();
            w.write_record([
                self.picture.name().to_string(),
                n.to_string(),
                format!("{:.12e}", v.re),
                format!("{:.12e}", v.im),
                self.provenance.name().to_string(),
                drift,
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numeric(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Numeric(e.to_string()))
    }
}

fn integrate_densities(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    order: usize,
    window: &GridWindow,
    form: RecursionForm,
    expansion: Expansion,
) -> Result<(Vec<C64>, f64)> {
    check_order(order)?;
    window.validate()?;
    let (a, b, n) = window.line(picture);
    let h = (b - a) / (n - 1) as f64;
    let mut columns = vec![Vec::with_capacity(n); order + 1];
    let mut tail: f64 = 0.0;
    for k in 0..n {
        let s = a + k as f64 * h;
        let d = densities_at(field, picture, fixed, s, order, form, expansion)?;
        if k == 0 || k == n - 1 {
            tail = tail.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        for (c, v) in columns.iter_mut().zip(d) {
            c.push(v);
        }
    }
    let vals: Vec<C64> = columns.iter().map(|c| simpson_samples_c(c, h)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite charge density".into()));
    }
    Ok((vals, tail))
}

/// `I_1 … I_order` (space picture, line at fixed t) or `J_1 … J_order` (time picture).
pub fn charges_infinity(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    order: usize,
    window: &GridWindow,
) -> Result<ChargeLedger> {
    charges_infinity_with(field, picture, fixed, order, window, RecursionForm::Derived)
}

pub fn charges_infinity_with(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    order: usize,
    window: &GridWindow,
    form: RecursionForm,
) -> Result<ChargeLedger> {
    let (vals, tail) = integrate_densities(field, picture, fixed, order, window, form, Expansion::Infinity)?;
    Ok(ChargeLedger {
        picture,
        fixed,
        positive: (1..=order).map(|n| (n as i32, vals[n])).collect(),
        zero_side: Vec::new(),
        provenance: Provenance::Recursion,
        tail,
        truncation_warning: tail > crate::fields::TAIL_WARNING,
    })
}

/// `I_0, I_{−1} … I_{−order}` (or `J_0 …`) from the λ → 0 expansion.
pub fn charges_zero(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    order: usize,
    window: &GridWindow,
) -> Result<ChargeLedger> {
    let (vals, tail) =
        integrate_densities(field, picture, fixed, order, window, RecursionForm::Derived, Expansion::Zero)?;
    Ok(ChargeLedger {
        picture,
        fixed,
        positive: Vec::new(),
        zero_side: (0..=order).map(|n| (-(n as i32), vals[n])).collect(),
        provenance: Provenance::Recursion,
        tail,
        truncation_warning: tail > crate::fields::TAIL_WARNING,
    })
}

/// Both sides of the full ledger at once.
pub fn charge_ledger(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    order: usize,
    window: &GridWindow,
) -> Result<ChargeLedger> {
    let mut inf = charges_infinity(field, picture, fixed, order, window)?;
    let zero = charges_zero(field, picture, fixed, order, window)?;
    inf.zero_side = zero.zero_side;
    inf.tail = inf.tail.max(zero.tail);
    inf.truncation_warning |= zero.truncation_warning;
    Ok(inf)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Identity {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

impl Identity {
    fn new(lhs: f64, rhs: f64) -> Self {
        Identity { lhs, rhs, gap: (lhs - rhs).abs() }
    }

    /// gap / max(|rhs|, 1).
    pub fn relative_gap(&self) -> f64 {
        self.gap / self.rhs.abs().max(1.0)
    }
}

fn ledger_value(ledger: &ChargeLedger, n: i32) -> Result<f64> {
    ledger
        .get(n)
        .map(|v| v.re)
        .ok_or_else(|| Error::Argument(format!("ledger has no entry for n = {n}")))
}

/// `I_{−1} − I_1` against `(β²/2m)·H_S`.
pub fn energy_identity_s(field: &FieldEvaluator, t: f64, window: &GridWindow, ledger: &ChargeLedger) -> Result<Identity> {
    if ledger.picture != Picture::Space {
        return Err(Error::Argument("energy identity S needs a space-picture ledger".into()));
    }
    let h = crate::fields::hamiltonian_s(field, t, window)?.value;
    let p = field.params;
    Ok(Identity::new(ledger_value(ledger, -1)? - ledger_value(ledger, 1)?, p.beta * p.beta / (2.0 * p.m) * h))
}

/// `J_1 + J_{−1}` against `(β²/2m)·H_T`, with H_T integrated over t.
pub fn energy_identity_t(field: &FieldEvaluator, x: f64, window: &GridWindow, ledger: &ChargeLedger) -> Result<Identity> {
    if ledger.picture != Picture::Time {
        return Err(Error::Argument("energy identity T needs a time-picture ledger".into()));
    }
    let h = crate::fields::hamiltonian_t(field, x, window)?.value;
    let p = field.params;
    Ok(Identity::new(ledger_value(ledger, 1)? + ledger_value(ledger, -1)?, p.beta * p.beta / (2.0 * p.m) * h))
}

/// Numerical settings for evaluating ln a(λ) at large λ.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FitSettings {
    pub half_width: f64,
    /// Steps per unit length per unit of max(|k0|, |k1|).
    pub steps_per_unit: f64,
    pub stepper: Stepper,
    /// Number of inverse powers used in the least-squares fit of ln a.
    pub fit_terms: usize,
    /// Number of series terms subtracted before measuring the remainder.
    pub series_terms: usize,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings { half_width: 30.0, steps_per_unit: 100.0, stepper: Stepper::Magnus4, fit_terms: 6, series_terms: 3 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub picture: Picture,
    pub lambdas: Vec<f64>,
    /// ln a(λ) continued along the ray from its λ → ∞ branch (ln a → 0).
    pub ln_a: Vec<C64>,
    /// |ln a − i Σ_{n ≤ series_terms} I_n λ^{−n}|.
    pub remainder: Vec<f64>,
    /// Decay exponent p of the remainder ~ λ^{−p}, from a log–log least-squares line.
    pub slope: f64,
    /// Least-squares estimates of I_1 … I_fit_terms from ln a.
    pub fitted: Vec<C64>,
}

/// Principal logs made continuous along a sweep. The first value must be
/// near zero (large λ); each next value is shifted by the multiple of 2πi
/// closest to its predecessor.
fn unwrap_logs(lambdas: &[f64], raw: &[C64]) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(raw.len());
    for (k, z) in raw.iter().enumerate() {
        if k == 0 {
            out.push(*z);
            continue;
        }
        let prev: C64 = out[k - 1];
        let two_pi = 2.0 * std::f64::consts::PI;
        let shift = ((prev.im - z.im) / two_pi).round();
        let v = C64::new(z.re, z.im + shift * two_pi);
        let jump = (v.im - prev.im).abs();
        if jump > std::f64::consts::FRAC_PI_2 {
            return Err(Error::Branch { lambda_prev: lambdas[k - 1], lambda: lambdas[k], jump });
        }
        out.push(v);
    }
    Ok(out)
}

/// Complex least squares for `y_k ≈ Σ_j c_j x_k^{−(j+1)}`.
fn fit_inverse_powers(xs: &[f64], ys: &[C64], terms: usize) -> Result<Vec<C64>> {
    if xs.len() < terms {
        return Err(Error::Argument("fit needs at least as many λ values as terms".into()));
    }
    // normal equations, scaled per column to keep them well conditioned
    let scale: Vec<f64> = (0..terms).map(|j| xs[0].powi(j as i32 + 1)).collect();
    let basis = |x: f64, j: usize| (x.powi(-(j as i32 + 1))) * scale[j];
    let mut a = vec![vec![0.0f64; terms]; terms];
    let mut b = vec![ZERO; terms];
    for (x, y) in xs.iter().zip(ys) {
        for i in 0..terms {
            for j in 0..terms {
                a[i][j] += basis(*x, i) * basis(*x, j);
            }
            b[i] += y * basis(*x, i);
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..terms {
        let piv = (col..terms)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        if a[col][col].abs() < 1e-300 {
            return Err(Error::Numeric("singular fit".into()));
        }
        for r in col + 1..terms {
            let f = a[r][col] / a[col][col];
            for c in col..terms {
                a[r][c] -= f * a[col][c];
            }
            let bc = b[col];
            b[r] -= bc * f;
        }
    }
    let mut c = vec![ZERO; terms];
    for r in (0..terms).rev() {
        let mut s = b[r];
        for k in r + 1..terms {
            s -= c[k] * a[r][k];
        }
        c[r] = s / a[r][r];
    }
    Ok(c.iter().zip(&scale).map(|(v, s)| v * *s).collect())
}

/// ln a(λ) for real λ on a given line, using the fit settings.
pub fn ln_a(field: &FieldEvaluator, picture: Picture, fixed: f64, lambda: f64, settings: &FitSettings) -> Result<C64> {
    let sp = spectral_re(lambda, &field.params)?;
    let k = sp.k0.norm().max(sp.k1.norm()).max(field.params.m);
    let nsteps = (settings.steps_per_unit * 2.0 * settings.half_width * k).ceil() as usize;
    let mono = monodromy_with(field, picture, fixed, settings.half_width, &sp, nsteps, settings.stepper)?;
    Ok(mono.a_entry.ln())
}

/// Compares ln a(λ) (space) or ln 𝔞(λ) (time) with the truncated series of
/// the ledger and fits the decay exponent of the remainder.
pub fn lna_asymptotic_fit(
    field: &FieldEvaluator,
    picture: Picture,
    fixed: f64,
    lambdas: &[f64],
    ledger: &ChargeLedger,
    settings: &FitSettings,
) -> Result<FitReport> {
    if lambdas.len() < 2 {
        return Err(Error::Argument("need at least two λ values".into()));
    }
    if lambdas.iter().any(|&l| !(10.0..=100.0).contains(&l)) {
        return Err(Error::Argument("asymptotic fit expects λ in [10, 100]".into()));
    }
    let mut lam: Vec<f64> = lambdas.to_vec();
    lam.sort_by(|a, b| b.total_cmp(a));
    let raw: Vec<C64> = lam
        .iter()
        .map(|&l| ln_a(field, picture, fixed, l, settings))
        .collect::<Result<_>>()?;
    let logs = unwrap_logs(&lam, &raw)?;
    let remainder: Vec<f64> = lam
        .iter()
        .zip(&logs)
        .map(|(&l, z)| {
            let mut series = ZERO;
            for n in 1..=settings.series_terms as i32 {
                series += ledger.get(n).unwrap_or(ZERO) * l.powi(-n);
            }
            (z - I * series).norm()
        })
        .collect();
    let slope = -loglog_slope(&lam, &remainder);
    let ys: Vec<C64> = logs.iter().map(|z| -I * z).collect();
    let fitted = fit_inverse_powers(&lam, &ys, settings.fit_terms)?;
    // report in increasing λ
    fn rev<T>(v: Vec<T>) -> Vec<T> {
        v.into_iter().rev().collect()
    }
    Ok(FitReport { picture, lambdas: rev(lam), ln_a: rev(logs), remainder: rev(remainder), slope, fitted })
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(f64::MIN_POSITIVE).ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_kink, make_vacuum, ModelParams};
    use crate::matcore::SIGMA1;

    fn kink(v: f64) -> FieldEvaluator {
        make_kink(ModelParams::unit(), v, 0.0, 1).unwrap()
    }

    fn space_window() -> GridWindow {
        GridWindow::new(-30.0, 30.0, -1.0, 1.0, 12001, 2).unwrap()
    }

    fn time_window() -> GridWindow {
        GridWindow::new(-1.0, 1.0, -90.0, 90.0, 2, 36001).unwrap()
    }

    #[test]
    fn leading_coefficient_is_i_sigma1() {
        let k = kink(0.3);
        for pic in [Picture::Space, Picture::Time] {
            for exp in [Expansion::Infinity, Expansion::Zero] {
                let g = riccati_at(&k, pic, 0.1, 0.4, 4, RecursionForm::Derived, exp).unwrap();
                assert!((g[0] - SIGMA1.scale(I)).max_abs() < 1e-15);
                assert_eq!(g.len(), 6);
            }
        }
    }

    #[test]
    fn vacuum_coefficients_vanish_only_for_derived_form() {
        let vac = make_vacuum(ModelParams::unit());
        for pic in [Picture::Space, Picture::Time] {
            let g = riccati_at(&vac, pic, 0.0, 0.0, 5, RecursionForm::Derived, Expansion::Infinity).unwrap();
            for gn in &g[1..] {
                assert!(gn.max_abs() < 1e-15);
            }
            let g = riccati_at(&vac, pic, 0.0, 0.0, 5, RecursionForm::Printed, Expansion::Infinity).unwrap();
            assert!(g[2].max_abs() > 0.4);
        }
    }

    #[test]
    fn riccati_residual_scales_with_truncation_order() {
        let k = kink(0.3);
        for pic in [Picture::Space, Picture::Time] {
            for n in [3, 4] {
                let r50 = riccati_residual(&k, pic, 0.2, 0.3, 50.0, n, RecursionForm::Derived).unwrap();
                let r100 = riccati_residual(&k, pic, 0.2, 0.3, 100.0, n, RecursionForm::Derived).unwrap();
                let p = (r50 / r100).log2();
                // coefficients of alternate orders vanish, so the residual can drop by more than one order
                assert!(p > n as f64 - 0.3, "{pic:?} N={n}: exponent {p}");
            }
            let r3 = riccati_residual(&k, pic, 0.2, 0.3, 50.0, 3, RecursionForm::Derived).unwrap();
            let r5 = riccati_residual(&k, pic, 0.2, 0.3, 50.0, 5, RecursionForm::Derived).unwrap();
            assert!(r5 < r3 / 50.0);
        }
    }

    #[test]
    fn printed_source_fails_riccati_check() {
        let k = kink(0.3);
        for pic in [Picture::Space, Picture::Time] {
            let r = riccati_residual(&k, pic, 0.2, 0.3, 50.0, 4, RecursionForm::Printed).unwrap();
            let d = riccati_residual(&k, pic, 0.2, 0.3, 50.0, 4, RecursionForm::Derived).unwrap();
            assert!(r > 1e3 * d, "{r} vs {d}");
        }
    }

    #[test]
    fn vacuum_charges_vanish() {
        let vac = make_vacuum(ModelParams::unit());
        let l = charge_ledger(&vac, Picture::Space, 0.0, 4, &GridWindow::symmetric(10.0, 201)).unwrap();
        for (_, v) in l.entries() {
            assert!(v.norm() < 1e-15);
        }
    }

    #[test]
    fn kink_charges_match_scattering_data() {
        // a(λ) = (λ − iη)/(λ + iη): I_1 = −2η, I_3 = 2η³/3, even ones vanish,
        // and at λ → 0: I_0 = −π, I_{−1} = 2/η
        let v: f64 = 0.4;
        let eta = ((1.0 - v) / (1.0 + v)).sqrt();
        let l = charge_ledger(&kink(v), Picture::Space, 0.0, 4, &space_window()).unwrap();
        let check = |n: i32, exact: f64| {
            let g = l.get(n).unwrap();
            assert!((g - C64::new(exact, 0.0)).norm() < 1e-8, "I_{n} = {g}, expected {exact}");
        };
        check(1, -2.0 * eta);
        check(2, 0.0);
        check(3, 2.0 * eta.powi(3) / 3.0);
        check(4, 0.0);
        check(0, -std::f64::consts::PI);
        check(-1, 2.0 / eta);
        check(-2, 0.0);
        check(-3, -2.0 / (3.0 * eta.powi(3)));
    }

    #[test]
    fn kink_time_charges_match_scattering_data() {
        // for the time picture 𝔞(λ) = (λ + iη')/(λ − iη') with η' = η for the same kink
        let v: f64 = 0.4;
        let eta = ((1.0 - v) / (1.0 + v)).sqrt();
        let l = charge_ledger(&kink(v), Picture::Time, 0.0, 3, &time_window()).unwrap();
        let j1 = l.get(1).unwrap().re;
        let jm1 = l.get(-1).unwrap().re;
        assert!((j1 - 2.0 * eta).abs() < 1e-8, "{j1}");
        assert!((jm1 + 2.0 / eta).abs() < 1e-8, "{jm1}");
        assert!(l.get(2).unwrap().norm() < 1e-8);
        // J_0 = −(β/2)(2π/β)(𝒬₊ − 𝒬₋) = π here
        let (qm, qp) = crate::fields::topological_charges(&kink(v), 0.0, Picture::Time).unwrap();
        let expect = -std::f64::consts::PI * (qp - qm) as f64;
        assert!((l.get(0).unwrap().re - expect).abs() < 1e-8);
    }

    #[test]
    fn charges_conserved_across_lines() {
        let k = kink(0.4);
        let a = charge_ledger(&k, Picture::Space, 0.0, 3, &space_window()).unwrap();
        let b = charge_ledger(&k, Picture::Space, 2.0, 3, &space_window()).unwrap();
        let c = charge_ledger(&k, Picture::Time, 0.0, 3, &time_window()).unwrap();
        let d = charge_ledger(&k, Picture::Time, 1.0, 3, &time_window()).unwrap();
        for n in -3..=3 {
            let (x, y) = (a.get(n).unwrap(), b.get(n).unwrap());
            assert!((x - y).norm() <= 1e-6 * x.norm().max(1.0));
            let (x, y) = (c.get(n).unwrap(), d.get(n).unwrap());
            assert!((x - y).norm() <= 1e-6 * x.norm().max(1.0));
        }
    }

    #[test]
    fn energy_identities_on_kinks() {
        let w = GridWindow::new(-40.0, 40.0, -90.0, 90.0, 16001, 36001).unwrap();
        for (v, rhs) in [(0.0, 4.0), (0.6, 5.0)] {
            let k = kink(v);
            let l = charge_ledger(&k, Picture::Space, 0.0, 2, &w).unwrap();
            let id = energy_identity_s(&k, 0.0, &w, &l).unwrap();
            assert!((id.rhs - rhs).abs() < 1e-5, "{id:?}");
            assert!(id.gap < 1e-5, "{id:?}");
        }
        let k = kink(0.6);
        for x in [0.0, 1.0] {
            let l = charge_ledger(&k, Picture::Time, x, 2, &w).unwrap();
            let id = energy_identity_t(&k, x, &w, &l).unwrap();
            assert!(id.relative_gap() < 1e-5, "{id:?}");
            assert!((id.rhs + 3.0).abs() < 1e-5);
        }
        let vac = make_vacuum(ModelParams::unit());
        let l = charge_ledger(&vac, Picture::Space, 0.0, 2, &w).unwrap();
        assert_eq!(energy_identity_s(&vac, 0.0, &w, &l).unwrap().gap, 0.0);
    }

    #[test]
    fn ledger_csv_layout() {
        let l = charge_ledger(&kink(0.0), Picture::Space, 0.0, 2, &space_window()).unwrap();
        let csv = l.to_csv(Some(&l)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "picture,n,value_re,value_im,provenance,drift");
        assert_eq!(lines.len(), 1 + 5);
        assert!(lines[1].starts_with("space,-2,"));
        assert!(lines[1].ends_with(",recursion,0.000000e0"));
    }

    #[test]
    fn unwrap_detects_jumps() {
        let lam = [4.0, 3.0, 2.0, 1.0];
        let raw = [C64::new(0.0, 0.1), C64::new(0.0, 1.5), C64::new(0.0, 2.9), C64::new(0.0, -3.0)];
        let ok = unwrap_logs(&lam, &raw).unwrap();
        assert!((ok[3].im - (2.0 * std::f64::consts::PI - 3.0)).abs() < 1e-12);
        assert!(unwrap_logs(&lam, &[C64::new(0.0, 0.0), C64::new(0.0, 1.7), C64::new(0.0, 1.8)]).is_err());
    }

    #[test]
    fn inverse_power_fit_recovers_coefficients() {
        let xs: Vec<f64> = (0..12).map(|k| 10.0 * 10f64.powf(k as f64 / 11.0)).collect();
        let c = [C64::new(1.0, 0.5), ZERO, C64::new(-2.0, 0.0), ZERO, C64::new(3.0, 1.0)];
        let ys: Vec<C64> = xs
            .iter()
            .map(|x| c.iter().enumerate().map(|(j, cj)| cj * x.powi(-(j as i32 + 1))).sum())
            .collect();
        let f = fit_inverse_powers(&xs, &ys, 5).unwrap();
        for (a, b) in f.iter().zip(c.iter()) {
            assert!((a - b).norm() < 1e-6 * b.norm().max(1.0));
        }
    }
}
