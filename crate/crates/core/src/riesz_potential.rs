//! Radial Riesz-type potentials `∫ |x-y|^β f(|y|) dy` in odd dimension,
//! spherical means, and the nested mean-value identity.
//!
//! The angular integral over the sphere `|y| = s` is done in closed form. For
//! every exponent the chain needs, the Gauss hypergeometric series
//! `₂F₁(-β/2, 1-n/2-β/2; n/2; ρ²)` terminates, so the kernel is a polynomial in
//! `ρ² = (min(r,s)/max(r,s))²`. Other exponents fall back to the convergent
//! series for small `ρ` and to an exact antiderivative in `cos θ` otherwise.
//! Only the radial integral is numerical.

use crate::error::{Error, Result};
use crate::exact_constants::sphere_area;
use crate::quadrature::{integrate, log_panels};
use crate::radial_calculus::{normalized_solution, ScaledRadial};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A radial density `f(|y|)` with a power-law envelope `|f(s)| ≤ C s^{-p}` for `s ≥ s₀`.
#[derive(Clone)]
pub struct RadialDensity {
    f: Option<RadialFn>,
    pub decay_exponent: f64,
    pub decay_coeff: f64,
    pub decay_onset: f64,
    label: String,
}

impl fmt::Debug for RadialDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialDensity")
            .field("label", &self.label)
            .field("decay_exponent", &self.decay_exponent)
            .field("decay_coeff", &self.decay_coeff)
            .field("decay_onset", &self.decay_onset)
            .finish()
    }
}

impl RadialDensity {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        decay_exponent: f64,
        decay_coeff: f64,
        decay_onset: f64,
    ) -> Self {
        RadialDensity {
            f: Some(Arc::new(f)),
            decay_exponent,
            decay_coeff,
            decay_onset,
            label: label.into(),
        }
    }

    /// The identically zero density.
    pub fn zero() -> Self {
        RadialDensity {
            f: None,
            decay_exponent: f64::INFINITY,
            decay_coeff: 0.0,
            decay_onset: 0.0,
            label: "0".into(),
        }
    }

    pub fn from_scaled(sr: &ScaledRadial, decay_exponent: f64, decay_coeff: f64, decay_onset: f64) -> Self {
        let num = sr.expr.to_numeric();
        let scale = sr.scale;
        Self::new(format!("{} * ({})", scale, sr.expr), move |s| scale * num.eval(s), decay_exponent, decay_coeff, decay_onset)
    }

    /// `ũ^{-(4N-1)}` for the normalized solution of order `N`.
    pub fn solution_source(order: usize) -> Result<Self> {
        let sol = normalized_solution(order, 128)?;
        let src = sol.source_density();
        let p = 4.0 * order as f64 - 1.0;
        // (1+s²)^{-p/2} ≤ s^{-p} for every s > 0.
        Ok(Self::from_scaled(&src, p, src.scale, 1.0))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_none()
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.f {
            Some(f) => f(s),
            None => 0.0,
        }
    }

    /// Samples the envelope at 20 log-spaced radii in `[s₀, 10⁶]`.
    pub fn check_decay(&self) -> Result<()> {
        if self.is_zero() {
            return Ok(());
        }
        let s0 = self.decay_onset.max(1e-12);
        let hi: f64 = 1e6;
        for i in 0..20 {
            let s = s0 * (hi / s0).powf(i as f64 / 19.0);
            let bound = self.decay_coeff * s.powf(-self.decay_exponent);
            let v = self.eval(s).abs();
            if v > bound * (1.0 + 1e-12) {
                return Err(Error::domain(format!(
                    "density {} violates its envelope at s = {s:e}: {v:e} > {bound:e}",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

/// Controls for the radial quadrature.
///
/// `precision` is carried for reporting; the radial integrals run in `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub truncation_radius: f64,
    pub precision: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 4000,
            truncation_radius: 200.0,
            precision: 128,
        }
    }
}

impl QuadratureConfig {
    /// Quadrature budget three orders below a check tolerance `tol`.
    pub fn for_tolerance(tol: f64, truncation_radius: f64, precision: u32) -> Self {
        QuadratureConfig {
            rel_tol: (tol * 1e-3).max(1e-14),
            abs_tol: (tol * 1e-4).max(1e-16),
            max_subdivisions: 4000,
            truncation_radius,
            precision,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if !(self.truncation_radius > 0.0) {
            return Err(Error::domain("truncation radius must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialValue {
    pub value: f64,
    pub error_estimate: f64,
    pub tail_bound_used: f64,
    pub evaluations: usize,
}

impl PotentialValue {
    fn zero() -> Self {
        PotentialValue { value: 0.0, error_estimate: 0.0, tail_bound_used: 0.0, evaluations: 0 }
    }
}

fn check_dimension(n: i64) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::domain(format!("dimension must be odd and >= 3, got {n}")));
    }
    Ok(())
}

fn sphere_area_f64(n: i64) -> f64 {
    sphere_area(n).expect("odd dimension").to_f64()
}

/// `|S^{m-1}|` for even `m ≥ 2`: `2π^{m/2}/(m/2 - 1)!`.
fn sphere_area_even(m: i64) -> f64 {
    let h = m / 2;
    let fact: f64 = (1..h).map(|i| i as f64).product();
    2.0 * std::f64::consts::PI.powi(h as i32) / fact
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Angular kernel `∫_{|ξ|=1} |rθ - sξ|^β dσ(ξ)` in `ℝⁿ` for a fixed `(β, n)`.
#[derive(Debug, Clone)]
pub struct AngularKernel {
    beta: f64,
    n: i64,
    sphere: f64,
    equator: f64,
    /// Coefficients of the terminating hypergeometric polynomial in `ρ²`.
    poly: Option<Vec<f64>>,
}

impl AngularKernel {
    pub fn new(beta: f64, n: i64) -> Result<Self> {
        check_dimension(n)?;
        if !beta.is_finite() {
            return Err(Error::domain("kernel exponent must be finite"));
        }
        if beta <= -((n - 1) as f64) {
            return Err(Error::DivergentKernel(format!(
                "|x-y|^{beta} is not integrable over spheres in dimension {n}"
            )));
        }
        let a = -beta / 2.0;
        let b = 1.0 - n as f64 / 2.0 - beta / 2.0;
        let c = n as f64 / 2.0;
        let poly = if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
            let mut coeffs = vec![1.0];
            let mut term = 1.0;
            let mut j = 0.0;
            loop {
                term *= (a + j) * (b + j) / ((c + j) * (j + 1.0));
                if term == 0.0 {
                    break;
                }
                coeffs.push(term);
                j += 1.0;
            }
            Some(coeffs)
        } else {
            None
        };
        Ok(AngularKernel {
            beta,
            n,
            sphere: sphere_area_f64(n),
            equator: sphere_area_even(n - 1),
            poly,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Whether the kernel reduces to a polynomial in `ρ²` times `max(r,s)^β`.
    pub fn is_terminating(&self) -> bool {
        self.poly.is_some()
    }

    pub fn polynomial(&self) -> Option<&[f64]> {
        self.poly.as_deref()
    }

    pub fn eval(&self, r: f64, s: f64) -> Result<f64> {
        if !(r >= 0.0 && s >= 0.0) || !r.is_finite() || !s.is_finite() {
            return Err(Error::domain(format!("radii must be finite and non-negative, got ({r}, {s})")));
        }
        let big = r.max(s);
        let small = r.min(s);
        if big == 0.0 {
            return match self.beta.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => Ok(0.0),
                Some(std::cmp::Ordering::Equal) => Ok(self.sphere),
                _ => Err(Error::DivergentKernel("r = s = 0 with negative exponent".into())),
            };
        }
        if small == 0.0 {
            return Ok(self.sphere * big.powf(self.beta));
        }
        let rho = small / big;
        let z = rho * rho;
        let f = if let Some(p) = &self.poly {
            horner(p, z)
        } else if rho < 0.5 {
            self.series(z)
        } else {
            return Ok(self.antiderivative(r, s));
        };
        Ok(self.sphere * big.powf(self.beta) * f)
    }

    fn series(&self, z: f64) -> f64 {
        let a = -self.beta / 2.0;
        let b = 1.0 - self.n as f64 / 2.0 - self.beta / 2.0;
        let c = self.n as f64 / 2.0;
        let mut sum = 1.0;
        let mut term = 1.0;
        for j in 0..2000 {
            let jf = j as f64;
            term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * z;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    }

    /// `|S^{n-2}| ∫₀² x^m (2-x)^m (c + Bx)^{β/2} dx` with `x = 1 - cos θ`,
    /// `m = (n-3)/2`, `c = (r-s)²`, `B = 2rs`.
    fn antiderivative(&self, r: f64, s: f64) -> f64 {
        let m = ((self.n - 3) / 2) as usize;
        let g = self.beta / 2.0;
        let c = (r - s) * (r - s);
        let bb = 2.0 * r * s;
        let top = c + 2.0 * bb;
        let mut total = 0.0;
        for i in 0..=m {
            let k = m + i;
            let p_k = binom(m, i) * 2f64.powi((m - i) as i32) * if i % 2 == 0 { 1.0 } else { -1.0 };
            // J_k = B^{-k-1} Σ_j C(k,j) (-c)^{k-j} ∫_c^{c+2B} y^{j+g} dy
            let mut jk = 0.0;
            for j in 0..=k {
                if c == 0.0 && j < k {
                    continue;
                }
                let e = j as f64 + g;
                let integral = if e == -1.0 {
                    (top / c).ln()
                } else if c == 0.0 {
                    top.powf(e + 1.0) / (e + 1.0)
                } else {
                    (top.powf(e + 1.0) - c.powf(e + 1.0)) / (e + 1.0)
                };
                jk += binom(k, j) * (-c).powi((k - j) as i32) * integral;
            }
            total += p_k * jk / bb.powi(k as i32 + 1);
        }
        self.equator * total
    }
}

fn horner(p: &[f64], z: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &a| acc * z + a)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Mean of `|x - y|^β` over `|y| = s`, times the sphere area, at `|x| = r`.
pub fn angular_kernel(r: f64, s: f64, beta: f64, n: i64) -> Result<f64> {
    AngularKernel::new(beta, n)?.eval(r, s)
}

/// Bound on the omitted mass `∫_{|y|>R} |x-y|^β |f(y)| dy` for `|x| ≤ R/2`.
pub fn tail_bound(p: f64, beta: f64, n: i64, coeff: f64, radius: f64) -> Result<f64> {
    let excess = p - n as f64 - beta;
    if !(excess > 0.0) {
        return Err(Error::domain(format!(
            "decay exponent {p} does not exceed n + β = {}; the potential diverges",
            n as f64 + beta
        )));
    }
    Ok(coeff * sphere_area_f64(n) * 2f64.powf(beta.abs()) * radius.powf(-excess) / excess)
}

/// Truncation radius at least `cfg.truncation_radius`, doubled until the tail
/// bound is below a tenth of `abs_tol`.
fn choose_radius(p: f64, beta: f64, n: i64, coeff: f64, r: f64, f: &RadialDensity, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let mut radius = cfg.truncation_radius.max(f.decay_onset).max(2.0 * r);
    let mut tail = tail_bound(p, beta, n, coeff, radius)?;
    let mut doublings = 0;
    while tail > cfg.abs_tol / 10.0 && doublings < 64 {
        radius *= 2.0;
        tail = tail_bound(p, beta, n, coeff, radius)?;
        doublings += 1;
    }
    Ok((radius, tail))
}

fn radial_integral(
    integrand: impl Fn(f64) -> f64,
    r: f64,
    radius: f64,
    tail: f64,
    cfg: &QuadratureConfig,
) -> Result<PotentialValue> {
    let pts = log_panels(radius, 0.125, &[r]);
    let out = integrate(integrand, &pts, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)?;
    Ok(PotentialValue {
        value: out.value,
        error_estimate: out.error + tail,
        tail_bound_used: tail,
        evaluations: out.evaluations,
    })
}

/// `∫_{ℝⁿ} |x-y|^β f(|y|) dy` at `|x| = r`.
pub fn potential(f: &RadialDensity, beta: f64, r: f64, n: i64, cfg: &QuadratureConfig) -> Result<PotentialValue> {
    cfg.validate()?;
    let kernel = AngularKernel::new(beta, n)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("evaluation radius must be finite and non-negative, got {r}")));
    }
    if f.is_zero() {
        return Ok(PotentialValue::zero());
    }
    let p = f.decay_exponent;
    let (radius, tail) = choose_radius(p, beta, n, f.decay_coeff, r, f, cfg)?;
    let nm1 = (n - 1) as i32;
    let integrand = |s: f64| s.powi(nm1) * f.eval(s) * kernel.eval(r, s).unwrap_or(f64::NAN);
    radial_integral(integrand, r, radius, tail, cfg)
}

/// Polynomial `H(z)` with `Σ_{j} h_j z^j = F₊(z) + sign·(1 - z)·F₋(z)` for the
/// `β = ±1` kernels.
fn pohozaev_poly(plus: &[f64], minus: &[f64], sign: f64) -> Vec<f64> {
    let len = plus.len().max(minus.len() + 1);
    let mut h = vec![0.0; len];
    for (j, &a) in plus.iter().enumerate() {
        h[j] += a;
    }
    for (j, &a) in minus.iter().enumerate() {
        h[j] += sign * a;
        h[j + 1] -= sign * a;
    }
    h
}

/// `∫_{ℝⁿ} (|x|² - x·y)/|x-y| f(|y|) dy` at `|x| = r`.
pub fn pohozaev_integral(f: &RadialDensity, r: f64, n: i64, cfg: &QuadratureConfig) -> Result<PotentialValue> {
    cfg.validate()?;
    check_dimension(n)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("evaluation radius must be finite and non-negative, got {r}")));
    }
    if f.is_zero() || r == 0.0 {
        return Ok(PotentialValue::zero());
    }
    // (|x|² - x·y)/|x-y| = (|x-y| + (r² - s²)/|x-y|)/2, expanded so the
    // leading s terms cancel exactly for s > r.
    let plus = AngularKernel::new(1.0, n)?;
    let minus = AngularKernel::new(-1.0, n)?;
    let (Some(pp), Some(pm)) = (plus.polynomial(), minus.polynomial()) else {
        return Err(Error::Internal("β = ±1 kernels must terminate in odd dimension".into()));
    };
    let outer = pohozaev_poly(pp, pm, -1.0);
    let inner = pohozaev_poly(pp, pm, 1.0);
    let omega = plus.sphere;
    let kernel = move |s: f64| -> f64 {
        if s == 0.0 {
            return omega * r * r;
        }
        if s > r {
            let z = (r / s) * (r / s);
            0.5 * omega * s * horner(&outer, z)
        } else {
            let z = (s / r) * (s / r);
            0.5 * omega * r * horner(&inner, z)
        }
    };
    // |kernel| ≤ |x| on the whole sphere.
    let (radius, tail) = choose_radius(f.decay_exponent, 0.0, n, f.decay_coeff * r, r, f, cfg)?;
    let nm1 = (n - 1) as i32;
    radial_integral(|s| s.powi(nm1) * f.eval(s) * kernel(s), r, radius, tail, cfg)
}

/// Mean of the radial function `f(|y|)` over the sphere of radius `rho`
/// centred at distance `c` from the origin.
pub fn spherical_mean(f: impl Fn(f64) -> f64, c: f64, rho: f64, n: i64, cfg: &QuadratureConfig) -> Result<f64> {
    check_dimension(n)?;
    if !(rho > 0.0) {
        return Err(Error::domain(format!("sphere radius must be positive, got {rho}")));
    }
    if !(c >= 0.0) {
        return Err(Error::domain(format!("centre distance must be non-negative, got {c}")));
    }
    if c == 0.0 {
        return Ok(f(rho));
    }
    let ratio = sphere_area_even(n - 1) / sphere_area_f64(n);
    let pw = (n - 2) as i32;
    let integrand = |theta: f64| {
        let d2 = (c - rho) * (c - rho) + 4.0 * c * rho * (theta / 2.0).sin().powi(2);
        f(d2.max(0.0).sqrt()) * theta.sin().powi(pw)
    };
    let out = integrate(integrand, &[0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI], 1e-300, cfg.rel_tol.min(1e-12), cfg.max_subdivisions)?;
    Ok(ratio * out.value)
}

/// Both sides of the three-fold nested mean-value identity for `ũ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanValueComparison {
    /// `g(r)` by iterated quadrature of ball masses of `ũ^{-(4N-1)}`.
    pub lhs: f64,
    /// `ω z(x) - ω z̄(r) - (ω/(2n)) w(x) r²` with `z = (-Δ)^{N-2}ũ`, `w = (-Δ)^{N-1}ũ`.
    pub rhs: f64,
    /// The same right side with `+ω z(x)` in place of `-ω z(x)`.
    pub rhs_plus_variant: f64,
    pub relative_discrepancy: f64,
}

/// Iterated integral `∫₀^r s₃^{-(n-1)} ∫₀^{s₃} s₂^{n-1} ∫₀^{s₂} s₁^{-(n-1)} |B(x,s₁)|_f ds₁ ds₂ ds₃`
/// compared with its closed form.
pub fn nested_mean_value_check(order: usize, x_dist: f64, r: f64, cfg: &QuadratureConfig) -> Result<MeanValueComparison> {
    if order < 2 {
        return Err(Error::domain(format!("N must be at least 2, got {order}")));
    }
    if !(r > 0.0) || !(x_dist >= 0.0) {
        return Err(Error::domain("nested identity needs r > 0 and a non-negative centre distance"));
    }
    let sol = normalized_solution(order, cfg.precision.max(64))?;
    let n = sol.dimension();
    let omega = sphere_area_f64(n);
    let nm1 = (n - 1) as i32;
    let src = sol.source_density();
    let f_num = src.expr.to_numeric();
    let f = |s: f64| src.scale * f_num.eval(s);

    let inner_tol = 1e-13;
    let quad = |h: &dyn Fn(f64) -> f64, upper: f64| -> Result<f64> {
        Ok(integrate(h, &[0.0, upper], 1e-300, inner_tol, cfg.max_subdivisions)?.value)
    };
    let mean_cfg = QuadratureConfig { rel_tol: inner_tol, ..*cfg };
    let ball_mass = |s1: f64| -> Result<f64> {
        let shell = |rho: f64| {
            rho.powi(nm1) * spherical_mean(f, x_dist, rho, n, &mean_cfg).unwrap_or(f64::NAN)
        };
        Ok(omega * quad(&shell, s1)?)
    };
    let level1 = |s2: f64| -> Result<f64> {
        quad(&|s1: f64| s1.powi(-nm1) * ball_mass(s1).unwrap_or(f64::NAN), s2)
    };
    let level2 = |s3: f64| -> Result<f64> {
        quad(&|s2: f64| s2.powi(nm1) * level1(s2).unwrap_or(f64::NAN), s3)
    };
    let lhs = quad(&|s3: f64| s3.powi(-nm1) * level2(s3).unwrap_or(f64::NAN), r)?;
    if !lhs.is_finite() {
        return Err(Error::Internal("nested quadrature produced a non-finite value".into()));
    }

    let z = sol.polylaplacian(order as u32 - 2);
    let w = sol.polylaplacian(order as u32 - 1);
    let z_num = z.expr.to_numeric();
    let z_fn = |s: f64| z.scale * z_num.eval(s);
    let z_bar = spherical_mean(z_fn, x_dist, r, n, &mean_cfg)?;
    let z_x = z.eval(x_dist);
    let w_x = w.eval(x_dist);
    let quadratic = omega / (2.0 * n as f64) * w_x * r * r;
    let rhs = omega * z_x - omega * z_bar - quadratic;
    let rhs_plus_variant = -omega * z_x - omega * z_bar - quadratic;
    let relative_discrepancy = (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
    Ok(MeanValueComparison { lhs, rhs, rhs_plus_variant, relative_discrepancy })
}

/// `Σ wᵢ φᵢ^{-q} - (Σ wᵢ φᵢ)^{-q}`, non-negative for probability weights and positive `φ`.
pub fn jensen_gap(weights: &[f64], values: &[f64], q: f64) -> Result<f64> {
    if weights.len() != values.len() || weights.is_empty() {
        return Err(Error::domain("weights and values must be non-empty and of equal length"));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) || values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::domain("weights must be non-negative and values positive"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("weights sum to {total}, not 1")));
    }
    let mean: f64 = weights.iter().zip(values).map(|(w, v)| w * v).sum();
    let mean_neg: f64 = weights.iter().zip(values).map(|(w, v)| w * v.powf(-q)).sum();
    Ok(mean_neg - mean.powf(-q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_calculus::normalized_solution;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    /// `|S^{n-2}| ∫₀^π (r² + s² - 2rs cos θ)^{β/2} sin^{n-2} θ dθ` by adaptive quadrature.
    fn kernel_by_theta(r: f64, s: f64, beta: f64, n: i64) -> f64 {
        let pw = (n - 2) as i32;
        let h = |t: f64| {
            let d2 = (r - s) * (r - s) + 4.0 * r * s * (t / 2.0).sin().powi(2);
            d2.powf(beta / 2.0) * t.sin().powi(pw)
        };
        let out = integrate(h, &[0.0, PI / 2.0, PI], 1e-300, 1e-13, 5000).unwrap();
        sphere_area_even(n - 1) * out.value
    }

    #[test]
    fn kernel_at_origin_is_sphere_times_power() {
        for n in [3, 5, 7] {
            let k = angular_kernel(0.0, 2.0, 1.0, n).unwrap();
            assert!(rel(k, sphere_area_f64(n) * 2.0) < 1e-15);
            let k = angular_kernel(3.0, 0.0, -1.0, n).unwrap();
            assert!(rel(k, sphere_area_f64(n) / 3.0) < 1e-15);
        }
    }

    #[test]
    fn newton_shell_theorem() {
        for (r, s) in [(0.3, 2.0), (2.0, 0.3), (1.0, 1.0), (5.0, 4.9)] {
            let k = angular_kernel(r, s, -1.0, 3).unwrap();
            let closed = 2.0 * PI * ((r + s) - (r - s).abs()) / (r * s);
            assert!(rel(k, closed) < 1e-14);
            assert!(rel(k, 4.0 * PI / f64::max(r, s)) < 1e-14);
        }
    }

    #[test]
    fn linear_kernel_closed_form() {
        for (r, s) in [(0.3, 2.0), (2.0, 0.3), (1.0, 1.0), (7.0, 3.0)] {
            let k = angular_kernel(r, s, 1.0, 3).unwrap();
            let closed = 2.0 * PI * ((r + s).powi(3) - (r - s).abs().powi(3)) / (3.0 * r * s);
            assert!(rel(k, closed) < 1e-13);
        }
    }

    #[test]
    fn kernel_matches_theta_quadrature() {
        let cases: &[(f64, i64)] = &[
            (1.0, 3), (1.0, 5), (-1.0, 5), (-3.0, 5), (1.0, 7), (-5.0, 7), (-3.0, 9),
            (0.5, 3), (-1.5, 5), (-2.0, 5), (2.5, 7), (-4.0, 7), (-0.7, 3), (0.0, 5),
        ];
        for &(beta, n) in cases {
            for (r, s) in [(0.2, 1.0), (1.0, 0.45), (0.8, 1.0), (1.0, 0.99), (3.0, 1.7), (2.0, 2.0)] {
                if r == s && beta <= -((n - 2) as f64) {
                    continue;
                }
                let k = angular_kernel(r, s, beta, n).unwrap();
                let oracle = kernel_by_theta(r, s, beta, n);
                assert!(rel(k, oracle) < 1e-9, "beta {beta} n {n} r {r} s {s}: {k} vs {oracle}");
            }
        }
    }

    #[test]
    fn divergent_kernels_rejected() {
        assert!(matches!(angular_kernel(1.0, 2.0, -2.0, 3), Err(Error::DivergentKernel(_))));
        assert!(matches!(angular_kernel(1.0, 2.0, -4.0, 5), Err(Error::DivergentKernel(_))));
        assert!(matches!(angular_kernel(0.0, 0.0, -1.0, 5), Err(Error::DivergentKernel(_))));
        // Integrable on the sphere even on the diagonal r = s.
        let k = angular_kernel(1.0, 1.0, -3.0, 5).unwrap();
        assert!(k.is_finite() && k > 0.0);
    }

    #[test]
    fn kernel_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let r: f64 = rng.gen_range(0.01..10.0);
            let s: f64 = rng.gen_range(0.01..10.0);
            let n = [3, 5, 7][rng.gen_range(0..3)];
            let beta = [1.0, -1.0, 0.5, -1.5][rng.gen_range(0..4)];
            let a = angular_kernel(r, s, beta, n).unwrap();
            let b = angular_kernel(s, r, beta, n).unwrap();
            assert!(rel(a, b) < 1e-12);
        }
    }

    #[test]
    fn tail_bound_plug_in() {
        let sol = normalized_solution(2, 128).unwrap();
        let c = sol.scale().powi(-7);
        let got = tail_bound(7.0, 1.0, 3, c, 100.0).unwrap();
        let want = c * 4.0 * PI * 2.0 * 100f64.powi(-3) / 3.0;
        assert!(rel(got, want) < 1e-14);
        let halved = tail_bound(7.0, 1.0, 3, c, 200.0).unwrap();
        assert!(rel(got / halved, 8.0) < 1e-14);
        assert!(tail_bound(4.0, 1.0, 3, 1.0, 10.0).is_err());
    }

    #[test]
    fn zero_density_gives_zero() {
        let cfg = QuadratureConfig::default();
        let v = potential(&RadialDensity::zero(), 1.0, 2.0, 3, &cfg).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.error_estimate, 0.0);
        let v = pohozaev_integral(&RadialDensity::zero(), 1.0, 3, &cfg).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn volume_consistency_for_zero_exponent() {
        // β = 0 gives ω ∫ s^{n-1} f(s) ds regardless of r.
        let bump = RadialDensity::new("exp(-s^2)", |s: f64| (-s * s).exp(), 40.0, 1e30, 1.0);
        let cfg = QuadratureConfig::default();
        for n in [3, 5] {
            let direct = integrate(
                |s: f64| sphere_area_f64(n) * s.powi((n - 1) as i32) * (-s * s).exp(),
                &[0.0, 1.0, 2.0, 4.0, 8.0, 16.0],
                1e-300,
                1e-13,
                100,
            )
            .unwrap()
            .value;
            for r in [0.0, 0.7, 3.0] {
                let v = potential(&bump, 0.0, r, n, &cfg).unwrap();
                assert!(rel(v.value, direct) < 1e-10);
            }
        }
        // Gaussian mass π^{n/2}.
        let direct3 = potential(&bump, 0.0, 0.0, 3, &cfg).unwrap().value;
        assert!(rel(direct3, PI.powf(1.5)) < 1e-10);
    }

    #[test]
    fn newton_potential_of_gaussian() {
        // ∫ e^{-|y|²}/|x-y| dy = π^{3/2} erf(r)/r in ℝ³; erf by series.
        let erf = |x: f64| {
            let mut sum = 0.0;
            let mut term = x;
            for k in 0..80 {
                sum += term / (2 * k + 1) as f64;
                term *= -x * x / (k + 1) as f64;
            }
            2.0 / PI.sqrt() * sum
        };
        let bump = RadialDensity::new("exp(-s^2)", |s: f64| (-s * s).exp(), 40.0, 1e30, 1.0);
        let cfg = QuadratureConfig::default();
        for r in [0.5, 1.0, 2.5] {
            let v = potential(&bump, -1.0, r, 3, &cfg).unwrap();
            assert!(rel(v.value, PI.powf(1.5) * erf(r) / r) < 1e-10);
        }
    }

    #[test]
    fn envelope_check() {
        let src = RadialDensity::solution_source(2).unwrap();
        assert!(src.check_decay().is_ok());
        let bad = RadialDensity::new("1/s", |s: f64| 1.0 / s, 2.0, 1.0, 1.0);
        assert!(bad.check_decay().is_err());
    }

    #[test]
    fn representation_at_origin_n2() {
        // c₀ ∫|y| ũ^{-7} dy = ũ(0) = a, with c₀ = 1/(8π).
        let sol = normalized_solution(2, 128).unwrap();
        let src = RadialDensity::solution_source(2).unwrap();
        let cfg = QuadratureConfig::default();
        let v = potential(&src, 1.0, 0.0, 3, &cfg).unwrap();
        assert!(rel(v.value / (8.0 * PI), sol.scale()) < 1e-8);
        assert!(v.tail_bound_used <= cfg.abs_tol / 10.0);
    }

    #[test]
    fn monte_carlo_agrees_at_origin() {
        // Coarse independent estimate of ∫_{ℝ³} |y| ũ^{-7}(y) dy, sampling each
        // coordinate from a standard Cauchy law.
        let sol = normalized_solution(2, 128).unwrap();
        let a = sol.scale();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples = 400_000;
        let mut acc = 0.0;
        for _ in 0..samples {
            let mut s2 = 0.0;
            let mut inv_density = 1.0;
            for _ in 0..3 {
                let y = (PI * (rng.gen::<f64>() - 0.5)).tan();
                s2 += y * y;
                inv_density *= PI * (1.0 + y * y);
            }
            acc += s2.sqrt() * (a * (1.0 + s2).sqrt()).powi(-7) * inv_density;
        }
        let mc = acc / samples as f64;
        let src = RadialDensity::solution_source(2).unwrap();
        let quad = potential(&src, 1.0, 0.0, 3, &QuadratureConfig::default()).unwrap().value;
        assert!(rel(mc, quad) < 0.02, "{mc} vs {quad}");
    }

    #[test]
    fn pohozaev_small_case() {
        let sol = normalized_solution(2, 128).unwrap();
        let src = RadialDensity::solution_source(2).unwrap();
        let cfg = QuadratureConfig::default();
        let du = sol.base().derivative();
        for r in [0.5, 1.0, 2.0] {
            let v = pohozaev_integral(&src, r, 3, &cfg).unwrap();
            let want = r * sol.scale() * du.eval_f64(r);
            assert!(rel(v.value / (8.0 * PI), want) < 1e-8);
        }
        assert_eq!(pohozaev_integral(&src, 0.0, 3, &cfg).unwrap().value, 0.0);
    }

    #[test]
    fn pohozaev_kernel_matches_components() {
        let cfg = QuadratureConfig::default();
        let bump = RadialDensity::new("exp(-s^2)", |s: f64| (-s * s).exp(), 40.0, 1e30, 1.0);
        for n in [3, 5] {
            let r = 1.3;
            let p1 = potential(&bump, 1.0, r, n, &cfg).unwrap().value;
            let r2 = integrate(
                |s: f64| {
                    s.powi((n - 1) as i32) * (-s * s).exp() * (r * r - s * s) * angular_kernel(r, s, -1.0, n).unwrap()
                },
                &log_panels(40.0, 0.125, &[r]),
                1e-300,
                1e-13,
                1000,
            )
            .unwrap()
            .value;
            let poh = pohozaev_integral(&bump, r, n, &cfg).unwrap().value;
            assert!(rel(poh, 0.5 * (p1 + r2)) < 1e-9);
        }
    }

    #[test]
    fn spherical_mean_examples() {
        let cfg = QuadratureConfig::default();
        for n in [3, 5, 7] {
            assert!(rel(spherical_mean(|_| 4.5, 1.3, 0.7, n, &cfg).unwrap(), 4.5) < 1e-13);
            let sq = |s: f64| s * s;
            assert!(rel(spherical_mean(sq, 0.0, 0.7, n, &cfg).unwrap(), 0.49) < 1e-15);
            assert!(rel(spherical_mean(sq, 1.3, 0.7, n, &cfg).unwrap(), 1.69 + 0.49) < 1e-13);
            // Harmonic away from the pole.
            let e = (n - 2) as i32;
            let fund = move |s: f64| s.powi(-e);
            assert!(rel(spherical_mean(fund, 3.0, 1.2, n, &cfg).unwrap(), 3f64.powi(-e)) < 1e-12);
        }
    }

    #[test]
    fn nested_identity_small_cases() {
        let cfg = QuadratureConfig::default();
        for (order, x, r) in [(2, 0.0, 1.0), (2, 2.0, 0.5), (3, 2.0, 1.0)] {
            let cmp = nested_mean_value_check(order, x, r, &cfg).unwrap();
            assert!(cmp.relative_discrepancy < 1e-7, "{order} {x} {r}: {cmp:?}");
            assert!((cmp.lhs - cmp.rhs_plus_variant).abs() > 1e-3 * cmp.lhs.abs());
        }
    }

    #[test]
    fn nested_identity_vanishes_at_zero_radius() {
        let cfg = QuadratureConfig::default();
        let big = nested_mean_value_check(2, 1.0, 0.4, &cfg).unwrap();
        let small = nested_mean_value_check(2, 1.0, 0.1, &cfg).unwrap();
        assert!(small.lhs.abs() < big.lhs.abs() / 100.0);
        assert!(small.rhs.abs() < big.rhs.abs() / 100.0);
    }

    #[test]
    fn jensen_examples() {
        assert!(jensen_gap(&[0.5, 0.5], &[1.0, 3.0], 1.0).unwrap() > 0.0);
        assert!(jensen_gap(&[1.0], &[2.0], 7.0).unwrap().abs() < 1e-15);
        assert!(jensen_gap(&[0.5, 0.6], &[1.0, 2.0], 1.0).is_err());
    }
}
