//! Exact dimensional constants: Γ at half-integers, unit-sphere areas in odd
//! dimension and the `c_0 … c_{N-1}` chain of Riesz-kernel normalizations.
//!
//! Every constant that appears for odd dimension `n = 2N - 1` is a rational
//! multiple of a half-integer power of π, so [`ExactScalar`] stores exactly
//! that and nothing more.

use crate::error::{Error, Result};
use crate::highprec::{format_sig, pi_rational, rational_powi, rational_string, rational_to_f64, sqrt_rational, PreciseReal};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Div, Mul};

/// `coeff · π^(half_pi_exp / 2)` with `coeff` in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    coeff: BigRational,
    half_pi_exp: i32,
}

impl ExactScalar {
    pub fn new(coeff: BigRational, half_pi_exp: i32) -> Self {
        // BigRational is always reduced with a positive denominator.
        if coeff.is_zero() {
            ExactScalar { coeff, half_pi_exp: 0 }
        } else {
            ExactScalar { coeff, half_pi_exp }
        }
    }

    pub fn rational(coeff: BigRational) -> Self {
        Self::new(coeff, 0)
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    pub fn sqrt_pi() -> Self {
        Self::new(BigRational::one(), 1)
    }

    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn half_pi_exp(&self) -> i32 {
        self.half_pi_exp
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.coeff.is_positive()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::domain("reciprocal of zero"));
        }
        Ok(Self::new(self.coeff.recip(), -self.half_pi_exp))
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self::new(&self.coeff * q, self.half_pi_exp)
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.coeff) * std::f64::consts::PI.powf(self.half_pi_exp as f64 / 2.0)
    }

    /// Value with relative error below `2^-bits`.
    pub fn to_precise(&self, bits: u32) -> PreciseReal {
        if self.half_pi_exp == 0 {
            return PreciseReal::exact(self.coeff.clone());
        }
        let k = self.half_pi_exp.unsigned_abs();
        let work = bits + 8 + 2 * (32 - k.leading_zeros());
        let pi = pi_rational(work);
        let mut v = rational_powi(&pi, (self.half_pi_exp.div_euclid(2)) as i64);
        if self.half_pi_exp.rem_euclid(2) == 1 {
            v *= sqrt_rational(&pi, work);
        }
        PreciseReal::new(&self.coeff * v, bits)
    }

    pub fn to_json(&self, digits: usize) -> ExactScalarJson {
        let bits = ((digits as f64) / std::f64::consts::LOG10_2).ceil() as u32 + 8;
        ExactScalarJson {
            coeff_num: self.coeff.numer().to_string(),
            coeff_den: self.coeff.denom().to_string(),
            half_pi_exp: self.half_pi_exp,
            decimal: format_sig(self.to_precise(bits).rational(), digits),
        }
    }
}

impl Mul for &ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar::new(&self.coeff * &rhs.coeff, self.half_pi_exp + rhs.half_pi_exp)
    }
}

impl Mul for ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: ExactScalar) -> ExactScalar {
        &self * &rhs
    }
}

impl Div for &ExactScalar {
    type Output = ExactScalar;
    /// Panics on a zero divisor, like integer division.
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        assert!(!rhs.is_zero(), "ExactScalar division by zero");
        ExactScalar::new(&self.coeff / &rhs.coeff, self.half_pi_exp - rhs.half_pi_exp)
    }
}

impl Div for ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: ExactScalar) -> ExactScalar {
        &self / &rhs
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = rational_string(&self.coeff);
        match self.half_pi_exp {
            0 => write!(f, "{c}"),
            h if h % 2 == 0 => write!(f, "{c}·π^{}", h / 2),
            h => write!(f, "{c}·π^({h}/2)"),
        }
    }
}

/// Report form of an [`ExactScalar`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactScalarJson {
    pub coeff_num: String,
    pub coeff_den: String,
    pub half_pi_exp: i32,
    pub decimal: String,
}

/// `Γ(m/2)` for odd `m ≥ 1`, as a rational multiple of `√π`.
pub fn gamma_half(m: i64) -> Result<ExactScalar> {
    if m < 1 || m % 2 == 0 {
        return Err(Error::domain(format!(
            "gamma_half needs a positive odd argument, got {m}"
        )));
    }
    // Γ(z + 1) = z Γ(z), starting from Γ(1/2) = √π.
    let mut coeff = BigRational::one();
    let mut z2 = 1;
    while z2 < m {
        coeff *= BigRational::new(BigInt::from(z2), BigInt::from(2));
        z2 += 2;
    }
    Ok(ExactScalar::new(coeff, 1))
}

/// Surface area `ω_n = 2π^{n/2} / Γ(n/2)` of the unit sphere in `ℝ^n`, odd `n ≥ 3`.
pub fn sphere_area(n: i64) -> Result<ExactScalar> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::domain(format!(
            "sphere_area is defined here for odd n >= 3, got {n}"
        )));
    }
    let two_pi_half_n = ExactScalar::new(BigRational::from_integer(BigInt::from(2)), n as i32);
    Ok(&two_pi_half_n / &gamma_half(n)?)
}

/// Normalization of the top constant `c_{N-1}` of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    /// `c_{N-1} = ω_{2N-1}^{-1}` as written in the source derivation.
    PaperLiteral,
    /// `c_{N-1} = ((2N-3) ω_{2N-1})^{-1}`, the unit-flux Green normalization.
    Corrected,
}

impl ConstantMode {
    pub const ALL: [ConstantMode; 2] = [ConstantMode::PaperLiteral, ConstantMode::Corrected];

    pub fn name(self) -> &'static str {
        match self {
            ConstantMode::PaperLiteral => "paper_literal",
            ConstantMode::Corrected => "corrected",
        }
    }
}

/// The constants `c_0, …, c_{N-1}` for one `N` and one normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantChain {
    order: usize,
    mode: ConstantMode,
    c: Vec<ExactScalar>,
}

impl ConstantChain {
    /// The polyharmonic order `N`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mode(&self) -> ConstantMode {
        self.mode
    }

    /// `c_k` for `0 ≤ k ≤ N-1`.
    pub fn get(&self, k: usize) -> &ExactScalar {
        &self.c[k]
    }

    pub fn constants(&self) -> &[ExactScalar] {
        &self.c
    }

    /// Recomputes every defining relation exactly; returns the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.order as i64;
        if self.c.len() != self.order {
            return Err(format!("chain has {} entries, expected {}", self.c.len(), n));
        }
        if let Some((k, _)) = self.c.iter().enumerate().find(|(_, c)| !c.is_positive()) {
            return Err(format!("c_{k} is not positive"));
        }
        let base = top_constant(self.order, self.mode).map_err(|e| e.to_string())?;
        if self.c[self.order - 1] != base {
            return Err(format!("c_{} = {} differs from base {}", n - 1, self.c[self.order - 1], base));
        }
        for k in 1..=(n - 2) {
            let lhs = self.c[(n - k - 1) as usize].scale(&int(2 * k * (2 * n - 2 * k - 3)));
            if lhs != self.c[(n - k) as usize] {
                return Err(format!("recursion fails at k = {k}"));
            }
        }
        if self.c[0].scale(&int(2 * n - 2)) != self.c[1] {
            return Err("c_0 (2N-2) != c_1".to_string());
        }
        Ok(())
    }
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn check_order(order: usize) -> Result<()> {
    if order < 2 {
        return Err(Error::domain(format!("N must be at least 2, got {order}")));
    }
    Ok(())
}

fn top_constant(order: usize, mode: ConstantMode) -> Result<ExactScalar> {
    check_order(order)?;
    let n = order as i64;
    let omega = sphere_area(2 * n - 1)?;
    let denom = match mode {
        ConstantMode::PaperLiteral => omega,
        ConstantMode::Corrected => omega.scale(&int(2 * n - 3)),
    };
    denom.recip()
}

/// Builds `c_0 … c_{N-1}` for the given normalization.
pub fn constant_chain(order: usize, mode: ConstantMode) -> Result<ConstantChain> {
    check_order(order)?;
    let n = order as i64;
    let mut c = vec![ExactScalar::integer(0); order];
    c[order - 1] = top_constant(order, mode)?;
    for k in 1..=(n - 2) {
        let divisor = int(2 * k * (2 * n - 2 * k - 3));
        c[(n - k - 1) as usize] = c[(n - k) as usize].scale(&divisor.recip());
    }
    c[0] = c[1].scale(&int(2 * n - 2).recip());
    Ok(ConstantChain { order, mode, c })
}

/// Flux of `∂_r(-c_{N-1} r^{-(2N-3)})` through any sphere centred at the pole.
///
/// The kernel `-c_{N-1}|x|^{-(2N-3)}` is a fundamental solution of Δ in
/// `ℝ^{2N-1}` exactly when this equals one.
pub fn flux_check(order: usize, mode: ConstantMode) -> Result<ExactScalar> {
    check_order(order)?;
    let n = order as i64;
    let chain = constant_chain(order, mode)?;
    let omega = sphere_area(2 * n - 1)?;
    Ok(&chain.get(order - 1).scale(&int(2 * n - 3)) * &omega)
}

/// The mode whose flux is exactly one; `Corrected` for every `N`, and both at `N = 2`.
pub fn adjudicate_mode(order: usize) -> Result<ConstantMode> {
    for mode in [ConstantMode::Corrected, ConstantMode::PaperLiteral] {
        if flux_check(order, mode)? == ExactScalar::one() {
            return Ok(mode);
        }
    }
    Err(Error::Internal(format!("no constant mode has unit flux at N = {order}")))
}
