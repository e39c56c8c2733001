//! Exact calculus on radial functions of the form
//!
//! ```text
//! r^e · Σ_j a_j (1 + r²)^{q_j},   e ∈ {0, 1},  a_j ∈ ℚ,  q_j ∈ ½ℤ
//! ```
//!
//! The family contains `(1 + r²)^{1/2}` and is closed under `d/dr`, the radial
//! Laplacian in any dimension, products, and half-integer powers of its
//! single-term members. Products rewrite `r²` as `(1 + r²) - 1`, so every
//! element has a unique canonical form and identities are decided by equality.

use crate::error::{Error, Result};
use crate::highprec::{nth_root_rational, rational_from_f64, rational_powi, rational_to_f64, sqrt_rational, PreciseReal};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Element of the radial ring. Exponents are stored doubled: key `q2`
/// represents the factor `(1 + r²)^{q2/2}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RadialExpr {
    parity: u8,
    terms: BTreeMap<i32, BigRational>,
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl RadialExpr {
    pub fn zero(parity: u8) -> Self {
        assert!(parity <= 1, "parity must be 0 or 1");
        RadialExpr { parity, terms: BTreeMap::new() }
    }

    /// The constant function `c`.
    pub fn constant(c: BigRational) -> Self {
        Self::from_terms(0, [(0, c)])
    }

    /// `(1 + r²)^{q2/2}`.
    pub fn base_power(q2: i32) -> Self {
        Self::from_terms(0, [(q2, BigRational::one())])
    }

    /// The identity function `r`.
    pub fn r() -> Self {
        Self::from_terms(1, [(0, BigRational::one())])
    }

    /// Builds a canonical element, merging repeated exponents and dropping zeros.
    pub fn from_terms(parity: u8, terms: impl IntoIterator<Item = (i32, BigRational)>) -> Self {
        let mut out = Self::zero(parity);
        for (q2, a) in terms {
            out.add_term(q2, a);
        }
        out
    }

    fn add_term(&mut self, q2: i32, a: BigRational) {
        if a.is_zero() {
            return;
        }
        let slot = self.terms.entry(q2).or_insert_with(BigRational::zero);
        *slot += a;
        if slot.is_zero() {
            self.terms.remove(&q2);
        }
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as `(q2, coefficient)` in ascending `q2`.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &BigRational)> + '_ {
        self.terms.iter().map(|(q, a)| (*q, a))
    }

    pub fn coefficient(&self, q2: i32) -> Option<&BigRational> {
        self.terms.get(&q2)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(q2, coeff)` if the element is a single term.
    pub fn single_term(&self) -> Option<(i32, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(q, a)| (*q, a))
        } else {
            None
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_terms(self.parity, self.terms.iter().map(|(q, a)| (*q, a * c)))
    }

    pub fn neg(&self) -> Self {
        self.scale(&int(-1))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.parity != other.parity {
            return Err(Error::Unsupported(format!(
                "cannot add parity {} and parity {} elements",
                self.parity, other.parity
            )));
        }
        let mut out = self.clone();
        for (q, a) in &other.terms {
            out.add_term(*q, a.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Exact product; `r · r` is rewritten as `(1 + r²) - 1`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero((self.parity + other.parity) % 2);
        let both_odd = self.parity == 1 && other.parity == 1;
        for (q1, a1) in &self.terms {
            for (q2, a2) in &other.terms {
                let c = a1 * a2;
                if both_odd {
                    out.add_term(q1 + q2 + 2, c.clone());
                    out.add_term(q1 + q2, -c);
                } else {
                    out.add_term(q1 + q2, c);
                }
            }
        }
        out
    }

    /// Exact `d/dr`; the parity flips.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(1 - self.parity);
        for (q2, a) in &self.terms {
            if self.parity == 0 {
                // d/dr t^q = 2q r t^{q-1}, and 2q = q2.
                out.add_term(q2 - 2, a * int(*q2 as i64));
            } else {
                // d/dr (r t^q) = (1 + 2q) t^q - 2q t^{q-1}.
                out.add_term(*q2, a * int(1 + *q2 as i64));
                out.add_term(q2 - 2, -(a * int(*q2 as i64)));
            }
        }
        out
    }

    /// For a parity-1 element `r·g`, returns `g`.
    pub fn divide_by_r(&self) -> Result<Self> {
        if self.parity != 1 {
            return Err(Error::Unsupported("divide_by_r needs a parity-1 element".into()));
        }
        Ok(RadialExpr { parity: 0, terms: self.terms.clone() })
    }

    /// Radial Laplacian `f'' + (n-1) f'/r` in dimension `n` (odd, ≥ 3).
    pub fn laplacian(&self, n: i64) -> Result<Self> {
        check_dimension(n)?;
        if self.parity != 0 {
            return Err(Error::Unsupported(
                "Laplacian of parity-1 elements is not part of the ring calculus".into(),
            ));
        }
        let mut out = Self::zero(0);
        for (q2, a) in &self.terms {
            // Δ t^q = 2q(n + 2q - 2) t^{q-1} - 4q(q-1) t^{q-2}, written with q2 = 2q.
            let q2i = *q2 as i64;
            let first = a * int(q2i * (n + q2i - 2));
            let second = a * BigRational::new(BigInt::from(-q2i * (q2i - 2)), BigInt::from(1));
            out.add_term(q2 - 2, first);
            out.add_term(q2 - 4, second);
        }
        Ok(out)
    }

    /// `(-Δ)^k f`; `k = 0` returns `f`.
    pub fn polylaplacian(&self, n: i64, k: u32) -> Result<Self> {
        check_dimension(n)?;
        if self.parity != 0 {
            return Err(Error::Unsupported(
                "polylaplacian of parity-1 elements is not part of the ring calculus".into(),
            ));
        }
        let mut f = self.clone();
        for _ in 0..k {
            f = f.laplacian(n)?.neg();
        }
        Ok(f)
    }

    /// `(p, c)` with `f(r) ~ c r^p` as `r → ∞`.
    pub fn leading_asymptotics(&self) -> Result<AsymptoticLead> {
        let (q2, a) = self
            .terms
            .iter()
            .next_back()
            .ok_or_else(|| Error::domain("leading asymptotics of the zero function"))?;
        Ok(AsymptoticLead {
            growth_exponent: self.parity as i32 + q2,
            lead_coeff: a.clone(),
        })
    }

    /// Value at `r = 0` (exact); zero for parity-1 elements.
    pub fn value_at_origin(&self) -> BigRational {
        if self.parity == 1 {
            return BigRational::zero();
        }
        self.terms.values().fold(BigRational::zero(), |acc, a| acc + a)
    }

    /// `f(r)` with relative error below `2^{-precision}`.
    ///
    /// Writing `X = 1 + r²`, the value is `r^e (P + Q √X)` with exact rationals
    /// `P, Q`; the only inexact step is one square root, and opposite signs are
    /// resolved through `(P² - Q² X) / (P - Q √X)` so nothing cancels.
    pub fn evaluate(&self, r: f64, precision: u32) -> Result<PreciseReal> {
        if precision < 53 {
            return Err(Error::domain(format!("precision must be at least 53 bits, got {precision}")));
        }
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("radius must be finite and non-negative, got {r}")));
        }
        let rq = rational_from_f64(r);
        let x = BigRational::one() + &rq * &rq;
        let mut p = BigRational::zero();
        let mut q = BigRational::zero();
        for (q2, a) in &self.terms {
            let whole = q2.div_euclid(2) as i64;
            let term = a * rational_powi(&x, whole);
            if q2.rem_euclid(2) == 0 {
                p += term;
            } else {
                q += term;
            }
        }
        let value = if q.is_zero() {
            p
        } else {
            let s = sqrt_rational(&x, precision + 8);
            if p.is_zero() || p.is_positive() == q.is_positive() {
                p + q * s
            } else {
                let num = &p * &p - &q * &q * &x;
                if num.is_zero() {
                    BigRational::zero()
                } else {
                    num / (p - q * s)
                }
            }
        };
        let value = if self.parity == 1 { value * rq } else { value };
        Ok(PreciseReal::new(value, precision))
    }

    /// Double-precision evaluation through [`NumericRadial`].
    pub fn eval_f64(&self, r: f64) -> f64 {
        self.to_numeric().eval(r)
    }

    pub fn to_numeric(&self) -> NumericRadial {
        NumericRadial {
            parity: self.parity,
            terms: self.terms.iter().map(|(q, a)| (*q, rational_to_f64(a))).collect(),
        }
    }
}

fn check_dimension(n: i64) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::domain(format!("dimension must be odd and >= 3, got {n}")));
    }
    Ok(())
}

impl fmt::Display for RadialExpr {
    /// `r^e * ((num/den)·t^(q2/2) + …)` with terms in descending `q2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r^{} * (", self.parity)?;
        if self.terms.is_empty() {
            f.write_str("0")?;
        }
        for (i, (q2, a)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({}/{})·t^({}/2)", a.numer(), a.denom(), q2)?;
        }
        f.write_str(")")
    }
}

impl FromStr for RadialExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("malformed radial expression: {s:?}"));
        let rest = s.trim().strip_prefix("r^").ok_or_else(bad)?;
        let (parity, rest) = rest.split_once(" * (").ok_or_else(bad)?;
        let parity: u8 = parity.parse().map_err(|_| bad())?;
        if parity > 1 {
            return Err(bad());
        }
        let body = rest.strip_suffix(')').ok_or_else(bad)?;
        if body == "0" {
            return Ok(Self::zero(parity));
        }
        let mut out = Self::zero(parity);
        for term in body.split(" + ") {
            let (coeff, power) = term.split_once(")·t^(").ok_or_else(bad)?;
            let coeff = coeff.strip_prefix('(').ok_or_else(bad)?;
            let (num, den) = coeff.split_once('/').ok_or_else(bad)?;
            let q2 = power.strip_suffix("/2)").ok_or_else(bad)?;
            let num: BigInt = num.parse().map_err(|_| bad())?;
            let den: BigInt = den.parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            let q2: i32 = q2.parse().map_err(|_| bad())?;
            out.add_term(q2, BigRational::new(num, den));
        }
        Ok(out)
    }
}

/// Leading behaviour `f(r) ~ lead_coeff · r^growth_exponent` at infinity.
///
/// The exponent is always an integer in this ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsymptoticLead {
    pub growth_exponent: i32,
    pub lead_coeff: BigRational,
}

/// Floating-point image of a [`RadialExpr`] for quadrature inner loops.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericRadial {
    parity: u8,
    terms: Vec<(i32, f64)>,
}

impl NumericRadial {
    pub fn eval(&self, r: f64) -> f64 {
        let t = 1.0 + r * r;
        let st = t.sqrt();
        let sum: f64 = self.terms.iter().map(|(q2, a)| a * st.powi(*q2)).sum();
        if self.parity == 1 {
            r * sum
        } else {
            sum
        }
    }
}

/// `(-Δ)^N (1+r²)^{1/2}` in dimension `2N-1` as `-K_N (1+r²)^{-(4N-1)/2}`; returns `K_N`.
pub fn curvature_constant(order: usize) -> Result<BigRational> {
    if order < 2 {
        return Err(Error::domain(format!("N must be at least 2, got {order}")));
    }
    let n = 2 * order as i64 - 1;
    let image = RadialExpr::base_power(1).polylaplacian(n, order as u32)?;
    let expected_q2 = -(4 * order as i32 - 1);
    match image.single_term() {
        Some((q2, c)) if q2 == expected_q2 && c.is_negative() => Ok(-c.clone()),
        _ => Err(Error::Internal(format!(
            "(-Δ)^{order} (1+r²)^(1/2) in dimension {n} is {image}, not a single negative term at t^({expected_q2}/2)"
        ))),
    }
}

/// Positive scalar multiple of a ring element, for irrational dilation factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledRadial {
    pub scale: f64,
    pub expr: RadialExpr,
}

impl ScaledRadial {
    pub fn eval(&self, r: f64) -> f64 {
        self.scale * self.expr.eval_f64(r)
    }
}

/// The representative `ũ = a (1+r²)^{1/2}` with `K_N a^{4N} = 1`, which solves
/// `(-Δ)^N ũ = -ũ^{-(4N-1)}` in `ℝ^{2N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSolution {
    order: usize,
    k_n: BigRational,
    a: PreciseReal,
    base: RadialExpr,
}

impl NormalizedSolution {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dimension(&self) -> i64 {
        2 * self.order as i64 - 1
    }

    pub fn curvature_constant(&self) -> &BigRational {
        &self.k_n
    }

    /// The dilation factor `a = K_N^{-1/(4N)}`.
    pub fn scale(&self) -> f64 {
        self.a.to_f64()
    }

    pub fn scale_precise(&self) -> &PreciseReal {
        &self.a
    }

    /// `(1+r²)^{1/2}`; `ũ = scale() · base()`.
    pub fn base(&self) -> &RadialExpr {
        &self.base
    }

    pub fn solution(&self) -> ScaledRadial {
        ScaledRadial { scale: self.scale(), expr: self.base.clone() }
    }

    /// `(-Δ)^k ũ`.
    pub fn polylaplacian(&self, k: u32) -> ScaledRadial {
        let expr = self
            .base
            .polylaplacian(self.dimension(), k)
            .expect("base is parity 0 in odd dimension");
        ScaledRadial { scale: self.scale(), expr }
    }

    /// `ũ^{-(4N-1)} = a^{-(4N-1)} (1+r²)^{-(4N-1)/2}`.
    pub fn source_density(&self) -> ScaledRadial {
        let p = 4 * self.order as i32 - 1;
        ScaledRadial {
            scale: self.scale().powi(-p),
            expr: RadialExpr::base_power(-p),
        }
    }

    /// Relative defect `|K_N a^{4N} - 1|` at the stored precision.
    pub fn scaling_defect(&self) -> f64 {
        let prod = &self.k_n * rational_powi(self.a.rational(), 4 * self.order as i64);
        rational_to_f64(&(prod - BigRational::one()).abs())
    }
}

/// Builds the normalized representative with `a` accurate to `precision` bits.
pub fn normalized_solution(order: usize, precision: u32) -> Result<NormalizedSolution> {
    let k_n = curvature_constant(order)?;
    let a = nth_root_rational(&k_n.recip(), 4 * order as u32, precision + 8);
    Ok(NormalizedSolution {
        order,
        k_n,
        a: PreciseReal::new(a, precision),
        base: RadialExpr::base_power(1),
    })
}

/// `(v_0(0), v_0'(0), …, v_{N-1}(0), v_{N-1}'(0))` for `v_k = (-Δ)^k ũ`.
pub fn initial_data(order: usize) -> Result<Vec<f64>> {
    let sol = normalized_solution(order, 128)?;
    let mut out = Vec::with_capacity(2 * order);
    for k in 0..order as u32 {
        let vk = sol.base.polylaplacian(sol.dimension(), k)?;
        let at_zero = vk.value_at_origin() * sol.a.rational();
        out.push(rational_to_f64(&at_zero));
        out.push(0.0);
    }
    Ok(out)
}
