//! Verification toolkit for the polyharmonic equations
//! `(-Δ)^N u ± u^{-(4N-1)} = 0` in `ℝ^{2N-1}`.
//!
//! The crate is organised around five layers:
//!
//! * [`exact_constants`]: Γ at half-integers, sphere areas and the
//!   `c_0 … c_{N-1}` Riesz-kernel constants, all exact.
//! * [`radial_calculus`]: an exact ring of radial functions containing
//!   `(1+r²)^{1/2}`, closed under `d/dr` and the radial Laplacian.
//! * [`riesz_potential`]: radial Riesz-type potentials, spherical means and
//!   the nested mean-value identity, by closed-form angular kernels and
//!   adaptive quadrature in the radial variable.
//! * [`radial_ode`]: the `2N`-th order radial ODE system, shooting and
//!   classification of trajectory fates.
//! * [`verify`]: suites, reports and golden tables behind the CLI.

pub mod error;
pub mod exact_constants;
pub mod golden;
pub mod highprec;
pub mod quadrature;
pub mod radial_calculus;
pub mod radial_ode;
pub mod riesz_potential;
pub mod verify;

pub use error::{Error, Result};
