//! The radial system `v_k'' + ((n-1)/r) v_k' = -v_{k+1}` for `k < N-1`, closed by
//! `v_{N-1}'' + ((n-1)/r) v_{N-1}' = σ v_0^{-(4N-1)}`, integrated with an
//! embedded Dormand–Prince 5(4) pair after a fourth-order Taylor step off
//! the origin.

use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Sign of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    /// `(-Δ)^N u + u^{-(4N-1)} = 0`, so `σ = +1`.
    PlusNegativePower,
    /// `(-Δ)^N u = u^{-(4N-1)}`, so `σ = -1`.
    MinusNegativePower,
}

impl Sign {
    pub fn sigma(self) -> f64 {
        match self {
            Sign::PlusNegativePower => 1.0,
            Sign::MinusNegativePower => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdeSystem {
    pub order: usize,
    pub sign: Sign,
}

impl OdeSystem {
    pub fn new(order: usize, sign: Sign) -> Result<Self> {
        if order < 2 {
            return Err(Error::domain(format!("N must be at least 2, got {order}")));
        }
        Ok(OdeSystem { order, sign })
    }

    pub fn dimension(&self) -> usize {
        2 * self.order - 1
    }

    pub fn power(&self) -> i32 {
        4 * self.order as i32 - 1
    }

    /// Source term of the last equation at `v_0`.
    fn source(&self, v0: f64) -> f64 {
        self.sign.sigma() * v0.powi(-self.power())
    }

    fn rhs(&self, r: f64, y: &[f64], dy: &mut [f64]) {
        let damp = (self.dimension() - 1) as f64 / r;
        let nn = self.order;
        for k in 0..nn {
            let v = y[2 * k + 1];
            let forcing = if k + 1 < nn { -y[2 * k + 2] } else { self.source(y[0]) };
            dy[2 * k] = v;
            dy[2 * k + 1] = forcing - damp * v;
        }
    }

    /// Even Taylor coefficients `(v_k''(0), v_k''''(0))` from `Δv_k(0) = -v_{k+1}(0)`,
    /// `Δ²v_k(0) = v_{k+2}(0)`, `Δf(0) = n f''(0)` and `Δ²f(0) = n(n+2) f''''(0)/3`.
    fn taylor_at_origin(&self, y: &[f64]) -> Vec<(f64, f64)> {
        let n = self.dimension() as f64;
        let nn = self.order;
        let p = self.power();
        let sigma = self.sign.sigma();
        // v_N = -σ v_0^{-p}; v_{N+1} = σ p v_0^{-p-1} v_1 at the origin.
        let mut v: Vec<f64> = (0..nn).map(|k| y[2 * k]).collect();
        v.push(-sigma * y[0].powi(-p));
        v.push(sigma * p as f64 * y[0].powi(-p - 1) * y[2]);
        (0..nn)
            .map(|k| (-v[k + 1] / n, 3.0 * v[k + 2] / (n * (n + 2.0))))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedRmax,
    PositivityLost,
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub system: OdeSystem,
    pub grid: Vec<f64>,
    /// `(v_0, v_0', …, v_{N-1}, v_{N-1}')` at each grid radius.
    pub states: Vec<Vec<f64>>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last_radius(&self) -> f64 {
        *self.grid.last().expect("non-empty trajectory")
    }

    /// State at a grid radius hit exactly (checkpoints are hit exactly).
    pub fn state_at(&self, r: f64) -> Option<&[f64]> {
        self.grid.iter().position(|&g| g == r).map(|i| self.states[i].as_slice())
    }

    /// `v_0''` reconstructed from the state via the first equation.
    pub fn second_derivative_v0(&self, i: usize) -> Option<f64> {
        let r = self.grid[i];
        if r == 0.0 {
            return None;
        }
        let y = &self.states[i];
        let n = self.system.dimension() as f64;
        let forcing = if self.system.order > 1 { -y[2] } else { self.system.source(y[0]) };
        Some(forcing - (n - 1.0) / r * y[1])
    }

    /// CSV with columns `r, v0, v0_prime, v1, v1_prime, …`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["r".to_string()];
        for k in 0..self.system.order {
            header.push(format!("v{k}"));
            header.push(format!("v{k}_prime"));
        }
        let io = |e: csv::Error| Error::Internal(format!("csv encoding failed: {e}"));
        w.write_record(&header).map_err(io)?;
        for (r, y) in self.grid.iter().zip(&self.states) {
            let mut row = vec![format!("{r:e}")];
            row.extend(y.iter().map(|v| format!("{v:e}")));
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(format!("csv flush failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }
}

/// Integration controls beyond the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    pub tol: f64,
    /// Taylor step off the origin; `tol^{1/3}` when `None`.
    pub bootstrap_step: Option<f64>,
    /// Stop once `v_0` falls to this fraction of `v_0(0)`.
    pub positivity_floor_ratio: f64,
    /// Radii the stepper must land on exactly.
    pub checkpoints: Vec<f64>,
    pub max_steps: usize,
}

impl IntegrateOptions {
    pub fn new(tol: f64) -> Self {
        IntegrateOptions {
            tol,
            bootstrap_step: None,
            positivity_floor_ratio: 1e-6,
            checkpoints: Vec::new(),
            max_steps: 2_000_000,
        }
    }

    pub fn with_checkpoints(mut self, radii: &[f64]) -> Self {
        self.checkpoints = radii.to_vec();
        self
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand–Prince step; returns the new state and the error norm per unit step.
fn dp_step(sys: &OdeSystem, r: f64, y: &[f64], h: f64, tol: f64) -> (Vec<f64>, f64) {
    let m = y.len();
    let mut k = vec![vec![0.0; m]; 7];
    let mut tmp = vec![0.0; m];
    sys.rhs(r, y, &mut k[0]);
    for s in 1..7 {
        for i in 0..m {
            let mut acc = y[i];
            for j in 0..s {
                acc += h * A[s][j] * k[j][i];
            }
            tmp[i] = acc;
        }
        let mut stage = vec![0.0; m];
        sys.rhs(r + C[s] * h, &tmp, &mut stage);
        k[s] = stage;
    }
    let mut y_new = vec![0.0; m];
    let mut err_sq = 0.0;
    for i in 0..m {
        let mut acc = y[i];
        let mut e = 0.0;
        let mut slope: f64 = 0.0;
        for s in 0..7 {
            acc += h * B[s] * k[s][i];
            e += h * E[s] * k[s][i];
            slope = slope.max(k[s][i].abs());
        }
        y_new[i] = acc;
        // Round-off in the stage slopes bounds how small `e` can be made.
        let scale = (tol + tol * y[i].abs().max(acc.abs()) + 32.0 * f64::EPSILON * slope) * h;
        err_sq += (e / scale).powi(2);
    }
    (y_new, (err_sq / m as f64).sqrt())
}

/// Integrates from `r = 0` with default options at tolerance `tol`.
pub fn integrate(sys: &OdeSystem, init: &[f64], r_max: f64, tol: f64) -> Result<Trajectory> {
    integrate_with(sys, init, r_max, &IntegrateOptions::new(tol))
}

pub fn integrate_with(sys: &OdeSystem, init: &[f64], r_max: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    let m = 2 * sys.order;
    if init.len() != m {
        return Err(Error::domain(format!("expected {m} initial values, got {}", init.len())));
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("initial values must be finite"));
    }
    if let Some(k) = (0..sys.order).find(|k| init[2 * k + 1] != 0.0) {
        return Err(Error::domain(format!("v{k}'(0) must vanish for a regular radial solution")));
    }
    if !(init[0] > 0.0) {
        return Err(Error::domain("v0(0) must be positive"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    if !(r_max >= 0.0 && r_max.is_finite()) {
        return Err(Error::domain("r_max must be finite and non-negative"));
    }
    let floor = opts.positivity_floor_ratio * init[0];
    let mut grid = vec![0.0];
    let mut states = vec![init.to_vec()];
    let done = |grid: Vec<f64>, states: Vec<Vec<f64>>, termination| Trajectory { system: *sys, grid, states, termination };
    if r_max == 0.0 {
        return Ok(done(grid, states, Termination::ReachedRmax));
    }

    let mut stops: Vec<f64> = opts.checkpoints.iter().copied().filter(|&c| c > 0.0 && c < r_max).collect();
    stops.push(r_max);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    // Even Taylor polynomial through h⁴; odd derivatives vanish at the origin.
    let h0 = opts.bootstrap_step.unwrap_or_else(|| opts.tol.cbrt()).min(stops[0]);
    let taylor = sys.taylor_at_origin(init);
    let mut y: Vec<f64> = taylor
        .iter()
        .enumerate()
        .flat_map(|(k, &(d2, d4))| {
            let h2 = h0 * h0;
            [init[2 * k] + 0.5 * h2 * d2 + h2 * h2 * d4 / 24.0, h0 * d2 + h0 * h2 * d4 / 6.0]
        })
        .collect();
    let mut r = h0;
    grid.push(r);
    states.push(y.clone());
    if y[0] <= floor {
        return Ok(done(grid, states, Termination::PositivityLost));
    }

    let mut h = h0;
    let mut next_stop = 0;
    while next_stop < stops.len() && stops[next_stop] <= r {
        next_stop += 1;
    }
    let mut steps = 0;
    while next_stop < stops.len() {
        if steps >= opts.max_steps {
            return Ok(done(grid, states, Termination::StepUnderflow));
        }
        steps += 1;
        let target = stops[next_stop];
        let landing = r + h >= target;
        let h_try = if landing { target - r } else { h };
        if h_try <= 1e-14 * r.max(1.0) {
            return Ok(done(grid, states, Termination::StepUnderflow));
        }
        let (y_new, err) = dp_step(sys, r, &y, h_try, opts.tol);
        let finite = err.is_finite() && y_new.iter().all(|v| v.is_finite());
        if !finite || err > 1.0 {
            h = if finite { h_try * (0.9 * err.powf(-0.2)).max(0.2) } else { h_try * 0.25 };
            continue;
        }
        r = if landing { target } else { r + h_try };
        y = y_new;
        grid.push(r);
        states.push(y.clone());
        if landing {
            next_stop += 1;
        }
        if y[0] <= floor {
            return Ok(done(grid, states, Termination::PositivityLost));
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        // Keep the proposal from the unclipped step size after a landing.
        h = if landing { h.max(h_try * factor) } else { h_try * factor };
    }
    Ok(done(grid, states, Termination::ReachedRmax))
}

/// Relative oscillation threshold for linear growth of `v_0/r`.
pub const LINEAR_OSCILLATION: f64 = 1e-3;
/// Relative increase of `v_0/r` across the window marking superlinear growth.
pub const SUPERLINEAR_INCREASE: f64 = 0.1;
/// Default width of the trailing window used by [`classify_trajectory`].
pub const DEFAULT_WINDOW: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FateKind {
    LinearGrowth { alpha: f64 },
    HitsZero { r_star: f64 },
    SignEvent { k: usize, r_star: f64 },
    Superlinear,
    Inconclusive,
}

impl FateKind {
    /// Label without payload, for comparisons across tolerances.
    pub fn label(&self) -> &'static str {
        match self {
            FateKind::LinearGrowth { .. } => "linear_growth",
            FateKind::HitsZero { .. } => "hits_zero",
            FateKind::SignEvent { .. } => "sign_event",
            FateKind::Superlinear => "superlinear",
            FateKind::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for FateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FateKind::LinearGrowth { alpha } => write!(f, "linear_growth(alpha={alpha:.6e})"),
            FateKind::HitsZero { r_star } => write!(f, "hits_zero(r={r_star:.6e})"),
            FateKind::SignEvent { k, r_star } => write!(f, "sign_event(k={k}, r={r_star:.6e})"),
            FateKind::Superlinear => f.write_str("superlinear"),
            FateKind::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fate {
    pub kind: FateKind,
    pub detail: String,
}

/// First radius where `v_k` (`1 ≤ k ≤ N-1`) takes the opposite sign of `v_k(0)`.
pub fn first_sign_change(t: &Trajectory) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for k in 1..t.system.order {
        let s0 = t.states[0][2 * k].signum();
        if let Some(i) = t.states.iter().position(|y| y[2 * k] * s0 < 0.0 || (s0 == 0.0 && y[2 * k] != 0.0)) {
            let r = t.grid[i];
            if best.is_none_or(|(_, rb)| r < rb) {
                best = Some((k, r));
            }
        }
    }
    best
}

/// Whether every `v_k`, `1 ≤ k ≤ N-1`, keeps one strict sign along the trajectory.
pub fn sign_constant(t: &Trajectory) -> bool {
    (1..t.system.order).all(|k| {
        let s0 = t.states[0][2 * k];
        s0 != 0.0 && t.states.iter().all(|y| y[2 * k] * s0 > 0.0)
    })
}

/// Applies the detection rules in order: positivity loss, sign change,
/// linear growth, superlinear growth.
pub fn classify_trajectory(t: &Trajectory, window: f64) -> Result<Fate> {
    if t.grid.is_empty() {
        return Err(Error::domain("cannot classify an empty trajectory"));
    }
    let r_end = t.last_radius();
    if t.termination == Termination::PositivityLost {
        return Ok(Fate {
            kind: FateKind::HitsZero { r_star: r_end },
            detail: format!("v0 fell below the positivity floor at r = {r_end:e}"),
        });
    }
    if let Some((k, r_star)) = first_sign_change(t) {
        return Ok(Fate {
            kind: FateKind::SignEvent { k, r_star },
            detail: format!("v{k} changed sign at r = {r_star:e}"),
        });
    }
    let start = r_end - window;
    let ratios: Vec<f64> = t
        .grid
        .iter()
        .zip(&t.states)
        .filter(|(r, _)| **r > 0.0 && **r >= start)
        .map(|(r, y)| y[0] / r)
        .collect();
    if start <= 0.0 || ratios.len() < 2 {
        return Ok(Fate {
            kind: FateKind::Inconclusive,
            detail: format!("trajectory ends at r = {r_end:e}, too short for a window of {window}"),
        });
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let oscillation = (hi - lo) / mean.abs();
    if mean > 0.0 && oscillation < LINEAR_OSCILLATION {
        return Ok(Fate {
            kind: FateKind::LinearGrowth { alpha: mean },
            detail: format!("v0/r over [{start:e}, {r_end:e}] has relative oscillation {oscillation:e}"),
        });
    }
    let first = ratios[0];
    let last = *ratios.last().expect("two ratios");
    let monotone = ratios.windows(2).all(|w| w[1] >= w[0]);
    if monotone && first > 0.0 && last > first * (1.0 + SUPERLINEAR_INCREASE) {
        return Ok(Fate {
            kind: FateKind::Superlinear,
            detail: format!("v0/r rose from {first:e} to {last:e} over the last window"),
        });
    }
    Ok(Fate {
        kind: FateKind::Inconclusive,
        detail: format!("v0/r oscillation {oscillation:e}, from {first:e} to {last:e}"),
    })
}

/// One row of a fate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotResult {
    pub init: Vec<f64>,
    pub fate: std::result::Result<Fate, String>,
    pub sign_constant: bool,
}

/// Eleven equally spaced radii covering the trailing window `[r_max - window, r_max]`.
pub fn window_checkpoints(r_max: f64, window: f64) -> Vec<f64> {
    let start = (r_max - window).max(0.0);
    (0..=10).map(|i| start + (r_max - start) * i as f64 / 10.0).collect()
}

/// Integrates and classifies every initial condition; order follows `grid`.
/// The trailing window is sampled at [`window_checkpoints`] so the verdict
/// does not depend on where the stepper happened to land.
pub fn shoot_grid(sys: &OdeSystem, grid: &[Vec<f64>], r_max: f64, tol: f64, window: f64) -> Vec<ShotResult> {
    let opts = IntegrateOptions::new(tol).with_checkpoints(&window_checkpoints(r_max, window));
    grid.par_iter()
        .map(|init| {
            let outcome = integrate_with(sys, init, r_max, &opts).and_then(|t| {
                let fate = classify_trajectory(&t, window)?;
                Ok((fate, sign_constant(&t)))
            });
            match outcome {
                Ok((fate, sc)) => ShotResult { init: init.clone(), fate: Ok(fate), sign_constant: sc },
                Err(e) => ShotResult { init: init.clone(), fate: Err(e.to_string()), sign_constant: false },
            }
        })
        .collect()
}

/// `(1, 0, v1, 0)` for `v1 ∈ {-5, -4.5, …, -0.5}`.
pub fn minus_sign_grid() -> Vec<Vec<f64>> {
    (1..=10).rev().map(|i| vec![1.0, 0.0, -0.5 * i as f64, 0.0]).collect()
}

/// Multiplicative perturbations of `v_1(0)` around the given initial data.
pub fn perturbation_grid(init: &[f64], deltas: &[f64]) -> Vec<Vec<f64>> {
    deltas
        .iter()
        .map(|d| {
            let mut y = init.to_vec();
            y[2] *= 1.0 + d;
            y
        })
        .collect()
}

/// Relative perturbations used around the exact initial data.
pub const PERTURBATIONS: [f64; 7] = [-0.2, -0.1, -0.05, 0.0, 0.05, 0.1, 0.2];

/// Largest relative residual of `r^{n-1} v_k'(r) + ∫₀^r s^{n-1} v_{k+1}(s) ds = 0`
/// over the grid, for `0 ≤ k < N-1`. The integral uses quintic Hermite panels
/// built from the stored state and the equations, and the exact Taylor
/// polynomial on the first panel.
pub fn mass_identity_residual(t: &Trajectory) -> f64 {
    let n = t.system.dimension() as i32;
    let m = (n - 1) as f64;
    let nf = n as f64;
    let taylor = t.system.taylor_at_origin(&t.states[0]);
    let mut worst: f64 = 0.0;
    for k in 0..t.system.order - 1 {
        let j = k + 1;
        // g = s^m v_j and its first two derivatives.
        let jets = |i: usize| {
            let r = t.grid[i];
            let y = &t.states[i];
            let forcing = if j + 1 < t.system.order { -y[2 * j + 2] } else { t.system.source(y[0]) };
            let (v, dv) = (y[2 * j], y[2 * j + 1]);
            let ddv = forcing - m / r * dv;
            let g = r.powi(n - 1) * v;
            let dg = m * r.powi(n - 2) * v + r.powi(n - 1) * dv;
            let ddg = m * (m - 1.0) * r.powi(n - 3) * v + 2.0 * m * r.powi(n - 2) * dv + r.powi(n - 1) * ddv;
            (g, dg, ddg)
        };
        let mut integral = 0.0;
        for i in 1..t.grid.len() {
            let h = t.grid[i] - t.grid[i - 1];
            integral += if i == 1 {
                let (d2, d4) = taylor[j];
                t.states[0][2 * j] * h.powi(n) / nf
                    + d2 * h.powi(n + 2) / (2.0 * (nf + 2.0))
                    + d4 * h.powi(n + 4) / (24.0 * (nf + 4.0))
            } else {
                let (ga, dga, dda) = jets(i - 1);
                let (gb, dgb, ddb) = jets(i);
                0.5 * h * (ga + gb) + h * h / 10.0 * (dga - dgb) + h * h * h / 120.0 * (dda + ddb)
            };
            let flux = t.grid[i].powi(n - 1) * t.states[i][2 * k + 1];
            let scale = flux.abs().max(integral.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((flux + integral).abs() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_calculus::{initial_data, normalized_solution};

    fn exact_values(order: usize, r: f64) -> Vec<f64> {
        let sol = normalized_solution(order, 128).unwrap();
        (0..order as u32).map(|k| sol.polylaplacian(k).eval(r)).collect()
    }

    #[test]
    fn reproduces_exact_solution_n2() {
        let sys = OdeSystem::new(2, Sign::PlusNegativePower).unwrap();
        let init = initial_data(2).unwrap();
        let radii = [1.0, 5.0, 25.0, 50.0];
        let opts = IntegrateOptions::new(1e-12).with_checkpoints(&radii);
        let t = integrate_with(&sys, &init, 50.0, &opts).unwrap();
        assert_eq!(t.termination, Termination::ReachedRmax);
        for r in radii {
            let y = t.state_at(r).unwrap();
            for (k, v) in exact_values(2, r).into_iter().enumerate() {
                let got = y[2 * k];
                assert!(((got - v) / v).abs() < 1e-8, "r {r} k {k}: {got} vs {v}");
            }
        }
        let fate = classify_trajectory(&t, DEFAULT_WINDOW).unwrap();
        let a = normalized_solution(2, 128).unwrap().scale();
        match fate.kind {
            FateKind::LinearGrowth { alpha } => assert!(((alpha - a) / a).abs() < 1e-3),
            other => panic!("unexpected fate {other}"),
        }
    }

    #[test]
    fn zero_rmax_keeps_initial_state() {
        let sys = OdeSystem::new(2, Sign::PlusNegativePower).unwrap();
        let init = initial_data(2).unwrap();
        let t = integrate(&sys, &init, 0.0, 1e-8).unwrap();
        assert_eq!(t.grid, vec![0.0]);
        assert_eq!(t.states, vec![init]);
        assert_eq!(t.termination, Termination::ReachedRmax);
    }

    #[test]
    fn rejects_bad_initial_data() {
        let sys = OdeSystem::new(2, Sign::PlusNegativePower).unwrap();
        assert!(integrate(&sys, &[1.0, 0.1, -1.0, 0.0], 1.0, 1e-8).is_err());
        assert!(integrate(&sys, &[1.0, 0.0, -1.0, 0.0], 1.0, 0.0).is_err());
        assert!(integrate(&sys, &[-1.0, 0.0, -1.0, 0.0], 1.0, 1e-8).is_err());
        assert!(integrate(&sys, &[1.0, 0.0, -1.0], 1.0, 1e-8).is_err());
    }

    #[test]
    fn positivity_floor_gives_hits_zero() {
        // Positive v1 drives v0 down for σ = +1.
        let sys = OdeSystem::new(2, Sign::PlusNegativePower).unwrap();
        let opts = IntegrateOptions { positivity_floor_ratio: 0.5, ..IntegrateOptions::new(1e-9) };
        let t = integrate_with(&sys, &[1.0, 0.0, 5.0, 0.0], 50.0, &opts).unwrap();
        assert_eq!(t.termination, Termination::PositivityLost);
        let fate = classify_trajectory(&t, DEFAULT_WINDOW).unwrap();
        assert_eq!(fate.kind, FateKind::HitsZero { r_star: t.last_radius() });
    }

    #[test]
    fn structure_along_exact_trajectory() {
        for order in [2usize, 3] {
            let sys = OdeSystem::new(order, Sign::PlusNegativePower).unwrap();
            let init = initial_data(order).unwrap();
            let t = integrate(&sys, &init, 100.0, 1e-11).unwrap();
            assert_eq!(t.termination, Termination::ReachedRmax);
            for (i, y) in t.states.iter().enumerate() {
                for k in 1..order {
                    assert!(y[2 * k] < 0.0);
                }
                if let Some(d2) = t.second_derivative_v0(i) {
                    assert!(d2 >= -1e-9);
                }
            }
            assert!(sign_constant(&t));
            assert!(mass_identity_residual(&t) < 1e-8);
        }
    }

    #[test]
    fn intermediate_quantities_decay() {
        // (n-1)a/r exceeds 1e-2 at r = 100, so the threshold is checked further out.
        for order in [2usize, 3] {
            let sys = OdeSystem::new(order, Sign::PlusNegativePower).unwrap();
            let opts = IntegrateOptions::new(1e-11).with_checkpoints(&[100.0, 1000.0]);
            let t = integrate_with(&sys, &initial_data(order).unwrap(), 1000.0, &opts).unwrap();
            let mid = t.state_at(100.0).unwrap().to_vec();
            let last = t.state_at(1000.0).unwrap();
            for k in 1..order {
                assert!(last[2 * k].abs() < mid[2 * k].abs());
                assert!(last[2 * k].abs() < 1e-2);
            }
        }
    }

    #[test]
    fn error_shrinks_with_tolerance() {
        let sys = OdeSystem::new(2, Sign::PlusNegativePower).unwrap();
        let init = initial_data(2).unwrap();
        let exact = exact_values(2, 10.0)[0];
        let err = |tol: f64| {
            let opts = IntegrateOptions::new(tol).with_checkpoints(&[10.0]);
            let t = integrate_with(&sys, &init, 10.0, &opts).unwrap();
            (t.state_at(10.0).unwrap()[0] - exact).abs()
        };
        for tol in [1e-6, 1e-7, 1e-8] {
            let coarse = err(tol);
            let fine = err(tol / 2.0);
            assert!(fine * 2.0 <= coarse, "tol {tol}: {coarse:e} -> {fine:e}");
        }
    }

    #[test]
    fn deterministic_trajectories() {
        let sys = OdeSystem::new(2, Sign::MinusNegativePower).unwrap();
        let a = integrate(&sys, &[1.0, 0.0, -1.0, 0.0], 30.0, 1e-9).unwrap();
        let b = integrate(&sys, &[1.0, 0.0, -1.0, 0.0], 30.0, 1e-9).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    }

    #[test]
    fn csv_shape() {
        let sys = OdeSystem::new(2, Sign::PlusNegativePower).unwrap();
        let t = integrate(&sys, &initial_data(2).unwrap(), 2.0, 1e-8).unwrap();
        let csv = t.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "r,v0,v0_prime,v1,v1_prime");
        assert_eq!(lines.count(), t.grid.len());
    }

    #[test]
    fn empty_grid_gives_empty_table() {
        let sys = OdeSystem::new(2, Sign::MinusNegativePower).unwrap();
        assert!(shoot_grid(&sys, &[], 10.0, 1e-8, DEFAULT_WINDOW).is_empty());
    }
}
