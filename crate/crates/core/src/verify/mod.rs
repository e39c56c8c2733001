//! Verification suites, reports and the coverage matrix.

mod emit;
mod suites;

pub use emit::{emit_report, write_report, Format};

use crate::error::{Error, Result};
use crate::exact_constants::{adjudicate_mode, constant_chain, flux_check, ConstantMode, ExactScalar, ExactScalarJson};
use crate::highprec::rational_string;
use crate::radial_calculus::normalized_solution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Symbolic,
    Constants,
    Representation,
    Decay,
    MeanValue,
    Jensen,
    OdeReproduction,
    NonexistenceScan,
    All,
}

impl Suite {
    /// Execution order of the concrete suites.
    pub const CONCRETE: [Suite; 8] = [
        Suite::Symbolic,
        Suite::Constants,
        Suite::Representation,
        Suite::Decay,
        Suite::MeanValue,
        Suite::Jensen,
        Suite::OdeReproduction,
        Suite::NonexistenceScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Symbolic => "symbolic",
            Suite::Constants => "constants",
            Suite::Representation => "representation",
            Suite::Decay => "decay",
            Suite::MeanValue => "mean_value",
            Suite::Jensen => "jensen",
            Suite::OdeReproduction => "ode_reproduction",
            Suite::NonexistenceScan => "nonexistence_scan",
            Suite::All => "all",
        }
    }

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::CONCRETE.to_vec(),
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        let suite = match key.as_str() {
            "symbolic" => Suite::Symbolic,
            "constants" => Suite::Constants,
            "representation" => Suite::Representation,
            "decay" => Suite::Decay,
            "meanvalue" => Suite::MeanValue,
            "jensen" => Suite::Jensen,
            "odereproduction" | "ode" => Suite::OdeReproduction,
            "nonexistencescan" | "nonexistence" => Suite::NonexistenceScan,
            "all" => Suite::All,
            _ => return Err(Error::domain(format!("unknown suite '{s}'"))),
        };
        Ok(suite)
    }
}

/// How the constant chain for the representation suite is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSelection {
    /// The mode with unit flux.
    Auto,
    Paper,
    Corrected,
}

impl FromStr for ConstantSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(ConstantSelection::Auto),
            "paper" | "paper_literal" => Ok(ConstantSelection::Paper),
            "corrected" => Ok(ConstantSelection::Corrected),
            _ => Err(Error::domain(format!("unknown constant mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub order: usize,
    pub tol: f64,
    pub truncation_radius: f64,
    pub precision: u32,
    pub constants: ConstantSelection,
    pub radii: Vec<f64>,
}

impl VerifyConfig {
    pub const DEFAULT_RADII: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 5.0];
    /// Largest `N` run without a runtime warning.
    pub const ORDER_CAP: usize = 6;

    pub fn new(order: usize) -> Self {
        VerifyConfig {
            order,
            tol: 1e-6,
            truncation_radius: 200.0,
            precision: 128,
            constants: ConstantSelection::Auto,
            radii: Self::DEFAULT_RADII.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::domain(format!("N must be at least 2, got {}", self.order)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::domain(format!("tolerance must lie in (0, 1), got {}", self.tol)));
        }
        if !(self.truncation_radius > 0.0 && self.truncation_radius.is_finite()) {
            return Err(Error::domain(format!("truncation radius must be positive, got {}", self.truncation_radius)));
        }
        if self.precision < 53 {
            return Err(Error::domain(format!("precision must be at least 53 bits, got {}", self.precision)));
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::domain("sample radii must be a non-empty list of finite non-negative numbers"));
        }
        Ok(())
    }

    /// Decimal digits carried by exact renderings.
    pub fn digits(&self) -> usize {
        ((self.precision as f64) * std::f64::consts::LOG10_2).floor() as usize
    }

    /// Tolerance applied to numerical checks.
    pub fn check_tolerance(&self) -> f64 {
        10.0 * self.tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        })
    }
}

/// A measured or expected value: a real number or an exact rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Measure {
    Real(f64),
    Exact(String),
}

impl Measure {
    fn real(x: f64) -> Self {
        if x.is_finite() {
            Measure::Real(x)
        } else {
            Measure::Exact(x.to_string())
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Real(x) => write!(f, "{x:e}"),
            Measure::Exact(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub paper_ref: String,
    pub status: Status,
    pub measured: Measure,
    pub expected: Measure,
    pub tolerance: f64,
    pub notes: String,
}

impl CheckResult {
    /// Passes iff `|measured - expected| ≤ tolerance`.
    pub fn numeric(id: impl Into<String>, anchor: &str, measured: f64, expected: f64, tolerance: f64, notes: impl Into<String>) -> Self {
        let ok = (measured - expected).abs() <= tolerance;
        CheckResult {
            id: id.into(),
            paper_ref: anchor.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured: Measure::real(measured),
            expected: Measure::real(expected),
            tolerance,
            notes: notes.into(),
        }
    }

    /// Numeric check with tolerance `rel · |expected|`.
    pub fn relative(id: impl Into<String>, anchor: &str, measured: f64, expected: f64, rel: f64, notes: impl Into<String>) -> Self {
        Self::numeric(id, anchor, measured, expected, rel * expected.abs(), notes)
    }

    /// Number of violated sample conditions, which must be zero.
    pub fn violations(id: impl Into<String>, anchor: &str, count: usize, notes: impl Into<String>) -> Self {
        Self::numeric(id, anchor, count as f64, 0.0, 0.0, notes)
    }

    /// Passes iff the renderings are identical.
    pub fn exact(id: impl Into<String>, anchor: &str, measured: String, expected: String, notes: impl Into<String>) -> Self {
        CheckResult {
            id: id.into(),
            paper_ref: anchor.into(),
            status: if measured == expected { Status::Pass } else { Status::Fail },
            measured: Measure::Exact(measured),
            expected: Measure::Exact(expected),
            tolerance: 0.0,
            notes: notes.into(),
        }
    }

    pub fn failed(id: impl Into<String>, anchor: &str, err: &Error) -> Self {
        CheckResult {
            id: id.into(),
            paper_ref: anchor.into(),
            status: Status::Fail,
            measured: Measure::Exact("error".into()),
            expected: Measure::Exact("value".into()),
            tolerance: 0.0,
            notes: err.to_string(),
        }
    }

    pub fn skipped(id: impl Into<String>, anchor: &str, reason: impl Into<String>) -> Self {
        CheckResult {
            id: id.into(),
            paper_ref: anchor.into(),
            status: Status::Skipped,
            measured: Measure::Exact("-".into()),
            expected: Measure::Exact("-".into()),
            tolerance: 0.0,
            notes: reason.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub status: Status,
    pub checks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxRecord {
    pub mode: ConstantMode,
    pub flux: ExactScalarJson,
    pub unit_flux: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub mode: ConstantMode,
    pub constants: Vec<ExactScalarJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub anchor: String,
    pub description: String,
    pub checks: Vec<String>,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub order: usize,
    pub dimension: i64,
    pub suites: Vec<SuiteOutcome>,
    pub constant_selection: ConstantSelection,
    pub constant_mode: ConstantMode,
    pub flux: Vec<FluxRecord>,
    pub chains: Vec<ChainRecord>,
    pub curvature_constant: String,
    pub scale: String,
    pub normalization: String,
    pub gamma_estimate: Option<f64>,
    pub alpha_from_mass: Option<f64>,
    pub checks: Vec<CheckResult>,
    /// Results that do not decide the outcome: the other constant mode,
    /// literal variants of corrected identities, and fate content.
    pub informational: Vec<CheckResult>,
    pub coverage: Vec<CoverageEntry>,
    pub config: VerifyConfig,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn check(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().chain(&self.informational).find(|c| c.id == id)
    }
}

/// Anchors of the verified statements with their descriptions.
pub const ANCHORS: [(&str, &str); 20] = [
    ("target-equations", "the two equations (-Δ)^N u ± u^{-(4N-1)} = 0 in R^{2N-1}"),
    ("solution-family", "u = (1+|x|²)^{1/2} solves the + equation up to dilation"),
    ("sphere-area", "ω_n = 2π^{n/2}/Γ(n/2)"),
    ("constants-ledger", "the Riesz-kernel constants c_0 … c_{N-1} and their recursion"),
    ("green-normalization", "-c_{N-1}|x|^{-(2N-3)} as fundamental solution of Δ"),
    ("jensen", "(⨍ f)^{-q} ≤ ⨍ f^{-q} for positive f"),
    ("sub-polyharmonic-signs", "(-Δ)^k u < 0 for 1 ≤ k ≤ N-1"),
    ("barrier-inequality", "r w' + (n-2m) w ≤ 0 and r w'' + 2 w' ≥ 0"),
    ("average-convexity", "ū'' ≥ 0"),
    ("second-derivative-monotonicity", "r (r^{2N-2} ū')' ≥ (2N-2) r^{2N-2} ū'"),
    ("decay-limits", "(-Δ)^k ū(r) → 0 as r → ∞"),
    ("positive-growth-rate", "u(x)/|x| → α > 0"),
    ("representation-chain", "(-Δ)^k u as Riesz potentials of u^{-(4N-1)}"),
    ("representation-u", "u = c_0 ∫ |x-y| u^{-(4N-1)} dy + γ"),
    ("pohozaev", "x·∇u = c_0 ∫ x·∇_x|x-y| u^{-(4N-1)} dy"),
    ("gamma-vanishes", "the additive constant γ is zero"),
    ("mass-growth", "c_0 ∫ u^{-(4N-1)} equals the growth rate α"),
    ("sign-conflict", "no entire solution of the - equation with linear growth and constant signs"),
    ("nested-mean-value", "three-fold spherical mean-value identity"),
    ("reciprocal-identity", "Δ(1/u) = -Δu/u² + 2|∇u|²/u³"),
];

fn coverage(checks: &[CheckResult], informational: &[CheckResult]) -> Vec<CoverageEntry> {
    ANCHORS
        .iter()
        .map(|(anchor, description)| {
            let ids: Vec<String> = checks
                .iter()
                .chain(informational)
                .filter(|c| c.paper_ref == *anchor && c.status != Status::Skipped)
                .map(|c| c.id.clone())
                .collect();
            CoverageEntry {
                anchor: anchor.to_string(),
                description: description.to_string(),
                covered: !ids.is_empty(),
                checks: ids,
            }
        })
        .collect()
}

/// Output of one concrete suite.
#[derive(Debug, Default)]
struct SuiteOutput {
    checks: Vec<CheckResult>,
    informational: Vec<CheckResult>,
    gamma_estimate: Option<f64>,
    alpha_from_mass: Option<f64>,
}

/// Resolved inputs shared by all suites.
struct Context {
    config: VerifyConfig,
    mode: ConstantMode,
}

fn selected_mode(config: &VerifyConfig) -> Result<ConstantMode> {
    match config.constants {
        ConstantSelection::Auto => adjudicate_mode(config.order),
        ConstantSelection::Paper => Ok(ConstantMode::PaperLiteral),
        ConstantSelection::Corrected => Ok(ConstantMode::Corrected),
    }
}

fn run_one(suite: Suite, ctx: &Context) -> SuiteOutput {
    match suite {
        Suite::Symbolic => suites::symbolic(ctx),
        Suite::Constants => suites::constants(ctx),
        Suite::Representation => suites::representation(ctx),
        Suite::Decay => suites::decay(ctx),
        Suite::MeanValue => suites::mean_value(ctx),
        Suite::Jensen => suites::jensen(ctx),
        Suite::OdeReproduction => suites::ode_reproduction(ctx),
        Suite::NonexistenceScan => suites::nonexistence_scan(ctx),
        Suite::All => unreachable!("expanded before dispatch"),
    }
}

/// Runs a suite (or all of them) for `config.order`. Configuration errors are
/// returned; failures inside checks are recorded as failed checks.
pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Result<VerificationReport> {
    config.validate()?;
    let order = config.order;
    let mode = selected_mode(config)?;
    let ctx = Context { config: config.clone(), mode };
    let suites = suite.expand();
    let outputs: Vec<SuiteOutput> = suites.par_iter().map(|s| run_one(*s, &ctx)).collect();

    let digits = config.digits();
    let mut flux = Vec::new();
    let mut chains = Vec::new();
    for m in ConstantMode::ALL {
        let f = flux_check(order, m)?;
        flux.push(FluxRecord { mode: m, unit_flux: f == ExactScalar::one(), flux: f.to_json(digits) });
        let chain = constant_chain(order, m)?;
        chains.push(ChainRecord { mode: m, constants: chain.constants().iter().map(|c| c.to_json(digits)).collect() });
    }
    let sol = normalized_solution(order, config.precision)?;

    let mut report = VerificationReport {
        schema_version: SCHEMA_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        order,
        dimension: sol.dimension(),
        suites: Vec::new(),
        constant_selection: config.constants,
        constant_mode: mode,
        flux,
        chains,
        curvature_constant: rational_string(sol.curvature_constant()),
        scale: sol.scale_precise().to_decimal(digits),
        normalization: "u = a (1+r²)^{1/2} with K_N a^{4N} = 1".into(),
        gamma_estimate: None,
        alpha_from_mass: None,
        checks: Vec::new(),
        informational: Vec::new(),
        coverage: Vec::new(),
        config: config.clone(),
    };
    for (s, out) in suites.iter().zip(outputs) {
        let status = if out.checks.iter().any(|c| c.status == Status::Fail) {
            Status::Fail
        } else if !out.checks.is_empty() && out.checks.iter().all(|c| c.status == Status::Skipped) {
            Status::Skipped
        } else {
            Status::Pass
        };
        report.suites.push(SuiteOutcome { suite: *s, status, checks: out.checks.len() });
        report.gamma_estimate = report.gamma_estimate.or(out.gamma_estimate);
        report.alpha_from_mass = report.alpha_from_mass.or(out.alpha_from_mass);
        report.checks.extend(out.checks);
        report.informational.extend(out.informational);
    }
    report.coverage = coverage(&report.checks, &report.informational);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for s in Suite::CONCRETE.iter().chain([&Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), *s);
        }
        assert_eq!("mean-value".parse::<Suite>().unwrap(), Suite::MeanValue);
        assert_eq!("NonexistenceScan".parse::<Suite>().unwrap(), Suite::NonexistenceScan);
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(VerifyConfig::new(2).validate().is_ok());
        assert!(VerifyConfig::new(1).validate().is_err());
        let mut c = VerifyConfig::new(2);
        c.tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = VerifyConfig::new(2);
        c.radii = vec![-1.0];
        assert!(c.validate().is_err());
        let mut c = VerifyConfig::new(2);
        c.precision = 32;
        assert!(c.validate().is_err());
    }

    #[test]
    fn check_status_follows_tolerance() {
        assert_eq!(CheckResult::numeric("a", "x", 1.0, 1.0 + 1e-7, 1e-6, "").status, Status::Pass);
        assert_eq!(CheckResult::numeric("a", "x", 1.0, 1.1, 1e-6, "").status, Status::Fail);
        assert_eq!(CheckResult::numeric("a", "x", f64::NAN, 1.0, 1e-6, "").status, Status::Fail);
        assert_eq!(CheckResult::relative("a", "x", 100.0, 100.0005, 1e-5, "").status, Status::Pass);
        assert_eq!(CheckResult::exact("a", "x", "15".into(), "15".into(), "").status, Status::Pass);
        assert_eq!(CheckResult::violations("a", "x", 1, "").status, Status::Fail);
    }

    #[test]
    fn non_finite_measures_stay_serializable() {
        let c = CheckResult::numeric("a", "x", f64::INFINITY, 1.0, 1e-6, "");
        let json = serde_json::to_string(&c).unwrap();
        let back: CheckResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn symbolic_suite_for_n2() {
        let r = run_suite(Suite::Symbolic, &VerifyConfig::new(2)).unwrap();
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.curvature_constant, "15");
        assert!(r.gamma_estimate.is_none());
    }

    #[test]
    fn constants_suite_records_both_modes() {
        let r = run_suite(Suite::Constants, &VerifyConfig::new(3)).unwrap();
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.constant_mode, ConstantMode::Corrected);
        let unit: Vec<bool> = r.flux.iter().map(|f| f.unit_flux).collect();
        assert_eq!(unit, vec![false, true]);
        assert_eq!(r.flux[0].flux.coeff_num, "3");
    }

    #[test]
    fn forced_mode_is_respected() {
        let mut c = VerifyConfig::new(3);
        c.constants = ConstantSelection::Paper;
        let r = run_suite(Suite::Constants, &c).unwrap();
        assert_eq!(r.constant_mode, ConstantMode::PaperLiteral);
    }
}
