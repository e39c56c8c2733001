use super::{Status, VerificationReport};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "txt" => Ok(Format::Text),
            _ => Err(Error::domain(format!("unknown format '{s}'"))),
        }
    }
}

/// Serializes a report. Identical reports give identical bytes.
pub fn emit_report(report: &VerificationReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).map_err(|e| Error::Internal(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::Internal(e.to_string());
            w.write_record(["id", "paper_ref", "status", "measured", "expected", "tolerance"]).map_err(csv_err)?;
            for c in &report.checks {
                w.write_record([
                    c.id.clone(),
                    c.paper_ref.clone(),
                    c.status.to_string(),
                    c.measured.to_string(),
                    c.expected.to_string(),
                    format!("{:e}", c.tolerance),
                ])
                .map_err(csv_err)?;
            }
            w.into_inner().map_err(|e| Error::Internal(e.to_string()))
        }
        Format::Text => Ok(render_text(report).into_bytes()),
    }
}

fn render_text(report: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "polyharmonic {} report, N = {} (dimension {})", report.toolkit_version, report.order, report.dimension);
    let _ = writeln!(s, "K_N = {}, a = {}", report.curvature_constant, report.scale);
    let _ = writeln!(s, "constant mode: {} ({:?})", report.constant_mode.name(), report.constant_selection);
    for f in &report.flux {
        let mut value = f.flux.coeff_num.clone();
        if f.flux.coeff_den != "1" {
            let _ = write!(value, "/{}", f.flux.coeff_den);
        }
        if f.flux.half_pi_exp != 0 {
            let _ = write!(value, "·π^({}/2)", f.flux.half_pi_exp);
        }
        let _ = writeln!(s, "  flux[{}] = {value}", f.mode.name());
    }
    if let Some(g) = report.gamma_estimate {
        let _ = writeln!(s, "gamma estimate: {g:e}");
    }
    if let Some(a) = report.alpha_from_mass {
        let _ = writeln!(s, "alpha from mass: {a:e}");
    }
    for outcome in &report.suites {
        let _ = writeln!(s, "\n[{}] {} ({} checks)", outcome.suite, outcome.status, outcome.checks);
        for c in report.checks.iter().filter(|c| c.id.starts_with(prefix(outcome.suite))) {
            let _ = writeln!(s, "  {:<7} {}  measured {}  expected {}  tol {:e}", c.status.to_string(), c.id, c.measured, c.expected, c.tolerance);
        }
    }
    if !report.informational.is_empty() {
        let _ = writeln!(s, "\ninformational:");
        for c in &report.informational {
            let _ = writeln!(s, "  {:<7} {}  measured {}  expected {}", c.status.to_string(), c.id, c.measured, c.expected);
        }
    }
    let uncovered: Vec<&str> = report.coverage.iter().filter(|c| !c.covered).map(|c| c.anchor.as_str()).collect();
    let _ = writeln!(s, "\ncoverage: {}/{} anchors", report.coverage.len() - uncovered.len(), report.coverage.len());
    if !uncovered.is_empty() {
        let _ = writeln!(s, "  not touched: {}", uncovered.join(", "));
    }
    let verdict = if report.passed() { Status::Pass } else { Status::Fail };
    let _ = writeln!(s, "\nresult: {verdict}");
    s
}

fn prefix(suite: super::Suite) -> &'static str {
    use super::Suite::*;
    match suite {
        Symbolic => "symbolic.",
        Constants => "constants.",
        Representation => "representation.",
        Decay => "decay.",
        MeanValue => "mean_value.",
        Jensen => "jensen.",
        OdeReproduction => "ode.",
        NonexistenceScan => "nonexistence.",
        All => "",
    }
}

/// Writes the serialized report to `path`.
pub fn write_report(report: &VerificationReport, format: Format, path: &Path) -> Result<()> {
    let bytes = emit_report(report, format)?;
    std::fs::write(path, bytes).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{run_suite, Suite, VerifyConfig};

    fn report() -> VerificationReport {
        run_suite(Suite::Symbolic, &VerifyConfig::new(2)).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let r = report();
        let bytes = emit_report(&r, Format::Json).unwrap();
        let back: VerificationReport = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn identical_reports_give_identical_bytes() {
        for f in [Format::Json, Format::Csv, Format::Text] {
            assert_eq!(emit_report(&report(), f).unwrap(), emit_report(&report(), f).unwrap());
        }
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let r = report();
        let bytes = emit_report(&r, Format::Csv).unwrap();
        let mut rd = csv::Reader::from_reader(bytes.as_slice());
        let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(header, ["id", "paper_ref", "status", "measured", "expected", "tolerance"]);
        assert_eq!(rd.records().count(), r.checks.len());
        assert_eq!(String::from_utf8(bytes).unwrap().lines().count(), r.checks.len() + 1);
    }

    #[test]
    fn unwritable_destination_names_the_path() {
        let err = write_report(&report(), Format::Json, Path::new("/nonexistent-dir/report.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/report.json"));
    }

    #[test]
    fn format_names_parse() {
        assert_eq!("JSON".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }
}
