//! Frozen reference values and the routine that regenerates them.

use crate::error::Result;
use crate::highprec::rational_string;
use crate::radial_calculus::{initial_data, normalized_solution, RadialExpr};
use serde::{Deserialize, Serialize};

/// Significant digits of `a_N` stored in the table.
pub const SCALE_DIGITS: usize = 40;

/// Working precisions at which `a_N` is rendered; both must agree.
pub const SCALE_PRECISIONS: [u32; 2] = [256, 512];

pub struct GoldenRow {
    pub order: usize,
    pub curvature_constant: &'static str,
    pub scale: &'static str,
    /// `v_k(0) / a_N` for `k = 0..N`.
    pub origin_values: &'static [&'static str],
}

pub const GOLDEN_ROWS: [GoldenRow; 5] = [
    GoldenRow {
        order: 2,
        curvature_constant: "15",
        scale: "7.128343062413696263812715172823366953284e-1",
        origin_values: &["1", "-3"],
    },
    GoldenRow {
        order: 3,
        curvature_constant: "945",
        scale: "5.649985708594787212512955133927683385718e-1",
        origin_values: &["1", "-5", "-35"],
    },
    GoldenRow {
        order: 4,
        curvature_constant: "135135",
        scale: "4.778889730809794257352671680749868863720e-1",
        origin_values: &["1", "-7", "-63", "-2079"],
    },
    GoldenRow {
        order: 5,
        curvature_constant: "34459425",
        scale: "4.198890979193979596144749408861114734267e-1",
        origin_values: &["1", "-9", "-99", "-3861", "-289575"],
    },
    GoldenRow {
        order: 6,
        curvature_constant: "13749310575",
        scale: "3.780694872102487302357660895269769165752e-1",
        origin_values: &["1", "-11", "-143", "-6435", "-546975", "-72747675"],
    },
];

pub fn golden_row(order: usize) -> Option<&'static GoldenRow> {
    GOLDEN_ROWS.iter().find(|g| g.order == order)
}

/// Tolerances at which the fate tables were produced.
pub const FATE_TOLERANCES: [f64; 2] = [1e-8, 1e-10];
pub const FATE_R_MAX: f64 = 50.0;
pub const FATE_WINDOW: f64 = 10.0;

/// Fates of the `σ = -1`, `N = 2` grid `v_1(0) = -5, -4.5, …, -0.5`.
pub const MINUS_GRID_FATES: [&str; 10] = ["superlinear"; 10];

/// Fates of the `σ = +1`, `N = 2` perturbation grid, one per relative perturbation.
pub const PLUS_GRID_FATES: [&str; 7] = [
    "sign_event",
    "sign_event",
    "sign_event",
    "linear_growth",
    "superlinear",
    "superlinear",
    "superlinear",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub order: usize,
    pub dimension: i64,
    pub curvature_constant: String,
    pub scale_256: String,
    pub scale_512: String,
    pub origin_values: Vec<String>,
    pub initial_data: Vec<f64>,
}

/// Recomputes one row from scratch.
pub fn table_entry(order: usize) -> Result<TableEntry> {
    let lo = normalized_solution(order, SCALE_PRECISIONS[0])?;
    let hi = normalized_solution(order, SCALE_PRECISIONS[1])?;
    let n = lo.dimension();
    let base = RadialExpr::base_power(1);
    let origin_values = (0..order as u32)
        .map(|k| Ok(rational_string(&base.polylaplacian(n, k)?.value_at_origin())))
        .collect::<Result<Vec<_>>>()?;
    Ok(TableEntry {
        order,
        dimension: n,
        curvature_constant: rational_string(lo.curvature_constant()),
        scale_256: lo.scale_precise().to_decimal(SCALE_DIGITS),
        scale_512: hi.scale_precise().to_decimal(SCALE_DIGITS),
        origin_values,
        initial_data: initial_data(order)?,
    })
}

pub fn regenerate_table(orders: impl IntoIterator<Item = usize>) -> Result<Vec<TableEntry>> {
    orders.into_iter().map(table_entry).collect()
}

/// Differences between a regenerated row and the frozen one.
pub fn compare_with_golden(entry: &TableEntry) -> Vec<String> {
    let Some(g) = golden_row(entry.order) else {
        return vec![format!("no frozen row for N = {}", entry.order)];
    };
    let mut out = Vec::new();
    if entry.curvature_constant != g.curvature_constant {
        out.push(format!("K_{}: {} vs frozen {}", g.order, entry.curvature_constant, g.curvature_constant));
    }
    if entry.scale_256 != entry.scale_512 {
        out.push(format!("a_{}: {} bits and {} bits disagree", g.order, SCALE_PRECISIONS[0], SCALE_PRECISIONS[1]));
    }
    if entry.scale_256 != g.scale {
        out.push(format!("a_{}: {} vs frozen {}", g.order, entry.scale_256, g.scale));
    }
    if entry.origin_values.iter().map(String::as_str).ne(g.origin_values.iter().copied()) {
        out.push(format!("v_k(0)/a for N = {}: {:?} vs frozen {:?}", g.order, entry.origin_values, g.origin_values));
    }
    out
}

pub fn render_table(entries: &[TableEntry]) -> String {
    let mut s = String::new();
    for e in entries {
        s.push_str(&format!("N = {} (n = {})\n", e.order, e.dimension));
        s.push_str(&format!("  K_N          = {}\n", e.curvature_constant));
        s.push_str(&format!("  a_N [{:>3} b] = {}\n", SCALE_PRECISIONS[0], e.scale_256));
        s.push_str(&format!("  a_N [{:>3} b] = {}\n", SCALE_PRECISIONS[1], e.scale_512));
        s.push_str(&format!("  v_k(0)/a_N   = [{}]\n", e.origin_values.join(", ")));
        let init: Vec<String> = e.initial_data.iter().map(|x| format!("{x:e}")).collect();
        s.push_str(&format!("  initial data = [{}]\n", init.join(", ")));
    }
    s
}
