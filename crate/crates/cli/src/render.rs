//! Plain, csv and json output.
//!
//! Plain and csv values are rounded at display time only. Rust's `{:.N}`
//! formatting rounds the exact binary value half to even, so no extra
//! rounding step is applied here. Json carries every value at full
//! precision.

use occupancy_core::{MonteCarloEstimate, PValueTable};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Plain,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputFormat {
    pub kind: Format,
    pub decimals: usize,
}

impl OutputFormat {
    pub fn new(kind: Format, decimals: usize) -> Option<Self> {
        (1..=17)
            .contains(&decimals)
            .then_some(Self { kind, decimals })
    }
}

impl Default for OutputFormat {
    fn default() -> Self {
        Self {
            kind: Format::Plain,
            decimals: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonRow {
    pub m: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cdf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub monte_carlo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub balls: u64,
    pub cells: u64,
    pub method: String,
    pub rows: Vec<JsonRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub replications: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci_level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci_half_widths: Option<Vec<f64>>,
}

struct Column {
    name: &'static str,
    values: Vec<f64>,
}

fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // keep "-0.000000" out of the output
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn render_columns(ms: &[u64], columns: &[Column], fmt: OutputFormat) -> String {
    let d = fmt.decimals;
    let mut out = String::new();
    match fmt.kind {
        Format::Csv => {
            out.push('m');
            for c in columns {
                out.push(',');
                out.push_str(c.name);
            }
            out.push('\n');
            for (i, m) in ms.iter().enumerate() {
                out.push_str(&m.to_string());
                for c in columns {
                    out.push(',');
                    out.push_str(&fixed(c.values[i], d));
                }
                out.push('\n');
            }
        }
        Format::Plain | Format::Json => {
            let mw = ms
                .iter()
                .map(|m| m.to_string().len())
                .max()
                .unwrap_or(1)
                .max(1);
            let widths: Vec<usize> = columns
                .iter()
                .map(|c| {
                    c.values
                        .iter()
                        .map(|&v| fixed(v, d).len())
                        .max()
                        .unwrap_or(0)
                        .max(c.name.len())
                })
                .collect();
            out.push_str(&format!("{:>mw$}", "m"));
            for (c, w) in columns.iter().zip(&widths) {
                out.push_str(&format!("  {:>w$}", c.name));
            }
            out.push('\n');
            for (i, m) in ms.iter().enumerate() {
                out.push_str(&format!("{m:>mw$}"));
                for (c, w) in columns.iter().zip(&widths) {
                    out.push_str(&format!("  {:>w$}", fixed(c.values[i], d)));
                }
                out.push('\n');
            }
        }
    }
    out
}

fn to_json(report: &JsonReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn table_report(table: &PValueTable) -> JsonReport {
    JsonReport {
        balls: table.balls,
        cells: table.cells,
        method: table.method.to_string(),
        rows: table
            .rows
            .iter()
            .map(|row| JsonRow {
                m: row.m,
                cdf: Some(row.cdf),
                monte_carlo: None,
                p_value: Some(row.p_value),
            })
            .collect(),
        seed: None,
        replications: None,
        ci_level: None,
        ci_half_widths: None,
    }
}

/// Renders a table with columns m, CDF and P-value.
pub fn render_table(table: &PValueTable, fmt: OutputFormat) -> String {
    if fmt.kind == Format::Json {
        return to_json(&table_report(table));
    }
    let ms: Vec<u64> = table.rows.iter().map(|r| r.m).collect();
    let columns = [
        Column {
            name: "cdf",
            values: table.rows.iter().map(|r| r.cdf).collect(),
        },
        Column {
            name: "p_value",
            values: table.rows.iter().map(|r| r.p_value).collect(),
        },
    ];
    render_columns(&ms, &columns, fmt)
}

/// Renders a simulation beside the exact table for the same thresholds.
pub fn render_simulation(
    estimate: &MonteCarloEstimate,
    exact: &PValueTable,
    fmt: OutputFormat,
) -> String {
    assert_eq!(estimate.m_values.len(), exact.rows.len());
    if fmt.kind == Format::Json {
        let mut report = table_report(exact);
        for (row, &mc) in report.rows.iter_mut().zip(&estimate.empirical_cdf) {
            row.monte_carlo = Some(mc);
        }
        report.seed = Some(estimate.seed);
        report.replications = Some(estimate.replications);
        report.ci_level = Some(estimate.ci_level);
        report.ci_half_widths = Some(estimate.ci_half_widths.clone());
        return to_json(&report);
    }
    let columns = [
        Column {
            name: "cdf",
            values: exact.rows.iter().map(|r| r.cdf).collect(),
        },
        Column {
            name: "monte_carlo",
            values: estimate.empirical_cdf.clone(),
        },
        Column {
            name: "ci_half_width",
            values: estimate.ci_half_widths.clone(),
        },
        Column {
            name: "p_value",
            values: exact.rows.iter().map(|r| r.p_value).collect(),
        },
    ];
    let mut out = render_columns(&estimate.m_values, &columns, fmt);
    if fmt.kind == Format::Plain {
        out.push_str(&format!(
            "# {} replications, seed {}, {}% intervals\n",
            estimate.replications,
            estimate.seed,
            estimate.ci_level * 100.0
        ));
    }
    out
}

/// Renders one CDF or P-value.
pub fn render_single(
    balls: u64,
    cells: u64,
    method: &str,
    row: JsonRow,
    fmt: OutputFormat,
) -> String {
    let (name, value) = match (row.cdf, row.p_value) {
        (Some(v), _) => ("cdf", v),
        (None, Some(v)) => ("p_value", v),
        (None, None) => unreachable!("a single result carries a value"),
    };
    match fmt.kind {
        Format::Plain => format!("{}\n", fixed(value, fmt.decimals)),
        Format::Csv => format!("m,{name}\n{},{}\n", row.m, fixed(value, fmt.decimals)),
        Format::Json => to_json(&JsonReport {
            balls,
            cells,
            method: method.to_string(),
            rows: vec![row],
            seed: None,
            replications: None,
            ci_level: None,
            ci_half_widths: None,
        }),
    }
}
