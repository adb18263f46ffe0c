//! Report writers. JSON is pretty-printed; CSV uses `.` decimals and exact
//! rationals as `p/q`.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::ValueEnum;
use gaugecalc_core::derivates::{DerivateEstimate, FourDerivates};
use gaugecalc_core::funcmodel::cantor::{format_rational, ratio};
use gaugecalc_core::{CantorScheme, CheckReport, DerivativeEstimate, TaggedPartition};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
pub struct DerivateRow {
    pub x: f64,
    pub r: f64,
    pub derivative: DerivativeEstimate,
    pub derivates: FourDerivates,
}

#[derive(Serialize)]
pub struct PartitionSummary {
    pub items: usize,
    pub nonoverlap: bool,
    pub tiles: bool,
    pub domain: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fine: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub riemann_sum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ac_sum: Option<f64>,
}

#[derive(Serialize)]
struct SchemeRow {
    n: u32,
    level_length: String,
    gap_length: String,
    plateau_length: String,
    scaled_level_length: String,
    measure: String,
}

/// Destination and format of one report.
pub struct Sink {
    out: Option<PathBuf>,
    format: Format,
}

impl Sink {
    pub fn new(out: Option<PathBuf>, format: Format) -> Self {
        Self { out, format }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()?;
                Ok(())
            }
        }
    }

    fn json(&self, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.emit(&text)
    }

    fn csv<R: Serialize>(&self, rows: impl IntoIterator<Item = R>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row)?;
        }
        self.emit(std::str::from_utf8(&w.into_inner()?)?)
    }

    pub fn report(&self, report: &CheckReport) -> Result<()> {
        match self.format {
            Format::Json => self.emit(&(report.to_json() + "\n")),
            Format::Csv => self.emit(&report.to_csv()),
        }
    }

    pub fn partition(&self, p: &TaggedPartition) -> Result<()> {
        match self.format {
            Format::Json => self.emit(&(p.to_json() + "\n")),
            Format::Csv => self.csv(p.items()),
        }
    }

    pub fn partition_summary(&self, s: &PartitionSummary) -> Result<()> {
        match self.format {
            Format::Json => self.json(s),
            Format::Csv => {
                let mut rows = vec![
                    ("items".to_string(), s.items.to_string()),
                    ("nonoverlap".into(), s.nonoverlap.to_string()),
                    ("tiles".into(), s.tiles.to_string()),
                    ("domain".into(), format!("{} {}", s.domain[0], s.domain[1])),
                ];
                rows.extend(s.fine.map(|v| ("fine".into(), v.to_string())));
                rows.extend(s.riemann_sum.map(|v| ("riemann_sum".into(), v.to_string())));
                rows.extend(s.ac_sum.map(|v| ("ac_sum".into(), v.to_string())));
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["key", "value"])?;
                for (k, v) in rows {
                    w.write_record([k, v])?;
                }
                self.emit(std::str::from_utf8(&w.into_inner()?)?)
            }
        }
    }

    pub fn derivates(&self, rows: &[DerivateRow]) -> Result<()> {
        match self.format {
            Format::Json => self.json(&rows),
            Format::Csv => {
                let cell = |e: &Option<DerivateEstimate>| {
                    e.as_ref().map(|e| e.value.to_string()).unwrap_or_default()
                };
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record([
                    "x",
                    "r",
                    "derivative",
                    "side",
                    "verdict",
                    "trend_slope",
                    "upper_right",
                    "lower_right",
                    "upper_left",
                    "lower_left",
                    "agree",
                ])?;
                for row in rows {
                    let d = &row.derivative;
                    let four = &row.derivates;
                    w.write_record([
                        row.x.to_string(),
                        row.r.to_string(),
                        d.value.to_string(),
                        serde_json::to_value(d.side)?.as_str().unwrap_or_default().to_string(),
                        serde_json::to_value(d.verdict)?.as_str().unwrap_or_default().to_string(),
                        d.trend_slope.map(|s| s.to_string()).unwrap_or_default(),
                        cell(&four.upper_right),
                        cell(&four.lower_right),
                        cell(&four.upper_left),
                        cell(&four.lower_left),
                        four.agree.to_string(),
                    ])?;
                }
                self.emit(std::str::from_utf8(&w.into_inner()?)?)
            }
        }
    }

    /// Levels `levels` of the scheme as exact rationals.
    pub fn scheme_table(&self, scheme: &CantorScheme, levels: std::ops::Range<u32>) -> Result<()> {
        let rows: Vec<SchemeRow> = levels
            .map(|n| {
                let len = scheme.level_length(n);
                let scaled = BigRational::from_integer(BigInt::from(2u8).pow(n)) * &len;
                let measure = ratio(1, 2) + ratio(1, i64::from(n) + 2);
                SchemeRow {
                    n,
                    level_length: format_rational(&len),
                    gap_length: format_rational(&scheme.gap_length(n)),
                    plateau_length: format_rational(&scheme.plateau_length(n)),
                    scaled_level_length: format_rational(&scaled),
                    measure: format_rational(&measure),
                }
            })
            .collect();
        match self.format {
            Format::Json => self.json(&rows),
            Format::Csv => self.csv(rows),
        }
    }
}
