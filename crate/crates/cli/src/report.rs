//! Check records and their human, JSON-lines and CSV renderings.

use std::io::{self, Write};

use serde::Serialize;

/// How the residual is compared with the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Pass when `residual ≤ tolerance`.
    AtMost,
    /// Pass when `residual > tolerance` (negative controls).
    Above,
    /// No numeric criterion.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub instance: String,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub comparison: Comparison,
    pub pass: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
    /// Excluded from machine-readable output so reports stay byte-stable.
    #[serde(skip)]
    pub wall_ms: f64,
}

impl Record {
    pub fn measured(name: &str, instance: &str, residual: f64, tolerance: f64, cmp: Comparison) -> Self {
        let pass = match cmp {
            Comparison::AtMost => residual <= tolerance,
            Comparison::Above => residual > tolerance,
            Comparison::Info => true,
        };
        Self {
            name: name.to_string(),
            instance: instance.to_string(),
            residual: Some(residual),
            tolerance: Some(tolerance),
            comparison: cmp,
            pass,
            detail: String::new(),
            data: None,
            wall_ms: 0.0,
        }
    }

    pub fn info(name: &str, instance: &str, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            instance: instance.to_string(),
            residual: None,
            tolerance: None,
            comparison: Comparison::Info,
            pass: true,
            detail: detail.into(),
            data: None,
            wall_ms: 0.0,
        }
    }

    pub fn error(name: &str, instance: &str, err: impl std::fmt::Display) -> Self {
        Self {
            pass: false,
            detail: format!("error: {err}"),
            ..Self::info(name, instance, "")
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn with_data(mut self, data: serde_json::Value) -> Self {
        self.data = Some(data);
        self
    }
}

/// One row of the `τ_Ψ(u)` sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub u_re: f64,
    pub u_im: f64,
    pub tau: Option<(f64, f64)>,
}

/// One row of the `(z, θ₁₁, ζ₁₁, w_c)` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub z: (f64, f64),
    pub theta: Option<(f64, f64)>,
    pub zeta: Option<(f64, f64)>,
    pub w: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub records: Vec<Record>,
    pub sweep: Vec<SweepRow>,
    pub table: Vec<TableRow>,
    /// Free text for the human rendering only.
    pub notes: Vec<String>,
}

impl Report {
    /// `false` iff some record failed.
    pub fn verdict(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    /// Orders records by name, independent of completion order.
    pub fn sort(&mut self) {
        self.records.sort_by(|a, b| a.name.cmp(&b.name));
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
        self.sweep.extend(other.sweep);
        self.table.extend(other.table);
        self.notes.extend(other.notes);
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

pub fn write_human<W: Write>(report: &Report, out: &mut W) -> io::Result<()> {
    for n in &report.notes {
        writeln!(out, "{n}")?;
    }
    if !report.notes.is_empty() {
        writeln!(out)?;
    }
    for r in &report.records {
        let status = if r.pass { "PASS" } else { "FAIL" };
        let cmp = match r.comparison {
            Comparison::AtMost => "<=",
            Comparison::Above => ">",
            Comparison::Info => "",
        };
        let num = match (r.residual, r.tolerance) {
            (Some(x), Some(t)) => format!("{x:.3e} {cmp} {t:.0e}"),
            _ => String::new(),
        };
        write!(out, "{status} {:<28} {num:<24} {:>9.1} ms", r.name, r.wall_ms)?;
        if r.detail.is_empty() {
            writeln!(out)?;
        } else {
            writeln!(out, "  {}", r.detail)?;
        }
    }
    writeln!(out, "overall: {}", if report.verdict() { "PASS" } else { "FAIL" })
}

pub fn write_jsonl<W: Write>(report: &Report, out: &mut W) -> io::Result<()> {
    for r in &report.records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_records_csv<W: Write>(report: &Report, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "instance", "residual", "tolerance", "comparison", "pass", "detail"])?;
    for r in &report.records {
        let cmp = match r.comparison {
            Comparison::AtMost => "at_most",
            Comparison::Above => "above",
            Comparison::Info => "info",
        };
        w.write_record([
            r.name.as_str(),
            r.instance.as_str(),
            &opt(r.residual),
            &opt(r.tolerance),
            cmp,
            if r.pass { "true" } else { "false" },
            r.detail.as_str(),
        ])?;
    }
    w.flush()
}

fn pair(v: Option<(f64, f64)>) -> [String; 2] {
    match v {
        Some((a, b)) => [format!("{a:e}"), format!("{b:e}")],
        None => [String::new(), String::new()],
    }
}

pub fn write_sweep_csv<W: Write>(report: &Report, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u_re", "u_im", "tau_psi_re", "tau_psi_im"])?;
    for r in &report.sweep {
        let [a, b] = pair(r.tau);
        w.write_record([format!("{:e}", r.u_re), format!("{:e}", r.u_im), a, b])?;
    }
    w.flush()
}

pub fn write_table_csv<W: Write>(report: &Report, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "z_re", "z_im", "theta_re", "theta_im", "zeta_re", "zeta_im", "w_re", "w_im",
    ])?;
    for r in &report.table {
        let [a, b] = pair(Some(r.z));
        let [c, d] = pair(r.theta);
        let [e, f] = pair(r.zeta);
        let [g, h] = pair(r.w);
        w.write_record([a, b, c, d, e, f, g, h])?;
    }
    w.flush()
}
