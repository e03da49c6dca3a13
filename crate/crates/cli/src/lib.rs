//! Configuration, orchestration and reporting for the `fgaudin` command-line tool.

pub mod checks;
pub mod complex;
pub mod config;
pub mod report;
pub mod run;

use std::fs;
use std::io::{self, Write};
use std::path::Path;

pub use complex::{format_complex, parse_complex, ComplexParseError, Cx};
pub use config::{load_config, load_config_str, parse_config, validate, ConfigError, ExperimentConfig};
pub use report::{Comparison, Record, Report};
pub use run::{run, Command, Instance, RunOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Jsonl,
    Csv,
}

/// Writes `report` to stdout, or into `out` as `report.{txt,jsonl,csv}` plus the CSV side tables.
/// The materialized configuration is echoed in human output and saved as `config.toml` under `out`.
pub fn emit(report: &Report, format: Format, out: Option<&Path>, config_toml: &str) -> io::Result<()> {
    let Some(dir) = out else {
        let stdout = io::stdout();
        let mut w = stdout.lock();
        match format {
            Format::Human => {
                writeln!(w, "# materialized configuration\n{config_toml}")?;
                report::write_human(report, &mut w)?;
            }
            Format::Jsonl => report::write_jsonl(report, &mut w)?,
            Format::Csv => report::write_records_csv(report, &mut w)?,
        }
        return w.flush();
    };
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), config_toml)?;
    match format {
        Format::Human => {
            let mut buf = Vec::new();
            report::write_human(report, &mut buf)?;
            fs::write(dir.join("report.txt"), buf)?;
        }
        Format::Jsonl => {
            let mut buf = Vec::new();
            report::write_jsonl(report, &mut buf)?;
            fs::write(dir.join("report.jsonl"), buf)?;
        }
        Format::Csv => {
            report::write_records_csv(report, fs::File::create(dir.join("report.csv"))?)?;
            if !report.sweep.is_empty() {
                report::write_sweep_csv(report, fs::File::create(dir.join("sweep.csv"))?)?;
            }
            if !report.table.is_empty() {
                report::write_table_csv(report, fs::File::create(dir.join("elliptic_table.csv"))?)?;
            }
        }
    }
    Ok(())
}
