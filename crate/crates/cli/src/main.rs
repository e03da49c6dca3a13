use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fgaudin_cli::{emit, load_config, run, Command, Format, Instance, RunOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    EllipticCheck,
    DescribeAlgebra,
    CommuteCheck,
    BetheSolve,
    EigenCheck,
    FullVerify,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fmt {
    Human,
    Jsonl,
    Csv,
}

/// Numerical certification of the elliptic face-type Gaudin model at the critical level.
#[derive(Debug, Parser)]
#[command(name = "fgaudin", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "human")]
    format: Fmt,
    /// Directory for report files; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `[run] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Check the eigenvector property at perturbed Bethe roots; the check is expected to fail.
    #[arg(long)]
    negative_control: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("fgaudin: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    let inst = match Instance::build(cfg) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("fgaudin: {e}");
            return ExitCode::from(2);
        }
    };
    let command = match cli.command {
        Cmd::EllipticCheck => Command::EllipticCheck,
        Cmd::DescribeAlgebra => Command::DescribeAlgebra,
        Cmd::CommuteCheck => Command::CommuteCheck,
        Cmd::BetheSolve => Command::BetheSolve,
        Cmd::EigenCheck => Command::EigenCheck,
        Cmd::FullVerify => Command::FullVerify,
    };
    if command.needs_bethe() && inst.bethe.is_none() {
        eprintln!("fgaudin: this command needs a [bethe] section in the configuration");
        return ExitCode::from(2);
    }
    let opts = RunOptions {
        negative_control: cli.negative_control,
    };
    let report = run(command, &inst, opts);
    let format = match cli.format {
        Fmt::Human => Format::Human,
        Fmt::Jsonl => Format::Jsonl,
        Fmt::Csv => Format::Csv,
    };
    if let Err(e) = emit(&report, format, cli.out.as_deref(), &inst.cfg.to_toml()) {
        eprintln!("fgaudin: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if report.verdict() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
