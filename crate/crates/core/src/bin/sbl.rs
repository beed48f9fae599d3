use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use soapbubble::bubbling::FilterMode;
use soapbubble::experiments::{emit_report, run, Command, Scenario};
use soapbubble::Error;

#[derive(Parser)]
#[command(name = "sbl", version, about = "Curvature-deficit, torsion and bubbling analysis of implicit domains")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Grid spacing (after rescaling to R = 1).
    #[arg(long, global = true)]
    grid_h: Option<f64>,
    /// Ball filter: ledger constants or the R/2 split.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full pipeline on one domain.
    Analyze { config: PathBuf },
    /// Pipeline over a list of parameter values.
    Sweep { config: PathBuf },
    /// Closed-form annulus table.
    Annulus { config: PathBuf },
    /// Identity residuals only.
    Identity { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Paper,
    Empirical,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConfigParse(_) | Error::InvalidFamilyParams { .. } | Error::UnsupportedDimension { .. } | Error::Json(_) => 3,
        Error::BoundViolated { .. }
        | Error::InequalityViolated { .. }
        | Error::ContainmentViolation { .. }
        | Error::OverlapViolation { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("SBL_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            // Only fails if a pool already exists.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let (command, config) = match &cli.command {
        Cmd::Analyze { config } => (Command::Analyze, config),
        Cmd::Sweep { config } => (Command::Sweep, config),
        Cmd::Annulus { config } => (Command::Annulus, config),
        Cmd::Identity { config } => (Command::Identity, config),
    };
    let result = Scenario::load(config).and_then(|mut s| {
        if let Some(h) = cli.grid_h {
            s.options.grid_h = Some(h);
        }
        if let Some(m) = cli.mode {
            s.options.mode = match m {
                Mode::Paper => FilterMode::Paper,
                Mode::Empirical => FilterMode::Empirical,
            };
        }
        s.options.validate()?;
        let out = run(command, &s)?;
        emit_report(&out, &cli.out)?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            let violations = out.violations();
            for v in &violations {
                eprintln!("violation: {v}");
            }
            println!("wrote {}", cli.out.display());
            if violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
