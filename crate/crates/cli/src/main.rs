use std::path::PathBuf;
use std::process::ExitCode;

use calbund::{
    cmd_catalog, cmd_sample, cmd_verify, emit, load_surface, parse_box, parse_mode, CliError,
    Expect, RunConfig,
};
use calbund_core::constructions::ConstructionKind;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "calbund",
    version,
    about = "Verify and sample calibrated bundle constructions over surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the calibration condition on sampled tangent spaces and write a report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Base points sampled.
        #[arg(long)]
        samples: Option<usize>,
        /// Verdict tolerance; defaults to 1e-8 (jet) or 1e-5 (fd).
        #[arg(long)]
        tol: Option<f64>,
        /// Asserted verdict.
        #[arg(long, value_parser = Expect::parse)]
        expect: Option<Expect>,
    },
    /// Write points of the constructed submanifold as CSV.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Base grid points per parameter axis.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// List builtin surfaces and explicit maps.
    Catalog,
}

#[derive(Args, Debug)]
struct Common {
    /// A surface document, or `catalog:<name>` / `catalog:<name>(k=v,...)`.
    #[arg(long)]
    surface: String,
    #[arg(long, value_parser = parse_kind)]
    construction: ConstructionKind,
    /// Fibre coordinate range `a,b`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_box)]
    fibre_box: Option<[f64; 2]>,
    /// Fibre grid points per axis.
    #[arg(long)]
    fibre_points: Option<usize>,
    /// `jet` or `fd`.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<calbund_core::immersion::Mode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate samples on one thread.
    #[arg(long)]
    sequential: bool,
}

fn parse_kind(s: &str) -> Result<ConstructionKind, String> {
    s.parse::<ConstructionKind>().map_err(|e| e.to_string())
}

impl Common {
    fn config(self) -> (String, RunConfig) {
        let cfg = RunConfig {
            construction: Some(self.construction),
            fibre_box: self.fibre_box,
            fibre_points: self.fibre_points,
            mode: self.mode,
            seed: self.seed,
            out: self.out,
            sequential: self.sequential,
            ..RunConfig::default()
        };
        (self.surface, cfg)
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Verify {
            common,
            samples,
            tol,
            expect,
        } => {
            let (surface, mut cfg) = common.config();
            cfg.samples = samples;
            cfg.tol = tol;
            cfg.expect = expect;
            let doc = cmd_verify(&load_surface(&surface)?, &cfg)?;
            emit(&doc.to_toml(), cfg.out.as_ref())?;
            eprintln!(
                "{}: {} defect max {:.3e} (tol {:.0e}): {}",
                doc.surface.label,
                doc.report.construction,
                doc.report.defect.max,
                doc.report.tol,
                doc.outcome.status
            );
            Ok(doc.exit_code())
        }
        Command::Sample { common, grid } => {
            let (surface, mut cfg) = common.config();
            cfg.grid = grid;
            let csv = cmd_sample(&load_surface(&surface)?, &cfg)?;
            emit(&csv, cfg.out.as_ref())?;
            Ok(calbund::EXIT_OK)
        }
        Command::Catalog => {
            print!("{}", cmd_catalog());
            Ok(calbund::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
