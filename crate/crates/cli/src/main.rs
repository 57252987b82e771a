use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fqrig_cli::{cmd_analyze, cmd_experiment, cmd_extract, cmd_gen, cmd_verify, read, CliError, ExtractArgs, GenArgs};

#[derive(Parser)]
#[command(name = "fqrig", version, about = "Point-sphere incidence rigidity over F_q^d")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a configuration from a spec file and/or flags.
    Gen {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// uniform-random, hyperplane-planted, quadric-planted or reflected-pairs
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        np: Option<usize>,
        #[arg(long)]
        ns: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Incidence count, energies, K and the dyadic layer histogram.
    Analyze {
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Extract a certificate.
    Extract {
        config: PathBuf,
        /// Persistence constant, e.g. 1/4 or 0.25
        #[arg(long)]
        c_const: Option<String>,
        /// Flat-concentration threshold (default max(2d, ceil K))
        #[arg(long)]
        b0: Option<u64>,
        /// Fixed richness threshold, replacing the computed one
        #[arg(long)]
        lambda: Option<u64>,
        /// Drop the 2|P|/q and d+1 richness floors
        #[arg(long)]
        no_floor: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate; exit 1 if any check fails.
    Verify { config: PathBuf, certificate: PathBuf },
    /// Run a JSON grid and write CSV rows.
    Experiment {
        grid: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn emit(text: String, out: Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(&p, text + "\n").map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Gen {
            spec,
            kind,
            q,
            d,
            np,
            ns,
            seed,
            noise,
            out,
        } => {
            let spec = spec.map(|p| read(&p)).transpose()?;
            let args = GenArgs {
                spec,
                kind,
                q,
                d,
                np,
                ns,
                seed,
                noise,
            };
            emit(cmd_gen(&args)?, out)
        }
        Cmd::Analyze { config, out } => emit(cmd_analyze(&config)?, out),
        Cmd::Extract {
            config,
            c_const,
            b0,
            lambda,
            no_floor,
            out,
        } => {
            let args = ExtractArgs {
                c_const,
                b0,
                lambda,
                no_floor,
            };
            emit(cmd_extract(&config, &args)?, out)
        }
        Cmd::Verify { config, certificate } => {
            println!("{}", cmd_verify(&config, &certificate)?);
            Ok(())
        }
        Cmd::Experiment { grid, out } => {
            let csv = cmd_experiment(&grid)?;
            emit(csv.trim_end().to_string(), out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
