use std::path::PathBuf;
use std::process::ExitCode;

use bl_duality::io::{parse_datum, run_command, Flags, Verb};
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Brascamp-Lieb constants on abelian groups, their duals, Euclidean
/// Gaussian optimization, and finite-table groups.
#[derive(Parser, Debug)]
#[command(name = "bldual", version)]
struct Cli {
    /// finiteness, constant, dual, verify-duality, fourier-check,
    /// euclid-optimize, euclid-verify, finite-constant, extremise, corpus
    verb: String,
    /// Datum file (JSON); not used by `corpus`.
    datum: Option<PathBuf>,
    /// Primes for the rank screen, comma separated.
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<u64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    /// Largest torsion subgroup or finite group order to enumerate.
    #[arg(long)]
    cap_torsion: Option<u64>,
    /// Largest free rank for the rank-condition scan.
    #[arg(long)]
    cap_rank: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Corpus size.
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Random trials for `fourier-check`.
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

fn run(cli: &Cli) -> Result<i32, String> {
    let verb: Verb = cli.verb.parse().map_err(|e| format!("{e}"))?;
    let parsed = match (&cli.datum, verb.needs_datum()) {
        (Some(path), true) => Some(parse_datum(path).map_err(|e| format!("{}: {e}", path.display()))?),
        (None, true) => return Err(format!("verb {verb} needs a datum file")),
        (Some(_), false) => return Err(format!("verb {verb} takes no datum file")),
        (None, false) => None,
    };
    let flags = Flags {
        primes: cli.primes.clone(),
        seed: cli.seed,
        tol: cli.tol,
        cap_torsion: cli.cap_torsion,
        cap_rank: cli.cap_rank,
        count: cli.count,
        trials: cli.trials,
    };
    let record = run_command(verb, parsed.as_ref(), &flags).map_err(|e| e.to_string())?;
    match cli.format {
        Format::Json => println!("{}", record.to_json()),
        Format::Text => print!("{}", record.to_text()),
    }
    Ok(record.status.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
