use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use seqbell::cli::{execute, parse_config, CliError, Format, Subcommand, EXIT_INTERNAL};

/// Exact statistics, CHSH analysis and hidden-variable checks for the
/// two-time EPRB spin experiment.
#[derive(Parser, Debug)]
#[command(name = "seqbell", version)]
struct Args {
    /// exact | sample | chsh-scan | chsh-max | hvm-check | joint-feasibility
    command: String,

    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,

    /// Output file (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,

    #[arg(long)]
    seed: Option<u64>,

    /// Grid step in degrees
    #[arg(long)]
    step: Option<f64>,

    /// Sample count
    #[arg(long)]
    n: Option<u64>,
}

fn real_main(args: Args) -> Result<i32, CliError> {
    let cmd: Subcommand = args.command.parse()?;
    let text = fs::read_to_string(&args.config).map_err(|e| CliError::Syntax(format!(
        "cannot read {}: {e}",
        args.config.display()
    )))?;
    let mut cfg = parse_config(&text)?;
    if let Some(out) = args.out {
        cfg.out = Some(out);
    }
    if let Some(f) = args.format {
        cfg.format = f.parse::<Format>().map_err(CliError::Syntax)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(step) = args.step {
        cfg.step = step;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }

    let report = execute(cmd, &cfg)?;
    if cfg.out.is_none() {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(report.render(cfg.format).as_bytes())
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let code = report.exit_code();
    if code != 0 {
        eprintln!("seqbell: sequential CHSH bound exceeded on the scan grid");
    }
    Ok(code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match real_main(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("seqbell: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_INTERNAL as u8))
}
