use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use darkstate::cli::{self, ConfigFile, Overrides, RunMode, Spacing, EXIT_CONFIG};
use darkstate::fidelity::InputSpec;

/// Fidelity sweeps for adiabatic dark-state transfer between two microwave
/// cavities.
#[derive(Parser, Debug)]
#[command(name = "darkstate", version)]
struct Args {
    /// single, sweep-cavity-loss, sweep-fiber-mech-loss, sweep-adiabaticity-g,
    /// sweep-adiabaticity-T or dark-state-report
    #[arg(long)]
    mode: Option<String>,

    /// TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,

    /// Minimum integration steps per transfer
    #[arg(long)]
    steps: Option<usize>,

    /// Sweep grid as start,stop,points
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<String>>,

    /// Logarithmic grid spacing
    #[arg(long, conflicts_with = "linear")]
    log: bool,

    /// Linear grid spacing
    #[arg(long)]
    linear: bool,

    /// Input state, e.g. coherent:1, squeezed:1,0.4 or qubit (repeatable)
    #[arg(long)]
    input: Vec<String>,
}

fn overrides(args: &Args) -> darkstate::Result<Overrides> {
    let bad = |m: String| darkstate::Error::Config(m);
    let grid = match &args.grid {
        None => None,
        Some(v) if v.len() != 3 => return Err(bad(format!("--grid needs start,stop,points, got {} values", v.len()))),
        Some(v) => {
            let f = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("bad grid value '{s}'")));
            let points = v[2].trim().parse::<usize>().map_err(|_| bad(format!("bad grid point count '{}'", v[2])))?;
            Some((f(&v[0])?, f(&v[1])?, points))
        }
    };
    let spacing = match (args.log, args.linear) {
        (true, _) => Some(Spacing::Log),
        (_, true) => Some(Spacing::Linear),
        _ => None,
    };
    Ok(Overrides {
        mode: args.mode.as_deref().map(str::parse::<RunMode>).transpose()?,
        steps: args.steps,
        out: args.out.clone(),
        grid,
        spacing,
        inputs: args.input.iter().map(|s| s.parse::<InputSpec>()).collect::<darkstate::Result<_>>()?,
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let resolved = overrides(&args).and_then(|flags| {
        let file = args.config.as_deref().map(ConfigFile::load).transpose()?;
        cli::resolve(file.as_ref(), &flags)
    });
    let config = match resolved {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match cli::run(&config) {
        Ok(outcome) => {
            if config.out.is_none() {
                print!("{}", outcome.csv);
                for line in &outcome.summary {
                    eprintln!("{line}");
                }
            } else {
                for line in &outcome.summary {
                    println!("{line}");
                }
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
