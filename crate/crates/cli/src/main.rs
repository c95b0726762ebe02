mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use fermiflux_core::Error;
use output::OutDir;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fermiflux", version, about = "Steady currents and entropy production of coupled quantum walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the modelling assumptions.
    Validate(Common),
    /// Stationary state, currents and entropy production.
    Steady(Common),
    /// Evolve the truncated lattice.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_max: Option<usize>,
    },
    /// Compare exact and leading-order quantities over a range of couplings.
    Sweep(Common),
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::SingularResolvent { .. } | Error::EigenFailure | Error::NonFinite(_)) => 3,
        Some(Error::TruncationExceeded { .. } | Error::InvalidArgument(_)) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("FERMIFLUX_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second initialisation only happens in tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn run(cli: Cli) -> Result<(), (u8, anyhow::Error)> {
    let common = match &cli.command {
        Command::Validate(c) | Command::Steady(c) | Command::Sweep(c) => c,
        Command::Evolve { common, .. } => common,
    };
    let cfg = config::load(&common.config).map_err(|e| (1, e))?;
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.outputs.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let out = OutDir::create(&dir).map_err(|e| (1, e))?;
    let fail = |e: anyhow::Error| (exit_code(&e), e);
    match &cli.command {
        Command::Validate(_) => {
            let report = commands::validate(&cfg, Some(&out)).map_err(fail)?;
            for c in &report.checks {
                let detail = match (&c.value, &c.message) {
                    (_, Some(m)) => m.clone(),
                    (Some(v), None) => format!("{v:.6e}"),
                    (None, None) => String::new(),
                };
                println!("{:<22} {}  {}", c.name, if c.pass { "PASS" } else { "FAIL" }, detail);
            }
            if !report.pass {
                return Err((2, anyhow::anyhow!("assumption check failed")));
            }
        }
        Command::Steady(_) => {
            let s = commands::steady(&cfg, &out).map_err(fail)?;
            println!("currents {:?}", s.currents);
            println!("sigma {:.16e}", s.sigma);
        }
        Command::Evolve { t_max, .. } => {
            let t = t_max.unwrap_or(cfg.numerics.t_max);
            let rows = commands::evolve(&cfg, t, &out).map_err(fail)?;
            if let Some(last) = rows.last() {
                println!("t = {} dist_to_Dinf = {:.6e}", t, last[last.len() - 1]);
            }
        }
        Command::Sweep(_) => {
            let s = commands::sweep(&cfg, &out).map_err(fail)?;
            println!("current residual slope {:.4}", s.current_residual_slope);
            println!("steady-state residual slope {:.4}", s.delta_residual_slope);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    configure_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
