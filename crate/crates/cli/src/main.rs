use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use curveflow_cli::commands::{self, Context, NormArgs};
use curveflow_cli::config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "curveflow", version, about = "Curve diffusion flow of an open curve with contact angle")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized measurements (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow; writes timeseries.csv and JSON snapshots.
    Simulate,
    /// Compare the chain-rule geometry with the finite-difference oracle.
    CheckFormulas,
    /// Lopatinskii–Shapiro check of the frozen model problem.
    CheckLs,
    /// Lipschitz constants of the nonlinearity over shrinking horizons.
    MeasureContraction,
    /// Weighted norms of a sampled signal (default u(t) = t).
    Norms {
        /// CSV with rows `t,value[,value…]`.
        #[arg(long)]
        signal: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Weight exponent (defaults to `mu` from the config).
        #[arg(long)]
        mu: Option<f64>,
        /// Order of the Slobodetskii seminorm.
        #[arg(long, default_value_t = 0.125)]
        s: f64,
        /// Order of the Sobolev norm.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Horizon T (defaults to the last sample time).
        #[arg(long = "t-end")]
        t_end: Option<f64>,
    },
    /// Front-tracking run from a perturbed equilibrium arc.
    Oracle,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    };
    let config = match config.and_then(|c| c.validate().map(|w| (c, w))) {
        Ok((c, warning)) => {
            if let (Some(w), false) = (warning, cli.quiet) {
                eprintln!("warning: {w}");
            }
            c
        }
        Err(e) => return config_error(e),
    };
    let ctx = Context {
        out: cli.out.clone().unwrap_or_else(|| config.out.clone()),
        seed: cli.seed.unwrap_or(config.seed),
        quiet: cli.quiet,
        config,
    };
    let result = match cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::CheckFormulas => commands::check_formulas(&ctx),
        Command::CheckLs => commands::check_ls(&ctx),
        Command::MeasureContraction => commands::measure_contraction(&ctx),
        Command::Norms { signal, p, mu, s, k, t_end } => {
            if let Some(m) = mu {
                if !(m > 0.5 && m <= 1.0) {
                    return config_error(ConfigError::OutOfRange {
                        key: "mu",
                        value: m.to_string(),
                        range: "(1/2, 1], with (7/8, 1] covered by the theory",
                    });
                }
            }
            commands::norms(&ctx, &NormArgs { signal, p, mu, s, k, t_end })
        }
        Command::Oracle => commands::oracle(&ctx),
    };
    match result {
        Ok(summary) => {
            if !ctx.quiet {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn config_error(e: ConfigError) -> ExitCode {
    eprintln!("config error: {e}");
    ExitCode::from(2)
}
