//! `coastal`: scale reports, stiff and limit runs, eps-sweep comparisons
//! and regime residual audits.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver abort,
//! 4 partial sweep (some members failed; report still written).

use clap::{Parser, Subcommand};
use coastal_cli::config::{ExperimentConfig, InitVariantChoice};
use coastal_cli::output::{run_dir, write_text};
use coastal_cli::runner::{prepare, run_full_to_dir, run_limit_to_dir};
use coastal_cli::scales_cmd::{parse_regime, parse_weather, run_scales};
use coastal_cli::CliError;
use coastal_core::scales::Regime;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "coastal",
    about = "Long-term coastal ocean perturbation toolkit: scale analysis, stiff and homogenized solvers, convergence harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the dimensionless-group and coefficient tables for a regime.
    Scales {
        #[arg(long)]
        regime: String,
        #[arg(long, default_value = "calm")]
        weather: String,
        /// Override a preset dimensional value, e.g. --set t_obs=1200.
        #[arg(long = "set")]
        set: Vec<String>,
        /// Also write table and CSV files under this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the stiff perturbation system for a single eps.
    RunFull {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the first entry of the config's eps list.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate the homogenized limit equation.
    RunLimit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// printed | curl (default: printed).
        #[arg(long)]
        init_variant: Option<String>,
        /// Run the manufactured-solution convergence study instead.
        #[arg(long)]
        mms: bool,
    },
    /// Run the eps sweep and the weak-pairing convergence comparison.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// printed | curl | both (overrides the config).
        #[arg(long)]
        init_variant: Option<String>,
    },
    /// Pointwise magnitude audit of a full regime right-hand side.
    Residual {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        regime: String,
        #[arg(long, default_value = "storm")]
        weather: String,
        /// Defaults to the first entry of the config's eps list.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: &Path) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let cfg = ExperimentConfig::load(path)?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((cfg, base))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Scales {
            regime,
            weather,
            set,
            out,
        } => {
            let text = run_scales(
                parse_regime(&regime)?,
                parse_weather(&weather)?,
                &set,
                out.as_deref(),
            )?;
            print!("{text}");
            Ok(())
        }
        Command::RunFull { config, eps, out } => {
            let (cfg, base) = load_config(&config)?;
            let eps = eps.unwrap_or(cfg.eps_list[0]);
            if !(eps > 0.0 && eps < 1.0) {
                return Err(CliError::Config(format!("eps {eps} not in (0, 1)")));
            }
            let prep = prepare(&cfg, &base)?;
            let dir = run_dir(&out, "run-full", &cfg.to_json(), &format!("{eps}"))?;
            write_text(&dir.join("config.json"), &cfg.to_json())?;
            let (_, summary) = run_full_to_dir(&prep, eps, &dir)?;
            println!(
                "run-full done: eps={eps}, steps={}, sup|u|_4 / |u0|_4 = {:.4}  ->  {}",
                summary.n_steps,
                summary.sup_ratio,
                dir.display()
            );
            Ok(())
        }
        Command::RunLimit {
            config,
            out,
            init_variant,
            mms,
        } => {
            let (cfg, base) = load_config(&config)?;
            if mms {
                let report = coastal_core::limit_solver::run_mms_study()
                    .map_err(|e| CliError::Solver(e.to_string()))?;
                let dir = run_dir(&out, "run-limit-mms", &cfg.to_json(), "mms")?;
                write_text(&dir.join("mms_convergence.csv"), &report.to_csv())?;
                println!("manufactured-solution study -> {}", dir.display());
                for (n, e) in &report.spatial {
                    println!("  spatial  n={n:<3}  q error = {e:.6e}");
                }
                for ((dt, e), order) in report
                    .temporal
                    .iter()
                    .zip(std::iter::once(&f64::NAN).chain(report.temporal_orders.iter()))
                {
                    if order.is_nan() {
                        println!("  temporal dt={dt:<8} error = {e:.6e}");
                    } else {
                        println!("  temporal dt={dt:<8} error = {e:.6e}  order = {order:.2}");
                    }
                }
                return Ok(());
            }
            let choice = match init_variant.as_deref() {
                Some(s) => InitVariantChoice::parse(s)?,
                None => InitVariantChoice::Printed,
            };
            let variants = choice.variants();
            let prep = prepare(&cfg, &base)?;
            for variant in variants {
                let dir = run_dir(&out, "run-limit", &cfg.to_json(), variant.label())?;
                write_text(&dir.join("config.json"), &cfg.to_json())?;
                let (_, summary) = run_limit_to_dir(&prep, variant, &dir)?;
                println!(
                    "run-limit done ({}): steps={}, max residuals div={:.2e} stream={:.2e} helmholtz={:.2e}  ->  {}",
                    summary.variant,
                    summary.n_steps,
                    summary.max_div_residual,
                    summary.max_stream_residual,
                    summary.max_helmholtz_residual,
                    dir.display()
                );
            }
            Ok(())
        }
        Command::Compare {
            config,
            out,
            init_variant,
        } => {
            let (mut cfg, base) = load_config(&config)?;
            if let Some(s) = init_variant.as_deref() {
                cfg.init_variant = InitVariantChoice::parse(s)?;
            }
            if cfg.eps_list.len() < 3 && !cfg.self_comparison {
                return Err(CliError::Config(format!(
                    "compare needs at least 3 eps values, got {}",
                    cfg.eps_list.len()
                )));
            }
            let outcome = coastal_cli::compare::run_compare(&cfg, &base, &out)?;
            let report = &outcome.report;
            println!(
                "compare done: {} eps values, selected init variant '{}'",
                report.eps_list.len(),
                report.selected_variant
            );
            let v = &report.variants[&report.selected_variant];
            for (tf, err) in &v.final_errors {
                println!("  {tf:<16} final rel error {err:.4e}");
            }
            if outcome.failed_members > 0 {
                return Err(CliError::PartialSweep(format!(
                    "{} sweep member(s) aborted; report marks them failed",
                    outcome.failed_members
                )));
            }
            Ok(())
        }
        Command::Residual {
            config,
            regime,
            weather,
            eps,
            out,
        } => {
            let (cfg, base) = load_config(&config)?;
            let regime = Regime::new(parse_regime(&regime)?, parse_weather(&weather)?);
            let eps = eps.unwrap_or(cfg.eps_list[0]);
            if !(eps > 0.0 && eps < 1.0) {
                return Err(CliError::Config(format!("eps {eps} not in (0, 1)")));
            }
            let text = coastal_cli::residual::run_residual(&cfg, &base, regime, eps, &out)?;
            print!("{text}");
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(cli.command) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
