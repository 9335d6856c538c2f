//! `residual` subcommand: pointwise regime right-hand-side magnitude audit.

use crate::config::ExperimentConfig;
use crate::output::{run_dir, write_text};
use crate::runner::prepare;
use crate::CliError;
use coastal_core::full_solver::regime_rhs;
use coastal_core::scales::Regime;
use std::path::Path;

/// Evaluate the regime right-hand side on the configured initial data at
/// `t = 0` and report per-term max magnitudes.
pub fn run_residual(
    cfg: &ExperimentConfig,
    base_dir: &Path,
    regime: Regime,
    eps: f64,
    out: &Path,
) -> Result<String, CliError> {
    let prep = prepare(cfg, base_dir)?;
    let rhs = regime_rhs(regime, &prep.initial, eps, &prep.scenario)
        .map_err(|e| CliError::Solver(e.to_string()))?;

    let mags = rhs.magnitudes();
    let total = rhs.total(prep.grid);
    let mut text = format!(
        "regime rhs magnitude audit: {} ({}), eps = {eps:.6e}\n\n{:<26} {:>14}\n",
        regime.kind.label(),
        regime.weather.label(),
        "term",
        "max |du/dt|"
    );
    let mut csv = String::from("term,max_abs\n");
    for (id, m) in &mags {
        text.push_str(&format!("{id:<26} {m:>14.6e}\n"));
        csv.push_str(&format!("{id},{m:.16e}\n"));
    }
    text.push_str(&format!("\n{:<26} {:>14.6e}\n", "total", total.max_abs()));
    csv.push_str(&format!("total,{:.16e}\n", total.max_abs()));

    let salt = format!("{:?}-{:?}-{eps}", regime.kind, regime.weather);
    let dir = run_dir(out, "residual", &cfg.to_json(), &salt)?;
    write_text(&dir.join("config.json"), &cfg.to_json())?;
    write_text(&dir.join("residual.txt"), &text)?;
    write_text(&dir.join("residual.csv"), &csv)?;
    Ok(text)
}
