//! `scales` subcommand: dimensionless-group report with overrides.

use crate::output::{run_dir, write_text};
use crate::CliError;
use coastal_core::scales::{
    coefficients_to_csv, derive_groups, groups_to_csv, preset, regime_coefficients,
    render_coefficient_table, render_group_table, PhysicalScales, Regime, RegimeKind, Weather,
};
use std::path::Path;

pub fn parse_regime(s: &str) -> Result<RegimeKind, CliError> {
    match s {
        "shelf" | "continental_shelf" => Ok(RegimeKind::ContinentalShelf),
        "zone" | "coastal_zone" => Ok(RegimeKind::CoastalZone),
        "layer" | "coastal_layer" => Ok(RegimeKind::CoastalLayer),
        other => Err(CliError::Config(format!(
            "unknown regime '{other}' (expected shelf, zone or layer)"
        ))),
    }
}

pub fn parse_weather(s: &str) -> Result<Weather, CliError> {
    match s {
        "calm" => Ok(Weather::Calm),
        "storm" => Ok(Weather::Storm),
        other => Err(CliError::Config(format!(
            "unknown weather '{other}' (expected calm or storm)"
        ))),
    }
}

/// Apply `key=value` overrides to preset dimensional values. Keys are the
/// scale names in their documented units; values must be positive numbers.
pub fn apply_overrides(scales: &mut PhysicalScales, overrides: &[String]) -> Result<(), CliError> {
    for item in overrides {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            CliError::Config(format!("override '{item}' must have the form key=value"))
        })?;
        let v: f64 = value.trim().parse().map_err(|_| {
            CliError::Config(format!("override '{key}': '{value}' is not a number"))
        })?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(CliError::Config(format!(
                "override '{key}': value must be strictly positive, got {value}"
            )));
        }
        let slot = match key.trim() {
            "t_obs" => &mut scales.t_obs,
            "omega_tide" => &mut scales.omega_tide,
            "l_long" => &mut scales.l_long,
            "l_lat" => &mut scales.l_lat,
            "m_tide" => &mut scales.m_tide,
            "n_pert" => &mut scales.n_pert,
            "e_depth" => &mut scales.e_depth,
            "h_range" => &mut scales.h_range,
            "i_pert" => &mut scales.i_pert,
            "w_wind" => &mut scales.w_wind,
            "f_scale" => &mut scales.f_scale,
            "f_coriolis" => &mut scales.f_coriolis,
            "g_gravity" => &mut scales.g_gravity,
            "c_viscosity" => &mut scales.c_viscosity,
            "kappa_bottom" => &mut scales.kappa_bottom,
            "mu_air" => &mut scales.mu_air,
            other => {
                return Err(CliError::Config(format!(
                    "unknown scale '{other}' in override"
                )))
            }
        };
        *slot = v;
    }
    Ok(())
}

/// Build the full report text and optionally write the table/CSV files.
pub fn run_scales(
    regime: RegimeKind,
    weather: Weather,
    overrides: &[String],
    out: Option<&Path>,
) -> Result<String, CliError> {
    let regime = Regime::new(regime, weather);
    let mut scales = preset(regime);
    apply_overrides(&mut scales, overrides)?;
    let groups = derive_groups(&scales, regime).map_err(|e| CliError::Config(e.to_string()))?;
    let table = regime_coefficients(&groups).map_err(|e| CliError::Config(e.to_string()))?;

    let mut text = render_group_table(&groups);
    text.push('\n');
    text.push_str(&render_coefficient_table(&table));

    if let Some(out) = out {
        let salt = format!(
            "{:?}-{:?}-{}",
            regime.kind,
            regime.weather,
            overrides.join(",")
        );
        let dir = run_dir(out, "scales", &salt, "")?;
        write_text(&dir.join("groups.txt"), &render_group_table(&groups))?;
        write_text(&dir.join("groups.csv"), &groups_to_csv(&groups))?;
        write_text(
            &dir.join("coefficients.txt"),
            &render_coefficient_table(&table),
        )?;
        write_text(&dir.join("coefficients.csv"), &coefficients_to_csv(&table))?;
    }
    Ok(text)
}
