//! Scale analysis: small parameter, dimensionless groups and per-regime
//! coefficient tables.
//!
//! All dimensional inputs are converted to the `(km, day)` base before any
//! ratio is formed (`1 day = 24 h`, `1 km = 1000 m`), since reference values
//! are naturally quoted in mixed units. Every group is classified as
//! `coeff * eps^power` with `eps` the ratio of tide period to observation
//! window; the classification is order-of-magnitude, with a 50% relative
//! tolerance on the canonical tags.

use crate::error::CoreError;
use serde::{Deserialize, Serialize};
use std::fmt;

const HOURS_PER_DAY: f64 = 24.0;
const SECONDS_PER_DAY: f64 = 86_400.0;
const METERS_PER_KM: f64 = 1_000.0;

/// Geometric regime of the coastal domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    /// Open shelf: one large isotropic length, deep water, small tidal range.
    ContinentalShelf,
    /// Closed bay: small isotropic lengths, shallow water.
    CoastalZone,
    /// Long thin strip along the coast: strongly anisotropic lengths.
    CoastalLayer,
}

impl RegimeKind {
    pub fn label(&self) -> &'static str {
        match self {
            RegimeKind::ContinentalShelf => "continental shelf",
            RegimeKind::CoastalZone => "coastal zone",
            RegimeKind::CoastalLayer => "coastal layer",
        }
    }
}

/// Weather regime fixing the characteristic wind speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weather {
    Calm,
    Storm,
}

impl Weather {
    pub fn label(&self) -> &'static str {
        match self {
            Weather::Calm => "calm",
            Weather::Storm => "storm",
        }
    }

    /// Characteristic wind speed in km/h.
    pub fn wind_speed_kmh(&self) -> f64 {
        match self {
            Weather::Calm => 10.0,
            Weather::Storm => 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub weather: Weather,
}

impl Regime {
    pub fn new(kind: RegimeKind, weather: Weather) -> Self {
        Regime { kind, weather }
    }
}

/// Dimensional reference values (characteristic means or maxima).
///
/// Units are fixed per field: hours for the observation window, 1/hours for
/// the tide frequency, km for lengths, km/day for water velocities, m for
/// depths, km/h for wind, 1/s for the Coriolis parameter, km/day^2 for
/// accelerations, km^2/day for viscosity and km/day for friction velocities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScales {
    /// Observation window, hours.
    pub t_obs: f64,
    /// Tide frequency, 1/hours.
    pub omega_tide: f64,
    /// Along-shore length, km.
    pub l_long: f64,
    /// Cross-shore length, km.
    pub l_lat: f64,
    /// Tide velocity, km/day.
    pub m_tide: f64,
    /// Perturbation velocity, km/day.
    pub n_pert: f64,
    /// Mean water depth, m.
    pub e_depth: f64,
    /// Tidal range, m.
    pub h_range: f64,
    /// Sea-level perturbation, m.
    pub i_pert: f64,
    /// Wind velocity, km/h.
    pub w_wind: f64,
    /// Meteorological forcing scale, km/day^2.
    pub f_scale: f64,
    /// Coriolis parameter, 1/s.
    pub f_coriolis: f64,
    /// Gravity, km/day^2.
    pub g_gravity: f64,
    /// Water viscosity, km^2/day.
    pub c_viscosity: f64,
    /// Bottom friction velocity, km/day.
    pub kappa_bottom: f64,
    /// Air-water friction velocity, km/day.
    pub mu_air: f64,
}

impl PhysicalScales {
    pub fn validate(&self) -> Result<(), CoreError> {
        let fields = [
            ("t_obs", self.t_obs),
            ("omega_tide", self.omega_tide),
            ("l_long", self.l_long),
            ("l_lat", self.l_lat),
            ("m_tide", self.m_tide),
            ("n_pert", self.n_pert),
            ("e_depth", self.e_depth),
            ("h_range", self.h_range),
            ("i_pert", self.i_pert),
            ("w_wind", self.w_wind),
            ("f_scale", self.f_scale),
            ("f_coriolis", self.f_coriolis),
            ("g_gravity", self.g_gravity),
            ("c_viscosity", self.c_viscosity),
            ("kappa_bottom", self.kappa_bottom),
            ("mu_air", self.mu_air),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::domain(format!(
                    "scale {name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        if self.omega_tide * self.t_obs <= 1.0 {
            return Err(CoreError::domain(format!(
                "observation window must exceed one tide period: omega*t = {}",
                self.omega_tide * self.t_obs
            )));
        }
        Ok(())
    }
}

/// Classification `coeff * eps^power` of a pure number. Powers are
/// half-integers; the coefficient stays within `[0.1, 30]` whenever a
/// half-integer power allows it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTag {
    pub coeff: f64,
    pub power: f64,
}

impl PowerTag {
    pub fn new(coeff: f64, power: f64) -> Result<Self, CoreError> {
        if !coeff.is_finite() || !(0.1..=30.0).contains(&coeff) {
            return Err(CoreError::domain(format!(
                "power-tag coefficient must lie in [0.1, 30], got {coeff}"
            )));
        }
        if !power.is_finite() || (power * 2.0).fract() != 0.0 {
            return Err(CoreError::domain(format!(
                "power-tag exponent must be a half-integer, got {power}"
            )));
        }
        Ok(PowerTag { coeff, power })
    }

    /// Numeric value `coeff * eps^power`.
    pub fn value(&self, eps: f64) -> f64 {
        self.coeff * eps.powf(self.power)
    }
}

impl fmt::Display for PowerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.power == 0.0 {
            write!(f, "{:.4}", self.coeff)
        } else {
            write!(f, "{:.4} eps^{}", self.coeff, self.power)
        }
    }
}

/// Small parameter: inverse of tide periods per observation window.
pub fn compute_epsilon(scales: &PhysicalScales) -> Result<f64, CoreError> {
    scales.validate()?;
    Ok(1.0 / (scales.t_obs * scales.omega_tide))
}

/// Canonical decomposition of a positive number as `coeff * eps^power`.
///
/// The power is a half-integer. Candidates with `coeff` inside `[0.1, 30]`
/// are preferred; among those, integer powers beat half-integer powers
/// (matching the integer tags of the scale analysis), then the candidate
/// with `|log10(coeff)|` smallest wins, with ties broken toward the smaller
/// `|power|` and then the smaller power.
pub fn fit_power_tag(value: f64, eps: f64) -> Result<PowerTag, CoreError> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(CoreError::domain(format!(
            "fit_power_tag requires a positive finite value, got {value}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CoreError::domain(format!(
            "fit_power_tag requires eps in (0, 1), got {eps}"
        )));
    }
    let mut best: Option<((u8, u8, f64, f64, f64), f64, f64)> = None;
    for twice in -40_i32..=40 {
        let p = twice as f64 / 2.0;
        let coeff = value / eps.powf(p);
        if !coeff.is_finite() || coeff <= 0.0 {
            continue;
        }
        let out_of_range = u8::from(!(0.1..=30.0).contains(&coeff));
        let non_integer = u8::from(twice % 2 != 0);
        let key = (out_of_range, non_integer, coeff.log10().abs(), p.abs(), p);
        let better = match &best {
            None => true,
            Some((k, _, _)) => key < *k,
        };
        if better {
            best = Some((key, coeff, p));
        }
    }
    let (_, coeff, power) = best.expect("candidate range is non-empty");
    PowerTag::new(coeff, power)
}

/// Stable identifiers for the dimensionless groups.
pub mod group_id {
    pub const F_TBAR: &str = "f_tbar";
    pub const PRESSURE: &str = "pressure";
    pub const VISCOSITY: &str = "viscosity";
    pub const KAPPA_T_OVER_E: &str = "kappa_t_over_e";
    pub const KAPPA_E_OVER_C: &str = "kappa_e_over_c";
    pub const MU_T_OVER_E: &str = "mu_t_over_e";
    pub const MU_E_OVER_C: &str = "mu_e_over_c";
    pub const M_ADVECTION: &str = "m_advection";
    pub const N_ADVECTION: &str = "n_advection";
    pub const ASPECT: &str = "aspect";
    pub const DEPTH_RATIO: &str = "depth_ratio";
    pub const EXCURSION: &str = "excursion";
    pub const GAMMA: &str = "gamma";
    pub const FORCING: &str = "forcing";
}

/// One dimensionless group with its fitted tag and, where the scale
/// analysis states one, the canonical tag for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Group {
    pub id: &'static str,
    pub label: &'static str,
    pub value: f64,
    pub tag: PowerTag,
    pub canonical: Option<PowerTag>,
}

impl Group {
    /// Relative deviation of the value from the canonical `c * eps^p`.
    pub fn canonical_deviation(&self, eps: f64) -> Option<f64> {
        self.canonical.map(|t| {
            let target = t.value(eps);
            (self.value - target).abs() / target
        })
    }
}

/// Every ratio of the scale analysis for one regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionlessGroups {
    pub regime: Regime,
    pub eps: f64,
    pub groups: Vec<Group>,
}

impl DimensionlessGroups {
    pub fn get(&self, id: &str) -> Option<&Group> {
        self.groups.iter().find(|g| g.id == id)
    }
}

struct NormalizedScales {
    t: f64,     // days
    omega: f64, // 1/day
    l_long: f64,
    l_lat: f64,
    m: f64,
    n: f64,
    e: f64, // km
    h: f64, // km
    i: f64, // km
    w: f64, // km/day
    f_scale: f64,
    f_cor: f64, // 1/day
    g: f64,
    c: f64,
    kappa: f64,
    mu: f64,
}

fn normalize(s: &PhysicalScales) -> NormalizedScales {
    NormalizedScales {
        t: s.t_obs / HOURS_PER_DAY,
        omega: s.omega_tide * HOURS_PER_DAY,
        l_long: s.l_long,
        l_lat: s.l_lat,
        m: s.m_tide,
        n: s.n_pert,
        e: s.e_depth / METERS_PER_KM,
        h: s.h_range / METERS_PER_KM,
        i: s.i_pert / METERS_PER_KM,
        w: s.w_wind * HOURS_PER_DAY,
        f_scale: s.f_scale,
        f_cor: s.f_coriolis * SECONDS_PER_DAY,
        g: s.g_gravity,
        c: s.c_viscosity,
        kappa: s.kappa_bottom,
        mu: s.mu_air,
    }
}

/// Compute every dimensionless group of the scale analysis and classify it.
///
/// The wind ratio `gamma` follows the convention of the regime equations:
/// it multiplies the wind directly on the shelf and appears as `gamma/2` in
/// the zone and layer systems, so the stored value is `W/M` on the shelf and
/// `2 W/M` otherwise.
pub fn derive_groups(
    scales: &PhysicalScales,
    regime: Regime,
) -> Result<DimensionlessGroups, CoreError> {
    scales.validate()?;
    let eps = compute_epsilon(scales)?;
    let ns = normalize(scales);

    let gamma = match regime.kind {
        RegimeKind::ContinentalShelf => ns.w / ns.m,
        RegimeKind::CoastalZone | RegimeKind::CoastalLayer => 2.0 * ns.w / ns.m,
    };
    let gamma_canonical = match regime.weather {
        Weather::Calm => PowerTag::new(0.1, -1.0)?,
        Weather::Storm => PowerTag::new(1.0, -1.0)?,
    };

    let canon = canonical_tags(regime.kind);
    let raw: Vec<(&'static str, &'static str, f64)> = vec![
        (group_id::F_TBAR, "f tbar", ns.f_cor * ns.t),
        (
            group_id::PRESSURE,
            "(g tbar / N) (I / L)",
            (ns.g * ns.t / ns.n) * (ns.i / ns.l_long),
        ),
        (group_id::VISCOSITY, "c tbar / L^2", ns.c * ns.t / (ns.l_long * ns.l_long)),
        (group_id::KAPPA_T_OVER_E, "kappa tbar / E", ns.kappa * ns.t / ns.e),
        (group_id::KAPPA_E_OVER_C, "kappa E / c", ns.kappa * ns.e / ns.c),
        (group_id::MU_T_OVER_E, "mu tbar / E", ns.mu * ns.t / ns.e),
        (group_id::MU_E_OVER_C, "mu E / c", ns.mu * ns.e / ns.c),
        (group_id::M_ADVECTION, "M tbar / L", ns.m * ns.t / ns.l_long),
        (group_id::N_ADVECTION, "N tbar / L", ns.n * ns.t / ns.l_long),
        (group_id::ASPECT, "L / l", ns.l_long / ns.l_lat),
        (group_id::DEPTH_RATIO, "H / E", ns.h / ns.e),
        (
            group_id::EXCURSION,
            "(M / omega) / L",
            ns.m / ns.omega / ns.l_long,
        ),
        (group_id::GAMMA, "gamma (wind / tide velocity)", gamma),
        (group_id::FORCING, "F tbar / N", ns.f_scale * ns.t / ns.n),
    ];

    let mut groups = Vec::with_capacity(raw.len());
    for (id, label, value) in raw {
        let tag = fit_power_tag(value, eps)?;
        let canonical = if id == group_id::GAMMA {
            Some(gamma_canonical)
        } else {
            canon.iter().find(|(cid, _)| *cid == id).map(|(_, t)| *t)
        };
        groups.push(Group {
            id,
            label,
            value,
            tag,
            canonical,
        });
    }
    Ok(DimensionlessGroups { regime, eps, groups })
}

fn tag(coeff: f64, power: f64) -> PowerTag {
    PowerTag { coeff, power }
}

/// Canonical `c * eps^p` classifications stated by the scale analysis.
fn canonical_tags(kind: RegimeKind) -> Vec<(&'static str, PowerTag)> {
    use group_id::*;
    let pi_half = std::f64::consts::FRAC_PI_2;
    match kind {
        RegimeKind::ContinentalShelf => vec![
            (F_TBAR, tag(pi_half, -1.0)),
            (PRESSURE, tag(0.25, -1.0)),
            (VISCOSITY, tag(13.0, 5.0)),
            (KAPPA_T_OVER_E, tag(3.0, 0.0)),
            (KAPPA_E_OVER_C, tag(0.8, -2.0)),
            (MU_T_OVER_E, tag(6.0, 1.0)),
            (MU_E_OVER_C, tag(1.5, -1.0)),
            (M_ADVECTION, tag(2.0, 0.0)),
            (N_ADVECTION, tag(2.0, 1.0)),
            (ASPECT, tag(1.0, 0.0)),
            (DEPTH_RATIO, tag(2.0, 1.0)),
            (EXCURSION, tag(2.0, 1.0)),
            (FORCING, tag(1.0, 0.0)),
        ],
        RegimeKind::CoastalZone => vec![
            (F_TBAR, tag(pi_half, -1.0)),
            (PRESSURE, tag(0.2, -2.0)),
            // The stated 0.6 eps^3 misses the raw ratio by more than the
            // shared 50% tolerance; kept for reporting, excluded from the
            // tolerance checks.
            (VISCOSITY, tag(0.6, 3.0)),
            (KAPPA_T_OVER_E, tag(0.1, -1.0)),
            (KAPPA_E_OVER_C, tag(0.1, -2.0)),
            (MU_T_OVER_E, tag(0.2, 0.0)),
            (MU_E_OVER_C, tag(0.25, -1.0)),
            (M_ADVECTION, tag(2.0, -1.0)),
            (N_ADVECTION, tag(2.0, 0.0)),
            (ASPECT, tag(1.0, 0.0)),
            (DEPTH_RATIO, tag(0.2, 0.0)),
            (EXCURSION, tag(2.0, 0.0)),
            (FORCING, tag(1.0, 0.0)),
        ],
        RegimeKind::CoastalLayer => vec![
            (F_TBAR, tag(pi_half, -1.0)),
            (PRESSURE, tag(0.4, -1.0)),
            (VISCOSITY, tag(13.0, 5.0)),
            (KAPPA_T_OVER_E, tag(0.1, -1.0)),
            (KAPPA_E_OVER_C, tag(0.1, -2.0)),
            (MU_T_OVER_E, tag(0.2, 0.0)),
            (MU_E_OVER_C, tag(0.25, -1.0)),
            (M_ADVECTION, tag(4.0, 0.0)),
            (N_ADVECTION, tag(4.0, 1.0)),
            (ASPECT, tag(0.5, -1.0)),
            (DEPTH_RATIO, tag(0.2, 0.0)),
            (EXCURSION, tag(4.0, 1.0)),
            (FORCING, tag(1.0, 0.0)),
        ],
    }
}

/// Reference dimensional values for a regime.
///
/// Shared constants: 100-day window, 13-hour tide, mid-latitude Coriolis,
/// water viscosity at 20 C, standard bottom and air friction velocities.
/// Perturbation scales are slaved to the tide scales through `eps`, and the
/// forcing scale is set so the forcing group is one.
pub fn preset(regime: Regime) -> PhysicalScales {
    let t_obs = 2400.0; // hours
    let omega_tide = 1.0 / 13.0; // 1/hours
    let eps = 1.0 / (t_obs * omega_tide);

    let (m_tide_kmh, l_long, l_lat, e_depth, h_range) = match regime.kind {
        RegimeKind::ContinentalShelf => (0.5, 500.0, 500.0, 300.0, 3.0),
        RegimeKind::CoastalZone => (1.0, 5.0, 5.0, 50.0, 10.0),
        RegimeKind::CoastalLayer => (1.0, 500.0, 5.0, 50.0, 10.0),
    };
    let m_tide = m_tide_kmh * HOURS_PER_DAY; // km/day
    let n_pert = eps * m_tide;
    let i_pert = eps * h_range;
    let t_days = t_obs / HOURS_PER_DAY;

    PhysicalScales {
        t_obs,
        omega_tide,
        l_long,
        l_lat,
        m_tide,
        n_pert,
        e_depth,
        h_range,
        i_pert,
        w_wind: regime.weather.wind_speed_kmh(),
        f_scale: n_pert / t_days,
        f_coriolis: 4.0e-5,
        g_gravity: 1.0e6,
        c_viscosity: 1.0e-7,
        kappa_bottom: 1.0e-2,
        mu_air: 1.0e-4,
    }
}

/// One term of a regime system with its printed coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffEntry {
    pub id: &'static str,
    pub tag: PowerTag,
    pub value: f64,
}

/// Coefficient table of one regime system, every PDE term keyed by a stable
/// identifier and carrying its `c * eps^p` tag evaluated at the groups' eps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeCoefficients {
    pub regime: Regime,
    pub eps: f64,
    pub entries: Vec<CoeffEntry>,
}

impl RegimeCoefficients {
    pub fn get(&self, id: &str) -> Option<&CoeffEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

/// Emit the coefficient table of the regime system the groups were derived
/// for. Term identifiers are stable; `h.*` rows belong to the height
/// equation and `n.*` rows to the momentum equation.
pub fn regime_coefficients(groups: &DimensionlessGroups) -> Result<RegimeCoefficients, CoreError> {
    let eps = groups.eps;
    let pi_half = std::f64::consts::FRAC_PI_2;
    let mut rows: Vec<(&'static str, f64, f64)> = match groups.regime.kind {
        RegimeKind::ContinentalShelf => vec![
            ("h.depth_gradient.mean", 1.0, -1.0),
            ("h.depth_gradient.tide", 2.0, 0.0),
            ("h.depth_divergence.mean", 1.0, -1.0),
            ("h.depth_divergence.tide", 2.0, 0.0),
            ("h.advection.tide", 2.0, 0.0),
            ("h.compression.tide", 2.0, 0.0),
            ("h.advection.self", 2.0, 1.0),
            ("h.compression.self", 2.0, 1.0),
            ("n.advection.tide", 2.0, 0.0),
            ("n.gradient.tide", 2.0, 0.0),
            ("n.advection.self", 2.0, 1.0),
            ("n.coriolis", pi_half, -1.0),
            ("n.pressure", 0.25, -1.0),
            ("n.viscosity.tide", 13.0, 4.0),
            ("n.viscosity.self", 13.0, 5.0),
            ("n.visc_depth.tide", 13.0, 4.0),
            ("n.visc_height.tide", 26.0, 6.0),
            ("n.visc_depth.self", 13.0, 5.0),
            ("n.visc_height.self", 26.0, 7.0),
            ("n.friction.tide", 3.0, -1.0),
            ("n.friction.self", 3.0, 0.0),
            ("n.friction.depth_scale", 0.8, -2.0),
            ("n.wind.forcing", 6.0, 0.0),
            ("n.wind.tide", 6.0, 0.0),
            ("n.wind.self", 6.0, 1.0),
            ("n.wind.depth_scale", 1.5, -1.0),
        ],
        RegimeKind::CoastalZone => vec![
            ("h.depth_gradient.mean", 10.0, -1.0),
            ("h.depth_gradient.tide", 2.0, -1.0),
            ("h.depth_divergence.mean", 10.0, -1.0),
            ("h.depth_divergence.tide", 2.0, -1.0),
            ("h.advection.tide", 2.0, -1.0),
            ("h.compression.tide", 2.0, -1.0),
            ("h.advection.self", 2.0, 0.0),
            ("h.compression.self", 2.0, 0.0),
            ("n.advection.tide", 2.0, -1.0),
            ("n.gradient.tide", 2.0, -1.0),
            ("n.advection.self", 2.0, 0.0),
            ("n.coriolis", pi_half, -1.0),
            ("n.pressure", 0.2, -2.0),
            ("n.viscosity.tide", 0.6, 2.0),
            ("n.viscosity.self", 0.6, 3.0),
            ("n.visc_depth.tide", 0.6, 2.0),
            ("n.visc_height.tide", 0.1, 2.0),
            ("n.visc_depth.self", 0.6, 2.0),
            ("n.visc_height.self", 0.1, 3.0),
            ("n.friction.tide", 0.1, 0.0),
            ("n.friction.self", 0.1, -1.0),
            ("n.friction.depth_scale", 0.1, -2.0),
            ("n.wind.forcing", 0.2, 0.0),
            ("n.wind.tide", 0.2, -1.0),
            ("n.wind.self", 0.2, 0.0),
            ("n.wind.depth_scale", 0.25, -1.0),
        ],
        RegimeKind::CoastalLayer => vec![
            ("anisotropy", 0.5, -1.0),
            ("h.depth_gradient.mean.x1", 20.0, 0.0),
            ("h.depth_gradient.mean.x2", 10.0, -1.0),
            ("h.depth_gradient.tide.x1", 1.0, 0.0),
            ("h.depth_gradient.tide.x2", 2.0, -1.0),
            ("h.depth_divergence.mean", 20.0, 0.0),
            ("h.depth_divergence.tide", 1.0, 0.0),
            ("h.advection.tide.x1", 4.0, 0.0),
            ("h.advection.tide.x2", 2.0, -1.0),
            ("h.compression.tide.x1", 4.0, 0.0),
            ("h.compression.tide.x2", 2.0, -1.0),
            ("h.advection.self.x1", 4.0, 1.0),
            ("h.advection.self.x2", 2.0, 0.0),
            ("h.compression.self.x1", 4.0, 1.0),
            ("h.compression.self.x2", 2.0, 0.0),
            ("n.advection.tide.x1", 4.0, 0.0),
            ("n.advection.tide.x2", 2.0, -1.0),
            ("n.gradient.tide.x1", 4.0, 0.0),
            ("n.gradient.tide.x2", 2.0, -1.0),
            ("n.advection.self.x1", 4.0, 1.0),
            ("n.advection.self.x2", 2.0, 0.0),
            ("n.coriolis", pi_half, -1.0),
            ("n.pressure.x1", 0.4, -1.0),
            ("n.pressure.x2", 0.2, -2.0),
            ("n.viscosity.tide.x1", 13.0, 4.0),
            ("n.viscosity.tide.x2", 3.25, 2.0),
            ("n.viscosity.self.x1", 13.0, 5.0),
            ("n.viscosity.self.x2", 3.25, 3.0),
            ("n.visc_depth.tide", 13.0, 4.0),
            ("n.visc_height.tide", 2.6, 5.0),
            ("n.visc_depth.self", 13.0, 5.0),
            ("n.visc_height.self", 2.6, 6.0),
            ("n.friction.tide", 0.1, -2.0),
            ("n.friction.self", 0.1, -1.0),
            ("n.friction.depth_scale", 0.1, -2.0),
            ("n.wind.forcing", 0.2, 0.0),
            ("n.wind.tide", 0.2, -1.0),
            ("n.wind.self", 0.2, 0.0),
            ("n.wind.depth_scale", 0.25, -1.0),
        ],
    };

    // Wind amplification gamma: the shelf momentum equation carries it
    // directly, the zone and layer carry gamma / (2 eps).
    let gamma_calm = groups.regime.weather == Weather::Calm;
    match groups.regime.kind {
        RegimeKind::ContinentalShelf => {
            rows.push(if gamma_calm {
                ("n.wind.gamma", 0.1, -1.0)
            } else {
                ("n.wind.gamma", 1.0, -1.0)
            });
        }
        RegimeKind::CoastalZone | RegimeKind::CoastalLayer => {
            rows.push(if gamma_calm {
                ("n.wind.gamma_half_eps", 10.0, -1.0)
            } else {
                ("n.wind.gamma_half_eps", 0.5, -2.0)
            });
        }
    }

    let mut entries = Vec::with_capacity(rows.len());
    for (id, coeff, power) in rows {
        let t = PowerTag::new(coeff, power)?;
        entries.push(CoeffEntry {
            id,
            tag: t,
            value: t.value(eps),
        });
    }
    Ok(RegimeCoefficients {
        regime: groups.regime,
        eps,
        entries,
    })
}

/// Aligned text report of the groups and their tags.
pub fn render_group_table(groups: &DimensionlessGroups) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "regime: {} ({})\neps = {:.6e}  (~1/{:.1})\n\n",
        groups.regime.kind.label(),
        groups.regime.weather.label(),
        groups.eps,
        1.0 / groups.eps
    ));
    out.push_str(&format!(
        "{:<16} {:<28} {:>13} {:>22} {:>22} {:>9}\n",
        "id", "group", "value", "fitted tag", "canonical tag", "dev"
    ));
    for g in &groups.groups {
        let canonical = g
            .canonical
            .map(|t| t.to_string())
            .unwrap_or_else(|| "-".to_string());
        let dev = g
            .canonical_deviation(groups.eps)
            .map(|d| format!("{:.1}%", 100.0 * d))
            .unwrap_or_else(|| "-".to_string());
        out.push_str(&format!(
            "{:<16} {:<28} {:>13.4e} {:>22} {:>22} {:>9}\n",
            g.id,
            g.label,
            g.value,
            g.tag.to_string(),
            canonical,
            dev
        ));
    }
    out
}

/// CSV form of the group report.
pub fn groups_to_csv(groups: &DimensionlessGroups) -> String {
    let mut out = String::from(
        "id,label,value,fit_coeff,fit_power,canonical_coeff,canonical_power,canonical_value,rel_dev\n",
    );
    for g in &groups.groups {
        let (cc, cp, cv, dev) = match g.canonical {
            Some(t) => (
                format!("{:.16e}", t.coeff),
                format!("{}", t.power),
                format!("{:.16e}", t.value(groups.eps)),
                format!("{:.16e}", g.canonical_deviation(groups.eps).unwrap()),
            ),
            None => (String::new(), String::new(), String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{:.16e},{:.16e},{},{},{},{},{}\n",
            g.id, g.label, g.value, g.tag.coeff, g.tag.power, cc, cp, cv, dev
        ));
    }
    out
}

/// Aligned text report of a regime coefficient table.
pub fn render_coefficient_table(table: &RegimeCoefficients) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "coefficient table: {} ({}), eps = {:.6e}\n\n{:<26} {:>22} {:>13}\n",
        table.regime.kind.label(),
        table.regime.weather.label(),
        table.eps,
        "term",
        "tag",
        "value"
    ));
    for e in &table.entries {
        out.push_str(&format!(
            "{:<26} {:>22} {:>13.4e}\n",
            e.id,
            e.tag.to_string(),
            e.value
        ));
    }
    out
}

/// CSV form of a regime coefficient table.
pub fn coefficients_to_csv(table: &RegimeCoefficients) -> String {
    let mut out = String::from("term,coeff,power,value\n");
    for e in &table.entries {
        out.push_str(&format!(
            "{},{:.16e},{},{:.16e}\n",
            e.id, e.tag.coeff, e.tag.power, e.value
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shelf() -> Regime {
        Regime::new(RegimeKind::ContinentalShelf, Weather::Storm)
    }

    #[test]
    fn epsilon_from_window_and_period() {
        // 2400 h window, 13 h tide.
        let s = preset(shelf());
        let eps = compute_epsilon(&s).unwrap();
        assert!((eps - 13.0 / 2400.0).abs() < 1e-15);
        // Order 1/200 within 10%.
        assert!((eps - 0.005).abs() / 0.005 < 0.10);
    }

    #[test]
    fn epsilon_trivial_and_invalid_cases() {
        let mut s = preset(shelf());
        s.t_obs = 13.0;
        s.omega_tide = 1.0 / 13.0;
        // Single-period window violates the window invariant.
        assert!(compute_epsilon(&s).is_err());
        s.t_obs = 13.0 + 1e-9;
        let eps = compute_epsilon(&s).unwrap();
        assert!((eps - 1.0).abs() < 1e-6);

        s.t_obs = -1.0;
        assert!(matches!(compute_epsilon(&s), Err(CoreError::Domain(_))));
    }

    #[test]
    fn fit_examples_from_the_analysis() {
        let eps = 1.0 / 200.0;
        let t = fit_power_tag(50.0, eps).unwrap();
        assert_eq!((t.coeff, t.power), (0.25, -1.0));

        let t = fit_power_tag(4.0625e-11, eps).unwrap();
        assert_eq!(t.power, 5.0);
        assert!((t.coeff - 13.0).abs() < 1e-9);

        let t = fit_power_tag(1.0, eps).unwrap();
        assert_eq!((t.coeff, t.power), (1.0, 0.0));
        let t = fit_power_tag(1.0, 0.37).unwrap();
        assert_eq!((t.coeff, t.power), (1.0, 0.0));

        // L/l = 100 on the layer: half of 1/eps.
        let t = fit_power_tag(100.0, eps).unwrap();
        assert_eq!((t.coeff, t.power), (0.5, -1.0));

        // 20 is reported as 1/(10 eps), not as a bare 20.
        let t = fit_power_tag(20.0, eps).unwrap();
        assert_eq!((t.coeff, t.power), (0.1, -1.0));

        assert!(fit_power_tag(0.0, eps).is_err());
        assert!(fit_power_tag(1.0, 1.5).is_err());
    }

    #[test]
    fn fit_recovers_integer_tags_exactly() {
        // Scale consistency on the canonical domain: integer powers with
        // coefficients where only one integer power lands in [0.1, 30].
        let eps: f64 = 1.0 / 200.0;
        for &c in &[0.17, 0.25, 1.0, 2.0, 6.0, 13.0, 19.0] {
            for p in -3..=5 {
                let t = fit_power_tag(c * eps.powi(p), eps).unwrap();
                assert_eq!(t.power, p as f64, "power for c={c}, p={p}");
                assert!((t.coeff - c).abs() < 1e-12 * c, "coeff for c={c}, p={p}");
            }
        }
        // Half-integer powers are chosen when no integer power keeps the
        // coefficient in range; needs the power-to-power gap 1/eps > 300.
        let eps: f64 = 1e-3;
        let t = fit_power_tag(3.0 * eps.powf(2.5), eps).unwrap();
        assert_eq!(t.power, 2.5);
        assert!((t.coeff - 3.0).abs() < 1e-12);
    }

    #[test]
    fn shelf_groups_match_the_analysis() {
        let r = shelf();
        let g = derive_groups(&preset(r), r).unwrap();
        let eps = g.eps;

        // (g tbar / N)(I / L): the eps factors cancel, leaving exactly 50.
        let p = g.get(group_id::PRESSURE).unwrap();
        assert!((p.value - 50.0).abs() < 1e-9, "pressure group {}", p.value);

        // c tbar / L^2 = 1e-5 km^2 / 25e4 km^2.
        let v = g.get(group_id::VISCOSITY).unwrap();
        assert!((v.value - 4.0e-11).abs() < 1e-24, "viscosity {}", v.value);

        // Friction quotients of the shelf block.
        let k = g.get(group_id::KAPPA_T_OVER_E).unwrap();
        assert!((k.value - 10.0 / 3.0).abs() < 1e-12);
        let ke = g.get(group_id::KAPPA_E_OVER_C).unwrap();
        assert!((ke.value - 3.0e4).abs() < 1e-8);
        let mt = g.get(group_id::MU_T_OVER_E).unwrap();
        assert!((mt.value - 1.0 / 30.0).abs() < 1e-12);
        let me = g.get(group_id::MU_E_OVER_C).unwrap();
        assert!((me.value - 3.0e2).abs() < 1e-10);

        // Consistency of the two advection groups: N tbar/L = (M tbar/L) * eps.
        let ma = g.get(group_id::M_ADVECTION).unwrap();
        let na = g.get(group_id::N_ADVECTION).unwrap();
        assert!((na.value - ma.value * eps).abs() <= 1e-15 * na.value.abs());
    }

    #[test]
    fn canonical_tags_hold_at_order_of_magnitude() {
        // Every stated tag matches its group within the 50% "~" tolerance,
        // except the zone viscosity tag whose printed coefficient misses
        // the raw arithmetic.
        for kind in [
            RegimeKind::ContinentalShelf,
            RegimeKind::CoastalZone,
            RegimeKind::CoastalLayer,
        ] {
            for weather in [Weather::Calm, Weather::Storm] {
                let r = Regime::new(kind, weather);
                let g = derive_groups(&preset(r), r).unwrap();
                for grp in &g.groups {
                    let Some(dev) = grp.canonical_deviation(g.eps) else {
                        continue;
                    };
                    if kind == RegimeKind::CoastalZone && grp.id == group_id::VISCOSITY {
                        assert!(dev > 0.5, "zone viscosity unexpectedly within tolerance");
                        continue;
                    }
                    assert!(
                        dev <= 0.5,
                        "{} {:?}: deviation {:.3} exceeds 50%",
                        grp.id,
                        r,
                        dev
                    );
                }
            }
        }
    }

    #[test]
    fn fitted_tags_reconstruct_group_values() {
        // The fitted tag is exact by construction: value = coeff * eps^power.
        let r = shelf();
        let g = derive_groups(&preset(r), r).unwrap();
        for grp in &g.groups {
            let back = grp.tag.value(g.eps);
            assert!(
                (back - grp.value).abs() <= 1e-12 * grp.value.abs(),
                "{}: {} vs {}",
                grp.id,
                back,
                grp.value
            );
        }
    }

    #[test]
    fn derive_groups_is_bit_deterministic() {
        let r = Regime::new(RegimeKind::CoastalLayer, Weather::Calm);
        let a = derive_groups(&preset(r), r).unwrap();
        let b = derive_groups(&preset(r), r).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn presets_match_stated_dimensions() {
        let shelf = preset(Regime::new(RegimeKind::ContinentalShelf, Weather::Calm));
        assert_eq!(shelf.e_depth, 300.0);
        assert_eq!(shelf.h_range, 3.0);

        let zone = preset(Regime::new(RegimeKind::CoastalZone, Weather::Calm));
        assert!((zone.h_range / zone.e_depth - 0.2).abs() < 1e-15);

        let layer = preset(Regime::new(RegimeKind::CoastalLayer, Weather::Calm));
        assert!((layer.l_long / layer.l_lat - 100.0).abs() < 1e-12);

        for kind in [
            RegimeKind::ContinentalShelf,
            RegimeKind::CoastalZone,
            RegimeKind::CoastalLayer,
        ] {
            let r = Regime::new(kind, Weather::Storm);
            let eps = compute_epsilon(&preset(r)).unwrap();
            assert!(
                (1.0 / 250.0..=1.0 / 150.0).contains(&eps),
                "eps {eps} out of window for {kind:?}"
            );
        }
    }

    #[test]
    fn coefficient_tables_evaluate_stated_values() {
        let eps = 1.0 / 200.0;
        let mut s = preset(shelf());
        // Force eps to exactly 1/200 for the stated arithmetic.
        s.t_obs = 2600.0;
        let g = derive_groups(&s, shelf()).unwrap();
        assert!((g.eps - eps).abs() < 1e-15);

        let table = regime_coefficients(&g).unwrap();
        let coriolis = table.get("n.coriolis").unwrap();
        assert!((coriolis.value - 100.0 * std::f64::consts::PI).abs() < 1e-9);

        let zr = Regime::new(RegimeKind::CoastalZone, Weather::Storm);
        let mut zs = preset(zr);
        zs.t_obs = 2600.0;
        let zg = derive_groups(&zs, zr).unwrap();
        let zt = regime_coefficients(&zg).unwrap();
        assert!((zt.get("n.pressure").unwrap().value - 8000.0).abs() < 1e-7);

        let lr = Regime::new(RegimeKind::CoastalLayer, Weather::Storm);
        let mut ls = preset(lr);
        ls.t_obs = 2600.0;
        let lg = derive_groups(&ls, lr).unwrap();
        let lt = regime_coefficients(&lg).unwrap();
        let a = lt.get("anisotropy").unwrap();
        assert_eq!((a.tag.coeff, a.tag.power), (0.5, -1.0));
        assert!((a.value - 100.0).abs() < 1e-9);
    }

    #[test]
    fn reports_render_and_are_stable() {
        let r = shelf();
        let g = derive_groups(&preset(r), r).unwrap();
        let t1 = render_group_table(&g);
        let t2 = render_group_table(&g);
        assert_eq!(t1, t2);
        assert!(t1.contains("pressure"));
        let csv = groups_to_csv(&g);
        assert!(csv.lines().count() == g.groups.len() + 1);

        let table = regime_coefficients(&g).unwrap();
        assert!(render_coefficient_table(&table).contains("n.coriolis"));
        assert!(coefficients_to_csv(&table).contains("n.pressure"));
    }
}
