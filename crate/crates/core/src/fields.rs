//! Prescribed tide, depth and wind forcing.
//!
//! Each field is 1-periodic in the fast phase `theta` with modulated
//! amplitude: `F(t, theta, x) = sum_k a_k(t,x) cos(2 pi k theta)
//! + b_k(t,x) sin(2 pi k theta)`. Amplitudes are restricted to a closed
//! form, trigonometric polynomials in `x` times polynomial-exponential
//! envelopes in `t`, so phase averages and spatial derivatives are exact;
//! the limit solver consumes those averaged coefficients analytically.
//!
//! Scenario files are JSON documents with a `version` field; unknown keys
//! are rejected.

use crate::error::CoreError;
use crate::grid::{ScalarField, TorusGrid};
use serde::{Deserialize, Serialize};

/// One factor of a spatial term along an axis: `1`, `cos(m k0 x)` or
/// `sin(m k0 x)` with `m` a nonnegative integer mode and `k0 = 2 pi / L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisFactor {
    One,
    Cos(u32),
    Sin(u32),
}

impl AxisFactor {
    fn value(&self, coord: f64, k0: f64) -> f64 {
        match self {
            AxisFactor::One => 1.0,
            AxisFactor::Cos(m) => (*m as f64 * k0 * coord).cos(),
            AxisFactor::Sin(m) => (*m as f64 * k0 * coord).sin(),
        }
    }

    /// d/dcoord, returned as (scale, factor) so derivatives stay in the family.
    fn derivative(&self, k0: f64) -> (f64, AxisFactor) {
        match self {
            AxisFactor::One => (0.0, AxisFactor::One),
            AxisFactor::Cos(m) => (-(*m as f64) * k0, AxisFactor::Sin(*m)),
            AxisFactor::Sin(m) => (*m as f64 * k0, AxisFactor::Cos(*m)),
        }
    }

    fn max_mode(&self) -> u32 {
        match self {
            AxisFactor::One => 0,
            AxisFactor::Cos(m) | AxisFactor::Sin(m) => *m,
        }
    }
}

/// `coeff * fx(x1) * fy(x2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialTerm {
    pub coeff: f64,
    pub fx: AxisFactor,
    pub fy: AxisFactor,
}

/// Trigonometric polynomial in `x`, periodic on the computational box by
/// construction.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigPoly {
    pub terms: Vec<SpatialTerm>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        TrigPoly {
            terms: vec![SpatialTerm {
                coeff: c,
                fx: AxisFactor::One,
                fy: AxisFactor::One,
            }],
        }
    }

    pub fn term(coeff: f64, fx: AxisFactor, fy: AxisFactor) -> SpatialTerm {
        SpatialTerm { coeff, fx, fy }
    }

    pub fn value(&self, x: f64, y: f64, k0: (f64, f64)) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.fx.value(x, k0.0) * t.fy.value(y, k0.1))
            .sum()
    }

    pub fn ddx(&self, x: f64, y: f64, k0: (f64, f64)) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let (s, fx) = t.fx.derivative(k0.0);
                t.coeff * s * fx.value(x, k0.0) * t.fy.value(y, k0.1)
            })
            .sum()
    }

    pub fn ddy(&self, x: f64, y: f64, k0: (f64, f64)) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let (s, fy) = t.fy.derivative(k0.1);
                t.coeff * s * t.fx.value(x, k0.0) * fy.value(y, k0.1)
            })
            .sum()
    }

    pub fn max_mode(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.fx.max_mode().max(t.fy.max_mode()))
            .max()
            .unwrap_or(0)
    }

    /// Sample on a grid.
    pub fn sample(&self, grid: TorusGrid) -> ScalarField {
        let k0 = fundamental(grid);
        ScalarField::from_fn(grid, |x, y| self.value(x, y, k0))
    }
}

fn fundamental(grid: TorusGrid) -> (f64, f64) {
    (
        2.0 * std::f64::consts::PI / grid.lx,
        2.0 * std::f64::consts::PI / grid.ly,
    )
}

/// One term `coeff * t^power * exp(rate * t)` of a time envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeTerm {
    pub coeff: f64,
    #[serde(default)]
    pub power: u32,
    #[serde(default)]
    pub rate: f64,
}

/// Polynomial-exponential envelope `sum_i c_i t^p_i exp(r_i t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub terms: Vec<EnvelopeTerm>,
}

impl Envelope {
    pub fn one() -> Self {
        Envelope {
            terms: vec![EnvelopeTerm {
                coeff: 1.0,
                power: 0,
                rate: 0.0,
            }],
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|e| e.coeff * t.powi(e.power as i32) * (e.rate * t).exp())
            .sum()
    }
}

impl Default for Envelope {
    fn default() -> Self {
        Envelope::one()
    }
}

/// Separable amplitude `envelope(t) * spatial(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Amplitude {
    #[serde(default)]
    pub envelope: Envelope,
    pub spatial: TrigPoly,
}

impl Amplitude {
    pub fn new(spatial: TrigPoly) -> Self {
        Amplitude {
            envelope: Envelope::one(),
            spatial,
        }
    }
}

/// One phase harmonic: `cos(2 pi k theta)` amplitudes and
/// `sin(2 pi k theta)` amplitudes for mode `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub mode: u32,
    #[serde(default)]
    pub cos: Vec<Amplitude>,
    #[serde(default)]
    pub sin: Vec<Amplitude>,
}

/// One scalar component of a theta-periodic field.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldComponent {
    pub harmonics: Vec<Harmonic>,
}

/// A field `F(t, theta, x)`, exactly 1-periodic in `theta` by construction,
/// with 1 (scalar) or 2 (vector) components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaPeriodicField {
    pub components: Vec<FieldComponent>,
}

impl ThetaPeriodicField {
    pub fn zero(n_components: usize) -> Self {
        ThetaPeriodicField {
            components: vec![FieldComponent::default(); n_components],
        }
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    fn phase_reduced(theta: f64) -> f64 {
        // Exact 1-periodicity: evaluate on the fractional part.
        theta - theta.floor()
    }

    /// Point evaluation of one component.
    pub fn eval(&self, component: usize, t: f64, theta: f64, x: (f64, f64), k0: (f64, f64)) -> f64 {
        let th = Self::phase_reduced(theta);
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut acc = 0.0;
        for h in &self.components[component].harmonics {
            let arg = two_pi * h.mode as f64 * th;
            let (c, s) = (arg.cos(), arg.sin());
            for a in &h.cos {
                acc += c * a.envelope.value(t) * a.spatial.value(x.0, x.1, k0);
            }
            for a in &h.sin {
                acc += s * a.envelope.value(t) * a.spatial.value(x.0, x.1, k0);
            }
        }
        acc
    }

    /// Phase average over one period: only the mode-zero cosine amplitudes
    /// survive, all `k >= 1` harmonics integrate to zero.
    pub fn theta_average(&self, component: usize, t: f64, x: (f64, f64), k0: (f64, f64)) -> f64 {
        let mut acc = 0.0;
        for h in &self.components[component].harmonics {
            if h.mode == 0 {
                for a in &h.cos {
                    acc += a.envelope.value(t) * a.spatial.value(x.0, x.1, k0);
                }
            }
        }
        acc
    }

    /// Analytic spatial gradient of one component.
    pub fn spatial_gradient(
        &self,
        component: usize,
        t: f64,
        theta: f64,
        x: (f64, f64),
        k0: (f64, f64),
    ) -> (f64, f64) {
        let th = Self::phase_reduced(theta);
        let two_pi = 2.0 * std::f64::consts::PI;
        let (mut gx, mut gy) = (0.0, 0.0);
        for h in &self.components[component].harmonics {
            let arg = two_pi * h.mode as f64 * th;
            let (c, s) = (arg.cos(), arg.sin());
            for (phase, amps) in [(c, &h.cos), (s, &h.sin)] {
                for a in amps {
                    let e = phase * a.envelope.value(t);
                    gx += e * a.spatial.ddx(x.0, x.1, k0);
                    gy += e * a.spatial.ddy(x.0, x.1, k0);
                }
            }
        }
        (gx, gy)
    }

    pub fn max_mode(&self) -> u32 {
        self.components
            .iter()
            .flat_map(|c| c.harmonics.iter())
            .flat_map(|h| h.cos.iter().chain(h.sin.iter()))
            .map(|a| a.spatial.max_mode())
            .max()
            .unwrap_or(0)
    }
}

/// Curl of the phase-averaged 2-component field,
/// `d(avg F1)/dx2 - d(avg F2)/dx1`, analytically.
pub fn curl_of_average(
    field: &ThetaPeriodicField,
    t: f64,
    x: (f64, f64),
    k0: (f64, f64),
) -> Result<f64, CoreError> {
    if field.n_components() != 2 {
        return Err(CoreError::domain(format!(
            "curl needs a 2-component field, got {}",
            field.n_components()
        )));
    }
    let mut acc = 0.0;
    for (comp, sign, along_y) in [(0usize, 1.0, true), (1usize, -1.0, false)] {
        for h in &field.components[comp].harmonics {
            if h.mode != 0 {
                continue;
            }
            for a in &h.cos {
                let d = if along_y {
                    a.spatial.ddy(x.0, x.1, k0)
                } else {
                    a.spatial.ddx(x.0, x.1, k0)
                };
                acc += sign * a.envelope.value(t) * d;
            }
        }
    }
    Ok(acc)
}

/// Rescaled mean depth `E(x)`; flat means `E = 1` identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanDepthField {
    pub flat: bool,
    /// Spatial variation added to 1 when not flat.
    #[serde(default)]
    pub variation: Option<TrigPoly>,
}

impl MeanDepthField {
    pub fn flat() -> Self {
        MeanDepthField {
            flat: true,
            variation: None,
        }
    }

    pub fn value(&self, x: f64, y: f64, k0: (f64, f64)) -> f64 {
        if self.flat {
            1.0
        } else {
            1.0 + self
                .variation
                .as_ref()
                .map(|p| p.value(x, y, k0))
                .unwrap_or(0.0)
        }
    }
}

/// Full forcing scenario: tide velocity `M`, tide depth variation `H`,
/// wind `W` and mean depth `E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub name: String,
    pub m: ThetaPeriodicField,
    pub h: ThetaPeriodicField,
    pub w: ThetaPeriodicField,
    pub depth: MeanDepthField,
}

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

impl Scenario {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.version != SCENARIO_SCHEMA_VERSION {
            return Err(CoreError::domain(format!(
                "unsupported scenario schema version {} (expected {SCENARIO_SCHEMA_VERSION})",
                self.version
            )));
        }
        if self.m.n_components() != 2 {
            return Err(CoreError::domain("tide velocity M must have 2 components"));
        }
        if self.h.n_components() != 1 {
            return Err(CoreError::domain("depth variation H must be scalar"));
        }
        if self.w.n_components() != 2 {
            return Err(CoreError::domain("wind W must have 2 components"));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, CoreError> {
        let sc: Scenario = serde_json::from_str(s)
            .map_err(|e| CoreError::domain(format!("scenario parse error: {e}")))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// All forcing identically zero (still ocean, no wind).
    pub fn quiescent() -> Self {
        Scenario {
            version: SCENARIO_SCHEMA_VERSION,
            name: "quiescent".to_string(),
            m: ThetaPeriodicField::zero(2),
            h: ThetaPeriodicField::zero(1),
            w: ThetaPeriodicField::zero(2),
            depth: MeanDepthField::flat(),
        }
    }

    /// Default scenario: tide velocity with a dominant first harmonic and a
    /// slowly varying envelope, depth variation of the same shape, wind with
    /// a nonzero mean and a first-harmonic gust. Amplitudes are order one
    /// under the rescaling convention; phase means are chosen so the
    /// averaged advection, depth-gradient and wind-curl coefficients of the
    /// limit equation are all active.
    pub fn default_forcing() -> Self {
        use AxisFactor::{Cos, One, Sin};
        let t = TrigPoly::term;
        let slow_growth = Envelope {
            terms: vec![
                EnvelopeTerm {
                    coeff: 1.0,
                    power: 0,
                    rate: 0.0,
                },
                EnvelopeTerm {
                    coeff: 0.2,
                    power: 1,
                    rate: 0.0,
                },
            ],
        };

        let m1 = FieldComponent {
            harmonics: vec![
                Harmonic {
                    mode: 0,
                    cos: vec![Amplitude::new(TrigPoly {
                        terms: vec![
                            t(0.25, One, One),
                            t(0.15, One, Cos(1)),
                            t(0.10, Sin(1), One),
                        ],
                    })],
                    sin: vec![],
                },
                Harmonic {
                    mode: 1,
                    cos: vec![Amplitude {
                        envelope: slow_growth.clone(),
                        spatial: TrigPoly {
                            terms: vec![t(0.50, One, One), t(0.20, Sin(1), One)],
                        },
                    }],
                    sin: vec![Amplitude::new(TrigPoly {
                        terms: vec![t(0.30, One, Cos(1))],
                    })],
                },
            ],
        };
        let m2 = FieldComponent {
            harmonics: vec![
                Harmonic {
                    mode: 0,
                    cos: vec![Amplitude::new(TrigPoly {
                        terms: vec![t(0.10, One, One), t(0.10, Sin(1), One)],
                    })],
                    sin: vec![],
                },
                Harmonic {
                    mode: 1,
                    cos: vec![Amplitude {
                        envelope: slow_growth,
                        spatial: TrigPoly {
                            terms: vec![t(0.30, One, One), t(0.15, Cos(1), One)],
                        },
                    }],
                    sin: vec![],
                },
            ],
        };

        let h = FieldComponent {
            harmonics: vec![
                Harmonic {
                    mode: 0,
                    cos: vec![Amplitude::new(TrigPoly {
                        terms: vec![
                            t(0.20, One, One),
                            t(0.10, One, Sin(1)),
                            t(0.10, Cos(1), One),
                        ],
                    })],
                    sin: vec![],
                },
                Harmonic {
                    mode: 1,
                    cos: vec![Amplitude::new(TrigPoly {
                        terms: vec![t(0.30, One, One), t(0.10, Cos(1), One)],
                    })],
                    sin: vec![Amplitude::new(TrigPoly {
                        terms: vec![t(0.15, One, Sin(1))],
                    })],
                },
            ],
        };

        let w1 = FieldComponent {
            harmonics: vec![
                Harmonic {
                    mode: 0,
                    cos: vec![Amplitude::new(TrigPoly {
                        terms: vec![t(0.20, One, One), t(0.10, One, Sin(1))],
                    })],
                    sin: vec![],
                },
                Harmonic {
                    mode: 1,
                    cos: vec![Amplitude::new(TrigPoly::constant(0.15))],
                    sin: vec![],
                },
            ],
        };
        let w2 = FieldComponent {
            harmonics: vec![
                Harmonic {
                    mode: 0,
                    cos: vec![Amplitude::new(TrigPoly {
                        terms: vec![t(0.10, Cos(1), One)],
                    })],
                    sin: vec![],
                },
                Harmonic {
                    mode: 1,
                    sin: vec![Amplitude::new(TrigPoly {
                        terms: vec![t(0.10, One, Cos(1))],
                    })],
                    cos: vec![],
                },
            ],
        };

        Scenario {
            version: SCENARIO_SCHEMA_VERSION,
            name: "default-forcing".to_string(),
            m: ThetaPeriodicField {
                components: vec![m1, m2],
            },
            h: ThetaPeriodicField {
                components: vec![h],
            },
            w: ThetaPeriodicField {
                components: vec![w1, w2],
            },
            depth: MeanDepthField::flat(),
        }
    }

    /// Compile against a grid: caches the spatial factors and their first
    /// and second derivatives so per-step evaluation reduces to scaled
    /// accumulation.
    pub fn compile(&self, grid: TorusGrid) -> Result<ScenarioOnGrid, CoreError> {
        self.validate()?;
        let k0 = fundamental(grid);
        let e = ScalarField::from_fn(grid, |x, y| self.depth.value(x, y, k0));
        if e.min() <= 0.0 {
            return Err(CoreError::domain("mean depth E must be positive"));
        }
        let (e_dx, e_dy) = match (&self.depth.flat, &self.depth.variation) {
            (true, _) | (false, None) => (ScalarField::zeros(grid), ScalarField::zeros(grid)),
            (false, Some(p)) => (
                ScalarField::from_fn(grid, |x, y| p.ddx(x, y, k0)),
                ScalarField::from_fn(grid, |x, y| p.ddy(x, y, k0)),
            ),
        };
        Ok(ScenarioOnGrid {
            grid,
            m: GriddedField::compile(&self.m, grid),
            h: GriddedField::compile(&self.h, grid),
            w: GriddedField::compile(&self.w, grid),
            e,
            e_dx,
            e_dy,
        })
    }
}

/// Which cached spatial derivative of an amplitude to accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    Value,
    Dx,
    Dy,
    Dxx,
    Dyy,
}

struct GriddedAmplitude {
    envelope: Envelope,
    value: Vec<f64>,
    dx: Vec<f64>,
    dy: Vec<f64>,
    dxx: Vec<f64>,
    dyy: Vec<f64>,
}

impl GriddedAmplitude {
    fn compile(a: &Amplitude, grid: TorusGrid) -> Self {
        let k0 = fundamental(grid);
        let n = grid.len();
        let mut value = Vec::with_capacity(n);
        let mut dx = Vec::with_capacity(n);
        let mut dy = Vec::with_capacity(n);
        let mut dxx = Vec::with_capacity(n);
        let mut dyy = Vec::with_capacity(n);
        for i in 0..n {
            let (x, y) = grid.node(i);
            value.push(a.spatial.value(x, y, k0));
            dx.push(a.spatial.ddx(x, y, k0));
            dy.push(a.spatial.ddy(x, y, k0));
            // Second derivatives stay in the trig family:
            // d2/dx2 cos(mkx) = -(mk)^2 cos(mkx).
            let mut sxx = 0.0;
            let mut syy = 0.0;
            for term in &a.spatial.terms {
                let mx = term.fx.max_mode() as f64 * k0.0;
                let my = term.fy.max_mode() as f64 * k0.1;
                let v = term.coeff * term.fx.value(x, k0.0) * term.fy.value(y, k0.1);
                sxx += -mx * mx * v;
                syy += -my * my * v;
            }
            dxx.push(sxx);
            dyy.push(syy);
        }
        GriddedAmplitude {
            envelope: a.envelope.clone(),
            value,
            dx,
            dy,
            dxx,
            dyy,
        }
    }

    fn cached(&self, d: Deriv) -> &[f64] {
        match d {
            Deriv::Value => &self.value,
            Deriv::Dx => &self.dx,
            Deriv::Dy => &self.dy,
            Deriv::Dxx => &self.dxx,
            Deriv::Dyy => &self.dyy,
        }
    }
}

struct GriddedHarmonic {
    mode: u32,
    cos: Vec<GriddedAmplitude>,
    sin: Vec<GriddedAmplitude>,
}

struct GriddedComponent {
    harmonics: Vec<GriddedHarmonic>,
}

/// A theta-periodic field compiled against a grid.
pub struct GriddedField {
    pub grid: TorusGrid,
    components: Vec<GriddedComponent>,
}

impl GriddedField {
    pub fn compile(field: &ThetaPeriodicField, grid: TorusGrid) -> Self {
        let components = field
            .components
            .iter()
            .map(|c| GriddedComponent {
                harmonics: c
                    .harmonics
                    .iter()
                    .map(|h| GriddedHarmonic {
                        mode: h.mode,
                        cos: h.cos.iter().map(|a| GriddedAmplitude::compile(a, grid)).collect(),
                        sin: h.sin.iter().map(|a| GriddedAmplitude::compile(a, grid)).collect(),
                    })
                    .collect(),
            })
            .collect();
        GriddedField { grid, components }
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// `out = field derivative sampled at (t, theta)`.
    pub fn sample_into(&self, component: usize, d: Deriv, t: f64, theta: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.grid.len());
        out.fill(0.0);
        let th = theta - theta.floor();
        let two_pi = 2.0 * std::f64::consts::PI;
        for h in &self.components[component].harmonics {
            let arg = two_pi * h.mode as f64 * th;
            for (phase, amps) in [(arg.cos(), &h.cos), (arg.sin(), &h.sin)] {
                for a in amps {
                    let s = phase * a.envelope.value(t);
                    if s == 0.0 {
                        continue;
                    }
                    for (o, v) in out.iter_mut().zip(a.cached(d)) {
                        *o += s * v;
                    }
                }
            }
        }
    }

    /// Phase average (mode-zero cosine amplitudes) of a derivative at time t.
    pub fn average_into(&self, component: usize, d: Deriv, t: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.grid.len());
        out.fill(0.0);
        for h in &self.components[component].harmonics {
            if h.mode != 0 {
                continue;
            }
            for a in &h.cos {
                let s = a.envelope.value(t);
                for (o, v) in out.iter_mut().zip(a.cached(d)) {
                    *o += s * v;
                }
            }
        }
    }

    pub fn sample(&self, component: usize, d: Deriv, t: f64, theta: f64) -> ScalarField {
        let mut f = ScalarField::zeros(self.grid);
        self.sample_into(component, d, t, theta, &mut f.data);
        f
    }

    pub fn average(&self, component: usize, d: Deriv, t: f64) -> ScalarField {
        let mut f = ScalarField::zeros(self.grid);
        self.average_into(component, d, t, &mut f.data);
        f
    }

    /// Deterministic bound estimate: max pointwise vector magnitude over a
    /// lattice of phases and times. Used by the CFL law.
    pub fn max_magnitude_estimate(&self, t_max: f64) -> f64 {
        let mut best = 0.0_f64;
        let mut c0 = vec![0.0; self.grid.len()];
        let mut c1 = vec![0.0; self.grid.len()];
        for it in 0..=4 {
            let t = t_max * it as f64 / 4.0;
            for ith in 0..8 {
                let theta = ith as f64 / 8.0;
                self.sample_into(0, Deriv::Value, t, theta, &mut c0);
                if self.n_components() == 2 {
                    self.sample_into(1, Deriv::Value, t, theta, &mut c1);
                    for (a, b) in c0.iter().zip(&c1) {
                        best = best.max((a * a + b * b).sqrt());
                    }
                } else {
                    for a in &c0 {
                        best = best.max(a.abs());
                    }
                }
            }
        }
        best
    }
}

/// Compiled scenario: the three forcing fields plus the mean depth and its
/// gradient, all on one grid. Immutable after construction, safe to share.
pub struct ScenarioOnGrid {
    pub grid: TorusGrid,
    pub m: GriddedField,
    pub h: GriddedField,
    pub w: GriddedField,
    pub e: ScalarField,
    pub e_dx: ScalarField,
    pub e_dy: ScalarField,
}
