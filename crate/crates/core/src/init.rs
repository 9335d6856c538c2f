//! Initial data for the perturbation solver.
//!
//! The default is a smooth periodic bump in the sea-level perturbation and
//! a velocity split into a dominant divergence-free part from a stream bump
//! plus a 10% gradient (compressible) part; it excites both the constrained
//! slow dynamics and the fast oscillatory transient.

use crate::error::CoreError;
use crate::full_solver::State;
use crate::grid::{ScalarField, TorusGrid, VectorField};
use serde::{Deserialize, Serialize};

/// Periodic Gaussian-like bump centered at fractions `(cx, cy)` of the box:
/// `exp(w (cos(k0x (x - cx lx)) - 1) + w (cos(k0y (y - cy ly)) - 1))`.
#[derive(Debug, Clone, Copy)]
struct Bump {
    cx: f64,
    cy: f64,
    width: f64,
}

impl Bump {
    fn value(&self, grid: TorusGrid, x: f64, y: f64) -> f64 {
        let kx = 2.0 * std::f64::consts::PI / grid.lx;
        let ky = 2.0 * std::f64::consts::PI / grid.ly;
        let ax = kx * (x - self.cx * grid.lx);
        let ay = ky * (y - self.cy * grid.ly);
        (self.width * (ax.cos() - 1.0) + self.width * (ay.cos() - 1.0)).exp()
    }

    fn ddx(&self, grid: TorusGrid, x: f64, y: f64) -> f64 {
        let kx = 2.0 * std::f64::consts::PI / grid.lx;
        let ax = kx * (x - self.cx * grid.lx);
        -self.width * kx * ax.sin() * self.value(grid, x, y)
    }

    fn ddy(&self, grid: TorusGrid, x: f64, y: f64) -> f64 {
        let ky = 2.0 * std::f64::consts::PI / grid.ly;
        let ay = ky * (y - self.cy * grid.ly);
        -self.width * ky * ay.sin() * self.value(grid, x, y)
    }
}

/// Declarative initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum InitialData {
    /// Everything zero.
    Zero,
    /// Spatially constant velocity, constant sea-level perturbation.
    ConstantVelocity { n1: f64, n2: f64, iota: f64 },
    /// The default bump data described above, scaled by `amplitude`.
    DefaultBump { amplitude: f64 },
    /// `iota0 = amplitude (1 + |k|^2) sin(k . x)`, zero velocity.
    SingleModeIota { mx: u32, my: u32, amplitude: f64 },
}

impl InitialData {
    pub fn default_bump() -> Self {
        InitialData::DefaultBump { amplitude: 0.8 }
    }

    pub fn build(&self, grid: TorusGrid) -> Result<State, CoreError> {
        match *self {
            InitialData::Zero => Ok(State::zeros(grid)),
            InitialData::ConstantVelocity { n1, n2, iota } => {
                if ![n1, n2, iota].iter().all(|v| v.is_finite()) {
                    return Err(CoreError::domain("non-finite initial constants"));
                }
                Ok(State {
                    iota: ScalarField::constant(grid, iota),
                    n: VectorField {
                        x: ScalarField::constant(grid, n1),
                        y: ScalarField::constant(grid, n2),
                    },
                    time: 0.0,
                })
            }
            InitialData::DefaultBump { amplitude } => {
                if !amplitude.is_finite() {
                    return Err(CoreError::domain("non-finite amplitude"));
                }
                let height = Bump {
                    cx: 0.5,
                    cy: 0.5,
                    width: 2.0,
                };
                let stream = Bump {
                    cx: 0.4,
                    cy: 0.55,
                    width: 2.0,
                };
                let potential = Bump {
                    cx: 0.65,
                    cy: 0.35,
                    width: 2.0,
                };
                let iota =
                    ScalarField::from_fn(grid, |x, y| amplitude * height.value(grid, x, y));
                // n = rot part + 0.1 * gradient part.
                let n1 = ScalarField::from_fn(grid, |x, y| {
                    amplitude * (-0.6 * stream.ddy(grid, x, y) + 0.1 * 0.4 * potential.ddx(grid, x, y))
                });
                let n2 = ScalarField::from_fn(grid, |x, y| {
                    amplitude * (0.6 * stream.ddx(grid, x, y) + 0.1 * 0.4 * potential.ddy(grid, x, y))
                });
                Ok(State {
                    iota,
                    n: VectorField { x: n1, y: n2 },
                    time: 0.0,
                })
            }
            InitialData::SingleModeIota { mx, my, amplitude } => {
                let kx = 2.0 * std::f64::consts::PI * mx as f64 / grid.lx;
                let ky = 2.0 * std::f64::consts::PI * my as f64 / grid.ly;
                let k2 = kx * kx + ky * ky;
                let iota = ScalarField::from_fn(grid, |x, y| {
                    amplitude * (1.0 + k2) * (kx * x + ky * y).sin()
                });
                Ok(State {
                    iota,
                    n: VectorField::zeros(grid),
                    time: 0.0,
                })
            }
        }
    }
}
