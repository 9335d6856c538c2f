//! Test functions for the weak space-time pairings.
//!
//! The pairing compares the stiff solution against the homogenized one
//! through `P(Psi) = integral over [0,T] x box of u . Psi`. Valid test
//! functions satisfy the limit constraint: they derive from a stream
//! potential `phi` as `Psi = (phi, -d phi/dx2, d phi/dx1)`, so the velocity
//! part is divergence-free and the `1/eps` terms cancel in the weak form.
//! A separable smooth time envelope vanishing at `t = T` is allowed.

use crate::error::CoreError;
use crate::fields::TrigPoly;
use crate::grid::{ScalarField, TorusGrid};
use crate::spectral;
use serde::{Deserialize, Serialize};

/// Separable time envelope on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeEnvelope {
    /// Constant one.
    One,
    /// `(1 - (t/T)^2)^power`, vanishing at the horizon.
    Bump { power: u32 },
}

impl TimeEnvelope {
    pub fn value(&self, t: f64, t_end: f64) -> f64 {
        match self {
            TimeEnvelope::One => 1.0,
            TimeEnvelope::Bump { power } => {
                if t_end <= 0.0 {
                    return 1.0;
                }
                let s = (t / t_end).clamp(0.0, 1.0);
                (1.0 - s * s).powi(*power as i32)
            }
        }
    }
}

/// Declarative test function: either a stream potential (always valid) or
/// raw components that must satisfy the constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum TestFunctionSpec {
    Stream {
        name: String,
        phi: TrigPoly,
        #[serde(default = "default_envelope")]
        envelope: TimeEnvelope,
    },
    Raw {
        name: String,
        psi1: TrigPoly,
        psi2: TrigPoly,
        psi3: TrigPoly,
        #[serde(default = "default_envelope")]
        envelope: TimeEnvelope,
    },
}

fn default_envelope() -> TimeEnvelope {
    TimeEnvelope::Bump { power: 2 }
}

impl TestFunctionSpec {
    pub fn name(&self) -> &str {
        match self {
            TestFunctionSpec::Stream { name, .. } | TestFunctionSpec::Raw { name, .. } => name,
        }
    }
}

/// A test function sampled on a grid: the three spatial components plus the
/// time envelope.
#[derive(Debug, Clone)]
pub struct CompiledTestFunction {
    pub name: String,
    pub envelope: TimeEnvelope,
    pub psi: [ScalarField; 3],
}

impl CompiledTestFunction {
    /// Build from a spec. Raw components are checked against the stream
    /// form; a triple that violates the constraint is rejected.
    pub fn compile(spec: &TestFunctionSpec, grid: TorusGrid) -> Result<Self, CoreError> {
        let k0 = (
            2.0 * std::f64::consts::PI / grid.lx,
            2.0 * std::f64::consts::PI / grid.ly,
        );
        match spec {
            TestFunctionSpec::Stream {
                name,
                phi,
                envelope,
            } => {
                let psi1 = phi.sample(grid);
                let psi2 = ScalarField::from_fn(grid, |x, y| -phi.ddy(x, y, k0));
                let psi3 = ScalarField::from_fn(grid, |x, y| phi.ddx(x, y, k0));
                Ok(CompiledTestFunction {
                    name: name.clone(),
                    envelope: *envelope,
                    psi: [psi1, psi2, psi3],
                })
            }
            TestFunctionSpec::Raw {
                name,
                psi1,
                psi2,
                psi3,
                envelope,
            } => {
                let p1 = psi1.sample(grid);
                let p2 = psi2.sample(grid);
                let p3 = psi3.sample(grid);
                let want2 = ScalarField::from_fn(grid, |x, y| -psi1.ddy(x, y, k0));
                let want3 = ScalarField::from_fn(grid, |x, y| psi1.ddx(x, y, k0));
                let err2 = max_diff(&p2, &want2);
                let err3 = max_diff(&p3, &want3);
                if err2 > 1e-9 || err3 > 1e-9 {
                    return Err(CoreError::domain(format!(
                        "test function '{name}' violates the limit constraint: required stream \
                         form Psi = (phi, -dphi/dx2, dphi/dx1) so that div(Psi2, Psi3) = 0 and \
                         (Psi2, Psi3)^perp + grad Psi1 = 0; deviations ({err2:.3e}, {err3:.3e})"
                    )));
                }
                Ok(CompiledTestFunction {
                    name: name.clone(),
                    envelope: *envelope,
                    psi: [p1, p2, p3],
                })
            }
        }
    }

    /// Spatial integral `integral(u . Psi)(t)`, the time integrand of the
    /// pairing.
    pub fn integrand(
        &self,
        c0: &ScalarField,
        c1: &ScalarField,
        c2: &ScalarField,
        t: f64,
        t_end: f64,
    ) -> Result<f64, CoreError> {
        for (a, b) in [(c0, &self.psi[0]), (c1, &self.psi[1]), (c2, &self.psi[2])] {
            a.same_grid(b)?;
        }
        let space =
            c0.dot_integral(&self.psi[0]) + c1.dot_integral(&self.psi[1]) + c2.dot_integral(&self.psi[2]);
        Ok(self.envelope.value(t, t_end) * space)
    }
}

/// Space-time pairing of a sampled trajectory against a test function:
/// trapezoidal rule in time, exact grid-sum quadrature in space.
pub fn pairing(
    times: &[f64],
    snapshots: &[[&ScalarField; 3]],
    tf: &CompiledTestFunction,
    t_end: f64,
) -> Result<f64, CoreError> {
    if times.len() != snapshots.len() {
        return Err(CoreError::domain(format!(
            "pairing: {} times vs {} snapshots",
            times.len(),
            snapshots.len()
        )));
    }
    let mut values = Vec::with_capacity(times.len());
    for (t, s) in times.iter().zip(snapshots) {
        values.push(tf.integrand(s[0], s[1], s[2], *t, t_end)?);
    }
    spectral::trapezoid(times, &values)
}

/// Default family: five low-mode stream potentials with a smooth envelope
/// vanishing at the horizon.
pub fn default_test_functions() -> Vec<TestFunctionSpec> {
    use crate::fields::AxisFactor::{Cos, One, Sin};
    let env = default_envelope();
    let poly = |terms: Vec<crate::fields::SpatialTerm>| TrigPoly { terms };
    vec![
        TestFunctionSpec::Stream {
            name: "mean".into(),
            phi: TrigPoly::constant(1.0),
            envelope: env,
        },
        TestFunctionSpec::Stream {
            name: "cos_x1".into(),
            phi: poly(vec![TrigPoly::term(1.0, Cos(1), One)]),
            envelope: env,
        },
        TestFunctionSpec::Stream {
            name: "sin_x2".into(),
            phi: poly(vec![TrigPoly::term(1.0, One, Sin(1))]),
            envelope: env,
        },
        TestFunctionSpec::Stream {
            name: "cos_x1_sin_x2".into(),
            phi: poly(vec![TrigPoly::term(1.0, Cos(1), Sin(1))]),
            envelope: env,
        },
        TestFunctionSpec::Stream {
            name: "sin_2x1".into(),
            phi: poly(vec![TrigPoly::term(1.0, Sin(2), One)]),
            envelope: env,
        },
    ]
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
