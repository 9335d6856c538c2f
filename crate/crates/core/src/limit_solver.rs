//! Homogenized limit solver.
//!
//! The fast oscillations of the stiff system average out in the limit: the
//! sea-level perturbation converges to a stream function `I`, the velocity
//! to `N = (-dI/dx2, dI/dx1)`, and `I` solves an oscillation-free evolution
//! equation driven by the phase-averaged tide and wind. The prognostic
//! variable here is `q = (1 - Laplacian) I`; each step advances `q` with
//! the classical four-stage scheme and refreshes `I` by exact Helmholtz
//! inversion, so no time differentiation of the elliptic operator is ever
//! needed and the `k = 0` mode stays well posed.
//!
//! No `1/eps` stiffness remains: the stable step is advective.

use crate::error::CoreError;
use crate::fields::{Deriv, ScenarioOnGrid};
use crate::full_solver::DiagnosticsRow;
use crate::grid::{ScalarField, TorusGrid, VectorField};
use crate::spectral::{self, SobolevIndex, Spectrum};
use crate::testfn::CompiledTestFunction;
use serde::{Deserialize, Serialize};

/// Which discrete form of the limit initial condition to use.
///
/// The printed initial condition reads
/// `q0 = iota0 + d(n0_1)/dx1 - d(n0_2)/dx2`, which is not the curl that the
/// stream-function relation composed with `(1 - Laplacian)` suggests; the
/// curl-consistent variant uses `q0 = iota0 - d(n0_2)/dx1 + d(n0_1)/dx2`.
/// Neither is presented as ground truth; comparisons run under both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitVariant {
    Printed,
    Curl,
}

impl InitVariant {
    pub fn label(&self) -> &'static str {
        match self {
            InitVariant::Printed => "printed",
            InitVariant::Curl => "curl",
        }
    }
}

/// Limit unknown: stream function `I` and prognostic `q = (1 - Lap) I`.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamState {
    pub i: ScalarField,
    pub q: ScalarField,
    pub time: f64,
}

impl StreamState {
    pub fn grid(&self) -> TorusGrid {
        self.q.grid
    }

    fn from_q(q: ScalarField, time: f64) -> Result<Self, CoreError> {
        let i = spectral::helmholtz_inverse(&q)?;
        Ok(StreamState { i, q, time })
    }

    /// `||(1 - Lap) I - q||_0`, maintained below 1e-10 after every step.
    pub fn helmholtz_residual(&self) -> Result<f64, CoreError> {
        let back = spectral::helmholtz_apply(&self.i)?;
        let mut diff = back;
        diff.axpy(-1.0, &self.q);
        Ok(diff.l2_norm())
    }
}

/// Build the limit initial state from the perturbation initial data.
pub fn init_from_perturbation(
    iota0: &ScalarField,
    n0: &VectorField,
    variant: InitVariant,
) -> Result<StreamState, CoreError> {
    iota0.same_grid(&n0.x)?;
    iota0.same_grid(&n0.y)?;
    let d1n1 = spectral::ddx(&n0.x)?;
    let d2n2 = spectral::ddy(&n0.y)?;
    let d1n2 = spectral::ddx(&n0.y)?;
    let d2n1 = spectral::ddy(&n0.x)?;
    let mut q = iota0.clone();
    match variant {
        InitVariant::Printed => {
            q.axpy(1.0, &d1n1);
            q.axpy(-1.0, &d2n2);
        }
        InitVariant::Curl => {
            q.axpy(-1.0, &d1n2);
            q.axpy(1.0, &d2n1);
        }
    }
    StreamState::from_q(q, 0.0)
}

/// Phase-averaged coefficients sampled at one time: averaged tide velocity
/// and its first derivatives, averaged depth gradient, averaged wind curl.
pub struct AveragedCoeffs {
    pub m1: ScalarField,
    pub m2: ScalarField,
    pub dm1_dx: ScalarField,
    pub dm1_dy: ScalarField,
    pub dm2_dx: ScalarField,
    pub dm2_dy: ScalarField,
    pub h_dx: ScalarField,
    pub h_dy: ScalarField,
    pub curl_w: ScalarField,
}

impl AveragedCoeffs {
    pub fn sample(scenario: &ScenarioOnGrid, t: f64) -> Self {
        let mut curl_w = scenario.w.average(0, Deriv::Dy, t);
        let w2_dx = scenario.w.average(1, Deriv::Dx, t);
        curl_w.axpy(-1.0, &w2_dx);
        AveragedCoeffs {
            m1: scenario.m.average(0, Deriv::Value, t),
            m2: scenario.m.average(1, Deriv::Value, t),
            dm1_dx: scenario.m.average(0, Deriv::Dx, t),
            dm1_dy: scenario.m.average(0, Deriv::Dy, t),
            dm2_dx: scenario.m.average(1, Deriv::Dx, t),
            dm2_dy: scenario.m.average(1, Deriv::Dy, t),
            h_dx: scenario.h.average(0, Deriv::Dx, t),
            h_dy: scenario.h.average(0, Deriv::Dy, t),
            curl_w,
        }
    }
}

/// Extra closed-form forcing (used by the manufactured-solution cases).
pub type Forcing<'a> = &'a dyn Fn(f64, f64, f64) -> f64;

/// Right-hand side `dq/dt` of the limit equation, signs exactly as the
/// effective equation states them:
///
/// `dq/dt = curl(avg W) - [ avg M . grad I
///         - d1(avgM1 I11) - d1(avgM2 I12) - d2(avgM1 I12) - d2(avgM2 I22)
///         - (grad avg H)^perp . grad I + div(avg M) I
///         + d1(d1 avgM2 I2) - d1(d2 avgM2 I1)
///         - d2(d1 avgM1 I2) + d2(d2 avgM1 I1) ]`
///
/// with all derivatives spectral and products dealiased.
pub fn assemble_limit_rhs(
    q: &ScalarField,
    coeffs: &AveragedCoeffs,
    t: f64,
    forcing: Option<Forcing>,
) -> Result<ScalarField, CoreError> {
    let grid = q.grid;
    let q_hat = Spectrum::from_field(q)?;
    let i_hat = q_hat.helmholtz_inverse();
    let i = i_hat.to_field()?;
    let i1 = i_hat.derivative(1, 0).to_field()?;
    let i2 = i_hat.derivative(0, 1).to_field()?;
    let i11 = i_hat.derivative(2, 0).to_field()?;
    let i22 = i_hat.derivative(0, 2).to_field()?;
    let i12 = i_hat.derivative(1, 1).to_field()?;

    let n = grid.len();
    let mut pointwise = vec![0.0; n];
    let mut flux1 = vec![0.0; n];
    let mut flux2 = vec![0.0; n];
    for idx in 0..n {
        let adv = coeffs.m1.data[idx] * i1.data[idx] + coeffs.m2.data[idx] * i2.data[idx];
        let grad_h_perp =
            -coeffs.h_dy.data[idx] * i1.data[idx] + coeffs.h_dx.data[idx] * i2.data[idx];
        let div_m = coeffs.dm1_dx.data[idx] + coeffs.dm2_dy.data[idx];
        pointwise[idx] =
            coeffs.curl_w.data[idx] - adv + grad_h_perp - div_m * i.data[idx];

        // Divergence-form groups, to be differentiated spectrally:
        // dq/dt += -d1(flux1) - d2(flux2).
        flux1[idx] = -coeffs.m1.data[idx] * i11.data[idx]
            - coeffs.m2.data[idx] * i12.data[idx]
            + coeffs.dm2_dx.data[idx] * i2.data[idx]
            - coeffs.dm2_dy.data[idx] * i1.data[idx];
        flux2[idx] = -coeffs.m1.data[idx] * i12.data[idx]
            - coeffs.m2.data[idx] * i22.data[idx]
            - coeffs.dm1_dx.data[idx] * i2.data[idx]
            + coeffs.dm1_dy.data[idx] * i1.data[idx];
    }

    if let Some(g) = forcing {
        for idx in 0..n {
            let (x, y) = grid.node(idx);
            pointwise[idx] += g(t, x, y);
        }
    }

    let f1 = ScalarField { grid, data: flux1 };
    let f2 = ScalarField { grid, data: flux2 };
    let d1 = spectral::ddx(&f1)?;
    let d2 = spectral::ddy(&f2)?;

    let mut out = ScalarField { grid, data: pointwise };
    out.axpy(-1.0, &d1);
    out.axpy(-1.0, &d2);
    spectral::dealias(&out)
}

/// One four-stage step on `q`; coefficients are sampled at the stage times
/// and `I` is refreshed by Helmholtz inversion afterwards.
pub fn step(
    state: &StreamState,
    dt: f64,
    scenario: &ScenarioOnGrid,
    forcing: Option<Forcing>,
) -> Result<StreamState, CoreError> {
    let t = state.time;
    let rhs = |q: &ScalarField, at: f64| -> Result<ScalarField, CoreError> {
        let coeffs = AveragedCoeffs::sample(scenario, at);
        assemble_limit_rhs(q, &coeffs, at, forcing)
    };

    let k1 = rhs(&state.q, t)?;
    let mut q2 = state.q.clone();
    q2.axpy(0.5 * dt, &k1);
    let k2 = rhs(&q2, t + 0.5 * dt)?;
    let mut q3 = state.q.clone();
    q3.axpy(0.5 * dt, &k2);
    let k3 = rhs(&q3, t + 0.5 * dt)?;
    let mut q4 = state.q.clone();
    q4.axpy(dt, &k3);
    let k4 = rhs(&q4, t + dt)?;

    let mut q_next = state.q.clone();
    q_next.axpy(dt / 6.0, &k1);
    q_next.axpy(dt / 3.0, &k2);
    q_next.axpy(dt / 3.0, &k3);
    q_next.axpy(dt / 6.0, &k4);
    if !q_next.is_finite() {
        return Err(CoreError::SolverAbort {
            time: t + dt,
            reason: "non-finite limit state after step".into(),
        });
    }
    StreamState::from_q(q_next, t + dt)
}

/// Velocity reconstruction `N = (-dI/dx2, dI/dx1)`.
pub fn reconstruct_n(state: &StreamState) -> Result<VectorField, CoreError> {
    let (ix, iy) = spectral::gradient(&state.i)?;
    let mut n1 = iy;
    n1.scale(-1.0);
    Ok(VectorField { x: n1, y: ix })
}

/// Constraint residuals of a reconstructed state:
/// `(||div N||_0, ||N^perp + grad I||_0)`.
pub fn constraint_residuals(state: &StreamState) -> Result<(f64, f64), CoreError> {
    let n = reconstruct_n(state)?;
    let div = {
        let dx = spectral::ddx(&n.x)?;
        let dy = spectral::ddy(&n.y)?;
        let mut s = dx;
        s.axpy(1.0, &dy);
        s.l2_norm()
    };
    let (ix, iy) = spectral::gradient(&state.i)?;
    // N^perp = (-N2, N1); residual components: ix - N2, iy + N1.
    let mut r1 = ix;
    r1.axpy(-1.0, &n.y);
    let mut r2 = iy;
    r2.axpy(1.0, &n.x);
    let stream = (r1.l2_norm().powi(2) + r2.l2_norm().powi(2)).sqrt();
    Ok((div, stream))
}

/// Run configuration for the limit solver.
#[derive(Debug, Clone)]
pub struct LimitRunConfig {
    pub t_end: f64,
    /// Advective CFL safety in `(0, 1]`.
    pub cfl_safety: f64,
    pub output_stride: usize,
    /// Lower bound on the number of steps (keeps the pairing quadrature
    /// resolved even when advection is slow).
    pub min_steps: usize,
}

impl LimitRunConfig {
    pub fn new(t_end: f64) -> Self {
        LimitRunConfig {
            t_end,
            cfl_safety: 0.5,
            output_stride: 8,
            min_steps: 64,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.t_end >= 0.0) {
            return Err(CoreError::domain("t_end must be nonnegative"));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(CoreError::domain("cfl_safety must be in (0,1]"));
        }
        if self.output_stride == 0 || self.min_steps == 0 {
            return Err(CoreError::domain("strides must be positive"));
        }
        Ok(())
    }
}

/// Diagnostics row of the limit run: the shared solver columns plus the
/// constraint residuals. The depth factor converges to one in the limit,
/// so that column is identically one here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitDiagnosticsRow {
    pub base: DiagnosticsRow,
    pub div_n_residual: f64,
    pub stream_residual: f64,
    pub helmholtz_residual: f64,
}

pub fn limit_diagnostics_csv(rows: &[LimitDiagnosticsRow]) -> String {
    let mut out = String::from(
        "time,h4_norm,l2_norm,min_depth_factor,max_abs_u,div_n_residual,stream_residual,helmholtz_residual\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.base.time,
            r.base.h4_norm,
            r.base.l2_norm,
            r.base.min_depth_factor,
            r.base.max_abs_u,
            r.div_n_residual,
            r.stream_residual,
            r.helmholtz_residual
        ));
    }
    out
}

/// Outputs of a limit run.
#[derive(Debug, Clone)]
pub struct LimitTrajectory {
    pub dt: f64,
    pub n_steps: usize,
    pub times: Vec<f64>,
    pub snapshots: Vec<StreamState>,
    pub diagnostics: Vec<LimitDiagnosticsRow>,
    /// Pairings of `(I, N1, N2)` against each test function.
    pub pairings: Vec<f64>,
}

fn limit_diagnostics_at(state: &StreamState) -> Result<LimitDiagnosticsRow, CoreError> {
    let n = reconstruct_n(state)?;
    let comps = [&state.i, &n.x, &n.y];
    let (div_res, stream_res) = constraint_residuals(state)?;
    Ok(LimitDiagnosticsRow {
        base: DiagnosticsRow {
            time: state.time,
            h4_norm: spectral::sobolev_norm_multi(&comps, SobolevIndex::monitoring())?,
            l2_norm: spectral::sobolev_norm_multi(&comps, SobolevIndex::new(0.0)?)?,
            min_depth_factor: 1.0,
            max_abs_u: state.i.max_abs().max(n.max_abs()),
        },
        div_n_residual: div_res,
        stream_residual: stream_res,
        helmholtz_residual: state.helmholtz_residual()?,
    })
}

/// Integrate the limit equation to the horizon. The step needs no `eps`:
/// it is advective, `dt = safety * min(h) / (1 + max|avg M|)`, capped so at
/// least `min_steps` are taken.
pub fn run_limit(
    config: &LimitRunConfig,
    scenario: &ScenarioOnGrid,
    initial: &StreamState,
    test_functions: &[CompiledTestFunction],
    forcing: Option<Forcing>,
) -> Result<LimitTrajectory, CoreError> {
    config.validate()?;
    let grid = scenario.grid;
    if initial.grid() != grid {
        return Err(CoreError::GridMismatch(
            "initial state and scenario grids differ".into(),
        ));
    }

    // Truncate the initial data to the 2/3 band like the stiff solver
    // does; the dealiased right-hand side never updates the upper third.
    let mut state = StreamState::from_q(spectral::dealias(&initial.q)?, 0.0)?;
    state.time = 0.0;

    let (dt, n_steps) = if config.t_end == 0.0 {
        (0.0, 0)
    } else {
        let max_m = scenario.m.max_magnitude_estimate(config.t_end);
        let (hx, hy) = grid.spacing();
        let raw = config.cfl_safety * hx.min(hy) / (1.0 + max_m);
        let n = (config.t_end / raw).ceil().max(config.min_steps as f64) as usize;
        (config.t_end / n as f64, n)
    };

    let mut traj = LimitTrajectory {
        dt,
        n_steps,
        times: vec![],
        snapshots: vec![],
        diagnostics: vec![],
        pairings: vec![0.0; test_functions.len()],
    };

    let record = |traj: &mut LimitTrajectory, state: &StreamState| -> Result<(), CoreError> {
        traj.diagnostics.push(limit_diagnostics_at(state)?);
        traj.times.push(state.time);
        traj.snapshots.push(state.clone());
        Ok(())
    };
    record(&mut traj, &state)?;

    let integrand = |state: &StreamState, t: f64| -> Result<Vec<f64>, CoreError> {
        let n = reconstruct_n(state)?;
        test_functions
            .iter()
            .map(|tf| tf.integrand(&state.i, &n.x, &n.y, t, config.t_end))
            .collect()
    };
    let mut prev = integrand(&state, 0.0)?;

    for s in 1..=n_steps {
        state = step(&state, dt, scenario, forcing)?;
        state.time = dt * s as f64;
        let cur = integrand(&state, state.time)?;
        for ((acc, p), c) in traj.pairings.iter_mut().zip(prev.iter_mut()).zip(&cur) {
            *acc += 0.5 * dt * (*p + c);
            *p = *c;
        }
        if s % config.output_stride == 0 || s == n_steps {
            record(&mut traj, &state)?;
        }
    }
    Ok(traj)
}

/// Manufactured cases: exact stream function plus the closed-form forcing
/// that makes it solve the limit equation under uniform averaged advection
/// `avg M = (1, 0)`, `avg H = 0`, `avg W = 0` (where the equation reduces
/// to `dq/dt + dq/dx1 = g`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmsCase {
    /// `I = exp(-t) sin(x1) sin(x2)`: band-limited, for temporal order.
    BandLimited,
    /// `I = exp(-t) exp(a cos x1 + a sin x2)`, `a = 2`: full spectrum, for
    /// spatial convergence.
    WideSpectrum,
}

impl MmsCase {
    pub fn exact_i(&self, t: f64, x: f64, y: f64) -> f64 {
        match self {
            MmsCase::BandLimited => (-t).exp() * x.sin() * y.sin(),
            MmsCase::WideSpectrum => {
                let a = 2.0;
                (-t).exp() * (a * x.cos() + a * y.sin()).exp()
            }
        }
    }

    pub fn exact_q(&self, t: f64, x: f64, y: f64) -> f64 {
        match self {
            MmsCase::BandLimited => 3.0 * (-t).exp() * x.sin() * y.sin(),
            MmsCase::WideSpectrum => {
                let a = 2.0;
                let g = (a * x.cos() + a * y.sin()).exp();
                // q = (1 - Lap) I = e^{-t} P(x) G(x) with
                // P = 1 + a cos x1 - a^2 sin^2 x1 + a sin x2 - a^2 cos^2 x2.
                let p = 1.0 + a * x.cos() - a * a * x.sin() * x.sin() + a * y.sin()
                    - a * a * y.cos() * y.cos();
                (-t).exp() * p * g
            }
        }
    }

    /// Forcing `g = dq*/dt + dq*/dx1`.
    pub fn forcing(&self, t: f64, x: f64, y: f64) -> f64 {
        match self {
            MmsCase::BandLimited => 3.0 * (-t).exp() * y.sin() * (x.cos() - x.sin()),
            MmsCase::WideSpectrum => {
                let a = 2.0;
                let g = (a * x.cos() + a * y.sin()).exp();
                let p = 1.0 + a * x.cos() - a * a * x.sin() * x.sin() + a * y.sin()
                    - a * a * y.cos() * y.cos();
                let p1 = -a * x.sin() - 2.0 * a * a * x.sin() * x.cos();
                // dq/dt = -q; dq/dx1 = e^{-t} (P1 G + P G1), G1 = -a sin x1 G.
                (-t).exp() * g * (-p + p1 - a * x.sin() * p)
            }
        }
    }

    pub fn initial_state(&self, grid: TorusGrid) -> Result<StreamState, CoreError> {
        let q0 = ScalarField::from_fn(grid, |x, y| self.exact_q(0.0, x, y));
        StreamState::from_q(q0, 0.0)
    }

    /// L2 error of `q` against the exact solution at the state's time.
    pub fn q_error(&self, state: &StreamState) -> f64 {
        let grid = state.grid();
        let exact = ScalarField::from_fn(grid, |x, y| self.exact_q(state.time, x, y));
        let mut diff = state.q.clone();
        diff.axpy(-1.0, &exact);
        diff.l2_norm()
    }
}

/// Scenario whose averaged coefficients are `avg M = (1, 0)`, `avg H = 0`,
/// `avg W = 0`, as the manufactured cases require.
pub fn uniform_advection_scenario() -> crate::fields::Scenario {
    use crate::fields::*;
    let mut sc = Scenario::quiescent();
    sc.name = "uniform-advection".to_string();
    sc.m.components[0].harmonics.push(Harmonic {
        mode: 0,
        cos: vec![Amplitude::new(TrigPoly::constant(1.0))],
        sin: vec![],
    });
    sc
}

/// Manufactured-solution verification report.
#[derive(Debug, Clone)]
pub struct MmsReport {
    /// `(grid size, L2 error of q at the horizon)` for the wide-spectrum
    /// case at fixed small step.
    pub spatial: Vec<(usize, f64)>,
    /// `(dt, error)` for the band-limited case on a fixed grid.
    pub temporal: Vec<(f64, f64)>,
    /// Observed orders from consecutive dt halvings.
    pub temporal_orders: Vec<f64>,
}

impl MmsReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("study,parameter,error\n");
        for (n, e) in &self.spatial {
            out.push_str(&format!("spatial,{n},{e:.16e}\n"));
        }
        for (dt, e) in &self.temporal {
            out.push_str(&format!("temporal,{dt:.16e},{e:.16e}\n"));
        }
        out
    }
}

fn mms_run(case: MmsCase, n: usize, t_end: f64, dt: f64) -> Result<StreamState, CoreError> {
    let grid = TorusGrid::square(n)?;
    let scenario = uniform_advection_scenario().compile(grid)?;
    let mut state = case.initial_state(grid)?;
    let steps = (t_end / dt).round() as usize;
    let forcing = move |t: f64, x: f64, y: f64| case.forcing(t, x, y);
    for s in 1..=steps {
        state = step(&state, dt, &scenario, Some(&forcing))?;
        state.time = dt * s as f64;
    }
    Ok(state)
}

/// Fixed manufactured-solution study: spatial refinement 8 -> 16 -> 32 on
/// the wide-spectrum case (dt = 1e-3, T = 0.25) and dt halvings
/// 0.05 -> 0.0125 on the band-limited case (32^2, T = 1).
pub fn run_mms_study() -> Result<MmsReport, CoreError> {
    let mut spatial = Vec::new();
    for n in [8usize, 16, 32] {
        let state = mms_run(MmsCase::WideSpectrum, n, 0.25, 1e-3)?;
        spatial.push((n, MmsCase::WideSpectrum.q_error(&state)));
    }

    let mut temporal = Vec::new();
    for dt in [0.05, 0.025, 0.0125] {
        let state = mms_run(MmsCase::BandLimited, 32, 1.0, dt)?;
        temporal.push((dt, MmsCase::BandLimited.q_error(&state)));
    }
    let temporal_orders = temporal
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).log2())
        .collect();
    Ok(MmsReport {
        spatial,
        temporal,
        temporal_orders,
    })
}
