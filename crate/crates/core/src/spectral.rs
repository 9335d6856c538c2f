//! Periodic-grid spectral kernel: transforms, exact derivatives, Helmholtz
//! inversion, 2/3-rule dealiasing, Sobolev norms and time pairings.
//!
//! Transform normalization: the forward transform is unnormalized,
//! `f_hat(k) = sum_x f(x) exp(-i k.x)`; the inverse divides by `nx * ny`.
//! All norm formulas below are stated under this convention.
//!
//! Fields are real-valued; spectra are kept conjugate-symmetric by
//! construction and the inverse transform verifies that the imaginary
//! residue stays below `SYMMETRY_TOL` (relative), failing loudly otherwise.

use crate::error::CoreError;
use crate::grid::{ScalarField, TorusGrid};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Relative bound on the imaginary residue of an inverse transform.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Sobolev smoothness index `s >= 0` for the discrete `H^s` norm.
///
/// The uniform-bound monitoring of the stiff solver uses `s = 4`; the
/// underlying estimate needs `s > 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self, CoreError> {
        if !s.is_finite() || s < 0.0 {
            return Err(CoreError::domain(format!(
                "Sobolev index must be finite and >= 0, got {s}"
            )));
        }
        Ok(SobolevIndex(s))
    }

    /// Index used for the solver's norm monitoring.
    pub fn monitoring() -> Self {
        SobolevIndex(4.0)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

// Plans are cached per (length, direction); rustfft plans are Send + Sync.
static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("fft plan cache poisoned");
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            }
        })
        .clone()
}

fn transpose(src: &[Complex<f64>], dst: &mut [Complex<f64>], rows: usize, cols: usize) {
    // src is rows x cols (cols fast), dst becomes cols x rows.
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

fn fft2_in_place(grid: TorusGrid, data: &mut [Complex<f64>], forward: bool) {
    debug_assert_eq!(data.len(), grid.len());
    plan(grid.nx, forward).process(data);
    let mut t = vec![Complex::new(0.0, 0.0); data.len()];
    transpose(data, &mut t, grid.ny, grid.nx);
    plan(grid.ny, forward).process(&mut t);
    transpose(&t, data, grid.nx, grid.ny);
}

/// Complex spectrum of a real field.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: TorusGrid,
    pub data: Vec<Complex<f64>>,
}

impl Spectrum {
    pub fn from_field(f: &ScalarField) -> Result<Self, CoreError> {
        if !f.is_finite() {
            return Err(CoreError::numeric("non-finite values in field"));
        }
        let mut data: Vec<Complex<f64>> =
            f.data.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft2_in_place(f.grid, &mut data, true);
        Ok(Spectrum { grid: f.grid, data })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Spectrum {
            grid,
            data: vec![Complex::new(0.0, 0.0); grid.len()],
        }
    }

    /// Inverse transform. Fails if the spectrum has lost conjugate symmetry
    /// (imaginary residue above [`SYMMETRY_TOL`] relative to the field).
    pub fn to_field(&self) -> Result<ScalarField, CoreError> {
        let mut work = self.data.clone();
        fft2_in_place(self.grid, &mut work, false);
        let norm = 1.0 / self.grid.len() as f64;
        let mut max_re = 0.0_f64;
        let mut max_im = 0.0_f64;
        for v in work.iter() {
            max_re = max_re.max((v.re * norm).abs());
            max_im = max_im.max((v.im * norm).abs());
        }
        if max_im > SYMMETRY_TOL * max_re.max(1.0) {
            return Err(CoreError::numeric(format!(
                "conjugate symmetry lost: max imaginary residue {max_im:.3e} vs field scale {max_re:.3e}"
            )));
        }
        Ok(ScalarField {
            grid: self.grid,
            data: work.iter().map(|v| v.re * norm).collect(),
        })
    }

    /// Spectral derivative `d^ox/dx1^ox d^oy/dx2^oy`.
    ///
    /// For odd orders the Nyquist column/row has no conjugate partner and is
    /// zeroed, the standard convention for real output.
    pub fn derivative(&self, ox: u32, oy: u32) -> Spectrum {
        let g = self.grid;
        let mut out = self.data.clone();
        for iy in 0..g.ny {
            let fy = axis_factor(g.ky(iy), oy, iy == g.ny / 2);
            for ix in 0..g.nx {
                let fx = axis_factor(g.kx(ix), ox, ix == g.nx / 2);
                out[iy * g.nx + ix] *= fx * fy;
            }
        }
        Spectrum { grid: g, data: out }
    }

    /// Solve `(1 - Laplacian) u = self`; the symbol `1 + |k|^2` never
    /// vanishes so the inverse is exact mode by mode.
    pub fn helmholtz_inverse(&self) -> Spectrum {
        self.helmholtz_scaled(|k2| 1.0 / (1.0 + k2))
    }

    /// Apply `(1 - Laplacian)`.
    pub fn helmholtz_apply(&self) -> Spectrum {
        self.helmholtz_scaled(|k2| 1.0 + k2)
    }

    fn helmholtz_scaled(&self, sym: impl Fn(f64) -> f64) -> Spectrum {
        let g = self.grid;
        let mut out = self.data.clone();
        for iy in 0..g.ny {
            let ky = g.ky(iy);
            for ix in 0..g.nx {
                let kx = g.kx(ix);
                out[iy * g.nx + ix] *= sym(kx * kx + ky * ky);
            }
        }
        Spectrum { grid: g, data: out }
    }

    /// 2/3-rule truncation: zero every mode with `3|mx| > nx` or
    /// `3|my| > ny`. Idempotent.
    pub fn dealias(&mut self) {
        let g = self.grid;
        for iy in 0..g.ny {
            let my = g.mode_y(iy).unsigned_abs() as usize;
            for ix in 0..g.nx {
                let mx = g.mode_x(ix).unsigned_abs() as usize;
                if 3 * mx > g.nx || 3 * my > g.ny {
                    self.data[iy * g.nx + ix] = Complex::new(0.0, 0.0);
                }
            }
        }
    }

    /// Squared discrete `H^s` norm,
    /// `lx*ly/(nx*ny)^2 * sum_k (1+|k|^2)^s |f_hat(k)|^2`,
    /// normalized so `s = 0` recovers the L2 norm on the torus.
    pub fn sobolev_norm_sq(&self, s: SobolevIndex) -> f64 {
        let g = self.grid;
        let mut acc = 0.0;
        for iy in 0..g.ny {
            let ky = g.ky(iy);
            for ix in 0..g.nx {
                let kx = g.kx(ix);
                let w = (1.0 + kx * kx + ky * ky).powf(s.value());
                acc += w * self.data[iy * g.nx + ix].norm_sqr();
            }
        }
        acc * g.lx * g.ly / (g.len() as f64 * g.len() as f64)
    }
}

fn axis_factor(k: f64, order: u32, nyquist: bool) -> Complex<f64> {
    if order == 0 {
        return Complex::new(1.0, 0.0);
    }
    if nyquist && order % 2 == 1 {
        return Complex::new(0.0, 0.0);
    }
    Complex::new(0.0, k).powu(order)
}

/// Exact spectral `d/dx1`.
pub fn ddx(f: &ScalarField) -> Result<ScalarField, CoreError> {
    Spectrum::from_field(f)?.derivative(1, 0).to_field()
}

/// Exact spectral `d/dx2`.
pub fn ddy(f: &ScalarField) -> Result<ScalarField, CoreError> {
    Spectrum::from_field(f)?.derivative(0, 1).to_field()
}

/// Both first derivatives from a single forward transform.
pub fn gradient(f: &ScalarField) -> Result<(ScalarField, ScalarField), CoreError> {
    let spec = Spectrum::from_field(f)?;
    Ok((
        spec.derivative(1, 0).to_field()?,
        spec.derivative(0, 1).to_field()?,
    ))
}

pub fn laplacian(f: &ScalarField) -> Result<ScalarField, CoreError> {
    let spec = Spectrum::from_field(f)?;
    let mut out = spec.derivative(2, 0);
    let dyy = spec.derivative(0, 2);
    for (a, b) in out.data.iter_mut().zip(&dyy.data) {
        *a += b;
    }
    out.to_field()
}

/// Solve `(1 - Laplacian) u = q`.
pub fn helmholtz_inverse(q: &ScalarField) -> Result<ScalarField, CoreError> {
    Spectrum::from_field(q)?.helmholtz_inverse().to_field()
}

/// Apply `(1 - Laplacian)` to a field.
pub fn helmholtz_apply(f: &ScalarField) -> Result<ScalarField, CoreError> {
    Spectrum::from_field(f)?.helmholtz_apply().to_field()
}

/// 2/3-rule dealiasing of a field.
pub fn dealias(f: &ScalarField) -> Result<ScalarField, CoreError> {
    let mut spec = Spectrum::from_field(f)?;
    spec.dealias();
    spec.to_field()
}

/// Discrete `H^s` norm of a scalar field.
pub fn sobolev_norm(f: &ScalarField, s: SobolevIndex) -> Result<f64, CoreError> {
    Ok(Spectrum::from_field(f)?.sobolev_norm_sq(s).sqrt())
}

/// Discrete `H^s` norm of a multi-component field (square-sum over
/// components).
pub fn sobolev_norm_multi(fs: &[&ScalarField], s: SobolevIndex) -> Result<f64, CoreError> {
    let mut acc = 0.0;
    for f in fs {
        acc += Spectrum::from_field(f)?.sobolev_norm_sq(s);
    }
    Ok(acc.sqrt())
}

/// Trapezoidal rule over sampled values of a time integrand.
///
/// `times` must be strictly increasing; used for the space-time pairings
/// where `values[i]` is the spatial integral at `times[i]`.
pub fn trapezoid(times: &[f64], values: &[f64]) -> Result<f64, CoreError> {
    if times.len() != values.len() {
        return Err(CoreError::domain(format!(
            "trapezoid: {} times vs {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < 2 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for i in 0..times.len() - 1 {
        let dt = times[i + 1] - times[i];
        if dt <= 0.0 {
            return Err(CoreError::domain("trapezoid: times not increasing"));
        }
        acc += 0.5 * dt * (values[i] + values[i + 1]);
    }
    Ok(acc)
}
