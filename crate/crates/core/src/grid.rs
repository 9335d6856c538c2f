//! Periodic grid and real-valued fields on it.
//!
//! Fields are stored row-major with `x1` the fast axis:
//! `data[iy * nx + ix]` holds the value at
//! `(x1, x2) = (ix * lx / nx, iy * ly / ny)`.

use crate::error::CoreError;
use serde::{Deserialize, Serialize};

/// Uniform periodic grid on `[0, lx) x [0, ly)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl TorusGrid {
    /// Grid with the default `2*pi` square box.
    pub fn square(n: usize) -> Result<Self, CoreError> {
        Self::new(n, n, 2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI)
    }

    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self, CoreError> {
        if nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0 {
            return Err(CoreError::domain(format!(
                "grid sizes must be even and >= 8, got {nx} x {ny}"
            )));
        }
        if !(lx > 0.0) || !(ly > 0.0) {
            return Err(CoreError::domain(format!(
                "domain periods must be positive, got {lx} x {ly}"
            )));
        }
        Ok(TorusGrid { nx, ny, lx, ly })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacings `(hx, hy)`.
    pub fn spacing(&self) -> (f64, f64) {
        (self.lx / self.nx as f64, self.ly / self.ny as f64)
    }

    /// Area of one grid cell.
    pub fn cell_area(&self) -> f64 {
        let (hx, hy) = self.spacing();
        hx * hy
    }

    /// Node coordinates for flat index `i = iy * nx + ix`.
    pub fn node(&self, i: usize) -> (f64, f64) {
        let (hx, hy) = self.spacing();
        let ix = i % self.nx;
        let iy = i / self.nx;
        (ix as f64 * hx, iy as f64 * hy)
    }

    /// Signed wavenumber along x1 for column index `ix`, in physical units
    /// `2*pi*m/lx` with `m` the signed integer mode.
    pub fn kx(&self, ix: usize) -> f64 {
        let m = if ix <= self.nx / 2 {
            ix as f64
        } else {
            ix as f64 - self.nx as f64
        };
        2.0 * std::f64::consts::PI * m / self.lx
    }

    /// Signed wavenumber along x2 for row index `iy`.
    pub fn ky(&self, iy: usize) -> f64 {
        let m = if iy <= self.ny / 2 {
            iy as f64
        } else {
            iy as f64 - self.ny as f64
        };
        2.0 * std::f64::consts::PI * m / self.ly
    }

    /// Signed integer mode along x1 for column index `ix`.
    pub fn mode_x(&self, ix: usize) -> i64 {
        if ix <= self.nx / 2 {
            ix as i64
        } else {
            ix as i64 - self.nx as i64
        }
    }

    /// Signed integer mode along x2 for row index `iy`.
    pub fn mode_y(&self, iy: usize) -> i64 {
        if iy <= self.ny / 2 {
            iy as i64
        } else {
            iy as i64 - self.ny as i64
        }
    }
}

/// Real scalar field sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: TorusGrid,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: TorusGrid) -> Self {
        ScalarField {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        ScalarField {
            grid,
            data: vec![c; grid.len()],
        }
    }

    /// Sample a closed-form function of `(x1, x2)` at the nodes.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let (x, y) = grid.node(i);
            data.push(f(x, y));
        }
        ScalarField { grid, data }
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<(), CoreError> {
        if self.grid != other.grid {
            return Err(CoreError::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self += a * other`, panics on grid mismatch (internal arithmetic).
    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        assert_eq!(self.grid, other.grid);
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for s in self.data.iter_mut() {
            *s *= a;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Exact quadrature of the trigonometric interpolant: grid sum times
    /// cell area.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// `integral(self * other)` by grid sum; exact for band-limited factors
    /// whose combined bandwidth fits the grid.
    pub fn dot_integral(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.grid, other.grid);
        let s: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum();
        s * self.grid.cell_area()
    }

    /// Discrete L2 norm on the torus, `sqrt(integral(self^2))`.
    pub fn l2_norm(&self) -> f64 {
        self.dot_integral(self).sqrt()
    }
}

/// Real 2-component vector field on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn zeros(grid: TorusGrid) -> Self {
        VectorField {
            x: ScalarField::zeros(grid),
            y: ScalarField::zeros(grid),
        }
    }

    pub fn from_fns(
        grid: TorusGrid,
        fx: impl Fn(f64, f64) -> f64,
        fy: impl Fn(f64, f64) -> f64,
    ) -> Self {
        VectorField {
            x: ScalarField::from_fn(grid, fx),
            y: ScalarField::from_fn(grid, fy),
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.x.grid
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        self.x.axpy(a, &other.x);
        self.y.axpy(a, &other.y);
    }

    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }

    /// Pointwise Euclidean magnitude maximum.
    pub fn max_magnitude(&self) -> f64 {
        self.x
            .data
            .iter()
            .zip(&self.y.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a * a + b * b).sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_odd_grids() {
        assert!(TorusGrid::new(6, 8, 1.0, 1.0).is_err());
        assert!(TorusGrid::new(8, 9, 1.0, 1.0).is_err());
        assert!(TorusGrid::new(8, 8, 0.0, 1.0).is_err());
        assert!(TorusGrid::new(8, 8, 1.0, 1.0).is_ok());
    }

    #[test]
    fn wavenumbers_wrap_negative() {
        let g = TorusGrid::square(8).unwrap();
        assert_eq!(g.mode_x(0), 0);
        assert_eq!(g.mode_x(3), 3);
        assert_eq!(g.mode_x(4), 4); // Nyquist kept positive
        assert_eq!(g.mode_x(5), -3);
        assert_eq!(g.mode_x(7), -1);
        assert!((g.kx(1) - 1.0).abs() < 1e-15); // lx = 2*pi
    }

    #[test]
    fn integral_of_constant_is_area_times_value() {
        let g = TorusGrid::square(16).unwrap();
        let f = ScalarField::constant(g, 2.5);
        let area = g.lx * g.ly;
        assert!((f.integral() - 2.5 * area).abs() < 1e-12 * area);
    }
}
