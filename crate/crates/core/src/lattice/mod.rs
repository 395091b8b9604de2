//! Periodic lattices `hZ / (N h Z)`, grid functions, discrete Fourier
//! analysis, the filter / injection / restriction / interpolation operators
//! and the norm suite.

mod fourier;
mod io;
mod norms;
mod ops;

pub use fourier::{dft, idft, FourierPlan, SpectralField};
pub use io::{
    decode_snapshot, decode_trajectory, encode_snapshot, encode_trajectory, snapshot_csv, Snapshot,
    SNAPSHOT_HEADER_BYTES,
};
pub use norms::{lambda_norm, norm_lp, norm_maximal, norm_smoothing, norm_sobolev, LambdaExponents, NormReport};
pub use ops::{discretize, filter_pi, inject, interp_linear, interp_multiplier, restrict, smoothing_multiplier};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Failures of lattice construction and operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("grids are not nested: {0}")]
    NonNested(String),
    #[error("decode error: {0}")]
    Decode(String),
}

/// Periodic lattice with mesh `h` and `n_points` sites `x_m = m h`,
/// `m ∈ [−n_points/2, n_points/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeGrid {
    h: f64,
    n_points: usize,
}

impl LatticeGrid {
    pub fn new(h: f64, n_points: usize) -> Result<Self, LatticeError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(LatticeError::InvalidGrid(format!(
                "mesh h must be positive and finite, got {h}"
            )));
        }
        if n_points < 8 || !n_points.is_multiple_of(2) {
            return Err(LatticeError::InvalidGrid(format!(
                "n_points must be even and at least 8, got {n_points}"
            )));
        }
        Ok(LatticeGrid { h, n_points })
    }

    /// Grid of the given periodic extent and mesh; the extent must be an
    /// integer multiple of `h`.
    pub fn with_extent(extent: f64, h: f64) -> Result<Self, LatticeError> {
        let n = (extent / h).round();
        if !(n.is_finite() && n >= 1.0) || ((n * h - extent) / extent).abs() > 1e-9 {
            return Err(LatticeError::InvalidGrid(format!(
                "extent {extent} is not an integer multiple of h = {h}"
            )));
        }
        Self::new(extent / n, n as usize)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Periodic cell length `n_points · h`.
    pub fn extent(&self) -> f64 {
        self.h * self.n_points as f64
    }

    /// Site label `m` of storage index `i`.
    pub fn site_index(&self, i: usize) -> i64 {
        i as i64 - (self.n_points / 2) as i64
    }

    /// Position `x = m h` of storage index `i`.
    pub fn site(&self, i: usize) -> f64 {
        self.site_index(i) as f64 * self.h
    }

    /// Lattice frequency `θ_k ∈ [−π, π)` of FFT index `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        let n = self.n_points as i64;
        let k = k as i64;
        let j = if k < n / 2 { k } else { k - n };
        2.0 * std::f64::consts::PI * j as f64 / n as f64
    }

    /// All lattice frequencies in FFT order.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.frequency(k)).collect()
    }

    /// Frequency spacing `2π/N`.
    pub fn dxi(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n_points as f64
    }

    /// The `2h` sub-grid of even sites (requires `n_points` divisible by 4).
    pub fn coarse(&self) -> Result<LatticeGrid, LatticeError> {
        if !self.n_points.is_multiple_of(4) {
            return Err(LatticeError::InvalidGrid(format!(
                "n_points = {} must be divisible by 4 for a 2h sub-grid",
                self.n_points
            )));
        }
        LatticeGrid::new(2.0 * self.h, self.n_points / 2)
    }

    /// The `h/2` grid with the same extent.
    pub fn fine(&self) -> LatticeGrid {
        LatticeGrid {
            h: 0.5 * self.h,
            n_points: 2 * self.n_points,
        }
    }

    /// Whether the two grids describe the same lattice (to rounding).
    pub fn same_as(&self, other: &LatticeGrid) -> bool {
        self.n_points == other.n_points && ((self.h - other.h) / self.h).abs() < 1e-12
    }
}

/// Complex grid function on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    grid: LatticeGrid,
    values: Vec<Complex64>,
}

impl LatticeField {
    pub fn new(grid: LatticeGrid, values: Vec<Complex64>) -> Result<Self, LatticeError> {
        if values.len() != grid.n_points() {
            return Err(LatticeError::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(LatticeField { grid, values })
    }

    pub fn zeros(grid: LatticeGrid) -> Self {
        LatticeField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    /// Field with values `f(x_m)` sampled at the sites.
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: LatticeGrid, f: F) -> Self {
        let values = (0..grid.n_points()).map(|i| f(grid.site(i))).collect();
        LatticeField { grid, values }
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `a · self`.
    pub fn scaled(&self, a: Complex64) -> Self {
        LatticeField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }

    /// `self − other` (grids must match).
    pub fn sub(&self, other: &LatticeField) -> Result<Self, LatticeError> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + other` (grids must match).
    pub fn add(&self, other: &LatticeField) -> Result<Self, LatticeError> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with<F: Fn(Complex64, Complex64) -> Complex64>(
        &self,
        other: &LatticeField,
        f: F,
    ) -> Result<Self, LatticeError> {
        if !self.grid.same_as(&other.grid) {
            return Err(LatticeError::GridMismatch("fields live on different grids".into()));
        }
        Ok(LatticeField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}
