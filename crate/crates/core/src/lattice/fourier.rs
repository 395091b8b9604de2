//! Discrete Fourier transform with the lattice convention
//! `û(θ) = Σ_m u(mh) e^{−iθm}` on the frequencies `θ_k = 2πk/N ∈ [−π, π)`.
//!
//! With this convention `‖u‖²_{L²_h} = (h/2π) Δθ Σ_k |û(θ_k)|²`, `Δθ = 2π/N`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{LatticeError, LatticeField, LatticeGrid};

/// Fourier coefficients on the frequencies of a lattice, in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: LatticeGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: LatticeGrid, coeffs: Vec<Complex64>) -> Result<Self, LatticeError> {
        if coeffs.len() != grid.n_points() {
            return Err(LatticeError::GridMismatch(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.n_points()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Frequency `θ_k` of coefficient `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        self.grid.frequency(k)
    }

    /// Weighted quadrature `(h/2π) Δθ Σ m(θ_k) |û_k|²`.
    pub fn weighted_energy<F: Fn(f64) -> f64>(&self, weight: F) -> f64 {
        let pre = self.grid.h() / (2.0 * std::f64::consts::PI) * self.grid.dxi();
        let mut acc = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            acc += weight(self.grid.frequency(k)) * c.norm_sqr();
        }
        pre * acc
    }
}

/// Reusable forward/inverse transform pair for one lattice size.
#[derive(Clone)]
pub struct FourierPlan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FourierPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierPlan").field("n", &self.n).finish()
    }
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, FourierPlan>> = RefCell::new(HashMap::new());
}

impl FourierPlan {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FourierPlan {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Cached plan for size `n` (per thread).
    pub fn cached(n: usize) -> Self {
        PLANS.with(|p| p.borrow_mut().entry(n).or_insert_with(|| FourierPlan::new(n)).clone())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform of site values (storage order) into
    /// coefficients (FFT order).
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n);
        self.forward.process(data);
        // sites are labelled m = i − N/2: multiply by e^{iθ_k N/2} = (−1)^k
        for v in data.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }

    /// In-place inverse transform of coefficients into site values.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n);
        for v in data.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
        self.inverse.process(data);
        let inv_n = 1.0 / self.n as f64;
        for v in data.iter_mut() {
            *v *= inv_n;
        }
    }
}

/// Forward transform of a field.
pub fn dft(field: &LatticeField) -> SpectralField {
    let plan = FourierPlan::cached(field.grid().n_points());
    let mut data = field.values().to_vec();
    plan.forward_in_place(&mut data);
    SpectralField {
        grid: *field.grid(),
        coeffs: data,
    }
}

/// Inverse transform of a spectrum.
pub fn idft(spec: &SpectralField) -> LatticeField {
    let plan = FourierPlan::cached(spec.grid.n_points());
    let mut data = spec.coeffs.clone();
    plan.inverse_in_place(&mut data);
    LatticeField::new(spec.grid, data).expect("length preserved by the transform")
}
