//! The discrete propagator, the memory-kernel Duhamel term, the filtered
//! nonlinearity and the Picard construction of solutions of
//! `u(t) = L_t u₀ + i^{−β} ∫_0^t N_{t−s} g(s) ds`, on the lattice symbol or
//! on the continuum symbol `|ξ|^α` (reference solver).

mod kernel;
mod params;
mod picard;

pub use kernel::{duhamel_weights, KernelBuilder, KernelTables, KernelWeights, SymbolSource, SymbolTable};
pub use params::ModelParams;
pub use picard::{solve, solve_continuum_reference, PicardOptions, Solver};

use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::{discretize, filter_pi, idft, restrict, LatticeError, LatticeField, LatticeGrid, SpectralField};
use crate::special::SpecialError;
use crate::symbol::SymbolError;
use crate::trajectory::TimeGridError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("Picard iteration is not contracting (residuals {residuals:?}); shrink T")]
    NonContraction { residuals: Vec<f64> },
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Time(#[from] TimeGridError),
}

/// Initial datum on `grid`: with filtering, `Π_h f_{2h}` (discretize on the
/// `2h` sub-grid, then filter); otherwise the direct discretization `f_h`.
pub fn prepare_initial<F: Fn(f64) -> Complex64>(
    f: F,
    grid: &LatticeGrid,
    use_filter: bool,
) -> Result<LatticeField, LatticeError> {
    if use_filter {
        let coarse = grid.coarse()?;
        filter_pi(&discretize(f, &coarse), grid)
    } else {
        Ok(discretize(f, grid))
    }
}

/// `L_t f = (E_β(i^{−β} t^β μ) f̂)^∨`.
pub fn linear_propagate(
    f_hat: &SpectralField,
    t: f64,
    table: &SymbolTable,
    params: &ModelParams,
) -> Result<LatticeField, SolverError> {
    if !(t >= 0.0) {
        return Err(SolverError::InvalidParams(format!(
            "time must be non-negative, got {t}"
        )));
    }
    if !f_hat.grid().same_as(table.grid()) {
        return Err(LatticeError::GridMismatch("spectrum and symbol table differ".into()).into());
    }
    let kb = KernelBuilder::new(params.beta)?;
    let mut out = f_hat.clone();
    for (k, c) in out.coeffs_mut().iter_mut().enumerate() {
        *c *= kb.propagator(t, table.mu(k))?;
    }
    Ok(idft(&out))
}

/// `sign · |u|^{p−1} u`, followed by `Π_h R_h` when `filtered`.
pub fn nonlinearity(field: &LatticeField, p: u32, sign: f64, filtered: bool) -> Result<LatticeField, LatticeError> {
    let power = |v: &Complex64| v * (sign * v.norm_sqr().powi(((p - 1) / 2) as i32));
    if !filtered {
        let values = field.values().iter().map(power).collect();
        return LatticeField::new(*field.grid(), values);
    }
    let coarse = restrict(field)?;
    let values = coarse.values().iter().map(power).collect();
    filter_pi(&LatticeField::new(*coarse.grid(), values)?, field.grid())
}

/// The model nonlinearity `± Π_h R_h(|u|^{p−1} u)` (or the pointwise power
/// when filtering is disabled).
pub fn apply_nonlinearity(field: &LatticeField, params: &ModelParams) -> Result<LatticeField, LatticeError> {
    nonlinearity(field, params.p, params.sign, params.use_filter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::dft;

    fn grid() -> LatticeGrid {
        LatticeGrid::new(0.1, 64).unwrap()
    }

    #[test]
    fn prepared_data_basic_cases() {
        let g = grid();
        let z = prepare_initial(|_| Complex64::new(0.0, 0.0), &g, true).unwrap();
        assert!(z.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        let c = prepare_initial(|_| Complex64::new(2.0, 1.0), &g, true).unwrap();
        assert!(c.values().iter().all(|v| (v - Complex64::new(2.0, 1.0)).norm() < 1e-15));
    }

    #[test]
    fn filtered_gaussian_has_no_spectrum_at_the_edge() {
        let g = LatticeGrid::new(0.5, 64).unwrap();
        let f = prepare_initial(|x| Complex64::new((-x * x).exp(), 0.0), &g, true).unwrap();
        let spec = dft(&f);
        // θ = −π is FFT index N/2
        let edge = spec.coeffs()[32].norm();
        let peak = spec.coeffs()[0].norm();
        assert!(edge < 1e-14 * peak, "{edge} vs {peak}");
        let raw = prepare_initial(|x| Complex64::new((-(x - 0.3) * (x - 0.3)).exp(), 0.0), &g, false).unwrap();
        let raw_edge = dft(&raw).coeffs()[32].norm();
        assert!(raw_edge > 1e-6 * peak, "{raw_edge} vs {peak}");
    }

    #[test]
    fn linear_propagation_identities() {
        let g = grid();
        let p = ModelParams::new(1.5, 0.85, 3, 1.0);
        let table = SymbolTable::new(&p, &g, SymbolSource::Lattice).unwrap();
        let f = LatticeField::from_fn(g, |x| Complex64::new((-x * x).exp(), 0.3 * x));
        let spec = dft(&f);
        let same = linear_propagate(&spec, 0.0, &table, &p).unwrap();
        for (a, b) in same.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-14);
        }
        let later = dft(&linear_propagate(&spec, 0.7, &table, &p).unwrap());
        assert!((later.coeffs()[0] - spec.coeffs()[0]).norm() < 1e-12 * spec.coeffs()[0].norm());

        let p1 = ModelParams::new(1.5, 1.0, 3, 1.0);
        let t1 = SymbolTable::new(&p1, &g, SymbolSource::Lattice).unwrap();
        let out = dft(&linear_propagate(&spec, 0.4, &t1, &p1).unwrap());
        for k in 0..64 {
            let expect = spec.coeffs()[k] * Complex64::from_polar(1.0, -0.4 * t1.mu(k));
            assert!((out.coeffs()[k] - expect).norm() < 1e-12);
        }
        assert!(linear_propagate(&spec, -1.0, &table, &p).is_err());
    }

    #[test]
    fn nonlinearity_cases() {
        let g = LatticeGrid::new(0.1, 16).unwrap();
        let p = ModelParams::new(1.5, 0.85, 3, 1.0);
        let zero = apply_nonlinearity(&LatticeField::zeros(g), &p).unwrap();
        assert!(zero.values().iter().all(|v| v.norm() == 0.0));
        let c = Complex64::new(1.0, 2.0);
        let constant = LatticeField::new(g, vec![c; 16]).unwrap();
        let out = apply_nonlinearity(&constant, &ModelParams { sign: -1.0, ..p }).unwrap();
        for v in out.values() {
            assert!((v - (-5.0 * c)).norm() < 1e-14);
        }
        // 1, 2, 1, 2, ...: restriction keeps the 1s, the odd sites are
        // re-averaged from them
        let alt = LatticeField::new(g, (0..16).map(|i| Complex64::new(1.0 + (i % 2) as f64, 0.0)).collect()).unwrap();
        let out = apply_nonlinearity(&alt, &p).unwrap();
        assert!(out
            .values()
            .iter()
            .all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        // even sites 2, 0, 2, 0, ...: cubes 8, 0, 8, 0 and odd sites average to 4
        let vals = [2.0, 5.0, 0.0, 5.0].repeat(4);
        let f = LatticeField::new(g, vals.iter().map(|&v| Complex64::new(v, 0.0)).collect()).unwrap();
        let out = apply_nonlinearity(&f, &p).unwrap();
        let expect = [8.0, 4.0, 0.0, 4.0].repeat(4);
        for (v, e) in out.values().iter().zip(expect) {
            assert!((v.re - e).abs() < 1e-14);
        }
        let raw = apply_nonlinearity(&f, &ModelParams { use_filter: false, ..p }).unwrap();
        assert!((raw.values()[1].re - 125.0).abs() < 1e-12);
    }
}
