//! Verification experiments: symbol properties, uniform mass bounds, the
//! smoothing dichotomy between filtered and unfiltered data, continuum-limit
//! convergence and the Mittag-Leffler oracle comparison.
//!
//! Every experiment returns a serializable report made of named pass/fail
//! [`Check`]s plus the raw series, which the command-line front end writes
//! as JSON and CSV.

mod continuum;
mod mass;
mod ml_check;
mod smoothing;
mod symbol_checks;

pub use continuum::{run_continuum_study, select_time_horizon, ContinuumRow, ContinuumSetup, ConvergenceReport};
pub use mass::{run_mass_uniformity, MassReport, MassRow};
pub use ml_check::{run_ml_check, MlCheckReport, MlCheckRow, MlCheckSetup};
pub use smoothing::{
    resonant_packet_width, run_smoothing_experiment, PacketSpec, SmoothingData, SmoothingReport, SmoothingRow,
};
pub use symbol_checks::{run_symbol_checks, symbol_table_csv, SymbolEntry, SymbolReport};

use serde::Serialize;
use thiserror::Error;

use crate::lattice::LatticeError;
use crate::solver::SolverError;
use crate::special::SpecialError;
use crate::symbol::SymbolError;
use crate::trajectory::TimeGridError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid experiment setup: {0}")]
    Setup(String),
    #[error("degenerate input for the order fit: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Time(#[from] TimeGridError),
}

/// One named assertion of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Common interface of the experiment reports.
pub trait Report: Serialize {
    fn checks(&self) -> &[Check];

    /// Raw series as CSV with a header line.
    fn csv(&self) -> String;

    fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed)
    }
}

/// Least-squares slope of `log err` against `log h`.
pub fn fit_order(pairs: &[(f64, f64)]) -> Result<f64, HarnessError> {
    if pairs.len() < 3 {
        return Err(HarnessError::Degenerate(format!(
            "need at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    if let Some(&(h, e)) = pairs
        .iter()
        .find(|(h, e)| !(*h > 0.0 && *e > 0.0 && h.is_finite() && e.is_finite()))
    {
        return Err(HarnessError::Degenerate(format!(
            "entries must be positive and finite, got ({h}, {e})"
        )));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 1e-24 * n) {
        return Err(HarnessError::Degenerate("all h values are identical".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Format a float for CSV output with full round-trip precision.
pub(crate) fn csv_num(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let hs = [0.4, 0.2, 0.1, 0.05];
        let sq: Vec<(f64, f64)> = hs.iter().map(|&h| (h, h * h)).collect();
        assert!((fit_order(&sq).unwrap() - 2.0).abs() < 1e-12);
        let half: Vec<(f64, f64)> = hs.iter().map(|&h| (h, 3.0 * h.sqrt())).collect();
        assert!((fit_order(&half).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn noisy_half_order() {
        // fixed ±2% perturbations
        let noise = [1.02, 0.98, 1.015, 0.985, 1.0, 1.02];
        let pairs: Vec<(f64, f64)> = noise
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let h = 0.4 / 2f64.powi(i as i32);
                (h, h.sqrt() * n)
            })
            .collect();
        assert!((fit_order(&pairs).unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            fit_order(&[(0.1, 1.0), (0.1, 2.0), (0.1, 3.0)]),
            Err(HarnessError::Degenerate(_))
        ));
        assert!(fit_order(&[(0.1, 1.0), (0.2, 2.0)]).is_err());
        assert!(fit_order(&[(0.1, 0.0), (0.2, 2.0), (0.4, 1.0)]).is_err());
        assert!(fit_order(&[(0.1, f64::NAN), (0.2, 2.0), (0.4, 1.0)]).is_err());
    }
}
