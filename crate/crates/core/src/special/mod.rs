//! Special functions: real Gamma and zeta, complex Mittag-Leffler functions
//! on the propagator sector, and an arbitrary-precision series oracle.

mod gamma;
mod mittag_leffler;
mod oracle;
mod zeta;

pub use gamma::{gamma_real, recip_gamma};
pub(crate) use gamma::{gamma_unchecked, ln_gamma_positive, sin_pi};
pub use mittag_leffler::{i_pow_minus_beta, ml_e, ml_ee, MLParams, MittagLeffler, Regime};
pub use oracle::{ml_oracle, zeta_oracle, MlOracle};
pub use zeta::zeta_real;

use thiserror::Error;

/// Failures of the special-function routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    /// Argument sits on a pole (Gamma at a non-positive integer, zeta at 1).
    #[error("pole at x = {x}")]
    Pole { x: f64 },
    /// Argument or parameter outside the supported domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two evaluation regimes disagree beyond the requested tolerance.
    #[error("precision loss: {0}")]
    PrecisionLoss(String),
    /// A series did not reach the requested accuracy within its term cap.
    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },
}
