//! Model parameters and their admissibility conditions.

use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::lattice::LambdaExponents;

/// Parameters of the space-time fractional NLS
/// `i^β ∂_t^β u = (−Δ_h)^{α/2} u + sign·|u|^{p−1} u`.
///
/// `sign = +1` is defocusing, `−1` focusing and `0` switches the
/// nonlinearity off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub p: u32,
    pub sign: f64,
    pub s: f64,
    pub delta: f64,
    pub use_filter: bool,
}

impl ModelParams {
    /// Parameters with the smallest admissible regularity
    /// `s = 1/2 − 1/(2(p−1))`, `δ = s + σ − α` and filtering enabled.
    pub fn new(alpha: f64, beta: f64, p: u32, sign: f64) -> Self {
        let s = 0.5 - 0.5 / (p as f64 - 1.0);
        ModelParams {
            alpha,
            beta,
            p,
            sign,
            s,
            delta: s + alpha / beta - alpha,
            use_filter: true,
        }
    }

    /// `σ = α/β`.
    pub fn sigma(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Lower bound `1/2 − 1/(2(p−1))` on `s`.
    pub fn s_min(&self) -> f64 {
        0.5 - 0.5 / (self.p as f64 - 1.0)
    }

    /// Admissible interval `[s + σ − α, σ/2 − 1/(2(p−1)))` for `δ`.
    pub fn delta_range(&self) -> (f64, f64) {
        let sigma = self.sigma();
        (self.s + sigma - self.alpha, 0.5 * sigma - 0.5 / (self.p as f64 - 1.0))
    }

    /// Exponents of the `Λ_T` norm: smoothing `s + σ − α`, energy `s`,
    /// maximal `2(p − 1)`.
    pub fn lambda_exponents(&self) -> LambdaExponents {
        LambdaExponents {
            smoothing: self.s + self.sigma() - self.alpha,
            sobolev: self.s,
            maximal: 2.0 * (self.p as f64 - 1.0),
        }
    }

    /// Check every admissibility condition; the error message quotes the
    /// first violated condition with the offending values.
    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |msg: String| Err(SolverError::InvalidParams(msg));
        let finite = [self.alpha, self.beta, self.sign, self.s, self.delta];
        if finite.iter().any(|v| !v.is_finite()) {
            return fail("all parameters must be finite".into());
        }
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return fail(format!("1 < alpha < 2 fails: alpha = {}", self.alpha));
        }
        if !(self.beta > 0.5 && self.beta <= 1.0) {
            return fail(format!("1/2 < beta <= 1 fails: beta = {}", self.beta));
        }
        if self.p < 3 || self.p.is_multiple_of(2) {
            return fail(format!("p odd and >= 3 fails: p = {}", self.p));
        }
        if !(self.sign == 1.0 || self.sign == -1.0 || self.sign == 0.0) {
            return fail(format!("sign in {{-1, 0, +1}} fails: sign = {}", self.sign));
        }
        let sigma = self.sigma();
        let bound = 0.5 * (sigma + 1.0);
        if !(self.alpha > bound) {
            return fail(format!(
                "alpha > (sigma+1)/2 fails: {} ≤ {} (sigma = alpha/beta = {})",
                self.alpha, bound, sigma
            ));
        }
        let s_min = self.s_min();
        if !(self.s >= s_min) {
            return fail(format!("s >= 1/2 - 1/(2(p-1)) fails: {} < {}", self.s, s_min));
        }
        let (lo, hi) = self.delta_range();
        if !(self.delta >= lo) {
            return fail(format!("delta >= s+sigma-alpha fails: {} < {}", self.delta, lo));
        }
        if !(self.delta < hi) {
            return fail(format!("delta < sigma/2 - 1/(2(p-1)) fails: {} ≥ {}", self.delta, hi));
        }
        Ok(())
    }

    /// Human-readable margins of every condition.
    pub fn describe(&self) -> String {
        let sigma = self.sigma();
        let (lo, hi) = self.delta_range();
        let status = |ok: bool| if ok { "ok" } else { "VIOLATED" };
        let mut out = String::new();
        out.push_str(&format!(
            "alpha = {}, beta = {}, sigma = alpha/beta = {}\n",
            self.alpha, self.beta, sigma
        ));
        out.push_str(&format!(
            "  1 < alpha < 2                        [{}]\n",
            status(self.alpha > 1.0 && self.alpha < 2.0)
        ));
        out.push_str(&format!(
            "  1/2 < beta <= 1                      [{}]\n",
            status(self.beta > 0.5 && self.beta <= 1.0)
        ));
        out.push_str(&format!(
            "  alpha > (sigma+1)/2:  {} > {}  margin {:+.6}  [{}]\n",
            self.alpha,
            0.5 * (sigma + 1.0),
            self.alpha - 0.5 * (sigma + 1.0),
            status(self.alpha > 0.5 * (sigma + 1.0))
        ));
        out.push_str(&format!(
            "  s >= 1/2 - 1/(2(p-1)):  {} >= {}  margin {:+.6}  [{}]\n",
            self.s,
            self.s_min(),
            self.s - self.s_min(),
            status(self.s >= self.s_min())
        ));
        out.push_str(&format!(
            "  delta in [s+sigma-alpha, sigma/2-1/(2(p-1))):  {} in [{}, {})  margins {:+.6} / {:+.6}  [{}]\n",
            self.delta,
            lo,
            hi,
            self.delta - lo,
            hi - self.delta,
            status(self.delta >= lo && self.delta < hi)
        ));
        out.push_str(&format!(
            "  continuum-limit regularity max(s+sigma-alpha, 1/2) < 1:  {}  [{}]\n",
            lo.max(0.5),
            status(lo.max(0.5) < 1.0)
        ));
        out
    }
}
