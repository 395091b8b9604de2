//! Arbitrary-precision reference values (MPFR through `rug`).
//!
//! The Mittag-Leffler oracle sums the defining power series with a working
//! precision of `digits` plus the number of digits lost to cancellation,
//! estimated from the largest term and verified after summation.

use num_complex::Complex64;
use rug::{ops::Pow, Complex, Float};

use super::{ln_gamma_positive, SpecialError};

const TERM_CAP: usize = 200_000;
const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Power-series oracle for `E_{β,γ}` with a cached table of `Γ(βj)`.
#[derive(Debug, Clone)]
pub struct MlOracle {
    beta: f64,
    digits: u32,
    table_prec: u32,
    /// `gammas[j] = Γ(βj)` for `j ≥ 1` (index 0 unused)
    gammas: Vec<Float>,
}

impl MlOracle {
    pub fn new(beta: f64, digits: u32) -> Result<Self, SpecialError> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(SpecialError::Domain(format!("beta must lie in (0, 1], got {beta}")));
        }
        if digits < 50 {
            return Err(SpecialError::Domain(format!(
                "oracle needs at least 50 digits, got {digits}"
            )));
        }
        Ok(MlOracle {
            beta,
            digits,
            table_prec: 0,
            gammas: Vec::new(),
        })
    }

    /// Size the cached Gamma table for arguments up to `max_abs_z`, so that a
    /// sweep over many points does not rebuild it.
    pub fn reserve(&mut self, max_abs_z: f64) {
        let peak = self
            .peak_log10(max_abs_z, self.beta)
            .max(self.peak_log10(max_abs_z, 1.0));
        let prec = ((self.digits as f64 + peak.max(0.0) + 30.0) * LOG2_10).ceil() as u32 + 16;
        if prec > self.table_prec {
            self.table_prec = prec;
            self.gammas.clear();
        }
    }

    /// `Γ(βj)` at the current table precision.
    fn gamma_beta_j(&mut self, j: usize) -> &Float {
        while self.gammas.len() <= j {
            let idx = self.gammas.len();
            let arg = Float::with_val(self.table_prec, self.beta) * idx as u32;
            let g = if idx == 0 {
                Float::with_val(self.table_prec, 0)
            } else {
                arg.gamma()
            };
            self.gammas.push(g);
        }
        &self.gammas[j]
    }

    fn gamma_term(&mut self, k: usize, second: f64, prec: u32) -> Float {
        let beta = self.beta;
        if second == 1.0 {
            if k == 0 {
                return Float::with_val(prec, 1);
            }
            // Γ(βk + 1) = βk Γ(βk)
            let bk = Float::with_val(prec, beta) * k as u32;
            let g = self.gamma_beta_j(k).clone();
            return bk * g;
        }
        if second == beta {
            return self.gamma_beta_j(k + 1).clone();
        }
        let arg = Float::with_val(prec, beta) * k as u32 + Float::with_val(prec, second);
        arg.gamma()
    }

    /// Decimal digits of the largest series term relative to 1.
    fn peak_log10(&self, abs_z: f64, second: f64) -> f64 {
        if abs_z == 0.0 {
            return 0.0;
        }
        let lz = abs_z.ln();
        let mut best: f64 = 0.0;
        let mut k = 0usize;
        loop {
            let x = self.beta * k as f64 + second;
            let v = k as f64 * lz - ln_gamma_positive(x);
            best = best.max(v);
            // past the maximum once the log-term is decreasing and well below it
            if k > 10 && v < best - 50.0 {
                break;
            }
            k += 1;
            if k > TERM_CAP {
                break;
            }
        }
        best / std::f64::consts::LN_10
    }

    /// `E_{β,γ}(z)` rounded to double precision.
    pub fn eval(&mut self, z: Complex64, second: f64) -> Result<Complex64, SpecialError> {
        if !(second > 0.0) {
            return Err(SpecialError::Domain(format!(
                "second parameter must be positive, got {second}"
            )));
        }
        let peak = self.peak_log10(z.norm(), second);
        let mut extra = peak.max(0.0) + 10.0;
        for _attempt in 0..4 {
            let work_digits = self.digits as f64 + extra;
            let prec = (work_digits * LOG2_10).ceil() as u32 + 16;
            if prec > self.table_prec {
                // grow geometrically so sweeps of increasing |z| rebuild rarely
                self.table_prec = prec.max(self.table_prec + self.table_prec / 2);
                self.gammas.clear();
            }
            let (sum, max_term) = self.sum_series(z, second, prec)?;
            let sum_abs = abs_float(&sum);
            if sum_abs.is_zero() {
                return Ok(Complex64::new(0.0, 0.0));
            }
            // digits lost to cancellation: log10(max term / |sum|)
            let lost = (max_term / &sum_abs).to_f64().log10().max(0.0);
            if work_digits - lost >= self.digits as f64 {
                return Ok(Complex64::new(sum.real().to_f64(), sum.imag().to_f64()));
            }
            extra = lost + 20.0;
        }
        Err(SpecialError::PrecisionLoss(
            "oracle could not reach the requested digits".into(),
        ))
    }

    fn sum_series(&mut self, z: Complex64, second: f64, prec: u32) -> Result<(Complex, Float), SpecialError> {
        let zc = Complex::with_val(prec, (z.re, z.im));
        let mut zk = Complex::with_val(prec, (1, 0));
        let mut sum = Complex::with_val(prec, (0, 0));
        let mut max_term = Float::with_val(prec, 0);
        let threshold = Float::with_val(prec, 10).pow(-(self.digits as i32));
        let mut small_run = 0;
        for k in 0..TERM_CAP {
            let g = self.gamma_term(k, second, prec);
            let term = Complex::with_val(prec, &zk / &g);
            let ta = abs_float(&term);
            if ta > max_term {
                max_term = ta.clone();
            }
            sum += &term;
            let bound = Float::with_val(prec, &threshold * &abs_float(&sum));
            if ta < bound {
                small_run += 1;
                if small_run >= 10 {
                    return Ok((sum, max_term));
                }
            } else {
                small_run = 0;
            }
            zk *= &zc;
        }
        Err(SpecialError::NonConvergence { terms: TERM_CAP })
    }
}

fn abs_float(c: &Complex) -> Float {
    let prec = c.prec().0;
    Float::with_val(prec, c.real().hypot_ref(c.imag()))
}

/// `E_{β,γ}(z)` by the arbitrary-precision series, rounded to double.
pub fn ml_oracle(beta: f64, z: Complex64, second_param: f64, digits: u32) -> Result<Complex64, SpecialError> {
    MlOracle::new(beta, digits)?.eval(z, second_param)
}

/// Riemann zeta at real `s ≠ 1` computed by MPFR with `digits` decimal digits.
pub fn zeta_oracle(s: f64, digits: u32) -> Result<f64, SpecialError> {
    if s == 1.0 {
        return Err(SpecialError::Pole { x: s });
    }
    let prec = (digits as f64 * LOG2_10).ceil() as u32 + 16;
    Ok(Float::with_val(prec, s).zeta().to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_special_case() {
        let v = ml_oracle(1.0, Complex64::new(1.0, 0.0), 1.0, 50).unwrap();
        assert_eq!(v.re, std::f64::consts::E);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn zero_argument() {
        let v = ml_oracle(0.8, Complex64::new(0.0, 0.0), 1.0, 50).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn strongly_cancelling_argument_matches_closed_form() {
        // E_1(-40) = e^{-40}: the series cancels ~35 digits
        let v = ml_oracle(1.0, Complex64::new(-40.0, 0.0), 1.0, 60).unwrap();
        let exact = (-40f64).exp();
        assert!(((v.re - exact) / exact).abs() < 1e-15);
    }

    #[test]
    fn general_second_parameter() {
        // E_{1,2}(z) = (e^z - 1)/z
        let z = Complex64::new(0.3, -2.0);
        let v = ml_oracle(1.0, z, 2.0, 50).unwrap();
        let exact = (z.exp() - 1.0) / z;
        assert!((v - exact).norm() / exact.norm() < 1e-15);
    }

    #[test]
    fn digits_below_minimum_rejected() {
        assert!(MlOracle::new(0.8, 20).is_err());
    }

    #[test]
    fn zeta_matches_known_value() {
        let z = zeta_oracle(2.0, 50).unwrap();
        assert!((z - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-16);
    }
}
