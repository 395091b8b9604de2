//! Mittag-Leffler functions `E_{β,γ}(z) = Σ z^k / Γ(βk + γ)` for
//! `0 < β ≤ 1` on the sector `|arg z| ≤ βπ/2`.
//!
//! Three evaluation regimes are combined:
//!
//! * compensated power series for `|z| < series_radius` when the estimated
//!   cancellation stays below the tolerance;
//! * the algebraic asymptotic expansion
//!   `E_{β,γ}(z) = (1/β) z^{(1−γ)/β} exp(z^{1/β}) − Σ_{k=1}^{N−1} z^{−k}/Γ(γ−βk)`
//!   for `|z| ≥ series_radius` when the first omitted term is below tolerance;
//! * otherwise the Hankel-contour representation collapsed onto the branch
//!   cut, `E = (1/β) s*^{1−γ} e^{s*} + (1/2πi)∫_0^∞ e^{−r}[F(re^{−iπ}) − F(re^{iπ})] dr`
//!   with `F(s) = s^{β−γ}/(s^β − z)` and `s* = z^{1/β}`, integrated by an
//!   exp-sinh trapezoid rule on precomputed nodes.
//!
//! In every regime the value splits as `E = R(z) + A(z)` where
//! `R(z) = (1/β) s*^{1−γ} e^{s*}` is the oscillatory residue part and `A` is
//! the slowly varying algebraic remainder; [`MittagLeffler::eval_parts`]
//! exposes the split.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{recip_gamma, SpecialError};

/// Parameters of a Mittag-Leffler evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    /// Fractional order, `0 < beta ≤ 1`.
    pub beta: f64,
    /// Radius below which the power series is attempted.
    pub series_radius: f64,
    /// Truncation order `N ≥ 2` of the asymptotic expansion.
    pub asym_order: usize,
    /// Target relative accuracy.
    pub tol: f64,
}

impl MLParams {
    /// Defaults: switch radius 10, asymptotic order 10, tolerance 1e-12.
    pub fn new(beta: f64) -> Result<Self, SpecialError> {
        let p = MLParams {
            beta,
            series_radius: 10.0,
            asym_order: 10,
            tol: 1e-12,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SpecialError> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(SpecialError::Domain(format!(
                "beta must lie in (0, 1], got {}",
                self.beta
            )));
        }
        if !(self.series_radius > 0.0) {
            return Err(SpecialError::Domain("series_radius must be positive".into()));
        }
        if self.asym_order < 2 {
            return Err(SpecialError::Domain("asym_order must be at least 2".into()));
        }
        if !(self.tol > 0.0) {
            return Err(SpecialError::Domain("tol must be positive".into()));
        }
        Ok(())
    }
}

/// `i^{−β} = e^{−iβπ/2}` (principal branch).
pub fn i_pow_minus_beta(beta: f64) -> Complex64 {
    Complex64::from_polar(1.0, -0.5 * beta * PI)
}

/// Which evaluation path produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `z = 0`.
    Zero,
    /// Closed form (`β = γ = 1`: the exponential).
    Exact,
    Series,
    Asymptotic,
    Contour,
}

#[derive(Debug, Clone, Copy)]
struct HankelNode {
    /// quadrature weight times `e^{−r}/(2π)`
    weight: f64,
    /// `r^β e^{−iβπ}`
    lower_pow: Complex64,
    /// `r^{β−γ} e^{−i(β−γ)π}`
    lower_num: Complex64,
}

/// Below this modulus the series is always well conditioned, so the contour
/// nodes only need to resolve `|z| ≥ CONTOUR_MIN_ABS`.
const CONTOUR_MIN_ABS: f64 = 0.25;
const CONTOUR_STEP: f64 = 1.0 / 32.0;

/// Evaluator of `E_{β,γ}` with precomputed coefficient and node tables.
#[derive(Debug, Clone)]
pub struct MittagLeffler {
    beta: f64,
    gamma: f64,
    params: MLParams,
    /// `1/Γ(βk + γ)`
    series: Vec<f64>,
    /// `1/Γ(γ − βk)`, index `k − 1`, `k = 1..=N+1`
    asym: Vec<f64>,
    nodes: Vec<HankelNode>,
    exact_exp: bool,
}

impl MittagLeffler {
    /// Build an evaluator for `E_{β,γ}`, `γ ≥ β`.
    ///
    /// The regimes are cross-checked at the switch radius; disagreement
    /// beyond their own error estimates is reported as precision loss.
    pub fn new(params: MLParams, gamma: f64) -> Result<Self, SpecialError> {
        params.validate()?;
        let beta = params.beta;
        if !(gamma >= beta && gamma < beta + 1.0) {
            return Err(SpecialError::Domain(format!(
                "second parameter must lie in [beta, beta + 1), got {gamma}"
            )));
        }
        let k_max = (((170.0 - gamma) / beta).floor() as usize).min(2000);
        let series = (0..=k_max).map(|k| recip_gamma(beta * k as f64 + gamma)).collect();
        let asym = (1..=params.asym_order + 1)
            .map(|k| recip_gamma(gamma - beta * k as f64))
            .collect();
        let nodes = hankel_nodes(beta, gamma);
        let ml = MittagLeffler {
            beta,
            gamma,
            params,
            series,
            asym,
            nodes,
            exact_exp: beta == 1.0 && gamma == 1.0,
        };
        ml.check_switch()?;
        Ok(ml)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn params(&self) -> &MLParams {
        &self.params
    }

    /// `E_{β,γ}(z)`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64, SpecialError> {
        let (r, a, _) = self.eval_split(z)?;
        Ok(r + a)
    }

    /// `E_{β,γ}(z)` together with the regime used.
    pub fn eval_with_regime(&self, z: Complex64) -> Result<(Complex64, Regime), SpecialError> {
        let (r, a, regime) = self.eval_split(z)?;
        Ok((r + a, regime))
    }

    /// Residue part `R(z)` and algebraic remainder `A(z)`, `E = R + A`.
    pub fn eval_parts(&self, z: Complex64) -> Result<(Complex64, Complex64), SpecialError> {
        let (r, a, _) = self.eval_split(z)?;
        Ok((r, a))
    }

    fn check_sector(&self, z: Complex64) -> Result<(), SpecialError> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(SpecialError::Domain(format!("non-finite argument {z}")));
        }
        // E_{1,1} = exp is entire, so no sector restriction applies
        if !self.exact_exp && z.norm() > 0.0 && z.arg().abs() > 0.5 * self.beta * PI * (1.0 + 1e-12) + 1e-15 {
            return Err(SpecialError::Domain(format!(
                "argument {z} outside the sector |arg z| <= beta*pi/2"
            )));
        }
        Ok(())
    }

    fn eval_split(&self, z: Complex64) -> Result<(Complex64, Complex64, Regime), SpecialError> {
        self.check_sector(z)?;
        if z.norm() == 0.0 {
            return Ok((
                Complex64::new(0.0, 0.0),
                Complex64::new(self.series[0], 0.0),
                Regime::Zero,
            ));
        }
        if self.exact_exp {
            return Ok((z.exp(), Complex64::new(0.0, 0.0), Regime::Exact));
        }
        let residue = self.residue(z);
        let abs = z.norm();
        if abs < self.params.series_radius {
            if let Some((s, err)) = self.series_sum(z) {
                if err <= self.params.tol {
                    return Ok((residue, s - residue, Regime::Series));
                }
            }
        } else if let Some((a, err)) = self.asymptotic_tail(z) {
            let total = (residue + a).norm();
            if err <= self.params.tol * total {
                return Ok((residue, a, Regime::Asymptotic));
            }
        }
        let a = self.contour_cut(z);
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(SpecialError::PrecisionLoss(format!(
                "contour integral not finite at z = {z}"
            )));
        }
        Ok((residue, a, Regime::Contour))
    }

    /// `(1/β) s*^{1−γ} e^{s*}`, `s* = z^{1/β}`.
    fn residue(&self, z: Complex64) -> Complex64 {
        let s_star = Complex64::from_polar(z.norm().powf(1.0 / self.beta), z.arg() / self.beta);
        let pre = if self.gamma == 1.0 {
            Complex64::new(1.0, 0.0)
        } else {
            s_star.powf(1.0 - self.gamma)
        };
        pre * s_star.exp() / self.beta
    }

    /// Compensated power series; returns the sum and its estimated
    /// relative rounding error, or `None` if the table is exhausted.
    fn series_sum(&self, z: Complex64) -> Option<(Complex64, f64)> {
        let mut sum = NeumaierComplex::default();
        let mut zk = Complex64::new(1.0, 0.0);
        let mut weighted_abs = 0.0;
        let mut prev_abs = f64::INFINITY;
        for (k, &c) in self.series.iter().enumerate() {
            let t = zk * c;
            let ta = t.norm();
            if !ta.is_finite() {
                return None;
            }
            sum.add(t);
            weighted_abs += (k as f64 + 2.0) * ta;
            let s = sum.value().norm();
            if k > 2 && ta <= prev_abs && ta <= 0.25 * f64::EPSILON * s {
                let err = f64::EPSILON * weighted_abs / s;
                return Some((sum.value(), err));
            }
            prev_abs = ta;
            zk *= z;
        }
        None
    }

    /// `−Σ_{k=1}^{N−1} z^{−k}/Γ(γ−βk)` and the magnitude of the first
    /// non-vanishing omitted term.
    fn asymptotic_tail(&self, z: Complex64) -> Option<(Complex64, f64)> {
        let n = self.params.asym_order;
        let zi = z.inv();
        let mut zp = zi;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..n {
            acc -= zp * self.asym[k - 1];
            zp *= zi;
        }
        // zp = z^{-N}
        let mut est = (zp * self.asym[n - 1]).norm();
        if est == 0.0 {
            est = (zp * zi * self.asym[n]).norm();
        }
        if !(acc.re.is_finite() && acc.im.is_finite()) {
            return None;
        }
        Some((acc, est))
    }

    /// `(1/2πi) ∫_0^∞ e^{−r} [F(re^{−iπ}) − F(re^{iπ})] dr`.
    fn contour_cut(&self, z: Complex64) -> Complex64 {
        let mut acc = NeumaierComplex::default();
        for node in &self.nodes {
            let lower = node.lower_num / (node.lower_pow - z);
            let upper = node.lower_num.conj() / (node.lower_pow.conj() - z);
            acc.add((lower - upper) * node.weight);
        }
        // divide by i
        let v = acc.value();
        Complex64::new(v.im, -v.re)
    }

    fn check_switch(&self) -> Result<(), SpecialError> {
        if self.exact_exp {
            return Ok(());
        }
        let radius = self.params.series_radius;
        let phase = Complex64::from_polar(1.0, -0.5 * self.beta * PI);
        for z in [phase * radius, Complex64::new(radius, 0.0), phase.conj() * radius] {
            let reference = self.residue(z) + self.contour_cut(z);
            let scale = reference.norm().max(f64::MIN_POSITIVE);
            if let Some((s, err)) = self.series_sum(z * (1.0 - 1e-12)) {
                if err <= self.params.tol {
                    let diff = (s - reference).norm() / scale;
                    if diff > 1e3 * self.params.tol {
                        return Err(SpecialError::PrecisionLoss(format!(
                            "series and contour disagree at |z| = {radius}: relative difference {diff:e}"
                        )));
                    }
                }
            }
            if let Some((a, err)) = self.asymptotic_tail(z) {
                let v = self.residue(z) + a;
                let diff = (v - reference).norm() / scale;
                if diff > 1e3 * (err / scale).max(self.params.tol) {
                    return Err(SpecialError::PrecisionLoss(format!(
                        "asymptotic expansion and contour disagree at |z| = {radius}: relative difference {diff:e}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn hankel_nodes(beta: f64, gamma: f64) -> Vec<HankelNode> {
    let mut nodes = Vec::new();
    let sin_sector = (0.5 * beta * PI).sin();
    let t_lo = -5.0;
    let t_hi = 2.6;
    let count = ((t_hi - t_lo) / CONTOUR_STEP).round() as i64;
    for i in 0..=count {
        let t = t_lo + i as f64 * CONTOUR_STEP;
        let u = 0.5 * PI * t.sinh();
        let r = u.exp();
        let jac = 0.5 * PI * t.cosh() * r;
        let weight = CONTOUR_STEP * jac * (-r).exp() / (2.0 * PI);
        if weight == 0.0 {
            continue;
        }
        let rb = r.powf(beta);
        let num_mag = r.powf(beta - gamma);
        let bound = weight * num_mag / (rb.max(CONTOUR_MIN_ABS) * sin_sector);
        if bound < 1e-20 {
            continue;
        }
        nodes.push(HankelNode {
            weight,
            lower_pow: Complex64::from_polar(rb, -beta * PI),
            lower_num: Complex64::from_polar(num_mag, -(beta - gamma) * PI),
        });
    }
    nodes
}

#[derive(Debug, Default, Clone, Copy)]
struct NeumaierComplex {
    re: f64,
    im: f64,
    c_re: f64,
    c_im: f64,
}

impl NeumaierComplex {
    fn add(&mut self, x: Complex64) {
        neumaier(&mut self.re, &mut self.c_re, x.re);
        neumaier(&mut self.im, &mut self.c_im, x.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.c_re, self.im + self.c_im)
    }
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// `E_β(z)` with the given parameters.
pub fn ml_e(beta: f64, z: Complex64, params: &MLParams) -> Result<Complex64, SpecialError> {
    let p = MLParams { beta, ..*params };
    MittagLeffler::new(p, 1.0)?.eval(z)
}

/// `E_{β,β}(z)` with the given parameters.
pub fn ml_ee(beta: f64, z: Complex64, params: &MLParams) -> Result<Complex64, SpecialError> {
    let p = MLParams { beta, ..*params };
    MittagLeffler::new(p, beta)?.eval(z)
}
