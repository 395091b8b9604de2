//! Lattice dispersion symbol `w(ξ) = 2 Σ_{n≥1} (1 − cos nξ)/n^{1+α}`, its
//! derivatives, the phase function `φ_h = h^{−σ} w^{1/β}` and its critical
//! points.
//!
//! `w` itself is evaluated through the convergent expansion (valid for
//! `|ξ| < 2π`)
//!
//! `w(ξ) = c |ξ|^α − 2 Σ_{j≥1} (−1)^j ζ(1+α−2j) ξ^{2j}/(2j)!`,
//! `c = −2Γ(−α)cos(απ/2) = π/(Γ(1+α) sin(απ/2))`,
//!
//! which is exact to rounding on `[−π, π]`; the truncated defining series is
//! kept as an independent cross-check ([`Symbol::w_series`]). The
//! derivatives use the integral representations
//!
//! `w′(ξ) = (2 sin ξ/Γ(α)) ∫_0^∞ y^{α−1} e^y / (e^{2y} − 2e^y cos ξ + 1) dy`,
//! `w″(ξ) = (2/Γ(α−1)) ∫_0^∞ y^{α−2} (e^y cos ξ − 1) / (e^{2y} − 2e^y cos ξ + 1) dy`,
//!
//! with the endpoint singularity integrated by Gauss–Jacobi and the rest by
//! Gauss–Legendre on geometrically graded panels.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::quadrature::{gauss_jacobi_left, gauss_legendre, Rule};
use crate::special::{gamma_unchecked, zeta_real};

/// Failures of the symbol routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymbolError {
    #[error("invalid symbol configuration: {0}")]
    InvalidConfig(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("root bracket failure: {0}")]
    Bracket(String),
    #[error("expected exactly one sign change, found {count}")]
    Multiplicity { count: usize },
}

/// Configuration of the dispersion symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolConfig {
    /// Order of the fractional Laplacian, `1 < alpha < 2`.
    pub alpha: f64,
    /// Truncation of the defining cosine series (cross-check route only).
    pub series_terms: usize,
    /// Node budget of the integral representations.
    pub quad_nodes: usize,
    /// Divide by the normalization constant so that `w(ξ) = |ξ|^α + O(ξ²)`.
    pub normalize: bool,
    /// Required bound on the truncated-series tail `4/(α N^α)`.
    pub series_tol: f64,
}

impl SymbolConfig {
    /// Defaults: 64 quadrature nodes, normalized, tail tolerance `10^{-5}`
    /// and at least `10^5` series terms (more when `α` is close to 1).
    pub fn new(alpha: f64) -> Result<Self, SymbolError> {
        let series_tol = 1e-5;
        let needed = (4.0 / (alpha * series_tol)).powf(1.0 / alpha).ceil();
        let series_terms = if needed.is_finite() && needed > 1e5 {
            needed as usize
        } else {
            100_000
        };
        let cfg = SymbolConfig {
            alpha,
            series_terms,
            quad_nodes: 64,
            normalize: true,
            series_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same configuration without normalization.
    pub fn unnormalized(alpha: f64) -> Result<Self, SymbolError> {
        let mut cfg = Self::new(alpha)?;
        cfg.normalize = false;
        Ok(cfg)
    }

    /// Upper bound `4/(α N^α)` on the tail of the truncated series.
    pub fn series_tail_bound(&self) -> f64 {
        4.0 / (self.alpha * (self.series_terms as f64).powf(self.alpha))
    }

    pub fn validate(&self) -> Result<(), SymbolError> {
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(SymbolError::InvalidConfig(format!(
                "1 < alpha < 2 fails: alpha = {}",
                self.alpha
            )));
        }
        if self.series_terms < 1000 {
            return Err(SymbolError::InvalidConfig(format!(
                "series_terms >= 1000 fails: {}",
                self.series_terms
            )));
        }
        if self.quad_nodes < 64 {
            return Err(SymbolError::InvalidConfig(format!(
                "quad_nodes >= 64 fails: {}",
                self.quad_nodes
            )));
        }
        let tail = self.series_tail_bound();
        if !(tail <= self.series_tol) {
            return Err(SymbolError::InvalidConfig(format!(
                "series tail 4/(alpha N^alpha) = {tail:e} exceeds series_tol = {:e}",
                self.series_tol
            )));
        }
        Ok(())
    }
}

/// Critical points of `w` and `φ_h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoints {
    /// Zero of `w″` in `(0, π/2)`.
    pub xi0: f64,
    /// Zero of `φ″` in `(ξ₀, π)`.
    pub xi1: f64,
    /// Edge zero of `w′`, equal to `π`.
    pub xi2: f64,
}

/// Bisection bracket width for the critical points.
pub const ROOT_TOL: f64 = 1e-12;
/// Grid size used to count sign changes of `φ″`.
const SIGN_GRID: usize = 2000;
/// Upper end of the outer graded panels; `e^{−64}` is negligible.
const OUTER_LIMIT: f64 = 64.0;

/// Precomputed dispersion symbol for one configuration.
#[derive(Debug, Clone)]
pub struct Symbol {
    cfg: SymbolConfig,
    /// closed-form limit of `w_raw(ξ)/|ξ|^α`
    c_closed: f64,
    /// Richardson-extrapolated limit of `w_raw(ξ)/|ξ|^α`
    c_fit: f64,
    /// expansion coefficients of `ξ^{2j}`, `j = 1, 2, ...`
    coeffs: Vec<f64>,
    scale: f64,
    jacobi_first: Rule,
    jacobi_second: Rule,
    legendre: Rule,
    inv_gamma_a: f64,
    inv_gamma_am1: f64,
}

impl Symbol {
    pub fn new(cfg: SymbolConfig) -> Result<Self, SymbolError> {
        cfg.validate()?;
        let alpha = cfg.alpha;
        let c_closed = PI / (gamma_unchecked(1.0 + alpha) * (0.5 * alpha * PI).sin());
        let mut coeffs = Vec::new();
        for j in 1..60usize {
            let s = 1.0 + alpha - 2.0 * j as f64;
            let z = zeta_real(s).map_err(|e| SymbolError::Domain(e.to_string()))?;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let a = -2.0 * sign * z / gamma_unchecked(2.0 * j as f64 + 1.0);
            coeffs.push(a);
            if a.abs() * PI.powi(2 * j as i32) < 1e-19 {
                break;
            }
        }
        let n_jac = cfg.quad_nodes / 2;
        let n_leg = cfg.quad_nodes / 4;
        let mut sym = Symbol {
            cfg,
            c_closed,
            c_fit: c_closed,
            coeffs,
            scale: 1.0,
            jacobi_first: gauss_jacobi_left(n_jac, alpha - 1.0, 1.0),
            jacobi_second: gauss_jacobi_left(n_jac, alpha - 2.0, 1.0),
            legendre: gauss_legendre(n_leg),
            inv_gamma_a: 1.0 / gamma_unchecked(alpha),
            inv_gamma_am1: 1.0 / gamma_unchecked(alpha - 1.0),
        };
        sym.c_fit = sym.richardson_constant();
        if cfg.normalize {
            sym.scale = 1.0 / sym.c_fit;
        }
        Ok(sym)
    }

    pub fn config(&self) -> &SymbolConfig {
        &self.cfg
    }

    pub fn alpha(&self) -> f64 {
        self.cfg.alpha
    }

    /// Numerically fitted normalization constant `lim w(ξ)/|ξ|^α`.
    pub fn c_fit(&self) -> f64 {
        self.c_fit
    }

    /// Closed-form normalization constant `π/(Γ(1+α) sin(απ/2))`.
    pub fn c_closed(&self) -> f64 {
        self.c_closed
    }

    /// Factor applied to raw values (`1/c_fit` when normalized, else 1).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn richardson_constant(&self) -> f64 {
        let alpha = self.cfg.alpha;
        let ratio = |xi: f64| self.w_raw(xi) / xi.powf(alpha);
        let xs = [1e-2, 5e-3, 2.5e-3];
        let r: Vec<f64> = xs.iter().map(|&x| ratio(x)).collect();
        // R(ξ) = c + A ξ^{2−α} + B ξ^{4−α} + ...
        let q1 = 2f64.powf(2.0 - alpha);
        let r1 = [(q1 * r[1] - r[0]) / (q1 - 1.0), (q1 * r[2] - r[1]) / (q1 - 1.0)];
        let q2 = 2f64.powf(4.0 - alpha);
        (q2 * r1[1] - r1[0]) / (q2 - 1.0)
    }

    /// Unnormalized `w(ξ)`, 2π-periodic and even.
    pub fn w_raw(&self, xi: f64) -> f64 {
        let x = reduce_to_pi(xi).abs();
        if x == 0.0 {
            return 0.0;
        }
        let x2 = x * x;
        let mut poly = 0.0;
        for &a in self.coeffs.iter().rev() {
            poly = poly * x2 + a;
        }
        self.c_closed * x.powf(self.cfg.alpha) + poly * x2
    }

    /// `w(ξ)` (normalized if configured).
    pub fn w(&self, xi: f64) -> f64 {
        self.w_raw(xi) * self.scale
    }

    /// `w(ξ)` from the truncated defining series with Kahan summation.
    pub fn w_series(&self, xi: f64) -> f64 {
        let x = reduce_to_pi(xi);
        let s = 1.0 + self.cfg.alpha;
        let mut sum = 0.0;
        let mut comp = 0.0;
        for n in (1..=self.cfg.series_terms).rev() {
            let nf = n as f64;
            let term = 2.0 * (1.0 - (nf * x).cos()) / nf.powf(s);
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum * self.scale
    }

    /// Panels `[0, a]` (Jacobi) and graded Legendre panels up to the cut-off.
    fn integrate<F, G>(&self, xi: f64, jacobi: &Rule, singular_exp: f64, smooth: F, outer: G) -> f64
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let a = 0.5 * xi.min(1.0);
        // Jacobi panel on [0, a]: weight y^{singular_exp}
        let scale = a.powf(singular_exp + 1.0);
        let mut total = 0.0;
        for (&y, &w) in jacobi.nodes.iter().zip(&jacobi.weights) {
            total += w * scale * smooth(a * y);
        }
        let mut lo = a;
        while lo < OUTER_LIMIT {
            let hi = (2.0 * lo).min(OUTER_LIMIT);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let mut panel = 0.0;
            for (&t, &w) in self.legendre.nodes.iter().zip(&self.legendre.weights) {
                let y = mid + half * t;
                let v = if lo >= 1.0 { outer(y) } else { smooth(y) };
                panel += w * y.powf(singular_exp) * v;
            }
            total += half * panel;
            lo = hi;
        }
        total
    }

    /// Unnormalized `w′(ξ)` for `ξ ∈ [0, π]`.
    pub fn w_prime_raw(&self, xi: f64) -> Result<f64, SymbolError> {
        if !(0.0..=PI).contains(&xi) {
            return Err(SymbolError::Domain(format!("w' needs xi in [0, pi], got {xi}")));
        }
        if xi == 0.0 || xi == PI {
            return Ok(0.0);
        }
        let s2 = (0.5 * xi).sin().powi(2);
        let cosx = xi.cos();
        // e^y / (e^{2y} − 2e^y cos ξ + 1) = e^y / ((e^y−1)^2 + 4 e^y sin^2(ξ/2))
        let inner = move |y: f64| {
            let em1 = y.exp_m1();
            (1.0 + em1) / (em1 * em1 + 4.0 * (1.0 + em1) * s2)
        };
        let outer = move |y: f64| {
            let e = (-y).exp();
            e / (1.0 - 2.0 * e * cosx + e * e)
        };
        let integral = self.integrate(xi, &self.jacobi_first, self.cfg.alpha - 1.0, inner, outer);
        Ok(2.0 * xi.sin() * self.inv_gamma_a * integral)
    }

    /// Unnormalized `w″(ξ)` for `ξ ∈ (0, π]`.
    pub fn w_second_raw(&self, xi: f64) -> Result<f64, SymbolError> {
        if !(xi > 0.0 && xi <= PI) {
            return Err(SymbolError::Domain(format!(
                "w'' needs xi in (0, pi] (it diverges at 0), got {xi}"
            )));
        }
        let s2 = (0.5 * xi).sin().powi(2);
        let cosx = xi.cos();
        // (e^y cos ξ − 1) = (e^y − 1) − 2 e^y sin^2(ξ/2)
        let inner = move |y: f64| {
            let em1 = y.exp_m1();
            let ey = 1.0 + em1;
            (em1 - 2.0 * ey * s2) / (em1 * em1 + 4.0 * ey * s2)
        };
        let outer = move |y: f64| {
            let e = (-y).exp();
            e * (cosx - e) / (1.0 - 2.0 * e * cosx + e * e)
        };
        let integral = self.integrate(xi, &self.jacobi_second, self.cfg.alpha - 2.0, inner, outer);
        Ok(2.0 * self.inv_gamma_am1 * integral)
    }

    /// `w′(ξ)` (normalized if configured); 0 at `ξ = 0` by convention.
    pub fn w_prime(&self, xi: f64) -> Result<f64, SymbolError> {
        Ok(self.w_prime_raw(xi)? * self.scale)
    }

    /// `w″(ξ)` (normalized if configured).
    pub fn w_second(&self, xi: f64) -> Result<f64, SymbolError> {
        Ok(self.w_second_raw(xi)? * self.scale)
    }

    /// Phase function `φ_h(ξ) = h^{−α/β} w(ξ)^{1/β}`.
    pub fn phi(&self, h: f64, beta: f64, xi: f64) -> f64 {
        let sigma = self.cfg.alpha / beta;
        h.powf(-sigma) * self.w(xi).powf(1.0 / beta)
    }

    /// Sign-equivalent form of `φ″` at `h = 1`:
    /// `(1/β − 1) w′² + w w″` (= `φ″ / (β^{-1} w^{1/β−2})`).
    pub fn phi_second_reduced(&self, beta: f64, xi: f64) -> Result<f64, SymbolError> {
        let w = self.w(xi);
        let wp = self.w_prime(xi)?;
        let wpp = self.w_second(xi)?;
        Ok((1.0 / beta - 1.0) * wp * wp + w * wpp)
    }

    /// `φ″(ξ)` at `h = 1`.
    pub fn phi_second(&self, beta: f64, xi: f64) -> Result<f64, SymbolError> {
        let w = self.w(xi);
        let wp = self.w_prime(xi)?;
        let wpp = self.w_second(xi)?;
        let e = 1.0 / beta;
        Ok(e * ((e - 1.0) * w.powf(e - 2.0) * wp * wp + w.powf(e - 1.0) * wpp))
    }

    /// Unique zero of `w″` in `(0, π/2)` by bisection.
    pub fn find_xi0(&self) -> Result<f64, SymbolError> {
        let f = |x: f64| self.w_second_raw(x);
        bisect(f, 1e-8, 0.5 * PI, "w'' on (0, pi/2]")
    }

    /// Unique zero of `φ″` (h = 1) in `(ξ₀, π)`, after checking on a grid
    /// that there is exactly one sign change.
    pub fn find_xi1(&self, beta: f64) -> Result<f64, SymbolError> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(SymbolError::Domain(format!("beta must lie in (0, 1], got {beta}")));
        }
        let xi0 = self.find_xi0()?;
        if beta == 1.0 {
            return Ok(xi0);
        }
        let g = |x: f64| self.phi_second_reduced(beta, x);
        let count = count_sign_changes(g, xi0, PI, SIGN_GRID)?;
        if count != 1 {
            return Err(SymbolError::Multiplicity { count });
        }
        bisect(g, xi0, PI, "phi'' on (xi0, pi)")
    }

    /// `(ξ₀, ξ₁, π)`.
    pub fn critical_points(&self, beta: f64) -> Result<CriticalPoints, SymbolError> {
        let xi0 = self.find_xi0()?;
        let xi1 = self.find_xi1(beta)?;
        Ok(CriticalPoints { xi0, xi1, xi2: PI })
    }
}

/// Reduce to `[−π, π]` by 2π-periodicity.
fn reduce_to_pi(xi: f64) -> f64 {
    if (-PI..=PI).contains(&xi) {
        return xi;
    }
    let two_pi = 2.0 * PI;
    (xi + PI).rem_euclid(two_pi) - PI
}

/// Count sign changes of `f` on a uniform interior grid of `(a, b)`.
pub fn count_sign_changes<F>(f: F, a: f64, b: f64, n: usize) -> Result<usize, SymbolError>
where
    F: Fn(f64) -> Result<f64, SymbolError>,
{
    let mut count = 0;
    let mut prev: Option<f64> = None;
    for i in 1..n {
        let x = a + (b - a) * i as f64 / n as f64;
        let v = f(x)?;
        if v == 0.0 {
            continue;
        }
        if let Some(p) = prev {
            if (p > 0.0) != (v > 0.0) {
                count += 1;
            }
        }
        prev = Some(v);
    }
    Ok(count)
}

fn bisect<F>(f: F, mut lo: f64, mut hi: f64, what: &str) -> Result<f64, SymbolError>
where
    F: Fn(f64) -> Result<f64, SymbolError>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(SymbolError::Bracket(format!(
            "{what}: no sign change between {lo} ({f_lo:e}) and {hi} ({f_hi:e})"
        )));
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `w(ξ)` for the given configuration.
pub fn w_eval(cfg: &SymbolConfig, xi: f64) -> Result<f64, SymbolError> {
    Ok(Symbol::new(*cfg)?.w(xi))
}

/// `w′(ξ)` for the given configuration.
pub fn w_prime(cfg: &SymbolConfig, xi: f64) -> Result<f64, SymbolError> {
    Symbol::new(*cfg)?.w_prime(xi)
}

/// `w″(ξ)` for the given configuration.
pub fn w_second(cfg: &SymbolConfig, xi: f64) -> Result<f64, SymbolError> {
    Symbol::new(*cfg)?.w_second(xi)
}

/// `φ_h(ξ)` for the given configuration and `β`.
pub fn phi_eval(cfg: &SymbolConfig, h: f64, beta: f64, xi: f64) -> Result<f64, SymbolError> {
    Ok(Symbol::new(*cfg)?.phi(h, beta, xi))
}

/// Zero of `w″` in `(0, π/2)`.
pub fn find_xi0(cfg: &SymbolConfig) -> Result<f64, SymbolError> {
    Symbol::new(*cfg)?.find_xi0()
}

/// Zero of `φ″` in `(ξ₀, π)`.
pub fn find_xi1(cfg: &SymbolConfig, beta: f64) -> Result<f64, SymbolError> {
    Symbol::new(*cfg)?.find_xi1(beta)
}
