//! Per-mode multipliers: the dispersion table, the propagator
//! `E_β(i^{−β} t^β μ)` and product-integration weights of the memory kernel
//! `K(τ) = τ^{β−1} E_{β,β}(i^{−β} τ^β μ)`.
//!
//! On the sector boundary the kernel splits as
//! `K(τ) = ρ e^{−iωτ} + τ^{β−1} A(i^{−β} τ^β μ)` with `ω = μ^{1/β}`,
//! `ρ = β^{−1} ω^{1−β} e^{−i(1−β)π/2}` and `A` the non-oscillatory remainder
//! of the Mittag-Leffler evaluator. The oscillatory part is integrated in
//! closed form against the hat functions; the remainder by Gauss–Legendre
//! panels, and the weakly singular start `[0, min(dt, 1/ω)]` by the exact
//! term-wise integral of the power series.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ModelParams, SolverError};
use crate::lattice::LatticeGrid;
use crate::quadrature::{gauss_legendre, Rule};
use crate::special::{recip_gamma, MLParams, MittagLeffler};
use crate::symbol::{Symbol, SymbolConfig};
use crate::trajectory::TimeGrid;

/// Which dispersion relation the modes follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolSource {
    /// `μ = h^{−α} w(θ)`, the lattice symbol.
    Lattice,
    /// `μ = |θ/h|^α`, the continuum symbol on the same frequencies.
    Continuum,
}

/// Dispersion multipliers `μ` for the distinct frequencies `|θ_j|`,
/// `j = 0..=N/2`, of a lattice.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    grid: LatticeGrid,
    source: SymbolSource,
    mu: Vec<f64>,
}

impl SymbolTable {
    pub fn new(params: &ModelParams, grid: &LatticeGrid, source: SymbolSource) -> Result<Self, SolverError> {
        let h = grid.h();
        let half = grid.n_points() / 2;
        let thetas = (0..=half).map(|j| grid.frequency(j).abs().min(PI));
        let mu = match source {
            SymbolSource::Lattice => {
                let sym = Symbol::new(SymbolConfig::new(params.alpha)?)?;
                let scale = h.powf(-params.alpha);
                thetas.map(|th| scale * sym.w(th)).collect()
            }
            SymbolSource::Continuum => thetas.map(|th| (th / h).powf(params.alpha)).collect(),
        };
        Ok(SymbolTable {
            grid: *grid,
            source,
            mu,
        })
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn source(&self) -> SymbolSource {
        self.source
    }

    /// Multipliers of the distinct frequencies `j = 0..=N/2`.
    pub fn distinct(&self) -> &[f64] {
        &self.mu
    }

    /// Distinct-frequency index of FFT index `k`.
    pub fn mode_index(&self, k: usize) -> usize {
        let n = self.grid.n_points();
        k.min(n - k)
    }

    /// Multiplier of FFT index `k`.
    pub fn mu(&self, k: usize) -> f64 {
        self.mu[self.mode_index(k)]
    }
}

/// Weights `(a_ℓ, b_ℓ)`, `ℓ = 1..=M`, such that for the source interval
/// `[t_j, t_{j+1}]` at lag `ℓ = n − j`,
/// `∫ K(t_n − s) g(s) ds ≈ a_ℓ g(t_j) + b_ℓ g(t_{j+1})` for piecewise linear `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

/// Evaluators shared by all modes of one fractional order.
#[derive(Debug, Clone)]
pub struct KernelBuilder {
    beta: f64,
    e_one: MittagLeffler,
    e_beta: MittagLeffler,
    panel: Rule,
}

const HEAD_TERMS: usize = 120;

/// `∫_0^1 e^{−iθx} dx` and `∫_0^1 x e^{−iθx} dx`.
fn hat_moments(theta: f64) -> (Complex64, Complex64) {
    let z = Complex64::new(0.0, -theta);
    if theta.abs() < 0.5 {
        let mut s0 = Complex64::new(0.0, 0.0);
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut zk = Complex64::new(1.0, 0.0); // z^k / k!
        for k in 0..24 {
            let kf = k as f64;
            s0 += zk / (kf + 1.0);
            s1 += zk / (kf + 2.0);
            zk *= z / (kf + 1.0);
        }
        (s0, s1)
    } else {
        let a = Complex64::new(0.0, theta);
        let e = (-a).exp();
        ((1.0 - e) / a, (1.0 - e - a * e) / (a * a))
    }
}

impl KernelBuilder {
    pub fn new(beta: f64) -> Result<Self, SolverError> {
        let p = MLParams::new(beta)?;
        Ok(KernelBuilder {
            beta,
            e_one: MittagLeffler::new(p, 1.0)?,
            e_beta: MittagLeffler::new(p, beta)?,
            panel: gauss_legendre(8),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn lambda(&self, mu: f64) -> Complex64 {
        Complex64::from_polar(mu, -0.5 * self.beta * PI)
    }

    /// `E_β(i^{−β} t^β μ)`.
    pub fn propagator(&self, t: f64, mu: f64) -> Result<Complex64, SolverError> {
        if t == 0.0 || mu == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        Ok(self.e_one.eval(self.lambda(mu * t.powf(self.beta)))?)
    }

    /// The memory kernel `K(τ)` itself.
    pub fn kernel(&self, tau: f64, mu: f64) -> Result<Complex64, SolverError> {
        let z = self.lambda(mu * tau.powf(self.beta));
        Ok(tau.powf(self.beta - 1.0) * self.e_beta.eval(z)?)
    }

    /// Residue coefficient `ρ` and frequency `ω` of the oscillatory part.
    pub fn residue_coefficients(&self, mu: f64) -> (Complex64, f64) {
        let beta = self.beta;
        let omega = mu.powf(1.0 / beta);
        let rho = Complex64::from_polar(omega.powf(1.0 - beta) / beta, -0.5 * (1.0 - beta) * PI);
        (rho, omega)
    }

    /// `τ^{β−1} A(i^{−β} τ^β μ)`, the kernel minus its oscillatory part.
    fn cut_part(&self, tau: f64, mu: f64) -> Result<Complex64, SolverError> {
        if self.beta == 1.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let z = self.lambda(mu * tau.powf(self.beta));
        let (_, a) = self.e_beta.eval_parts(z)?;
        Ok(tau.powf(self.beta - 1.0) * a)
    }

    /// `(∫_c^d K, ∫_c^d K·(τ − c))` over a panel away from `τ = 0`.
    fn panel_moments(
        &self,
        c: f64,
        d: f64,
        mu: f64,
        rho: Complex64,
        omega: f64,
    ) -> Result<(Complex64, Complex64), SolverError> {
        let len = d - c;
        let (j0, j1) = hat_moments(omega * len);
        let phase = rho * Complex64::from_polar(len, -omega * c);
        let mut m0 = phase * j0;
        let mut m1 = phase * j1 * len;
        if self.beta != 1.0 {
            for (x, w) in self.panel.nodes.iter().zip(&self.panel.weights) {
                let off = 0.5 * len * (x + 1.0);
                let v = self.cut_part(c + off, mu)? * (0.5 * len * w);
                m0 += v;
                m1 += v * off;
            }
        }
        Ok((m0, m1))
    }

    /// `(∫_0^x K, ∫_0^x K·τ)` by term-wise integration of the series,
    /// valid for `μ x^β ≤ 1`.
    fn head_moments(&self, x: f64, mu: f64) -> (Complex64, Complex64) {
        let beta = self.beta;
        let lam_x = self.lambda(mu * x.powf(beta));
        let mut zk = Complex64::new(1.0, 0.0);
        let mut s0 = Complex64::new(0.0, 0.0);
        let mut s1 = Complex64::new(0.0, 0.0);
        for k in 0..HEAD_TERMS {
            let e = beta * (k as f64 + 1.0);
            let rg = recip_gamma(e);
            let t0 = zk * (rg / e);
            let t1 = zk * (rg / (e + 1.0));
            s0 += t0;
            s1 += t1;
            if k > 2 && t0.norm() < 1e-18 * s0.norm() {
                break;
            }
            zk *= lam_x;
        }
        let xb = x.powf(beta);
        (s0 * xb, s1 * (xb * x))
    }

    /// Product-integration weights for every lag of the time grid.
    pub fn weights(&self, time: &TimeGrid, mu: f64) -> Result<KernelWeights, SolverError> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(SolverError::InvalidParams(format!(
                "multiplier must be non-negative, got {mu}"
            )));
        }
        let dt = time.dt();
        let m = time.m_steps();
        let (rho, omega) = self.residue_coefficients(mu);
        let mut a = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);

        // lag 1: series head on [0, x0], dyadic panels on [x0, dt]
        let x0 = if omega * dt > 1.0 { 1.0 / omega } else { dt };
        let (mut m0, mut m1) = self.head_moments(x0, mu);
        let mut c = x0;
        while c < dt * (1.0 - 1e-14) {
            let d = (2.0 * c).min(dt);
            let (p0, p1) = self.panel_moments(c, d, mu, rho, omega)?;
            m0 += p0;
            m1 += p1 + p0 * c;
            c = d;
        }
        let a1 = m1 / dt;
        a.push(a1);
        b.push(m0 - a1);

        for lag in 2..=m {
            let c = (lag - 1) as f64 * dt;
            let (p0, p1) = self.panel_moments(c, c + dt, mu, rho, omega)?;
            let al = p1 / dt;
            a.push(al);
            b.push(p0 - al);
        }
        Ok(KernelWeights { a, b })
    }
}

/// Product-integration weights of the memory kernel for one multiplier.
pub fn duhamel_weights(time: &TimeGrid, mu: f64, params: &ModelParams) -> Result<KernelWeights, SolverError> {
    KernelBuilder::new(params.beta)?.weights(time, mu)
}

/// Propagator values `E_β(i^{−β} t_n^β μ_j)` and kernel weights for every
/// distinct mode of a symbol table on a time grid.
#[derive(Debug, Clone)]
pub struct KernelTables {
    /// `[j][n]`
    pub propagator: Vec<Vec<Complex64>>,
    /// `[j]`
    pub weights: Vec<KernelWeights>,
}

impl KernelTables {
    pub fn new(table: &SymbolTable, time: &TimeGrid, params: &ModelParams) -> Result<Self, SolverError> {
        let builder = KernelBuilder::new(params.beta)?;
        let nodes = time.nodes();
        let rows: Vec<(Vec<Complex64>, KernelWeights)> = table
            .distinct()
            .par_iter()
            .map(|&mu| {
                let prop = nodes
                    .iter()
                    .map(|&t| builder.propagator(t, mu))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((prop, builder.weights(time, mu)?))
            })
            .collect::<Result<Vec<_>, SolverError>>()?;
        let (propagator, weights) = rows.into_iter().unzip();
        Ok(KernelTables { propagator, weights })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;
    use crate::special::gamma_real;

    #[test]
    fn residue_split_matches_full_kernel() {
        let kb = KernelBuilder::new(0.85).unwrap();
        for &mu in &[0.3, 3.0, 40.0, 900.0] {
            let (rho, omega) = kb.residue_coefficients(mu);
            for &tau in &[1e-3, 0.05, 0.4, 2.0] {
                let full = kb.kernel(tau, mu).unwrap();
                let split = rho * Complex64::from_polar(1.0, -omega * tau) + kb.cut_part(tau, mu).unwrap();
                assert!(
                    (full - split).norm() <= 1e-10 * full.norm().max(1.0),
                    "mu {mu} tau {tau}"
                );
            }
        }
    }

    #[test]
    fn classical_limit_gives_trapezoid_weights() {
        let tg = TimeGrid::new(1.0, 10).unwrap();
        let w = KernelBuilder::new(1.0).unwrap().weights(&tg, 0.0).unwrap();
        for l in 0..10 {
            assert!((w.a[l] - Complex64::new(0.05, 0.0)).norm() < 1e-15);
            assert!((w.b[l] - Complex64::new(0.05, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn classical_limit_matches_exponential_integrals() {
        let tg = TimeGrid::new(0.5, 5).unwrap();
        let mu = 7.0;
        let w = KernelBuilder::new(1.0).unwrap().weights(&tg, mu).unwrap();
        let dt = 0.1;
        for l in 1..=5 {
            let c = (l - 1) as f64 * dt;
            let re = |f: &dyn Fn(f64) -> f64| integrate_adaptive(f, c, c + dt, 1e-15).0;
            let a_re = re(&|t| (mu * t).cos() * (t - c) / dt);
            let a_im = re(&|t| -(mu * t).sin() * (t - c) / dt);
            assert!((w.a[l - 1] - Complex64::new(a_re, a_im)).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_multiplier_matches_power_integrals() {
        // K(τ) = τ^{β−1}/Γ(β): ∫_c^{c+dt} K (τ − c)/dt and ∫ K (c + dt − τ)/dt
        let beta: f64 = 0.85;
        let dt = 0.01;
        let tg = TimeGrid::new(0.1, 10).unwrap();
        let w = KernelBuilder::new(beta).unwrap().weights(&tg, 0.0).unwrap();
        let g = gamma_real(beta).unwrap();
        let prim0 = |x: f64| x.powf(beta) / beta / g;
        let prim1 = |x: f64| x.powf(beta + 1.0) / (beta + 1.0) / g;
        for l in 1..=10 {
            let c = (l - 1) as f64 * dt;
            let d = c + dt;
            let m0 = prim0(d) - prim0(c);
            let m1 = (prim1(d) - prim1(c)) - c * m0;
            let a = m1 / dt;
            let b = m0 - a;
            assert!(
                (w.a[l - 1].re - a).abs() < 1e-12 * a.abs(),
                "lag {l}: {} vs {a}",
                w.a[l - 1].re
            );
            assert!((w.b[l - 1].re - b).abs() < 1e-12 * b.abs(), "lag {l}");
            assert!(w.a[l - 1].im.abs() < 1e-16 && w.b[l - 1].im.abs() < 1e-16);
        }
    }

    #[test]
    fn propagator_basic_values() {
        let kb = KernelBuilder::new(0.85).unwrap();
        assert_eq!(kb.propagator(0.0, 5.0).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(kb.propagator(3.0, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        let k1 = KernelBuilder::new(1.0).unwrap();
        let v = k1.propagator(0.7, 3.0).unwrap();
        assert!((v - Complex64::from_polar(1.0, -2.1)).norm() < 1e-15);
    }

    #[test]
    fn continuum_table_is_power_law() {
        let p = ModelParams::new(1.5, 0.85, 3, 1.0);
        let g = LatticeGrid::new(0.1, 64).unwrap();
        let t = SymbolTable::new(&p, &g, SymbolSource::Continuum).unwrap();
        assert_eq!(t.distinct().len(), 33);
        assert_eq!(t.mu(0), 0.0);
        let th = g.frequency(5);
        assert!((t.mu(5) - (th / 0.1).powf(1.5)).abs() < 1e-12);
        assert_eq!(t.mu(59), t.mu(5));
        let lat = SymbolTable::new(&p, &g, SymbolSource::Lattice).unwrap();
        assert_eq!(lat.mu(0), 0.0);
        assert!(lat.distinct().iter().all(|&m| m >= 0.0));
        // low frequencies agree with the continuum symbol to leading order,
        // with relative deviation of order θ^{2−α}
        let dev1 = (lat.mu(1) / t.mu(1) - 1.0).abs();
        let dev4 = (lat.mu(4) / t.mu(4) - 1.0).abs();
        assert!(dev1 < 0.2 && dev4 > dev1);
    }
}
