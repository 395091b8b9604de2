//! Lattice norms: `L^p_h`, `H^s_h`, the smoothing norm
//! `‖⟨h^{−1}∇⟩^δ u‖_{L^∞_h L²_T}`, the maximal norm `‖u‖_{L^q_h L^∞_T}` and
//! their combination `Λ_T`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fourier::{dft, FourierPlan};
use super::ops::smoothing_multiplier;
use super::LatticeField;
use crate::trajectory::SolutionTrajectory;

/// `(h Σ |u|^p)^{1/p}`, or `max |u|` for `p = ∞`.
pub fn norm_lp(field: &LatticeField, p: f64) -> f64 {
    assert!(p >= 1.0, "L^p norm needs p >= 1, got {p}");
    let h = field.grid().h();
    if p.is_infinite() {
        return field.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let sum: f64 = if p == 2.0 {
        field.values().iter().map(|v| v.norm_sqr()).sum()
    } else {
        field.values().iter().map(|v| v.norm().powf(p)).sum()
    };
    (h * sum).powf(1.0 / p)
}

/// `H^s_h` norm from the Fourier coefficients,
/// `((h/2π) Δθ Σ (1 + h^{−2s}|θ|^{2s}) |û(θ)|²)^{1/2}`; `s = 0` is `L²_h`.
pub fn norm_sobolev(field: &LatticeField, s: f64) -> f64 {
    let spec = dft(field);
    if s == 0.0 {
        return spec.weighted_energy(|_| 1.0).sqrt();
    }
    let h = field.grid().h();
    spec.weighted_energy(|th| 1.0 + (th.abs() / h).powf(2.0 * s)).sqrt()
}

/// `sup_m (∫_0^T |⟨h^{−1}∇⟩^δ u(mh, t)|² dt)^{1/2}` with the trapezoid rule in time.
pub fn norm_smoothing(traj: &SolutionTrajectory, delta: f64) -> f64 {
    let grid = *traj.grid();
    let h = grid.h();
    let n = grid.n_points();
    let multipliers: Vec<f64> = (0..n)
        .map(|k| smoothing_multiplier(h, grid.frequency(k), delta))
        .collect();
    let apply = delta != 0.0;
    let intensities: Vec<Vec<f64>> = traj
        .snapshots()
        .par_iter()
        .map(|snap| {
            if !apply {
                return snap.values().iter().map(|v| v.norm_sqr()).collect();
            }
            let plan = FourierPlan::cached(n);
            let mut data = snap.values().to_vec();
            plan.forward_in_place(&mut data);
            for (c, m) in data.iter_mut().zip(&multipliers) {
                *c *= *m;
            }
            plan.inverse_in_place(&mut data);
            data.iter().map(|v| v.norm_sqr()).collect()
        })
        .collect();
    let dt = traj.time().dt();
    let last = intensities.len() - 1;
    let mut acc = vec![0.0; n];
    for (j, row) in intensities.iter().enumerate() {
        let w = if j == 0 || j == last { 0.5 * dt } else { dt };
        for (a, v) in acc.iter_mut().zip(row) {
            *a += w * v;
        }
    }
    acc.into_iter().fold(0.0, f64::max).sqrt()
}

/// `(h Σ_m sup_t |u(mh, t)|^q)^{1/q}` over the time nodes.
pub fn norm_maximal(traj: &SolutionTrajectory, q: f64) -> f64 {
    let grid = *traj.grid();
    let mut sup = vec![0.0f64; grid.n_points()];
    for snap in traj.snapshots() {
        for (s, v) in sup.iter_mut().zip(snap.values()) {
            *s = s.max(v.norm());
        }
    }
    let field = LatticeField::new(grid, sup.into_iter().map(|v| v.into()).collect()).expect("one value per site");
    norm_lp(&field, q)
}

/// Exponents entering `Λ_T`: smoothing order `s + σ − α`, energy order `s`
/// and maximal-norm exponent `q = 2(p − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaExponents {
    pub smoothing: f64,
    pub sobolev: f64,
    pub maximal: f64,
}

/// The three norms of `Λ_T` and their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub lambda: f64,
}

impl NormReport {
    pub fn new(eta1: f64, eta2: f64, eta3: f64) -> Self {
        NormReport {
            eta1,
            eta2,
            eta3,
            lambda: eta1.max(eta2).max(eta3),
        }
    }
}

/// `Λ_T(u) = max(η₁, η₂, η₃)` with `η₁` the smoothing norm, `η₂ = sup_t ‖u(t)‖_{H^s_h}`
/// and `η₃` the maximal norm.
pub fn lambda_norm(traj: &SolutionTrajectory, exps: &LambdaExponents) -> NormReport {
    let eta1 = norm_smoothing(traj, exps.smoothing);
    let eta2 = traj
        .snapshots()
        .par_iter()
        .map(|s| norm_sobolev(s, exps.sobolev))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    let eta3 = norm_maximal(traj, exps.maximal);
    NormReport::new(eta1, eta2, eta3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeGrid;
    use crate::trajectory::TimeGrid;
    use num_complex::Complex64;

    fn grid(h: f64, n: usize) -> LatticeGrid {
        LatticeGrid::new(h, n).unwrap()
    }

    fn random_field(g: LatticeGrid, seed: u64) -> LatticeField {
        let mut s = seed.wrapping_mul(31).wrapping_add(7);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        LatticeField::new(g, (0..g.n_points()).map(|_| Complex64::new(next(), next())).collect()).unwrap()
    }

    fn mode(g: LatticeGrid, k: usize, amp: f64) -> LatticeField {
        let th = g.frequency(k);
        LatticeField::new(
            g,
            (0..g.n_points())
                .map(|i| Complex64::from_polar(amp, th * g.site_index(i) as f64))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn lp_basic_values() {
        let g = grid(0.1, 16);
        let mut d = LatticeField::zeros(g);
        d.values_mut()[3] = Complex64::new(1.0, 0.0);
        assert!((norm_lp(&d, 2.0) - 0.1f64.sqrt()).abs() < 1e-16);
        let c = LatticeField::new(g, vec![Complex64::new(0.0, -3.0); 16]).unwrap();
        assert_eq!(norm_lp(&c, f64::INFINITY), 3.0);
    }

    #[test]
    fn parseval_on_several_sizes() {
        for (i, n) in [8usize, 16, 24, 64, 256, 1000].into_iter().enumerate() {
            let f = random_field(grid(0.07, n), i as u64);
            let a = norm_lp(&f, 2.0);
            let b = norm_sobolev(&f, 0.0);
            assert!(((a - b) / a).abs() < 1e-12);
        }
    }

    #[test]
    fn sobolev_of_pure_mode() {
        let g = grid(0.1, 32);
        let k = 5;
        let s = 0.75;
        let f = mode(g, k, 2.0);
        let th = g.frequency(k);
        let expected = (1.0 + (th / 0.1).powf(2.0 * s)).sqrt() * norm_lp(&f, 2.0);
        assert!(((norm_sobolev(&f, s) - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn smoothing_norm_of_stationary_field() {
        let g = grid(0.1, 32);
        let f = random_field(g, 4);
        let tg = TimeGrid::new(0.7, 10).unwrap();
        let traj = SolutionTrajectory::stationary(f.clone(), tg);
        let v = norm_smoothing(&traj, 0.0);
        assert!((v - 0.7f64.sqrt() * norm_lp(&f, f64::INFINITY)).abs() < 1e-13);
        let zero = SolutionTrajectory::stationary(LatticeField::zeros(g), tg);
        assert_eq!(norm_smoothing(&zero, 0.3), 0.0);
    }

    #[test]
    fn smoothing_norm_of_rotating_mode() {
        let g = grid(0.1, 32);
        let k = 7;
        let amp = 1.3;
        let delta = 0.4;
        let tg = TimeGrid::new(2.0, 20).unwrap();
        let base = mode(g, k, amp);
        let snaps = tg
            .nodes()
            .iter()
            .map(|&t| base.scaled(Complex64::from_polar(1.0, -3.0 * t)))
            .collect();
        let traj = SolutionTrajectory::new(tg, snaps, vec![]).unwrap();
        let th = g.frequency(k);
        let expected = 2.0f64.sqrt() * (1.0 + th.abs() / 0.1).powf(delta) * amp;
        assert!(((norm_smoothing(&traj, delta) - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn maximal_norm_basic_values() {
        let g = grid(0.2, 16);
        let f = random_field(g, 11);
        let tg = TimeGrid::new(1.0, 2).unwrap();
        let single = SolutionTrajectory::stationary(f.clone(), tg);
        assert!((norm_maximal(&single, 4.0) - norm_lp(&f, 4.0)).abs() < 1e-14);
        let two = SolutionTrajectory::new(tg, vec![f.clone(), f.scaled(2.0.into()), f.clone()], vec![]).unwrap();
        assert!((norm_maximal(&two, 4.0) - 2.0 * norm_lp(&f, 4.0)).abs() < 1e-13);
        let zero = SolutionTrajectory::stationary(LatticeField::zeros(g), tg);
        assert_eq!(norm_maximal(&zero, 4.0), 0.0);
    }

    #[test]
    fn lambda_report_is_max_and_homogeneous() {
        let g = grid(0.1, 64);
        let f = LatticeField::from_fn(g, |x| Complex64::new((-x * x).exp(), 0.0));
        let tg = TimeGrid::new(0.5, 4).unwrap();
        let traj = SolutionTrajectory::stationary(f.clone(), tg);
        let exps = LambdaExponents {
            smoothing: 0.1,
            sobolev: 0.25,
            maximal: 4.0,
        };
        let r = lambda_norm(&traj, &exps);
        assert_eq!(r.lambda, r.eta1.max(r.eta2).max(r.eta3));
        // stationary data: each η composes the single-snapshot norms
        assert!((r.eta2 - norm_sobolev(&f, 0.25)).abs() < 1e-14);
        assert!((r.eta3 - norm_lp(&f, 4.0)).abs() < 1e-14);
        let r2 = lambda_norm(&traj.scaled(2.0), &exps);
        assert!((r2.eta1 - 2.0 * r.eta1).abs() < 1e-12 * r.eta1);
        assert!((r2.eta2 - 2.0 * r.eta2).abs() < 1e-12 * r.eta2);
        assert!((r2.eta3 - 2.0 * r.eta3).abs() < 1e-12 * r.eta3);
        let z = lambda_norm(&SolutionTrajectory::stationary(LatticeField::zeros(g), tg), &exps);
        assert_eq!(z, NormReport::new(0.0, 0.0, 0.0));
    }
}
