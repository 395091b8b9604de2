use fnls_core::harness::{fit_order, run_smoothing_experiment, select_time_horizon, PacketSpec, SmoothingData};
use fnls_core::lattice::{dft, discretize, interp_linear, norm_lp, LatticeGrid};
use fnls_core::quadrature::gauss_legendre;
use fnls_core::solver::{duhamel_weights, solve, KernelBuilder, ModelParams, PicardOptions, SymbolSource, SymbolTable};
use fnls_core::special::{i_pow_minus_beta, ml_e, ml_oracle, MLParams};
use fnls_core::trajectory::TimeGrid;
use num_complex::Complex64;

fn gaussian(x: f64) -> Complex64 {
    Complex64::new((-x * x).exp(), 0.0)
}

/// `E_{β,β}(i^{−β} τ^β μ)` from the 50-digit series.
fn kernel_factor(beta: f64, mu: f64, tau_beta: f64) -> Complex64 {
    ml_oracle(beta, i_pow_minus_beta(beta) * (mu * tau_beta), beta, 50).unwrap()
}

#[test]
fn kernel_weights_match_independent_quadrature() {
    let (beta, mu, dt) = (0.85, 3.0, 0.01);
    let time = TimeGrid::new(0.06, 6).unwrap();
    let params = ModelParams::new(1.5, beta, 3, 1.0);
    let w = duhamel_weights(&time, mu, &params).unwrap();
    let rule = gauss_legendre(20);
    for lag in 1..=6 {
        let c = (lag - 1) as f64 * dt;
        let (mut m0, mut m1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        if lag == 1 {
            // v = τ^β turns τ^{β−1} dτ into dv/β; τ = v^{1/β} is not smooth
            // at 0, so the panels are graded dyadically towards it
            let mut hi = dt.powf(beta);
            while hi > 1e-30 {
                let lo = 0.5 * hi;
                for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                    let v = lo + 0.5 * (hi - lo) * (x + 1.0);
                    let k = kernel_factor(beta, mu, v) * (0.5 * (hi - lo) * wt / beta);
                    m0 += k;
                    m1 += k * v.powf(1.0 / beta);
                }
                hi = lo;
            }
        } else {
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                let tau = c + 0.5 * dt * (x + 1.0);
                let k = kernel_factor(beta, mu, tau.powf(beta)) * (tau.powf(beta - 1.0) * 0.5 * dt * wt);
                m0 += k;
                m1 += k * (tau - c);
            }
        }
        let a = m1 / dt;
        let b = m0 - a;
        let (ea, eb) = (
            (w.a[lag - 1] - a).norm() / a.norm(),
            (w.b[lag - 1] - b).norm() / b.norm(),
        );
        assert!(ea <= 1e-12 && eb <= 1e-12, "lag {lag}: relative errors {ea:e}, {eb:e}");
    }
}

#[test]
fn linear_solve_reproduces_the_mode_multipliers() {
    let params = ModelParams::new(1.5, 0.85, 3, 0.0);
    let grid = LatticeGrid::new(0.2, 64).unwrap();
    let time = TimeGrid::new(0.8, 8).unwrap();
    let f = |x: f64| Complex64::new((-x * x).exp(), 0.4 * (-x * x).exp() * x);
    let traj = solve(
        &params,
        &grid,
        &time,
        f,
        SymbolSource::Lattice,
        PicardOptions::default(),
    )
    .unwrap();
    let table = SymbolTable::new(&params, &grid, SymbolSource::Lattice).unwrap();
    let ml = MLParams::new(params.beta).unwrap();
    let u0 = dft(traj.initial());
    for (snap, t) in traj.snapshots().iter().zip(time.nodes()) {
        let spec = dft(snap);
        for k in 0..grid.n_points() {
            let z = i_pow_minus_beta(params.beta) * (t.powf(params.beta) * table.mu(k));
            let expect = u0.coeffs()[k] * ml_e(params.beta, z, &ml).unwrap();
            assert!(
                (spec.coeffs()[k] - expect).norm() <= 1e-12 * (1.0 + expect.norm()),
                "t = {t}, k = {k}"
            );
        }
    }
}

#[test]
fn memory_kernel_loses_sigma_minus_alpha_derivatives() {
    let (alpha, beta) = (1.5, 0.85);
    let kb = KernelBuilder::new(beta).unwrap();
    let (h, t) = (0.01, 0.5);
    // ⟨ξ/h⟩ across the upper half of the lattice band, continuum multiplier
    let pairs: Vec<(f64, f64)> = (0..8)
        .map(|i| {
            let xi = (10.0 + 40.0 * i as f64) / h;
            (xi, kb.kernel(t, xi.powf(alpha)).unwrap().norm())
        })
        .collect();
    let slope = fit_order(&pairs).unwrap();
    let target = alpha / beta - alpha;
    assert!((slope - target).abs() <= 0.1, "slope {slope} vs {target}");
}

#[test]
fn picard_contraction_improves_as_the_horizon_shrinks() {
    let params = ModelParams::new(1.5, 0.85, 3, 1.0);
    let grid = LatticeGrid::with_extent(25.6, 0.2).unwrap();
    let max_ratio = |t: f64| {
        let time = TimeGrid::new(t, 32).unwrap();
        let traj = solve(
            &params,
            &grid,
            &time,
            gaussian,
            SymbolSource::Lattice,
            PicardOptions::default(),
        )
        .unwrap();
        traj.residuals().windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max)
    };
    let ratios: Vec<f64> = [0.8, 0.4, 0.2, 0.1].iter().map(|&t| max_ratio(t)).collect();
    assert!(ratios.iter().all(|&r| r < 1.0), "{ratios:?}");
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    let chosen = select_time_horizon(
        &params,
        &grid,
        gaussian,
        TimeGrid::new(1.0, 32).unwrap(),
        PicardOptions::default(),
        4,
    )
    .unwrap();
    assert!(chosen.t_final() <= 1.0 && chosen.m_steps() == 32);
}

#[test]
fn interpolation_error_decays_at_least_linearly() {
    let extent = 25.6;
    let fine = LatticeGrid::with_extent(extent, 0.0125).unwrap();
    let exact = discretize(gaussian, &fine);
    let pairs: Vec<(f64, f64)> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&h| {
            let g = LatticeGrid::with_extent(extent, h).unwrap();
            let p = interp_linear(&discretize(gaussian, &g), &fine).unwrap();
            (h, norm_lp(&p.sub(&exact).unwrap(), 2.0))
        })
        .collect();
    let slope = fit_order(&pairs).unwrap();
    assert!(slope >= 0.9, "slope {slope}");
}

#[test]
fn smoothing_growth_separates_raw_and_filtered_data_across_parameters() {
    let time = TimeGrid::new(1.0, 200).unwrap();
    for (alpha, beta) in [(1.5, 0.85), (1.3, 0.95), (1.7, 0.9), (1.9, 0.8)] {
        let params = ModelParams::new(alpha, beta, 3, 0.0);
        params.validate().unwrap();
        let data = SmoothingData::Packet(PacketSpec::resonant());
        let r = run_smoothing_experiment(&params, &[0.2, 0.1, 0.05], 51.2, data, &time, 0.01).unwrap();
        for (u, f) in r.growth_unfiltered.iter().zip(&r.growth_filtered) {
            assert!(
                u > f,
                "alpha {alpha}, beta {beta}: {:?} vs {:?}",
                r.growth_unfiltered,
                r.growth_filtered
            );
        }
    }
}
