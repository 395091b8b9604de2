//! Discretization, the `Π_h` filter, injection, restriction and piecewise
//! linear interpolation between nested lattices.

use num_complex::Complex64;

use super::{LatticeError, LatticeField, LatticeGrid};
use crate::quadrature::gauss_legendre;

/// Cell averages `f_h(mh) = (1/h) ∫_{mh}^{(m+1)h} f(x) dx`, each cell
/// integrated by 4-node Gauss–Legendre.
pub fn discretize<F: Fn(f64) -> Complex64>(f: F, grid: &LatticeGrid) -> LatticeField {
    let rule = gauss_legendre(4);
    let h = grid.h();
    let values = (0..grid.n_points())
        .map(|i| {
            let a = grid.site(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                acc += f(a + 0.5 * h * (x + 1.0)) * (0.5 * w);
            }
            acc
        })
        .collect();
    LatticeField::new(*grid, values).expect("one value per site")
}

fn check_nested(coarse: &LatticeGrid, target: &LatticeGrid) -> Result<(), LatticeError> {
    let sub = target.coarse()?;
    if !sub.same_as(coarse) {
        return Err(LatticeError::GridMismatch(format!(
            "field on (h = {}, n = {}) is not the even-site sub-grid of (h = {}, n = {})",
            coarse.h(),
            coarse.n_points(),
            target.h(),
            target.n_points()
        )));
    }
    Ok(())
}

/// `Π_h`: copy a `2h` field onto the even sites of `target` and fill each
/// odd site with the average of its two neighbours.
pub fn filter_pi(coarse: &LatticeField, target: &LatticeGrid) -> Result<LatticeField, LatticeError> {
    check_nested(coarse.grid(), target)?;
    let n = target.n_points();
    let c = coarse.values();
    let nc = c.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..nc {
        out[2 * j] = c[j];
        out[2 * j + 1] = 0.5 * (c[j] + c[(j + 1) % nc]);
    }
    LatticeField::new(*target, out)
}

/// `i_h`: copy a `2h` field onto the even sites of `target`, zero elsewhere.
pub fn inject(coarse: &LatticeField, target: &LatticeGrid) -> Result<LatticeField, LatticeError> {
    check_nested(coarse.grid(), target)?;
    let mut out = vec![Complex64::new(0.0, 0.0); target.n_points()];
    for (j, &v) in coarse.values().iter().enumerate() {
        out[2 * j] = v;
    }
    LatticeField::new(*target, out)
}

/// `R_h`: keep the even sites, giving a field on the `2h` sub-grid.
pub fn restrict(fine: &LatticeField) -> Result<LatticeField, LatticeError> {
    let coarse = fine.grid().coarse()?;
    let values = fine.values().iter().step_by(2).copied().collect();
    LatticeField::new(coarse, values)
}

/// `p_h u`: the piecewise linear interpolant
/// `u(mh) + D_h^+ u(mh) (x − mh)` sampled on a refining grid of equal extent.
pub fn interp_linear(field: &LatticeField, query: &LatticeGrid) -> Result<LatticeField, LatticeError> {
    let g = field.grid();
    let ratio = g.h() / query.h();
    let r = ratio.round();
    if r < 1.0 || (ratio - r).abs() > 1e-9 * ratio {
        return Err(LatticeError::NonNested(format!(
            "mesh ratio {ratio} between h = {} and query h = {} is not an integer",
            g.h(),
            query.h()
        )));
    }
    let r = r as i64;
    if query.n_points() as i64 != r * g.n_points() as i64 {
        return Err(LatticeError::NonNested(format!(
            "extents differ: {} vs {}",
            g.extent(),
            query.extent()
        )));
    }
    let n = g.n_points() as i64;
    let u = field.values();
    let half = n / 2;
    let values = (0..query.n_points())
        .map(|iq| {
            let mq = query.site_index(iq);
            let m = mq.div_euclid(r);
            let frac = (mq - m * r) as f64 / r as f64;
            let i0 = (m + half).rem_euclid(n) as usize;
            let i1 = (m + 1 + half).rem_euclid(n) as usize;
            u[i0] + (u[i1] - u[i0]) * frac
        })
        .collect();
    LatticeField::new(*query, values)
}

/// Fourier multiplier of linear interpolation,
/// `P_h(ξ) = ∫_0^h e^{−ixξ} dx + ((e^{ihξ} − 1)/h) ∫_0^h x e^{−ixξ} dx`,
/// so that `(p_h u)^(ξ) = P_h(ξ) û(hξ)`.
pub fn interp_multiplier(h: f64, xi: f64) -> Complex64 {
    // z = −i h ξ; I1 = h Σ z^k/(k+1)!, I2 = h² Σ z^k/(k! (k+2))
    let z = Complex64::new(0.0, -h * xi);
    let (i1, i2) = if z.norm() < 0.5 {
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut s2 = Complex64::new(0.0, 0.0);
        let mut zk_over_fact = Complex64::new(1.0, 0.0); // z^k / k!
        for k in 0..30 {
            let kf = k as f64;
            s1 += zk_over_fact / (kf + 1.0);
            s2 += zk_over_fact / (kf + 2.0);
            zk_over_fact *= z / (kf + 1.0);
        }
        (h * s1, h * h * s2)
    } else {
        let a = Complex64::new(0.0, xi);
        let e = (-a * h).exp();
        ((1.0 - e) / a, (1.0 - e - a * h * e) / (a * a))
    };
    let coef = (Complex64::new(0.0, h * xi).exp() - 1.0) / h;
    i1 + coef * i2
}

/// Multiplier `(1 + h^{−1}|θ|)^δ` of `⟨h^{−1}∇⟩^δ` at lattice frequency `θ`.
pub fn smoothing_multiplier(h: f64, theta: f64, delta: f64) -> f64 {
    (1.0 + theta.abs() / h).powf(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::dft;
    use crate::quadrature::integrate_adaptive;

    fn grid(h: f64, n: usize) -> LatticeGrid {
        LatticeGrid::new(h, n).unwrap()
    }

    fn field_from(grid: LatticeGrid, seed: u64) -> LatticeField {
        let mut s = seed.wrapping_add(17);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        LatticeField::new(
            grid,
            (0..grid.n_points()).map(|_| Complex64::new(next(), next())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn discretize_constant_and_linear() {
        let g = grid(0.1, 16);
        let one = discretize(|_| Complex64::new(1.0, 0.0), &g);
        assert!(one.values().iter().all(|v| (v - 1.0).norm() < 1e-15));
        let lin = discretize(|x| Complex64::new(x, 0.0), &g);
        // site m = 0 is storage index 8; cell [0, h)
        assert!((lin.values()[8].re - 0.05).abs() < 1e-16);
    }

    #[test]
    fn discretize_gaussian_matches_adaptive_cell_averages() {
        let g = grid(0.1, 128);
        let f = discretize(|x| Complex64::new((-x * x).exp(), 0.0), &g);
        for i in 0..g.n_points() {
            let a = g.site(i);
            let exact = integrate_adaptive(|x| (-x * x).exp(), a, a + 0.1, 1e-15).0 / 0.1;
            assert!((f.values()[i].re - exact).abs() < 1e-12, "site {i}");
        }
    }

    #[test]
    fn filter_and_inject_basic_identities() {
        let fine = grid(0.05, 32);
        let coarse = fine.coarse().unwrap();
        let c = LatticeField::new(coarse, vec![Complex64::new(2.0, -1.0); 16]).unwrap();
        let f = filter_pi(&c, &fine).unwrap();
        assert!(f
            .values()
            .iter()
            .all(|v| (v - Complex64::new(2.0, -1.0)).norm() < 1e-15));
        let one = LatticeField::new(coarse, vec![Complex64::new(1.0, 0.0); 16]).unwrap();
        let inj = inject(&one, &fine).unwrap();
        for (i, v) in inj.values().iter().enumerate() {
            assert_eq!(v.re, if i % 2 == 0 { 1.0 } else { 0.0 });
        }
        let rnd = field_from(coarse, 3);
        assert_eq!(restrict(&filter_pi(&rnd, &fine).unwrap()).unwrap(), rnd);
        assert_eq!(restrict(&inject(&rnd, &fine).unwrap()).unwrap(), rnd);
    }

    #[test]
    fn even_sites_of_fine_grid_are_even_labels() {
        let fine = grid(0.5, 16);
        for i in (0..16).step_by(2) {
            assert_eq!(fine.site_index(i) % 2, 0);
        }
    }

    #[test]
    fn restrict_alternating_gives_constant() {
        let g = grid(0.1, 16);
        let f = LatticeField::new(
            g,
            (0..16)
                .map(|i| Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
                .collect(),
        )
        .unwrap();
        let r = restrict(&f).unwrap();
        assert!(r.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let fine = grid(0.05, 32);
        let wrong = LatticeField::zeros(grid(0.1, 8));
        assert!(matches!(filter_pi(&wrong, &fine), Err(LatticeError::GridMismatch(_))));
        assert!(matches!(inject(&wrong, &fine), Err(LatticeError::GridMismatch(_))));
        // n = 12 has no 2h sub-grid with matching site labels
        assert!(restrict(&LatticeField::zeros(grid(0.1, 12))).is_err());
    }

    #[test]
    fn filter_is_a_fourier_multiplier() {
        let fine = grid(0.1, 64);
        let coarse = fine.coarse().unwrap();
        let c = field_from(coarse, 9);
        let a = dft(&filter_pi(&c, &fine).unwrap());
        let b = dft(&inject(&c, &fine).unwrap());
        for k in 0..64 {
            let th = fine.frequency(k);
            let m = 2.0 * (th / 2.0).cos().powi(2);
            assert!((a.coeffs()[k] - b.coeffs()[k] * m).norm() < 1e-12);
        }
    }

    #[test]
    fn injected_coarse_mode_aliases_to_two_peaks() {
        let fine = grid(0.1, 16);
        let coarse = fine.coarse().unwrap();
        // coarse mode with frequency 2π·2/8 in the coarse variable
        let th_c = coarse.frequency(2);
        let c = LatticeField::new(
            coarse,
            (0..8)
                .map(|i| Complex64::from_polar(1.0, th_c * coarse.site_index(i) as f64))
                .collect(),
        )
        .unwrap();
        let spec = dft(&inject(&c, &fine).unwrap());
        // brute force: û(θ) = Σ_m u(m) e^{−iθm} over fine sites
        let u = inject(&c, &fine).unwrap();
        let mut peaks = Vec::new();
        for k in 0..16 {
            let th = fine.frequency(k);
            let brute: Complex64 = (0..16)
                .map(|i| u.values()[i] * Complex64::from_polar(1.0, -th * fine.site_index(i) as f64))
                .sum();
            assert!((brute - spec.coeffs()[k]).norm() < 1e-12);
            if brute.norm() > 1e-9 {
                peaks.push(k);
                assert!((brute.norm() - 8.0).abs() < 1e-12);
            }
        }
        // θ = θ_c/2 and θ_c/2 − π
        assert_eq!(peaks, vec![2, 10]);
    }

    #[test]
    fn interpolation_identity_and_compatibility() {
        let fine = grid(0.1, 32);
        let coarse = fine.coarse().unwrap();
        let c = field_from(coarse, 5);
        assert_eq!(interp_linear(&c, &coarse).unwrap(), c);
        let q = grid(0.025, 128);
        let direct = interp_linear(&c, &q).unwrap();
        let via = interp_linear(&filter_pi(&c, &fine).unwrap(), &q).unwrap();
        for (a, b) in direct.values().iter().zip(via.values()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn interpolation_rejects_non_nested_grids() {
        let g = grid(0.1, 16);
        assert!(matches!(
            interp_linear(&LatticeField::zeros(g), &grid(0.03, 16)),
            Err(LatticeError::NonNested(_))
        ));
        assert!(matches!(
            interp_linear(&LatticeField::zeros(g), &grid(0.05, 16)),
            Err(LatticeError::NonNested(_))
        ));
    }

    fn multiplier_by_quadrature(h: f64, xi: f64) -> Complex64 {
        let re1 = integrate_adaptive(|x| (x * xi).cos(), 0.0, h, 1e-15).0;
        let im1 = integrate_adaptive(|x| -(x * xi).sin(), 0.0, h, 1e-15).0;
        let re2 = integrate_adaptive(|x| x * (x * xi).cos(), 0.0, h, 1e-15).0;
        let im2 = integrate_adaptive(|x| -x * (x * xi).sin(), 0.0, h, 1e-15).0;
        let coef = (Complex64::new(0.0, h * xi).exp() - 1.0) / h;
        Complex64::new(re1, im1) + coef * Complex64::new(re2, im2)
    }

    #[test]
    fn multiplier_at_zero_and_against_quadrature() {
        assert_eq!(interp_multiplier(0.3, 0.0), Complex64::new(0.3, 0.0));
        let v = interp_multiplier(0.1, 3.0);
        assert!((v - multiplier_by_quadrature(0.1, 3.0)).norm() < 1e-12);
        // across the series / closed-form switch
        for &xi in &[1e-6, 1e-3, 4.99, 5.01, 40.0, -17.0] {
            let v = interp_multiplier(0.1, xi);
            assert!((v - multiplier_by_quadrature(0.1, xi)).norm() < 1e-13, "xi = {xi}");
        }
    }

    #[test]
    fn multiplier_is_bounded_by_h() {
        for &h in &[0.2, 0.1, 0.05] {
            let mut worst: f64 = 0.0;
            for j in 0..2000 {
                let xi = -200.0 + 0.2 * j as f64;
                worst = worst.max(interp_multiplier(h, xi).norm() / h);
            }
            assert!(worst <= 1.0 + 1e-12, "h = {h}: {worst}");
        }
    }

    #[test]
    fn interpolant_spectrum_matches_multiplier() {
        // FT of p_h u for u = e^{iθm} restricted to one site (delta at m = 0)
        // equals P_h(ξ)·1; the interpolant is the hat function of width 2h
        let h = 0.1;
        for &xi in &[0.0, 2.0, 13.0, 31.0] {
            let re = integrate_adaptive(|x| (1.0 - x.abs() / h) * (x * xi).cos(), -h, 0.0, 1e-15).0
                + integrate_adaptive(|x| (1.0 - x.abs() / h) * (x * xi).cos(), 0.0, h, 1e-15).0;
            let im = integrate_adaptive(|x| -(1.0 - x.abs() / h) * (x * xi).sin(), -h, 0.0, 1e-15).0
                + integrate_adaptive(|x| -(1.0 - x.abs() / h) * (x * xi).sin(), 0.0, h, 1e-15).0;
            let v = interp_multiplier(h, xi);
            assert!(
                (v - Complex64::new(re, im)).norm() < 1e-13,
                "xi = {xi}: {v} vs {re} {im}"
            );
        }
    }
}
