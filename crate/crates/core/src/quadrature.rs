//! Gaussian quadrature rules (Golub–Welsch) and an adaptive Gauss–Kronrod
//! integrator.

use crate::special::{gamma_unchecked, ln_gamma_positive};

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Map a rule on `[-1, 1]` with unit weight to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        Rule {
            nodes: self.nodes.iter().map(|x| c + r * x).collect(),
            weights: self.weights.iter().map(|w| r * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Apply the rule to `f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL,
/// tracking only the first component of each eigenvector.
///
/// `d` holds the diagonal (overwritten by eigenvalues), `e[i]` couples
/// rows `i` and `i+1` (destroyed). Returns the first eigenvector components.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Vec<f64> {
    let n = d.len();
    let mut z = vec![0.0; n];
    if n == 0 {
        return z;
    }
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 100, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let f2 = z[i + 1];
                z[i + 1] = s * z[i] + c * f2;
                z[i] = c * z[i] - s * f2;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    z
}

/// Golub–Welsch: rule from the Jacobi matrix of the orthogonal polynomials.
fn golub_welsch(mut diag: Vec<f64>, offdiag: Vec<f64>, mu0: f64) -> Rule {
    let n = diag.len();
    let mut e = offdiag;
    e.resize(n, 0.0);
    let z = tridiagonal_ql(&mut diag, &mut e);
    let mut pairs: Vec<(f64, f64)> = diag.into_iter().zip(z).map(|(x, v)| (x, mu0 * v * v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// n-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Nodes are polished by Newton steps on the three-term recurrence, so
/// nodes and weights are accurate to a few ulps.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let mut rule = golub_welsch(diag, off, 2.0);
    for (x, w) in rule.nodes.iter_mut().zip(rule.weights.iter_mut()) {
        for _ in 0..3 {
            let (p, dp) = legendre_with_derivative(n, *x);
            *x -= p / dp;
        }
        let (_, dp) = legendre_with_derivative(n, *x);
        *w = 2.0 / ((1.0 - *x * *x) * dp * dp);
    }
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// n-point Gauss–Jacobi rule on `[-1, 1]` for the weight `(1−x)^a (1+x)^b`,
/// `a, b > −1`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Rule {
    assert!(n >= 1 && a > -1.0 && b > -1.0);
    let ab = a + b;
    let diag: Vec<f64> = (0..n)
        .map(|k| {
            let k = k as f64;
            if k == 0.0 {
                (b - a) / (ab + 2.0)
            } else {
                let t = 2.0 * k + ab;
                (b * b - a * a) / (t * (t + 2.0))
            }
        })
        .collect();
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            let t = 2.0 * k + ab;
            (4.0 * k * (k + a) * (k + b) * (k + ab) / (t * t * (t + 1.0) * (t - 1.0))).sqrt()
        })
        .collect();
    let ln_mu0 =
        (ab + 1.0) * 2f64.ln() + ln_gamma_positive(a + 1.0) + ln_gamma_positive(b + 1.0) - ln_gamma_positive(ab + 2.0);
    golub_welsch(diag, off, ln_mu0.exp())
}

/// Rule on `[0, L]` for the weight `x^c`, `c > −1` (Gauss–Jacobi mapped).
pub fn gauss_jacobi_left(n: usize, c: f64, len: f64) -> Rule {
    let base = gauss_jacobi(n, 0.0, c);
    // x = L (1 + y) / 2  ⇒  x^c dx = (L/2)^{c+1} (1+y)^c dy
    let scale = (0.5 * len).powf(c + 1.0);
    Rule {
        nodes: base.nodes.iter().map(|y| 0.5 * len * (1.0 + y)).collect(),
        weights: base.weights.iter().map(|w| w * scale).collect(),
    }
}

/// n-point generalized Gauss–Laguerre rule for the weight `x^a e^{−x}` on `[0, ∞)`.
pub fn gauss_laguerre(n: usize, a: f64) -> Rule {
    assert!(n >= 1 && a > -1.0);
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + a + 1.0).collect();
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            (k * (k + a)).sqrt()
        })
        .collect();
    golub_welsch(diag, off, gamma_unchecked(a + 1.0))
}

// 7-point Gauss / 15-point Kronrod pair
const GK_XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = GK_WK[7] * fc;
    let mut gauss = GK_WG[3] * fc;
    for j in 0..7 {
        let dx = r * GK_XK[j];
        let s = f(c - dx) + f(c + dx);
        kron += GK_WK[j] * s;
        if j % 2 == 1 {
            gauss += GK_WG[j / 2] * s;
        }
    }
    (kron * r, ((kron - gauss) * r).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]` to
/// absolute tolerance `tol`. Returns the estimate and the error bound.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let mut stack = vec![(a, b, tol)];
    let mut total = 0.0;
    let mut comp = 0.0;
    let mut err_total = 0.0;
    let mut evals = 0usize;
    while let Some((lo, hi, t)) = stack.pop() {
        let (val, err) = gk15(&mut f, lo, hi);
        evals += 15;
        let width = hi - lo;
        if err <= t || width < 1e-14 * (a.abs() + b.abs()).max(1.0) || evals > 2_000_000 {
            // Kahan-compensated accumulation of accepted panels
            let y = val - comp;
            let s = total + y;
            comp = (s - total) - y;
            total = s;
            err_total += err;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * t));
            stack.push((lo, mid, 0.5 * t));
        }
    }
    (total, err_total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 8, 16, 33] {
            let rule = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = rule.integrate(|x| x.powi(deg as i32));
                assert!((got - exact).abs() < 2e-14, "n={n} deg={deg}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn jacobi_moments_match_beta_function() {
        // ∫_{-1}^{1} (1+x)^b x^k dx against closed-form moments via ∫_0^2 y^b (y-1)^k dy
        let b = -0.15;
        let rule = gauss_jacobi(12, 0.0, b);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 2f64.powf(b + 1.0) / (b + 1.0)).abs() < 1e-14);
        // ∫ (1+x)^b (1+x)^3 dx = 2^{b+4}/(b+4)
        let m3 = rule.integrate(|x| (1.0 + x).powi(3));
        assert!((m3 - 2f64.powf(b + 4.0) / (b + 4.0)).abs() < 1e-13);
    }

    #[test]
    fn jacobi_left_handles_endpoint_singularity() {
        // ∫_0^L x^{c} cos x dx against adaptive quadrature of the smooth remainder
        let c = -0.4;
        let len = 0.7;
        let rule = gauss_jacobi_left(20, c, len);
        let got = rule.integrate(|x| x.cos());
        // series: Σ (-1)^k L^{2k+c+1} / ((2k)! (2k+c+1))
        let mut exact = 0.0;
        let mut fact = 1.0;
        for k in 0..20 {
            if k > 0 {
                fact *= (2 * k - 1) as f64 * (2 * k) as f64;
            }
            let e = 2.0 * k as f64 + c + 1.0;
            exact += (-1f64).powi(k) * len.powf(e) / (fact * e);
        }
        assert!((got - exact).abs() < 1e-14, "{got} vs {exact}");
    }

    #[test]
    fn laguerre_moments() {
        let rule = gauss_laguerre(24, 0.0);
        // ∫ x^k e^{-x} = k!
        let mut fact = 1.0;
        for k in 0..20 {
            if k > 0 {
                fact *= k as f64;
            }
            let got = rule.integrate(|x| x.powi(k));
            assert!(((got - fact) / fact).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let (v, _) = integrate_adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12);
        let exact = 2.0 * (1.0 / 1e-4f64.sqrt()) * (1.0 / 1e-4f64.sqrt()).atan();
        assert!(((v - exact) / exact).abs() < 1e-11);
    }
}
