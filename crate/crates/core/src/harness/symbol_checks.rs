//! Grid verification of the dispersion-symbol properties.

use std::f64::consts::PI;

use serde::Serialize;

use super::{csv_num, fit_order, Check, HarnessError, Report};
use crate::symbol::{count_sign_changes, Symbol, SymbolConfig, SymbolError};

/// Interior grid size for the monotonicity and sign scans.
const SCAN_POINTS: usize = 10_000;
/// Points of the `(ξ, w, w′, w″, φ_h)` table per `α`.
const TABLE_POINTS: usize = 512;

/// Results for one `α`.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolEntry {
    pub alpha: f64,
    pub beta: f64,
    pub xi0: f64,
    pub xi1: f64,
    pub c_fit: f64,
    pub c_closed: f64,
    /// `min` and `max` of `w(ξ)/ξ^α` on `[0.01, π]`
    pub sandwich: (f64, f64),
    /// `min w′/(ξ^{α−1}(π−ξ))` and `max w′/ξ^{α−1}` on the scan grid
    pub derivative_bounds: (f64, f64),
    /// log-log slope of `|w(ξ) − ξ^α|` on `[1e-3, 0.1]`
    pub residual_slope: f64,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymbolReport {
    pub beta: f64,
    pub h: f64,
    pub entries: Vec<SymbolEntry>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    table: String,
}

impl Report for SymbolReport {
    fn checks(&self) -> &[Check] {
        &self.checks
    }

    fn csv(&self) -> String {
        self.table.clone()
    }
}

fn scan_grid(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (1..n).map(move |i| a + (b - a) * i as f64 / n as f64)
}

fn check_alpha(alpha: f64, beta: f64) -> Result<SymbolEntry, HarnessError> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(HarnessError::Setup(format!("1 < alpha < 2 fails: alpha = {alpha}")));
    }
    let sym = Symbol::new(SymbolConfig::new(alpha)?)?;
    let mut checks = Vec::new();
    let tag = |name: &str| format!("alpha={alpha}: {name}");

    // normalization constant
    let c_rel = (sym.c_fit() - sym.c_closed()).abs() / sym.c_closed();
    checks.push(Check::new(
        tag("fitted normalization matches closed form"),
        c_rel < 1e-8,
        format!(
            "c_fit = {}, closed form = {}, rel diff {c_rel:e}",
            sym.c_fit(),
            sym.c_closed()
        ),
    ));

    // sandwich c1 ξ^α ≤ w ≤ c2 ξ^α
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for xi in scan_grid(0.01, PI, SCAN_POINTS).chain([0.01, PI]) {
        let r = sym.w(xi) / xi.powf(alpha);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    checks.push(Check::new(
        tag("sandwich c1|xi|^alpha <= w <= c2|xi|^alpha"),
        lo > 0.0 && hi.is_finite(),
        format!("c1 = {lo}, c2 = {hi}"),
    ));

    // w′ > 0 and derivative bounds
    let mut wp_min = f64::INFINITY;
    let (mut d_lo, mut d_hi) = (f64::INFINITY, 0.0f64);
    let mut prev_wpp = f64::INFINITY;
    let mut decreasing = true;
    for xi in scan_grid(0.0, PI, SCAN_POINTS) {
        let wp = sym.w_prime(xi)?;
        wp_min = wp_min.min(wp);
        d_lo = d_lo.min(wp / (xi.powf(alpha - 1.0) * (PI - xi)));
        d_hi = d_hi.max(wp / xi.powf(alpha - 1.0));
        let wpp = sym.w_second(xi)?;
        if !(wpp < prev_wpp) {
            decreasing = false;
        }
        prev_wpp = wpp;
    }
    checks.push(Check::new(
        tag("w' > 0 on interior grid"),
        wp_min > 0.0,
        format!("min w' = {wp_min:e} over {} points", SCAN_POINTS - 1),
    ));
    checks.push(Check::new(
        tag("c1 xi^(alpha-1)(pi-xi) <= w' <= c2 xi^(alpha-1)"),
        d_lo > 0.0 && d_hi.is_finite(),
        format!("c1 = {d_lo}, c2 = {d_hi}"),
    ));
    checks.push(Check::new(
        tag("w'' strictly decreasing"),
        decreasing,
        format!("{} interior points", SCAN_POINTS - 1),
    ));
    let wp_pi = sym.w_prime(PI)?;
    checks.push(Check::new(tag("w'(pi) = 0"), wp_pi == 0.0, format!("w'(pi) = {wp_pi}")));

    // small-ξ expansion w = ξ^α + O(ξ²)
    let pairs: Vec<(f64, f64)> = (0..=20)
        .map(|i| {
            let xi = 1e-3 * 100f64.powf(i as f64 / 20.0);
            (xi, (sym.w(xi) - xi.powf(alpha)).abs())
        })
        .collect();
    let residual_slope = fit_order(&pairs)?;
    checks.push(Check::new(
        tag("small-xi residual w - |xi|^alpha has slope 2 +- 0.05"),
        (residual_slope - 2.0).abs() <= 0.05,
        format!("slope {residual_slope}"),
    ));

    // finite-difference consistency at mid-domain points
    let step = 1e-4;
    let mut fd_err = 0.0f64;
    for &xi in &[0.5, 1.0, 1.5, 2.0, 2.5] {
        let d1 = (sym.w(xi + step) - sym.w(xi - step)) / (2.0 * step);
        fd_err = fd_err.max((d1 - sym.w_prime(xi)?).abs());
        let d2 = (sym.w_prime(xi + step)? - sym.w_prime(xi - step)?) / (2.0 * step);
        fd_err = fd_err.max((d2 - sym.w_second(xi)?).abs());
    }
    checks.push(Check::new(
        tag("finite differences of w, w' match w', w'' to 1e-6"),
        fd_err <= 1e-6,
        format!("max deviation {fd_err:e}"),
    ));

    // critical points
    let w2 = |x: f64| sym.w_second(x);
    let w2_changes = count_sign_changes(w2, 0.0, PI, SCAN_POINTS)?;
    let xi0 = sym.find_xi0()?;
    checks.push(Check::new(
        tag("w'' has one sign change, at xi0 in (0, pi/2)"),
        w2_changes == 1 && xi0 > 0.0 && xi0 < 0.5 * PI,
        format!("{w2_changes} sign change(s), xi0 = {xi0}"),
    ));
    let phi2 = |x: f64| sym.phi_second_reduced(beta, x);
    let phi_changes = count_sign_changes(phi2, 0.0, PI, SCAN_POINTS)?;
    let xi1 = match sym.find_xi1(beta) {
        Ok(x) => x,
        Err(SymbolError::Multiplicity { count }) => {
            return Err(HarnessError::Setup(format!(
                "phi'' has {count} sign changes on (xi0, pi)"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let xi1_ok = if beta == 1.0 { xi1 == xi0 } else { xi1 > xi0 && xi1 < PI };
    checks.push(Check::new(
        tag("phi'' (h=1) has one sign change, at xi1 in (xi0, pi)"),
        phi_changes == 1 && xi1_ok,
        format!("{phi_changes} sign change(s), xi1 = {xi1}"),
    ));

    Ok(SymbolEntry {
        alpha,
        beta,
        xi0,
        xi1,
        c_fit: sym.c_fit(),
        c_closed: sym.c_closed(),
        sandwich: (lo, hi),
        derivative_bounds: (d_lo, d_hi),
        residual_slope,
        checks,
    })
}

/// CSV table `alpha, xi, w, w', w'', phi_h` on `ξ_i = πi/n`, `i = 1..n`.
pub fn symbol_table_csv(alphas: &[f64], beta: f64, h: f64, n: usize) -> Result<String, HarnessError> {
    let mut out = String::from("alpha,xi,w,w_prime,w_second,phi_h\n");
    for &alpha in alphas {
        let sym = Symbol::new(SymbolConfig::new(alpha)?)?;
        for i in 1..=n {
            let xi = PI * i as f64 / n as f64;
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                alpha,
                csv_num(xi),
                csv_num(sym.w(xi)),
                csv_num(sym.w_prime(xi)?),
                csv_num(sym.w_second(xi)?),
                csv_num(sym.phi(h, beta, xi))
            ));
        }
    }
    Ok(out)
}

/// Evaluate every symbol property for each `α` on dense grids; `ξ₁` and
/// `φ_h` use the given `β` and `h`.
pub fn run_symbol_checks(alphas: &[f64], beta: f64, h: f64) -> Result<SymbolReport, HarnessError> {
    if alphas.is_empty() {
        return Err(HarnessError::Setup("alpha list is empty".into()));
    }
    if !(beta > 0.5 && beta <= 1.0) {
        return Err(HarnessError::Setup(format!("1/2 < beta <= 1 fails: beta = {beta}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(HarnessError::Setup(format!("h > 0 fails: h = {h}")));
    }
    let entries = alphas
        .iter()
        .map(|&a| check_alpha(a, beta))
        .collect::<Result<Vec<_>, _>>()?;
    let checks = entries.iter().flat_map(|e| e.checks.iter().cloned()).collect();
    let table = symbol_table_csv(alphas, beta, h, TABLE_POINTS)?;
    Ok(SymbolReport {
        beta,
        h,
        entries,
        checks,
        table,
    })
}
