//! Mittag-Leffler evaluator against the arbitrary-precision series oracle on
//! the propagator ray `arg z = −βπ/2`, plus the `β = 1` exponential check.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{csv_num, Check, HarnessError, Report};
use crate::special::{i_pow_minus_beta, ml_e, ml_ee, MLParams, MlOracle};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MlCheckSetup {
    pub betas: Vec<f64>,
    /// sample points per `β` (split between `E_β` and `E_{β,β}`)
    pub points_per_beta: usize,
    pub r_max: f64,
    pub tol: f64,
    pub digits: u32,
    /// points of the `β = 1` comparison with `e^z`
    pub exp_points: usize,
    /// radius of the `β = 1` comparison disc (left half-plane)
    pub exp_r_max: f64,
    pub exp_tol: f64,
    pub seed: u64,
}

impl Default for MlCheckSetup {
    fn default() -> Self {
        MlCheckSetup {
            betas: vec![0.6, 0.75, 0.8, 0.9],
            points_per_beta: 50,
            r_max: 50.0,
            tol: 1e-9,
            digits: 100,
            exp_points: 100,
            exp_r_max: 30.0,
            exp_tol: 1e-12,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MlCheckRow {
    pub beta: f64,
    /// second parameter: 1 for `E_β`, `β` for `E_{β,β}`
    pub second: f64,
    pub r: f64,
    pub value: Complex64,
    pub oracle: Complex64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MlCheckReport {
    pub setup: MlCheckSetup,
    pub rows: Vec<MlCheckRow>,
    pub max_rel_err: f64,
    pub max_exp_err: f64,
    pub checks: Vec<Check>,
}

impl Report for MlCheckReport {
    fn checks(&self) -> &[Check] {
        &self.checks
    }

    fn csv(&self) -> String {
        let mut out = String::from("beta,second,r,re,im,oracle_re,oracle_im,rel_err\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.beta,
                r.second,
                csv_num(r.r),
                csv_num(r.value.re),
                csv_num(r.value.im),
                csv_num(r.oracle.re),
                csv_num(r.oracle.im),
                csv_num(r.rel_err)
            ));
        }
        out
    }
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    let d = (a - b).norm();
    if b.norm() > 0.0 {
        d / b.norm()
    } else {
        d
    }
}

/// Compare `E_β` and `E_{β,β}` with the oracle at seeded radii in
/// `[0, r_max]` (endpoints included) on `arg z = −βπ/2`; then `E_1` and
/// `E_{1,1}` against `e^z` at seeded points with `|z| ≤ exp_r_max`,
/// `Re z ≤ 0`.
pub fn run_ml_check(setup: &MlCheckSetup) -> Result<MlCheckReport, HarnessError> {
    if setup.betas.is_empty() || setup.points_per_beta < 2 || setup.exp_points == 0 {
        return Err(HarnessError::Setup("empty sample set".into()));
    }
    if !(setup.r_max > 0.0 && setup.r_max.is_finite()) {
        return Err(HarnessError::Setup(format!("r_max > 0 fails: {}", setup.r_max)));
    }
    if !(setup.exp_r_max > 0.0 && setup.exp_r_max.is_finite()) {
        return Err(HarnessError::Setup(format!("exp_r_max > 0 fails: {}", setup.exp_r_max)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    let mut rows = Vec::new();
    for &beta in &setup.betas {
        let params = MLParams::new(beta)?;
        let mut oracle = MlOracle::new(beta, setup.digits)?;
        oracle.reserve(setup.r_max);
        let dir = i_pow_minus_beta(beta);
        for i in 0..setup.points_per_beta {
            let r = match i {
                0 => 0.0,
                1 => setup.r_max,
                _ => rng.gen_range(0.0..setup.r_max),
            };
            let z = dir * r;
            let (second, value) = if i % 2 == 0 {
                (1.0, ml_e(beta, z, &params)?)
            } else {
                (beta, ml_ee(beta, z, &params)?)
            };
            let exact = oracle.eval(z, second)?;
            rows.push(MlCheckRow {
                beta,
                second,
                r,
                value,
                oracle: exact,
                rel_err: rel_err(value, exact),
            });
        }
    }
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);

    let params = MLParams::new(1.0)?;
    let mut max_exp_err = 0.0f64;
    for _ in 0..setup.exp_points {
        let phase = rng.gen_range(0.5..=1.5) * std::f64::consts::PI;
        let z = Complex64::from_polar(rng.gen_range(0.0..=setup.exp_r_max), phase);
        max_exp_err = max_exp_err
            .max(rel_err(ml_e(1.0, z, &params)?, z.exp()))
            .max(rel_err(ml_ee(1.0, z, &params)?, z.exp()));
    }

    let checks = vec![
        Check::new(
            format!(
                "E_beta and E_beta,beta match the {}-digit oracle to {:e}",
                setup.digits, setup.tol
            ),
            max_rel_err <= setup.tol,
            format!("max relative error {max_rel_err:e} over {} points", rows.len()),
        ),
        Check::new(
            format!("E_1(z) = E_1,1(z) = e^z to {:e} for Re z <= 0", setup.exp_tol),
            max_exp_err <= setup.exp_tol,
            format!("max relative error {max_exp_err:e} over {} points", setup.exp_points),
        ),
    ];
    Ok(MlCheckReport {
        setup: setup.clone(),
        rows,
        max_rel_err,
        max_exp_err,
        checks,
    })
}
