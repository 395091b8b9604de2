//! Continuum-limit study: lattice solutions on a mesh sweep against a
//! fine-mesh continuum reference, compared after piecewise-linear
//! interpolation onto the reference grid.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{csv_num, fit_order, Check, HarnessError, Report};
use crate::lattice::{interp_linear, lambda_norm, norm_lp, norm_sobolev, LatticeGrid};
use crate::solver::{prepare_initial, solve, ModelParams, PicardOptions, SolverError, SymbolSource};
use crate::trajectory::{SolutionTrajectory, TimeGrid};

/// Contraction factor demanded of every Picard sweep.
pub const CONTRACTION_MAX: f64 = 0.5;
/// Minimal fitted order of the nonlinear study.
pub const NONLINEAR_MIN_ORDER: f64 = 0.2;
/// Half-width of the accepted window around `2 − α` in the linear study.
pub const LINEAR_ORDER_WINDOW: f64 = 0.3;
/// Accepted share of the reference self-error in the smallest error.
pub const REFERENCE_SHARE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuumSetup {
    pub h_list: Vec<f64>,
    pub h_ref: f64,
    pub extent: f64,
    pub time: TimeGrid,
    pub opts: PicardOptions,
    /// Halve `T` (keeping `m_steps`) until every sweep contracts by at least
    /// [`CONTRACTION_MAX`] on the coarsest mesh.
    pub auto_time: bool,
    pub max_halvings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuumRow {
    pub h: f64,
    pub n_points: usize,
    /// `sup_t ‖p_h u_h − u‖_{H^s}`
    pub err_hs: f64,
    /// `sup_t ‖p_h u_h − u‖_{L²}`
    pub err_l2: f64,
    /// `Λ_T(p_h u_h − u)`
    pub err_lambda: f64,
    /// `‖p_h u_h(0) − u(0)‖_{H^s}` (data and interpolation budget)
    pub initial_err_hs: f64,
    pub sweeps: usize,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub alpha: f64,
    pub beta: f64,
    pub p: u32,
    pub sign: f64,
    pub s: f64,
    pub t_final: f64,
    pub m_steps: usize,
    pub h_ref: f64,
    pub n_ref: usize,
    pub rows: Vec<ContinuumRow>,
    /// `(h, sup_t H^s error)`, `h` strictly decreasing
    pub pairs: Vec<(f64, f64)>,
    pub fitted_order: Option<f64>,
    pub fitted_order_l2: Option<f64>,
    pub fitted_order_lambda: Option<f64>,
    pub target_order: f64,
    /// `sup_t H^s` distance between the `2h_ref` and `h_ref` references
    pub reference_self_error: f64,
    pub reference_sweeps: usize,
    pub reference_max_ratio: f64,
    pub zero_data: bool,
    pub checks: Vec<Check>,
}

impl Report for ConvergenceReport {
    fn checks(&self) -> &[Check] {
        &self.checks
    }

    fn csv(&self) -> String {
        let mut out = String::from("h,n_points,err_hs,err_l2,err_lambda,initial_err_hs,sweeps,max_ratio\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                csv_num(r.h),
                r.n_points,
                csv_num(r.err_hs),
                csv_num(r.err_l2),
                csv_num(r.err_lambda),
                csv_num(r.initial_err_hs),
                r.sweeps,
                csv_num(r.max_ratio)
            ));
        }
        out
    }
}

/// Largest ratio of successive Picard residuals (0 for fewer than two).
fn max_ratio(residuals: &[f64]) -> f64 {
    residuals
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .fold(0.0, f64::max)
}

/// Halve `time.t_final` until the lattice solve on `grid` converges with
/// every residual ratio below [`CONTRACTION_MAX`].
pub fn select_time_horizon<F>(
    params: &ModelParams,
    grid: &LatticeGrid,
    f: F,
    time: TimeGrid,
    opts: PicardOptions,
    max_halvings: usize,
) -> Result<TimeGrid, HarnessError>
where
    F: Fn(f64) -> Complex64,
{
    let mut t = time;
    let mut last_err = None;
    for _ in 0..=max_halvings {
        match solve(params, grid, &t, &f, SymbolSource::Lattice, opts) {
            Ok(traj) if max_ratio(traj.residuals()) < CONTRACTION_MAX => return Ok(t),
            Ok(traj) => {
                last_err = Some(SolverError::NonContraction {
                    residuals: traj.residuals().to_vec(),
                })
            }
            Err(e @ SolverError::NonContraction { .. }) => last_err = Some(e),
            Err(e) => return Err(e.into()),
        }
        t = TimeGrid::new(0.5 * t.t_final(), t.m_steps())?;
    }
    Err(last_err.expect("at least one attempt").into())
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Solve the lattice model on every mesh of the sweep (filtered data and
/// nonlinearity per `params`) and the continuum reference on `h_ref`, then
/// measure `sup_t H^s`, `sup_t L²` and `Λ_T` distances and fit the orders.
pub fn run_continuum_study<F>(
    params: &ModelParams,
    setup: &ContinuumSetup,
    f: F,
) -> Result<ConvergenceReport, HarnessError>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    params.validate()?;
    let mut hs = setup.h_list.clone();
    if hs.len() < 2 {
        return Err(HarnessError::Setup("need at least two mesh sizes".into()));
    }
    hs.sort_by(|a, b| b.total_cmp(a));
    if hs.windows(2).any(|w| w[0] == w[1]) {
        return Err(HarnessError::Setup(format!("mesh sizes must be distinct, got {hs:?}")));
    }
    let h_min = *hs.last().expect("non-empty");
    if !(setup.h_ref <= 0.25 * h_min * (1.0 + 1e-12)) {
        return Err(HarnessError::Setup(format!(
            "h_ref <= min(h)/4 fails: h_ref = {} > {}",
            setup.h_ref,
            0.25 * h_min
        )));
    }
    let s_tilde = (params.s + params.sigma() - params.alpha).max(0.5);
    if !(s_tilde < 1.0) {
        return Err(HarnessError::Setup(format!(
            "max(s+sigma-alpha, 1/2) < 1 fails: {s_tilde} (s = {}, sigma = {})",
            params.s,
            params.sigma()
        )));
    }
    let grids = hs
        .iter()
        .map(|&h| LatticeGrid::with_extent(setup.extent, h))
        .collect::<Result<Vec<_>, _>>()?;
    let ref_grid = LatticeGrid::with_extent(setup.extent, setup.h_ref)?;
    let check_grid = LatticeGrid::with_extent(setup.extent, 2.0 * setup.h_ref)?;

    let time = if setup.auto_time && params.sign != 0.0 {
        select_time_horizon(params, &grids[0], &f, setup.time, setup.opts, setup.max_halvings)?
    } else {
        setup.time
    };

    // independent runs: the sweep, the reference and the coarser reference
    enum Job {
        Lattice(LatticeGrid),
        Reference(LatticeGrid),
    }
    let mut jobs: Vec<Job> = grids.iter().map(|g| Job::Lattice(*g)).collect();
    jobs.push(Job::Reference(ref_grid));
    jobs.push(Job::Reference(check_grid));
    let mut runs = jobs
        .par_iter()
        .map(|job| match job {
            Job::Lattice(g) => solve(params, g, &time, &f, SymbolSource::Lattice, setup.opts),
            Job::Reference(g) => solve(params, g, &time, &f, SymbolSource::Continuum, setup.opts),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let coarse_ref = runs.pop().expect("coarse reference");
    let reference = runs.pop().expect("reference");

    let exps = params.lambda_exponents();
    let distance = |traj: &SolutionTrajectory| -> Result<(SolutionTrajectory, f64, f64), HarnessError> {
        let snaps = traj
            .snapshots()
            .iter()
            .map(|s| interp_linear(s, &ref_grid))
            .collect::<Result<Vec<_>, _>>()?;
        let d = SolutionTrajectory::new(time, snaps, Vec::new())?.difference(&reference)?;
        let hs_err = d
            .snapshots()
            .iter()
            .map(|s| norm_sobolev(s, params.s))
            .fold(0.0, f64::max);
        let l2_err = d.snapshots().iter().map(|s| norm_lp(s, 2.0)).fold(0.0, f64::max);
        Ok((d, hs_err, l2_err))
    };
    let rows = runs
        .iter()
        .zip(&grids)
        .map(|(traj, g)| {
            let (d, err_hs, err_l2) = distance(traj)?;
            Ok(ContinuumRow {
                h: g.h(),
                n_points: g.n_points(),
                err_hs,
                err_l2,
                err_lambda: lambda_norm(&d, &exps).lambda,
                initial_err_hs: norm_sobolev(&d.snapshots()[0], params.s),
                sweeps: traj.residuals().len(),
                max_ratio: max_ratio(traj.residuals()),
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let reference_self_error = distance(&coarse_ref)?.1;

    // zero data: every error vanishes and the order is undefined
    let data_norm = norm_lp(&prepare_initial(&f, &ref_grid, false)?, 2.0);
    let zero_data = data_norm == 0.0;

    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.err_hs)).collect();
    let fit = |sel: fn(&ContinuumRow) -> f64| -> Option<f64> {
        let p: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, sel(r))).collect();
        fit_order(&p).ok()
    };
    let fitted_order = fit(|r| r.err_hs);
    let fitted_order_l2 = fit(|r| r.err_l2);
    let fitted_order_lambda = fit(|r| r.err_lambda);
    let target_order = 2.0 - params.alpha;

    let fmt = |sel: fn(&ContinuumRow) -> f64| {
        rows.iter()
            .map(|r| format!("{:.4e}", sel(r)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let show = |o: Option<f64>| o.map_or("undefined".to_string(), |v| format!("{v:.4}"));
    let mut checks = Vec::new();
    if zero_data {
        checks.push(Check::new(
            "zero data: all errors vanish, order undefined",
            rows.iter().all(|r| r.err_hs == 0.0 && r.err_lambda == 0.0),
            format!("errors [{}]", fmt(|r| r.err_hs)),
        ));
    } else if params.sign == 0.0 {
        let l2: Vec<f64> = rows.iter().map(|r| r.err_l2).collect();
        checks.push(Check::new(
            "sup_t L2 errors strictly decreasing in h",
            strictly_decreasing(&l2),
            format!("errors [{}]", fmt(|r| r.err_l2)),
        ));
        checks.push(Check::new(
            format!("fitted sup_t L2 order within 2-alpha +- {LINEAR_ORDER_WINDOW}"),
            fitted_order_l2.is_some_and(|o| (o - target_order).abs() <= LINEAR_ORDER_WINDOW),
            format!("order {} vs target {target_order}", show(fitted_order_l2)),
        ));
    } else {
        let hs_errs: Vec<f64> = rows.iter().map(|r| r.err_hs).collect();
        let lam: Vec<f64> = rows.iter().map(|r| r.err_lambda).collect();
        checks.push(Check::new(
            "sup_t H^s errors strictly decreasing in h",
            strictly_decreasing(&hs_errs),
            format!("errors [{}]", fmt(|r| r.err_hs)),
        ));
        checks.push(Check::new(
            "Lambda_T distances strictly decreasing in h",
            strictly_decreasing(&lam),
            format!("distances [{}]", fmt(|r| r.err_lambda)),
        ));
        checks.push(Check::new(
            format!("fitted H^s order >= {NONLINEAR_MIN_ORDER}"),
            fitted_order.is_some_and(|o| o >= NONLINEAR_MIN_ORDER),
            format!("order {} (target 2-alpha = {target_order})", show(fitted_order)),
        ));
        let worst = rows
            .iter()
            .map(|r| r.max_ratio)
            .fold(max_ratio(reference.residuals()), f64::max);
        checks.push(Check::new(
            format!("Picard residual ratio < {CONTRACTION_MAX} in every sweep"),
            worst < CONTRACTION_MAX,
            format!("largest ratio {worst:.4} (T = {})", time.t_final()),
        ));
    }
    if !zero_data {
        let smallest = rows.iter().map(|r| r.err_hs).fold(f64::INFINITY, f64::min);
        checks.push(Check::new(
            format!(
                "reference self-error below {}% of the smallest error",
                100.0 * REFERENCE_SHARE
            ),
            reference_self_error < REFERENCE_SHARE * smallest,
            format!("2h_ref vs h_ref distance {reference_self_error:e}, smallest error {smallest:e}"),
        ));
    }

    Ok(ConvergenceReport {
        alpha: params.alpha,
        beta: params.beta,
        p: params.p,
        sign: params.sign,
        s: params.s,
        t_final: time.t_final(),
        m_steps: time.m_steps(),
        h_ref: setup.h_ref,
        n_ref: ref_grid.n_points(),
        rows,
        pairs,
        fitted_order,
        fitted_order_l2,
        fitted_order_lambda,
        target_order,
        reference_self_error,
        reference_sweeps: reference.residuals().len(),
        reference_max_ratio: max_ratio(reference.residuals()),
        zero_data,
        checks,
    })
}
