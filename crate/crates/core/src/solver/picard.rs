//! Picard iteration on the whole time interval.
//!
//! Each sweep evaluates the nonlinearity at every time node in physical
//! space, transforms it, applies the product-integration weights mode by
//! mode and transforms back. The residual of a sweep is the `Λ_T` norm of
//! the update relative to `Λ_T` of the first iterate.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{KernelTables, SymbolSource, SymbolTable};
use super::{nonlinearity, prepare_initial, ModelParams, SolverError};
use crate::lattice::{discretize, lambda_norm, FourierPlan, LatticeError, LatticeField, LatticeGrid};
use crate::special::i_pow_minus_beta;
use crate::trajectory::{SolutionTrajectory, TimeGrid};

/// Stopping rule of the fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    /// Relative `Λ_T` residual at which the iteration stops.
    pub tol: f64,
    /// Maximum number of sweeps.
    pub k_max: usize,
    /// Consecutive non-decreasing residuals that signal non-contraction.
    pub stall_sweeps: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            tol: 1e-10,
            k_max: 60,
            stall_sweeps: 3,
        }
    }
}

/// A prepared solver: symbol table, propagator and kernel weights for one
/// lattice, time grid and parameter set.
#[derive(Debug, Clone)]
pub struct Solver {
    params: ModelParams,
    time: TimeGrid,
    table: SymbolTable,
    tables: KernelTables,
    opts: PicardOptions,
    filtered: bool,
}

type Spectra = Vec<Vec<Complex64>>;

impl Solver {
    pub fn new(
        params: ModelParams,
        grid: &LatticeGrid,
        time: TimeGrid,
        source: SymbolSource,
        opts: PicardOptions,
    ) -> Result<Self, SolverError> {
        params.validate()?;
        if !(opts.tol > 0.0) || opts.k_max == 0 || opts.stall_sweeps == 0 {
            return Err(SolverError::InvalidParams(format!("invalid Picard options {opts:?}")));
        }
        let table = SymbolTable::new(&params, grid, source)?;
        let tables = KernelTables::new(&table, &time, &params)?;
        Ok(Solver {
            params,
            time,
            table,
            tables,
            opts,
            filtered: source == SymbolSource::Lattice && params.use_filter,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    pub fn tables(&self) -> &KernelTables {
        &self.tables
    }

    pub fn grid(&self) -> &LatticeGrid {
        self.table.grid()
    }

    fn check_grid(&self, u0: &LatticeField) -> Result<(), SolverError> {
        if !u0.grid().same_as(self.grid()) {
            return Err(LatticeError::GridMismatch("initial datum is not on the solver grid".into()).into());
        }
        Ok(())
    }

    fn forward(&self, field: &LatticeField) -> Vec<Complex64> {
        let plan = FourierPlan::cached(field.values().len());
        let mut data = field.values().to_vec();
        plan.forward_in_place(&mut data);
        data
    }

    /// Inverse transforms of time-major spectra; node 0 is the exact datum.
    fn to_fields(&self, spectra: Spectra, u0: &LatticeField) -> Vec<LatticeField> {
        let grid = *self.grid();
        let mut fields: Vec<LatticeField> = spectra
            .into_par_iter()
            .map(|mut data| {
                FourierPlan::cached(data.len()).inverse_in_place(&mut data);
                LatticeField::new(grid, data).expect("length preserved")
            })
            .collect();
        fields[0] = u0.clone();
        fields
    }

    /// Time-major spectra `E_β(i^{−β} t_n^β μ_k) û₀(k)`.
    fn linear_spectra(&self, u0: &LatticeField) -> Spectra {
        let u0_hat = self.forward(u0);
        (0..=self.time.m_steps())
            .map(|n| {
                u0_hat
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * self.tables.propagator[self.table.mode_index(k)][n])
                    .collect()
            })
            .collect()
    }

    /// `lin + i^{−β} Σ_ℓ (a_ℓ ĝ_{n−ℓ} + b_ℓ ĝ_{n−ℓ+1})` for every mode and node.
    fn duhamel(&self, lin: &Spectra, g: &Spectra) -> Spectra {
        let n_modes = self.grid().n_points();
        let m = self.time.m_steps();
        let coef = i_pow_minus_beta(self.params.beta);
        let columns: Vec<Vec<Complex64>> = (0..n_modes)
            .into_par_iter()
            .map(|k| {
                let w = &self.tables.weights[self.table.mode_index(k)];
                let gk: Vec<Complex64> = g.iter().map(|row| row[k]).collect();
                let mut out = Vec::with_capacity(m + 1);
                out.push(lin[0][k]);
                for n in 1..=m {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for l in 1..=n {
                        acc += w.a[l - 1] * gk[n - l] + w.b[l - 1] * gk[n - l + 1];
                    }
                    out.push(lin[n][k] + coef * acc);
                }
                out
            })
            .collect();
        (0..=m).map(|n| columns.iter().map(|col| col[n]).collect()).collect()
    }

    fn nonlinear_spectra(&self, fields: &[LatticeField]) -> Result<Spectra, SolverError> {
        let p = self.params.p;
        let sign = self.params.sign;
        let filtered = self.filtered;
        fields
            .par_iter()
            .map(|f| Ok(self.forward(&nonlinearity(f, p, sign, filtered)?)))
            .collect()
    }

    /// The linear evolution `L_{t_n} u₀` at every node.
    pub fn linear_trajectory(&self, u0: &LatticeField) -> Result<SolutionTrajectory, SolverError> {
        self.check_grid(u0)?;
        let fields = self.to_fields(self.linear_spectra(u0), u0);
        Ok(SolutionTrajectory::new(self.time, fields, Vec::new())?)
    }

    /// Solution of `u = L u₀ + i^{−β} ∫ N g` with a prescribed forcing
    /// `g(t_n)` (no fixed point needed).
    pub fn solve_forced<F>(&self, u0: &LatticeField, forcing: F) -> Result<SolutionTrajectory, SolverError>
    where
        F: Fn(f64) -> LatticeField + Sync,
    {
        self.check_grid(u0)?;
        let lin = self.linear_spectra(u0);
        let g: Spectra = self
            .time
            .nodes()
            .par_iter()
            .map(|&t| {
                let f = forcing(t);
                if !f.grid().same_as(self.grid()) {
                    return Err(SolverError::from(LatticeError::GridMismatch(
                        "forcing is not on the solver grid".into(),
                    )));
                }
                Ok(self.forward(&f))
            })
            .collect::<Result<_, _>>()?;
        let fields = self.to_fields(self.duhamel(&lin, &g), u0);
        Ok(SolutionTrajectory::new(self.time, fields, Vec::new())?)
    }

    /// Picard iteration from `u₀`; the trajectory records the relative
    /// residual of every sweep.
    pub fn solve(&self, u0: &LatticeField) -> Result<SolutionTrajectory, SolverError> {
        self.check_grid(u0)?;
        let exps = self.params.lambda_exponents();
        let lin = self.linear_spectra(u0);
        let mut current = SolutionTrajectory::new(self.time, self.to_fields(lin.clone(), u0), Vec::new())?;
        let mut residuals: Vec<f64> = Vec::new();
        let mut scale = 0.0;
        let mut stalled = 0;
        for sweep in 1..=self.opts.k_max {
            let g = self.nonlinear_spectra(current.snapshots())?;
            let next = SolutionTrajectory::new(self.time, self.to_fields(self.duhamel(&lin, &g), u0), Vec::new())?;
            if sweep == 1 {
                scale = lambda_norm(&next, &exps).lambda;
            }
            let update = lambda_norm(&next.difference(&current)?, &exps).lambda;
            let r = if scale > 0.0 { update / scale } else { 0.0 };
            current = next;
            if !r.is_finite() || r > 1e8 {
                residuals.push(r);
                return Err(SolverError::NonContraction { residuals });
            }
            if let Some(&prev) = residuals.last() {
                stalled = if r >= prev { stalled + 1 } else { 0 };
            }
            residuals.push(r);
            if r < self.opts.tol {
                break;
            }
            if stalled >= self.opts.stall_sweeps {
                return Err(SolverError::NonContraction { residuals });
            }
        }
        let snapshots = current.snapshots().to_vec();
        Ok(SolutionTrajectory::new(self.time, snapshots, residuals)?)
    }
}

/// Solve the lattice model from continuous initial data `f`; the datum is
/// `Π_h f_{2h}` when `params.use_filter`, else `f_h`.
pub fn solve<F>(
    params: &ModelParams,
    grid: &LatticeGrid,
    time: &TimeGrid,
    f: F,
    source: SymbolSource,
    opts: PicardOptions,
) -> Result<SolutionTrajectory, SolverError>
where
    F: Fn(f64) -> Complex64,
{
    let solver = Solver::new(*params, grid, *time, source, opts)?;
    let u0 = match source {
        SymbolSource::Lattice => prepare_initial(f, grid, params.use_filter)?,
        SymbolSource::Continuum => discretize(f, grid),
    };
    solver.solve(&u0)
}

/// Continuum reference: symbol `|ξ|^α`, pointwise nonlinearity and directly
/// discretized data on a fine grid.
pub fn solve_continuum_reference<F>(
    params: &ModelParams,
    grid: &LatticeGrid,
    time: &TimeGrid,
    f: F,
    opts: PicardOptions,
) -> Result<SolutionTrajectory, SolverError>
where
    F: Fn(f64) -> Complex64,
{
    solve(params, grid, time, f, SymbolSource::Continuum, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{dft, norm_lp};

    fn gaussian(x: f64) -> Complex64 {
        Complex64::new((-x * x).exp(), 0.0)
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let p = ModelParams::new(1.5, 0.85, 3, 1.0);
        let g = LatticeGrid::new(0.2, 64).unwrap();
        let tg = TimeGrid::new(0.2, 8).unwrap();
        let traj = solve(
            &p,
            &g,
            &tg,
            |_| Complex64::new(0.0, 0.0),
            SymbolSource::Lattice,
            PicardOptions::default(),
        )
        .unwrap();
        assert!(traj
            .snapshots()
            .iter()
            .all(|s| s.values().iter().all(|v| v.norm() == 0.0)));
    }

    #[test]
    fn switched_off_nonlinearity_reproduces_linear_evolution() {
        let p = ModelParams::new(1.5, 0.85, 3, 0.0);
        let g = LatticeGrid::new(0.2, 64).unwrap();
        let tg = TimeGrid::new(0.5, 10).unwrap();
        let s = Solver::new(p, &g, tg, SymbolSource::Lattice, PicardOptions::default()).unwrap();
        let u0 = prepare_initial(gaussian, &g, true).unwrap();
        let traj = s.solve(&u0).unwrap();
        assert_eq!(traj.residuals().len(), 1);
        let lin = s.linear_trajectory(&u0).unwrap();
        for (a, b) in traj.snapshots().iter().zip(lin.snapshots()) {
            assert!(norm_lp(&a.sub(b).unwrap(), f64::INFINITY) < 1e-14);
        }
        assert_eq!(traj.initial(), &u0);
    }

    #[test]
    fn picard_contracts_geometrically_for_short_times() {
        let p = ModelParams::new(1.5, 0.85, 3, 1.0);
        let g = LatticeGrid::new(0.2, 128).unwrap();
        let tg = TimeGrid::new(0.5, 32).unwrap();
        let traj = solve(&p, &g, &tg, gaussian, SymbolSource::Lattice, PicardOptions::default()).unwrap();
        let r = traj.residuals();
        assert!(r.len() >= 3 && *r.last().unwrap() < 1e-10, "{r:?}");
        for w in r.windows(2) {
            assert!(w[1] / w[0] < 0.5, "{r:?}");
        }
    }

    #[test]
    fn large_data_reports_non_contraction() {
        let p = ModelParams::new(1.5, 0.85, 3, -1.0);
        let g = LatticeGrid::new(0.2, 64).unwrap();
        let tg = TimeGrid::new(4.0, 16).unwrap();
        let big = |x: f64| Complex64::new(6.0 * (-x * x).exp(), 0.0);
        let err = solve(&p, &g, &tg, big, SymbolSource::Lattice, PicardOptions::default()).unwrap_err();
        assert!(matches!(err, SolverError::NonContraction { .. }), "{err}");
    }

    #[test]
    fn forced_solution_with_zero_forcing_is_linear() {
        let p = ModelParams::new(1.5, 0.85, 3, 1.0);
        let g = LatticeGrid::new(0.2, 32).unwrap();
        let tg = TimeGrid::new(0.3, 6).unwrap();
        let s = Solver::new(p, &g, tg, SymbolSource::Continuum, PicardOptions::default()).unwrap();
        let u0 = discretize(gaussian, &g);
        let forced = s.solve_forced(&u0, |_| LatticeField::zeros(g)).unwrap();
        let lin = s.linear_trajectory(&u0).unwrap();
        assert_eq!(forced.last(), lin.last());
        // constant-in-time forcing of the zero mode: û(t) = i^{−β} t^β/Γ(1+β) ĝ
        let one = LatticeField::new(g, vec![Complex64::new(1.0, 0.0); 32]).unwrap();
        let out = s.solve_forced(&LatticeField::zeros(g), |_| one.clone()).unwrap();
        let c0 = dft(out.last()).coeffs()[0];
        let expect = i_pow_minus_beta(0.85) * 0.3f64.powf(0.85) / crate::special::gamma_real(1.85).unwrap() * 32.0;
        assert!((c0 - expect).norm() < 1e-12 * expect.norm(), "{c0} vs {expect}");
    }
}
