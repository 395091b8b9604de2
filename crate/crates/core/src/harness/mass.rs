//! Uniformity in `h` of the linear propagator's `L^∞_T L²_h` bound.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{csv_num, Check, HarnessError, Report};
use crate::lattice::{dft, discretize, norm_lp, LatticeGrid};
use crate::solver::{KernelBuilder, ModelParams, SymbolSource, SymbolTable};
use crate::trajectory::TimeGrid;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassRow {
    pub h: f64,
    pub n_points: usize,
    /// `‖f_h‖_{L²_h}`
    pub initial_norm: f64,
    /// `sup_t ‖L_{h,t} f_h‖_{L²_h} / ‖f_h‖_{L²_h}`
    pub ratio: f64,
    /// time node attaining the supremum
    pub t_sup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MassReport {
    pub alpha: f64,
    pub beta: f64,
    pub extent: f64,
    pub tolerance: f64,
    pub rows: Vec<MassRow>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// `max/min − 1` across the sweep
    pub variation: f64,
    /// set when the datum vanishes and ratios are undefined
    pub zero_data: bool,
    pub checks: Vec<Check>,
}

impl Report for MassReport {
    fn checks(&self) -> &[Check] {
        &self.checks
    }

    fn csv(&self) -> String {
        let mut out = String::from("h,n_points,initial_norm,ratio,t_sup\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_num(r.h),
                r.n_points,
                csv_num(r.initial_norm),
                csv_num(r.ratio),
                csv_num(r.t_sup)
            ));
        }
        out
    }
}

fn mass_row<F>(params: &ModelParams, grid: LatticeGrid, time: &TimeGrid, f: &F) -> Result<MassRow, HarnessError>
where
    F: Fn(f64) -> Complex64,
{
    let data = discretize(f, &grid);
    let initial_norm = norm_lp(&data, 2.0);
    let spec = dft(&data);
    let table = SymbolTable::new(params, &grid, SymbolSource::Lattice)?;
    let kb = KernelBuilder::new(params.beta)?;
    // energy carried by each distinct |μ|
    let mut energy = vec![0.0; table.distinct().len()];
    for (k, c) in spec.coeffs().iter().enumerate() {
        energy[table.mode_index(k)] += c.norm_sqr();
    }
    let weight = grid.h() * grid.dxi() / (2.0 * std::f64::consts::PI);
    let mut best = (0.0, 0.0);
    for t in time.nodes() {
        let mut total = 0.0;
        for (j, &mu) in table.distinct().iter().enumerate() {
            if energy[j] > 0.0 {
                total += kb.propagator(t, mu)?.norm_sqr() * energy[j];
            }
        }
        let norm = (weight * total).sqrt();
        if norm > best.0 {
            best = (norm, t);
        }
    }
    let ratio = if initial_norm > 0.0 {
        best.0 / initial_norm
    } else {
        f64::NAN
    };
    Ok(MassRow {
        h: grid.h(),
        n_points: grid.n_points(),
        initial_norm,
        ratio,
        t_sup: best.1,
    })
}

/// For each `h` (fixed `extent`), the ratio `sup_t ‖L_{h,t} f_h‖/‖f_h‖` over
/// the nodes of `time`; the check requires `max/min − 1 < tolerance`.
pub fn run_mass_uniformity<F>(
    params: &ModelParams,
    h_list: &[f64],
    extent: f64,
    f: F,
    time: &TimeGrid,
    tolerance: f64,
) -> Result<MassReport, HarnessError>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    if h_list.is_empty() {
        return Err(HarnessError::Setup("h list is empty".into()));
    }
    params.validate()?;
    let mut grids = h_list
        .iter()
        .map(|&h| LatticeGrid::with_extent(extent, h))
        .collect::<Result<Vec<_>, _>>()?;
    grids.sort_by(|a, b| b.h().total_cmp(&a.h()));
    let rows = grids
        .par_iter()
        .map(|g| mass_row(params, *g, time, &f))
        .collect::<Result<Vec<_>, _>>()?;

    let zero_data = rows.iter().any(|r| r.initial_norm == 0.0);
    let mut checks = Vec::new();
    let (max_ratio, min_ratio, variation);
    if zero_data {
        max_ratio = f64::NAN;
        min_ratio = f64::NAN;
        variation = f64::NAN;
        checks.push(Check::new(
            "mass ratios skipped for zero data",
            true,
            "initial datum vanishes; ratios undefined",
        ));
    } else {
        max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        variation = max_ratio / min_ratio - 1.0;
        checks.push(Check::new(
            "sup_t ||L_t f_h|| / ||f_h|| finite for every h",
            rows.iter().all(|r| r.ratio.is_finite()),
            format!("ratios in [{min_ratio}, {max_ratio}]"),
        ));
        checks.push(Check::new(
            format!("ratios vary by less than {}% across h", 100.0 * tolerance),
            variation < tolerance,
            format!("max/min - 1 = {variation:e}"),
        ));
    }
    Ok(MassReport {
        alpha: params.alpha,
        beta: params.beta,
        extent,
        tolerance,
        rows,
        max_ratio,
        min_ratio,
        variation,
        zero_data,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(x: f64) -> Complex64 {
        Complex64::new((-x * x).exp(), 0.0)
    }

    #[test]
    fn unitary_at_beta_one() {
        let p = ModelParams::new(1.5, 1.0, 3, 1.0);
        let time = TimeGrid::new(1.0, 16).unwrap();
        let r = run_mass_uniformity(&p, &[0.4, 0.2, 0.1], 25.6, gaussian, &time, 0.05).unwrap();
        for row in &r.rows {
            assert!((row.ratio - 1.0).abs() < 1e-12, "{}", row.ratio);
        }
        assert!(r.passed());
    }

    #[test]
    fn zero_data_is_flagged() {
        let p = ModelParams::new(1.5, 0.85, 3, 1.0);
        let time = TimeGrid::new(1.0, 4).unwrap();
        let r = run_mass_uniformity(&p, &[0.4, 0.2], 25.6, |_| Complex64::new(0.0, 0.0), &time, 0.05).unwrap();
        assert!(r.zero_data);
        assert!(r.passed());
    }

    #[test]
    fn rows_are_sorted_by_decreasing_h() {
        let p = ModelParams::new(1.5, 0.85, 3, 1.0);
        let time = TimeGrid::new(0.5, 4).unwrap();
        let r = run_mass_uniformity(&p, &[0.1, 0.4, 0.2], 25.6, gaussian, &time, 0.05).unwrap();
        let hs: Vec<f64> = r.rows.iter().map(|r| r.h).collect();
        assert_eq!(hs, vec![0.4, 0.2, 0.1]);
        assert!(r.csv().starts_with("h,n_points,initial_norm,ratio,t_sup\n"));
    }
}
