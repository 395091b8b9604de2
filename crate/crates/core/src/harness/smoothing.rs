//! Smoothing dichotomy: the quotient
//! `Q(h) = ‖⟨h^{−1}∇⟩^{(σ−1)/2−ε} e^{−itφ_h} u₀‖_{L^∞_h L²_T} / ‖u₀‖_{L²_h}`
//! for raw and for filtered data concentrated at the edge frequency `θ = π`,
//! where `w′` (hence the group velocity) vanishes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{csv_num, Check, HarnessError, Report};
use crate::lattice::{dft, idft, norm_lp, norm_smoothing, LatticeField, LatticeGrid};
use crate::solver::{prepare_initial, ModelParams};
use crate::symbol::{Symbol, SymbolConfig};
use crate::trajectory::{SolutionTrajectory, TimeGrid};

/// Lower bound on the unfiltered growth `Q(h/2)/Q(h)`.
pub const GROWTH_MIN: f64 = 1.5;
/// Band for the filtered ratio `Q(h/2)/Q(h)`.
pub const FLAT_BAND: (f64, f64) = (0.8, 1.2);

/// Gaussian packet `exp(−((x−c)/(W h))²/2) e^{iθx/h}` whose width `W` is
/// counted in lattice sites and whose carrier `θ` is a lattice frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub center: f64,
    pub width_sites: f64,
    pub theta: f64,
}

impl PacketSpec {
    /// Packet at `θ = π` with the narrowest width that keeps 95% of the
    /// spectral mass within `|θ − π| < 0.2`.
    pub fn resonant() -> Self {
        PacketSpec {
            center: 0.0,
            width_sites: resonant_packet_width(0.2, 0.95),
            theta: PI,
        }
    }

    /// The continuous datum on a lattice of mesh `h`.
    pub fn profile(&self, h: f64) -> impl Fn(f64) -> Complex64 + Sync {
        let spec = *self;
        move |x: f64| {
            let y = (x - spec.center) / (spec.width_sites * h);
            Complex64::from_polar((-0.5 * y * y).exp(), spec.theta * x / h)
        }
    }
}

/// Data of the smoothing experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SmoothingData {
    Packet(PacketSpec),
    Constant(Complex64),
}

impl SmoothingData {
    fn datum(&self, grid: &LatticeGrid, filtered: bool) -> Result<LatticeField, HarnessError> {
        Ok(match self {
            SmoothingData::Packet(p) => prepare_initial(p.profile(grid.h()), grid, filtered)?,
            SmoothingData::Constant(c) => {
                let c = *c;
                prepare_initial(move |_| c, grid, filtered)?
            }
        })
    }
}

/// Smallest width `W` (in sites) such that the discrete Gaussian
/// `e^{−m²/(2W²)}` keeps at least `mass` of its spectral energy within
/// `|θ| < window`.
pub fn resonant_packet_width(window: f64, mass: f64) -> f64 {
    let grid = LatticeGrid::new(1.0, 4096).expect("valid grid");
    let fraction = |w: f64| {
        let f = LatticeField::from_fn(grid, |x| Complex64::new((-0.5 * (x / w).powi(2)).exp(), 0.0));
        let spec = dft(&f);
        let total = spec.weighted_energy(|_| 1.0);
        let inside = spec.weighted_energy(|t| if t.abs() < window { 1.0 } else { 0.0 });
        inside / total
    };
    let (mut lo, mut hi) = (0.5, 200.0);
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if fraction(mid) >= mass {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingRow {
    pub h: f64,
    pub n_points: usize,
    pub q_unfiltered: f64,
    pub q_filtered: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothingReport {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// exponent `(σ−1)/2 − ε`
    pub exponent: f64,
    pub data: SmoothingData,
    pub rows: Vec<SmoothingRow>,
    /// `Q(h/2)/Q(h)` per halving, unfiltered
    pub growth_unfiltered: Vec<f64>,
    /// `Q(h/2)/Q(h)` per halving, filtered
    pub growth_filtered: Vec<f64>,
    pub checks: Vec<Check>,
}

impl Report for SmoothingReport {
    fn checks(&self) -> &[Check] {
        &self.checks
    }

    fn csv(&self) -> String {
        let mut out = String::from("h,n_points,q_unfiltered,q_filtered\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                csv_num(r.h),
                r.n_points,
                csv_num(r.q_unfiltered),
                csv_num(r.q_filtered)
            ));
        }
        out
    }
}

/// `Q` for the phase evolution `e^{−itφ_h}` of `u0`.
fn quotient(sym: &Symbol, beta: f64, u0: &LatticeField, time: &TimeGrid, exponent: f64) -> Result<f64, HarnessError> {
    let grid = *u0.grid();
    let h = grid.h();
    let spec = dft(u0);
    let phases: Vec<f64> = grid.frequencies().iter().map(|&t| sym.phi(h, beta, t)).collect();
    let snapshots: Vec<LatticeField> = time
        .nodes()
        .par_iter()
        .map(|&t| {
            let mut s = spec.clone();
            for (c, ph) in s.coeffs_mut().iter_mut().zip(&phases) {
                *c *= Complex64::from_polar(1.0, -t * ph);
            }
            idft(&s)
        })
        .collect();
    let traj = SolutionTrajectory::new(*time, snapshots, Vec::new())?;
    let denom = norm_lp(u0, 2.0);
    if !(denom > 0.0) {
        return Err(HarnessError::Setup("smoothing datum vanishes on the lattice".into()));
    }
    Ok(norm_smoothing(&traj, exponent) / denom)
}

/// Run the linear phase evolution for raw and filtered data on each `h`
/// (successive halvings, fixed `extent`) and compare the growth of `Q`.
pub fn run_smoothing_experiment(
    params: &ModelParams,
    h_list: &[f64],
    extent: f64,
    data: SmoothingData,
    time: &TimeGrid,
    epsilon: f64,
) -> Result<SmoothingReport, HarnessError> {
    params.validate()?;
    if h_list.len() < 2 {
        return Err(HarnessError::Setup("need at least two mesh sizes".into()));
    }
    let mut hs = h_list.to_vec();
    hs.sort_by(|a, b| b.total_cmp(a));
    if hs.windows(2).any(|w| ((w[1] - 0.5 * w[0]) / w[1]).abs() > 1e-9) {
        return Err(HarnessError::Setup(format!(
            "mesh sizes must be successive halvings, got {hs:?}"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(HarnessError::Setup(format!("epsilon > 0 fails: epsilon = {epsilon}")));
    }
    let sym = Symbol::new(SymbolConfig::new(params.alpha)?)?;
    let exponent = 0.5 * (params.sigma() - 1.0) - epsilon;
    let rows = hs
        .iter()
        .map(|&h| {
            let grid = LatticeGrid::with_extent(extent, h)?;
            let raw = data.datum(&grid, false)?;
            let filtered = data.datum(&grid, true)?;
            Ok(SmoothingRow {
                h,
                n_points: grid.n_points(),
                q_unfiltered: quotient(&sym, params.beta, &raw, time, exponent)?,
                q_filtered: quotient(&sym, params.beta, &filtered, time, exponent)?,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let growth =
        |sel: fn(&SmoothingRow) -> f64| -> Vec<f64> { rows.windows(2).map(|w| sel(&w[1]) / sel(&w[0])).collect() };
    let growth_unfiltered = growth(|r| r.q_unfiltered);
    let growth_filtered = growth(|r| r.q_filtered);

    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    let mut checks = vec![Check::new(
        "Q positive and finite",
        rows.iter().all(|r| {
            r.q_unfiltered > 0.0 && r.q_filtered > 0.0 && r.q_unfiltered.is_finite() && r.q_filtered.is_finite()
        }),
        format!("{} mesh sizes", rows.len()),
    )];
    let flat = |v: &[f64]| v.iter().all(|&g| g >= FLAT_BAND.0 && g <= FLAT_BAND.1);
    match data {
        SmoothingData::Packet(_) => {
            checks.push(Check::new(
                format!("unfiltered Q(h/2)/Q(h) >= {GROWTH_MIN} at every halving"),
                growth_unfiltered.iter().all(|&g| g >= GROWTH_MIN),
                format!("ratios [{}]", fmt(&growth_unfiltered)),
            ));
            checks.push(Check::new(
                format!("filtered Q(h/2)/Q(h) in [{}, {}]", FLAT_BAND.0, FLAT_BAND.1),
                flat(&growth_filtered),
                format!("ratios [{}]", fmt(&growth_filtered)),
            ));
            checks.push(Check::new(
                "unfiltered growth exceeds filtered growth at every halving",
                growth_unfiltered.iter().zip(&growth_filtered).all(|(u, f)| u > f),
                format!(
                    "unfiltered [{}] vs filtered [{}]",
                    fmt(&growth_unfiltered),
                    fmt(&growth_filtered)
                ),
            ));
        }
        SmoothingData::Constant(_) => {
            checks.push(Check::new(
                "filtered constant data: Q flat in h",
                flat(&growth_filtered),
                format!("ratios [{}]", fmt(&growth_filtered)),
            ));
        }
    }
    Ok(SmoothingReport {
        alpha: params.alpha,
        beta: params.beta,
        epsilon,
        exponent,
        data,
        rows,
        growth_unfiltered,
        growth_filtered,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonant_width_meets_the_mass_rule() {
        let w = resonant_packet_width(0.2, 0.95);
        // continuous-spectrum estimate: erf(0.2 W) = 0.95
        assert!((w - 6.93).abs() < 0.05, "{w}");
        assert!(resonant_packet_width(0.2, 0.99) > w);
    }

    #[test]
    fn packet_spectrum_sits_at_the_edge() {
        let p = PacketSpec::resonant();
        let grid = LatticeGrid::new(0.1, 512).unwrap();
        let raw = prepare_initial(p.profile(0.1), &grid, false).unwrap();
        let spec = dft(&raw);
        let total = spec.weighted_energy(|_| 1.0);
        let near = spec.weighted_energy(|t| if PI - t.abs() < 0.2 { 1.0 } else { 0.0 });
        assert!(near / total > 0.95, "{}", near / total);
    }

    #[test]
    fn constant_data_is_flat() {
        let p = ModelParams::new(1.5, 0.85, 3, 1.0);
        let time = TimeGrid::new(1.0, 8).unwrap();
        let r = run_smoothing_experiment(
            &p,
            &[0.4, 0.2, 0.1],
            25.6,
            SmoothingData::Constant(Complex64::new(1.0, 0.0)),
            &time,
            0.01,
        )
        .unwrap();
        // zero frequency: Q = √T / √extent for every h
        for row in &r.rows {
            assert!(
                (row.q_filtered - (1.0 / 25.6f64).sqrt()).abs() < 1e-12,
                "{}",
                row.q_filtered
            );
        }
        assert!(r.passed());
    }

    #[test]
    fn sweep_must_halve() {
        let p = ModelParams::new(1.5, 0.85, 3, 1.0);
        let time = TimeGrid::new(1.0, 8).unwrap();
        let data = SmoothingData::Packet(PacketSpec::resonant());
        assert!(run_smoothing_experiment(&p, &[0.4, 0.1], 25.6, data, &time, 0.01).is_err());
        assert!(run_smoothing_experiment(&p, &[0.4], 25.6, data, &time, 0.01).is_err());
        assert!(run_smoothing_experiment(&p, &[0.4, 0.2], 25.6, data, &time, 0.0).is_err());
    }
}
