//! Experiment dispatch: resolve defaults, run, and write
//! `<name>_report.json`, `<name>_data.csv` and `<name>_manifest.json`
//! (plus `solve_trajectory.bin` for `solve`).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fnls_core::harness::{
    run_continuum_study, run_mass_uniformity, run_ml_check, run_smoothing_experiment, run_symbol_checks, Check,
    ContinuumSetup, HarnessError, MlCheckSetup, PacketSpec, Report, SmoothingData,
};
use fnls_core::lattice::{encode_trajectory, norm_lp, norm_sobolev, LatticeGrid};
use fnls_core::solver::{prepare_initial, PicardOptions, Solver, SolverError, SymbolSource};
use fnls_core::trajectory::{SolutionTrajectory, TimeGrid};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, Experiment, InitialSpec, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

impl RunError {
    /// Process exit code: 2 for configuration problems, 3 for failures
    /// while running or writing.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Harness(HarnessError::Setup(_)) => 2,
            RunError::Solver(SolverError::InvalidParams(_)) => 2,
            _ => 3,
        }
    }
}

impl From<fnls_core::lattice::LatticeError> for RunError {
    fn from(e: fnls_core::lattice::LatticeError) -> Self {
        RunError::Solver(e.into())
    }
}

impl From<fnls_core::trajectory::TimeGridError> for RunError {
    fn from(e: fnls_core::trajectory::TimeGridError) -> Self {
        RunError::Solver(e.into())
    }
}

/// Result of a completed run.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub experiment: Experiment,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
    pub wall_time_s: f64,
}

/// Output of one experiment before it is written to disk.
struct Produced {
    report: serde_json::Value,
    csv: String,
    checks: Vec<Check>,
    /// resolved settings echoed into the manifest
    settings: serde_json::Value,
    extra_manifest: serde_json::Value,
    binary: Option<(String, Vec<u8>)>,
}

fn from_report<R: Report>(r: &R, settings: serde_json::Value) -> Produced {
    Produced {
        report: serde_json::to_value(r).expect("reports serialize"),
        csv: r.csv(),
        checks: r.checks().to_vec(),
        settings,
        extra_manifest: json!({}),
        binary: None,
    }
}

fn picard_options(cfg: &RunConfig) -> PicardOptions {
    let d = PicardOptions::default();
    PicardOptions {
        tol: cfg.tol.unwrap_or(d.tol),
        k_max: cfg.k_max.unwrap_or(d.k_max),
        ..d
    }
}

fn initial(cfg: &RunConfig) -> (InitialSpec, f64) {
    (
        cfg.initial.unwrap_or(InitialSpec::Gaussian),
        cfg.amplitude.unwrap_or(1.0),
    )
}

fn run_symbol(cfg: &RunConfig) -> Result<Produced, RunError> {
    let alphas = cfg.alpha_list.clone().unwrap_or_else(|| vec![1.2, 1.5, 1.9]);
    let h = cfg.h.unwrap_or(1.0);
    let report = run_symbol_checks(&alphas, cfg.params.beta, h)?;
    Ok(from_report(
        &report,
        json!({ "alpha_list": alphas, "beta": cfg.params.beta, "h": h }),
    ))
}

fn run_mass(cfg: &RunConfig) -> Result<Produced, RunError> {
    let h_list = cfg.h_list.clone().unwrap_or_else(|| vec![0.4, 0.2, 0.1, 0.05]);
    let extent = cfg.extent.unwrap_or(51.2);
    let time = TimeGrid::new(cfg.t_final.unwrap_or(1.0), cfg.m_steps.unwrap_or(64))?;
    let tolerance = cfg.tolerance.unwrap_or(0.05);
    let (spec, amp) = initial(cfg);
    let report = run_mass_uniformity(&cfg.params, &h_list, extent, spec.profile(amp), &time, tolerance)?;
    let settings = json!({
        "h_list": h_list, "extent": extent, "T": time.t_final(), "m_steps": time.m_steps(),
        "tolerance": tolerance, "initial": spec, "amplitude": amp,
    });
    Ok(from_report(&report, settings))
}

fn run_smoothing(cfg: &RunConfig) -> Result<Produced, RunError> {
    let h_list = cfg.h_list.clone().unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.025]);
    let extent = cfg.extent.unwrap_or(102.4);
    let time = TimeGrid::new(cfg.t_final.unwrap_or(1.0), cfg.m_steps.unwrap_or(400))?;
    let epsilon = cfg.epsilon.unwrap_or(0.01);
    let mut packet = PacketSpec::resonant();
    if let Some(w) = cfg.packet_sites {
        packet.width_sites = w;
    }
    let report = run_smoothing_experiment(
        &cfg.params,
        &h_list,
        extent,
        SmoothingData::Packet(packet),
        &time,
        epsilon,
    )?;
    let settings = json!({
        "h_list": h_list, "extent": extent, "T": time.t_final(), "m_steps": time.m_steps(),
        "epsilon": epsilon, "packet": packet,
    });
    Ok(from_report(&report, settings))
}

fn run_continuum(cfg: &RunConfig) -> Result<Produced, RunError> {
    let setup = ContinuumSetup {
        h_list: cfg.h_list.clone().unwrap_or_else(|| vec![0.2, 0.1, 0.05]),
        h_ref: cfg.h_ref.unwrap_or(0.0125),
        extent: cfg.extent.unwrap_or(51.2),
        time: TimeGrid::new(cfg.t_final.unwrap_or(1.0), cfg.m_steps.unwrap_or(128))?,
        opts: picard_options(cfg),
        auto_time: cfg.auto_time.unwrap_or(true),
        max_halvings: 4,
    };
    let (spec, amp) = initial(cfg);
    let report = run_continuum_study(&cfg.params, &setup, spec.profile(amp))?;
    let settings = json!({ "setup": setup, "initial": spec, "amplitude": amp });
    Ok(from_report(&report, settings))
}

fn run_ml(cfg: &RunConfig) -> Result<Produced, RunError> {
    let d = MlCheckSetup::default();
    let setup = MlCheckSetup {
        betas: cfg.betas.clone().unwrap_or(d.betas),
        points_per_beta: cfg.points_per_beta.unwrap_or(d.points_per_beta),
        r_max: cfg.r_max.unwrap_or(d.r_max),
        tol: cfg.tol.unwrap_or(d.tol),
        digits: cfg.digits.unwrap_or(d.digits),
        seed: cfg.seed.unwrap_or(d.seed),
        ..d
    };
    let report = run_ml_check(&setup)?;
    Ok(from_report(&report, json!({ "setup": setup })))
}

#[derive(Debug, Serialize)]
struct SolveReport {
    params: fnls_core::solver::ModelParams,
    h: f64,
    n_points: usize,
    t_final: f64,
    m_steps: usize,
    sweeps: usize,
    residuals: Vec<f64>,
    initial_l2: f64,
    final_l2: f64,
    final_hs: f64,
    checks: Vec<Check>,
}

fn solve_csv(traj: &SolutionTrajectory, s: f64) -> String {
    let mut out = String::from("m,t,l2_norm,hs_norm,max_abs\n");
    let nodes = traj.time().nodes();
    for (m, (snap, t)) in traj.snapshots().iter().zip(nodes).enumerate() {
        let max_abs = snap.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        out.push_str(&format!(
            "{},{:e},{:e},{:e},{:e}\n",
            m,
            t,
            norm_lp(snap, 2.0),
            norm_sobolev(snap, s),
            max_abs
        ));
    }
    out
}

fn run_solve(cfg: &RunConfig) -> Result<Produced, RunError> {
    let params = cfg.params;
    let grid = LatticeGrid::new(cfg.h.unwrap_or(0.1), cfg.n_points.unwrap_or(256))?;
    let time = TimeGrid::new(cfg.t_final.unwrap_or(0.5), cfg.m_steps.unwrap_or(64))?;
    let opts = picard_options(cfg);
    let (spec, amp) = initial(cfg);
    let solver = Solver::new(params, &grid, time, SymbolSource::Lattice, opts)?;
    let u0 = prepare_initial(spec.profile(amp), &grid, params.use_filter)?;
    let traj = solver.solve(&u0)?;

    let residuals = traj.residuals().to_vec();
    let last = residuals.last().copied().unwrap_or(0.0);
    let finite = traj
        .snapshots()
        .iter()
        .all(|s| s.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()));
    let checks = vec![
        Check::new(
            "trajectory is finite",
            finite,
            format!("{} snapshots", traj.snapshots().len()),
        ),
        Check::new(
            format!("Picard residual below tol = {:e}", opts.tol),
            last <= opts.tol,
            format!("final residual {last:e} after {} sweeps", residuals.len()),
        ),
    ];
    let report = SolveReport {
        params,
        h: grid.h(),
        n_points: grid.n_points(),
        t_final: time.t_final(),
        m_steps: time.m_steps(),
        sweeps: residuals.len(),
        residuals: residuals.clone(),
        initial_l2: norm_lp(traj.initial(), 2.0),
        final_l2: norm_lp(traj.last(), 2.0),
        final_hs: norm_sobolev(traj.last(), params.s),
        checks: checks.clone(),
    };
    let settings = json!({
        "h": grid.h(), "n_points": grid.n_points(), "T": time.t_final(), "m_steps": time.m_steps(),
        "tol": opts.tol, "k_max": opts.k_max, "initial": spec, "amplitude": amp,
    });
    Ok(Produced {
        report: serde_json::to_value(&report).expect("reports serialize"),
        csv: solve_csv(&traj, params.s),
        checks,
        settings,
        extra_manifest: json!({ "params": params, "residual_history": residuals }),
        binary: Some(("solve_trajectory.bin".into(), encode_trajectory(&traj))),
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    fs::write(path, bytes).map_err(|e| RunError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn file_stem(experiment: Experiment) -> String {
    experiment.name().replace('-', "_")
}

/// Run `experiment` with `cfg` and write its files into `out_dir`.
pub fn run(experiment: Experiment, cfg: &RunConfig, out_dir: &Path, workers: usize) -> Result<RunOutcome, RunError> {
    cfg.check_applicable(experiment)?;
    let start = Instant::now();
    let produced = match experiment {
        Experiment::Symbol => run_symbol(cfg),
        Experiment::Mass => run_mass(cfg),
        Experiment::Smoothing => run_smoothing(cfg),
        Experiment::Continuum => run_continuum(cfg),
        Experiment::MlCheck => run_ml(cfg),
        Experiment::Solve => run_solve(cfg),
    }?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let passed = produced.checks.iter().all(|c| c.passed);

    fs::create_dir_all(out_dir).map_err(|e| RunError::Io {
        path: out_dir.display().to_string(),
        message: e.to_string(),
    })?;
    let stem = file_stem(experiment);
    let mut files = Vec::new();
    let report_path = out_dir.join(format!("{stem}_report.json"));
    let report = json!({ "experiment": experiment, "passed": passed, "report": produced.report });
    write(
        &report_path,
        serde_json::to_string_pretty(&report).expect("json").as_bytes(),
    )?;
    files.push(report_path);
    let csv_path = out_dir.join(format!("{stem}_data.csv"));
    write(&csv_path, produced.csv.as_bytes())?;
    files.push(csv_path);
    if let Some((name, bytes)) = &produced.binary {
        let path = out_dir.join(name);
        write(&path, bytes)?;
        files.push(path);
    }
    let manifest_path = out_dir.join(format!("{stem}_manifest.json"));
    files.push(manifest_path.clone());
    let mut manifest = json!({
        "experiment": experiment,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "settings": produced.settings,
        "workers": workers,
        "wall_time_s": wall_time_s,
        "passed": passed,
        "files": files.iter().map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect::<Vec<_>>(),
    });
    if let (Some(m), Some(extra)) = (manifest.as_object_mut(), produced.extra_manifest.as_object()) {
        m.extend(extra.clone());
    }
    write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).expect("json").as_bytes(),
    )?;

    Ok(RunOutcome {
        experiment,
        passed,
        checks: produced.checks,
        files,
        wall_time_s,
    })
}

/// Write `<name>_error.json` describing a failed run.
pub fn write_error_record(experiment: Experiment, err: &RunError, out_dir: &Path) -> Result<PathBuf, RunError> {
    fs::create_dir_all(out_dir).map_err(|e| RunError::Io {
        path: out_dir.display().to_string(),
        message: e.to_string(),
    })?;
    let path = out_dir.join(format!("{}_error.json", file_stem(experiment)));
    let record = json!({
        "experiment": experiment,
        "error": err.to_string(),
        "exit_code": err.exit_code(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    write(&path, serde_json::to_string_pretty(&record).expect("json").as_bytes())?;
    Ok(path)
}

/// Report text of `--describe`: the admissibility conditions of the
/// configured parameters with their margins.
pub fn describe(cfg: &RunConfig) -> String {
    let p = &cfg.params;
    let mut out = String::from("Well-posedness conditions for the configured model\n");
    out.push_str(&format!(
        "p = {}, sign = {}, s = {}, delta = {}, use_filter = {}\n",
        p.p, p.sign, p.s, p.delta, p.use_filter
    ));
    out.push_str(&p.describe());
    out
}
