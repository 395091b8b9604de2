//! Line-oriented run configuration: `key = value` per line, `#` starts a
//! comment. Unknown and repeated keys are rejected; parse errors carry the
//! line number; model parameters are validated while parsing.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fnls_core::solver::ModelParams;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Experiment selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Symbol,
    Mass,
    Smoothing,
    Continuum,
    MlCheck,
    Solve,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Symbol,
        Experiment::Mass,
        Experiment::Smoothing,
        Experiment::Continuum,
        Experiment::MlCheck,
        Experiment::Solve,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Symbol => "symbol",
            Experiment::Mass => "mass",
            Experiment::Smoothing => "smoothing",
            Experiment::Continuum => "continuum",
            Experiment::MlCheck => "ml-check",
            Experiment::Solve => "solve",
        }
    }

    /// Keys that the experiment reads (besides the model parameters and the
    /// generic `experiment`, `workers`, `out`).
    pub fn keys(&self) -> &'static [&'static str] {
        match self {
            Experiment::Symbol => &["alpha_list", "h"],
            Experiment::Mass => &["h_list", "extent", "T", "m_steps", "initial", "amplitude", "tolerance"],
            Experiment::Smoothing => &["h_list", "extent", "T", "m_steps", "epsilon", "packet_sites"],
            Experiment::Continuum => &[
                "h_list",
                "h_ref",
                "extent",
                "T",
                "m_steps",
                "tol",
                "k_max",
                "initial",
                "amplitude",
                "auto_time",
            ],
            Experiment::MlCheck => &["betas", "points_per_beta", "r_max", "tol", "digits", "seed"],
            Experiment::Solve => &["h", "n_points", "T", "m_steps", "tol", "k_max", "initial", "amplitude"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL.iter().copied().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
            format!("unknown experiment '{s}' (expected one of {})", names.join(", "))
        })
    }
}

/// Continuous initial datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpec {
    /// `e^{−x²}`
    Gaussian,
    /// `exp(−((x − center)/width)²/2) e^{i freq x}`
    Packet { center: f64, width: f64, freq: f64 },
}

impl InitialSpec {
    /// The datum scaled by `amplitude`.
    pub fn profile(&self, amplitude: f64) -> impl Fn(f64) -> Complex64 + Sync + Copy {
        let spec = *self;
        move |x: f64| match spec {
            InitialSpec::Gaussian => Complex64::new(amplitude * (-x * x).exp(), 0.0),
            InitialSpec::Packet { center, width, freq } => {
                let y = (x - center) / width;
                Complex64::from_polar(amplitude * (-0.5 * y * y).exp(), freq * x)
            }
        }
    }
}

impl FromStr for InitialSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "gaussian" {
            return Ok(InitialSpec::Gaussian);
        }
        let inner = s
            .strip_prefix("packet(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format!("expected 'gaussian' or 'packet(center, width, freq)', got '{s}'"))?;
        let args = parse_list(inner)?;
        if args.len() != 3 {
            return Err(format!(
                "packet takes 3 arguments (center, width, freq), got {}",
                args.len()
            ));
        }
        if !(args[1] > 0.0) {
            return Err(format!("packet width > 0 fails: width = {}", args[1]));
        }
        Ok(InitialSpec::Packet {
            center: args[0],
            width: args[1],
            freq: args[2],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Parsed and validated configuration. Experiment-specific values are
/// optional here; the runner supplies defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    pub params: ModelParams,
    pub alpha_list: Option<Vec<f64>>,
    pub h: Option<f64>,
    pub n_points: Option<usize>,
    pub extent: Option<f64>,
    pub h_list: Option<Vec<f64>>,
    pub h_ref: Option<f64>,
    pub t_final: Option<f64>,
    pub m_steps: Option<usize>,
    pub tol: Option<f64>,
    pub k_max: Option<usize>,
    pub initial: Option<InitialSpec>,
    pub amplitude: Option<f64>,
    pub epsilon: Option<f64>,
    pub packet_sites: Option<f64>,
    pub auto_time: Option<bool>,
    pub tolerance: Option<f64>,
    pub betas: Option<Vec<f64>>,
    pub points_per_beta: Option<usize>,
    pub r_max: Option<f64>,
    pub digits: Option<u32>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    /// line of every key that was set
    pub lines: BTreeMap<String, usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: None,
            params: ModelParams::new(1.5, 0.85, 3, 1.0),
            alpha_list: None,
            h: None,
            n_points: None,
            extent: None,
            h_list: None,
            h_ref: None,
            t_final: None,
            m_steps: None,
            tol: None,
            k_max: None,
            initial: None,
            amplitude: None,
            epsilon: None,
            packet_sites: None,
            auto_time: None,
            tolerance: None,
            betas: None,
            points_per_beta: None,
            r_max: None,
            digits: None,
            seed: None,
            workers: None,
            out: None,
            lines: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    /// Reject keys the experiment does not read, naming the offending line.
    pub fn check_applicable(&self, experiment: Experiment) -> Result<(), ConfigError> {
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(ConfigError::Invalid {
                    line: self.lines["experiment"],
                    message: format!("configuration is for '{e}', but '{experiment}' was requested"),
                });
            }
        }
        let generic = MODEL_KEYS.iter().chain(&["experiment", "workers", "out"]);
        let allowed: Vec<&str> = generic.copied().chain(experiment.keys().iter().copied()).collect();
        for (key, &line) in &self.lines {
            if !allowed.contains(&key.as_str()) {
                return Err(ConfigError::Invalid {
                    line,
                    message: format!("key '{key}' is not used by the '{experiment}' experiment"),
                });
            }
        }
        Ok(())
    }
}

const MODEL_KEYS: [&str; 7] = ["alpha", "beta", "p", "sign", "s", "delta", "use_filter"];

const ALL_KEYS: [&str; 31] = [
    "experiment",
    "alpha",
    "beta",
    "p",
    "sign",
    "s",
    "delta",
    "use_filter",
    "alpha_list",
    "h",
    "n_points",
    "extent",
    "h_list",
    "h_ref",
    "T",
    "m_steps",
    "tol",
    "k_max",
    "initial",
    "amplitude",
    "epsilon",
    "packet_sites",
    "auto_time",
    "tolerance",
    "betas",
    "points_per_beta",
    "r_max",
    "digits",
    "seed",
    "workers",
    "out",
];

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("expected a number, got '{v}'"))?;
    if !x.is_finite() {
        return Err(format!("expected a finite number, got '{v}'"));
    }
    Ok(x)
}

fn parse_positive(v: &str) -> Result<f64, String> {
    let x = parse_f64(v)?;
    if !(x > 0.0) {
        return Err(format!("expected a positive number, got '{v}'"));
    }
    Ok(x)
}

fn parse_int<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse()
        .map_err(|_| format!("expected a non-negative integer, got '{v}'"))
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got '{v}'")),
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    let v = v.trim();
    let v = v.strip_prefix('[').and_then(|r| r.strip_suffix(']')).unwrap_or(v);
    let items: Vec<f64> = v.split(',').map(|x| parse_f64(x.trim())).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("expected a comma-separated list".into());
    }
    Ok(items)
}

fn parse_positive_list(v: &str) -> Result<Vec<f64>, String> {
    let items = parse_list(v)?;
    if let Some(x) = items.iter().find(|x| !(**x > 0.0)) {
        return Err(format!("list entries must be positive, got {x}"));
    }
    Ok(items)
}

/// Parse configuration text.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: Vec<(String, String, usize)> = Vec::new();
    let mut lines = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected 'key = value', got '{content}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: "missing key before '='".into(),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: format!("missing value for '{key}'"),
            });
        }
        if !ALL_KEYS.contains(&key) {
            return Err(ConfigError::Parse {
                line,
                message: format!("unknown key '{key}'"),
            });
        }
        if let Some(first) = lines.insert(key.to_string(), line) {
            return Err(ConfigError::Parse {
                line,
                message: format!("duplicate key '{key}' (first set on line {first})"),
            });
        }
        entries.push((key.to_string(), value.to_string(), line));
    }
    if entries.is_empty() {
        return Err(ConfigError::Parse {
            line: text.lines().count().max(1),
            message: "configuration is empty".into(),
        });
    }

    let mut cfg = RunConfig::default();
    let (mut alpha, mut beta, mut p, mut sign) = (1.5, 0.85, 3u32, 1.0);
    let (mut s, mut delta, mut use_filter) = (None, None, true);
    for (key, value, line) in &entries {
        let v = value.as_str();
        let wrap = |r: Result<(), String>| r.map_err(|message| ConfigError::Parse { line: *line, message });
        wrap((|| {
            match key.as_str() {
                "experiment" => cfg.experiment = Some(v.parse()?),
                "alpha" => alpha = parse_f64(v)?,
                "beta" => beta = parse_f64(v)?,
                "p" => p = parse_int(v)?,
                "sign" => sign = parse_f64(v)?,
                "s" => s = Some(parse_f64(v)?),
                "delta" => delta = Some(parse_f64(v)?),
                "use_filter" => use_filter = parse_bool(v)?,
                "alpha_list" => cfg.alpha_list = Some(parse_list(v)?),
                "h" => cfg.h = Some(parse_positive(v)?),
                "n_points" => cfg.n_points = Some(parse_int(v)?),
                "extent" => cfg.extent = Some(parse_positive(v)?),
                "h_list" => cfg.h_list = Some(parse_positive_list(v)?),
                "h_ref" => cfg.h_ref = Some(parse_positive(v)?),
                "T" => cfg.t_final = Some(parse_positive(v)?),
                "m_steps" => cfg.m_steps = Some(parse_int(v)?),
                "tol" => cfg.tol = Some(parse_positive(v)?),
                "k_max" => cfg.k_max = Some(parse_int(v)?),
                "initial" => cfg.initial = Some(v.parse()?),
                "amplitude" => cfg.amplitude = Some(parse_f64(v)?),
                "epsilon" => cfg.epsilon = Some(parse_positive(v)?),
                "packet_sites" => cfg.packet_sites = Some(parse_positive(v)?),
                "auto_time" => cfg.auto_time = Some(parse_bool(v)?),
                "tolerance" => cfg.tolerance = Some(parse_positive(v)?),
                "betas" => cfg.betas = Some(parse_positive_list(v)?),
                "points_per_beta" => cfg.points_per_beta = Some(parse_int(v)?),
                "r_max" => cfg.r_max = Some(parse_positive(v)?),
                "digits" => cfg.digits = Some(parse_int(v)?),
                "seed" => cfg.seed = Some(parse_int(v)?),
                "workers" => {
                    let w: usize = parse_int(v)?;
                    if w == 0 {
                        return Err("workers must be at least 1".into());
                    }
                    cfg.workers = Some(w)
                }
                "out" => cfg.out = Some(PathBuf::from(v)),
                _ => unreachable!("key list checked above"),
            }
            Ok(())
        })())?;
    }

    let mut params = ModelParams::new(alpha, beta, p, sign);
    if let Some(s) = s {
        params.s = s;
        // keep δ at its lower end unless given explicitly
        params.delta = s + params.sigma() - alpha;
    }
    if let Some(d) = delta {
        params.delta = d;
    }
    params.use_filter = use_filter;
    params.validate().map_err(|e| match e {
        fnls_core::solver::SolverError::InvalidParams(m) => ConfigError::Params(m),
        other => ConfigError::Params(other.to_string()),
    })?;
    cfg.params = params;
    cfg.lines = lines;
    Ok(cfg)
}

/// Read and parse a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "alpha = 1.5\nbeta = 0.85\np = 3\nsign = 1\n";

    #[test]
    fn minimal_file() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        assert_eq!(cfg.params.alpha, 1.5);
        assert_eq!(cfg.params.p, 3);
        assert!(cfg.params.use_filter);
        assert_eq!(cfg.lines["beta"], 2);
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = parse_config_str("# header\n\nalpha = 1.6   # trailing\n  h_list = 0.2, 0.1,0.05\n").unwrap();
        assert_eq!(cfg.params.alpha, 1.6);
        assert_eq!(cfg.h_list, Some(vec![0.2, 0.1, 0.05]));
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        assert!(matches!(parse_config_str(""), Err(ConfigError::Parse { .. })));
        assert!(matches!(
            parse_config_str("# only a comment\n\n"),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_config_str("alpha = 1.5\nbogus = 3\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Parse {
                line: 2,
                message: "unknown key 'bogus'".into()
            }
        );
        let err = parse_config_str("alpha = 1.5\n\nbeta 0.8\n").unwrap_err();
        assert!(err.to_string().starts_with("line 3:"), "{err}");
        let err = parse_config_str("alpha = 1.5\nalpha = 1.6\n").unwrap_err();
        assert!(
            err.to_string().contains("duplicate key 'alpha' (first set on line 1)"),
            "{err}"
        );
        let err = parse_config_str("T = -1\n").unwrap_err();
        assert!(err.to_string().starts_with("line 1:"), "{err}");
        let err = parse_config_str("alpha = \n").unwrap_err();
        assert!(err.to_string().contains("missing value"), "{err}");
    }

    #[test]
    fn dispersion_condition_is_quoted() {
        let err = parse_config_str("alpha = 1.2\nbeta = 0.6\n").unwrap_err();
        assert!(
            err.to_string().contains("alpha > (sigma+1)/2 fails: 1.2 ≤ 1.5"),
            "{err}"
        );
    }

    #[test]
    fn every_parameter_condition_is_rejected() {
        let cases = [
            ("alpha = 2.5", "1 < alpha < 2"),
            ("beta = 0.4", "1/2 < beta <= 1"),
            ("p = 4", "p odd"),
            ("sign = 2", "sign in"),
            ("s = 0.1", "s >= 1/2 - 1/(2(p-1))"),
            ("delta = 0.1", "delta >= s+sigma-alpha"),
            ("delta = 0.9", "delta < sigma/2"),
            ("beta = 0.74", "alpha > (sigma+1)/2"),
        ];
        for (line, needle) in cases {
            let err = parse_config_str(line).unwrap_err().to_string();
            assert!(err.contains(needle), "{line}: {err}");
        }
    }

    #[test]
    fn initial_data_forms() {
        assert_eq!("gaussian".parse::<InitialSpec>().unwrap(), InitialSpec::Gaussian);
        assert_eq!(
            "packet(1, 2.5, -3)".parse::<InitialSpec>().unwrap(),
            InitialSpec::Packet {
                center: 1.0,
                width: 2.5,
                freq: -3.0
            }
        );
        assert!("packet(1, 0, 3)".parse::<InitialSpec>().is_err());
        assert!("packet(1, 2)".parse::<InitialSpec>().is_err());
        assert!("square".parse::<InitialSpec>().is_err());
        let f = InitialSpec::Packet {
            center: 0.0,
            width: 1.0,
            freq: 2.0,
        }
        .profile(2.0);
        assert!((f(0.0) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn applicability() {
        let cfg = parse_config_str("alpha = 1.5\nepsilon = 0.02\n").unwrap();
        assert!(cfg.check_applicable(Experiment::Smoothing).is_ok());
        let err = cfg.check_applicable(Experiment::Solve).unwrap_err();
        assert_eq!(
            err.to_string(),
            "line 2: key 'epsilon' is not used by the 'solve' experiment"
        );
        let cfg = parse_config_str("experiment = mass\n").unwrap();
        assert!(cfg.check_applicable(Experiment::Mass).is_ok());
        assert!(cfg.check_applicable(Experiment::Symbol).is_err());
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("plot".parse::<Experiment>().is_err());
    }
}
