//! Run configuration: a single JSON document, parsed strictly.
//!
//! Unknown keys are rejected with the full key path and, where one is close,
//! a suggested spelling. Omitted solver options take their library defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use nehari_core::{Grid, ProblemSpec, QProfile, SolveOptions};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown key `{path}`{}", suggestion.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default())]
    UnknownKey { path: String, suggestion: Option<String> },

    #[error("missing key `{path}`")]
    Missing { path: String },

    #[error("`{path}`: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Validate,
    Solve,
    Sweep,
    Blowup,
    Liouville,
    Oracle,
}

impl Mode {
    const NAMES: [&'static str; 6] = ["validate", "solve", "sweep", "blowup", "liouville", "oracle"];

    fn parse(name: &str) -> Option<Mode> {
        Some(match name {
            "validate" => Mode::Validate,
            "solve" => Mode::Solve,
            "sweep" => Mode::Sweep,
            "blowup" => Mode::Blowup,
            "liouville" => Mode::Liouville,
            "oracle" => Mode::Oracle,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Validate => "validate",
            Mode::Solve => "solve",
            Mode::Sweep => "sweep",
            Mode::Blowup => "blowup",
            Mode::Liouville => "liouville",
            Mode::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exactly one of `R` / `R_list` and one of `h_target` / `m`.
#[derive(Debug, Clone, PartialEq)]
pub enum Radius {
    Single(f64),
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Resolution {
    Spacing(f64),
    Nodes(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub radius: Radius,
    pub resolution: Resolution,
}

impl GridConfig {
    /// Grid for single-radius modes.
    pub fn single(&self) -> Option<Grid> {
        let Radius::Single(r) = self.radius else {
            return None;
        };
        match self.resolution {
            Resolution::Spacing(h) => Grid::with_spacing(r, h).ok(),
            Resolution::Nodes(m) => Grid::new(r, m).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleConfig {
    pub q0: f64,
    pub p: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub s_count: usize,
    pub t_max: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub problem: Option<ProblemSpec>,
    pub grid: Option<GridConfig>,
    pub solver: SolveOptions,
    pub liouville: Option<LiouvilleConfig>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// SHA-256 of the raw config bytes, hex encoded.
    pub config_hash: String,
}

const ROOT_KEYS: &[&str] = &["problem", "grid", "solver", "mode", "output_dir", "seed", "liouville"];
const PROBLEM_KEYS: &[&str] = &["n_components", "p", "lambdas", "q"];
const Q_KEYS: &[&str] = &["kind", "params"];
const GRID_KEYS: &[&str] = &["R", "R_list", "h_target", "m"];
const SOLVER_KEYS: &[&str] = &[
    "max_iters",
    "tol_grad",
    "enforce_symmetry",
    "newton_refine",
    "trivial_threshold",
];
const LIOUVILLE_KEYS: &[&str] = &["q0", "p", "s_min", "s_max", "s_count", "T_max", "dt"];

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], prefix: &str) -> Result<(), ConfigError> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            let suggestion = allowed
                .iter()
                .map(|a| (strsim::levenshtein(key, a), *a))
                .filter(|(d, a)| *d <= 2.max(a.len() / 3))
                .min()
                .map(|(_, a)| a.to_string());
            return Err(ConfigError::UnknownKey {
                path: join(prefix, key),
                suggestion,
            });
        }
    }
    Ok(())
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: String,
}

impl<'a> Obj<'a> {
    fn from_value(value: &'a Value, path: &str, allowed: &[&str]) -> Result<Obj<'a>, ConfigError> {
        let map = value.as_object().ok_or_else(|| invalid(path, "expected an object"))?;
        check_keys(map, allowed, path)?;
        Ok(Obj {
            map,
            path: path.to_string(),
        })
    }

    fn key(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key)
    }

    fn require(&self, key: &str) -> Result<&'a Value, ConfigError> {
        self.get(key)
            .ok_or_else(|| ConfigError::Missing { path: self.key(key) })
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key)
            .map(|v| v.as_f64().ok_or_else(|| invalid(&self.key(key), "expected a number")))
            .transpose()
    }

    fn req_number(&self, key: &str) -> Result<f64, ConfigError> {
        self.number(key)?
            .ok_or_else(|| ConfigError::Missing { path: self.key(key) })
    }

    fn integer(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.as_u64()
                    .ok_or_else(|| invalid(&self.key(key), "expected a non-negative integer"))
            })
            .transpose()
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.as_bool()
                    .ok_or_else(|| invalid(&self.key(key), "expected true or false"))
            })
            .transpose()
    }

    fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        let arr = v
            .as_array()
            .ok_or_else(|| invalid(&self.key(key), "expected an array of numbers"))?;
        arr.iter()
            .enumerate()
            .map(|(i, x)| {
                x.as_f64()
                    .ok_or_else(|| invalid(&format!("{}[{i}]", self.key(key)), "expected a number"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

fn positive(path: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(path, format!("must be positive (got {v})")))
    }
}

fn parse_q(value: &Value, path: &str) -> Result<QProfile, ConfigError> {
    let q = Obj::from_value(value, path, Q_KEYS)?;
    let kind = q
        .require("kind")?
        .as_str()
        .ok_or_else(|| invalid(&q.key("kind"), "expected a string"))?;
    let params_path = q.key("params");
    let params_keys: &[&str] = match kind {
        "constant" => &["value"],
        "gaussian" => &["amplitude", "width"],
        "rational" => &["amplitude", "scale"],
        "tabulated" => &["t", "values"],
        other => {
            return Err(invalid(
                &q.key("kind"),
                format!("unknown kind `{other}` (expected constant, gaussian, rational or tabulated)"),
            ))
        }
    };
    let params = Obj::from_value(q.require("params")?, &params_path, params_keys)?;
    Ok(match kind {
        "constant" => QProfile::Constant(params.req_number("value")?),
        "gaussian" => QProfile::Gaussian {
            amplitude: params.req_number("amplitude")?,
            width: positive(&params.key("width"), params.req_number("width")?)?,
        },
        "rational" => QProfile::Rational {
            amplitude: params.req_number("amplitude")?,
            scale: positive(&params.key("scale"), params.req_number("scale")?)?,
        },
        _ => {
            let t = params
                .numbers("t")?
                .ok_or_else(|| ConfigError::Missing { path: params.key("t") })?;
            let values = params.numbers("values")?.ok_or_else(|| ConfigError::Missing {
                path: params.key("values"),
            })?;
            QProfile::tabulated(t, values).map_err(|e| invalid(&params_path, e.to_string()))?
        }
    })
}

fn parse_problem(value: &Value) -> Result<ProblemSpec, ConfigError> {
    let obj = Obj::from_value(value, "problem", PROBLEM_KEYS)?;
    let n = obj.integer("n_components")?.ok_or_else(|| ConfigError::Missing {
        path: obj.key("n_components"),
    })? as usize;
    if n == 0 {
        return Err(invalid(&obj.key("n_components"), "must be at least 1"));
    }
    let p = obj.req_number("p")?;
    if !(p > 1.0) {
        return Err(invalid(&obj.key("p"), format!("p must exceed 1 (got {p})")));
    }
    let lambdas = obj.numbers("lambdas")?.ok_or_else(|| ConfigError::Missing {
        path: obj.key("lambdas"),
    })?;
    if lambdas.len() != n {
        return Err(invalid(
            &obj.key("lambdas"),
            format!("expected {n} entries to match n_components, found {}", lambdas.len()),
        ));
    }
    for (i, &l) in lambdas.iter().enumerate() {
        if !(l > 0.0) {
            return Err(invalid(
                &format!("problem.lambdas[{i}]"),
                format!("lambda must be positive (got {l})"),
            ));
        }
    }
    let q_profile = parse_q(obj.require("q")?, "problem.q")?;
    Ok(ProblemSpec {
        n_components: n,
        p,
        lambdas,
        q_profile,
    })
}

fn parse_grid(value: &Value) -> Result<GridConfig, ConfigError> {
    let obj = Obj::from_value(value, "grid", GRID_KEYS)?;
    let radius = match (obj.number("R")?, obj.numbers("R_list")?) {
        (Some(r), None) => Radius::Single(positive(&obj.key("R"), r)?),
        (None, Some(list)) => {
            if list.is_empty() {
                return Err(invalid(&obj.key("R_list"), "must not be empty"));
            }
            for (i, &r) in list.iter().enumerate() {
                positive(&format!("grid.R_list[{i}]"), r)?;
            }
            if list.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid(&obj.key("R_list"), "radii must be strictly increasing"));
            }
            Radius::List(list)
        }
        (Some(_), Some(_)) => return Err(invalid("grid", "give exactly one of `R` and `R_list`")),
        (None, None) => return Err(ConfigError::Missing { path: obj.key("R") }),
    };
    let resolution = match (obj.number("h_target")?, obj.integer("m")?) {
        (Some(h), None) => Resolution::Spacing(positive(&obj.key("h_target"), h)?),
        (None, Some(m)) => {
            let m = m as usize;
            if m < 3 || m.is_multiple_of(2) {
                return Err(invalid(
                    &obj.key("m"),
                    format!("node count must be odd and at least 3 (got {m})"),
                ));
            }
            Resolution::Nodes(m)
        }
        (Some(_), Some(_)) => return Err(invalid("grid", "give exactly one of `h_target` and `m`")),
        (None, None) => {
            return Err(ConfigError::Missing {
                path: obj.key("h_target"),
            })
        }
    };
    Ok(GridConfig { radius, resolution })
}

fn parse_solver(value: &Value) -> Result<SolveOptions, ConfigError> {
    let obj = Obj::from_value(value, "solver", SOLVER_KEYS)?;
    let mut opts = SolveOptions::default();
    if let Some(v) = obj.integer("max_iters")? {
        opts.max_iters = v as usize;
    }
    if let Some(v) = obj.number("tol_grad")? {
        opts.tol_grad = v;
    }
    if let Some(v) = obj.boolean("enforce_symmetry")? {
        opts.enforce_symmetry = v;
    }
    if let Some(v) = obj.boolean("newton_refine")? {
        opts.newton_refine = v;
    }
    if let Some(v) = obj.number("trivial_threshold")? {
        opts.trivial_threshold = v;
    }
    opts.check().map_err(|m| invalid("solver", m))?;
    Ok(opts)
}

fn parse_liouville(value: &Value) -> Result<LiouvilleConfig, ConfigError> {
    let obj = Obj::from_value(value, "liouville", LIOUVILLE_KEYS)?;
    let p = obj.req_number("p")?;
    if !(p > 1.0) {
        return Err(invalid(&obj.key("p"), format!("p must exceed 1 (got {p})")));
    }
    let q0 = obj.req_number("q0")?;
    if !(q0 > 0.0) {
        return Err(invalid(&obj.key("q0"), format!("Q(0) must be positive (got {q0})")));
    }
    let s_min = obj.req_number("s_min")?;
    let s_max = obj.req_number("s_max")?;
    let s_count = obj.integer("s_count")?.ok_or_else(|| ConfigError::Missing {
        path: obj.key("s_count"),
    })? as usize;
    if s_count == 0 {
        return Err(invalid(&obj.key("s_count"), "must be at least 1"));
    }
    if s_count > 1 && !(s_max > s_min) {
        return Err(invalid(&obj.key("s_max"), "must exceed s_min"));
    }
    Ok(LiouvilleConfig {
        q0,
        p,
        s_min,
        s_max,
        s_count,
        t_max: positive(&obj.key("T_max"), obj.req_number("T_max")?)?,
        dt: positive(&obj.key("dt"), obj.req_number("dt")?)?,
    })
}

/// Parses a config from JSON text.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = Obj::from_value(&value, "", ROOT_KEYS)?;
    let mode_name = root
        .require("mode")?
        .as_str()
        .ok_or_else(|| invalid("mode", "expected a string"))?;
    let mode = Mode::parse(mode_name).ok_or_else(|| {
        invalid(
            "mode",
            format!(
                "unknown mode `{mode_name}` (expected one of {})",
                Mode::NAMES.join(", ")
            ),
        )
    })?;

    let problem = root.get("problem").map(parse_problem).transpose()?;
    let grid = root.get("grid").map(parse_grid).transpose()?;
    let solver = root.get("solver").map(parse_solver).transpose()?.unwrap_or_default();
    let liouville = root.get("liouville").map(parse_liouville).transpose()?;
    let output_dir = match root.get("output_dir") {
        Some(v) => PathBuf::from(v.as_str().ok_or_else(|| invalid("output_dir", "expected a string"))?),
        None => PathBuf::from("output"),
    };
    let seed = root.integer("seed")?.unwrap_or(0);

    let config = RunConfig {
        mode,
        problem,
        grid,
        solver,
        liouville,
        output_dir,
        seed,
        config_hash: format!("{:x}", Sha256::digest(text.as_bytes())),
    };
    check_mode_requirements(&config)?;
    Ok(config)
}

fn check_mode_requirements(config: &RunConfig) -> Result<(), ConfigError> {
    let missing = |path: &str| ConfigError::Missing { path: path.into() };
    match config.mode {
        Mode::Liouville => {
            config.liouville.as_ref().ok_or_else(|| missing("liouville"))?;
        }
        Mode::Validate => {
            config.problem.as_ref().ok_or_else(|| missing("problem"))?;
        }
        Mode::Solve | Mode::Blowup | Mode::Oracle => {
            config.problem.as_ref().ok_or_else(|| missing("problem"))?;
            let grid = config.grid.as_ref().ok_or_else(|| missing("grid"))?;
            if !matches!(grid.radius, Radius::Single(_)) {
                return Err(invalid(
                    "grid.R_list",
                    format!("mode `{}` takes a single radius `R`", config.mode),
                ));
            }
        }
        Mode::Sweep => {
            config.problem.as_ref().ok_or_else(|| missing("problem"))?;
            let grid = config.grid.as_ref().ok_or_else(|| missing("grid"))?;
            if !matches!(grid.radius, Radius::List(_)) {
                return Err(ConfigError::Missing {
                    path: "grid.R_list".into(),
                });
            }
            if !matches!(grid.resolution, Resolution::Spacing(_)) {
                return Err(invalid("grid.m", "sweeps keep the spacing fixed; give `h_target`"));
            }
        }
    }
    Ok(())
}

/// Reads and parses a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "mode": "solve",
        "problem": {"n_components": 1, "p": 3, "lambdas": [1], "q": {"kind": "constant", "params": {"value": 1}}},
        "grid": {"R": 20, "h_target": 0.02}
    }"#;

    #[test]
    fn minimal_solve_config() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.mode, Mode::Solve);
        assert_eq!(c.solver, SolveOptions::default());
        assert_eq!(c.seed, 0);
        let spec = c.problem.unwrap();
        assert_eq!(spec.lambdas, vec![1.0]);
        assert_eq!(spec.q_profile, QProfile::Constant(1.0));
        assert_eq!(c.grid.unwrap().single().unwrap().len(), 2001);
        assert_eq!(c.config_hash.len(), 64);
    }

    #[test]
    fn p_of_one_is_rejected() {
        let text = MINIMAL.replace(r#""p": 3"#, r#""p": 1"#);
        let err = parse_config_str(&text).unwrap_err();
        assert!(err.to_string().contains("p must exceed 1"), "{err}");
        assert!(err.to_string().contains("problem.p"));
    }

    #[test]
    fn misspelled_key_gets_a_suggestion() {
        let text = MINIMAL.replace("lambdas", "lamda");
        match parse_config_str(&text).unwrap_err() {
            ConfigError::UnknownKey { path, suggestion } => {
                assert_eq!(path, "problem.lamda");
                assert_eq!(suggestion.as_deref(), Some("lambdas"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn distinct_diagnostics() {
        assert!(matches!(parse_config_str("{ nope"), Err(ConfigError::Syntax { .. })));
        assert!(matches!(
            parse_config(Path::new("/nonexistent/config.json")),
            Err(ConfigError::Io { .. })
        ));
        let no_mode = MINIMAL.replace(r#""mode": "solve","#, "");
        assert!(matches!(parse_config_str(&no_mode), Err(ConfigError::Missing { path }) if path == "mode"));
        let bad_m = MINIMAL.replace(r#""h_target": 0.02"#, r#""m": 2000"#);
        assert!(matches!(parse_config_str(&bad_m), Err(ConfigError::Invalid { path, .. }) if path == "grid.m"));
        let unknown_root = MINIMAL.replace(r#""mode""#, r#""modes": 1, "mode""#);
        assert!(matches!(
            parse_config_str(&unknown_root),
            Err(ConfigError::UnknownKey { suggestion: Some(s), .. }) if s == "mode"
        ));
    }

    #[test]
    fn sweep_requires_increasing_radii() {
        let text = MINIMAL
            .replace(r#""mode": "solve""#, r#""mode": "sweep""#)
            .replace(r#""R": 20"#, r#""R_list": [10, 5]"#);
        let err = parse_config_str(&text).unwrap_err();
        assert!(err.to_string().contains("strictly increasing"), "{err}");
        let single = MINIMAL.replace(r#""mode": "solve""#, r#""mode": "sweep""#);
        assert!(matches!(parse_config_str(&single), Err(ConfigError::Missing { path }) if path == "grid.R_list"));
    }

    #[test]
    fn liouville_block() {
        let text = r#"{"mode": "liouville", "liouville": {"q0": 1, "p": 3, "s_min": -2, "s_max": 2, "s_count": 41, "T_max": 50, "dt": 0.001}}"#;
        let c = parse_config_str(text).unwrap();
        assert_eq!(c.liouville.unwrap().s_count, 41);
        let missing = r#"{"mode": "liouville"}"#;
        assert!(matches!(parse_config_str(missing), Err(ConfigError::Missing { path }) if path == "liouville"));
        let zero_q = text.replace(r#""q0": 1"#, r#""q0": 0"#);
        assert!(parse_config_str(&zero_q)
            .unwrap_err()
            .to_string()
            .contains("Q(0) must be positive"));
    }

    #[test]
    fn solver_overrides_and_q_kinds() {
        let text = MINIMAL.replace(
            r#""grid""#,
            r#""solver": {"max_iters": 50, "enforce_symmetry": false}, "grid""#,
        );
        let c = parse_config_str(&text).unwrap();
        assert_eq!(c.solver.max_iters, 50);
        assert!(!c.solver.enforce_symmetry);
        assert_eq!(c.solver.tol_grad, 1e-8);

        let gauss = MINIMAL.replace(
            r#"{"kind": "constant", "params": {"value": 1}}"#,
            r#"{"kind": "gaussian", "params": {"amplitude": 2, "width": 3}}"#,
        );
        assert_eq!(
            parse_config_str(&gauss).unwrap().problem.unwrap().q_profile,
            QProfile::Gaussian {
                amplitude: 2.0,
                width: 3.0
            }
        );
        let wrong_param = MINIMAL.replace(r#"{"value": 1}"#, r#"{"valeu": 1}"#);
        assert!(matches!(
            parse_config_str(&wrong_param),
            Err(ConfigError::UnknownKey { path, .. }) if path == "problem.q.params.valeu"
        ));
        let table = MINIMAL.replace(
            r#"{"kind": "constant", "params": {"value": 1}}"#,
            r#"{"kind": "tabulated", "params": {"t": [-1, 0, 1], "values": [1, 2, 1]}}"#,
        );
        assert!(parse_config_str(&table).is_ok());
    }
}
