//! JSON experiment configuration: schema checks, defaults, validation and
//! `key=value` overrides.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::simulate::{
    GaussianFunctionalSpec, Innovation, LinearSpec, MarkovSpec, Nonlinearity, ProcessSpec,
    SLOW_DECAY_DEFAULT_TRUNCATION,
};

pub const MIN_REPLICATES: usize = 100;
pub const MIN_LENGTH: usize = 16;
pub const DEFAULT_N: usize = 4096;
pub const DEFAULT_REPLICATES: usize = 2000;
pub const DEFAULT_GRID: usize = 128;
pub const DEFAULT_PILOT_FACTOR: usize = 10;
pub const DEFAULT_LADDER: [usize; 7] = [64, 128, 256, 512, 1024, 2048, 4096];

/// Distance (mod 2 pi) from 0 or pi below which a frequency is rejected.
pub const EXCLUDED_FREQUENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    FixedFreqClt,
    CrossFreq,
    Annealed,
    PeriodogramChi2,
    InvarianceIdentity,
    VarianceConvergence,
    RegularityDiag,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::FixedFreqClt,
        ExperimentKind::CrossFreq,
        ExperimentKind::Annealed,
        ExperimentKind::PeriodogramChi2,
        ExperimentKind::InvarianceIdentity,
        ExperimentKind::VarianceConvergence,
        ExperimentKind::RegularityDiag,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::FixedFreqClt => "fixed_freq_clt",
            ExperimentKind::CrossFreq => "cross_freq",
            ExperimentKind::Annealed => "annealed",
            ExperimentKind::PeriodogramChi2 => "periodogram_chi2",
            ExperimentKind::InvarianceIdentity => "invariance_identity",
            ExperimentKind::VarianceConvergence => "variance_convergence",
            ExperimentKind::RegularityDiag => "regularity_diag",
        }
    }

    fn needs_thetas(self) -> usize {
        match self {
            ExperimentKind::CrossFreq => 2,
            ExperimentKind::Annealed | ExperimentKind::InvarianceIdentity => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown experiment kind {s:?}")))
    }
}

/// Named, overridable tolerances with their defaults.
pub const TOLERANCE_DEFAULTS: [(&str, f64); 11] = [
    ("cesaro_gap", 1e-3),
    ("corr_sigmas", 3.0),
    ("decay_ratio", 0.25),
    ("invariance_tol", 0.10),
    ("ks_crit", crate::stats::KS_CRIT_1),
    ("ks_quadrature_allowance", 1e-3),
    ("mean_sigmas", 3.0),
    ("periodogram_mean_sigmas", 6.0),
    ("var_rel", 0.05),
    ("variance_gap_abs", 0.01),
    ("variance_se_sigmas", 3.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Self(
            TOLERANCE_DEFAULTS
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        )
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        *self
            .0
            .get(name)
            .unwrap_or_else(|| panic!("unknown tolerance {name}"))
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match self.0.get_mut(name) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(Error::config(format!("unknown tolerance {name:?}"))),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Declarative process description as written in a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessConfig {
    /// `"iid_gauss"`, `"ma1"`, `"slow_decay"` or `"two_state(p)"`.
    Preset(String),
    Linear {
        coeffs: Vec<f64>,
        innovation: Innovation,
    },
    NamedLinear {
        named: String,
        truncation: Option<usize>,
        innovation: Innovation,
    },
    Markov {
        transition: Vec<Vec<f64>>,
        f: Vec<f64>,
    },
    GaussianFunctional {
        phi: f64,
        h: Nonlinearity,
    },
}

fn named_linear(name: &str, truncation: Option<usize>) -> Result<LinearSpec> {
    match name {
        "iid_gauss" => Ok(LinearSpec::iid_gauss()),
        "ma1" => Ok(LinearSpec::ma1()),
        "slow_decay" => LinearSpec::slow_decay(truncation.unwrap_or(SLOW_DECAY_DEFAULT_TRUNCATION)),
        other => Err(Error::config(format!("unknown linear preset {other:?}"))),
    }
}

fn parse_two_state(s: &str) -> Option<f64> {
    s.strip_prefix("two_state(")?
        .strip_suffix(')')?
        .trim()
        .parse()
        .ok()
}

impl ProcessConfig {
    pub fn build(&self) -> Result<ProcessSpec> {
        Ok(match self {
            ProcessConfig::Preset(name) => {
                if let Some(p) = parse_two_state(name) {
                    MarkovSpec::two_state(p)?.into()
                } else {
                    named_linear(name, None)
                        .map_err(|_| Error::config(format!("unknown process preset {name:?}")))?
                        .into()
                }
            }
            ProcessConfig::Linear { coeffs, innovation } => {
                LinearSpec::new(coeffs.clone(), *innovation)?.into()
            }
            ProcessConfig::NamedLinear {
                named,
                truncation,
                innovation,
            } => named_linear(named, *truncation)?
                .with_innovation(*innovation)
                .into(),
            ProcessConfig::Markov { transition, f } => {
                MarkovSpec::from_transition(transition.clone(), f.clone())?.into()
            }
            ProcessConfig::GaussianFunctional { phi, h } => {
                GaussianFunctionalSpec::new(*phi, *h)?.into()
            }
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            ProcessConfig::Preset(s) => Value::String(s.clone()),
            ProcessConfig::Linear { coeffs, innovation } => {
                json!({"kind": "linear", "coeffs": coeffs, "innovation": innovation})
            }
            ProcessConfig::NamedLinear {
                named,
                truncation,
                innovation,
            } => {
                let mut v = json!({"kind": "linear", "named": named, "innovation": innovation});
                if let Some(t) = truncation {
                    v["truncation"] = json!(t);
                }
                v
            }
            ProcessConfig::Markov { transition, f } => {
                json!({"kind": "markov", "transition": transition, "f": f})
            }
            ProcessConfig::GaussianFunctional { phi, h } => {
                json!({"kind": "gaussian_functional", "phi": phi, "h": h})
            }
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        if let Value::String(s) = v {
            return Ok(ProcessConfig::Preset(s.clone()));
        }
        let obj = v
            .as_object()
            .ok_or_else(|| Error::config("process must be a preset name or an object"))?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::config("process.kind missing"))?;
        let innovation = || -> Result<Innovation> {
            obj.get("innovation")
                .map(|v| field::<Innovation>(v, "process.innovation"))
                .transpose()
                .map(Option::unwrap_or_default)
        };
        match kind {
            "linear" => {
                check_keys(
                    obj,
                    "process",
                    &["kind", "coeffs", "named", "truncation", "innovation"],
                )?;
                match (obj.get("coeffs"), obj.get("named")) {
                    (Some(c), None) => {
                        if obj.contains_key("truncation") {
                            return Err(Error::config(
                                "process.truncation only applies to named presets",
                            ));
                        }
                        Ok(ProcessConfig::Linear {
                            coeffs: field(c, "process.coeffs")?,
                            innovation: innovation()?,
                        })
                    }
                    (None, Some(name)) => Ok(ProcessConfig::NamedLinear {
                        named: field(name, "process.named")?,
                        truncation: obj
                            .get("truncation")
                            .map(|t| field(t, "process.truncation"))
                            .transpose()?,
                        innovation: innovation()?,
                    }),
                    _ => Err(Error::config(
                        "linear process needs exactly one of coeffs or named",
                    )),
                }
            }
            "markov" => {
                check_keys(obj, "process", &["kind", "transition", "f"])?;
                Ok(ProcessConfig::Markov {
                    transition: field(
                        require(obj, "transition", "process")?,
                        "process.transition",
                    )?,
                    f: field(require(obj, "f", "process")?, "process.f")?,
                })
            }
            "gaussian_functional" => {
                check_keys(obj, "process", &["kind", "phi", "h"])?;
                Ok(ProcessConfig::GaussianFunctional {
                    phi: field(require(obj, "phi", "process")?, "process.phi")?,
                    h: field(require(obj, "h", "process")?, "process.h")?,
                })
            }
            other => Err(Error::config(format!("unknown process kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<String>,
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Absent for subcommands that do not run an experiment.
    pub kind: Option<ExperimentKind>,
    pub process: ProcessConfig,
    pub n: usize,
    pub replicates: usize,
    pub thetas: Vec<f64>,
    pub master_seed: u64,
    pub tolerances: Tolerances,
    pub output: OutputPaths,
    /// Lengths for the convergence and regularity experiments.
    pub n_ladder: Vec<usize>,
    /// Frequency grid size for the max-functional identity and `spectrum`.
    pub n_grid: usize,
    /// Pilot replicates per main replicate when `g` has no closed form.
    pub pilot_factor: usize,
}

const TOP_LEVEL_KEYS: [&str; 11] = [
    "kind",
    "master_seed",
    "n",
    "n_grid",
    "n_ladder",
    "output",
    "pilot_factor",
    "process",
    "replicates",
    "thetas",
    "tolerances",
];

fn check_keys(obj: &Map<String, Value>, context: &str, allowed: &[&str]) -> Result<()> {
    let unknown: Vec<&str> = obj
        .keys()
        .map(String::as_str)
        .filter(|k| !allowed.contains(k))
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(Error::config(format!(
            "unknown keys in {context}: {}",
            unknown.join(", ")
        )))
    }
}

fn require<'a>(obj: &'a Map<String, Value>, key: &str, context: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::config(format!("{context}.{key} missing")))
}

fn field<T: for<'de> Deserialize<'de>>(v: &Value, name: &str) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::config(format!("{name}: {e}")))
}

/// Byte offset of a 1-based (line, column) position.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

/// Parses raw bytes into a JSON value, reporting byte offsets on failure.
pub fn parse_json(text: &[u8]) -> Result<Value> {
    let s = std::str::from_utf8(text).map_err(|e| Error::Parse {
        offset: e.valid_up_to(),
        message: "invalid UTF-8".into(),
    })?;
    serde_json::from_str(s).map_err(|e| Error::Parse {
        offset: byte_offset(s, e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Parses and validates a UTF-8 JSON configuration.
pub fn parse_config(text: &[u8]) -> Result<ExperimentConfig> {
    ExperimentConfig::from_json(&parse_json(text)?)
}

/// Sets `key` (dot-separated path) in a JSON object to `raw`, read as JSON
/// when it parses and as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override {assignment:?} is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::config(format!(
                "override key {key:?} has an empty segment"
            )));
        }
        let obj = match node {
            Value::Object(m) => m,
            _ => {
                return Err(Error::config(format!(
                    "override {key:?}: parent is not an object"
                )))
            }
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("split always yields at least one segment")
}

/// `theta` reduced to `[0, 2 pi)`.
pub fn reduce_angle(theta: f64) -> f64 {
    theta.rem_euclid(2.0 * PI)
}

/// Rejects frequencies at 0 or pi (mod 2 pi), where `Im S_n` degenerates.
pub fn check_frequency(theta: f64) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::config(format!("theta={theta} is not finite")));
    }
    let t = reduce_angle(theta);
    if t < EXCLUDED_FREQUENCY_TOL || 2.0 * PI - t < EXCLUDED_FREQUENCY_TOL {
        return Err(Error::config("theta=0 excluded"));
    }
    if (t - PI).abs() < EXCLUDED_FREQUENCY_TOL {
        return Err(Error::config("theta=pi excluded"));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Config for `kind` on `process` with defaults for everything else.
    pub fn new(kind: ExperimentKind, process: ProcessConfig) -> Self {
        Self {
            kind: Some(kind),
            process,
            n: DEFAULT_N,
            replicates: DEFAULT_REPLICATES,
            thetas: Vec::new(),
            master_seed: 1,
            tolerances: Tolerances::default(),
            output: OutputPaths::default(),
            n_ladder: DEFAULT_LADDER.to_vec(),
            n_grid: DEFAULT_GRID,
            pilot_factor: DEFAULT_PILOT_FACTOR,
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::config("configuration must be a JSON object"))?;
        check_keys(obj, "configuration", &TOP_LEVEL_KEYS)?;
        let process = ProcessConfig::from_json(require(obj, "process", "configuration")?)?;
        let kind = obj
            .get("kind")
            .map(|k| {
                k.as_str()
                    .ok_or_else(|| Error::config("kind must be a string"))
                    .and_then(ExperimentKind::from_str)
            })
            .transpose()?;
        let mut cfg = ExperimentConfig::new(ExperimentKind::FixedFreqClt, process);
        cfg.kind = kind;
        if let Some(v) = obj.get("n") {
            cfg.n = field(v, "n")?;
        }
        if let Some(v) = obj.get("replicates") {
            cfg.replicates = field(v, "replicates")?;
        }
        if let Some(v) = obj.get("thetas") {
            cfg.thetas = field(v, "thetas")?;
        }
        if let Some(v) = obj.get("master_seed") {
            cfg.master_seed = field(v, "master_seed")?;
        }
        if let Some(v) = obj.get("n_ladder") {
            cfg.n_ladder = field(v, "n_ladder")?;
        }
        if let Some(v) = obj.get("n_grid") {
            cfg.n_grid = field(v, "n_grid")?;
        }
        if let Some(v) = obj.get("pilot_factor") {
            cfg.pilot_factor = field(v, "pilot_factor")?;
        }
        if let Some(v) = obj.get("output") {
            let out = v
                .as_object()
                .ok_or_else(|| Error::config("output must be an object"))?;
            check_keys(out, "output", &["report", "samples"])?;
            cfg.output = field(v, "output")?;
        }
        if let Some(v) = obj.get("tolerances") {
            let tols = v
                .as_object()
                .ok_or_else(|| Error::config("tolerances must be an object"))?;
            let known: Vec<&str> = TOLERANCE_DEFAULTS.iter().map(|(k, _)| *k).collect();
            check_keys(tols, "tolerances", &known)?;
            for (k, t) in tols {
                cfg.tolerances
                    .set(k, field(t, &format!("tolerances.{k}"))?)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Effective configuration as JSON (keys sorted).
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "process": self.process.to_json(),
            "n": self.n,
            "replicates": self.replicates,
            "thetas": self.thetas,
            "master_seed": self.master_seed,
            "tolerances": self.tolerances.iter().collect::<BTreeMap<_, _>>(),
            "n_ladder": self.n_ladder,
            "n_grid": self.n_grid,
            "pilot_factor": self.pilot_factor,
        });
        if let Some(k) = self.kind {
            v["kind"] = json!(k);
        }
        if self.output != OutputPaths::default() {
            v["output"] = json!(self.output);
        }
        v
    }

    /// Checks every invariant and returns the built process.
    pub fn validate(&self) -> Result<Arc<ProcessSpec>> {
        if self.n < MIN_LENGTH {
            return Err(Error::config(format!(
                "n={} below minimum {MIN_LENGTH}",
                self.n
            )));
        }
        if self.replicates < MIN_REPLICATES {
            return Err(Error::config(format!(
                "replicates={} below minimum {MIN_REPLICATES}",
                self.replicates
            )));
        }
        for &t in &self.thetas {
            check_frequency(t)?;
        }
        if let Some(kind) = self.kind {
            let need = kind.needs_thetas();
            if self.thetas.len() < need {
                return Err(Error::config(format!(
                    "{kind} needs at least {need} theta value(s)"
                )));
            }
            if kind == ExperimentKind::InvarianceIdentity && !self.n.is_power_of_two() {
                return Err(Error::config(format!(
                    "invariance_identity needs n a power of two, got {}",
                    self.n
                )));
            }
        }
        if self.n_ladder.is_empty() || self.n_ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(
                "n_ladder must be nonempty and strictly increasing",
            ));
        }
        if self.n_ladder[0] < 1 {
            return Err(Error::config("n_ladder entries must be positive"));
        }
        if self.n_grid < 4 {
            return Err(Error::config("n_grid must be at least 4"));
        }
        if self.pilot_factor < 1 {
            return Err(Error::config("pilot_factor must be at least 1"));
        }
        for (k, v) in self.tolerances.iter() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!(
                    "tolerance {k}={v} must be finite and nonnegative"
                )));
            }
        }
        let spec = self.process.build().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::config(format!("process: {other}")),
        })?;
        if let ProcessSpec::Markov(m) = &spec {
            m.check_irreducible()
                .map_err(|e| Error::config(format!("process: {e}")))?;
        }
        Ok(Arc::new(spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ExperimentConfig> {
        parse_config(s.as_bytes())
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse(
            r#"{"kind":"fixed_freq_clt","process":{"kind":"linear","coeffs":[1]},
                "n":1024,"replicates":200,"thetas":[2.0],"master_seed":1}"#,
        )
        .unwrap();
        assert_eq!(cfg.kind, Some(ExperimentKind::FixedFreqClt));
        assert_eq!(cfg.n, 1024);
        assert_eq!(cfg.n_grid, DEFAULT_GRID);
        assert_eq!(cfg.n_ladder, DEFAULT_LADDER.to_vec());
        assert_eq!(cfg.tolerances.get("ks_crit"), 1.628);
        assert_eq!(cfg.tolerances.get("var_rel"), 0.05);
        assert_eq!(
            cfg.process,
            ProcessConfig::Linear {
                coeffs: vec![1.0],
                innovation: Innovation::Gaussian
            }
        );
    }

    #[test]
    fn excluded_frequencies() {
        let base = |t: &str| {
            format!(
                r#"{{"kind":"fixed_freq_clt","process":"ma1","thetas":[{t}],"replicates":200}}"#
            )
        };
        let err = parse(&base("0.0")).unwrap_err().to_string();
        assert!(err.contains("theta=0 excluded"), "{err}");
        let err = parse(&base("3.141592653589793")).unwrap_err().to_string();
        assert!(err.contains("theta=pi excluded"), "{err}");
        let err = parse(&base("6.283185307179586")).unwrap_err().to_string();
        assert!(err.contains("theta=0 excluded"), "{err}");
        assert!(parse(&base("2.0")).is_ok());
    }

    #[test]
    fn markov_row_error_names_row() {
        let err = parse(
            r#"{"kind":"fixed_freq_clt","thetas":[1.0],
                "process":{"kind":"markov","transition":[[0.5,0.5],[0.3,0.6]],"f":[1,-1]}}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("row 1"), "{err}");
    }

    #[test]
    fn markov_stationary_law_is_computed() {
        let cfg = parse(
            r#"{"kind":"fixed_freq_clt","thetas":[1.0],
                "process":{"kind":"markov","transition":[[0.75,0.25],[0.25,0.75]],"f":[1,-1]}}"#,
        )
        .unwrap();
        match cfg.validate().unwrap().as_ref() {
            ProcessSpec::Markov(m) => assert_eq!(m.stationary(), &[0.5, 0.5]),
            other => panic!("{other:?}"),
        }
        // reducible chains are rejected
        assert!(
            parse(r#"{"process":{"kind":"markov","transition":[[1,0],[0,1]],"f":[1,-1]}}"#)
                .is_err()
        );
        assert!(parse(r#"{"process":"two_state(0)"}"#).is_err());
    }

    #[test]
    fn unknown_keys_are_listed() {
        let err = parse(r#"{"process":"ma1","bogus":1,"also":2}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("also") && err.contains("bogus"), "{err}");
        let err = parse(r#"{"process":{"kind":"linear","coeffs":[1],"colour":1}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("colour"), "{err}");
        let err = parse(r#"{"process":"ma1","tolerances":{"ks":1}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("ks"), "{err}");
    }

    #[test]
    fn malformed_json_reports_byte_offset() {
        let text = "{\n  \"process\": \"ma1\",\n  \"n\": ,\n}";
        match parse(text) {
            Err(Error::Parse { offset, .. }) => {
                assert_eq!(&text[offset..offset + 1], ",");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_config(b"\xff\xfe"),
            Err(Error::Parse { offset: 0, .. })
        ));
    }

    #[test]
    fn validation_limits() {
        assert!(parse(r#"{"process":"ma1","n":8}"#).is_err());
        assert!(parse(r#"{"process":"ma1","replicates":99}"#).is_err());
        assert!(parse(r#"{"process":"ma1","n_ladder":[64,32]}"#).is_err());
        assert!(parse(r#"{"kind":"cross_freq","process":"ma1","thetas":[1.0]}"#).is_err());
        assert!(parse(r#"{"kind":"invariance_identity","process":"ma1","n":1000}"#).is_err());
        assert!(
            parse(r#"{"process":{"kind":"gaussian_functional","phi":1.0,"h":"sign"}}"#).is_err()
        );
        assert!(parse(r#"{"process":"nonsense"}"#).is_err());
        assert!(parse(r#"{"process":"ma1","kind":"nonsense"}"#).is_err());
    }

    #[test]
    fn presets_build() {
        for name in ["iid_gauss", "ma1", "slow_decay", "two_state(0.25)"] {
            let p = ProcessConfig::Preset(name.into()).build().unwrap();
            if name == "slow_decay" {
                match p {
                    ProcessSpec::Linear(l) => {
                        assert_eq!(l.truncation(), SLOW_DECAY_DEFAULT_TRUNCATION)
                    }
                    _ => panic!(),
                }
            }
        }
        let cfg = parse(r#"{"process":{"kind":"linear","named":"slow_decay","truncation":500}}"#)
            .unwrap();
        match cfg.validate().unwrap().as_ref() {
            ProcessSpec::Linear(l) => assert_eq!(l.coeffs().len(), 501),
            _ => panic!(),
        }
    }

    #[test]
    fn overrides_change_named_field() {
        let mut v: Value = serde_json::from_str(r#"{"process":"ma1","n":1024}"#).unwrap();
        apply_override(&mut v, "n=2048").unwrap();
        apply_override(&mut v, "tolerances.ks_crit=1.358").unwrap();
        apply_override(&mut v, "process=iid_gauss").unwrap();
        let cfg = ExperimentConfig::from_json(&v).unwrap();
        assert_eq!(cfg.n, 2048);
        assert_eq!(cfg.tolerances.get("ks_crit"), 1.358);
        assert_eq!(cfg.process, ProcessConfig::Preset("iid_gauss".into()));
        assert!(apply_override(&mut v, "novalue").is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = parse(
            r#"{"kind":"periodogram_chi2","process":{"kind":"gaussian_functional","phi":0.5,"h":"cube"},
                "thetas":[1.0,2.0],"tolerances":{"ks_crit":1.358},"output":{"report":"r.json"}}"#,
        )
        .unwrap();
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
    }
}
