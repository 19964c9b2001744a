//! Configuration, subcommand dispatch and report rendering for the `seqbell`
//! binary.
//!
//! # Config file
//!
//! A JSON object. `mode` and the four angles are required; everything else
//! has a default. Unknown keys are rejected.
//!
//! | key       | type                         | default     |
//! |-----------|------------------------------|-------------|
//! | `mode`    | `"sequential"` or `"eprb"`   | required    |
//! | `a`, `a_prime`, `b`, `b_prime` | degrees | required    |
//! | `step`    | grid step, degrees           | `10`        |
//! | `n`       | sample count                 | `1000000`   |
//! | `seed`    | unsigned 64-bit              | `0`         |
//! | `format`  | `"csv"` or `"json"`          | `"csv"`     |
//! | `out`     | output path                  | stdout      |
//! | `model`   | model file for `hvm-check`   | none        |
//!
//! # CSV outputs
//!
//! Floating-point values are written with 17 significant digits. Angles in
//! CSV output are degrees.
//!
//! - `exact` (sequential): `A1,B1,A2,B2,probability`, 16 rows in canonical
//!   order. (EPRB): `pair,s1,s2,probability`, 4 rows per pair.
//! - `sample`: the 16 counts in canonical order as `c++++ ... c----`, then `n`.
//! - `chsh-scan` (sequential): `theta_ab,theta_aa_prime,theta_bb_prime,s`;
//!   (EPRB): `a,a_prime,b,b_prime,s`. One row per grid cell.
//! - `chsh-max`: `mode,angle_0,...,s,abs_s,iterations,gradient_norm,converged`.
//! - `hvm-check`, `joint-feasibility`: `key,value` rows.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::hvm::{
    build_contextual_model, check_factorizability, hv_correlator, induced_distribution,
    load_model, noncontextual_feasibility, FactorizabilityReport, FeasibilityResult, PairTargets,
};
use crate::inequality::{maximize_chsh, scan_grid, MaximizeOptions, OptimumReport, ScanReport};
use crate::quantum::{
    closed_form_correlators, grand_joint_quantum, CorrelatorSet, GrandJointDistribution, Mode,
    PairDistribution, Scenario,
};
use crate::sampler::{empirical_correlators, sample, EstimatedCorrelators, OutcomeCounts};
use crate::ANALYTIC_TOL;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Coarse grid used by `chsh-max` for its multistart.
pub const MAXIMIZE_COARSE_STEP: f64 = FRAC_PI_4;
pub const MAXIMIZE_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config: {0}")]
    Syntax(String),
    #[error("unknown subcommand `{0}`")]
    UnknownSubcommand(String),
    #[error("input: {0}")]
    Input(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    fn field(field: &str, message: impl Into<String>) -> Self {
        CliError::Field {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => EXIT_INTERNAL,
            CliError::Write { .. } => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;
/// `chsh-scan` found a sequential-mode cell above the bound.
pub const EXIT_BOUND_VIOLATION: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("expected `csv` or `json`, got `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
    pub step: f64,
    pub n: u64,
    pub seed: u64,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
}

const KEYS: [&str; 11] = [
    "mode", "a", "a_prime", "b", "b_prime", "step", "n", "seed", "format", "out", "model",
];

fn get_f64(obj: &Map<String, Value>, key: &str) -> Result<Option<f64>, CliError> {
    match obj.get(key) {
        None => Ok(None),
        Some(Value::Number(n)) => n
            .as_f64()
            .filter(|x| x.is_finite())
            .map(Some)
            .ok_or_else(|| CliError::field(key, "not a finite number")),
        Some(other) => Err(CliError::field(key, format!("expected a number, got {other}"))),
    }
}

fn get_u64(obj: &Map<String, Value>, key: &str) -> Result<Option<u64>, CliError> {
    match obj.get(key) {
        None => Ok(None),
        Some(Value::Number(n)) => n
            .as_u64()
            .map(Some)
            .ok_or_else(|| CliError::field(key, format!("expected a nonnegative integer, got {n}"))),
        Some(other) => Err(CliError::field(key, format!("expected an integer, got {other}"))),
    }
}

fn get_str<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<Option<&'a str>, CliError> {
    match obj.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(other) => Err(CliError::field(key, format!("expected a string, got {other}"))),
    }
}

/// Parse and validate a JSON config document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Syntax(e.to_string()))?;
    let Value::Object(obj) = value else {
        return Err(CliError::Syntax("top level must be an object".into()));
    };
    if let Some(key) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(CliError::UnknownKey(key.clone()));
    }
    let mode = get_str(&obj, "mode")?
        .ok_or_else(|| CliError::field("mode", "missing"))?
        .parse::<Mode>()
        .map_err(|_| CliError::field("mode", "expected `sequential` or `eprb`"))?;
    let angle = |key: &str| get_f64(&obj, key)?.ok_or_else(|| CliError::field(key, "missing"));
    let cfg = RunConfig {
        mode,
        a: angle("a")?,
        a_prime: angle("a_prime")?,
        b: angle("b")?,
        b_prime: angle("b_prime")?,
        step: get_f64(&obj, "step")?.unwrap_or(10.0),
        n: get_u64(&obj, "n")?.unwrap_or(1_000_000),
        seed: get_u64(&obj, "seed")?.unwrap_or(0),
        format: match get_str(&obj, "format")? {
            Some(s) => s.parse().map_err(|m: String| CliError::field("format", m))?,
            None => Format::Csv,
        },
        out: get_str(&obj, "out")?.map(PathBuf::from),
        model: get_str(&obj, "model")?.map(PathBuf::from),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(CliError::field("step", format!("must be positive, got {}", self.step)));
        }
        Ok(())
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        Ok(Scenario::from_degrees(
            self.mode,
            self.a,
            self.a_prime,
            self.b,
            self.b_prime,
        )?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Exact,
    Sample,
    ChshScan,
    ChshMax,
    HvmCheck,
    JointFeasibility,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::Exact,
        Subcommand::Sample,
        Subcommand::ChshScan,
        Subcommand::ChshMax,
        Subcommand::HvmCheck,
        Subcommand::JointFeasibility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Exact => "exact",
            Subcommand::Sample => "sample",
            Subcommand::ChshScan => "chsh-scan",
            Subcommand::ChshMax => "chsh-max",
            Subcommand::HvmCheck => "hvm-check",
            Subcommand::JointFeasibility => "joint-feasibility",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::UnknownSubcommand(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HvmCheckResult {
    pub source: String,
    pub factorizability: FactorizabilityReport,
    /// Entrywise gap between the model's joint distribution and the exact one.
    pub reconstruction_deviation: f64,
    pub weights: Vec<f64>,
    pub hv_correlators: CorrelatorSet,
    pub closed_form_correlators: CorrelatorSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Distribution {
        distribution: GrandJointDistribution,
        correlators: CorrelatorSet,
    },
    PairDistributions {
        pairs: Vec<PairDistribution>,
        correlators: CorrelatorSet,
    },
    Sample {
        counts: OutcomeCounts,
        estimates: EstimatedCorrelators,
    },
    Scan(ScanReport),
    Optimum(OptimumReport),
    Hvm(HvmCheckResult),
    Feasibility {
        correlators: CorrelatorSet,
        result: FeasibilityResult,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub version: String,
    pub subcommand: Subcommand,
    pub config: RunConfig,
    pub result: Payload,
}

/// Compute the report for a subcommand. Nothing is written.
pub fn run(cmd: Subcommand, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let sc = cfg.scenario()?;
    let result = match cmd {
        Subcommand::Exact => match sc.mode {
            Mode::Sequential => {
                let distribution = grand_joint_quantum(&sc)?;
                Payload::Distribution {
                    correlators: distribution.correlators(),
                    distribution,
                }
            }
            Mode::Eprb => {
                let targets = PairTargets::from_scenario(&sc)?;
                Payload::PairDistributions {
                    pairs: targets.all().to_vec(),
                    correlators: targets.correlators(),
                }
            }
        },
        Subcommand::Sample => {
            let d = grand_joint_quantum(&sc)?;
            let counts = sample(&d, cfg.n, cfg.seed);
            let estimates = empirical_correlators(&counts)?;
            Payload::Sample { counts, estimates }
        }
        Subcommand::ChshScan => Payload::Scan(scan_grid(sc.mode, cfg.step.to_radians())?),
        Subcommand::ChshMax => {
            let opts = MaximizeOptions {
                coarse_step: MAXIMIZE_COARSE_STEP,
                tol: MAXIMIZE_TOL,
                ..Default::default()
            };
            Payload::Optimum(maximize_chsh(sc.mode, &opts)?)
        }
        Subcommand::HvmCheck => {
            let (model, source) = match &cfg.model {
                Some(path) => (load_model(path)?, path.display().to_string()),
                None => (build_contextual_model(&sc)?, "contextual".to_string()),
            };
            let msc = *model.settings();
            let exact = grand_joint_quantum(&msc)?;
            let induced = induced_distribution(&model)?;
            let [l0, l1, l2, l3] = PairTargets::labels();
            Payload::Hvm(HvmCheckResult {
                source,
                factorizability: check_factorizability(&model, ANALYTIC_TOL),
                reconstruction_deviation: induced.max_abs_diff(&exact),
                weights: model.weights(),
                hv_correlators: CorrelatorSet {
                    ab: hv_correlator(&model, l0),
                    ab_prime: hv_correlator(&model, l1),
                    a_prime_b: hv_correlator(&model, l2),
                    a_prime_b_prime: hv_correlator(&model, l3),
                },
                closed_form_correlators: closed_form_correlators(&msc),
            })
        }
        Subcommand::JointFeasibility => {
            let targets = PairTargets::from_scenario(&sc)?;
            Payload::Feasibility {
                correlators: targets.correlators(),
                result: noncontextual_feasibility(&targets)?,
            }
        }
    };
    Ok(Report {
        version: VERSION.to_string(),
        subcommand: cmd,
        config: cfg.clone(),
        result,
    })
}

/// 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn sign_str(s: crate::quantum::Sign) -> &'static str {
    match s {
        crate::quantum::Sign::Plus => "1",
        crate::quantum::Sign::Minus => "-1",
    }
}

fn kv(out: &mut String, key: &str, value: impl fmt::Display) {
    out.push_str(key);
    out.push(',');
    out.push_str(&value.to_string());
    out.push('\n');
}

fn kv_correlators(out: &mut String, prefix: &str, c: &CorrelatorSet) {
    for (name, v) in c.named() {
        kv(out, &format!("{prefix}_{}", name.replace('\'', "_prime")), fmt_num(v));
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match &self.result {
            Payload::Distribution { distribution, .. } => {
                out.push_str("A1,B1,A2,B2,probability\n");
                for (q, p) in distribution.iter() {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        sign_str(q.a1),
                        sign_str(q.b1),
                        sign_str(q.a2),
                        sign_str(q.b2),
                        fmt_num(p)
                    ));
                }
            }
            Payload::PairDistributions { pairs, .. } => {
                out.push_str("pair,s1,s2,probability\n");
                for pd in pairs {
                    let label = format!("{}{}", pd.label().first(), pd.label().second());
                    for (s1, s2) in crate::quantum::sign_pairs() {
                        out.push_str(&format!(
                            "{label},{},{},{}\n",
                            sign_str(s1),
                            sign_str(s2),
                            fmt_num(pd.prob(s1, s2))
                        ));
                    }
                }
            }
            Payload::Sample { counts, .. } => out.push_str(&counts.to_csv()),
            Payload::Scan(scan) => {
                out.push_str(match scan.mode {
                    Mode::Sequential => "theta_ab,theta_aa_prime,theta_bb_prime,s\n",
                    Mode::Eprb => "a,a_prime,b,b_prime,s\n",
                });
                for (i, s) in scan.s_values.iter().enumerate() {
                    for x in scan.cell_angles(i) {
                        out.push_str(&fmt_num(x.to_degrees()));
                        out.push(',');
                    }
                    out.push_str(&fmt_num(*s));
                    out.push('\n');
                }
            }
            Payload::Optimum(opt) => {
                let names: Vec<String> =
                    (0..opt.angles.len()).map(|i| format!("angle_{i}")).collect();
                out.push_str(&format!(
                    "mode,{},s,abs_s,iterations,gradient_norm,converged\n",
                    names.join(",")
                ));
                let angles: Vec<String> = opt.angles.iter().map(|x| fmt_num(x.to_degrees())).collect();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    opt.mode,
                    angles.join(","),
                    fmt_num(opt.s_value),
                    fmt_num(opt.abs_s),
                    opt.iterations,
                    fmt_num(opt.gradient_norm),
                    opt.converged
                ));
            }
            Payload::Hvm(h) => {
                out.push_str("key,value\n");
                kv(&mut out, "source", &h.source);
                kv(&mut out, "factorizable", h.factorizability.passed);
                kv(&mut out, "product_deviation", fmt_num(h.factorizability.product_deviation));
                kv(&mut out, "locality_deviation", fmt_num(h.factorizability.locality_deviation));
                kv(&mut out, "locality_comparisons", h.factorizability.locality_comparisons);
                kv(&mut out, "reconstruction_deviation", fmt_num(h.reconstruction_deviation));
                for (i, w) in h.weights.iter().enumerate() {
                    kv(&mut out, &format!("weight_{i}"), fmt_num(*w));
                }
                kv_correlators(&mut out, "hv", &h.hv_correlators);
                kv_correlators(&mut out, "closed", &h.closed_form_correlators);
            }
            Payload::Feasibility {
                correlators,
                result,
            } => {
                out.push_str("key,value\n");
                kv_correlators(&mut out, "target", correlators);
                match result {
                    FeasibilityResult::Feasible {
                        joint,
                        max_deviation,
                    } => {
                        kv(&mut out, "verdict", "feasible");
                        kv(&mut out, "max_deviation", fmt_num(*max_deviation));
                        for (q, p) in joint.iter() {
                            kv(&mut out, &format!("p{}", q.label()), fmt_num(p));
                        }
                    }
                    FeasibilityResult::Infeasible {
                        certificate,
                        residual,
                    } => {
                        kv(&mut out, "verdict", "infeasible");
                        kv(&mut out, "certificate", &certificate.expression);
                        kv(&mut out, "certificate_value", fmt_num(certificate.value));
                        kv(&mut out, "residual", fmt_num(*residual));
                    }
                }
            }
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Exit status implied by the report contents.
    pub fn exit_code(&self) -> i32 {
        match &self.result {
            Payload::Scan(s) if s.mode == Mode::Sequential && s.bound_violations > 0 => {
                EXIT_BOUND_VIOLATION
            }
            _ => EXIT_OK,
        }
    }
}

/// Write a rendered report to `path`.
pub fn write_report(report: &Report, format: Format, path: &Path) -> Result<(), CliError> {
    fs::write(path, report.render(format)).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Compute the report and write it to `cfg.out` when set.
pub fn execute(cmd: Subcommand, cfg: &RunConfig) -> Result<Report, CliError> {
    let report = run(cmd, cfg)?;
    if let Some(path) = &cfg.out {
        write_report(&report, cfg.format, path)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"mode": "sequential", "a": 0, "a_prime": 0, "b": 0, "b_prime": 0}"#;

    #[test]
    fn defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.mode, Mode::Sequential);
        assert_eq!(cfg.step, 10.0);
        assert_eq!(cfg.n, 1_000_000);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(cfg.out, None);
    }

    #[test]
    fn bad_angle_names_the_field() {
        let text = r#"{"mode": "eprb", "a": "abc", "a_prime": 0, "b": 0, "b_prime": 0}"#;
        let err = parse_config(text).unwrap_err();
        assert!(matches!(&err, CliError::Field { field, .. } if field == "a"));
        assert!(err.to_string().contains("`a`"));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = r#"{"mode": "eprb", "a": 0, "a_prime": 0, "b": 0, "b_prime": 0, "foo": 1}"#;
        assert!(matches!(parse_config(text), Err(CliError::UnknownKey(k)) if k == "foo"));
    }

    #[test]
    fn missing_and_invalid_fields() {
        let text = r#"{"mode": "eprb", "a": 0, "a_prime": 0, "b": 0}"#;
        assert!(matches!(parse_config(text), Err(CliError::Field { field, .. }) if field == "b_prime"));
        let text = r#"{"mode": "neither", "a": 0, "a_prime": 0, "b": 0, "b_prime": 0}"#;
        assert!(matches!(parse_config(text), Err(CliError::Field { field, .. }) if field == "mode"));
        let text = r#"{"mode": "eprb", "a": 0, "a_prime": 0, "b": 0, "b_prime": 0, "n": -5}"#;
        assert!(matches!(parse_config(text), Err(CliError::Field { field, .. }) if field == "n"));
        let text = r#"{"mode": "eprb", "a": 0, "a_prime": 0, "b": 0, "b_prime": 0, "step": 0}"#;
        assert!(matches!(parse_config(text), Err(CliError::Field { field, .. }) if field == "step"));
        assert!(matches!(parse_config("[1]"), Err(CliError::Syntax(_))));
    }

    #[test]
    fn unknown_subcommand() {
        assert!(matches!(
            "frobnicate".parse::<Subcommand>(),
            Err(CliError::UnknownSubcommand(_))
        ));
        for c in Subcommand::ALL {
            assert_eq!(c.name().parse::<Subcommand>().unwrap(), c);
        }
    }

    #[test]
    fn number_format_has_17_digits() {
        assert_eq!(fmt_num(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_num(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
