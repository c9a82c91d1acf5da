//! Experiment configuration: a TOML file with `problem`, `weights`,
//! `schedule`, `recovery` and (optionally) `bench` blocks. Unknown keys are
//! rejected, every cross-field precondition is validated before any solve,
//! and `--set block.key=value` overrides individual scalars.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use mlcspg_core::pde::{Field, Fluctuation, ParametricProblem, QoiSpec};
use mlcspg_core::pipeline::{LevelSchedule, SampleRule};
use mlcspg_core::recovery::Algorithm;
use mlcspg_core::weights::{WeightConfig, DEFAULT_THETA};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub weights: WeightsConfig,
    pub schedule: ScheduleConfig,
    pub recovery: RecoveryConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub spatial_dim: usize,
    pub mean_field: f64,
    pub forcing: f64,
    /// Only "integral" is supported.
    #[serde(default = "default_qoi")]
    pub qoi: String,
    pub fluctuation: FluctuationConfig,
}

fn default_qoi() -> String {
    "integral".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluctuationConfig {
    /// "cosine" or "patchwise".
    pub kind: String,
    pub d: usize,
    /// Cosine decay exponent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Uniform patch amplitude (patchwise shorthand).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Per-patch amplitudes (overrides `amplitude`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    /// "constant", "polynomial" or "explicit".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    /// Defaults to √2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub levels: usize,
    pub h0: f64,
    pub c_s: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// "practical", "theoretical" or "interpolation".
    #[serde(default = "default_rule")]
    pub sample_rule: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

fn default_sigma() -> f64 {
    1.0
}

fn default_rule() -> String {
    "practical".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryConfig {
    /// "womp", "whtp", "wbp", "lsq" or "mc".
    pub algorithm: String,
    /// Fixed WBP residual bound; cross-validated when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub n_test: usize,
    #[serde(default = "default_refinement")]
    pub refinement: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h0_sweep: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
}

fn default_refinement() -> usize {
    4
}

fn default_mc_samples() -> usize {
    10_000
}

impl ExperimentConfig {
    pub fn problem(&self) -> Result<ParametricProblem, ConfigError> {
        if self.problem.qoi != "integral" {
            return Err(err(format!(
                "problem.qoi: only \"integral\" is supported, got \"{}\"",
                self.problem.qoi
            )));
        }
        let f = &self.problem.fluctuation;
        let fluctuation = match f.kind.as_str() {
            "cosine" => {
                let mu = f
                    .mu
                    .ok_or_else(|| err("problem.fluctuation.mu required for the cosine family"))?;
                Fluctuation::Cosine { mu, terms: f.d }
            }
            "patchwise" => {
                let amplitudes = match (&f.amplitudes, f.amplitude) {
                    (Some(list), _) => {
                        if list.len() != f.d {
                            return Err(err(format!(
                                "problem.fluctuation.amplitudes has {} entries, d = {}",
                                list.len(),
                                f.d
                            )));
                        }
                        list.clone()
                    }
                    (None, Some(a)) => vec![a; f.d],
                    (None, None) => {
                        return Err(err(
                            "problem.fluctuation: patchwise needs `amplitude` or `amplitudes`",
                        ))
                    }
                };
                Fluctuation::Patchwise { amplitudes }
            }
            other => {
                return Err(err(format!(
                    "problem.fluctuation.kind: expected \"cosine\" or \"patchwise\", got \"{other}\""
                )))
            }
        };
        ParametricProblem::new(
            self.problem.spatial_dim,
            Field::Constant(self.problem.mean_field),
            fluctuation,
            Field::Constant(self.problem.forcing),
            QoiSpec::Integral,
        )
        .map_err(|e| err(format!("problem: {e}")))
    }

    pub fn weights(&self) -> Result<WeightConfig, ConfigError> {
        let theta = self.weights.theta.unwrap_or(DEFAULT_THETA);
        let w = &self.weights;
        match w.kind.as_str() {
            "constant" => {
                let beta = w.beta.ok_or_else(|| err("weights.beta required for constant kind"))?;
                WeightConfig::constant(beta, self.problem.fluctuation.d, theta)
            }
            "polynomial" => {
                let c = w.c.ok_or_else(|| err("weights.c required for polynomial kind"))?;
                let alpha = w
                    .alpha
                    .ok_or_else(|| err("weights.alpha required for polynomial kind"))?;
                WeightConfig::polynomial(c, alpha, theta)
            }
            "explicit" => {
                let values = w
                    .values
                    .clone()
                    .ok_or_else(|| err("weights.values required for explicit kind"))?;
                WeightConfig::explicit(values, theta)
            }
            other => Err(mlcspg_core::CoreError::Config(format!(
                "weights.kind: expected \"constant\", \"polynomial\" or \"explicit\", got \"{other}\""
            ))),
        }
        .map_err(|e| err(format!("weights: {e}")))
    }

    pub fn sample_rule(&self) -> Result<SampleRule, ConfigError> {
        match self.schedule.sample_rule.as_str() {
            "practical" => Ok(SampleRule::Practical),
            "theoretical" => Ok(SampleRule::Theoretical {
                c0: self.schedule.c0.unwrap_or(1.0),
                gamma: self.schedule.gamma.unwrap_or(0.01),
            }),
            "interpolation" => Ok(SampleRule::Interpolation),
            other => Err(err(format!(
                "schedule.sample_rule: expected \"practical\", \"theoretical\" or \"interpolation\", got \"{other}\""
            ))),
        }
    }

    pub fn schedule(&self) -> Result<LevelSchedule, ConfigError> {
        let weights = self.weights()?;
        let rule = self.sample_rule()?;
        mlcspg_core::pipeline::make_schedule(
            self.schedule.levels,
            self.schedule.h0,
            self.schedule.c_s,
            self.schedule.sigma,
            rule,
            &weights,
        )
        .map_err(|e| err(format!("schedule: {e}")))
    }

    pub fn algorithm(&self) -> Result<Algorithm, ConfigError> {
        self.recovery
            .algorithm
            .parse::<Algorithm>()
            .map_err(|e| err(format!("recovery: {e}")))
    }

    /// Validates every block and cross-field precondition without solving.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let problem = self.problem()?;
        let weights = self.weights()?;
        let schedule = self.schedule()?;
        self.algorithm()?;
        if let Some(noise) = self.recovery.noise_level {
            if noise.is_nan() || noise < 0.0 {
                return Err(err(format!("recovery.noise_level must be >= 0, got {noise}")));
            }
        }
        // candidate sets must stay within the problem's parameter dimension
        let d = problem.parameter_dim();
        for plan in &schedule.levels {
            if let Some(nu) = plan.gamma.iter().find(|nu| nu.max_dim() as usize > d) {
                return Err(err(format!(
                    "schedule: candidate index {nu} exceeds problem dimension {d}"
                )));
            }
        }
        if let mlcspg_core::weights::WeightKind::Constant { active_dims, .. } = weights.kind() {
            if *active_dims != d {
                return Err(err(format!(
                    "weights: constant kind declares {active_dims} dimensions, problem.fluctuation.d = {d}"
                )));
            }
        }
        // the mesh must exist and align with any patch layout
        let mesh = mlcspg_core::pde::MeshHierarchy::from_h0(
            problem.spatial_dim(),
            self.schedule.h0,
            self.schedule.levels,
        )
        .map_err(|e| err(format!("schedule.h0: {e}")))?;
        if let Fluctuation::Patchwise { amplitudes } = problem.fluctuation() {
            let per_side = match problem.spatial_dim() {
                1 => amplitudes.len(),
                _ => (amplitudes.len() as f64).sqrt().round() as usize,
            };
            if mesh.cells(0) % per_side != 0 {
                return Err(err(format!(
                    "schedule.h0: 1/h0 = {} cells do not align with {per_side} patches per side",
                    mesh.cells(0)
                )));
            }
        }
        if let Some(bench) = &self.bench {
            if bench.n_test == 0 {
                return Err(err("bench.n_test must be positive"));
            }
            if bench.refinement < 4 {
                return Err(err(format!(
                    "bench.refinement must be at least 4, got {}",
                    bench.refinement
                )));
            }
        }
        Ok(())
    }
}

/// Applies one `block.key=value` override to the parsed TOML tree. Values
/// are parsed as bool, integer, float or string, in that order.
fn apply_override(root: &mut toml::Value, spec: &str) -> Result<(), ConfigError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| err(format!("--set expects block.key=value, got `{spec}`")))?;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(err(format!("--set: empty key path in `{spec}`")));
    }
    let mut cursor = root;
    for part in &parts[..parts.len() - 1] {
        cursor = cursor
            .as_table_mut()
            .ok_or_else(|| err(format!("--set: `{part}` is not a table")))?
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let value = if let Ok(b) = raw.parse::<bool>() {
        toml::Value::Boolean(b)
    } else if let Ok(i) = raw.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = raw.parse::<f64>() {
        toml::Value::Float(f)
    } else {
        toml::Value::String(raw.to_string())
    };
    cursor
        .as_table_mut()
        .ok_or_else(|| err("--set: parent is not a table"))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Loads, overrides and validates a configuration file.
pub fn load(
    path: &Path,
    overrides: &[String],
    seed: Option<u64>,
) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, overrides, seed)
}

pub fn parse(
    text: &str,
    overrides: &[String],
    seed: Option<u64>,
) -> Result<ExperimentConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e| err(format!("toml syntax: {e}")))?;
    let mut tree = toml::Value::Table(table);
    for spec in overrides {
        apply_override(&mut tree, spec)?;
    }
    if let Some(seed) = seed {
        apply_override(&mut tree, &format!("schedule.seed={seed}"))?;
    }
    let config: ExperimentConfig = tree
        .try_into()
        .map_err(|e| err(format!("config: {e}")))?;
    config.validate()?;
    Ok(config)
}

/// Serializes the configuration back to TOML (round-trip stable).
#[cfg(test)]
pub fn to_toml(config: &ExperimentConfig) -> Result<String, ConfigError> {
    toml::to_string(config).map_err(|e| err(format!("serialize: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE: &str = r#"
[problem]
spatial_dim = 1
mean_field = 4.3
forcing = 10.0

[problem.fluctuation]
kind = "cosine"
mu = 2.0
d = 6

[weights]
kind = "constant"
beta = 1.08

[schedule]
levels = 3
h0 = 0.2
c_s = 8.0
seed = 42

[recovery]
algorithm = "womp"

[bench]
n_test = 100
h0_sweep = [0.2, 0.1, 0.05, 0.025]
"#;

    #[test]
    fn parses_and_validates() {
        let cfg = parse(EXAMPLE, &[], None).unwrap();
        assert_eq!(cfg.schedule.seed, 42);
        assert_eq!(cfg.problem.fluctuation.d, 6);
        let schedule = cfg.schedule().unwrap();
        assert_eq!(schedule.level_count(), 3);
    }

    #[test]
    fn round_trip_stable() {
        let cfg = parse(EXAMPLE, &[], None).unwrap();
        let text = to_toml(&cfg).unwrap();
        let cfg2 = parse(&text, &[], None).unwrap();
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = EXAMPLE.replace("n_test = 100", "n_test = 100\ntypo_key = 1");
        assert!(parse(&bad, &[], None).is_err());
    }

    #[test]
    fn overrides_apply() {
        let cfg = parse(
            EXAMPLE,
            &["schedule.seed=7".into(), "weights.beta=1.25".into()],
            None,
        )
        .unwrap();
        assert_eq!(cfg.schedule.seed, 7);
        assert_eq!(cfg.weights.beta, Some(1.25));
        let cfg = parse(EXAMPLE, &[], Some(99)).unwrap();
        assert_eq!(cfg.schedule.seed, 99);
    }

    #[test]
    fn finiteness_precondition_named_in_error() {
        let result = parse(
            EXAMPLE,
            &["weights.beta=1.0".into(), "weights.theta=1.0".into()],
            None,
        );
        let msg = result.unwrap_err().to_string();
        assert!(msg.contains("finite candidate set"), "message: {msg}");
    }

    #[test]
    fn patch_alignment_checked() {
        let patch = EXAMPLE
            .replace("kind = \"cosine\"", "kind = \"patchwise\"\namplitude = 0.1")
            .replace("mu = 2.0\n", "");
        // h0 = 0.2 → 5 cells, 6 patches: misaligned
        let result = parse(&patch, &[], None);
        let msg = result.unwrap_err().to_string();
        assert!(msg.contains("align"), "message: {msg}");
        // 1/12 aligns
        let ok = parse(&patch, &["schedule.h0=0.08333333333333333".into()], None);
        assert!(ok.is_ok(), "{:?}", ok.err().map(|e| e.to_string()));
    }
}
