//! Scenario files (TOML). Every table rejects unknown keys; command-line
//! flags override file values.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

pub const SEED_ENV: &str = "ALGPOIS_SEED";

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub action: ActionSpec,
    #[serde(default)]
    pub hamiltonian: HamiltonianSpec,
    pub init: Option<Vec<f64>>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub validate: ValidateSpec,
    #[serde(default, rename = "loop")]
    pub loop_ext: LoopSpec,
    #[serde(default)]
    pub stargroup: StarSpec,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub name: Option<String>,
    /// Second action for `compat`.
    pub second: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub preset: Option<String>,
    /// Polynomial over `z1…`, `xi1…`.
    pub expr: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub svg_x: Option<String>,
    pub svg_y: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ValidateSpec {
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    pub algebra: Option<String>,
    pub action: Option<String>,
    pub n: Option<usize>,
    pub degree: Option<usize>,
    pub trials: Option<usize>,
    pub alpha: Option<f64>,
    pub r: Option<f64>,
    /// `spectral` or `central4`.
    pub derivative: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StarSpec {
    pub eps: Option<f64>,
    pub points: Option<usize>,
    pub threshold: Option<f64>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Seed from `ALGPOIS_SEED`, then the flag, then the file.
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        resolve_seed(std::env::var(SEED_ENV).ok().as_deref(), flag, self.seed)
    }
}

pub fn resolve_seed(
    env: Option<&str>,
    flag: Option<u64>,
    file: Option<u64>,
) -> Result<u64, CliError> {
    if let Some(v) = env {
        return v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={v} is not an unsigned integer")));
    }
    flag.or(file).ok_or_else(|| {
        CliError::Config("a seed is required (flag --seed, config `seed`, or ALGPOIS_SEED)".into())
    })
}
