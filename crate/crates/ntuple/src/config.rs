//! Problem configuration files (TOML, or JSON for echoed configs).

use std::path::{Path, PathBuf};

use ntuple_core::hypotheses::FlagOverrides;
use ntuple_core::{Direction, MetricKind, ResidualMetric};
use serde::{Deserialize, Serialize};

use crate::error::{read_file, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub space: SpaceSection,
    pub star: StarSection,
    pub mappings: MappingsSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSection>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub check: CheckSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub flags: FlagOverrides,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKindName {
    Vector,
    Finite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub kind: SpaceKindName,
    /// Dimension of `ℝᵏ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricKind>,
    /// Finite space file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Shorthand for the chain `0 < 1 < … < p-1` with `d(i, j) = |i - j|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Inline 1-based matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_inverse: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_inverse_table: Option<String>,
    /// Comparison function, an expression in `x1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    /// `omega`, `phi` or `undeclared`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_class: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_metric: Option<ResidualMetric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    /// Random starts for the uniqueness probe; 0 or absent skips it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_trials: Option<usize>,
}

/// A point: a scalar (for `k = 1` or a finite label) or a `k`-vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl PointValue {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            PointValue::Scalar(v) => vec![*v],
            PointValue::Vector(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub values: Vec<PointValue>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    /// Largest number of cases an exhaustive check or enumeration visits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<u64>,
    /// Subset of hypotheses `check` runs; all applicable ones by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<Vec<String>>,
}

/// A parsed config together with the directory its paths are relative to.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ProblemConfig,
    pub base: PathBuf,
    pub path: PathBuf,
}

impl LoadedConfig {
    pub fn resolve(&self, rel: &str) -> PathBuf {
        self.base.join(rel)
    }
}

impl ProblemConfig {
    pub fn parse_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn parse_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
        let text = read_file(path)?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let config = if is_json {
            Self::parse_json(&text)
        } else {
            Self::parse_toml(&text)
        }
        .map_err(|m| CliError::parse(path, m))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedConfig {
            config,
            base,
            path: path.to_path_buf(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUPLED: &str = r#"
[space]
kind = "vector"
k = 1

[star]
preset = "coupled2"

[mappings]
f = "(x1 + x2)/6 + 1"

[initial]
values = [0, 0.0]

[check]
variant = "lin_pt_max_x"
alpha = 0.3333333333333333
"#;

    #[test]
    fn parses_and_echoes() {
        let c = ProblemConfig::parse_toml(COUPLED).unwrap();
        assert_eq!(c.space.kind, SpaceKindName::Vector);
        assert_eq!(c.initial.as_ref().unwrap().values[0], PointValue::Scalar(0.0));
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(ProblemConfig::parse_json(&json).unwrap(), c);
        assert!(!json.contains("solver"));
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = COUPLED.replace("k = 1", "k = 1\nkk = 2");
        assert!(ProblemConfig::parse_toml(&bad).is_err());
        let bad = COUPLED.replace("kind = \"vector\"", "kind = \"hilbert\"");
        assert!(ProblemConfig::parse_toml(&bad).is_err());
    }

    #[test]
    fn vector_points() {
        let c =
            ProblemConfig::parse_toml(&COUPLED.replace("values = [0, 0.0]", "values = [[1, 2], [3, 4.5]]")).unwrap();
        assert_eq!(c.initial.unwrap().values[1].to_vec(), vec![3.0, 4.5]);
    }
}
