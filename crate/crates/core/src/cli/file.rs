//! TOML scenario files. See `scenarios/example.toml` for an annotated
//! reference.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::DEFAULT_EPSILON;
use crate::graph::GraphSpec;
use crate::nonlinearity::OutputFunction;
use crate::sim::{EngineConfig, Scenario};
use crate::states::States;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialStates {
    Scalars(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

impl InitialStates {
    pub fn to_states(&self) -> Result<States> {
        match self {
            InitialStates::Scalars(v) => Ok(States::from_scalars(v)),
            InitialStates::Rows(r) => States::from_rows(r),
        }
    }

    pub fn from_states(x: &States) -> Self {
        if x.dim() == 1 {
            InitialStates::Scalars(x.as_slice().to_vec())
        } else {
            InitialStates::Rows(x.to_rows())
        }
    }
}

/// One value for every agent, or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAgent {
    Uniform(f64),
    List(Vec<f64>),
}

impl PerAgent {
    pub fn expand(&self, n: usize) -> Vec<f64> {
        match self {
            PerAgent::Uniform(v) => vec![*v; n],
            PerAgent::List(v) => v.clone(),
        }
    }

    fn compact(v: &[f64]) -> Self {
        match v.first() {
            Some(&a) if v.iter().all(|&b| b == a) => PerAgent::Uniform(a),
            _ => PerAgent::List(v.to_vec()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_events_per_agent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_floor: Option<f64>,
}

impl Tolerances {
    fn is_empty(&self) -> bool {
        *self == Tolerances::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default = "default_name")]
    pub name: String,
    pub output: String,
    pub x0: InitialStates,
    pub alpha: PerAgent,
    pub beta: PerAgent,
    pub horizon: f64,
    #[serde(default = "default_stride")]
    pub stride: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Tolerances::is_empty")]
    pub tolerances: Tolerances,
    pub graph: GraphSpec,
}

fn default_name() -> String {
    "scenario".into()
}

fn default_stride() -> f64 {
    EngineConfig::default().stride
}

impl ScenarioFile {
    /// Parses and validates; `origin` only labels error messages.
    pub fn from_toml_str(text: &str, origin: impl AsRef<Path>) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.as_ref().to_path_buf(),
            message: e.to_string().trim_end().to_string(),
        })?;
        file.to_scenario()?;
        file.engine_config().validate()?;
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario files always serialize")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string())?;
        Ok(())
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        let graph = self.graph.to_graph()?;
        let x0 = self.x0.to_states()?;
        let n = graph.n();
        let output = OutputFunction::parse_tag(&self.output, x0.dim())?;
        Scenario::builder(graph, output)
            .name(self.name.clone())
            .initial_states(x0)
            .triggering(self.alpha.expand(n), self.beta.expand(n))
            .horizon(self.horizon)
            .build()
    }

    /// Describes an existing scenario (shared `identity` / `saturation`
    /// outputs only).
    pub fn from_scenario(s: &Scenario, stride: f64) -> Result<Self> {
        let tag = match &s.outputs {
            crate::nonlinearity::Outputs::Shared(f) => f.tag(),
            _ => {
                return Err(Error::InvalidOutput(
                    "per-agent output maps have no file form".into(),
                ))
            }
        };
        OutputFunction::parse_tag(&tag, s.p())?;
        Ok(Self {
            name: s.name.clone(),
            output: tag,
            x0: InitialStates::from_states(&s.x0),
            alpha: PerAgent::compact(&s.alpha),
            beta: PerAgent::compact(&s.beta),
            horizon: s.horizon,
            stride,
            out_dir: None,
            tolerances: Tolerances::default(),
            graph: GraphSpec::from_graph(&s.graph),
        })
    }

    pub fn engine_config(&self) -> EngineConfig {
        let d = EngineConfig::default();
        let t = &self.tolerances;
        EngineConfig {
            stride: self.stride,
            root_tol: t.root_tol.unwrap_or(d.root_tol),
            max_events_per_agent: t.max_events_per_agent.unwrap_or(d.max_events_per_agent),
            threshold_floor: t.threshold_floor.unwrap_or(d.threshold_floor),
            ..d
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.tolerances.epsilon.unwrap_or(DEFAULT_EPSILON)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
name = "pair"
output = "identity"
x0 = [1, 0]
alpha = 1
beta = [1.0, 2.0]
horizon = 5

[graph]
n = 2
edges = [[1, 2, 1.0], [2, 1, 1.0]]
"#;

    #[test]
    fn parses_integers_as_reals() {
        let f = ScenarioFile::from_toml_str(SMALL, "small.toml").unwrap();
        let s = f.to_scenario().unwrap();
        assert_eq!(s.alpha, vec![1.0, 1.0]);
        assert_eq!(s.beta, vec![1.0, 2.0]);
        assert_eq!(s.x0.as_slice(), &[1.0, 0.0]);
        assert_eq!(f.stride, 0.01);
        assert_eq!(f.epsilon(), 0.05);
    }

    #[test]
    fn round_trip() {
        let f = ScenarioFile::from_toml_str(SMALL, "small.toml").unwrap();
        let again = ScenarioFile::from_toml_str(&f.to_toml_string(), "again.toml").unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn unknown_field_is_reported_with_location() {
        let bad = SMALL.replace("horizon = 5", "horizon = 5\nhorizn = 3");
        let msg = ScenarioFile::from_toml_str(&bad, "bad.toml")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("horizn") && msg.contains("line"), "{msg}");
        assert!(msg.contains("bad.toml"));
    }

    #[test]
    fn wrong_type_names_the_field() {
        let bad = SMALL.replace("horizon = 5", "horizon = \"long\"");
        let msg = ScenarioFile::from_toml_str(&bad, "bad.toml")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("horizon"), "{msg}");
    }

    #[test]
    fn zero_alpha_is_a_validation_error() {
        let bad = SMALL.replace("alpha = 1", "alpha = 0");
        assert!(matches!(
            ScenarioFile::from_toml_str(&bad, "a.toml"),
            Err(Error::InvalidScenario(_))
        ));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let bad = SMALL.replace("x0 = [1, 0]", "x0 = [1, 0, 2]");
        assert!(matches!(
            ScenarioFile::from_toml_str(&bad, "a.toml"),
            Err(Error::Dimension(_))
        ));
    }
}
