//! JSON scenario configuration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use t2m_core::{build_force, build_model, DiffStrategy, ForceField, ForceSpec, GeometryModel, IntegratorConfig, ModelSpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub force: ForceSpec,
    /// Required by `geodesic` and `jacobi`; `coeffs` falls back to it when `--at` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorSection>,
    #[serde(default)]
    pub diff: DiffStrategy,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Initial deviation, needed by `jacobi` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_dot: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt: f64,
    pub t_end: f64,
}

/// Output paths; relative paths are resolved against `--out-dir`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_json: Option<PathBuf>,
}

/// A validated config with its model and force built.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub model: Arc<dyn GeometryModel>,
    pub force: Arc<dyn ForceField>,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario").field("config", &self.config).finish()
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(CliError::config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Checks every dimension and step against the model, then builds it.
    pub fn build(self) -> CliResult<Scenario> {
        let n = self.dim();
        self.force.validate(n).map_err(CliError::config)?;
        self.diff.validate().map_err(CliError::config)?;
        if let Some(init) = &self.initial {
            let fields = [("x", Some(&init.x)), ("y", Some(&init.y)), ("w", init.w.as_ref()), ("w_dot", init.w_dot.as_ref())];
            for (name, v) in fields {
                let Some(v) = v else { continue };
                if v.len() != n {
                    return Err(CliError::Config(format!("initial.{name} has {} entries, model dimension is {n}", v.len())));
                }
                if v.iter().any(|c| !c.is_finite()) {
                    return Err(CliError::Config(format!("initial.{name} is not finite")));
                }
            }
        }
        if let Some(ic) = &self.integrator {
            ic.to_config().validate().map_err(CliError::config)?;
        }
        let model = build_model(&self.model).map_err(CliError::config)?;
        let force = build_force(&self.force).map_err(CliError::config)?;
        if let Some(init) = &self.initial {
            model
                .check_domain(&init.x)
                .map_err(|e| CliError::Config(format!("initial.x outside the model domain: {e}")))?;
        }
        Ok(Scenario {
            config: self,
            model,
            force,
        })
    }
}

impl IntegratorSection {
    pub fn to_config(&self) -> IntegratorConfig {
        IntegratorConfig::new(self.dt, self.t_end)
    }
}

impl Scenario {
    pub fn initial(&self) -> CliResult<&InitialData> {
        self.config
            .initial
            .as_ref()
            .ok_or_else(|| CliError::Config("config has no 'initial' section".into()))
    }

    pub fn integrator(&self) -> CliResult<IntegratorConfig> {
        self.config
            .integrator
            .map(|i| i.to_config())
            .ok_or_else(|| CliError::Config("config has no 'integrator' section".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPHERE: &str = r#"{
        "model": {"kind": "sphere"},
        "initial": {"x": [1.5707963267948966, 0.0], "y": [0.0, 1.0]},
        "integrator": {"dt": 0.001, "t_end": 1.0}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = ScenarioConfig::from_json(SPHERE).unwrap();
        assert!(matches!(c.force, ForceSpec::Zero));
        assert_eq!(c.diff, DiffStrategy::default());
        assert_eq!(c.outputs, Outputs::default());
        assert!(c.build().is_ok());
    }

    #[test]
    fn dimension_and_domain_errors_are_config_errors() {
        let bad = SPHERE.replace("[0.0, 1.0]", "[0.0, 1.0, 2.0]");
        let err = ScenarioConfig::from_json(&bad).unwrap().build().unwrap_err();
        assert!(matches!(err, CliError::Config(ref m) if m.contains("initial.y")), "{err}");
        let pole = SPHERE.replace("1.5707963267948966", "0.0");
        assert!(matches!(ScenarioConfig::from_json(&pole).unwrap().build(), Err(CliError::Config(_))));
        let step = SPHERE.replace("0.001", "-1");
        assert!(matches!(ScenarioConfig::from_json(&step).unwrap().build(), Err(CliError::Config(_))));
        assert!(ScenarioConfig::from_json(r#"{"model": {"kind": "sphere"}, "extra": 1}"#).is_err());
    }
}
