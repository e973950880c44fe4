//! Trained-model files. One JSON container holds any of the three detector
//! kinds, distinguished by a payload tag.

use std::path::Path;

use coopsense_core::baselines::{KonRule, LinearSvmModel};
use coopsense_core::dcs::CnnModel;
use coopsense_core::metrics::Detector;
use coopsense_core::{Hypothesis, ReportMode, ScenarioConfig, SensingMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", content = "payload", rename_all = "snake_case")]
pub enum Model {
    Dcs(CnnModel),
    Kon(KonRule),
    Svm(LinearSvmModel),
}

impl Model {
    pub fn mode(&self) -> ReportMode {
        match self {
            Model::Dcs(m) => m.mode,
            Model::Kon(_) => ReportMode::Hd,
            Model::Svm(m) => m.mode,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Model::Dcs(_) => "dcs",
            Model::Kon(_) => "kon",
            Model::Svm(_) => "svm",
        }
    }
}

impl Detector for Model {
    fn decide(&self, m: &SensingMatrix) -> coopsense_core::Result<Hypothesis> {
        match self {
            Model::Dcs(d) => d.decide(m),
            Model::Kon(d) => d.decide(m),
            Model::Svm(d) => d.decide(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub version: u32,
    /// Scenario the model was trained under; its threshold converts SD
    /// evaluation data for HD models.
    pub scenario: ScenarioConfig,
    pub model: Model,
}

impl Checkpoint {
    pub fn new(scenario: ScenarioConfig, model: Model) -> Self {
        Self { version: CHECKPOINT_VERSION, scenario, model }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Invalid(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::format(path, e.line(), e))?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == CHECKPOINT_VERSION as u64 => {}
            Some(v) => return Err(Error::Version { path: path.into(), found: v as u32, expected: CHECKPOINT_VERSION }),
            None => return Err(Error::format(path, 1, "checkpoint has no version")),
        }
        let ck: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::format(path, e.line(), e))?;
        if let Model::Dcs(m) = &ck.model {
            m.validate()?;
        }
        Ok(ck)
    }
}
