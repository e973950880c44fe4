//! The JSON configuration file: one optional section per concern.

use std::path::Path;

use coopsense_core::baselines::{KonStatistic, SvmConfig};
use coopsense_core::dcs::{ArchConfig, TrainConfig};
use coopsense_core::ScenarioConfig;
use serde::{Deserialize, Serialize};

use crate::bench::BenchSpec;
use crate::error::{Error, Result};
use crate::sweep::SweepSpec;

/// Sizes of the generated training and evaluation sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSpec {
    pub n_train: usize,
    pub n_eval: usize,
}

impl Default for DataSpec {
    fn default() -> Self {
        Self { n_train: 200, n_eval: 2000 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: ScenarioConfig,
    pub data: DataSpec,
    pub arch: ArchConfig,
    pub train: TrainConfig,
    pub svm: SvmConfig,
    pub kon_statistic: KonStatistic,
    pub sweep: SweepSpec,
    pub bench: BenchSpec,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: FileConfig = serde_json::from_str(&text).map_err(|e| Error::format(path, e.line(), e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Use `seed` for every random stream the configuration controls.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.scenario.seed = seed;
        self.train.seed = seed;
        self.svm.seed = seed;
        self.sweep.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.arch.validate()?;
        self.train.validate()?;
        if self.data.n_train == 0 || self.data.n_eval == 0 {
            return Err(Error::Invalid("data.n_train and data.n_eval must be positive".into()));
        }
        self.sweep.validate()?;
        Ok(())
    }
}
