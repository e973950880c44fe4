//! Labeled sensing datasets generated along a mobility trajectory, and the
//! input standardization used by the learned detectors.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Deployment, ScenarioConfig};
use crate::error::{Error, Result};
use crate::math;
use crate::rng::{self, Lineage};
use crate::sensing::{self, Hypothesis, ReportMode, SensingMatrix};
use crate::sim;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub matrix: SensingMatrix,
    pub label: Hypothesis,
    pub snapshot_index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub scenario: ScenarioConfig,
    pub mode: ReportMode,
    pub n_su: usize,
    pub n_bands: usize,
    pub samples: Vec<LabeledSample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = Hypothesis> + '_ {
        self.samples.iter().map(|s| s.label)
    }

    pub fn count(&self, label: Hypothesis) -> usize {
        self.labels().filter(|&l| l == label).count()
    }

    pub fn has_both_labels(&self) -> bool {
        self.count(Hypothesis::H0) > 0 && self.count(Hypothesis::H1) > 0
    }

    /// Check shared mode/dimensions, per-mode value domains, and strictly
    /// increasing snapshot indices.
    pub fn validate(&self) -> Result<()> {
        let mut prev: Option<u64> = None;
        for s in &self.samples {
            if s.matrix.mode != self.mode {
                return Err(Error::ModeMismatch { expected: self.mode.name(), found: s.matrix.mode.name() });
            }
            if s.matrix.dims() != (self.n_su, self.n_bands) || s.matrix.values.len() != self.n_su * self.n_bands {
                return Err(Error::Shape(alloc::format!(
                    "sample {} is {}×{}, dataset is {}×{}",
                    s.snapshot_index, s.matrix.n_su, s.matrix.n_bands, self.n_su, self.n_bands
                )));
            }
            s.matrix.check()?;
            if prev.is_some_and(|p| s.snapshot_index <= p) {
                return Err(Error::InvalidArgument("snapshot indices must strictly increase".into()));
            }
            prev = Some(s.snapshot_index);
        }
        Ok(())
    }

    /// Hard-decide every SD sample with threshold `gamma_dbm`.
    pub fn to_hard(&self, gamma_dbm: f64) -> Result<Dataset> {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                Ok(LabeledSample {
                    matrix: sensing::hard_decision(&s.matrix, gamma_dbm)?,
                    label: s.label,
                    snapshot_index: s.snapshot_index,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset { mode: ReportMode::Hd, samples, ..self.header_clone() })
    }

    /// Dataset with the given subset of samples, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let samples = indices.iter().map(|&i| self.samples[i].clone()).collect();
        Dataset { samples, ..self.header_clone() }
    }

    /// Same scenario, mode and dimensions with no samples.
    pub fn header_clone(&self) -> Dataset {
        Dataset {
            scenario: self.scenario.clone(),
            mode: self.mode,
            n_su: self.n_su,
            n_bands: self.n_bands,
            samples: Vec::new(),
        }
    }
}

/// Generate snapshots `start..start + n` of the trajectory seeded by `seed`.
///
/// Snapshot `i` draws everything (mobility step, PU state, shadowing,
/// channel samples) from stream `(seed, Snapshot, i)`, so ranges of one
/// trajectory never share a stream and can be generated separately.
pub fn generate_range(cfg: &ScenarioConfig, start: u64, n: usize, mode: ReportMode, seed: u64) -> Result<Dataset> {
    cfg.validate()?;
    let mut topo = sim::init_topology(cfg, &mut rng::stream(seed, Lineage::Topology, 0));
    let mut samples = Vec::with_capacity(n);
    let end = start + n as u64;
    for i in 0..end {
        let mut rng = rng::stream(seed, Lineage::Snapshot, i);
        topo = match cfg.deployment {
            Deployment::Trajectory => sim::step_mobility(&topo, cfg, &mut rng),
            Deployment::Redeploy => sim::init_topology(cfg, &mut rng),
        };
        if i < start {
            continue;
        }
        let pu = sim::sample_pu_state(cfg, &mut rng);
        let shadow = sim::sample_shadow_field(&topo.su_positions, cfg, &mut rng)?;
        let sd = sensing::sense_snapshot(&topo, &pu, &shadow, cfg, &mut rng)?;
        let matrix = match mode {
            ReportMode::Sd => sd,
            ReportMode::Hd => sensing::hard_decision(&sd, cfg.gamma_dbm)?,
        };
        samples.push(LabeledSample { matrix, label: Hypothesis::from_active(pu.active), snapshot_index: i });
    }
    Ok(Dataset { scenario: cfg.clone(), mode, n_su: cfg.n_su, n_bands: cfg.n_bands, samples })
}

/// `n_samples` consecutive snapshots from the start of the trajectory.
pub fn generate_dataset(cfg: &ScenarioConfig, n_samples: usize, mode: ReportMode, seed: u64) -> Result<Dataset> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    generate_range(cfg, 0, n_samples, mode, seed)
}

/// Training set followed by an evaluation set continuing the same trajectory.
pub fn generate_split(
    cfg: &ScenarioConfig,
    n_train: usize,
    n_eval: usize,
    mode: ReportMode,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if n_train == 0 || n_eval == 0 {
        return Err(Error::InvalidArgument("train and eval sizes must be at least 1".into()));
    }
    let mut all = generate_range(cfg, 0, n_train + n_eval, mode, seed)?;
    let eval_samples = all.samples.split_off(n_train);
    let eval = Dataset { samples: eval_samples, ..all.header_clone() };
    Ok((all, eval))
}

/// Split indices into (train, validation) keeping the H0/H1 ratio.
/// Each class with at least two members contributes at least one
/// validation sample and keeps at least one training sample.
pub fn stratified_split<R: Rng + ?Sized>(labels: &[Hypothesis], val_fraction: f64, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in [Hypothesis::H0, Hypothesis::H1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(rng);
        let n = idx.len();
        let mut n_val = libm::round(n as f64 * val_fraction) as usize;
        if n >= 2 {
            n_val = n_val.clamp(1, n - 1);
        } else {
            n_val = 0;
        }
        val.extend_from_slice(&idx[..n_val]);
        train.extend_from_slice(&idx[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

/// Scale in which SD energies are standardized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardizerDomain {
    /// Energies converted to dBm first.
    DbScale,
}

/// Global affine standardization of SD reports, fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: f64,
    pub std: f64,
    pub domain: StandardizerDomain,
}

impl Standardizer {
    pub fn fit(train: &Dataset) -> Result<Self> {
        if train.mode != ReportMode::Sd {
            return Err(Error::ModeMismatch { expected: "SD", found: train.mode.name() });
        }
        let n = (train.len() * train.n_su * train.n_bands) as f64;
        if n == 0.0 {
            return Err(Error::EmptyDataset);
        }
        let db = || train.samples.iter().flat_map(|s| s.matrix.values.iter().map(|&v| math::watts_to_dbm(v)));
        let mean = db().sum::<f64>() / n;
        let var = db().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let std = math::sqrt(var);
        if !(std > 0.0) || !std.is_finite() {
            return Err(Error::ZeroVariance);
        }
        Ok(Self { mean, std, domain: StandardizerDomain::DbScale })
    }

    /// Standardized feature values, row-major. HD reports pass through.
    pub fn apply(&self, m: &SensingMatrix) -> Vec<f64> {
        match m.mode {
            ReportMode::Hd => m.values.clone(),
            ReportMode::Sd => m.values.iter().map(|&v| (math::watts_to_dbm(v) - self.mean) / self.std).collect(),
        }
    }
}

/// Apply an optional standardizer; HD inputs never need one.
pub fn features(standardizer: Option<&Standardizer>, m: &SensingMatrix) -> Vec<f64> {
    match standardizer {
        Some(s) => s.apply(m),
        None => m.values.clone(),
    }
}
