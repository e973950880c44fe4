use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::model::{build_model, CnnModel};
use super::ArchConfig;
use crate::dataset::{stratified_split, Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::neural::{adam_step, cross_entropy, softmax_from_logits, AdamConfig, AdamState, Tensor};
use crate::rng::{self, Lineage};
use crate::sensing::{Hypothesis, ReportMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Ensemble size; candidate 0 always keeps the identity SU order.
    pub n_permutations: usize,
    pub validation_fraction: f64,
    /// Stop after this many epochs without a better validation accuracy.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            batch_size: 32,
            adam: AdamConfig::default(),
            n_permutations: 9,
            validation_fraction: 0.2,
            patience: 30,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be positive".into()));
        }
        if self.n_permutations == 0 {
            return Err(Error::InvalidArgument("n_permutations must be at least 1".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidArgument("validation_fraction must lie in (0, 1)".into()));
        }
        if !(self.adam.lr > 0.0) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept, if any training happened.
    pub best_epoch: Option<usize>,
}

impl TrainHistory {
    pub fn best_val_accuracy(&self) -> Option<f64> {
        self.best_epoch.map(|e| self.epochs[e - 1].val_accuracy)
    }
}

fn prepared(model: &CnnModel, ds: &Dataset) -> Result<Vec<(Tensor, Hypothesis)>> {
    ds.samples.iter().map(|s| Ok((model.prepare_input(&s.matrix)?, s.label))).collect()
}

fn score(model: &CnnModel, data: &[(Tensor, Hypothesis)]) -> Result<(f64, f64)> {
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (x, y) in data {
        let probs = softmax_from_logits(model.logits(x)?);
        loss += cross_entropy(probs, *y).0;
        let decision = super::Output::from_probs(probs).decision;
        correct += usize::from(decision == *y);
    }
    let n = data.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

/// Mini-batch Adam on cross-entropy. Returns the parameters with the best
/// validation accuracy (validation loss breaks ties) and the per-epoch log.
///
/// SD models without a standardizer get one fitted on `train_set`.
/// `stream_index` selects the shuffling stream so that ensemble members do
/// not share one.
pub fn train(
    model: &CnnModel,
    train_set: &Dataset,
    val_set: &Dataset,
    tc: &TrainConfig,
    stream_index: u64,
) -> Result<(CnnModel, TrainHistory)> {
    tc.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if train_set.mode != val_set.mode || (train_set.n_su, train_set.n_bands) != (val_set.n_su, val_set.n_bands) {
        return Err(Error::Shape("training and validation sets differ in mode or size".into()));
    }
    let mut model = model.clone();
    model.mode = train_set.mode;
    if model.mode == ReportMode::Sd && model.standardizer.is_none() {
        model.standardizer = Some(Standardizer::fit(train_set)?);
    }
    if tc.epochs == 0 {
        return Ok((model, TrainHistory::default()));
    }
    let train_data = prepared(&model, train_set)?;
    let val_data = prepared(&model, val_set)?;

    let block_sizes: Vec<usize> = model.layers.blocks().iter().map(|b| b.len()).collect();
    let mut adam = AdamState::new(tc.adam, &block_sizes);
    let mut shuffle = rng::stream(tc.seed, Lineage::Shuffle, stream_index);
    let mut order: Vec<usize> = (0..train_data.len()).collect();

    let mut history = TrainHistory::default();
    let mut best: Option<(f64, f64, CnnModel)> = None;
    let mut since_best = 0usize;

    for epoch in 1..=tc.epochs {
        order.shuffle(&mut shuffle);
        let mut epoch_loss = 0.0;
        let mut correct = 0usize;
        for (b, batch) in order.chunks(tc.batch_size).enumerate() {
            let mut grads = model.layers.zeros_like();
            for &i in batch {
                let (x, y) = &train_data[i];
                let cache = model.forward_cached(x)?;
                let probs = softmax_from_logits(cache.logits);
                let (loss, dlogits) = cross_entropy(probs, *y);
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss { epoch, batch: b });
                }
                epoch_loss += loss;
                correct += usize::from(super::Output::from_probs(probs).decision == *y);
                grads.add_assign(&model.backward(&cache, dlogits)?);
            }
            grads.scale(1.0 / batch.len() as f64);
            adam_step(&mut model.layers.blocks_mut(), &grads.blocks(), &mut adam)?;
        }
        let n = train_data.len() as f64;
        let (val_loss, val_accuracy) = score(&model, &val_data)?;
        if !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, batch: usize::MAX });
        }
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: epoch_loss / n,
            train_accuracy: correct as f64 / n,
            val_loss,
            val_accuracy,
        });
        let (better_acc, better_loss) = match &best {
            None => (true, true),
            Some((acc, loss, _)) => (val_accuracy > *acc, val_accuracy == *acc && val_loss < *loss),
        };
        if better_acc || better_loss {
            best = Some((val_accuracy, val_loss, model.clone()));
            history.best_epoch = Some(epoch);
        }
        // Patience counts epochs without a validation accuracy gain.
        if better_acc {
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= tc.patience {
                break;
            }
        }
    }
    let (_, _, best_model) = best.expect("at least one epoch ran");
    Ok((best_model, history))
}

/// One trained member of the permutation ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub model: CnnModel,
    pub history: TrainHistory,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutcome {
    pub best: usize,
    pub candidates: Vec<Candidate>,
}

impl EnsembleOutcome {
    pub fn best_candidate(&self) -> &Candidate {
        &self.candidates[self.best]
    }

    pub fn into_best(mut self) -> (CnnModel, TrainHistory) {
        let c = self.candidates.swap_remove(self.best);
        (c.model, c.history)
    }
}

/// Train `tc.n_permutations` CNNs, each on a different SU-row order of the
/// same stratified train/validation split, and keep the most accurate one on
/// validation (lowest index on ties). Candidate 0 uses the identity order.
///
/// Candidate `c` draws its order, initialization and shuffling from streams
/// indexed by `c`, so it is identical whatever the ensemble size.
pub fn train_permutation_ensemble(train_set: &Dataset, tc: &TrainConfig, arch: &ArchConfig) -> Result<EnsembleOutcome> {
    tc.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    train_set.validate()?;
    let standardizer = match train_set.mode {
        ReportMode::Sd => Some(Standardizer::fit(train_set)?),
        ReportMode::Hd => None,
    };
    let labels: Vec<Hypothesis> = train_set.labels().collect();
    let (tr_idx, val_idx) =
        stratified_split(&labels, tc.validation_fraction, &mut rng::stream(tc.seed, Lineage::Split, 0));
    if tr_idx.is_empty() || val_idx.is_empty() {
        return Err(Error::InvalidArgument("training set too small for a validation split".into()));
    }
    let tr = train_set.subset(&tr_idx);
    let val = train_set.subset(&val_idx);
    let dims = (train_set.n_su, train_set.n_bands);

    let mut candidates = Vec::with_capacity(tc.n_permutations);
    for c in 0..tc.n_permutations as u64 {
        let mut perm: Vec<usize> = (0..dims.0).collect();
        if c > 0 {
            perm.shuffle(&mut rng::stream(tc.seed, Lineage::Permutation, c));
        }
        let mut model = build_model(arch, dims, &mut rng::stream(tc.seed, Lineage::Init, c))?;
        model.mode = train_set.mode;
        model.su_permutation = perm;
        model.standardizer = standardizer.clone();
        let (model, history) = train(&model, &tr, &val, tc, c)?;
        let val_accuracy = history.best_val_accuracy().unwrap_or(0.0);
        candidates.push(Candidate { model, history, val_accuracy });
    }
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.val_accuracy > candidates[best].val_accuracy {
            best = i;
        }
    }
    Ok(EnsembleOutcome { best, candidates })
}
