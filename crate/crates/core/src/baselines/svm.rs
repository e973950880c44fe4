use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{features, stratified_split, Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::metrics::Detector;
use crate::rng::{self, Lineage};
use crate::sensing::{Hypothesis, ReportMode, SensingMatrix};

/// Regularization strengths tried by [`fit_linear_svm_grid`].
pub const LAMBDA_GRID: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];

/// Linear classifier `H1 ⇔ w·x + b ≥ 0` over the flattened (and, for SD,
/// standardized) sensing matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub mode: ReportMode,
    pub standardizer: Option<Standardizer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub lambda_grid: Vec<f64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { lambda_grid: LAMBDA_GRID.to_vec(), epochs: 50, batch_size: 16, validation_fraction: 0.2, seed: 0 }
    }
}

fn label_sign(h: Hypothesis) -> f64 {
    match h {
        Hypothesis::H0 => -1.0,
        Hypothesis::H1 => 1.0,
    }
}

#[inline]
fn margin(w: &[f64], b: f64, x: &[f64]) -> f64 {
    b + w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
}

/// `λ/2·(‖w‖² + b²) + mean(max(0, 1 - y(w·x + b)))`. The bias is the weight of
/// a constant unit feature and is regularized with the rest.
pub fn svm_objective(w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[f64], lambda: f64) -> f64 {
    let reg = 0.5 * lambda * (w.iter().map(|v| v * v).sum::<f64>() + b * b);
    let hinge: f64 = xs.iter().zip(ys).map(|(x, y)| (1.0 - y * margin(w, b, x)).max(0.0)).sum();
    reg + hinge / xs.len() as f64
}

/// Mini-batch primal sub-gradient descent (Pegasos step `1/(λt)`, no
/// projection). Returns the average of all iterates.
fn solve(xs: &[Vec<f64>], ys: &[f64], lambda: f64, epochs: usize, batch: usize, seed: u64) -> (Vec<f64>, f64) {
    let d = xs[0].len();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut w_avg = vec![0.0; d];
    let mut b_avg = 0.0;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = rng::stream(seed, Lineage::Svm, 0);
    let mut t = 0u64;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let violators: Vec<usize> = chunk.iter().copied().filter(|&i| ys[i] * margin(&w, b, &xs[i]) < 1.0).collect();
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            b *= shrink;
            let step = eta / chunk.len() as f64;
            for i in violators {
                for (wj, xj) in w.iter_mut().zip(&xs[i]) {
                    *wj += step * ys[i] * xj;
                }
                b += step * ys[i];
            }
            let a = 1.0 / t as f64;
            for (m, v) in w_avg.iter_mut().zip(&w) {
                *m += a * (v - *m);
            }
            b_avg += a * (b - b_avg);
        }
    }
    (w_avg, b_avg)
}

fn design(ds: &Dataset, standardizer: Option<&Standardizer>) -> (Vec<Vec<f64>>, Vec<f64>) {
    let xs = ds.samples.iter().map(|s| features(standardizer, &s.matrix)).collect();
    let ys = ds.labels().map(label_sign).collect();
    (xs, ys)
}

/// Fit a linear SVM with a fixed `lambda`. SD inputs are standardized with
/// statistics from `train`.
pub fn fit_linear_svm(train: &Dataset, lambda: f64, epochs: usize, seed: u64) -> Result<LinearSvmModel> {
    fit_with(train, lambda, &SvmConfig { epochs, seed, ..Default::default() })
}

fn fit_with(train: &Dataset, lambda: f64, cfg: &SvmConfig) -> Result<LinearSvmModel> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !train.has_both_labels() {
        return Err(Error::SingleLabel);
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("lambda must be positive, got {lambda}")));
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("SVM needs at least one epoch and a positive batch size".into()));
    }
    let standardizer = match train.mode {
        ReportMode::Sd => Some(Standardizer::fit(train)?),
        ReportMode::Hd => None,
    };
    let (xs, ys) = design(train, standardizer.as_ref());
    let (weights, bias) = solve(&xs, &ys, lambda, cfg.epochs, cfg.batch_size, cfg.seed);
    Ok(LinearSvmModel { weights, bias, lambda, mode: train.mode, standardizer })
}

/// Choose λ from `cfg.lambda_grid` by error on a stratified validation split,
/// then refit on all of `train` (smallest λ wins ties).
pub fn fit_linear_svm_grid(train: &Dataset, cfg: &SvmConfig) -> Result<LinearSvmModel> {
    if cfg.lambda_grid.is_empty() {
        return Err(Error::InvalidArgument("empty lambda grid".into()));
    }
    if !train.has_both_labels() {
        return Err(Error::SingleLabel);
    }
    let labels: Vec<Hypothesis> = train.labels().collect();
    let (tr_idx, val_idx) =
        stratified_split(&labels, cfg.validation_fraction, &mut rng::stream(cfg.seed, Lineage::Split, 0));
    let tr = train.subset(&tr_idx);
    let val = train.subset(&val_idx);
    let mut best = (f64::INFINITY, cfg.lambda_grid[0]);
    if tr.has_both_labels() && !val.is_empty() {
        for &lambda in &cfg.lambda_grid {
            let m = fit_with(&tr, lambda, cfg)?;
            let errors = val
                .samples
                .iter()
                .map(|s| predict_svm(&m, &s.matrix).map(|d| usize::from(d != s.label)))
                .sum::<Result<usize>>()?;
            let err = errors as f64 / val.len() as f64;
            if err < best.0 {
                best = (err, lambda);
            }
        }
    }
    fit_with(train, best.1, cfg)
}

pub fn predict_svm(model: &LinearSvmModel, m: &SensingMatrix) -> Result<Hypothesis> {
    m.require(model.mode)?;
    let x = features(model.standardizer.as_ref(), m);
    if x.len() != model.weights.len() {
        return Err(Error::Shape(alloc::format!(
            "SVM has {} weights, matrix has {} entries",
            model.weights.len(),
            x.len()
        )));
    }
    Ok(Hypothesis::from_active(margin(&model.weights, model.bias, &x) >= 0.0))
}

impl Detector for LinearSvmModel {
    fn decide(&self, m: &SensingMatrix) -> Result<Hypothesis> {
        predict_svm(self, m)
    }
}
