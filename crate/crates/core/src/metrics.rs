//! Detection metrics.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::sensing::{Hypothesis, SensingMatrix};

/// Anything that maps a sensing matrix to an occupancy decision.
pub trait Detector {
    fn decide(&self, m: &SensingMatrix) -> Result<Hypothesis>;
}

impl<D: Detector + ?Sized> Detector for &D {
    fn decide(&self, m: &SensingMatrix) -> Result<Hypothesis> {
        (**self).decide(m)
    }
}

/// Confusion counts indexed `[truth][decision]`.
pub type Confusion = [[usize; 2]; 2];

/// A component is `None` when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub p_fa: Option<f64>,
    pub p_md: Option<f64>,
    pub sensing_error: Option<f64>,
    pub n_h0: usize,
    pub n_h1: usize,
    pub counts: Confusion,
}

impl Metrics {
    pub fn from_counts(counts: Confusion) -> Self {
        let n_h0 = counts[0][0] + counts[0][1];
        let n_h1 = counts[1][0] + counts[1][1];
        let p_fa = (n_h0 > 0).then(|| counts[0][1] as f64 / n_h0 as f64);
        let p_md = (n_h1 > 0).then(|| counts[1][0] as f64 / n_h1 as f64);
        let sensing_error = match (p_fa, p_md) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Self { p_fa, p_md, sensing_error, n_h0, n_h1, counts }
    }

    /// `pairs` yields `(truth, decision)`.
    pub fn from_decisions<I: IntoIterator<Item = (Hypothesis, Hypothesis)>>(pairs: I) -> Self {
        let mut counts = [[0usize; 2]; 2];
        for (truth, decision) in pairs {
            counts[truth.index()][decision.index()] += 1;
        }
        Self::from_counts(counts)
    }

    pub fn total(&self) -> usize {
        self.n_h0 + self.n_h1
    }

    pub fn accuracy(&self) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| (self.counts[0][0] + self.counts[1][1]) as f64 / n as f64)
    }
}

/// Run `detector` over every sample of `eval_set`.
pub fn evaluate<D: Detector + ?Sized>(detector: &D, eval_set: &Dataset) -> Result<Metrics> {
    if eval_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut counts = [[0usize; 2]; 2];
    for s in &eval_set.samples {
        let d = detector.decide(&s.matrix)?;
        counts[s.label.index()][d.index()] += 1;
    }
    Ok(Metrics::from_counts(counts))
}
