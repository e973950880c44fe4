use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::Detector;
use crate::sensing::{Hypothesis, ReportMode, SensingMatrix};

/// How SU votes are aggregated over bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KonStatistic {
    /// Largest per-band number of SUs reporting 1 (per-band K-out-of-N, OR-ed over bands).
    #[default]
    MaxBandVotes,
    /// Number of 1s anywhere in the matrix.
    TotalOnes,
}

impl KonStatistic {
    fn max_value(self, n_su: usize, n_bands: usize) -> usize {
        match self {
            KonStatistic::MaxBandVotes => n_su,
            KonStatistic::TotalOnes => n_su * n_bands,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KonRule {
    pub k: usize,
    pub statistic: KonStatistic,
}

pub fn kon_statistic(hd: &SensingMatrix, statistic: KonStatistic) -> Result<usize> {
    hd.require(ReportMode::Hd)?;
    let ones = |v: &f64| *v == 1.0;
    Ok(match statistic {
        KonStatistic::TotalOnes => hd.values.iter().filter(|v| ones(v)).count(),
        KonStatistic::MaxBandVotes => (0..hd.n_bands)
            .map(|b| (0..hd.n_su).filter(|&s| ones(&hd.values[s * hd.n_bands + b])).count())
            .max()
            .unwrap_or(0),
    })
}

/// Declare H1 when the statistic reaches `k`.
pub fn predict_kon(rule: &KonRule, hd: &SensingMatrix) -> Result<Hypothesis> {
    Ok(Hypothesis::from_active(kon_statistic(hd, rule.statistic)? >= rule.k))
}

/// Pick `k` minimizing empirical `P_FA + P_MD` by exhaustive scan; ties go to
/// the smallest `k`.
pub fn fit_kon(train: &Dataset, statistic: KonStatistic) -> Result<KonRule> {
    if train.mode != ReportMode::Hd {
        return Err(Error::ModeMismatch { expected: "HD", found: train.mode.name() });
    }
    if !train.has_both_labels() {
        return Err(Error::SingleLabel);
    }
    let k_max = statistic.max_value(train.n_su, train.n_bands);
    // histogram of statistic values per class
    let mut hist = [alloc::vec![0usize; k_max + 1], alloc::vec![0usize; k_max + 1]];
    for s in &train.samples {
        let t = kon_statistic(&s.matrix, statistic)?;
        hist[s.label.index()][t.min(k_max)] += 1;
    }
    let n0 = train.count(Hypothesis::H0) as f64;
    let n1 = train.count(Hypothesis::H1) as f64;
    // false alarms for k: H0 samples with t >= k; misses: H1 samples with t < k
    let mut fa_at: Vec<usize> = alloc::vec![0; k_max + 2];
    for k in (0..=k_max).rev() {
        fa_at[k] = fa_at[k + 1] + hist[0][k];
    }
    let mut best = (f64::INFINITY, 0);
    let mut misses = 0usize;
    for k in 0..=k_max {
        let err = fa_at[k] as f64 / n0 + misses as f64 / n1;
        if err < best.0 {
            best = (err, k);
        }
        misses += hist[1][k];
    }
    Ok(KonRule { k: best.1, statistic })
}

impl Detector for KonRule {
    fn decide(&self, m: &SensingMatrix) -> Result<Hypothesis> {
        predict_kon(self, m)
    }
}
