//! Per-decision inference latency.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use coopsense_core::dataset::generate_split;
use coopsense_core::metrics::Detector;
use coopsense_core::{Dataset, ReportMode};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_model;
use crate::sweep::{Experiment, Method};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSpec {
    pub n_su_values: Vec<usize>,
    pub methods: Vec<Method>,
    pub warmup: usize,
    pub iters: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self { n_su_values: vec![8, 16, 32], methods: Method::ALL.to_vec(), warmup: 100, iters: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyRow {
    pub method: Method,
    pub n_su: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LatencyReport {
    pub rows: Vec<LatencyRow>,
}

pub const LATENCY_HEADER: &str = "method,n_su,mean_ms,median_ms,p95_ms";

impl LatencyReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(LATENCY_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{:.6},{:.6},{:.6}", r.method.name(), r.n_su, r.mean_ms, r.median_ms, r.p95_ms);
        }
        s
    }
}

pub struct BenchEntry<'a> {
    pub method: Method,
    pub detector: &'a dyn Detector,
    /// Evaluation matrices already in the detector's report mode.
    pub eval: &'a Dataset,
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Time `iters` single decisions per entry on the calling thread, cycling
/// through the evaluation set, after `warmup` untimed ones.
pub fn bench_latency(entries: &[BenchEntry<'_>], warmup: usize, iters: usize) -> Result<LatencyReport> {
    if iters == 0 {
        return Err(Error::Invalid("latency benchmark needs at least one timed iteration".into()));
    }
    let mut rows = Vec::with_capacity(entries.len());
    for e in entries {
        let samples = &e.eval.samples;
        if samples.is_empty() {
            return Err(coopsense_core::Error::EmptyDataset.into());
        }
        for i in 0..warmup {
            black_box(e.detector.decide(black_box(&samples[i % samples.len()].matrix))?);
        }
        let mut ms = Vec::with_capacity(iters);
        for i in 0..iters {
            let m = &samples[i % samples.len()].matrix;
            let t = Instant::now();
            black_box(e.detector.decide(black_box(m))?);
            ms.push(t.elapsed().as_secs_f64() * 1e3);
        }
        let mean_ms = ms.iter().sum::<f64>() / iters as f64;
        ms.sort_by(f64::total_cmp);
        rows.push(LatencyRow {
            method: e.method,
            n_su: e.eval.n_su,
            mean_ms,
            median_ms: quantile(&ms, 0.5),
            p95_ms: quantile(&ms, 0.95),
        });
    }
    Ok(LatencyReport { rows })
}

/// Train every method at every SU count and time its decisions.
pub fn run_bench(spec: &BenchSpec, base: &Experiment) -> Result<LatencyReport> {
    let mut report = LatencyReport::default();
    for &n_su in &spec.n_su_values {
        let mut exp = base.clone();
        exp.scenario.n_su = n_su;
        let (tr, ev) = generate_split(&exp.scenario, exp.data.n_train, exp.data.n_eval, ReportMode::Sd, exp.scenario.seed)?;
        let ev_hd = ev.to_hard(exp.scenario.gamma_dbm)?;
        for &method in &spec.methods {
            let model = fit_model(&exp, method, &tr)?;
            let eval = match method.mode() {
                ReportMode::Sd => &ev,
                ReportMode::Hd => &ev_hd,
            };
            let entry = BenchEntry { method, detector: &model, eval };
            report.rows.extend(bench_latency(&[entry], spec.warmup, spec.iters)?.rows);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use coopsense_core::baselines::{KonRule, KonStatistic};
    use coopsense_core::dataset::generate_dataset;
    use coopsense_core::ScenarioConfig;

    fn hd_set() -> Dataset {
        let cfg = ScenarioConfig { n_su: 4, n_bands: 4, n_ed: 4, ..Default::default() };
        generate_dataset(&cfg, 10, ReportMode::Sd, 1).unwrap().to_hard(-107.0).unwrap()
    }

    #[test]
    fn zero_iterations_is_an_error() {
        let ds = hd_set();
        let rule = KonRule { k: 1, statistic: KonStatistic::MaxBandVotes };
        let e = BenchEntry { method: Method::Kon, detector: &rule, eval: &ds };
        assert!(bench_latency(&[e], 5, 0).is_err());
    }

    #[test]
    fn statistics_are_ordered_and_nonnegative() {
        let ds = hd_set();
        let rule = KonRule { k: 1, statistic: KonStatistic::MaxBandVotes };
        let e = BenchEntry { method: Method::Kon, detector: &rule, eval: &ds };
        let r = bench_latency(&[e], 3, 50).unwrap();
        let row = &r.rows[0];
        assert!(row.mean_ms >= 0.0 && row.median_ms >= 0.0 && row.p95_ms >= row.median_ms);
        assert_eq!(row.n_su, 4);
        assert!(r.to_csv().starts_with("method,n_su,mean_ms,median_ms,p95_ms\nKON,4,"));
    }

    #[test]
    fn nearest_rank() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(quantile(&v, 0.5), 10.0);
        assert_eq!(quantile(&v, 0.95), 19.0);
        assert_eq!(quantile(&[3.0], 0.95), 3.0);
    }
}
