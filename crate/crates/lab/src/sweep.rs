//! Parameter sweeps: for every swept value and repetition, generate data,
//! fit each detector, evaluate, then average over repetitions.

use std::fmt::Write as _;

use coopsense_core::baselines::{fit_kon, fit_linear_svm_grid, KonStatistic, SvmConfig};
use coopsense_core::dataset::generate_split;
use coopsense_core::dcs::{train_permutation_ensemble, ArchConfig, TrainConfig};
use coopsense_core::metrics::evaluate;
use coopsense_core::rng::{derive_seed, Lineage};
use coopsense_core::{Dataset, Metrics, ReportMode, ScenarioConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::DataSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "DCS-SD")]
    DcsSd,
    #[serde(rename = "DCS-HD")]
    DcsHd,
    #[serde(rename = "KON")]
    Kon,
    #[serde(rename = "SVM-SD")]
    SvmSd,
    #[serde(rename = "SVM-HD")]
    SvmHd,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::DcsSd, Method::DcsHd, Method::Kon, Method::SvmSd, Method::SvmHd];

    pub fn name(self) -> &'static str {
        match self {
            Method::DcsSd => "DCS-SD",
            Method::DcsHd => "DCS-HD",
            Method::Kon => "KON",
            Method::SvmSd => "SVM-SD",
            Method::SvmHd => "SVM-HD",
        }
    }

    /// The report type the method consumes.
    pub fn mode(self) -> ReportMode {
        match self {
            Method::DcsSd | Method::SvmSd => ReportMode::Sd,
            Method::DcsHd | Method::Kon | Method::SvmHd => ReportMode::Hd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    NoisePsdDbmHz,
    NSu,
    /// Training-set size.
    NSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            param: SweepParam::NoisePsdDbmHz,
            values: vec![-174.0, -169.0, -164.0, -159.0, -154.0],
            methods: Method::ALL.to_vec(),
            repetitions: 5,
            seed: 1,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Invalid("sweep needs at least one value".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Invalid("sweep needs at least one repetition".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Invalid("sweep needs at least one method".into()));
        }
        if matches!(self.param, SweepParam::NSu | SweepParam::NSample)
            && self.values.iter().any(|v| !(v.fract() == 0.0 && *v >= 1.0))
        {
            return Err(Error::Invalid("counts must be positive integers".into()));
        }
        Ok(())
    }
}

/// Everything held fixed while one parameter is swept.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Experiment {
    pub scenario: ScenarioConfig,
    pub data: DataSpec,
    pub arch: ArchConfig,
    pub train: TrainConfig,
    pub svm: SvmConfig,
    pub kon_statistic: KonStatistic,
}

impl Experiment {
    pub fn with_param(&self, param: SweepParam, value: f64) -> Experiment {
        let mut e = self.clone();
        match param {
            SweepParam::NoisePsdDbmHz => e.scenario.noise_psd_dbm_hz = value,
            SweepParam::NSu => e.scenario.n_su = value as usize,
            SweepParam::NSample => e.data.n_train = value as usize,
        }
        e
    }

    /// Point every random stream at `seed`.
    pub fn with_seed(&self, seed: u64) -> Experiment {
        let mut e = self.clone();
        e.scenario.seed = seed;
        e.train.seed = seed;
        e.svm.seed = seed;
        e
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub metrics: Metrics,
    /// DCS only: the identity-order ensemble member on the same evaluation set.
    pub identity_metrics: Option<Metrics>,
}

fn run_method(exp: &Experiment, method: Method, sd: (&Dataset, &Dataset), hd: (&Dataset, &Dataset)) -> Result<MethodOutcome> {
    let (train, eval) = match method.mode() {
        ReportMode::Sd => sd,
        ReportMode::Hd => hd,
    };
    let plain = |metrics| MethodOutcome { metrics, identity_metrics: None };
    Ok(match method {
        Method::DcsSd | Method::DcsHd => {
            let out = train_permutation_ensemble(train, &exp.train, &exp.arch)?;
            let identity_metrics = Some(evaluate(&out.candidates[0].model, eval)?);
            let metrics = evaluate(&out.best_candidate().model, eval)?;
            MethodOutcome { metrics, identity_metrics }
        }
        Method::Kon => plain(evaluate(&fit_kon(train, exp.kon_statistic)?, eval)?),
        Method::SvmSd | Method::SvmHd => plain(evaluate(&fit_linear_svm_grid(train, &exp.svm)?, eval)?),
    })
}

/// Generate one train/eval pair from `exp.scenario.seed` and fit and score
/// each method on it. HD sets are thresholded copies of the SD sets.
pub fn run_point(exp: &Experiment, methods: &[Method]) -> Result<Vec<(Method, Result<MethodOutcome, String>)>> {
    let (tr, ev) = generate_split(&exp.scenario, exp.data.n_train, exp.data.n_eval, ReportMode::Sd, exp.scenario.seed)?;
    let need_hd = methods.iter().any(|m| m.mode() == ReportMode::Hd);
    let (tr_hd, ev_hd) = if need_hd {
        (tr.to_hard(exp.scenario.gamma_dbm)?, ev.to_hard(exp.scenario.gamma_dbm)?)
    } else {
        (tr.header_clone(), ev.header_clone())
    };
    Ok(methods
        .iter()
        .map(|&m| (m, run_method(exp, m, (&tr, &ev), (&tr_hd, &ev_hd)).map_err(|e| e.to_string())))
        .collect())
}

/// Seed of repetition `rep`. Every swept value shares it, so neighbouring
/// points differ only in the swept parameter.
pub fn repetition_seed(sweep_seed: u64, rep: usize) -> u64 {
    derive_seed(derive_seed(sweep_seed, Lineage::Sweep as u64), rep as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub value: f64,
    pub rep: usize,
    /// `Err` holds the diagnostic of a failed data generation.
    pub outcomes: Result<Vec<(Method, Result<MethodOutcome, String>)>, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub param: f64,
    pub method: Method,
    pub p_fa: Option<f64>,
    pub p_md: Option<f64>,
    pub sensing_error: Option<f64>,
    /// Repetitions that produced metrics.
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Ordered by value, then repetition.
    pub points: Vec<PointResult>,
}

pub const CSV_HEADER: &str = "param,method,p_fa,p_md,sensing_error,reps";

fn mean(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = xs.flatten().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl SweepResult {
    /// Outcomes of `method` at `value`, one per successful repetition.
    pub fn outcomes(&self, value: f64, method: Method) -> Vec<&MethodOutcome> {
        self.points
            .iter()
            .filter(|p| p.value == value)
            .filter_map(|p| p.outcomes.as_ref().ok())
            .flat_map(|o| o.iter().filter(|(m, _)| *m == method).filter_map(|(_, r)| r.as_ref().ok()))
            .collect()
    }

    /// Per-(value, method) means over repetitions; a component is averaged
    /// over the repetitions where it is defined and left empty otherwise.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for &value in &self.spec.values {
            for &method in &self.spec.methods {
                let ok = self.outcomes(value, method);
                rows.push(SummaryRow {
                    param: value,
                    method,
                    p_fa: mean(ok.iter().map(|o| o.metrics.p_fa)),
                    p_md: mean(ok.iter().map(|o| o.metrics.p_md)),
                    sensing_error: mean(ok.iter().map(|o| o.metrics.sensing_error)),
                    reps: ok.len(),
                });
            }
        }
        rows
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for p in &self.points {
            match &p.outcomes {
                Err(e) => out.push(format!("value {} rep {}: {e}", p.value, p.rep)),
                Ok(o) => {
                    for (m, r) in o {
                        if let Err(e) = r {
                            out.push(format!("value {} rep {} {}: {e}", p.value, p.rep, m.name()));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in self.summary() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.param,
                r.method.name(),
                fmt(r.p_fa),
                fmt(r.p_md),
                fmt(r.sensing_error),
                r.reps
            );
        }
        s
    }
}

/// Run every (value, repetition) point in parallel. Failures are kept in the
/// result rather than aborting the sweep.
pub fn run_sweep(spec: &SweepSpec, base: &Experiment) -> Result<SweepResult> {
    spec.validate()?;
    let jobs: Vec<(f64, usize)> =
        spec.values.iter().flat_map(|&v| (0..spec.repetitions).map(move |r| (v, r))).collect();
    let points = jobs
        .par_iter()
        .map(|&(value, rep)| {
            let exp = base.with_param(spec.param, value).with_seed(repetition_seed(spec.seed, rep));
            let outcomes = run_point(&exp, &spec.methods).map_err(|e| e.to_string());
            PointResult { value, rep, outcomes }
        })
        .collect();
    Ok(SweepResult { spec: spec.clone(), points })
}
