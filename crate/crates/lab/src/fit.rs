use coopsense_core::baselines::{fit_kon, fit_linear_svm_grid};
use coopsense_core::dcs::train_permutation_ensemble;
use coopsense_core::{Dataset, Error as CoreError, ReportMode};

use crate::checkpoint::Model;
use crate::error::Result;
use crate::sweep::{Experiment, Method};

/// Bring `ds` to `mode`, thresholding SD reports at `gamma_dbm` when HD is
/// wanted. HD data cannot be turned back into SD.
pub fn as_mode(ds: &Dataset, mode: ReportMode, gamma_dbm: f64) -> Result<Dataset> {
    match (ds.mode, mode) {
        (a, b) if a == b => Ok(ds.clone()),
        (ReportMode::Sd, ReportMode::Hd) => Ok(ds.to_hard(gamma_dbm)?),
        (found, expected) => Err(CoreError::ModeMismatch { expected: expected.name(), found: found.name() }.into()),
    }
}

/// Fit `method` on `train`, converting SD data to HD when needed.
pub fn fit_model(exp: &Experiment, method: Method, train: &Dataset) -> Result<Model> {
    let train = as_mode(train, method.mode(), exp.scenario.gamma_dbm)?;
    Ok(match method {
        Method::DcsSd | Method::DcsHd => Model::Dcs(train_permutation_ensemble(&train, &exp.train, &exp.arch)?.into_best().0),
        Method::Kon => Model::Kon(fit_kon(&train, exp.kon_statistic)?),
        Method::SvmSd | Method::SvmHd => Model::Svm(fit_linear_svm_grid(&train, &exp.svm)?),
    })
}
