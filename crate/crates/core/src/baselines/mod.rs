//! Conventional fusion rules used as reference points: K-out-of-N voting on
//! hard decisions and a linear soft-margin SVM.

mod kon;
mod svm;

pub use kon::{fit_kon, kon_statistic, predict_kon, KonRule, KonStatistic};
pub use svm::{fit_linear_svm, fit_linear_svm_grid, predict_svm, svm_objective, LinearSvmModel, SvmConfig, LAMBDA_GRID};
