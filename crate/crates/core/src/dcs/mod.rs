//! Deep cooperative sensing: a CNN that fuses the SU × band sensing matrix
//! into a single PU-presence decision, trained as an ensemble over SU-row
//! permutations.

mod arch;
mod model;
mod train;

pub use arch::ArchConfig;
pub use model::{build_model, count_parameters, CnnModel, Layers, Output};
pub use train::{train, train_permutation_ensemble, Candidate, EnsembleOutcome, EpochRecord, TrainConfig, TrainHistory};
