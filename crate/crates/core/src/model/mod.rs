//! Domain types: signals, ensembles, sampling matrices, measurements.

mod ensemble;
mod measurement;
mod sampling;
mod vector;

pub use ensemble::{
    make_ensemble, make_ensemble_with, mixing_matrix, EnsembleOptions, MixingMatrix,
    SourceEnsemble, DEFAULT_WEIGHT_GAP,
};
pub use measurement::{MeasurementSet, NoiseConfig, NoiseModel};
pub use sampling::{
    generate_row, make_sampling_matrix, sampling_id, MatrixKind, SamplingMatrix,
    MAX_SAMPLING_ENTRIES,
};
pub use vector::ComplexVector;
