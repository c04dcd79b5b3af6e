//! Multiplexed phase retrieval via the weighted-covariance spectral method.
//!
//! Several mutually orthogonal complex signals are observed only through
//! weighted sums of their individual intensities,
//! `y_i = Σ_k w_k |a_i^* x_k|^2`, against known random sensing vectors
//! `a_i`. The weighted covariance matrix `Y = (1/n) Σ_i y_i a_i a_i^*`
//! concentrates one eigenvalue spike per source above a noise bulk; its
//! leading eigenvectors recover the signals, brightest source first.
//!
//! The crate provides the domain model ([`model`]), the forward measurement
//! operator ([`forward`]), the spectral recovery machinery ([`spectral`]),
//! evaluation metrics ([`metrics`]), reproducible experiment drivers
//! ([`experiments`]), and file formats ([`io`]).
//!
//! The numeric core is generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the aliases at the crate root fix the default
//! double-precision instantiation.

pub mod error;
pub mod experiments;
pub mod forward;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod seeding;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

/// Default complex scalar.
pub type Complex64 = Cplx<f64>;
/// Double-precision signal vector.
pub type ComplexVector64 = model::ComplexVector<f64>;
/// Double-precision source ensemble.
pub type SourceEnsemble64 = model::SourceEnsemble<f64>;
/// Double-precision mixing matrix.
pub type MixingMatrix64 = model::MixingMatrix<f64>;
/// Double-precision sampling matrix.
pub type SamplingMatrix64 = model::SamplingMatrix<f64>;
/// Double-precision measurement set.
pub type MeasurementSet64 = model::MeasurementSet<f64>;
/// Double-precision weighted covariance matrix.
pub type WeightedCovariance64 = spectral::WeightedCovarianceMatrix<f64>;
/// Double-precision spectral result.
pub type SpectralResult64 = spectral::SpectralResult<f64>;
