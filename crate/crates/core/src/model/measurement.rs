//! Intensity measurement sets and detector noise configuration.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Detector noise model applied to summed intensities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel<T> {
    None,
    /// Additive Gaussian noise with standard deviation `sigma` in intensity
    /// units, applied after the sum over sources.
    AdditiveGaussian { sigma: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig<T> {
    pub model: NoiseModel<T>,
    pub seed: u64,
}

impl<T: Real> NoiseConfig<T> {
    pub fn none() -> Self {
        NoiseConfig {
            model: NoiseModel::None,
            seed: 0,
        }
    }

    pub fn additive_gaussian(sigma: T, seed: u64) -> Result<Self> {
        if !(sigma >= T::zero()) {
            return Err(Error::Config(format!(
                "noise sigma must be non-negative, got {}",
                sigma.to_f64_lossy()
            )));
        }
        Ok(NoiseConfig {
            model: NoiseModel::AdditiveGaussian { sigma },
            seed,
        })
    }

    pub fn is_none(&self) -> bool {
        matches!(self.model, NoiseModel::None)
            || matches!(self.model, NoiseModel::AdditiveGaussian { sigma } if sigma == T::zero())
    }
}

/// `n` measured intensities with provenance.
///
/// Noiseless values are non-negative by construction. With additive noise the
/// stored values may dip below zero; they are kept as-is and `noisy` records
/// that noise was applied.
#[derive(Debug, Clone)]
pub struct MeasurementSet<T> {
    values: Vec<T>,
    noisy: bool,
    noise: NoiseConfig<T>,
    ensemble_id: u64,
    matrix_id: u64,
}

impl<T: Real> MeasurementSet<T> {
    pub fn new(
        values: Vec<T>,
        noisy: bool,
        noise: NoiseConfig<T>,
        ensemble_id: u64,
        matrix_id: u64,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension {
                context: "measurement set",
                expected: 1,
                actual: 0,
            });
        }
        for (index, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if !noisy && *v < T::zero() {
                return Err(Error::Config(format!(
                    "noiseless intensity {index} is negative ({})",
                    v.to_f64_lossy()
                )));
            }
        }
        Ok(MeasurementSet {
            values,
            noisy,
            noise,
            ensemble_id,
            matrix_id,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn noisy(&self) -> bool {
        self.noisy
    }

    pub fn noise(&self) -> &NoiseConfig<T> {
        &self.noise
    }

    pub fn ensemble_id(&self) -> u64 {
        self.ensemble_id
    }

    pub fn matrix_id(&self) -> u64 {
        self.matrix_id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_sigma_is_rejected() {
        assert!(NoiseConfig::additive_gaussian(-0.1f64, 0).is_err());
        assert!(NoiseConfig::additive_gaussian(0.0f64, 0).is_ok());
    }

    #[test]
    fn noiseless_values_must_be_non_negative() {
        let err = MeasurementSet::new(vec![1.0, -0.5], false, NoiseConfig::none(), 0, 0);
        assert!(err.is_err());
        // with the noisy flag, negative values are stored as-is
        let ok = MeasurementSet::new(
            vec![1.0, -0.5],
            true,
            NoiseConfig::additive_gaussian(1.0, 4).unwrap(),
            0,
            0,
        )
        .unwrap();
        assert_eq!(ok.values()[1], -0.5);
        assert!(ok.noisy());
    }
}
