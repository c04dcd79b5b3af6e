//! Two-target focusing simulation through a scattering medium.
//!
//! A synthetic transmission matrix maps phase patterns to a camera-plane
//! speckle field. Two camera pixels are designated as targets; their summed
//! intensities (weighted by target brightness) form the only feedback signal,
//! exactly the mixed-intensity measurement model. Recovering the leading
//! eigenvectors of the weighted covariance and displaying their phase
//! refocuses light onto each target separately; focus quality is scored by
//! the signal-to-background ratio against the phase-conjugation control.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::IntensityImage;
use crate::model::{
    generate_row, make_sampling_matrix, ComplexVector, MatrixKind, NoiseConfig, NoiseModel,
    SamplingMatrix,
};
use crate::scalar::{Cplx, Real};
use crate::seeding::derive_seed;
use crate::spectral::{count_spikes, recover, SpikeRule, WcmAccumulator, WCM_CHUNK};

const TAG_MEDIUM: u64 = 20;
const TAG_PATTERNS: u64 = 21;
const TAG_NOISE: u64 = 22;

pub const DEFAULT_FOCUS_DIM: usize = 256;
pub const DEFAULT_FOCUS_GRID: usize = 32;
pub const DEFAULT_FOCUS_N_MAX: usize = 10_000;
pub const DEFAULT_FOCUS_WEIGHTS: [f64; 2] = [1.0, 0.7];

/// Geometric measurement schedule doubling from 512 up to `n_max`.
pub fn default_n_schedule(n_max: usize) -> Vec<usize> {
    let mut schedule = Vec::new();
    let mut n = 512usize;
    while n < n_max {
        schedule.push(n);
        n *= 2;
    }
    schedule.push(n_max);
    schedule
}

/// Configuration of the focusing simulation.
#[derive(Debug, Clone)]
pub struct FocusConfig<T> {
    /// Phase-pattern dimension (number of controlled segments).
    pub d: usize,
    /// Camera grid side length; the medium has `grid²` output pixels.
    pub grid: usize,
    /// Target pixel positions (row, col) on the camera grid.
    pub targets: Vec<(usize, usize)>,
    /// Target brightness weights, not normalized.
    pub weights: Vec<T>,
    /// Measurement counts at which recovery is evaluated, ascending.
    pub n_schedule: Vec<usize>,
    /// Detector noise on the summed intensity.
    pub noise: NoiseModel<T>,
    /// Spike rule for the census flag.
    pub spike_rule: SpikeRule<T>,
    pub seed: u64,
}

impl<T: Real> FocusConfig<T> {
    /// Canonical setup: two targets at deterministic positions, weights
    /// `(1, 0.7)`, geometric schedule.
    pub fn standard(d: usize, grid: usize, n_max: usize, seed: u64) -> Self {
        FocusConfig {
            d,
            grid,
            targets: default_targets(grid),
            weights: DEFAULT_FOCUS_WEIGHTS
                .iter()
                .map(|&w| T::from_f64_lossy(w))
                .collect(),
            n_schedule: default_n_schedule(n_max),
            noise: NoiseModel::None,
            spike_rule: SpikeRule::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.grid == 0 {
            return Err(Error::Config("dimension and grid must be positive".into()));
        }
        if self.targets.is_empty() || self.targets.len() != self.weights.len() {
            return Err(Error::Config(
                "targets and weights must be non-empty and match".into(),
            ));
        }
        for (i, &(r, c)) in self.targets.iter().enumerate() {
            if r >= self.grid || c >= self.grid {
                return Err(Error::Config(format!(
                    "target {i} at ({r}, {c}) outside the {0}x{0} grid",
                    self.grid
                )));
            }
            for &(r2, c2) in &self.targets[..i] {
                if (r, c) == (r2, c2) {
                    return Err(Error::Config(format!("duplicate target ({r}, {c})")));
                }
            }
        }
        for (i, &w) in self.weights.iter().enumerate() {
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::WeightNotPositive {
                    index: i,
                    value: w.to_f64_lossy(),
                });
            }
        }
        let pixels = self.grid * self.grid;
        if pixels.saturating_sub(self.targets.len()) < crate::metrics::MIN_BACKGROUND_PIXELS {
            return Err(Error::EmptyBackground {
                required: crate::metrics::MIN_BACKGROUND_PIXELS,
            });
        }
        if self.n_schedule.is_empty() {
            return Err(Error::Config("measurement schedule is empty".into()));
        }
        let mut prev = 0usize;
        for &n in &self.n_schedule {
            if n == 0 || n <= prev && prev != 0 {
                return Err(Error::Config(
                    "measurement schedule must be positive and strictly ascending".into(),
                ));
            }
            prev = n;
        }
        if let NoiseModel::AdditiveGaussian { sigma } = self.noise {
            if !(sigma >= T::zero()) {
                return Err(Error::Config("noise sigma must be non-negative".into()));
            }
        }
        Ok(())
    }
}

/// Default target positions: one in the upper-left third, one in the
/// lower-right third of the grid.
pub fn default_targets(grid: usize) -> Vec<(usize, usize)> {
    vec![(grid / 3, grid / 3), (2 * grid / 3, 2 * grid / 3)]
}

/// Recovery outcome at one schedule point.
#[derive(Debug, Clone)]
pub struct FocusPoint<T> {
    pub n: usize,
    /// Per-target SBR of the focus formed from the matching eigenvector.
    pub sbr: Vec<T>,
    /// Spike census at this point (flagged when it differs from the target
    /// count).
    pub spike_count: usize,
    pub degenerate_spikes: bool,
}

/// Full outcome of a focusing run.
#[derive(Debug, Clone)]
pub struct FocusRecord<T> {
    pub config: FocusConfig<T>,
    pub points: Vec<FocusPoint<T>>,
    /// Per-target SBR of the perfect-knowledge phase-conjugation control.
    pub control_sbr: Vec<T>,
    /// Focus image per target at the final schedule point.
    pub images: Vec<IntensityImage<T>>,
    /// Target order by descending weight: `estimate j` focuses
    /// `targets[order[j]]`.
    pub target_order: Vec<usize>,
    pub elapsed_ms: u64,
}

/// Projects a complex pattern onto unit modulus per entry (phase-only
/// display); zero entries become 1.
pub fn phase_only_display<T: Real>(v: &ComplexVector<T>) -> ComplexVector<T> {
    let entries = v
        .entries()
        .iter()
        .map(|z| {
            let m = z.norm();
            if m > T::zero() {
                *z / m
            } else {
                Cplx::new(T::one(), T::zero())
            }
        })
        .collect();
    ComplexVector::from_raw(entries)
}

/// Propagates a displayed pattern through the medium and renders the camera
/// intensity image.
fn render_camera<T: Real>(
    medium: &SamplingMatrix<T>,
    grid: usize,
    pattern: &ComplexVector<T>,
) -> IntensityImage<T> {
    let pixels: Vec<T> = (0..medium.n())
        .into_par_iter()
        .map(|p| {
            let row = medium.row(p);
            let mut field = Cplx::new(T::zero(), T::zero());
            for (t, s) in row.iter().zip(pattern.entries()) {
                field += *t * *s;
            }
            field.norm_sqr()
        })
        .collect();
    IntensityImage::new(grid, grid, pixels).expect("camera image dimensions")
}

/// Runs the focusing simulation.
///
/// Pipeline per run: draw the transmission matrix, take the conjugated
/// normalized target rows as ground truth, stream phase-only patterns through
/// the mixed-intensity measurement, and at each schedule point recover the
/// leading eigenvectors, display their phases, and score per-target SBR.
pub fn run_focusing<T: Real>(config: &FocusConfig<T>) -> Result<FocusRecord<T>> {
    config.validate()?;
    let started = Instant::now();

    let grid = config.grid;
    let pixels = grid * grid;
    let k = config.targets.len();

    let medium = make_sampling_matrix::<T>(
        MatrixKind::ComplexGaussian,
        pixels,
        config.d,
        derive_seed(config.seed, &[TAG_MEDIUM]),
    )?;

    // Brightest target first: estimate j focuses targets[order[j]].
    let mut target_order: Vec<usize> = (0..k).collect();
    target_order.sort_by(|&i, &j| config.weights[j].partial_cmp(&config.weights[i]).unwrap());

    // Ground truth: conjugated, normalized transmission rows of the targets.
    let truths: Vec<ComplexVector<T>> = config
        .targets
        .iter()
        .map(|&(r, c)| {
            ComplexVector::from_raw(medium.row(r * grid + c).to_vec())
                .conjugated()
                .normalized()
        })
        .collect::<Result<Vec<_>>>()?;

    let noise = match config.noise {
        NoiseModel::None => NoiseConfig::none(),
        NoiseModel::AdditiveGaussian { sigma } => NoiseConfig {
            model: NoiseModel::AdditiveGaussian { sigma },
            seed: derive_seed(config.seed, &[TAG_NOISE]),
        },
    };
    let pattern_seed = derive_seed(config.seed, &[TAG_PATTERNS]);

    // Stream the measurement prefix shared by all schedule points.
    let mut acc = WcmAccumulator::new(config.d)?;
    let mut points = Vec::with_capacity(config.n_schedule.len());
    let mut final_images: Vec<IntensityImage<T>> = Vec::new();
    let n_max = *config.n_schedule.last().unwrap();

    for &n in &config.n_schedule {
        let from = acc.n_accumulated();
        extend_accumulator(
            &mut acc,
            &truths,
            &config.weights,
            pattern_seed,
            &noise,
            from,
            n,
        )?;

        let wcm = acc
            .clone()
            .finalize()?
            .with_kind(MatrixKind::PhaseOnly)
            .with_provenance(crate::model::sampling_id(
                MatrixKind::PhaseOnly,
                n,
                config.d,
                pattern_seed,
            ));
        let result = recover(&wcm, Some(k))?;
        let census = count_spikes(
            &result.eigenvalues,
            &config.spike_rule,
            Some(&wcm.spike_context()),
        );

        let mut sbr_per_target = vec![T::zero(); k];
        let mut images_now = Vec::with_capacity(k);
        for (rank, &target_idx) in target_order.iter().enumerate() {
            let display = phase_only_display(&result.estimates[rank]);
            let image = render_camera(&medium, grid, &display);
            let ratios = crate::metrics::sbr(&image, &config.targets)?;
            sbr_per_target[target_idx] = ratios[target_idx];
            images_now.push(image);
        }
        if n == n_max {
            // Reorder so images[i] is the focus on targets[i].
            let mut by_target: Vec<Option<IntensityImage<T>>> = vec![None; k];
            for (rank, &target_idx) in target_order.iter().enumerate() {
                by_target[target_idx] = Some(images_now[rank].clone());
            }
            final_images = by_target.into_iter().map(|i| i.unwrap()).collect();
        }

        points.push(FocusPoint {
            n,
            sbr: sbr_per_target,
            spike_count: census,
            degenerate_spikes: result.degenerate_spikes,
        });
    }

    // Perfect-knowledge control: display the phase of the truth directly.
    let control_sbr: Vec<T> = config
        .targets
        .iter()
        .enumerate()
        .map(|(t, _)| {
            let display = phase_only_display(&truths[t]);
            let image = render_camera(&medium, grid, &display);
            Ok(crate::metrics::sbr(&image, &config.targets)?[t])
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(FocusRecord {
        config: config.clone(),
        points,
        control_sbr,
        images: final_images,
        target_order,
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

/// Accumulates measurements `from..to` of the shared pattern stream, chunked
/// deterministically.
fn extend_accumulator<T: Real>(
    acc: &mut WcmAccumulator<T>,
    truths: &[ComplexVector<T>],
    weights: &[T],
    pattern_seed: u64,
    noise: &NoiseConfig<T>,
    from: usize,
    to: usize,
) -> Result<()> {
    use rand::SeedableRng;
    let d = acc.d();
    let chunks: Vec<(usize, usize)> = (from..to)
        .step_by(WCM_CHUNK)
        .map(|lo| (lo, (lo + WCM_CHUNK).min(to)))
        .collect();
    let partials: Vec<Result<WcmAccumulator<T>>> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut part = WcmAccumulator::new(d)?;
            let mut row = vec![Cplx::new(T::zero(), T::zero()); d];
            for i in lo..hi {
                generate_row(MatrixKind::PhaseOnly, pattern_seed, i, &mut row);
                let mut y = crate::forward::intensity(truths, weights, &row);
                if let NoiseModel::AdditiveGaussian { sigma } = noise.model {
                    if sigma > T::zero() {
                        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(noise.seed);
                        rng.set_stream(i as u64);
                        y += T::standard_normal(&mut rng) * sigma;
                    }
                }
                part.push(y, &row);
            }
            Ok(part)
        })
        .collect();
    for partial in partials {
        acc.merge(&partial?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_shape() {
        assert_eq!(default_n_schedule(10_000), vec![512, 1024, 2048, 4096, 8192, 10_000]);
        assert_eq!(default_n_schedule(512), vec![512]);
        assert_eq!(default_n_schedule(100), vec![100]);
        assert_eq!(default_n_schedule(1024), vec![512, 1024]);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut c = FocusConfig::<f64>::standard(32, 8, 600, 1);
        c.targets[1] = c.targets[0];
        assert!(c.validate().is_err());

        let mut c = FocusConfig::<f64>::standard(32, 8, 600, 1);
        c.targets[1] = (9, 0);
        assert!(c.validate().is_err());

        // 2x2 grid with 2 targets leaves only 2 background pixels
        let c = FocusConfig::<f64>::standard(32, 2, 600, 1);
        assert!(matches!(c.validate(), Err(Error::EmptyBackground { .. })));

        let mut c = FocusConfig::<f64>::standard(32, 8, 600, 1);
        c.n_schedule = vec![500, 500];
        assert!(c.validate().is_err());

        let mut c = FocusConfig::<f64>::standard(32, 8, 600, 1);
        c.weights = vec![1.0, -0.7];
        assert!(c.validate().is_err());
    }

    #[test]
    fn phase_only_display_has_unit_modulus() {
        let v = ComplexVector::<f64>::new(vec![
            Cplx::new(3.0, -4.0),
            Cplx::new(0.0, 0.0),
            Cplx::new(-0.1, 0.0),
        ])
        .unwrap();
        let s = phase_only_display(&v);
        for z in s.entries() {
            assert!((z.norm() - 1.0).abs() < 1e-14);
        }
        // zero entry becomes 1
        assert_eq!(s.entries()[1], Cplx::new(1.0, 0.0));
        // phase is preserved
        assert!((s.entries()[0] - Cplx::new(0.6, -0.8)).norm() < 1e-14);
    }

    #[test]
    fn small_focusing_run_focuses_on_targets() {
        // modest size: d=64, 16x16 camera, up to 2048 measurements
        let config = FocusConfig::<f64>::standard(64, 16, 2048, 11);
        let record = run_focusing(&config).unwrap();
        assert_eq!(record.points.len(), config.n_schedule.len());

        // control is the phase-conjugation ceiling, about pi/4 (d-1) + 1
        let want = std::f64::consts::FRAC_PI_4 * 63.0 + 1.0;
        for (t, &c) in record.control_sbr.iter().enumerate() {
            assert!(
                (c - want).abs() / want < 0.35,
                "control sbr {c} vs {want} (target {t})"
            );
        }

        // at the final point both targets are focused far above background
        let last = record.points.last().unwrap();
        for (t, &s) in last.sbr.iter().enumerate() {
            assert!(s > 10.0, "target {t} sbr {s}");
            assert!(
                s <= record.control_sbr[t] * 1.25,
                "recovered focus cannot beat the control by a margin: {s} vs {}",
                record.control_sbr[t]
            );
        }

        // each final image is brightest at its own target
        for (t, img) in record.images.iter().enumerate() {
            assert_eq!(img.argmax(), config.targets[t], "image {t} brightest pixel");
        }
    }
}
