//! Experiment drivers: transition sweeps, spectrum exports, and the
//! two-target focusing simulation.
//!
//! All drivers are deterministic in their master seed: per-point seeds are
//! derived by hashing `(master, point tags)`, points run independently in a
//! work pool, and results are merged in configuration order, so outputs are
//! identical regardless of thread count.

mod focusing;
mod sweep;

pub use focusing::{
    default_n_schedule, run_focusing, FocusConfig, FocusPoint, FocusRecord, DEFAULT_FOCUS_DIM,
    DEFAULT_FOCUS_GRID, DEFAULT_FOCUS_N_MAX, DEFAULT_FOCUS_WEIGHTS,
};
pub use sweep::{
    measure_and_accumulate, run_spectrum, run_sweep, ExperimentRecord, SpectrumRecord, SweepConfig,
};
