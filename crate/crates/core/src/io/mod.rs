//! Serialization: binary container, CSV schemas, and graymap images.

pub mod container;
pub mod csvio;
pub mod pgm;
