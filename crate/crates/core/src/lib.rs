//! Additive synthesis of harmonic complex tones and the analysis needed to
//! tell how many melodic lines such a tone carries.

pub mod analysis;
pub mod error;
pub mod model;
pub mod presets;
pub mod psycho;
pub mod synth;

pub use error::{Error, Result};

/// Version stamped into every JSON document this crate writes.
pub const SCHEMA_VERSION: u32 = 1;
