//! Harmonic content types and the per-frame transforms that turn
//! log-magnitudes into synthesis amplitudes.

mod control;
mod resample;
mod transform;
mod types;

pub use control::ControlData;
pub use resample::Resample;
pub use transform::{
    entropy, harmonic_variation_transform, odd_even_balance, truncate_harmonics, DB_TO_NEPER,
};
pub use types::{
    AmplitudeFrame, F0Trajectory, HarmonicFrameSequence, SynthParams, DB_FLOOR, F0_MAX_HZ,
    F0_MIN_HZ, SUPPORTED_SAMPLE_RATES,
};

use crate::error::Result;

/// Runs the full per-frame chain (softmax, odd/even balance, truncation)
/// over a frame sequence.
pub fn amplitude_frames(
    frames: &HarmonicFrameSequence,
    params: &SynthParams,
) -> Result<Vec<AmplitudeFrame>> {
    frames
        .frames
        .iter()
        .map(|m| {
            let a = harmonic_variation_transform(m, params.harmonic_variation)?;
            let a = odd_even_balance(&a, params.odd_even_balance)?;
            truncate_harmonics(&a, params.harmonics)
        })
        .collect()
}
