//! Audio rendering: onset gating, additive synthesis, resonant low-pass and
//! peak normalization.

mod audio;
mod filter;
mod onset;
mod render;

pub use audio::{
    decode_wav, encode_wav, normalize_peak, read_wav, AudioBuffer, SampleFormat,
};
pub use filter::{effective_cutoff, lowpass_filter, Lowpass, KEYTRACK_REFERENCE_HZ};
pub use onset::{detect_onsets, LevelEnvelope, NoteEvent, LEVEL_WINDOW};
pub use render::{render_additive, Detune};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    amplitude_frames, AmplitudeFrame, F0Trajectory, HarmonicFrameSequence, Resample, SynthParams,
};

/// Everything needed to render one tone sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub f0: F0Trajectory,
    pub frames: HarmonicFrameSequence,
    #[serde(default)]
    pub detunes: Vec<Detune>,
    #[serde(default)]
    pub params: SynthParams,
}

/// A render plus the intermediate control data, for inspection and oracles.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub audio: AudioBuffer,
    /// f0 at the common control rate.
    pub f0: F0Trajectory,
    /// Synthesis amplitudes per control frame (before filter and scaling).
    pub amplitudes: Vec<AmplitudeFrame>,
    pub notes: Vec<NoteEvent>,
    pub filter: Lowpass,
    /// Gain applied by peak normalization.
    pub output_gain: f64,
}

impl Rendered {
    /// Linear amplitude of harmonic `index` in control frame `frame` as it
    /// appears in the output (filter response and output gain applied,
    /// envelope assumed open).
    pub fn partial_amplitude(&self, frame: usize, index: usize, detunes: &[Detune]) -> f64 {
        let Some(f0) = self.f0.values.get(frame).copied().flatten() else {
            return 0.0;
        };
        let cents = detunes
            .iter()
            .find(|d| d.harmonic == index)
            .map_or(0.0, |d| d.cents);
        let freq = index as f64 * f0 * 2f64.powf(cents / 1200.0);
        if freq >= self.audio.sample_rate as f64 / 2.0 {
            return 0.0;
        }
        self.amplitudes[frame].level(index) * self.filter.magnitude_at(freq) * self.output_gain
    }
}

/// Full pipeline: resample controls to the f0 rate, shape amplitudes, gate
/// notes from the frame gains, synthesize, filter and normalize.
pub fn render_scene(scene: &Scene) -> Result<Rendered> {
    let params = &scene.params;
    params.validate()?;
    scene.f0.validate()?;
    scene.frames.validate()?;

    let f0 = scene.f0.clone();
    let frames = scene.frames.resample(f0.rate)?;
    if frames.len() != f0.len() {
        return Err(Error::InvalidInput(format!(
            "control length mismatch after resampling: {} f0 frames vs {} magnitude frames",
            f0.len(),
            frames.len()
        )));
    }

    let amplitudes = amplitude_frames(&frames, params)?;
    let envelope = LevelEnvelope::from_gains(amplitudes.iter().map(|a| a.gain), f0.rate);
    let mut notes = detect_onsets(&envelope, params.onset_threshold, params.onset_hysteresis)?;
    for n in &mut notes {
        n.pitch_f0 = f0.at(n.onset_time);
    }

    let dry = render_additive(&f0, &amplitudes, &notes, params, &scene.detunes)?;
    let f0_ref = f0.median_voiced().unwrap_or(KEYTRACK_REFERENCE_HZ);
    let (wet, filter) = lowpass_filter(
        &dry,
        params.filter_cutoff,
        params.filter_resonance,
        params.filter_keytrack,
        f0_ref,
    )?;
    let audio = normalize_peak(&wet, params.normalize_dbfs);
    let wet_peak = wet.peak();
    let output_gain = if wet_peak > 0.0 {
        audio.peak() / wet_peak
    } else {
        1.0
    };

    Ok(Rendered {
        audio,
        f0,
        amplitudes,
        notes,
        filter,
        output_gain,
    })
}
