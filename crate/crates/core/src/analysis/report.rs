use serde::{Deserialize, Serialize};

use super::f0::{estimate_f0, F0EstimatorConfig};
use super::labels::{label_harmonics, DEFAULT_TOLERANCE_CENTS};
use super::lines::{extract_melodic_lines, LineConfig, MelodicLine};
use super::percept::{estimate_pitch_count, PerceptConfig, PitchPercept};
use super::stft::{stft, Spectrogram, Window};
use super::tracking::{frame_peaks, link_peaks, PartialTrack, TrackingConfig};
use super::transcribe::{transcribe, Transcription};
use crate::error::{Error, Result};
use crate::model::F0Trajectory;
use crate::psycho::{Weighting, DEFAULT_PHON};
use crate::synth::AudioBuffer;
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub window_size: usize,
    pub hop: usize,
    pub window: Window,
    pub phon: f64,
    pub tracking: TrackingConfig,
    pub f0_estimator: F0EstimatorConfig,
    pub label_tolerance_cents: f64,
    pub lines: LineConfig,
    pub percepts: PerceptConfig,
    pub quantize: bool,
    /// Attach a decimated weighted spectrogram to the report.
    pub include_spectrogram: bool,
    /// Highest frequency kept in the attached spectrogram.
    pub spectrogram_max_hz: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            window_size: 4096,
            hop: 512,
            window: Window::Hann,
            phon: DEFAULT_PHON,
            tracking: TrackingConfig::default(),
            f0_estimator: F0EstimatorConfig::default(),
            label_tolerance_cents: DEFAULT_TOLERANCE_CENTS,
            lines: LineConfig::default(),
            percepts: PerceptConfig::default(),
            quantize: true,
            include_spectrogram: false,
            spectrogram_max_hz: 4000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F0Source {
    Metadata,
    Estimated,
}

/// Weighted magnitudes cropped to `max_hz`, for drawing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramView {
    pub hop: f64,
    pub bin_width: f64,
    pub times: Vec<f64>,
    /// `magnitudes[frame][bin]`, weighted dB rounded to 0.1 dB.
    pub magnitudes: Vec<Vec<f32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub sample_rate: u32,
    pub duration: f64,
    pub f0_source: F0Source,
    /// Frame centre times, seconds.
    pub times: Vec<f64>,
    /// f0 per frame; `null` when unvoiced.
    pub f0: Vec<Option<f64>>,
    pub tracks: Vec<PartialTrack>,
    pub lines: Vec<MelodicLine>,
    pub percepts: Vec<PitchPercept>,
    pub transcription: Transcription,
    pub params: AnalysisConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrogram: Option<SpectrogramView>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    /// Largest number of lines active at one frame time.
    pub fn max_concurrent_lines(&self) -> usize {
        self.times
            .iter()
            .map(|&t| super::lines::concurrent_lines(&self.lines, t))
            .max()
            .unwrap_or(0)
    }
}

/// Report plus the weighted spectrogram it was computed from.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: AnalysisReport,
    pub raw: Spectrogram,
    pub weighted: Spectrogram,
}

fn view(spec: &Spectrogram, max_hz: f64) -> SpectrogramView {
    let bins = spec.bins.iter().take_while(|&&f| f <= max_hz).count().max(1);
    SpectrogramView {
        hop: spec.hop,
        bin_width: spec.bin_width(),
        times: spec.times.clone(),
        magnitudes: spec
            .magnitudes
            .iter()
            .map(|row| row[..bins].iter().map(|m| ((m * 10.0).round() / 10.0) as f32).collect())
            .collect(),
    }
}

/// Runs the full analysis chain. When `f0` is given it is sampled at the
/// frame centres; otherwise f0 is estimated from the spectrum.
pub fn analyze(audio: &AudioBuffer, f0: Option<&F0Trajectory>, config: &AnalysisConfig) -> Result<Analysis> {
    if audio.samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("audio contains non-finite samples".into()));
    }
    let weighting = Weighting::for_phon(config.phon)?;
    let raw = stft(audio, config.window_size, config.hop, config.window)?;
    let weighted = raw.weighted(&weighting);

    let peaks = frame_peaks(&raw, config.tracking.peak_floor);
    let (f0_frames, f0_source) = match f0 {
        Some(traj) => {
            traj.validate()?;
            (raw.times.iter().map(|&t| traj.at(t)).collect(), F0Source::Metadata)
        }
        None => (estimate_f0(&peaks, &config.f0_estimator), F0Source::Estimated),
    };

    let tracks = link_peaks(&peaks, &raw.times, &config.tracking);
    let tracks = label_harmonics(&tracks, &f0_frames, config.label_tolerance_cents);
    let lines = extract_melodic_lines(&tracks, &weighted, &weighting, &f0_frames, &config.lines);
    let percepts = estimate_pitch_count(&lines, &tracks, &f0_frames, &weighted, &weighting, &config.percepts);
    let transcription = transcribe(&lines, config.quantize);

    let report = AnalysisReport {
        schema_version: SCHEMA_VERSION,
        sample_rate: audio.sample_rate,
        duration: audio.duration(),
        f0_source,
        times: raw.times.clone(),
        f0: f0_frames,
        tracks,
        lines,
        percepts,
        transcription,
        params: config.clone(),
        spectrogram: config
            .include_spectrogram
            .then(|| view(&weighted, config.spectrogram_max_hz)),
    };
    Ok(Analysis {
        report,
        raw,
        weighted,
    })
}
