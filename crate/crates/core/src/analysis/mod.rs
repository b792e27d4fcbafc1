//! Spectral analysis: STFT, partial tracking, harmonic labeling, melodic
//! lines and perceived pitch count.

mod f0;
mod image;
mod labels;
mod lines;
mod percept;
mod report;
mod stft;
mod tracking;
mod transcribe;

pub use f0::{estimate_f0, estimate_frame_f0, nearest_harmonic, F0EstimatorConfig};
pub use image::{colormap, render_spectrogram, row_for, Image, DYNAMIC_RANGE_DB, OVERLAY_RGB};
pub use labels::{label_harmonics, DEFAULT_TOLERANCE_CENTS};
pub use lines::{concurrent_lines, extract_melodic_lines, LineConfig, LineSegment, MelodicLine};
pub use percept::{
    estimate_pitch_count, max_pitch_count, rule_coverage, PerceptConfig, PitchPercept, Rule,
};
pub use report::{analyze, Analysis, AnalysisConfig, AnalysisReport, F0Source, SpectrogramView};
pub use stft::{stft, Spectrogram, Window, SPEC_DB_FLOOR};
pub use tracking::{
    find_peaks, frame_peaks, link_peaks, track_partials, PartialTrack, SpectralPeak, TrackPoint,
    TrackingConfig, PEAK_FIT_EXPONENT,
};
pub use transcribe::{note_name, transcribe, TranscribedNote, Transcription, Voice, A4_HZ};
