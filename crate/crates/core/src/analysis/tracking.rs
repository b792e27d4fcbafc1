//! Spectral peak picking and greedy partial tracking.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stft::Spectrogram;

/// Exponent applied to linear magnitudes before the 3-bin parabolic fit.
/// With a Hann window this removes nearly all of the frequency and level
/// bias of a plain dB-domain fit.
pub const PEAK_FIT_EXPONENT: f64 = 0.23;

/// Local-maximum neighbourhood (bins each side).
const PEAK_HALF_WIDTH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub freq: f64,
    pub level_db: f64,
}

/// Local maxima above `floor_db`, refined by a parabola through the three
/// bins around each maximum (on power-compressed magnitudes).
pub fn find_peaks(row: &[f64], bin_width: f64, floor_db: f64) -> Vec<SpectralPeak> {
    let n = row.len();
    if n < 2 * PEAK_HALF_WIDTH + 1 {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        let v = row[i];
        if v < floor_db {
            continue;
        }
        let lo = i.saturating_sub(PEAK_HALF_WIDTH);
        let hi = (i + PEAK_HALF_WIDTH).min(n - 1);
        let is_max = (lo..i).all(|j| row[j] < v) && (i + 1..=hi).all(|j| row[j] <= v);
        if !is_max {
            continue;
        }
        let comp = |db: f64| 10f64.powf(PEAK_FIT_EXPONENT * db / 20.0);
        let (a, b, c) = (comp(row[i - 1]), comp(v), comp(row[i + 1]));
        let denom = a - 2.0 * b + c;
        let (offset, peak) = if denom < 0.0 {
            let d = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
            (d, b - 0.25 * (a - c) * d)
        } else {
            (0.0, b)
        };
        peaks.push(SpectralPeak {
            freq: (i as f64 + offset) * bin_width,
            level_db: 20.0 * peak.log10() / PEAK_FIT_EXPONENT,
        });
    }
    peaks
}

/// Peaks of every frame, computed in parallel.
pub fn frame_peaks(spec: &Spectrogram, floor_db: f64) -> Vec<Vec<SpectralPeak>> {
    let bw = spec.bin_width();
    spec.magnitudes
        .par_iter()
        .map(|row| find_peaks(row, bw, floor_db))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    /// Spectrogram frame index.
    pub frame: usize,
    pub time: f64,
    pub freq: f64,
    pub level_db: f64,
}

/// A partial followed across consecutive frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialTrack {
    pub frames: Vec<TrackPoint>,
    pub harmonic_index: Option<usize>,
    /// Signed cents from `harmonic_index * f0`, or from the nearest integer
    /// multiple when unlabeled. Median over the track.
    pub inharmonicity_cents: Option<f64>,
    /// Frames dropped during labeling because f0 was missing there.
    #[serde(default)]
    pub missing_f0_frames: usize,
}

impl PartialTrack {
    pub fn start_time(&self) -> f64 {
        self.frames.first().map_or(0.0, |p| p.time)
    }

    pub fn end_time(&self) -> f64 {
        self.frames.last().map_or(0.0, |p| p.time)
    }

    pub fn median_freq(&self) -> f64 {
        let mut f: Vec<f64> = self.frames.iter().map(|p| p.freq).collect();
        f.sort_by(|a, b| a.total_cmp(b));
        f.get(f.len() / 2).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackingConfig {
    /// Peaks below this level (dBFS) are ignored.
    pub peak_floor: f64,
    /// Largest frequency change (Hz) between consecutive frames of a track.
    pub max_jump: f64,
    /// Tracks spanning less than this (seconds) are dropped.
    pub min_duration: f64,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            peak_floor: -80.0,
            max_jump: 25.0,
            min_duration: 0.05,
        }
    }
}

/// Links per-frame peaks into tracks, nearest frequency first.
pub fn track_partials(spec: &Spectrogram, config: &TrackingConfig) -> Vec<PartialTrack> {
    let peaks = frame_peaks(spec, config.peak_floor);
    link_peaks(&peaks, &spec.times, config)
}

pub fn link_peaks(
    peaks: &[Vec<SpectralPeak>],
    times: &[f64],
    config: &TrackingConfig,
) -> Vec<PartialTrack> {
    let mut finished: Vec<Vec<TrackPoint>> = Vec::new();
    let mut active: Vec<Vec<TrackPoint>> = Vec::new();

    for (frame, frame_peaks) in peaks.iter().enumerate() {
        let point = |p: &SpectralPeak| TrackPoint {
            frame,
            time: times[frame],
            freq: p.freq,
            level_db: p.level_db,
        };
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ti, track) in active.iter().enumerate() {
            let last = track.last().expect("active tracks are non-empty").freq;
            for (pi, p) in frame_peaks.iter().enumerate() {
                let jump = (p.freq - last).abs();
                if jump <= config.max_jump {
                    pairs.push((jump, ti, pi));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut track_taken = vec![false; active.len()];
        let mut peak_taken = vec![false; frame_peaks.len()];
        for (_, ti, pi) in pairs {
            if track_taken[ti] || peak_taken[pi] {
                continue;
            }
            track_taken[ti] = true;
            peak_taken[pi] = true;
            active[ti].push(point(&frame_peaks[pi]));
        }

        let mut next = Vec::with_capacity(active.len() + frame_peaks.len());
        for (track, taken) in active.drain(..).zip(track_taken) {
            if taken {
                next.push(track);
            } else {
                finished.push(track);
            }
        }
        for (p, taken) in frame_peaks.iter().zip(peak_taken) {
            if !taken {
                next.push(vec![point(p)]);
            }
        }
        active = next;
    }
    finished.extend(active);

    let hop = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    let mut tracks: Vec<PartialTrack> = finished
        .into_iter()
        .filter(|t| t.len() as f64 * hop >= config.min_duration)
        .map(|frames| PartialTrack {
            frames,
            harmonic_index: None,
            inharmonicity_cents: None,
            missing_f0_frames: 0,
        })
        .collect();
    tracks.sort_by(|a, b| {
        a.frames[0]
            .frame
            .cmp(&b.frames[0].frame)
            .then(a.frames[0].freq.total_cmp(&b.frames[0].freq))
    });
    tracks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::stft::{stft, Window};
    use crate::synth::AudioBuffer;
    use std::f64::consts::PI;

    #[test]
    fn refined_peak_is_accurate_off_bin() {
        let sr = 48_000u32;
        let f = 110.0 + 0.37 * sr as f64 / 4096.0;
        let x: Vec<f64> = (0..4096)
            .map(|i| 0.5 * (2.0 * PI * f * i as f64 / sr as f64).sin())
            .collect();
        let spec = stft(&AudioBuffer::new(sr, x), 4096, 4096, Window::Hann).unwrap();
        let peaks = find_peaks(&spec.magnitudes[0], spec.bin_width(), -80.0);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].freq - f).abs() < 0.01, "{}", peaks[0].freq);
        assert!((peaks[0].level_db + 6.0206).abs() < 0.05, "{}", peaks[0].level_db);
    }

    #[test]
    fn steady_sine_is_one_track() {
        let sr = 48_000u32;
        let x: Vec<f64> = (0..sr)
            .map(|i| 0.5 * (2.0 * PI * 220.0 * i as f64 / sr as f64).sin())
            .collect();
        let spec = stft(&AudioBuffer::new(sr, x), 4096, 512, Window::Hann).unwrap();
        let tracks = track_partials(&spec, &TrackingConfig::default());
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].frames.len(), spec.frame_count());
    }

    #[test]
    fn noise_floor_only_gives_nothing() {
        let spec = stft(&AudioBuffer::silence(48_000, 20_000), 4096, 512, Window::Hann).unwrap();
        assert!(track_partials(&spec, &TrackingConfig::default()).is_empty());
    }

    #[test]
    fn linking_prefers_nearest_and_respects_max_jump() {
        let p = |f: f64| SpectralPeak { freq: f, level_db: -10.0 };
        let peaks = vec![
            vec![p(100.0), p(200.0)],
            vec![p(105.0), p(195.0)],
            vec![p(160.0)],
        ];
        let cfg = TrackingConfig {
            peak_floor: -80.0,
            max_jump: 20.0,
            min_duration: 0.0,
        };
        let tracks = link_peaks(&peaks, &[0.0, 0.01, 0.02], &cfg);
        assert_eq!(tracks.len(), 3);
        assert_eq!(tracks[0].frames.len(), 2);
        assert_eq!(tracks[1].frames.len(), 2);
        assert_eq!(tracks[2].frames.len(), 1);
    }
}
