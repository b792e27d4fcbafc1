//! Promotion of labeled partials to perceived melodic lines.
//!
//! Every voiced frame with an audible harmonic carries the tone's own pitch
//! (the line on harmonic 1). An upper harmonic carries a separate line while
//! it is audible (within `audibility_margin` of the loudest weighted level in
//! the frame, above `absolute_floor` dBFS) and stands out from its harmonic
//! neighbours by `prominence` dB in the weighted spectrum. A smooth rolloff
//! therefore fuses into one line, while selectively boosted harmonics form
//! their own.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stft::Spectrogram;
use super::tracking::PartialTrack;
use crate::psycho::Weighting;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LineConfig {
    pub audibility_margin: f64,
    pub absolute_floor: f64,
    pub min_duration: f64,
    pub prominence: f64,
    /// Gaps up to this long (seconds) inside a line are bridged.
    pub merge_gap: f64,
    /// A pitch move larger than this (cents) starts a new segment.
    pub pitch_split_cents: f64,
}

impl Default for LineConfig {
    fn default() -> Self {
        Self {
            audibility_margin: 20.0,
            absolute_floor: -60.0,
            min_duration: 0.15,
            prominence: 10.0,
            merge_gap: 0.05,
            pitch_split_cents: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    pub start: f64,
    pub end: f64,
    pub pitch_hz: f64,
    /// Mean weighted level, dB.
    pub mean_level_db: f64,
}

impl LineSegment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

/// One perceived line, carried by a single harmonic index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelodicLine {
    pub harmonic_index: usize,
    pub segments: Vec<LineSegment>,
}

impl MelodicLine {
    pub fn is_active(&self, t: f64) -> bool {
        self.segments.iter().any(|s| s.contains(t))
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(LineSegment::duration).sum()
    }
}

/// Weighted level of each labeled harmonic per frame (loudest point wins).
pub(crate) struct FrameHarmonics {
    /// frame -> harmonic -> (weighted dB, raw dB, freq)
    pub by_frame: Vec<BTreeMap<usize, (f64, f64, f64)>>,
    /// frame -> loudest weighted level
    pub frame_max: Vec<f64>,
}

pub(crate) fn frame_harmonics(
    tracks: &[PartialTrack],
    weighted: &Spectrogram,
    weighting: &Weighting,
) -> FrameHarmonics {
    let n = weighted.frame_count();
    let mut by_frame: Vec<BTreeMap<usize, (f64, f64, f64)>> = vec![BTreeMap::new(); n];
    let mut frame_max: Vec<f64> = weighted
        .magnitudes
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    for track in tracks {
        for p in &track.frames {
            if p.frame >= n {
                continue;
            }
            let w = p.level_db + weighting.weight_db(p.freq);
            frame_max[p.frame] = frame_max[p.frame].max(w);
            if let Some(h) = track.harmonic_index {
                let slot = by_frame[p.frame].entry(h).or_insert((w, p.level_db, p.freq));
                if w > slot.0 {
                    *slot = (w, p.level_db, p.freq);
                }
            }
        }
    }
    FrameHarmonics { by_frame, frame_max }
}

struct Open {
    first: usize,
    last: usize,
    pitches: Vec<f64>,
    levels: Vec<f64>,
}

fn cents_between(a: f64, b: f64) -> f64 {
    1200.0 * (a / b).log2()
}

fn segments_from_frames(
    flagged: &[(usize, f64, f64)],
    times: &[f64],
    hop: f64,
    cfg: &LineConfig,
) -> Vec<LineSegment> {
    let max_gap_frames = (cfg.merge_gap / hop).round() as usize + 1;
    let mut segments = Vec::new();
    let mut open: Option<Open> = None;
    let close = |o: Open, out: &mut Vec<LineSegment>| {
        let start = times[o.first] - hop / 2.0;
        let end = times[o.last] + hop / 2.0;
        if end - start + 1e-9 >= cfg.min_duration {
            let n = o.pitches.len() as f64;
            let log_mean = o.pitches.iter().map(|p| p.ln()).sum::<f64>() / n;
            out.push(LineSegment {
                start,
                end,
                pitch_hz: log_mean.exp(),
                mean_level_db: o.levels.iter().sum::<f64>() / n,
            });
        }
    };
    for &(frame, pitch, level) in flagged {
        let extend = open.as_ref().is_some_and(|o| {
            let mean = (o.pitches.iter().map(|p| p.ln()).sum::<f64>() / o.pitches.len() as f64).exp();
            frame - o.last <= max_gap_frames
                && cents_between(pitch, mean).abs() <= cfg.pitch_split_cents
        });
        if extend {
            let o = open.as_mut().expect("checked above");
            o.last = frame;
            o.pitches.push(pitch);
            o.levels.push(level);
        } else {
            if let Some(o) = open.take() {
                close(o, &mut segments);
            }
            open = Some(Open {
                first: frame,
                last: frame,
                pitches: vec![pitch],
                levels: vec![level],
            });
        }
    }
    if let Some(o) = open {
        close(o, &mut segments);
    }
    segments
}

/// Extracts melodic lines from labeled tracks and the weighted spectrogram.
/// `f0` is indexed by spectrogram frame.
pub fn extract_melodic_lines(
    tracks: &[PartialTrack],
    weighted: &Spectrogram,
    weighting: &Weighting,
    f0: &[Option<f64>],
    cfg: &LineConfig,
) -> Vec<MelodicLine> {
    let harmonics = frame_harmonics(tracks, weighted, weighting);
    let nyquist = weighted.sample_rate as f64 / 2.0;
    let mut flagged: BTreeMap<usize, Vec<(usize, f64, f64)>> = BTreeMap::new();

    for (frame, levels) in harmonics.by_frame.iter().enumerate() {
        let Some(fund) = f0.get(frame).copied().flatten() else {
            continue;
        };
        let max = harmonics.frame_max[frame];
        let audible = |w: f64, raw: f64| w >= max - cfg.audibility_margin && raw >= cfg.absolute_floor;

        let mut loudest_audible: Option<f64> = None;
        for (&h, &(w, raw, freq)) in levels {
            if !audible(w, raw) {
                continue;
            }
            loudest_audible = Some(loudest_audible.map_or(w, |l: f64| l.max(w)));
            if h < 2 {
                continue;
            }
            let neighbour = |j: usize| -> Option<f64> {
                let f = j as f64 * fund;
                (f < nyquist).then(|| weighted.level_near(frame, f, 1))
            };
            let louder_neighbour = [neighbour(h - 1), neighbour(h + 1)]
                .into_iter()
                .flatten()
                .fold(f64::NEG_INFINITY, f64::max);
            if w - louder_neighbour >= cfg.prominence {
                flagged.entry(h).or_default().push((frame, freq, w));
            }
        }
        if let Some(level) = loudest_audible {
            flagged.entry(1).or_default().push((frame, fund, level));
        }
    }

    flagged
        .into_iter()
        .map(|(h, frames)| MelodicLine {
            harmonic_index: h,
            segments: segments_from_frames(&frames, &weighted.times, weighted.hop, cfg),
        })
        .filter(|l| !l.segments.is_empty())
        .collect()
}

/// Number of lines active at time `t`.
pub fn concurrent_lines(lines: &[MelodicLine], t: f64) -> usize {
    lines.iter().filter(|l| l.is_active(t)).count()
}
