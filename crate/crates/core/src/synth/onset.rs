//! Note gating from a level envelope.
//!
//! Candidate notes are the peaks of the envelope that stand out from the
//! surrounding troughs by at least the hysteresis (a zig-zag with reversal
//! `hysteresis` dB). A candidate becomes a note when its peak reaches the
//! threshold. Peak detection does not depend on the threshold, so raising
//! the threshold can only remove notes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Onset/duration of a gated note; `pitch_f0` is filled by the renderer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub onset_time: f64,
    pub duration: f64,
    pub pitch_f0: Option<f64>,
}

impl NoteEvent {
    pub fn end_time(&self) -> f64 {
        self.onset_time + self.duration
    }
}

/// Level in dB sampled at `rate` values per second.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelEnvelope {
    pub rate: f64,
    pub levels_db: Vec<f64>,
}

/// Window used for RMS level envelopes, seconds.
pub const LEVEL_WINDOW: f64 = 0.010;

impl LevelEnvelope {
    /// RMS over consecutive 10 ms windows of an audio signal.
    pub fn from_audio(samples: &[f64], sample_rate: u32) -> Self {
        let win = ((LEVEL_WINDOW * sample_rate as f64).round() as usize).max(1);
        let levels_db = samples
            .chunks(win)
            .map(|chunk| {
                let ms = chunk.iter().map(|x| x * x).sum::<f64>() / chunk.len() as f64;
                10.0 * ms.max(1e-24).log10()
            })
            .collect();
        Self {
            rate: sample_rate as f64 / win as f64,
            levels_db,
        }
    }

    /// Per-frame gains expressed in dB.
    pub fn from_gains(gains: impl IntoIterator<Item = f64>, rate: f64) -> Self {
        Self {
            rate,
            levels_db: gains
                .into_iter()
                .map(|g| 20.0 * g.max(1e-12).log10())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Trend {
    Unknown,
    Rising,
    Falling,
}

/// Indices of peaks and the trough preceding each.
fn zigzag_peaks(x: &[f64], reversal: f64) -> Vec<(usize, usize)> {
    let mut peaks = Vec::new();
    let Some(&first) = x.first() else {
        return peaks;
    };
    let mut trend = Trend::Unknown;
    let (mut hi, mut hi_at) = (first, 0);
    let (mut lo, mut lo_at) = (first, 0);
    let mut trough_at = 0;

    let rose = |from: f64, to: f64| to > from && to - from >= reversal;

    for (i, &v) in x.iter().enumerate().skip(1) {
        match trend {
            Trend::Unknown => {
                if v > hi {
                    hi = v;
                    hi_at = i;
                }
                if v < lo {
                    lo = v;
                    lo_at = i;
                }
                if rose(lo, v) {
                    trend = Trend::Rising;
                    trough_at = lo_at;
                    hi = v;
                    hi_at = i;
                } else if rose(v, hi) {
                    peaks.push((hi_at, 0));
                    trend = Trend::Falling;
                    lo = v;
                    lo_at = i;
                }
            }
            Trend::Rising => {
                if v > hi {
                    hi = v;
                    hi_at = i;
                } else if rose(v, hi) {
                    peaks.push((hi_at, trough_at));
                    trend = Trend::Falling;
                    lo = v;
                    lo_at = i;
                }
            }
            Trend::Falling => {
                if v < lo {
                    lo = v;
                    lo_at = i;
                } else if rose(lo, v) {
                    trough_at = lo_at;
                    trend = Trend::Rising;
                    hi = v;
                    hi_at = i;
                }
            }
        }
    }
    match trend {
        Trend::Rising => peaks.push((hi_at, trough_at)),
        // Never moved by more than the reversal: one plateau-like peak.
        Trend::Unknown => peaks.push((hi_at, 0)),
        Trend::Falling => {}
    }
    peaks
}

/// Gates notes from a level envelope.
///
/// A note starts where the level first reaches `threshold` on the rise to a
/// qualifying peak, and ends at the first fall below
/// `threshold - hysteresis` or at the next onset.
pub fn detect_onsets(
    envelope: &LevelEnvelope,
    threshold: f64,
    hysteresis: f64,
) -> Result<Vec<NoteEvent>> {
    if !(hysteresis.is_finite() && hysteresis >= 0.0) {
        return Err(Error::param("onset_hysteresis", "must be >= 0"));
    }
    if !(envelope.rate.is_finite() && envelope.rate > 0.0) {
        return Err(Error::param("rate", "envelope rate must be > 0"));
    }
    let x = &envelope.levels_db;
    if x.is_empty() {
        return Ok(Vec::new());
    }
    let release = threshold - hysteresis;

    let mut spans: Vec<(usize, usize)> = Vec::new();
    for (peak, trough) in zigzag_peaks(x, hysteresis) {
        if x[peak] < threshold {
            continue;
        }
        let onset = (trough..=peak)
            .find(|&i| x[i] >= threshold)
            .unwrap_or(peak);
        let end = (peak + 1..x.len())
            .find(|&i| x[i] < release)
            .unwrap_or(x.len());
        if let Some(prev) = spans.last_mut() {
            if prev.1 > onset {
                prev.1 = onset;
            }
        }
        spans.push((onset, end));
    }

    Ok(spans
        .into_iter()
        .filter(|(on, off)| off > on)
        .map(|(on, off)| NoteEvent {
            onset_time: on as f64 / envelope.rate,
            duration: (off - on) as f64 / envelope.rate,
            pitch_f0: None,
        })
        .collect())
}
