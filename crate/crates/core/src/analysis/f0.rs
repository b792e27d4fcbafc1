//! Fundamental-frequency estimation for audio that arrives without f0
//! metadata.
//!
//! Each frame's spectral peaks are summed at the harmonic positions of every
//! candidate on a 5-cent grid (a peak counts for a candidate when it lies
//! within the labeling tolerance of an integer multiple). Sub-multiples of
//! the true f0 capture the same peaks, so the decision takes the highest
//! candidate whose captured amplitude is within a few percent of the best,
//! then refines it by a least-squares fit through the matched peaks.

use serde::{Deserialize, Serialize};

use super::tracking::SpectralPeak;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct F0EstimatorConfig {
    pub min_hz: f64,
    pub max_hz: f64,
    pub step_cents: f64,
    pub max_harmonic: usize,
    pub tolerance_cents: f64,
    /// Peaks more than this far below the frame's loudest are ignored.
    pub dynamic_range_db: f64,
    /// Frames whose loudest peak is below this (dBFS) are unvoiced.
    pub min_level_db: f64,
    /// Fraction of the best candidate's captured amplitude a higher
    /// candidate must reach to win.
    pub capture_ratio: f64,
    /// Minimum fraction of peak amplitude explained for a voiced frame.
    pub min_capture: f64,
}

impl Default for F0EstimatorConfig {
    fn default() -> Self {
        Self {
            min_hz: 10.0,
            max_hz: 500.0,
            step_cents: 5.0,
            max_harmonic: 40,
            tolerance_cents: 35.0,
            dynamic_range_db: 40.0,
            min_level_db: -60.0,
            capture_ratio: 0.95,
            min_capture: 0.5,
        }
    }
}

fn cents(ratio: f64) -> f64 {
    1200.0 * ratio.log2()
}

/// Nearest harmonic number of `freq` over `f0` and the deviation in cents.
pub fn nearest_harmonic(freq: f64, f0: f64) -> (usize, f64) {
    let ratio = freq / f0;
    let lo = ratio.floor().max(1.0);
    let hi = lo + 1.0;
    let c_lo = cents(ratio / lo);
    let c_hi = cents(ratio / hi);
    if c_lo.abs() <= c_hi.abs() {
        (lo as usize, c_lo)
    } else {
        (hi as usize, c_hi)
    }
}

struct Candidate {
    freq: f64,
    capture: f64,
}

fn capture(peaks: &[(f64, f64)], f0: f64, cfg: &F0EstimatorConfig) -> (f64, f64) {
    let mut captured = 0.0;
    let mut closeness = 0.0;
    for &(freq, amp) in peaks {
        let (k, dev) = nearest_harmonic(freq, f0);
        if k <= cfg.max_harmonic && dev.abs() <= cfg.tolerance_cents {
            captured += amp;
            closeness += amp * (1.0 - dev.abs() / cfg.tolerance_cents);
        }
    }
    (captured, closeness)
}

fn least_squares(peaks: &[(f64, f64)], f0: f64, cfg: &F0EstimatorConfig) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &(freq, amp) in peaks {
        let (k, dev) = nearest_harmonic(freq, f0);
        if k <= cfg.max_harmonic && dev.abs() <= cfg.tolerance_cents {
            let k = k as f64;
            num += amp * k * freq;
            den += amp * k * k;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        f0
    }
}

/// f0 of one frame, or `None` when unvoiced.
pub fn estimate_frame_f0(peaks: &[SpectralPeak], cfg: &F0EstimatorConfig) -> Option<f64> {
    let loudest = peaks.iter().map(|p| p.level_db).fold(f64::NEG_INFINITY, f64::max);
    if loudest < cfg.min_level_db {
        return None;
    }
    let floor = loudest - cfg.dynamic_range_db;
    let strong: Vec<(f64, f64)> = peaks
        .iter()
        .filter(|p| p.level_db >= floor && p.freq > 0.0)
        .map(|p| (p.freq, 10f64.powf(p.level_db / 20.0)))
        .collect();
    let total: f64 = strong.iter().map(|p| p.1).sum();
    if total <= 0.0 {
        return None;
    }

    let step = 2f64.powf(cfg.step_cents / 1200.0);
    let mut grid = Vec::new();
    let mut f = cfg.min_hz;
    while f <= cfg.max_hz {
        grid.push(Candidate {
            freq: f,
            capture: capture(&strong, f, cfg).0,
        });
        f *= step;
    }
    let best = grid.iter().map(|c| c.capture).fold(0.0, f64::max);
    if best < cfg.min_capture * total {
        return None;
    }
    let highest = grid
        .iter()
        .rev()
        .find(|c| c.capture >= cfg.capture_ratio * best)?
        .freq;

    // Several neighbouring candidates capture the same peaks; take the one
    // the peaks sit closest to.
    let lower = highest * 2f64.powf(-2.0 * cfg.tolerance_cents / 1200.0);
    let coarse = grid
        .iter()
        .filter(|c| c.freq >= lower && c.freq <= highest)
        .map(|c| (c.freq, capture(&strong, c.freq, cfg).1))
        .fold((highest, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
        .0;

    let refined = least_squares(&strong, coarse, cfg);
    Some(least_squares(&strong, refined, cfg))
}

pub fn estimate_f0(frame_peaks: &[Vec<SpectralPeak>], cfg: &F0EstimatorConfig) -> Vec<Option<f64>> {
    use rayon::prelude::*;
    frame_peaks
        .par_iter()
        .map(|p| estimate_frame_f0(p, cfg))
        .collect()
}
