//! Per-frame transforms from model-style log-magnitudes to synthesis
//! amplitudes: temperature softmax, odd/even balance, harmonic truncation.

use std::f64::consts::LN_10;

use super::types::AmplitudeFrame;
use crate::error::{Error, Result};

/// dB (amplitude convention) to natural-log units.
pub const DB_TO_NEPER: f64 = LN_10 / 20.0;

/// Temperature softmax over a log-magnitude frame.
///
/// Entries are converted from dB to natural-log units first, so at `T = 1`
/// the distribution is proportional to linear amplitude. Lowering `T`
/// sharpens the distribution toward the loudest harmonic; raising it flattens
/// it. The frame gain is the total linear amplitude `sum 10^(m/20)` and does
/// not depend on `T`.
pub fn harmonic_variation_transform(frame: &[f64], temperature: f64) -> Result<AmplitudeFrame> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::param("harmonic_variation", "temperature must be > 0"));
    }
    if frame.is_empty() {
        return Err(Error::InvalidFrame("frame has no harmonics".into()));
    }
    if let Some(i) = frame.iter().position(|m| !m.is_finite()) {
        return Err(Error::InvalidFrame(format!("entry {i} is not finite")));
    }

    let nat: Vec<f64> = frame.iter().map(|m| m * DB_TO_NEPER).collect();
    let max = nat.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let weights: Vec<f64> = nat.iter().map(|x| ((x - max) / temperature).exp()).collect();
    let total: f64 = weights.iter().sum();
    let amps = weights.iter().map(|w| w / total).collect();

    // Sum of linear amplitudes, factored through the max to avoid overflow.
    let gain = max.exp() * nat.iter().map(|x| (x - max).exp()).sum::<f64>();

    Ok(AmplitudeFrame { amps, gain })
}

/// Scales even harmonics by `1 - max(rho, 0)` and odd ones by
/// `1 - max(-rho, 0)` (harmonic 1 is odd), then renormalizes.
pub fn odd_even_balance(frame: &AmplitudeFrame, rho: f64) -> Result<AmplitudeFrame> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::param("odd_even_balance", "must be in [-1, 1]"));
    }
    let even_scale = 1.0 - rho.max(0.0);
    let odd_scale = 1.0 - (-rho).max(0.0);
    let scaled: Vec<f64> = frame
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let harmonic = i + 1;
            if harmonic % 2 == 0 {
                a * even_scale
            } else {
                a * odd_scale
            }
        })
        .collect();
    Ok(renormalize(scaled, frame.gain))
}

/// Drops harmonics above `max_harmonics` and renormalizes. The gain is kept.
pub fn truncate_harmonics(frame: &AmplitudeFrame, max_harmonics: usize) -> Result<AmplitudeFrame> {
    if max_harmonics < 1 {
        return Err(Error::param("harmonics", "must be >= 1"));
    }
    if max_harmonics >= frame.amps.len() {
        return Ok(frame.clone());
    }
    Ok(renormalize(
        frame.amps[..max_harmonics].to_vec(),
        frame.gain,
    ))
}

fn renormalize(amps: Vec<f64>, gain: f64) -> AmplitudeFrame {
    let total: f64 = amps.iter().sum();
    if total <= 0.0 || gain <= 0.0 {
        return AmplitudeFrame::silent(amps.len());
    }
    AmplitudeFrame {
        amps: amps.into_iter().map(|a| a / total).collect(),
        gain,
    }
}

/// Shannon entropy (nats) of a distribution.
pub fn entropy(amps: &[f64]) -> f64 {
    amps.iter()
        .filter(|a| **a > 0.0)
        .map(|a| -a * a.ln())
        .sum()
}
