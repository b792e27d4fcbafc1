//! Linear-phase FIR realizing the weight curve in the time domain, for
//! listening to "weighted audio". Analysis weights spectra directly.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::Weighting;
use crate::error::{Error, Result};
use crate::synth::AudioBuffer;

/// Odd length keeps the filter type I (symmetric, integer delay).
pub const DEFAULT_FIR_TAPS: usize = 16_385;

/// Frequency-sampling design: the weight curve is sampled on a dense grid,
/// inverse transformed, centred and Hann-windowed.
pub fn weighting_fir(phon: f64, sample_rate: u32, taps: usize) -> Result<Vec<f64>> {
    if taps < 3 || taps % 2 == 0 {
        return Err(Error::param("taps", "must be odd and >= 3"));
    }
    let weighting = Weighting::for_phon(phon)?;
    let grid = (4 * taps).next_power_of_two();
    let sr = sample_rate as f64;

    let mut spectrum: Vec<Complex<f64>> = (0..grid)
        .map(|k| {
            let bin = if k <= grid / 2 { k } else { grid - k };
            let f = bin as f64 * sr / grid as f64;
            Complex::new(10f64.powf(weighting.weight_db(f) / 20.0), 0.0)
        })
        .collect();
    FftPlanner::new()
        .plan_fft_inverse(grid)
        .process(&mut spectrum);

    let centre = (taps - 1) / 2;
    Ok((0..taps)
        .map(|n| {
            let lag = (n as isize - centre as isize).rem_euclid(grid as isize) as usize;
            let window = 0.5 - 0.5 * (2.0 * PI * n as f64 / (taps - 1) as f64).cos();
            spectrum[lag].re / grid as f64 * window
        })
        .collect())
}

/// Filters `audio` with the weighting FIR, compensating the group delay so
/// the output stays time-aligned with the input.
pub fn apply_weighting_fir(audio: &AudioBuffer, phon: f64, taps: usize) -> Result<AudioBuffer> {
    let h = weighting_fir(phon, audio.sample_rate, taps)?;
    if audio.is_empty() {
        return Ok(audio.clone());
    }
    let full_len = audio.len() + h.len() - 1;
    let n = full_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut x: Vec<Complex<f64>> = audio
        .samples
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n)
        .collect();
    let mut hf: Vec<Complex<f64>> = h
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n)
        .collect();
    fwd.process(&mut x);
    fwd.process(&mut hf);
    for (a, b) in x.iter_mut().zip(&hf) {
        *a *= b;
    }
    inv.process(&mut x);

    let delay = (taps - 1) / 2;
    let samples = x[delay..delay + audio.len()]
        .iter()
        .map(|c| c.re / n as f64)
        .collect();
    Ok(AudioBuffer::new(audio.sample_rate, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn response_db(h: &[f64], freq: f64, sr: f64) -> f64 {
        let (re, im) = h.iter().enumerate().fold((0.0, 0.0), |(re, im), (n, v)| {
            let ph = -2.0 * PI * freq * n as f64 / sr;
            (re + v * ph.cos(), im + v * ph.sin())
        });
        20.0 * re.hypot(im).log10()
    }

    #[test]
    fn fir_matches_weight_curve_within_one_db() {
        let sr = 48_000;
        let h = weighting_fir(60.0, sr, DEFAULT_FIR_TAPS).unwrap();
        let w = Weighting::for_phon(60.0).unwrap();
        let mut f: f64 = 40.0;
        while f <= 10_000.0 {
            let err = response_db(&h, f, sr as f64) - w.weight_db(f);
            assert!(err.abs() < 1.0, "{f} Hz: {err} dB");
            f *= 2f64.powf(1.0 / 6.0);
        }
    }

    #[test]
    fn filtering_keeps_alignment() {
        let sr = 48_000;
        let x: Vec<f64> = (0..sr / 2)
            .map(|i| (2.0 * PI * 1000.0 * i as f64 / sr as f64).sin())
            .collect();
        let audio = AudioBuffer::new(sr, x.clone());
        let out = apply_weighting_fir(&audio, 60.0, 4097).unwrap();
        // 1 kHz has zero weight: the middle of the buffer passes unchanged.
        let mid = sr as usize / 4;
        for i in mid..mid + 100 {
            assert!((out.samples[i] - x[i]).abs() < 0.02);
        }
    }
}
