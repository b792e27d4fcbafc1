//! Resonant second-order low-pass (bilinear transform, RBJ cookbook form)
//! with cutoff keytracking.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Keytracking reference pitch (middle C).
pub const KEYTRACK_REFERENCE_HZ: f64 = 261.63;

/// Normalized biquad coefficients (`a0 == 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lowpass {
    pub cutoff: f64,
    pub q: f64,
    pub sample_rate: f64,
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Lowpass {
    pub fn new(cutoff: f64, q: f64, sample_rate: f64) -> Result<Self> {
        if !(q.is_finite() && q >= 0.5) {
            return Err(Error::param("filter_resonance", "Q must be >= 0.5"));
        }
        if !(cutoff.is_finite() && cutoff > 0.0 && cutoff < sample_rate / 2.0) {
            return Err(Error::param("filter_cutoff", "must be in (0, Nyquist)"));
        }
        let w0 = 2.0 * PI * cutoff / sample_rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Ok(Self {
            cutoff,
            q,
            sample_rate,
            b0: (1.0 - cos) / 2.0 / a0,
            b1: (1.0 - cos) / a0,
            b2: (1.0 - cos) / 2.0 / a0,
            a1: -2.0 * cos / a0,
            a2: (1.0 - alpha) / a0,
        })
    }

    /// Magnitude response at `freq` Hz.
    pub fn magnitude_at(&self, freq: f64) -> f64 {
        let w = 2.0 * PI * freq / self.sample_rate;
        let (s1, c1) = w.sin_cos();
        let (s2, c2) = (2.0 * w).sin_cos();
        let num_re = self.b0 + self.b1 * c1 + self.b2 * c2;
        let num_im = -(self.b1 * s1 + self.b2 * s2);
        let den_re = 1.0 + self.a1 * c1 + self.a2 * c2;
        let den_im = -(self.a1 * s1 + self.a2 * s2);
        (num_re.hypot(num_im)) / (den_re.hypot(den_im))
    }

    /// Direct form II transposed.
    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        let (mut z1, mut z2) = (0.0, 0.0);
        input
            .iter()
            .map(|&x| {
                let y = self.b0 * x + z1;
                z1 = self.b1 * x - self.a1 * y + z2;
                z2 = self.b2 * x - self.a2 * y;
                y
            })
            .collect()
    }
}

/// Cutoff after keytracking, clamped to `(20, 0.95 * Nyquist)`.
pub fn effective_cutoff(cutoff: f64, keytrack: f64, f0_ref: f64, sample_rate: f64) -> f64 {
    let tracked = if f0_ref > 0.0 && keytrack != 0.0 {
        cutoff * (f0_ref / KEYTRACK_REFERENCE_HZ).powf(keytrack)
    } else {
        cutoff
    };
    tracked.clamp(20.0, 0.95 * sample_rate / 2.0)
}

/// Applies the keytracked resonant low-pass to `audio`.
pub fn lowpass_filter(
    audio: &AudioBuffer,
    cutoff: f64,
    resonance: f64,
    keytrack: f64,
    f0_ref: f64,
) -> Result<(AudioBuffer, Lowpass)> {
    if !(resonance.is_finite() && resonance >= 0.5) {
        return Err(Error::param("filter_resonance", "Q must be >= 0.5"));
    }
    let sr = audio.sample_rate as f64;
    let fc = effective_cutoff(cutoff, keytrack, f0_ref, sr);
    let filter = Lowpass::new(fc, resonance, sr)?;
    Ok((
        AudioBuffer::new(audio.sample_rate, filter.process(&audio.samples)),
        filter,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unity_at_dc_and_twelve_db_per_octave() {
        let f = Lowpass::new(1000.0, std::f64::consts::FRAC_1_SQRT_2, 48_000.0).unwrap();
        assert!((20.0 * f.magnitude_at(0.0).log10()).abs() < 1e-9);
        let g8 = 20.0 * f.magnitude_at(8000.0).log10();
        let g16 = 20.0 * f.magnitude_at(16000.0).log10();
        // bilinear warping steepens the slope near Nyquist
        assert!(g16 - g8 < -11.0, "{g8} {g16}");
    }

    #[test]
    fn resonance_peak_sits_near_cutoff() {
        let f = Lowpass::new(2000.0, 8.0, 48_000.0).unwrap();
        let (peak_f, _) = (1000..4000)
            .map(|hz| (hz as f64, f.magnitude_at(hz as f64)))
            .fold((0.0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        assert!((peak_f - 2000.0).abs() <= 100.0, "{peak_f}");
    }

    #[test]
    fn keytracking_scales_by_pitch_ratio() {
        let fc = effective_cutoff(1000.0, 1.0, 2.0 * KEYTRACK_REFERENCE_HZ, 48_000.0);
        assert!((fc - 2000.0).abs() < 1e-9);
        assert_eq!(effective_cutoff(1000.0, 0.0, 55.0, 48_000.0), 1000.0);
        assert_eq!(effective_cutoff(1e6, 0.0, 55.0, 48_000.0), 0.95 * 24_000.0);
        assert_eq!(effective_cutoff(1.0, 0.0, 55.0, 48_000.0), 20.0);
    }

    #[test]
    fn low_q_rejected() {
        let a = AudioBuffer::silence(48_000, 4);
        assert!(lowpass_filter(&a, 1000.0, 0.4, 0.0, 100.0).is_err());
    }

    #[test]
    fn wide_open_filter_passes_band_limited_input() {
        let sr = 48_000;
        let x: Vec<f64> = (0..sr)
            .map(|i| 0.9 * (2.0 * PI * 440.0 * i as f64 / sr as f64).sin())
            .collect();
        let audio = AudioBuffer::new(sr, x.clone());
        let (out, _) = lowpass_filter(&audio, 1e9, std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.0)
            .unwrap();
        let dev = x
            .iter()
            .zip(&out.samples)
            .skip(64)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(dev < 1e-2, "{dev}");
    }
}
