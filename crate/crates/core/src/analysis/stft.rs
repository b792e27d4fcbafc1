use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psycho::Weighting;
use crate::synth::AudioBuffer;

/// Magnitude floor in dBFS; digital silence lands here.
pub const SPEC_DB_FLOOR: f64 = -200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    #[default]
    Hann,
    Hamming,
    BlackmanHarris,
    Rectangular,
}

impl Window {
    /// Periodic (DFT-even) window of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        let nf = n as f64;
        (0..n)
            .map(|i| {
                let x = 2.0 * PI * i as f64 / nf;
                match self {
                    Window::Hann => 0.5 - 0.5 * x.cos(),
                    Window::Hamming => 0.54 - 0.46 * x.cos(),
                    Window::BlackmanHarris => {
                        0.35875 - 0.48829 * x.cos() + 0.14128 * (2.0 * x).cos()
                            - 0.01168 * (3.0 * x).cos()
                    }
                    Window::Rectangular => 1.0,
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hann" => Ok(Window::Hann),
            "hamming" => Ok(Window::Hamming),
            "blackman-harris" => Ok(Window::BlackmanHarris),
            "rectangular" => Ok(Window::Rectangular),
            other => Err(Error::param("window", format!("unknown window `{other}`"))),
        }
    }
}

/// Short-time magnitudes in dBFS (a full-scale sine peaks near 0 dB).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    pub sample_rate: u32,
    pub window_size: usize,
    pub hop_samples: usize,
    /// Hop in seconds.
    pub hop: f64,
    /// Centre time of each frame, seconds.
    pub times: Vec<f64>,
    /// Bin centre frequencies, `k * sample_rate / window_size`.
    pub bins: Vec<f64>,
    /// `magnitudes[frame][bin]`, dB.
    pub magnitudes: Vec<Vec<f64>>,
}

impl Spectrogram {
    pub fn bin_width(&self) -> f64 {
        self.sample_rate as f64 / self.window_size as f64
    }

    pub fn frame_count(&self) -> usize {
        self.magnitudes.len()
    }

    /// Largest magnitude within `radius` bins of `freq`.
    pub fn level_near(&self, frame: usize, freq: f64, radius: usize) -> f64 {
        let row = &self.magnitudes[frame];
        let centre = (freq / self.bin_width()).round() as isize;
        let lo = (centre - radius as isize).max(0) as usize;
        let hi = ((centre + radius as isize).max(0) as usize).min(row.len() - 1);
        if lo > hi {
            return SPEC_DB_FLOOR;
        }
        row[lo..=hi].iter().copied().fold(SPEC_DB_FLOOR, f64::max)
    }

    /// Copy with the equal-loudness weight added to every bin.
    pub fn weighted(&self, weighting: &Weighting) -> Spectrogram {
        let weights: Vec<f64> = self.bins.iter().map(|f| weighting.weight_db(*f)).collect();
        let magnitudes = self
            .magnitudes
            .par_iter()
            .map(|row| row.iter().zip(&weights).map(|(m, w)| m + w).collect())
            .collect();
        Spectrogram {
            magnitudes,
            ..self.clone()
        }
    }
}

/// Short-time Fourier transform magnitudes. Audio shorter than one window
/// yields a single zero-padded frame.
pub fn stft(audio: &AudioBuffer, window_size: usize, hop: usize, window: Window) -> Result<Spectrogram> {
    if window_size < 4 || !window_size.is_power_of_two() {
        return Err(Error::param("window", "window size must be a power of two"));
    }
    if hop == 0 || hop > window_size {
        return Err(Error::param("hop", "hop must be in 1..=window_size"));
    }
    let sr = audio.sample_rate as f64;
    let coeffs = window.coefficients(window_size);
    let norm = 2.0 / coeffs.iter().sum::<f64>();
    let n_frames = if audio.len() <= window_size {
        1
    } else {
        1 + (audio.len() - window_size) / hop
    };
    let fft = FftPlanner::<f64>::new().plan_fft_forward(window_size);
    let n_bins = window_size / 2 + 1;

    let magnitudes: Vec<Vec<f64>> = (0..n_frames)
        .into_par_iter()
        .map(|i| {
            let start = i * hop;
            let mut buf: Vec<Complex<f64>> = (0..window_size)
                .map(|j| {
                    let x = audio.samples.get(start + j).copied().unwrap_or(0.0);
                    Complex::new(x * coeffs[j], 0.0)
                })
                .collect();
            fft.process(&mut buf);
            buf[..n_bins]
                .iter()
                .map(|c| {
                    let mag = c.norm() * norm;
                    if mag > 0.0 {
                        (20.0 * mag.log10()).max(SPEC_DB_FLOOR)
                    } else {
                        SPEC_DB_FLOOR
                    }
                })
                .collect()
        })
        .collect();

    Ok(Spectrogram {
        sample_rate: audio.sample_rate,
        window_size,
        hop_samples: hop,
        hop: hop as f64 / sr,
        times: (0..n_frames)
            .map(|i| (i * hop) as f64 / sr + window_size as f64 / (2.0 * sr))
            .collect(),
        bins: (0..n_bins).map(|k| k as f64 * sr / window_size as f64).collect(),
        magnitudes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, amp: f64, sr: u32, len: usize) -> Vec<f64> {
        (0..len)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / sr as f64).sin())
            .collect()
    }

    fn argmax(row: &[f64]) -> usize {
        row.iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, v)| if *v > b.1 { (i, *v) } else { b })
            .0
    }

    #[test]
    fn sine_peak_lands_on_expected_bin() {
        let audio = AudioBuffer::new(48_000, sine(440.0, 1.0, 48_000, 48_000));
        let spec = stft(&audio, 4096, 512, Window::Hann).unwrap();
        let expected = 440.0 * 4096.0 / 48_000.0;
        for row in &spec.magnitudes {
            assert!((argmax(row) as f64 - expected).abs() <= 1.0);
        }
    }

    #[test]
    fn silence_sits_at_floor() {
        let audio = AudioBuffer::silence(48_000, 10_000);
        let spec = stft(&audio, 1024, 256, Window::Hann).unwrap();
        assert!(spec.magnitudes.iter().flatten().all(|m| *m == SPEC_DB_FLOOR));
    }

    #[test]
    fn short_input_gives_one_padded_frame() {
        let audio = AudioBuffer::new(48_000, vec![0.5; 100]);
        let spec = stft(&audio, 1024, 256, Window::Hann).unwrap();
        assert_eq!(spec.frame_count(), 1);
    }

    #[test]
    fn bins_are_uniform() {
        let audio = AudioBuffer::silence(48_000, 4096);
        let spec = stft(&audio, 4096, 512, Window::Hann).unwrap();
        assert_eq!(spec.bins.len(), 2049);
        assert!((spec.bins[1] - 48_000.0 / 4096.0).abs() < 1e-12);
        assert!((spec.bins[2048] - 24_000.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_geometry() {
        let audio = AudioBuffer::silence(48_000, 4096);
        assert!(stft(&audio, 1000, 256, Window::Hann).is_err());
        assert!(stft(&audio, 1024, 2048, Window::Hann).is_err());
        assert!(stft(&audio, 1024, 0, Window::Hann).is_err());
    }
}
