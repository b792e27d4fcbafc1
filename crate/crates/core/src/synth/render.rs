//! Phase-continuous additive oscillator bank.

use std::f64::consts::{LN_10, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::audio::AudioBuffer;
use super::onset::NoteEvent;
use crate::error::{Error, Result};
use crate::model::{AmplitudeFrame, F0Trajectory, SynthParams};

/// Moves harmonic `harmonic` to `harmonic * f0 * 2^(cents/1200)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detune {
    pub harmonic: usize,
    pub cents: f64,
}

/// Release decays to -60 dB over the release time, then cuts to zero.
const RELEASE_FLOOR: f64 = 1e-3;

struct Envelope {
    level: f64,
    attack_step: f64,
    release_coeff: f64,
}

impl Envelope {
    fn new(params: &SynthParams) -> Self {
        let sr = params.sample_rate as f64;
        let attack_step = if params.attack > 0.0 {
            1.0 / (params.attack * sr)
        } else {
            f64::INFINITY
        };
        let release_coeff = if params.release > 0.0 {
            (-3.0 * LN_10 / (params.release * sr)).exp()
        } else {
            0.0
        };
        Self {
            level: 0.0,
            attack_step,
            release_coeff,
        }
    }

    fn next(&mut self, gate: bool) -> f64 {
        if gate {
            self.level = (self.level + self.attack_step).min(1.0);
        } else {
            self.level *= self.release_coeff;
            if self.level < RELEASE_FLOOR {
                self.level = 0.0;
            }
        }
        self.level
    }
}

/// Renders `amps` (one frame per f0 frame) with the note gate in `notes`.
///
/// Every partial keeps its own phase accumulator advanced by
/// `2*pi*k*f0(t)/sample_rate` each sample, so frame boundaries never reset
/// phase. Amplitudes and log-f0 are interpolated linearly between control
/// frames. Partials at or above Nyquist are skipped. Initial phases are drawn
/// from `params.seed`.
pub fn render_additive(
    f0: &F0Trajectory,
    amps: &[AmplitudeFrame],
    notes: &[NoteEvent],
    params: &SynthParams,
    detunes: &[Detune],
) -> Result<AudioBuffer> {
    if f0.len() != amps.len() {
        return Err(Error::InvalidInput(format!(
            "control length mismatch: {} f0 frames vs {} amplitude frames",
            f0.len(),
            amps.len()
        )));
    }
    let k_count = amps.iter().map(|a| a.len()).max().unwrap_or(0);
    if amps.iter().any(|a| a.len() != k_count) {
        return Err(Error::InvalidInput("amplitude frames differ in length".into()));
    }

    let sr = params.sample_rate as f64;
    let nyquist = sr / 2.0;
    let n_samples = (f0.duration() * sr).round() as usize;
    if notes.is_empty() || k_count == 0 {
        return Ok(AudioBuffer::silence(params.sample_rate, n_samples));
    }

    let mut ratios = vec![1.0; k_count];
    for d in detunes {
        if d.harmonic < 1 || d.harmonic > k_count {
            return Err(Error::param(
                "detune.harmonic",
                format!("harmonic {} outside 1..={k_count}", d.harmonic),
            ));
        }
        ratios[d.harmonic - 1] = 2f64.powf(d.cents / 1200.0);
    }

    let levels: Vec<Vec<f64>> = amps
        .iter()
        .map(|a| a.amps.iter().map(|x| x * a.gain).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut phases: Vec<f64> = (0..k_count).map(|_| rng.gen::<f64>() * TAU).collect();

    let mut env = Envelope::new(params);
    let mut out = vec![0.0; n_samples];
    let mut note_idx = 0;
    let mut held_f0: Option<f64> = None;
    let last = f0.len() - 1;

    for (s, y) in out.iter_mut().enumerate() {
        let t = s as f64 / sr;
        while note_idx < notes.len() && notes[note_idx].end_time() <= t {
            note_idx += 1;
        }
        let gate = notes
            .get(note_idx)
            .is_some_and(|n| n.onset_time <= t && t < n.end_time());
        if gate {
            let n = &notes[note_idx];
            held_f0 = n.pitch_f0.or_else(|| f0.at(n.onset_time)).or(held_f0);
        }
        let level = env.next(gate);

        let pos = t * f0.rate;
        let i = (pos.floor() as usize).min(last);
        let j = (i + 1).min(last);
        let frac = if i == last { 0.0 } else { pos - i as f64 };

        let current_f0 = if params.hold_pitch {
            held_f0
        } else {
            match (f0.values[i], f0.values[j]) {
                (Some(a), Some(b)) => Some((a.ln() * (1.0 - frac) + b.ln() * frac).exp()),
                (a, b) => {
                    if frac < 0.5 {
                        a
                    } else {
                        b
                    }
                }
            }
        };
        let Some(fund) = current_f0 else {
            continue;
        };

        let mut acc = 0.0;
        if level > 0.0 {
            let (li, lj) = (&levels[i], &levels[j]);
            for k in 0..k_count {
                let freq = (k + 1) as f64 * fund * ratios[k];
                if freq >= nyquist {
                    continue;
                }
                let a = li[k] + (lj[k] - li[k]) * frac;
                if a != 0.0 {
                    acc += a * phases[k].sin();
                }
            }
        }
        for k in 0..k_count {
            let freq = (k + 1) as f64 * fund * ratios[k];
            if freq < nyquist {
                phases[k] = (phases[k] + TAU * freq / sr) % TAU;
            }
        }
        *y = acc * level;
    }

    Ok(AudioBuffer::new(params.sample_rate, out))
}
