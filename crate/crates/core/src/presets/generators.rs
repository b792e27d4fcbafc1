use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{HarmonicFrameSequence, DB_FLOOR};
use crate::synth::Detune;

/// Boosted harmonics per woofer mode (mode 1 first). A stand-in set, not the
/// commercial patch's mapping.
pub const WOOFER_MODES: [&[usize]; 7] = [&[], &[2], &[3], &[4], &[5], &[2, 4], &[3, 5]];
pub const WOOFER_BOOST_DB: f64 = 15.0;
const WOOFER_K: usize = 16;
/// -12 dB per octave.
const WOOFER_DB_PER_DECADE: f64 = -40.0;

const CROSSFADE: f64 = 0.05;
const HOLD_JITTER: f64 = 0.25;

fn constant(frame: Vec<f64>, frames: usize, rate: f64) -> Result<HarmonicFrameSequence> {
    if frames == 0 {
        return Err(Error::InvalidInput("frame count must be >= 1".into()));
    }
    HarmonicFrameSequence::new(rate, frame.len(), vec![frame; frames])
}

fn rolloff(k: usize, db_per_decade: f64) -> Vec<f64> {
    (1..=k).map(|h| db_per_decade * (h as f64).log10()).collect()
}

/// Static series with `m[k] = db_per_decade * log10(k)`.
pub fn generate_series(k: usize, db_per_decade: f64, frames: usize, rate: f64) -> Result<HarmonicFrameSequence> {
    if k < 1 {
        return Err(Error::param("K", "must be >= 1"));
    }
    constant(rolloff(k, db_per_decade), frames, rate)
}

/// A seeded random walk over `favored_set` picks one favourite at a time and
/// boosts it by `boost_db` over a 1/k baseline. Each favourite is held for
/// `period` seconds give or take 25%, and hand-overs are linear crossfades in
/// dB lasting 50 ms. The walk moves to a neighbour within the sorted set.
pub fn generate_wandering_favorite(
    k: usize,
    period: f64,
    favored_set: &[usize],
    boost_db: f64,
    seed: u64,
    frames: usize,
    rate: f64,
) -> Result<HarmonicFrameSequence> {
    if favored_set.is_empty() {
        return Err(Error::param("favored_set", "must not be empty"));
    }
    if let Some(h) = favored_set.iter().find(|&&h| h < 1 || h > k) {
        return Err(Error::param("favored_set", format!("harmonic {h} outside 1..={k}")));
    }
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::param("period", "must be > 0"));
    }
    let mut set = favored_set.to_vec();
    set.sort_unstable();
    set.dedup();

    let duration = frames as f64 / rate;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rng.gen_range(0..set.len());
    // (switch time, favourite from then on)
    let mut schedule = vec![(f64::NEG_INFINITY, set[idx])];
    let mut t = 0.0;
    loop {
        t += period * (1.0 + HOLD_JITTER * rng.gen_range(-1.0..=1.0));
        if t >= duration {
            break;
        }
        if set.len() > 1 {
            idx = if idx == 0 {
                1
            } else if idx == set.len() - 1 || rng.gen_bool(0.5) {
                idx - 1
            } else {
                idx + 1
            };
        }
        schedule.push((t, set[idx]));
    }

    let base = rolloff(k, -20.0);
    let seq = (0..frames)
        .map(|i| {
            let t = i as f64 / rate;
            let mut m = base.clone();
            let cur = schedule.iter().rposition(|(s, _)| *s <= t + CROSSFADE / 2.0).unwrap_or(0);
            let (switch, to) = schedule[cur];
            let from = if cur > 0 { schedule[cur - 1].1 } else { to };
            let w = ((t - (switch - CROSSFADE / 2.0)) / CROSSFADE).clamp(0.0, 1.0);
            if from == to {
                m[to - 1] += boost_db;
            } else {
                m[to - 1] += boost_db * w;
                m[from - 1] += boost_db * (1.0 - w);
            }
            m
        })
        .collect();
    HarmonicFrameSequence::new(rate, k, seq)
}

/// Odd harmonics at a 1/k baseline, evens at the floor, and the fundamental
/// attenuated by `attenuation_db`.
pub fn generate_odd_weak_fundamental(
    k: usize,
    attenuation_db: f64,
    frames: usize,
    rate: f64,
) -> Result<HarmonicFrameSequence> {
    if k < 1 {
        return Err(Error::param("K", "must be >= 1"));
    }
    if !(attenuation_db.is_finite() && attenuation_db >= 0.0) {
        return Err(Error::param("fundamental_attenuation", "must be >= 0 dB"));
    }
    let frame = (1..=k)
        .map(|h| match h {
            1 => -attenuation_db,
            h if h % 2 == 0 => DB_FLOOR,
            h => -20.0 * (h as f64).log10(),
        })
        .collect();
    constant(frame, frames, rate)
}

/// Dark rolloff with the mode's harmonic set boosted by 15 dB.
pub fn generate_woofer_modes(mode: u8, frames: usize, rate: f64) -> Result<HarmonicFrameSequence> {
    if !(1..=7).contains(&mode) {
        return Err(Error::param("mode", "must be in 1..=7"));
    }
    let mut frame = rolloff(WOOFER_K, WOOFER_DB_PER_DECADE);
    for h in WOOFER_MODES[mode as usize - 1] {
        frame[h - 1] += WOOFER_BOOST_DB;
    }
    constant(frame, frames, rate)
}

/// Harmonics 1, 2, 3, 4 and 6 strong with a -3 dB/octave slope, everything
/// else 30 dB under that slope.
pub fn generate_power_chord(f0: f64, frames: usize, rate: f64) -> Result<HarmonicFrameSequence> {
    if !(60.0..=250.0).contains(&f0) {
        return Err(Error::param("f0", "power chord f0 must be in 60..=250 Hz"));
    }
    let frame = (1..=12usize)
        .map(|h| {
            let slope = -3.0 * (h as f64).log2();
            if [1, 2, 3, 4, 6].contains(&h) {
                slope
            } else {
                slope - 30.0
            }
        })
        .collect();
    constant(frame, frames, rate)
}

/// Render directive moving harmonic `detune_index` by `cents`.
pub fn generate_inharmonic_variant(
    base: &HarmonicFrameSequence,
    detune_index: usize,
    cents: f64,
) -> Result<Detune> {
    if !(2..=base.k).contains(&detune_index) {
        return Err(Error::param("detune_index", format!("must be in 2..={}", base.k)));
    }
    if !cents.is_finite() {
        return Err(Error::param("detune_cents", "must be finite"));
    }
    Ok(Detune {
        harmonic: detune_index,
        cents,
    })
}
