use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Log-magnitude used for harmonics that carry no energy. Frames never omit
/// entries; silence is this floor.
pub const DB_FLOOR: f64 = -120.0;

/// Lowest and highest admissible fundamental (exclusive), in Hz.
pub const F0_MIN_HZ: f64 = 10.0;
pub const F0_MAX_HZ: f64 = 4000.0;

/// Sample rates the engine renders at.
pub const SUPPORTED_SAMPLE_RATES: [u32; 3] = [44_100, 48_000, 96_000];

/// Fundamental-frequency control signal sampled at `rate` frames per second.
///
/// `None` entries are rests. Using an explicit marker instead of 0 Hz keeps
/// log-frequency interpolation away from non-positive values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F0Trajectory {
    pub rate: f64,
    pub values: Vec<Option<f64>>,
}

impl F0Trajectory {
    pub fn new(rate: f64, values: Vec<Option<f64>>) -> Result<Self> {
        let traj = Self { rate, values };
        traj.validate()?;
        Ok(traj)
    }

    pub fn constant(rate: f64, f0: f64, frames: usize) -> Result<Self> {
        Self::new(rate, vec![Some(f0); frames])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::param("rate", "control rate must be > 0"));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidInput("f0 trajectory is empty".into()));
        }
        for (i, v) in self.values.iter().enumerate() {
            if let Some(f) = v {
                if !(f.is_finite() && *f > F0_MIN_HZ && *f < F0_MAX_HZ) {
                    return Err(Error::param(
                        format!("f0[{i}]"),
                        format!("{f} Hz outside ({F0_MIN_HZ}, {F0_MAX_HZ})"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.values.len() as f64 / self.rate
    }

    /// f0 at time `t` seconds, log-linear between frames. Returns `None` on a
    /// rest (nearest-neighbour decides when one side is a rest) or outside
    /// the trajectory.
    pub fn at(&self, t: f64) -> Option<f64> {
        let pos = t * self.rate;
        if pos < 0.0 || pos > (self.values.len() - 1) as f64 + 0.5 {
            return None;
        }
        let i = (pos.floor() as usize).min(self.values.len() - 1);
        let frac = pos - i as f64;
        let j = (i + 1).min(self.values.len() - 1);
        match (self.values[i], self.values[j]) {
            (Some(a), Some(b)) => Some((a.ln() * (1.0 - frac) + b.ln() * frac).exp()),
            (a, b) => {
                if frac < 0.5 {
                    a
                } else {
                    b
                }
            }
        }
    }

    /// Median of the voiced values.
    pub fn median_voiced(&self) -> Option<f64> {
        let mut v: Vec<f64> = self.values.iter().flatten().copied().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(|a, b| a.total_cmp(b));
        Some(v[v.len() / 2])
    }
}

/// Per-control-frame log-magnitudes (dB, relative) over harmonic indices
/// `1..=k`. Stands in for the model's predicted constant-Q magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFrameSequence {
    pub rate: f64,
    pub k: usize,
    pub frames: Vec<Vec<f64>>,
}

impl HarmonicFrameSequence {
    pub fn new(rate: f64, k: usize, frames: Vec<Vec<f64>>) -> Result<Self> {
        let seq = Self { rate, k, frames };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::param("rate", "control rate must be > 0"));
        }
        if self.k < 1 {
            return Err(Error::param("K", "harmonic count must be >= 1"));
        }
        if self.frames.is_empty() {
            return Err(Error::InvalidInput("frame sequence is empty".into()));
        }
        for (i, frame) in self.frames.iter().enumerate() {
            if frame.len() != self.k {
                return Err(Error::InvalidFrame(format!(
                    "frame {i} has {} entries, expected {}",
                    frame.len(),
                    self.k
                )));
            }
            if let Some(j) = frame.iter().position(|m| !m.is_finite()) {
                return Err(Error::InvalidFrame(format!("frames[{i}][{j}] is not finite")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Linear per-harmonic amplitudes. `amps` is a distribution (sums to 1) and
/// `gain` carries the overall level; a silent frame has `gain == 0` and a
/// uniform placeholder distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeFrame {
    pub amps: Vec<f64>,
    pub gain: f64,
}

impl AmplitudeFrame {
    pub fn silent(k: usize) -> Self {
        let k = k.max(1);
        Self {
            amps: vec![1.0 / k as f64; k],
            gain: 0.0,
        }
    }

    /// Linear amplitude of harmonic `index` (1-based) including the gain.
    pub fn level(&self, index: usize) -> f64 {
        self.amps.get(index - 1).copied().unwrap_or(0.0) * self.gain
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }
}

/// Synthesizer dials plus render settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    /// Level (dBFS) above which a new note starts.
    pub onset_threshold: f64,
    /// Drop below the threshold (dB) that ends a note.
    pub onset_hysteresis: f64,
    /// Number of harmonics sonified.
    pub harmonics: usize,
    /// Softmax temperature applied to the log-magnitudes. Lower is sharper.
    pub harmonic_variation: f64,
    /// -1 silences odd harmonics, +1 silences even harmonics.
    pub odd_even_balance: f64,
    pub filter_cutoff: f64,
    pub filter_resonance: f64,
    pub filter_keytrack: f64,
    pub sample_rate: u32,
    pub attack: f64,
    pub release: f64,
    /// Freeze f0 at each note onset instead of tracking it.
    pub hold_pitch: bool,
    /// Peak level of the rendered buffer, dBFS.
    pub normalize_dbfs: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            onset_threshold: -40.0,
            onset_hysteresis: 3.0,
            harmonics: 32,
            harmonic_variation: 1.0,
            odd_even_balance: 0.0,
            filter_cutoff: 18_000.0,
            filter_resonance: std::f64::consts::FRAC_1_SQRT_2,
            filter_keytrack: 0.0,
            sample_rate: 48_000,
            attack: 0.005,
            release: 0.08,
            hold_pitch: false,
            normalize_dbfs: -1.0,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn nyquist(&self) -> f64 {
        self.sample_rate as f64 / 2.0
    }

    /// Copy with the given fields replaced. Unknown keys and ill-typed
    /// values are input errors; ranges are left to `validate`.
    pub fn with_overrides(&self, overrides: &serde_json::Map<String, serde_json::Value>) -> Result<Self> {
        let mut value = serde_json::to_value(self).expect("params serialize");
        let fields = value.as_object_mut().expect("params are an object");
        for (key, v) in overrides {
            if !fields.contains_key(key) {
                return Err(Error::InvalidInput(format!("unknown parameter `{key}`")));
            }
            fields.insert(key.clone(), v.clone());
        }
        serde_json::from_value(value).map_err(|e| Error::InvalidInput(format!("params: {e}")))
    }

    /// Checks every dial; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, "must be finite"))
            }
        };
        finite("onset_threshold", self.onset_threshold)?;
        finite("onset_hysteresis", self.onset_hysteresis)?;
        if self.onset_hysteresis < 0.0 {
            return Err(Error::param("onset_hysteresis", "must be >= 0"));
        }
        if self.harmonics < 1 {
            return Err(Error::param("harmonics", "must be >= 1"));
        }
        if !(self.harmonic_variation.is_finite() && self.harmonic_variation > 0.0) {
            return Err(Error::param("harmonic_variation", "temperature must be > 0"));
        }
        if !(-1.0..=1.0).contains(&self.odd_even_balance) {
            return Err(Error::param("odd_even_balance", "must be in [-1, 1]"));
        }
        if !SUPPORTED_SAMPLE_RATES.contains(&self.sample_rate) {
            return Err(Error::param(
                "sample_rate",
                format!("must be one of {SUPPORTED_SAMPLE_RATES:?}"),
            ));
        }
        if !(self.filter_cutoff > 20.0 && self.filter_cutoff < self.nyquist()) {
            return Err(Error::param("filter_cutoff", "must be in (20, sample_rate/2)"));
        }
        if !(self.filter_resonance.is_finite() && self.filter_resonance >= 0.5) {
            return Err(Error::param("filter_resonance", "Q must be >= 0.5"));
        }
        if !(0.0..=1.0).contains(&self.filter_keytrack) {
            return Err(Error::param("filter_keytrack", "must be in [0, 1]"));
        }
        if !(self.attack.is_finite() && self.attack >= 0.0) {
            return Err(Error::param("attack", "must be >= 0 seconds"));
        }
        if !(self.release.is_finite() && self.release >= 0.0) {
            return Err(Error::param("release", "must be >= 0 seconds"));
        }
        if !(self.normalize_dbfs.is_finite() && self.normalize_dbfs <= 0.0) {
            return Err(Error::param("normalize_dbfs", "must be <= 0"));
        }
        Ok(())
    }
}
