//! Procedural control data: the wandering favourite harmonic, odd harmonics
//! over a weak fundamental, woofer-style modes, a power-chord spectrum and an
//! inharmonic variant, plus plain controls.

mod catalog;
mod generators;

pub use catalog::{catalog, dial_specs, Catalog, DialSpec, PresetSummary};
pub use generators::{
    generate_inharmonic_variant, generate_odd_weak_fundamental, generate_power_chord,
    generate_series, generate_wandering_favorite, generate_woofer_modes, WOOFER_BOOST_DB,
    WOOFER_MODES,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ControlData, F0Trajectory, HarmonicFrameSequence, SynthParams, DB_FLOOR};
use crate::synth::{Detune, Scene};

/// Control frames per second for every preset.
pub const CONTROL_RATE: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum F0Program {
    Constant { hz: f64 },
    /// Exponential sweep from `from_hz` to `to_hz` over the preset duration.
    Glissando { from_hz: f64, to_hz: f64 },
    /// Seeded walk over `scale_hz`, one note per `step` seconds. The last
    /// `gap` seconds of each step are silent so every note has its own onset.
    StepMelody { scale_hz: Vec<f64>, step: f64, gap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FrameProgram {
    /// `m[k] = db_per_decade * log10(k)`; -20 is a 1/k amplitude rolloff.
    Series { k: usize, db_per_decade: f64 },
    WanderingFavorite {
        k: usize,
        period: f64,
        favored_set: Vec<usize>,
        boost_db: f64,
    },
    OddWeakFundamental { k: usize, attenuation_db: f64 },
    WooferMode { mode: u8 },
    PowerChord { f0: f64 },
    Inharmonic {
        base: Box<FrameProgram>,
        detune_index: usize,
        cents: f64,
    },
}

impl FrameProgram {
    fn generate(&self, frames: usize, rate: f64, seed: u64) -> Result<(HarmonicFrameSequence, Vec<Detune>)> {
        Ok(match self {
            FrameProgram::Series { k, db_per_decade } => {
                (generate_series(*k, *db_per_decade, frames, rate)?, Vec::new())
            }
            FrameProgram::WanderingFavorite {
                k,
                period,
                favored_set,
                boost_db,
            } => (
                generate_wandering_favorite(*k, *period, favored_set, *boost_db, seed, frames, rate)?,
                Vec::new(),
            ),
            FrameProgram::OddWeakFundamental { k, attenuation_db } => (
                generate_odd_weak_fundamental(*k, *attenuation_db, frames, rate)?,
                Vec::new(),
            ),
            FrameProgram::WooferMode { mode } => (generate_woofer_modes(*mode, frames, rate)?, Vec::new()),
            FrameProgram::PowerChord { f0 } => (generate_power_chord(*f0, frames, rate)?, Vec::new()),
            FrameProgram::Inharmonic {
                base,
                detune_index,
                cents,
            } => {
                let (seq, mut detunes) = base.generate(frames, rate, seed)?;
                detunes.push(generate_inharmonic_variant(&seq, *detune_index, *cents)?);
                (seq, detunes)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSpec {
    pub name: String,
    pub family: String,
    pub description: String,
    pub duration: f64,
    pub f0_program: F0Program,
    pub frame_program: FrameProgram,
    pub seed: u64,
    pub params: SynthParams,
}

impl PresetSpec {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.params.seed = seed;
        self
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    fn f0_values(&self, n: usize) -> Result<(Vec<Option<f64>>, Vec<bool>)> {
        let mut gaps = vec![false; n];
        let values = match &self.f0_program {
            F0Program::Constant { hz } => vec![Some(*hz); n],
            F0Program::Glissando { from_hz, to_hz } => {
                if *from_hz <= 0.0 || *to_hz <= 0.0 {
                    return Err(Error::param("f0_program", "glissando endpoints must be > 0"));
                }
                let span = (n.max(2) - 1) as f64;
                (0..n)
                    .map(|i| Some(from_hz * (to_hz / from_hz).powf(i as f64 / span)))
                    .collect()
            }
            F0Program::StepMelody { scale_hz, step, gap } => {
                if scale_hz.is_empty() {
                    return Err(Error::param("f0_program.scale_hz", "must not be empty"));
                }
                if !(*step > 0.0 && *gap >= 0.0 && gap < step) {
                    return Err(Error::param("f0_program.step", "need step > gap >= 0"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed_f0);
                let step_frames = ((step * CONTROL_RATE).round() as usize).max(1);
                let gap_frames = (gap * CONTROL_RATE).round() as usize;
                let mut current = rng.gen_range(0..scale_hz.len());
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let pos = i % step_frames;
                    if i > 0 && pos == 0 && scale_hz.len() > 1 {
                        let next = rng.gen_range(0..scale_hz.len() - 1);
                        current = if next >= current { next + 1 } else { next };
                    }
                    let last_step = i / step_frames == (n - 1) / step_frames;
                    gaps[i] = !last_step && pos >= step_frames - gap_frames;
                    out.push(Some(scale_hz[current]));
                }
                out
            }
        };
        Ok((values, gaps))
    }

    /// Builds the scene: f0 and frames at `CONTROL_RATE`, plus any detune
    /// directives and the preset's synth settings.
    pub fn scene(&self) -> Result<Scene> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::param("duration", "must be > 0"));
        }
        let n = ((self.duration * CONTROL_RATE).round() as usize).max(1);
        let (values, gaps) = self.f0_values(n)?;
        let f0 = F0Trajectory::new(CONTROL_RATE, values)?;
        let (mut frames, detunes) = self.frame_program.generate(n, CONTROL_RATE, self.seed)?;
        for (frame, gap) in frames.frames.iter_mut().zip(&gaps) {
            if *gap {
                frame.iter_mut().for_each(|m| *m = DB_FLOOR);
            }
        }
        Ok(Scene {
            f0,
            frames,
            detunes,
            params: self.params.clone(),
        })
    }

    pub fn control_data(&self) -> Result<ControlData> {
        let scene = self.scene()?;
        ControlData::new(&scene.f0, &scene.frames)
    }
}

fn preset(
    name: &str,
    family: &str,
    description: &str,
    duration: f64,
    f0_program: F0Program,
    frame_program: FrameProgram,
) -> PresetSpec {
    PresetSpec {
        name: name.into(),
        family: family.into(),
        description: description.into(),
        duration,
        f0_program,
        frame_program,
        seed: 0,
        params: SynthParams::default(),
    }
}

const BASS_SCALE_HZ: [f64; 5] = [110.0, 123.47, 130.81, 146.83, 164.81];

/// Every built-in preset, in catalog order. Names are unique.
pub fn registry() -> Vec<PresetSpec> {
    let series = |k| FrameProgram::Series { k, db_per_decade: -20.0 };
    let mut out = vec![
        preset(
            "wandering-favorite",
            "wandering-favorite",
            "Bass melody whose boosted harmonic wanders between 3 and 5",
            8.0,
            F0Program::StepMelody {
                scale_hz: BASS_SCALE_HZ.to_vec(),
                step: 0.5,
                gap: 0.03,
            },
            FrameProgram::WanderingFavorite {
                k: 16,
                period: 1.0,
                favored_set: vec![3, 5],
                boost_db: 18.0,
            },
        ),
        preset(
            "odd-weak-fundamental",
            "odd-weak-fundamental",
            "Odd harmonics only, fundamental 40 dB down",
            2.0,
            F0Program::Constant { hz: 100.0 },
            FrameProgram::OddWeakFundamental {
                k: 9,
                attenuation_db: 40.0,
            },
        ),
    ];
    out[0].params.harmonic_variation = 0.5;
    for mode in 1..=7u8 {
        let boosted = WOOFER_MODES[mode as usize - 1];
        let description = if boosted.is_empty() {
            "Dark 808-style rolloff, no boost".to_string()
        } else {
            format!("Dark 808-style rolloff, harmonics {boosted:?} boosted")
        };
        out.push(preset(
            &format!("woofer-mode-{mode}"),
            "woofer-modes",
            &description,
            2.0,
            F0Program::Constant { hz: 55.0 },
            FrameProgram::WooferMode { mode },
        ));
    }
    out.extend([
        preset(
            "power-chord",
            "power-chord",
            "Distorted-guitar style spectrum on one harmonic tone",
            2.0,
            F0Program::Constant { hz: 110.0 },
            FrameProgram::PowerChord { f0: 110.0 },
        ),
        preset(
            "inharmonic",
            "inharmonic",
            "Full series with harmonic 4 raised by 80 cents",
            2.0,
            F0Program::Constant { hz: 100.0 },
            FrameProgram::Inharmonic {
                base: Box::new(series(16)),
                detune_index: 4,
                cents: 80.0,
            },
        ),
        preset(
            "full-series",
            "controls",
            "Full harmonic series with 1/k rolloff",
            2.0,
            F0Program::Constant { hz: 100.0 },
            series(16),
        ),
        preset(
            "pure-sine",
            "controls",
            "Single sine",
            2.0,
            F0Program::Constant { hz: 220.0 },
            series(1),
        ),
        preset(
            "glide",
            "controls",
            "Full series gliding up one octave",
            3.0,
            F0Program::Glissando {
                from_hz: 55.0,
                to_hz: 110.0,
            },
            series(16),
        ),
    ]);
    out
}

pub fn find_preset(name: &str) -> Result<PresetSpec> {
    registry()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

pub fn preset_names() -> Vec<String> {
    registry().into_iter().map(|p| p.name).collect()
}
