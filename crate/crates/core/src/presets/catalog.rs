use serde::{Deserialize, Serialize};

use super::{registry, PresetSpec};
use crate::model::SynthParams;
use crate::SCHEMA_VERSION;

/// Metadata for one synth dial, enough for a UI to build the control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DialSpec {
    pub name: String,
    pub label: String,
    pub min: f64,
    pub max: f64,
    pub default: f64,
    pub unit: String,
    pub step: f64,
    #[serde(default)]
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSummary {
    pub name: String,
    pub family: String,
    pub description: String,
    pub duration: f64,
    pub params: SynthParams,
}

impl From<&PresetSpec> for PresetSummary {
    fn from(p: &PresetSpec) -> Self {
        Self {
            name: p.name.clone(),
            family: p.family.clone(),
            description: p.description.clone(),
            duration: p.duration,
            params: p.params.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    pub schema_version: u32,
    pub presets: Vec<PresetSummary>,
    pub dials: Vec<DialSpec>,
}

fn dial(name: &str, label: &str, min: f64, max: f64, default: f64, unit: &str, step: f64) -> DialSpec {
    DialSpec {
        name: name.into(),
        label: label.into(),
        min,
        max,
        default,
        unit: unit.into(),
        step,
        integer: false,
    }
}

/// Dials in display order. Every range lies inside what `SynthParams`
/// accepts at any supported sample rate.
pub fn dial_specs() -> Vec<DialSpec> {
    let d = SynthParams::default();
    vec![
        dial("onset_threshold", "Onset threshold", -80.0, 0.0, d.onset_threshold, "dB", 0.5),
        DialSpec {
            integer: true,
            ..dial("harmonics", "Harmonics", 1.0, 64.0, d.harmonics as f64, "", 1.0)
        },
        dial("harmonic_variation", "Harmonic variation", 0.05, 4.0, d.harmonic_variation, "T", 0.05),
        dial("odd_even_balance", "Odd/even balance", -1.0, 1.0, d.odd_even_balance, "", 0.01),
        dial("filter_cutoff", "Cutoff", 30.0, 20_000.0, d.filter_cutoff, "Hz", 1.0),
        dial("filter_resonance", "Resonance", 0.5, 20.0, d.filter_resonance, "Q", 0.01),
        dial("filter_keytrack", "Keytrack", 0.0, 1.0, d.filter_keytrack, "", 0.01),
        dial("attack", "Attack", 0.0, 0.5, d.attack, "s", 0.001),
        dial("release", "Release", 0.0, 2.0, d.release, "s", 0.001),
    ]
}

pub fn catalog() -> Catalog {
    Catalog {
        schema_version: SCHEMA_VERSION,
        presets: registry().iter().map(PresetSummary::from).collect(),
        dials: dial_specs(),
    }
}
