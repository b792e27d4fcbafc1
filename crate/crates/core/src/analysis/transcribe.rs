use serde::{Deserialize, Serialize};

use super::lines::MelodicLine;
use crate::SCHEMA_VERSION;

pub const A4_HZ: f64 = 440.0;

const NOTE_NAMES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

/// Nearest equal-tempered note name and the offset from it in cents.
pub fn note_name(freq: f64) -> (String, f64) {
    let midi = 69.0 + 12.0 * (freq / A4_HZ).log2();
    let nearest = midi.round();
    let cents = 100.0 * (midi - nearest);
    let n = nearest as i64;
    let name = format!("{}{}", NOTE_NAMES[n.rem_euclid(12) as usize], n.div_euclid(12) - 1);
    (name, cents)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscribedNote {
    pub start: f64,
    pub end: f64,
    pub pitch_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cents: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Voice {
    pub harmonic_index: usize,
    pub notes: Vec<TranscribedNote>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcription {
    pub schema_version: u32,
    pub quantized: bool,
    pub voices: Vec<Voice>,
}

impl Transcription {
    pub fn is_empty(&self) -> bool {
        self.voices.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcription serializes")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::InvalidInput(e.to_string()))
    }
}

/// One voice per line, lowest harmonic index first.
pub fn transcribe(lines: &[MelodicLine], quantize: bool) -> Transcription {
    let mut voices: Vec<Voice> = lines
        .iter()
        .map(|line| Voice {
            harmonic_index: line.harmonic_index,
            notes: line
                .segments
                .iter()
                .map(|s| {
                    let (note, cents) = if quantize {
                        let (n, c) = note_name(s.pitch_hz);
                        (Some(n), Some(c))
                    } else {
                        (None, None)
                    };
                    TranscribedNote {
                        start: s.start,
                        end: s.end,
                        pitch_hz: s.pitch_hz,
                        note,
                        cents,
                    }
                })
                .collect(),
        })
        .collect();
    voices.sort_by_key(|v| v.harmonic_index);
    Transcription {
        schema_version: SCHEMA_VERSION,
        quantized: quantize,
        voices,
    }
}
