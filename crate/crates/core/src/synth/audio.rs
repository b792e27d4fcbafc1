use std::io::{Cursor, Read, Seek};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mono audio at `sample_rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
}

impl AudioBuffer {
    pub fn new(sample_rate: u32, samples: Vec<f64>) -> Self {
        Self {
            sample_rate,
            samples,
        }
    }

    pub fn silence(sample_rate: u32, len: usize) -> Self {
        Self::new(sample_rate, vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self::new(
            self.sample_rate,
            self.samples.iter().map(|x| x * gain).collect(),
        )
    }
}

/// Scales the buffer so its peak sits at `target_dbfs`. Silence stays
/// silence. Targets above 0 dBFS are clamped to 0.
pub fn normalize_peak(audio: &AudioBuffer, target_dbfs: f64) -> AudioBuffer {
    let peak = audio.peak();
    if peak == 0.0 {
        return audio.clone();
    }
    let target = 10f64.powf(target_dbfs.min(0.0) / 20.0);
    audio.scaled(target / peak)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SampleFormat {
    /// 32-bit IEEE float.
    #[default]
    F32,
    /// 16-bit PCM with TPDF dither.
    Pcm16,
}

impl std::str::FromStr for SampleFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" | "float" => Ok(SampleFormat::F32),
            "pcm16" | "s16" | "i16" => Ok(SampleFormat::Pcm16),
            other => Err(Error::param("format", format!("unknown sample format `{other}`"))),
        }
    }
}

/// Encodes a RIFF WAV file in memory. `seed` drives the dither for PCM16.
pub fn encode_wav(audio: &AudioBuffer, format: SampleFormat, seed: u64) -> Result<Vec<u8>> {
    let spec = match format {
        SampleFormat::F32 => hound::WavSpec {
            channels: 1,
            sample_rate: audio.sample_rate,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        },
        SampleFormat::Pcm16 => hound::WavSpec {
            channels: 1,
            sample_rate: audio.sample_rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        },
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut writer = hound::WavWriter::new(&mut cursor, spec)?;
        match format {
            SampleFormat::F32 => {
                for &x in &audio.samples {
                    writer.write_sample(x.clamp(-1.0, 1.0) as f32)?;
                }
            }
            SampleFormat::Pcm16 => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for &x in &audio.samples {
                    let dither: f64 = rng.gen::<f64>() - rng.gen::<f64>();
                    let q = (x.clamp(-1.0, 1.0) * 32767.0 + dither).round();
                    writer.write_sample(q.clamp(-32768.0, 32767.0) as i16)?;
                }
            }
        }
        writer.finalize()?;
    }
    Ok(cursor.into_inner())
}

/// Decodes a mono WAV stream (float or integer PCM).
pub fn decode_wav<R: Read + Seek>(reader: R) -> Result<AudioBuffer> {
    let mut reader = hound::WavReader::new(reader)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::Wav(format!(
            "expected mono audio, got {} channels",
            spec.channels
        )));
    }
    let samples = match spec.sample_format {
        hound::SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<Vec<_>, _>>()?,
        hound::SampleFormat::Int => {
            let scale = (1i64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(AudioBuffer::new(spec.sample_rate, samples))
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let bytes = std::fs::read(path)?;
    decode_wav(Cursor::new(bytes))
}
