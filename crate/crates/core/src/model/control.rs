//! Control-data interchange: `{schema_version, rate, f0[], frames[][], K}`.
//!
//! f0 values are Hz with `null` for rests; frame entries are dB.

use serde::{Deserialize, Serialize};

use super::types::{F0Trajectory, HarmonicFrameSequence};
use crate::error::{Error, Result};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlData {
    pub schema_version: u32,
    pub rate: f64,
    pub f0: Vec<Option<f64>>,
    pub frames: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: usize,
}

impl ControlData {
    pub fn new(f0: &F0Trajectory, frames: &HarmonicFrameSequence) -> Result<Self> {
        if f0.rate != frames.rate {
            return Err(Error::InvalidInput(format!(
                "f0 rate {} differs from frame rate {}",
                f0.rate, frames.rate
            )));
        }
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            rate: f0.rate,
            f0: f0.values.clone(),
            frames: frames.frames.clone(),
            k: frames.k,
        })
    }

    pub fn into_parts(self) -> Result<(F0Trajectory, HarmonicFrameSequence)> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let f0 = F0Trajectory::new(self.rate, self.f0)?;
        let frames = HarmonicFrameSequence::new(self.rate, self.k, self.frames)?;
        Ok((f0, frames))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("control data serializes")
    }
}
