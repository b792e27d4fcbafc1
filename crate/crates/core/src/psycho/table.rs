//! Embedded ISO 226:2003 parameter table.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const EMBEDDED_TABLE: &str = include_str!("../../data/iso226_2003.csv");

/// SHA-256 of the embedded asset bytes.
pub const EMBEDDED_TABLE_SHA256: &str =
    "8cd90666cd7b6d5c4ec9d9df8cf80dc780db830123254e062d3c32809e21e061";

/// File name looked up under `HF_DATA_DIR` to override the embedded table.
pub const TABLE_FILE_NAME: &str = "iso226_2003.csv";

pub const ANCHOR_COUNT: usize = 29;

/// The 29 anchor rows: frequency, exponent `alpha_f`, transfer magnitude
/// `L_U` and hearing threshold `T_f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Iso226Table {
    pub version: String,
    pub sha256: String,
    pub frequencies: Vec<f64>,
    pub alpha_f: Vec<f64>,
    pub l_u: Vec<f64>,
    pub t_f: Vec<f64>,
}

impl Iso226Table {
    pub fn embedded() -> Self {
        Self::parse(EMBEDDED_TABLE).expect("embedded ISO 226 table parses")
    }

    /// The table under `$HF_DATA_DIR` if present, else the embedded one.
    pub fn load() -> Result<Self> {
        match std::env::var_os("HF_DATA_DIR") {
            Some(dir) => {
                let path = Path::new(&dir).join(TABLE_FILE_NAME);
                if path.exists() {
                    Self::parse(&std::fs::read_to_string(&path)?)
                } else {
                    Ok(Self::embedded())
                }
            }
            None => Ok(Self::embedded()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sha256 = hex::encode(Sha256::digest(text.as_bytes()));
        let mut version = String::from("unversioned");
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("version:") {
                    version = v.trim().to_string();
                }
                continue;
            }
            if line.starts_with("freq_hz") {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Error::Asset(format!("line {}: {e}", lineno + 1)))?;
            if cols.len() != 4 {
                return Err(Error::Asset(format!(
                    "line {}: expected 4 columns, got {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            rows.push(cols);
        }
        if rows.len() != ANCHOR_COUNT {
            return Err(Error::Asset(format!(
                "expected {ANCHOR_COUNT} anchors, got {}",
                rows.len()
            )));
        }
        if rows.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::Asset("anchor frequencies must increase".into()));
        }
        Ok(Self {
            version,
            sha256,
            frequencies: rows.iter().map(|r| r[0]).collect(),
            alpha_f: rows.iter().map(|r| r[1]).collect(),
            l_u: rows.iter().map(|r| r[2]).collect(),
            t_f: rows.iter().map(|r| r[3]).collect(),
        })
    }

    /// Human-readable dump for audits.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# ISO 226:2003 parameters\n# version: {}\n# sha256: {}\nfreq_hz\talpha_f\tL_U_dB\tT_f_dB\n",
            self.version, self.sha256
        );
        for i in 0..self.frequencies.len() {
            out.push_str(&format!(
                "{}\t{:.3}\t{:.1}\t{:.1}\n",
                self.frequencies[i], self.alpha_f[i], self.l_u[i], self.t_f[i]
            ));
        }
        out
    }
}
