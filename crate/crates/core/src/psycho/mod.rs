//! Equal-loudness weighting of spectra (ISO 226:2003).
//!
//! The weight at frequency `f` for a given phon level is
//! `SPL_contour(1 kHz) - SPL_contour(f)` dB: adding it to a spectrum level
//! maps equal-loudness tones to equal weighted levels. Between the 29
//! anchors the weight is a natural cubic spline in log-frequency; outside
//! `[20 Hz, 12.5 kHz]` it is held at the edge value.

mod fir;
mod table;

pub use fir::{apply_weighting_fir, weighting_fir, DEFAULT_FIR_TAPS};
pub use table::{Iso226Table, ANCHOR_COUNT, EMBEDDED_TABLE_SHA256, TABLE_FILE_NAME};

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};

pub const PHON_MIN: f64 = 20.0;
pub const PHON_MAX: f64 = 80.0;
pub const DEFAULT_PHON: f64 = 60.0;
const REFERENCE_INDEX: usize = 17; // 1 kHz anchor

/// SPL (dB) of the equal-loudness contour at each anchor frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoudnessContour {
    pub phon_level: f64,
    pub anchor_frequencies: Vec<f64>,
    pub spl_values: Vec<f64>,
}

/// The table in use: `$HF_DATA_DIR` override or the embedded asset. Loaded once.
pub fn active_table() -> Result<&'static Iso226Table> {
    static TABLE: OnceLock<Result<Iso226Table>> = OnceLock::new();
    TABLE
        .get_or_init(Iso226Table::load)
        .as_ref()
        .map_err(Clone::clone)
}

fn check_phon(phon: f64) -> Result<()> {
    if (PHON_MIN..=PHON_MAX).contains(&phon) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!(
            "phon level {phon} outside [{PHON_MIN}, {PHON_MAX}]"
        )))
    }
}

/// Equal-loudness contour at `phon` from the standard's parametric formula.
/// The 1 kHz anchor is the phon level by definition.
pub fn contour(phon: f64) -> Result<LoudnessContour> {
    check_phon(phon)?;
    contour_from_table(active_table()?, phon)
}

pub fn contour_from_table(t: &Iso226Table, phon: f64) -> Result<LoudnessContour> {
    check_phon(phon)?;
    let spl_values = (0..t.frequencies.len())
        .map(|i| {
            if i == REFERENCE_INDEX {
                return phon;
            }
            let af = t.alpha_f[i];
            let lu = t.l_u[i];
            let tf = t.t_f[i];
            let a = 4.47e-3 * (10f64.powf(0.025 * phon) - 1.15)
                + (0.4 * 10f64.powf((tf + lu) / 10.0 - 9.0)).powf(af);
            10.0 / af * a.log10() - lu + 94.0
        })
        .collect();
    Ok(LoudnessContour {
        phon_level: phon,
        anchor_frequencies: t.frequencies.clone(),
        spl_values,
    })
}

/// Natural cubic spline through `(x[i], y[i])`.
#[derive(Debug, Clone)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives
}

impl CubicSpline {
    fn natural(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior equations.
            let mut c_prime = vec![0.0; n];
            let mut d_prime = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0;
                let b = 2.0 * (h0 + h1);
                let c = h1;
                let d = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                let denom = b - a * c_prime[i - 1];
                c_prime[i] = c / denom;
                d_prime[i] = (d - a * d_prime[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d_prime[i] - c_prime[i] * m[i + 1];
            }
        }
        Self { x, y, m }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= t).saturating_sub(1).min(n - 2);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Weight curve for one phon level.
#[derive(Debug, Clone)]
pub struct Weighting {
    pub contour: LoudnessContour,
    spline: CubicSpline,
}

impl Weighting {
    pub fn from_contour(contour: LoudnessContour) -> Self {
        let reference = contour.spl_values[REFERENCE_INDEX];
        let x = contour.anchor_frequencies.iter().map(|f| f.ln()).collect();
        let y = contour.spl_values.iter().map(|s| reference - s).collect();
        Self {
            spline: CubicSpline::natural(x, y),
            contour,
        }
    }

    /// Cached weighting for `phon`; safe to share across threads.
    pub fn for_phon(phon: f64) -> Result<Arc<Weighting>> {
        static CACHE: OnceLock<RwLock<HashMap<u64, Arc<Weighting>>>> = OnceLock::new();
        check_phon(phon)?;
        let cache = CACHE.get_or_init(Default::default);
        let key = phon.to_bits();
        if let Some(w) = cache.read().expect("weighting cache poisoned").get(&key) {
            return Ok(Arc::clone(w));
        }
        let w = Arc::new(Weighting::from_contour(contour(phon)?));
        cache
            .write()
            .expect("weighting cache poisoned")
            .entry(key)
            .or_insert_with(|| Arc::clone(&w));
        Ok(w)
    }

    pub fn phon(&self) -> f64 {
        self.contour.phon_level
    }

    /// Weight in dB at `freq` Hz. Exactly 0 at 1 kHz.
    pub fn weight_db(&self, freq: f64) -> f64 {
        if freq == 1000.0 {
            return 0.0;
        }
        let f = freq.clamp(
            self.contour.anchor_frequencies[0],
            self.contour.anchor_frequencies[ANCHOR_COUNT - 1],
        );
        self.spline.eval(f.ln())
    }
}

/// Adds the equal-loudness weight to each `(frequency, level_dB)` pair.
pub fn weight_spectrum(frequencies: &[f64], levels_db: &[f64], phon: f64) -> Result<Vec<f64>> {
    if frequencies.len() != levels_db.len() {
        return Err(Error::InvalidInput(
            "frequency and level vectors differ in length".into(),
        ));
    }
    let w = Weighting::for_phon(phon)?;
    Ok(frequencies
        .iter()
        .zip(levels_db)
        .map(|(f, l)| l + w.weight_db(*f))
        .collect())
}
