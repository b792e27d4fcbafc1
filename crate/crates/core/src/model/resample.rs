use super::types::{F0Trajectory, HarmonicFrameSequence};
use crate::error::{Error, Result};

/// Control signals that can be brought to a common frame rate.
///
/// Resampling keeps the covered duration: `n` frames at `rate` become
/// `round(n * target / rate)` frames, and samples past the last source frame
/// hold its value.
pub trait Resample: Sized {
    fn resample(&self, target_rate: f64) -> Result<Self>;
}

fn output_len(n: usize, rate: f64, target_rate: f64) -> Result<usize> {
    if !(target_rate.is_finite() && target_rate > 0.0) {
        return Err(Error::param("target_rate", "must be > 0"));
    }
    if n == 0 {
        return Err(Error::InvalidInput("cannot resample an empty control signal".into()));
    }
    Ok(((n as f64 * target_rate / rate).round() as usize).max(1))
}

/// Source position of output frame `j`: (left index, right index, fraction).
fn locate(j: usize, n: usize, rate: f64, target_rate: f64) -> (usize, usize, f64) {
    let pos = j as f64 * rate / target_rate;
    let last = n - 1;
    if pos >= last as f64 {
        return (last, last, 0.0);
    }
    let i = pos.floor() as usize;
    (i, i + 1, pos - i as f64)
}

impl Resample for F0Trajectory {
    /// Log-frequency linear interpolation; rests go to the nearest neighbour.
    fn resample(&self, target_rate: f64) -> Result<Self> {
        let n = self.values.len();
        let out_len = output_len(n, self.rate, target_rate)?;
        if target_rate == self.rate {
            return Ok(self.clone());
        }
        let values = (0..out_len)
            .map(|j| {
                let (i, k, frac) = locate(j, n, self.rate, target_rate);
                match (self.values[i], self.values[k]) {
                    (Some(a), Some(b)) => Some((a.ln() * (1.0 - frac) + b.ln() * frac).exp()),
                    (a, b) => {
                        if frac < 0.5 {
                            a
                        } else {
                            b
                        }
                    }
                }
            })
            .collect();
        Ok(F0Trajectory {
            rate: target_rate,
            values,
        })
    }
}

impl Resample for HarmonicFrameSequence {
    /// Linear interpolation in dB.
    fn resample(&self, target_rate: f64) -> Result<Self> {
        let n = self.frames.len();
        let out_len = output_len(n, self.rate, target_rate)?;
        if target_rate == self.rate {
            return Ok(self.clone());
        }
        let frames = (0..out_len)
            .map(|j| {
                let (i, k, frac) = locate(j, n, self.rate, target_rate);
                self.frames[i]
                    .iter()
                    .zip(&self.frames[k])
                    .map(|(a, b)| a * (1.0 - frac) + b * frac)
                    .collect()
            })
            .collect();
        Ok(HarmonicFrameSequence {
            rate: target_rate,
            k: self.k,
            frames,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_rate_is_identity() {
        let t = F0Trajectory::new(100.0, vec![Some(110.0), None, Some(220.0)]).unwrap();
        assert_eq!(t.resample(100.0).unwrap(), t);
        let f = HarmonicFrameSequence::new(100.0, 2, vec![vec![0.0, -3.0], vec![-6.0, -9.0]])
            .unwrap();
        assert_eq!(f.resample(100.0).unwrap(), f);
    }

    #[test]
    fn f0_midpoint_is_geometric_mean() {
        let t = F0Trajectory::new(1.0, vec![Some(100.0), Some(400.0)]).unwrap();
        let up = t.resample(2.0).unwrap();
        assert_eq!(up.len(), 4);
        assert!((up.values[1].unwrap() - 200.0).abs() < 1e-9);
        assert!((up.values[2].unwrap() - 400.0).abs() < 1e-9);
    }

    #[test]
    fn db_midpoint_is_linear() {
        let f = HarmonicFrameSequence::new(1.0, 1, vec![vec![0.0], vec![-12.0]]).unwrap();
        let up = f.resample(2.0).unwrap();
        assert!((up.frames[1][0] + 6.0).abs() < 1e-12);
    }

    #[test]
    fn rests_propagate_to_nearest_neighbour() {
        let t = F0Trajectory::new(1.0, vec![Some(100.0), None]).unwrap();
        let up = t.resample(4.0).unwrap();
        assert_eq!(up.values[..4], [Some(100.0), Some(100.0), None, None]);
    }

    #[test]
    fn empty_and_bad_rate_rejected() {
        let t = F0Trajectory {
            rate: 1.0,
            values: vec![],
        };
        assert!(matches!(t.resample(2.0), Err(Error::InvalidInput(_))));
        let t = F0Trajectory::new(1.0, vec![Some(100.0)]).unwrap();
        assert!(t.resample(0.0).is_err());
    }
}
