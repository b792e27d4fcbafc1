use super::f0::nearest_harmonic;
use super::tracking::{PartialTrack, TrackPoint};

pub const DEFAULT_TOLERANCE_CENTS: f64 = 35.0;

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Assigns harmonic indices against the per-frame `f0` (indexed by
/// spectrogram frame).
///
/// A point is harmonic `round(freq / f0)` when it lies within
/// `tolerance_cents` of that multiple; otherwise it is unlabeled and its
/// deviation from the nearest multiple is recorded. A track whose label
/// changes over time (for example when f0 steps and a partial continues on a
/// different harmonic) is split into one track per run. Points at frames
/// without f0 are dropped and counted in `missing_f0_frames`.
pub fn label_harmonics(
    tracks: &[PartialTrack],
    f0: &[Option<f64>],
    tolerance_cents: f64,
) -> Vec<PartialTrack> {
    let mut out = Vec::new();
    for track in tracks {
        let mut missing = 0;
        let mut runs: Vec<(Option<usize>, usize, Vec<TrackPoint>, Vec<f64>)> = Vec::new();
        for p in &track.frames {
            let Some(fund) = f0.get(p.frame).copied().flatten() else {
                missing += 1;
                continue;
            };
            let (nearest, dev) = nearest_harmonic(p.freq, fund);
            let label = (dev.abs() <= tolerance_cents).then_some(nearest);
            match runs.last_mut() {
                Some(run)
                    if run.0 == label
                        && run.1 == nearest
                        && run.2.last().is_some_and(|q| q.frame + 1 == p.frame) =>
                {
                    run.2.push(*p);
                    run.3.push(dev);
                }
                _ => runs.push((label, nearest, vec![*p], vec![dev])),
            }
        }
        if runs.is_empty() {
            out.push(PartialTrack {
                frames: Vec::new(),
                harmonic_index: None,
                inharmonicity_cents: None,
                missing_f0_frames: missing,
            });
            continue;
        }
        for (i, (label, _, points, devs)) in runs.into_iter().enumerate() {
            out.push(PartialTrack {
                frames: points,
                harmonic_index: label,
                inharmonicity_cents: median(devs),
                missing_f0_frames: if i == 0 { missing } else { 0 },
            });
        }
    }
    out.retain(|t| !t.frames.is_empty() || t.missing_f0_frames > 0);
    out
}
