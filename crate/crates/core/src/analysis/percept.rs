//! Rule-based estimate of how many pitches a listener is likely to report.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::f0::nearest_harmonic;
use super::labels::DEFAULT_TOLERANCE_CENTS;
use super::lines::MelodicLine;
use super::stft::Spectrogram;
use super::tracking::PartialTrack;
use crate::psycho::Weighting;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Two or more individually audible harmonic lines.
    #[serde(rename = "A")]
    AudibleHarmonic,
    /// Odd harmonics only above a weak fundamental, spaced 2·f0.
    #[serde(rename = "B")]
    OddSpacing,
    /// A strong partial far from any harmonic position.
    #[serde(rename = "C")]
    Inharmonicity,
}

impl Rule {
    pub fn letter(self) -> char {
        match self {
            Rule::AudibleHarmonic => 'A',
            Rule::OddSpacing => 'B',
            Rule::Inharmonicity => 'C',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchPercept {
    pub start: f64,
    pub end: f64,
    pub estimated_pitch_count: usize,
    pub triggered_rules: Vec<Rule>,
    /// Harmonic indices of the lines active over the span.
    pub lines: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerceptConfig {
    /// A partial is strong within this many dB of the frame's loudest
    /// weighted level.
    pub strong_margin: f64,
    pub absolute_floor: f64,
    /// Relative tolerance on the 2·f0 spacing.
    pub spacing_tolerance: f64,
    pub inharmonicity_cents: f64,
    pub label_tolerance_cents: f64,
    /// Share of a span's frames on which B or C must hold.
    pub min_rule_fraction: f64,
}

impl Default for PerceptConfig {
    fn default() -> Self {
        Self {
            strong_margin: 10.0,
            absolute_floor: -60.0,
            spacing_tolerance: 0.10,
            inharmonicity_cents: 50.0,
            label_tolerance_cents: DEFAULT_TOLERANCE_CENTS,
            min_rule_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct StrongPartial {
    freq: f64,
    harmonic: usize,
    cents: f64,
}

fn strong_partials(
    tracks: &[PartialTrack],
    weighting: &Weighting,
    f0: &[Option<f64>],
    frames: usize,
    cfg: &PerceptConfig,
) -> Vec<Vec<StrongPartial>> {
    let mut points: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); frames];
    for p in tracks.iter().flat_map(|t| &t.frames) {
        if p.frame < frames {
            points[p.frame].push((p.level_db + weighting.weight_db(p.freq), p.level_db, p.freq));
        }
    }
    points
        .into_iter()
        .enumerate()
        .map(|(i, pts)| {
            let Some(fund) = f0.get(i).copied().flatten() else {
                return Vec::new();
            };
            let max = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            let mut strong: Vec<StrongPartial> = pts
                .into_iter()
                .filter(|&(w, raw, _)| w >= max - cfg.strong_margin && raw >= cfg.absolute_floor)
                .map(|(_, _, freq)| {
                    let (harmonic, cents) = nearest_harmonic(freq, fund);
                    StrongPartial {
                        freq,
                        harmonic,
                        cents,
                    }
                })
                .collect();
            strong.sort_by(|a, b| a.freq.total_cmp(&b.freq));
            strong
        })
        .collect()
}

fn odd_spacing(strong: &[StrongPartial], f0: f64, cfg: &PerceptConfig) -> bool {
    let Some(lowest) = strong.first() else {
        return false;
    };
    if strong.len() < 2
        || lowest.harmonic < 3
        || lowest.harmonic % 2 == 0
        || lowest.cents.abs() > cfg.label_tolerance_cents
    {
        return false;
    }
    let target = 2.0 * f0;
    strong
        .windows(2)
        .all(|w| ((w[1].freq - w[0].freq) / target - 1.0).abs() <= cfg.spacing_tolerance)
}

fn inharmonic(strong: &[StrongPartial], cfg: &PerceptConfig) -> bool {
    strong.iter().any(|p| p.cents.abs() > cfg.inharmonicity_cents)
}

/// Splits the voiced, audible frames into spans with a constant set of
/// active lines and applies the rules to each span.
///
/// The count starts at the number of concurrent lines (Rule A when two or
/// more). Rule B and Rule C each force at least two pitches when they hold on
/// `min_rule_fraction` of the span's frames.
pub fn estimate_pitch_count(
    lines: &[MelodicLine],
    tracks: &[PartialTrack],
    f0: &[Option<f64>],
    weighted: &Spectrogram,
    weighting: &Weighting,
    cfg: &PerceptConfig,
) -> Vec<PitchPercept> {
    let n = weighted.frame_count();
    let strong = strong_partials(tracks, weighting, f0, n, cfg);
    let half_hop = weighted.hop / 2.0;

    struct Span {
        first: usize,
        last: usize,
        set: BTreeSet<usize>,
        b: usize,
        c: usize,
    }
    let mut spans: Vec<Span> = Vec::new();
    for i in 0..n {
        let Some(fund) = f0.get(i).copied().flatten() else {
            continue;
        };
        if strong[i].is_empty() {
            continue;
        }
        let t = weighted.times[i];
        let set: BTreeSet<usize> = lines
            .iter()
            .filter(|l| l.is_active(t))
            .map(|l| l.harmonic_index)
            .collect();
        let b = odd_spacing(&strong[i], fund, cfg) as usize;
        let c = inharmonic(&strong[i], cfg) as usize;
        match spans.last_mut() {
            Some(s) if s.last + 1 == i && s.set == set => {
                s.last = i;
                s.b += b;
                s.c += c;
            }
            _ => spans.push(Span {
                first: i,
                last: i,
                set,
                b,
                c,
            }),
        }
    }

    spans
        .into_iter()
        .map(|s| {
            let frames = (s.last - s.first + 1) as f64;
            let mut rules = Vec::new();
            let mut count = s.set.len().max(1);
            if s.set.len() >= 2 {
                rules.push(Rule::AudibleHarmonic);
            }
            if s.b as f64 >= cfg.min_rule_fraction * frames {
                rules.push(Rule::OddSpacing);
            }
            if s.c as f64 >= cfg.min_rule_fraction * frames {
                rules.push(Rule::Inharmonicity);
            }
            if rules.iter().any(|r| *r != Rule::AudibleHarmonic) {
                count = count.max(2);
            }
            PitchPercept {
                start: weighted.times[s.first] - half_hop,
                end: weighted.times[s.last] + half_hop,
                estimated_pitch_count: count,
                triggered_rules: rules,
                lines: s.set.into_iter().collect(),
            }
        })
        .collect()
}

/// Highest count over all spans, or 1 when there are none.
pub fn max_pitch_count(percepts: &[PitchPercept]) -> usize {
    percepts.iter().map(|p| p.estimated_pitch_count).max().unwrap_or(1)
}

/// Duration-weighted share of the percepts in which `rule` fired.
pub fn rule_coverage(percepts: &[PitchPercept], rule: Rule) -> f64 {
    let total: f64 = percepts.iter().map(|p| p.end - p.start).sum();
    if total <= 0.0 {
        return 0.0;
    }
    percepts
        .iter()
        .filter(|p| p.triggered_rules.contains(&rule))
        .map(|p| p.end - p.start)
        .sum::<f64>()
        / total
}
