//! Binary PPM (P6) rendering of a spectrogram with optional line overlays.
//!
//! Columns are frames, rows are bins from `max_hz` (top) down to 0 Hz. Levels
//! are taken relative to the loudest bin and mapped over [-90, 0] dB through
//! black, blue (0,0,160), magenta (200,0,120), orange (255,140,0) and white
//! at equal spacing. Overlay segments are drawn as yellow (255,255,0) rows.

use super::lines::MelodicLine;
use super::stft::Spectrogram;

pub const DYNAMIC_RANGE_DB: f64 = 90.0;
pub const OVERLAY_RGB: [u8; 3] = [255, 255, 0];

const STOPS: [[f64; 3]; 5] = [
    [0.0, 0.0, 0.0],
    [0.0, 0.0, 160.0],
    [200.0, 0.0, 120.0],
    [255.0, 140.0, 0.0],
    [255.0, 255.0, 255.0],
];

/// Colour for a level `rel_db` below the image maximum.
pub fn colormap(rel_db: f64) -> [u8; 3] {
    let x = ((rel_db + DYNAMIC_RANGE_DB) / DYNAMIC_RANGE_DB).clamp(0.0, 1.0) * 4.0;
    let i = (x.floor() as usize).min(3);
    let frac = x - i as f64;
    let mut rgb = [0u8; 3];
    for c in 0..3 {
        let v = STOPS[i][c] + (STOPS[i + 1][c] - STOPS[i][c]) * frac;
        rgb[c] = v.round() as u8;
    }
    rgb
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Row index of `freq` in an image of `height` rows over `bin_width` bins.
pub fn row_for(freq: f64, bin_width: f64, height: usize) -> Option<usize> {
    let bin = (freq / bin_width).round();
    (bin >= 0.0 && (bin as usize) < height).then(|| height - 1 - bin as usize)
}

pub fn render_spectrogram(spec: &Spectrogram, max_hz: f64, overlay: Option<&[MelodicLine]>) -> Image {
    let width = spec.frame_count().max(1);
    let height = spec.bins.iter().take_while(|&&f| f <= max_hz).count().max(1);
    let max = spec
        .magnitudes
        .iter()
        .flat_map(|r| r[..height.min(r.len())].iter())
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut img = Image {
        width,
        height,
        pixels: vec![0; width * height * 3],
    };
    for (x, row) in spec.magnitudes.iter().enumerate() {
        for (bin, m) in row.iter().take(height).enumerate() {
            img.set(x, height - 1 - bin, colormap(m - max));
        }
    }
    if let Some(lines) = overlay {
        let bw = spec.bin_width();
        for seg in lines.iter().flat_map(|l| &l.segments) {
            let Some(y) = row_for(seg.pitch_hz, bw, height) else {
                continue;
            };
            for (x, &t) in spec.times.iter().enumerate() {
                if seg.contains(t) {
                    img.set(x, y, OVERLAY_RGB);
                }
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::lines::LineSegment;

    #[test]
    fn colormap_stops() {
        assert_eq!(colormap(0.0), [255, 255, 255]);
        assert_eq!(colormap(-90.0), [0, 0, 0]);
        assert_eq!(colormap(-200.0), [0, 0, 0]);
        assert_eq!(colormap(-67.5), [0, 0, 160]);
        assert_eq!(colormap(-45.0), [200, 0, 120]);
        assert_eq!(colormap(-22.5), [255, 140, 0]);
    }

    #[test]
    fn ppm_layout_and_overlay() {
        let spec = Spectrogram {
            sample_rate: 8,
            window_size: 8,
            hop_samples: 8,
            hop: 1.0,
            times: vec![0.5, 1.5, 2.5],
            bins: (0..5).map(|k| k as f64).collect(),
            magnitudes: vec![vec![0.0, -90.0, -90.0, -90.0, -90.0]; 3],
        };
        let line = MelodicLine {
            harmonic_index: 1,
            segments: vec![LineSegment {
                start: 1.0,
                end: 3.0,
                pitch_hz: 2.0,
                mean_level_db: 0.0,
            }],
        };
        let img = render_spectrogram(&spec, 4.0, Some(&[line]));
        assert_eq!((img.width, img.height), (3, 5));
        assert_eq!(img.pixel(0, 4), [255, 255, 255]);
        assert_eq!(img.pixel(0, 2), [0, 0, 0]);
        assert_eq!(img.pixel(1, 2), OVERLAY_RGB);
        assert_eq!(img.pixel(2, 2), OVERLAY_RGB);
        let ppm = img.to_ppm();
        assert!(ppm.starts_with(b"P6\n3 5\n255\n"));
        assert_eq!(ppm.len(), 11 + 45);
    }
}
