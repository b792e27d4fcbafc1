use std::io::Cursor;

use harmonia_core::analysis::{analyze, max_pitch_count, AnalysisConfig, AnalysisReport, F0Source};
use harmonia_core::model::ControlData;
use harmonia_core::presets::{catalog, find_preset, preset_names};
use harmonia_core::synth::{decode_wav, encode_wav, render_scene, SampleFormat};
use harmonia_core::Error;

#[test]
fn every_preset_renders_peak_normalized_audio() {
    for name in preset_names() {
        let spec = find_preset(&name).unwrap().with_duration(0.5);
        let r = render_scene(&spec.scene().unwrap()).unwrap();
        assert_eq!(r.audio.sample_rate, 48_000, "{name}");
        assert!(r.audio.peak() > 0.5 && r.audio.peak() <= 1.0, "{name}: peak {}", r.audio.peak());
        assert!(r.audio.samples.iter().all(|s| s.is_finite()), "{name}");
    }
}

#[test]
fn unknown_preset_is_an_error() {
    assert!(matches!(find_preset("no-such-thing"), Err(Error::UnknownPreset(_))));
}

#[test]
fn wav_round_trip_preserves_f32_samples() {
    let spec = find_preset("pure-sine").unwrap().with_duration(0.25);
    let r = render_scene(&spec.scene().unwrap()).unwrap();
    let bytes = encode_wav(&r.audio, SampleFormat::F32, 0).unwrap();
    let back = decode_wav(Cursor::new(&bytes)).unwrap();
    assert_eq!(back.samples.len(), r.audio.samples.len());
    for (a, b) in back.samples.iter().zip(&r.audio.samples) {
        assert!((a - b).abs() < 1e-7);
    }
}

#[test]
fn pcm16_dither_depends_only_on_seed() {
    let spec = find_preset("full-series").unwrap().with_duration(0.25);
    let r = render_scene(&spec.scene().unwrap()).unwrap();
    let a = encode_wav(&r.audio, SampleFormat::Pcm16, 3).unwrap();
    let b = encode_wav(&r.audio, SampleFormat::Pcm16, 3).unwrap();
    let c = encode_wav(&r.audio, SampleFormat::Pcm16, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn control_data_round_trips_through_json() {
    let spec = find_preset("glide").unwrap();
    let control = spec.control_data().unwrap();
    let back = ControlData::from_json(&control.to_json()).unwrap();
    assert_eq!(back, control);
    let (f0, frames) = back.into_parts().unwrap();
    let scene = spec.scene().unwrap();
    assert_eq!(f0, scene.f0);
    assert_eq!(frames, scene.frames);
}

#[test]
fn analysis_report_round_trips() {
    let spec = find_preset("power-chord").unwrap().with_duration(1.0);
    let r = render_scene(&spec.scene().unwrap()).unwrap();
    let a = analyze(&r.audio, Some(&r.f0), &AnalysisConfig::default()).unwrap();
    assert_eq!(a.report.f0_source, F0Source::Metadata);
    let text = a.report.to_json();
    let back = AnalysisReport::from_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
}

#[test]
fn pure_sine_is_one_pitch_with_either_f0_source() {
    let spec = find_preset("pure-sine").unwrap().with_duration(1.0);
    let r = render_scene(&spec.scene().unwrap()).unwrap();
    for meta in [Some(&r.f0), None] {
        let a = analyze(&r.audio, meta, &AnalysisConfig::default()).unwrap();
        assert_eq!(a.report.lines.len(), 1);
        assert_eq!(a.report.lines[0].harmonic_index, 1);
        assert_eq!(max_pitch_count(&a.report.percepts), 1);
        let voice = &a.report.transcription.voices[0];
        assert_eq!(voice.notes[0].note.as_deref(), Some("A3"));
    }
}

#[test]
fn power_chord_yields_two_lines() {
    let spec = find_preset("power-chord").unwrap();
    let r = render_scene(&spec.scene().unwrap()).unwrap();
    let a = analyze(&r.audio, None, &AnalysisConfig::default()).unwrap();
    let idx: Vec<usize> = a.report.lines.iter().map(|l| l.harmonic_index).collect();
    assert_eq!(idx, vec![1, 6]);
    assert_eq!(max_pitch_count(&a.report.percepts), 2);
}

#[test]
fn catalog_lists_every_preset() {
    let c = catalog();
    let names: Vec<String> = c.presets.iter().map(|p| p.name.clone()).collect();
    assert_eq!(names, preset_names());
    for family in ["woofer-modes", "controls"] {
        assert!(c.presets.iter().any(|p| p.family == family), "{family}");
    }
}

#[test]
fn analysis_rejects_unknown_config_keys() {
    let err = serde_json::from_str::<AnalysisConfig>(r#"{"hopp": 256}"#);
    assert!(err.is_err());
}
