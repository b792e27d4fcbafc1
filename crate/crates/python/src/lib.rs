//! Python bindings: rendering, analysis, per-frame transforms and loudness
//! weighting. Structured results cross the boundary as JSON strings.

use std::io::Cursor;

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use harmonia_core::analysis::{self, AnalysisConfig};
use harmonia_core::model::{self, AmplitudeFrame, F0Trajectory};
use harmonia_core::presets::{self, find_preset};
use harmonia_core::psycho::{self, Weighting};
use harmonia_core::synth::{self, AudioBuffer, LevelEnvelope, SampleFormat, Scene};
use harmonia_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::UnknownPreset(_) => PyKeyError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn dict_to_map(py: Python<'_>, d: &Bound<'_, PyDict>) -> PyResult<serde_json::Map<String, serde_json::Value>> {
    let text: String = py.import("json")?.call_method1("dumps", (d,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A rendered tone: mono samples plus the f0 track used to make them.
#[pyclass(module = "harmonia", frozen)]
struct Render {
    audio: AudioBuffer,
    f0: F0Trajectory,
    seed: u64,
}

#[pymethods]
impl Render {
    #[getter]
    fn sample_rate(&self) -> u32 {
        self.audio.sample_rate
    }

    #[getter]
    fn samples(&self) -> Vec<f64> {
        self.audio.samples.clone()
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.audio.duration()
    }

    /// f0 in Hz per control frame; `None` marks unvoiced frames.
    #[getter]
    fn f0(&self) -> Vec<Option<f64>> {
        self.f0.values.clone()
    }

    #[getter]
    fn f0_rate(&self) -> f64 {
        self.f0.rate
    }

    #[pyo3(signature = (format = "f32"))]
    fn to_wav<'py>(&self, py: Python<'py>, format: &str) -> PyResult<Bound<'py, PyBytes>> {
        let format: SampleFormat = format.parse().map_err(py_err)?;
        let bytes = synth::encode_wav(&self.audio, format, self.seed).map_err(py_err)?;
        Ok(PyBytes::new(py, &bytes))
    }

    /// Analysis report as JSON, using the render's own f0 as metadata.
    #[pyo3(signature = (phon = psycho::DEFAULT_PHON, overlay = false))]
    fn analyze(&self, phon: f64, overlay: bool) -> PyResult<String> {
        run_analysis(&self.audio, Some(&self.f0), phon, overlay)
    }

    fn __repr__(&self) -> String {
        format!("Render(sample_rate={}, duration={:.3})", self.audio.sample_rate, self.audio.duration())
    }
}

fn finish(scene: &Scene) -> PyResult<Render> {
    let r = synth::render_scene(scene).map_err(py_err)?;
    Ok(Render {
        audio: r.audio,
        f0: r.f0,
        seed: scene.params.seed,
    })
}

fn run_analysis(audio: &AudioBuffer, f0: Option<&F0Trajectory>, phon: f64, overlay: bool) -> PyResult<String> {
    let config = AnalysisConfig {
        phon,
        include_spectrogram: overlay,
        ..AnalysisConfig::default()
    };
    let a = analysis::analyze(audio, f0, &config).map_err(py_err)?;
    Ok(a.report.to_json())
}

/// Renders a named preset. `params` overrides synthesis parameters.
#[pyfunction]
#[pyo3(signature = (name, seed = None, duration = None, params = None))]
fn render_preset(
    py: Python<'_>,
    name: &str,
    seed: Option<u64>,
    duration: Option<f64>,
    params: Option<&Bound<'_, PyDict>>,
) -> PyResult<Render> {
    let mut spec = find_preset(name).map_err(py_err)?;
    if let Some(s) = seed {
        spec = spec.with_seed(s);
    }
    if let Some(d) = duration {
        spec = spec.with_duration(d);
    }
    if let Some(p) = params {
        spec.params = spec.params.with_overrides(&dict_to_map(py, p)?).map_err(py_err)?;
    }
    let scene = spec.scene().map_err(py_err)?;
    py.detach(|| finish(&scene))
}

/// Renders a scene given as JSON (`f0`, `frames`, `detunes`, `params`).
#[pyfunction]
fn render_scene_json(py: Python<'_>, scene: &str) -> PyResult<Render> {
    let scene: Scene = serde_json::from_str(scene).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.detach(|| finish(&scene))
}

/// Analyzes mono samples. `f0` is an optional control track at `f0_rate`.
#[pyfunction]
#[pyo3(signature = (samples, sample_rate, f0 = None, f0_rate = presets::CONTROL_RATE, phon = psycho::DEFAULT_PHON, overlay = false))]
fn analyze(
    py: Python<'_>,
    samples: Vec<f64>,
    sample_rate: u32,
    f0: Option<Vec<Option<f64>>>,
    f0_rate: f64,
    phon: f64,
    overlay: bool,
) -> PyResult<String> {
    let audio = AudioBuffer::new(sample_rate, samples);
    let traj = f0.map(|v| F0Trajectory::new(f0_rate, v)).transpose().map_err(py_err)?;
    py.detach(|| run_analysis(&audio, traj.as_ref(), phon, overlay))
}

/// Analyzes WAV file contents with estimated f0.
#[pyfunction]
#[pyo3(signature = (wav, phon = psycho::DEFAULT_PHON))]
fn analyze_wav(py: Python<'_>, wav: &[u8], phon: f64) -> PyResult<String> {
    let audio = synth::decode_wav(Cursor::new(wav)).map_err(py_err)?;
    py.detach(|| run_analysis(&audio, None, phon, false))
}

/// Temperature softmax of a dB frame. Returns `(amplitudes, gain)`.
#[pyfunction]
fn harmonic_variation_transform(frame: Vec<f64>, temperature: f64) -> PyResult<(Vec<f64>, f64)> {
    let a = model::harmonic_variation_transform(&frame, temperature).map_err(py_err)?;
    Ok((a.amps, a.gain))
}

#[pyfunction]
#[pyo3(signature = (amps, rho, gain = 1.0))]
fn odd_even_balance(amps: Vec<f64>, rho: f64, gain: f64) -> PyResult<(Vec<f64>, f64)> {
    let a = model::odd_even_balance(&AmplitudeFrame { amps, gain }, rho).map_err(py_err)?;
    Ok((a.amps, a.gain))
}

#[pyfunction]
#[pyo3(signature = (amps, max_harmonics, gain = 1.0))]
fn truncate_harmonics(amps: Vec<f64>, max_harmonics: usize, gain: f64) -> PyResult<(Vec<f64>, f64)> {
    let a = model::truncate_harmonics(&AmplitudeFrame { amps, gain }, max_harmonics).map_err(py_err)?;
    Ok((a.amps, a.gain))
}

#[pyfunction]
fn entropy(amps: Vec<f64>) -> f64 {
    model::entropy(&amps)
}

/// Equal-loudness contour: `(anchor frequencies, SPL values)`.
#[pyfunction]
fn loudness_contour(phon: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let c = psycho::contour(phon).map_err(py_err)?;
    Ok((c.anchor_frequencies, c.spl_values))
}

#[pyfunction]
#[pyo3(signature = (freq, phon = psycho::DEFAULT_PHON))]
fn weight_db(freq: f64, phon: f64) -> PyResult<f64> {
    Ok(Weighting::for_phon(phon).map_err(py_err)?.weight_db(freq))
}

/// Note onsets from a level envelope: list of `(onset_time, duration)`.
#[pyfunction]
#[pyo3(signature = (levels_db, rate, threshold, hysteresis = 0.0))]
fn detect_onsets(levels_db: Vec<f64>, rate: f64, threshold: f64, hysteresis: f64) -> PyResult<Vec<(f64, f64)>> {
    let env = LevelEnvelope { rate, levels_db };
    let notes = synth::detect_onsets(&env, threshold, hysteresis).map_err(py_err)?;
    Ok(notes.into_iter().map(|n| (n.onset_time, n.duration)).collect())
}

/// `(name, cents)` of the nearest equal-tempered note.
#[pyfunction]
fn note_name(freq: f64) -> (String, f64) {
    analysis::note_name(freq)
}

#[pyfunction]
fn preset_names() -> Vec<String> {
    presets::preset_names()
}

/// Preset and dial catalog as JSON.
#[pyfunction]
fn catalog_json() -> String {
    serde_json::to_string(&presets::catalog()).expect("catalog serializes")
}

#[pymodule]
fn harmonia(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("SCHEMA_VERSION", harmonia_core::SCHEMA_VERSION)?;
    m.add_class::<Render>()?;
    m.add_function(wrap_pyfunction!(render_preset, m)?)?;
    m.add_function(wrap_pyfunction!(render_scene_json, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_wav, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_variation_transform, m)?)?;
    m.add_function(wrap_pyfunction!(odd_even_balance, m)?)?;
    m.add_function(wrap_pyfunction!(truncate_harmonics, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(loudness_contour, m)?)?;
    m.add_function(wrap_pyfunction!(weight_db, m)?)?;
    m.add_function(wrap_pyfunction!(detect_onsets, m)?)?;
    m.add_function(wrap_pyfunction!(note_name, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_json, m)?)?;
    Ok(())
}
