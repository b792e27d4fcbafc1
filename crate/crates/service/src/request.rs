use serde::Deserialize;
use serde_json::{Map, Value};

use harmonia_core::analysis::{analyze, AnalysisConfig};
use harmonia_core::presets::find_preset;
use harmonia_core::psycho::{DEFAULT_PHON, PHON_MAX, PHON_MIN};
use harmonia_core::synth::{encode_wav, render_scene, SampleFormat, Scene};
use harmonia_core::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum RequestError {
    Schema(String),
    TooLong { duration: f64, cap: f64 },
    Parameter { field: String, message: String },
    Internal(String),
}

impl RequestError {
    pub fn kind(&self) -> &'static str {
        match self {
            RequestError::Schema(_) => "schema",
            RequestError::TooLong { .. } => "duration",
            RequestError::Parameter { .. } => "parameter",
            RequestError::Internal(_) => "internal",
        }
    }

    fn from_core(err: Error, prefix: &str) -> Self {
        match err {
            Error::InvalidParameter { field, message } => RequestError::Parameter {
                field: format!("{prefix}{field}"),
                message,
            },
            Error::UnknownPreset(name) => RequestError::Parameter {
                field: "preset".into(),
                message: format!("unknown preset `{name}`"),
            },
            Error::InvalidInput(m) | Error::InvalidFrame(m) | Error::OutOfDomain(m) => {
                RequestError::Parameter {
                    field: prefix.trim_end_matches('.').to_string(),
                    message: m,
                }
            }
            other => RequestError::Internal(other.to_string()),
        }
    }
}

impl std::fmt::Display for RequestError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RequestError::Schema(m) => write!(f, "invalid request: {m}"),
            RequestError::TooLong { duration, cap } => {
                write!(f, "scene lasts {duration} s, the limit is {cap} s")
            }
            RequestError::Parameter { field, message } => write!(f, "`{field}`: {message}"),
            RequestError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for RequestError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisFlags {
    pub phon: f64,
    /// Attach the weighted spectrogram so a client can draw line overlays.
    pub overlay: bool,
}

impl Default for AnalysisFlags {
    fn default() -> Self {
        Self {
            phon: DEFAULT_PHON,
            overlay: false,
        }
    }
}

/// Body of `POST /v1/render`. Exactly one of `preset` and `scene` is set.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderRequest {
    pub preset: Option<String>,
    pub scene: Option<Scene>,
    /// Synth parameter overrides, by field name.
    pub params: Map<String, Value>,
    /// Preset duration override, seconds.
    pub duration: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<SampleFormat>,
    pub analysis: AnalysisFlags,
}

/// A validated request, ready to render.
#[derive(Debug, Clone)]
pub struct RenderJob {
    pub scene: Scene,
    pub format: SampleFormat,
    pub analysis: AnalysisFlags,
}

impl RenderRequest {
    pub fn parse(body: &[u8]) -> Result<Self, RequestError> {
        serde_json::from_slice(body).map_err(|e| RequestError::Schema(e.to_string()))
    }

    pub fn resolve(self, max_duration: f64) -> Result<RenderJob, RequestError> {
        let (scene, prefix) = match (self.preset, self.scene) {
            (Some(name), None) => {
                let mut spec = find_preset(&name).map_err(|e| RequestError::from_core(e, ""))?;
                if let Some(d) = self.duration {
                    if !(d.is_finite() && d > 0.0) {
                        return Err(RequestError::Parameter {
                            field: "duration".into(),
                            message: "must be > 0".into(),
                        });
                    }
                    spec = spec.with_duration(d);
                }
                if spec.duration > max_duration {
                    return Err(RequestError::TooLong {
                        duration: spec.duration,
                        cap: max_duration,
                    });
                }
                if let Some(seed) = self.seed {
                    spec = spec.with_seed(seed);
                }
                let scene = spec.scene().map_err(|e| RequestError::from_core(e, ""))?;
                (scene, "params.")
            }
            (None, Some(mut scene)) => {
                if self.duration.is_some() {
                    return Err(RequestError::Schema("`duration` applies to presets only".into()));
                }
                let duration = scene.f0.duration();
                if duration > max_duration {
                    return Err(RequestError::TooLong {
                        duration,
                        cap: max_duration,
                    });
                }
                scene.f0.validate().map_err(|e| RequestError::from_core(e, "scene.f0."))?;
                scene
                    .frames
                    .validate()
                    .map_err(|e| RequestError::from_core(e, "scene.frames."))?;
                if let Some(seed) = self.seed {
                    scene.params.seed = seed;
                }
                (scene, "scene.params.")
            }
            _ => {
                return Err(RequestError::Schema(
                    "exactly one of `preset` and `scene` is required".into(),
                ))
            }
        };
        let mut scene = scene;
        scene.params = scene
            .params
            .with_overrides(&self.params)
            .map_err(|e| RequestError::Schema(e.to_string()))?;
        scene.params.validate().map_err(|e| match e {
            Error::InvalidParameter { ref field, .. } if self.params.contains_key(field) => {
                RequestError::from_core(e, "params.")
            }
            e => RequestError::from_core(e, prefix),
        })?;
        if !(PHON_MIN..=PHON_MAX).contains(&self.analysis.phon) {
            return Err(RequestError::Parameter {
                field: "analysis.phon".into(),
                message: format!("must be in [{PHON_MIN}, {PHON_MAX}]"),
            });
        }
        Ok(RenderJob {
            scene,
            format: self.format.unwrap_or_default(),
            analysis: self.analysis,
        })
    }
}

impl RenderJob {
    /// Renders and analyzes; returns (analysis JSON, WAV bytes).
    pub fn run(self) -> Result<(Vec<u8>, Vec<u8>), RequestError> {
        let rendered = render_scene(&self.scene).map_err(|e| RequestError::from_core(e, "scene."))?;
        let wav = encode_wav(&rendered.audio, self.format, self.scene.params.seed)
            .map_err(|e| RequestError::Internal(e.to_string()))?;
        let config = AnalysisConfig {
            phon: self.analysis.phon,
            include_spectrogram: self.analysis.overlay,
            ..AnalysisConfig::default()
        };
        let analysis = analyze(&rendered.audio, Some(&rendered.f0), &config)
            .map_err(|e| RequestError::from_core(e, "analysis."))?;
        Ok((analysis.report.to_json().into_bytes(), wav))
    }
}
