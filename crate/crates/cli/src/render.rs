use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use harmonia_core::model::{ControlData, F0Trajectory, SynthParams};
use harmonia_core::presets::find_preset;
use harmonia_core::synth::{encode_wav, render_scene, Detune, SampleFormat, Scene};
use harmonia_core::SCHEMA_VERSION;

use crate::error::{write_all, CliError};
use crate::RenderArgs;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub wav: PathBuf,
    #[serde(default)]
    pub format: Option<SampleFormat>,
}

/// Scene file: a preset reference or inline control data, parameter
/// overrides and an optional output path.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub schema_version: u32,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub duration: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub control: Option<ControlData>,
    #[serde(default)]
    pub detunes: Vec<Detune>,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

/// f0 written next to a render so analysis can use the known trajectory.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct F0Sidecar {
    pub schema_version: u32,
    pub rate: f64,
    pub f0: Vec<Option<f64>>,
}

impl F0Sidecar {
    pub fn trajectory(self) -> harmonia_core::Result<F0Trajectory> {
        F0Trajectory::new(self.rate, self.f0)
    }
}

#[derive(Serialize)]
struct WavInfo {
    path: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    created_at: String,
    source: Value,
    duration: f64,
    sample_rate: u32,
    format: SampleFormat,
    params: &'a SynthParams,
    detunes: &'a [Detune],
    notes: usize,
    wav: WavInfo,
    f0_sidecar: String,
}

pub fn sidecar_path(wav: &Path, suffix: &str) -> PathBuf {
    wav.with_extension(suffix)
}

fn parse_override(text: &str) -> Result<(String, Value), CliError> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::Input(format!("--set expects NAME=VALUE, got `{text}`")))?;
    let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((name.trim().to_string(), value))
}

fn load_scene_file(path: &Path) -> Result<SceneFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    let file: SceneFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Input(format!(
            "{}: unsupported schema_version {}",
            path.display(),
            file.schema_version
        )));
    }
    Ok(file)
}

struct Resolved {
    scene: Scene,
    source: Value,
    out: Option<PathBuf>,
    format: Option<SampleFormat>,
}

fn resolve(args: &RenderArgs) -> Result<Resolved, CliError> {
    let (preset, control, mut duration, mut seed, detunes, mut overrides);
    let (mut out, mut format, source);
    match (&args.scene, &args.preset) {
        (Some(path), None) => {
            let file = load_scene_file(path)?;
            if file.preset.is_some() == file.control.is_some() {
                return Err(CliError::Input(format!(
                    "{}: exactly one of `preset` and `control` is required",
                    path.display()
                )));
            }
            preset = file.preset;
            control = file.control;
            duration = file.duration;
            seed = file.seed;
            detunes = file.detunes;
            overrides = file.params;
            out = file.output.as_ref().map(|o| o.wav.clone());
            format = file.output.and_then(|o| o.format);
            source = serde_json::json!({ "scene": path.display().to_string() });
        }
        (None, Some(name)) => {
            preset = Some(name.clone());
            control = None;
            duration = None;
            seed = None;
            detunes = Vec::new();
            overrides = Map::new();
            out = None;
            format = None;
            source = serde_json::json!({ "preset": name });
        }
        _ => return Err(CliError::Input("give exactly one of --scene and --preset".into())),
    }
    if args.duration.is_some() {
        duration = args.duration;
    }
    if args.seed.is_some() {
        seed = args.seed;
    }
    for text in &args.overrides {
        let (k, v) = parse_override(text)?;
        overrides.insert(k, v);
    }
    if let Some(o) = &args.out {
        out = Some(o.clone());
    }
    if let Some(f) = &args.format {
        format = Some(f.parse().map_err(CliError::input)?);
    }

    let mut scene = if let Some(name) = preset {
        let mut spec = find_preset(&name).map_err(CliError::input)?;
        if let Some(d) = duration {
            spec = spec.with_duration(d);
        }
        if let Some(s) = seed {
            spec = spec.with_seed(s);
        }
        let mut scene = spec.scene().map_err(CliError::input)?;
        scene.detunes.extend(detunes);
        scene
    } else {
        if duration.is_some() {
            return Err(CliError::Input("`duration` applies to presets only".into()));
        }
        let (f0, frames) = control
            .expect("checked above")
            .into_parts()
            .map_err(|e| CliError::Input(format!("control: {e}")))?;
        let mut params = SynthParams::default();
        if let Some(s) = seed {
            params.seed = s;
        }
        Scene {
            f0,
            frames,
            detunes,
            params,
        }
    };
    scene.params = scene.params.with_overrides(&overrides).map_err(CliError::input)?;
    scene.params.validate().map_err(CliError::input)?;
    Ok(Resolved {
        scene,
        source,
        out,
        format,
    })
}

pub fn run(args: &RenderArgs) -> Result<(), CliError> {
    let resolved = resolve(args)?;
    let out = resolved
        .out
        .ok_or_else(|| CliError::Input("no output path: pass --out or set output.wav in the scene".into()))?;
    let format = resolved.format.unwrap_or_default();
    let scene = resolved.scene;

    let rendered = render_scene(&scene).map_err(CliError::input)?;
    let wav = encode_wav(&rendered.audio, format, scene.params.seed).map_err(CliError::env)?;
    let sidecar = F0Sidecar {
        schema_version: SCHEMA_VERSION,
        rate: rendered.f0.rate,
        f0: rendered.f0.values.clone(),
    };
    let f0_path = sidecar_path(&out, "f0.json");
    let manifest_path = sidecar_path(&out, "manifest.json");
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: "harmonia",
        version: env!("CARGO_PKG_VERSION"),
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        source: resolved.source,
        duration: rendered.audio.duration(),
        sample_rate: rendered.audio.sample_rate,
        format,
        params: &scene.params,
        detunes: &scene.detunes,
        notes: rendered.notes.len(),
        wav: WavInfo {
            path: out.display().to_string(),
            bytes: wav.len(),
            sha256: hex::encode(Sha256::digest(&wav)),
        },
        f0_sidecar: f0_path.display().to_string(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let sidecar_json = serde_json::to_string(&sidecar).expect("sidecar serializes");
    write_all(&[
        (&out, &wav),
        (&f0_path, sidecar_json.as_bytes()),
        (&manifest_path, manifest_json.as_bytes()),
    ])?;
    println!("wrote {} ({} notes, sha256 {})", out.display(), rendered.notes.len(), manifest.wav.sha256);
    Ok(())
}
