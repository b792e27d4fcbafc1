use std::path::{Path, PathBuf};

use harmonia_core::analysis::{analyze, render_spectrogram, AnalysisConfig};
use harmonia_core::model::F0Trajectory;
use harmonia_core::synth::read_wav;

use crate::error::{write_all, CliError};
use crate::render::{sidecar_path, F0Sidecar};
use crate::AnalyzeArgs;

fn load_f0(path: &Path) -> Result<F0Trajectory, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    let sidecar: F0Sidecar =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    sidecar
        .trajectory()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn output_prefix(args: &AnalyzeArgs) -> PathBuf {
    args.out.clone().unwrap_or_else(|| args.wav.with_extension(""))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    let audio = read_wav(&args.wav).map_err(|e| CliError::Input(format!("{}: {e}", args.wav.display())))?;
    let f0 = match (&args.f0, args.estimate_f0) {
        (Some(path), _) => Some(load_f0(path)?),
        (None, false) => {
            let default = sidecar_path(&args.wav, "f0.json");
            if default.exists() {
                Some(load_f0(&default)?)
            } else {
                None
            }
        }
        (None, true) => None,
    };
    let config = AnalysisConfig {
        window_size: args.window,
        hop: args.hop,
        phon: args.phon,
        include_spectrogram: args.spectrogram,
        spectrogram_max_hz: args.max_freq,
        ..AnalysisConfig::default()
    };
    let analysis = analyze(&audio, f0.as_ref(), &config).map_err(CliError::input)?;
    let overlay = args.overlay.then_some(analysis.report.lines.as_slice());
    let image = render_spectrogram(&analysis.weighted, args.max_freq, overlay);

    let prefix = output_prefix(args);
    let json_path = with_suffix(&prefix, ".analysis.json");
    let ppm_path = with_suffix(&prefix, ".ppm");
    let json = analysis.report.to_json();
    write_all(&[(&json_path, json.as_bytes()), (&ppm_path, &image.to_ppm())])?;

    let count = harmonia_core::analysis::max_pitch_count(&analysis.report.percepts);
    println!(
        "wrote {} and {} ({} lines, up to {} pitches)",
        json_path.display(),
        ppm_path.display(),
        analysis.report.lines.len(),
        count
    );
    Ok(())
}
