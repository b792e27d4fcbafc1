mod analyze;
mod error;
mod render;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;

#[derive(Parser)]
#[command(name = "harmonia", version, about = "Render and analyze harmonic complex tones")]
struct Cli {
    /// Print the equal-loudness constant table in use and exit.
    #[arg(long)]
    print_iso_tables: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Render a preset or scene file to WAV, with a manifest and f0 sidecar.
    Render(RenderArgs),
    /// Analyze a mono WAV file into JSON and a PPM spectrogram.
    Analyze(AnalyzeArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// List the built-in presets.
    Presets {
        /// Print the full catalog as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
pub struct RenderArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    /// Output WAV path. Defaults to the scene's output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// f32 or pcm16.
    #[arg(long)]
    pub format: Option<String>,
    /// Preset duration override, seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Parameter override, `name=value`. Repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    pub wav: PathBuf,
    #[arg(long, default_value_t = harmonia_core::psycho::DEFAULT_PHON)]
    pub phon: f64,
    #[arg(long, default_value_t = 4096)]
    pub window: usize,
    #[arg(long, default_value_t = 512)]
    pub hop: usize,
    /// Draw melodic lines over the spectrogram image.
    #[arg(long)]
    pub overlay: bool,
    /// Output prefix; writes PREFIX.analysis.json and PREFIX.ppm.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// f0 sidecar to use instead of `<wav stem>.f0.json`.
    #[arg(long)]
    pub f0: Option<PathBuf>,
    /// Ignore any f0 sidecar and estimate f0 from the audio.
    #[arg(long, conflicts_with = "f0")]
    pub estimate_f0: bool,
    /// Highest frequency shown in the image, Hz.
    #[arg(long, default_value_t = 4000.0)]
    pub max_freq: f64,
    /// Embed the weighted spectrogram in the JSON.
    #[arg(long)]
    pub spectrogram: bool,
}

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = harmonia_service::DEFAULT_MAX_DURATION)]
    pub max_duration: f64,
    /// Allowed CORS origin. Repeatable; none allows any origin.
    #[arg(long = "cors-origin")]
    pub cors_origins: Vec<String>,
}

fn print_iso_tables() -> Result<(), CliError> {
    let table = harmonia_core::psycho::active_table().map_err(CliError::env)?;
    print!("{}", table.to_text());
    Ok(())
}

fn print_presets(json: bool) -> Result<(), CliError> {
    if json {
        let catalog = harmonia_core::presets::catalog();
        println!("{}", serde_json::to_string_pretty(&catalog).expect("catalog serializes"));
    } else {
        for p in harmonia_core::presets::registry() {
            println!("{:<22} {:>5.1} s  {}", p.name, p.duration, p.description);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = if cli.print_iso_tables {
        print_iso_tables()
    } else {
        match cli.command {
            Some(Command::Render(args)) => render::run(&args),
            Some(Command::Analyze(args)) => analyze::run(&args),
            Some(Command::Serve(args)) => serve::run(&args),
            Some(Command::Presets { json }) => print_presets(json),
            None => Err(CliError::Input("no command given; see --help".into())),
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("harmonia: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
