use std::fmt;
use std::path::Path;

/// Input errors exit with 2, environment errors with 3.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Env(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Env(_) => 3,
        }
    }

    pub fn input(e: impl fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    pub fn env(e: impl fmt::Display) -> Self {
        CliError::Env(e.to_string())
    }

    pub fn read(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    pub fn write(path: &Path, e: std::io::Error) -> Self {
        CliError::Env(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Env(m) => f.write_str(m),
        }
    }
}

/// Writes every file or none: on a failed write the files already written
/// in this batch are removed.
pub fn write_all(files: &[(&Path, &[u8])]) -> Result<(), CliError> {
    for (i, (path, data)) in files.iter().enumerate() {
        if let Err(e) = std::fs::write(path, data) {
            for (done, _) in &files[..i] {
                let _ = std::fs::remove_file(done);
            }
            return Err(CliError::write(path, e));
        }
    }
    Ok(())
}
