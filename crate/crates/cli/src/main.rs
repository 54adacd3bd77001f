mod args;
mod commands;
mod output;
mod spec;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use missing_mass_bounds::Error;
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::args::Cli;

/// Anything that ends a run early. Usage problems exit with 2, the rest
/// with 1; all are reported as a JSON object on stderr.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(Error),
    Io { path: String, message: String },
    Input { path: String, message: String },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let (kind, code, message, path) = match self {
            CliError::Usage(m) => ("usage", "Usage", m.clone(), None),
            CliError::Domain(e) => ("domain", e.code(), e.to_string(), None),
            CliError::Io { path, message } => ("io", "Io", message.clone(), Some(path)),
            CliError::Input { path, message } => ("input", "InvalidInput", message.clone(), Some(path)),
        };
        let mut body = json!({ "kind": kind, "code": code, "message": message });
        if let Some(path) = path {
            body["path"] = json!(path);
        }
        json!({ "error": body })
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: shown.clone(), message: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input { path: shown, message: e.to_string() })
}

fn fail(error: &CliError) -> ExitCode {
    eprintln!("{}", error.to_json());
    ExitCode::from(error.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    let report = match commands::run(&cli) {
        Ok(report) => report,
        Err(e) => return fail(&e),
    };
    let text = report.render(cli.global.format);
    let written = match &cli.global.output {
        Some(path) => fs::write(path, &text).map_err(|e| (path.display().to_string(), e)),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| ("<stdout>".to_string(), e)),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err((path, e)) => fail(&CliError::Io { path, message: e.to_string() }),
    }
}
