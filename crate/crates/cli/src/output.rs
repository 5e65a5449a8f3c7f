use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A fully rendered result, written only once the command has succeeded.
pub struct Outcome {
    body: String,
}

pub enum Failure {
    Usage(String),
    /// A validated mathematical rejection. A complete report, if any, goes to
    /// standard output; no output file is written.
    Rejection {
        message: String,
        report: Option<String>,
    },
    Internal(anyhow::Error),
}

impl Outcome {
    pub fn json<T: Serialize>(value: &T) -> Result<Self, Failure> {
        let mut body = serde_json::to_string_pretty(value)
            .context("serializing output")
            .map_err(Failure::Internal)?;
        body.push('\n');
        Ok(Self { body })
    }

    pub fn text(body: String) -> Self {
        Self { body }
    }

    pub fn reject(self, message: impl Into<String>) -> Failure {
        Failure::Rejection {
            message: message.into(),
            report: Some(self.body),
        }
    }

    /// Writes via a temporary file in the target directory, so a failed
    /// write never leaves a truncated output behind.
    pub fn write(self, out: Option<&Path>) -> Result<(), Failure> {
        let Some(path) = out else {
            let mut stdout = std::io::stdout().lock();
            return stdout
                .write_all(self.body.as_bytes())
                .context("writing to standard output")
                .map_err(Failure::Internal);
        };
        let tmp = path.with_extension("partial");
        fs::write(&tmp, &self.body)
            .and_then(|()| fs::rename(&tmp, path))
            .map_err(|e| {
                let _ = fs::remove_file(&tmp);
                Failure::Internal(anyhow::Error::new(e).context(format!("writing {}", path.display())))
            })
    }
}

impl Failure {
    pub fn report(self) -> ExitCode {
        match self {
            Failure::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(64)
            }
            Failure::Rejection { message, report } => {
                if let Some(r) = report {
                    print!("{r}");
                }
                eprintln!("rejected: {message}");
                ExitCode::from(2)
            }
            Failure::Internal(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}

impl From<strongdom::Error> for Failure {
    fn from(e: strongdom::Error) -> Self {
        use strongdom::Error as E;
        let message = e.to_string();
        match innermost(&e) {
            E::Usage(_) | E::EnumerationCap { .. } => Failure::Usage(message),
            E::NotMajorized { .. } | E::Domain(_) | E::Decomposition(_) => Failure::Rejection {
                message,
                report: None,
            },
            _ => Failure::Internal(anyhow::Error::new(e)),
        }
    }
}

fn innermost(e: &strongdom::Error) -> &strongdom::Error {
    match e {
        strongdom::Error::Node { source, .. } => innermost(source),
        other => other,
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Internal)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::Internal)
}
