//! Output files, their sidecar manifests, and error classification for exit codes.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use blendnet::attrib::AttribError;
use blendnet::chem::ChemError;
use blendnet::data::DataError;
use blendnet::stats::StatsError;
use blendnet::thermo::ThermoError;
use blendnet::zoo::ZooError;
use serde::Serialize;

pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// A problem with the user's input rather than with the run itself.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn data_is_input(e: &DataError) -> bool {
    !matches!(e, DataError::Io(_) | DataError::Csv(_))
}

fn zoo_is_input(e: &ZooError) -> bool {
    match e {
        ZooError::DivergedLoss { .. } | ZooError::Io(_) | ZooError::Autodiff(_) => false,
        ZooError::Data(d) => data_is_input(d),
        _ => true,
    }
}

/// Exit code for a failed command: 2 when the input was at fault, 3 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        let input = if cause.is::<Invalid>() || cause.is::<ChemError>() || cause.is::<StatsError>()
        {
            true
        } else if let Some(e) = cause.downcast_ref::<DataError>() {
            data_is_input(e)
        } else if let Some(e) = cause.downcast_ref::<ZooError>() {
            zoo_is_input(e)
        } else if let Some(e) = cause.downcast_ref::<ThermoError>() {
            !matches!(e, ThermoError::Io(_))
        } else if let Some(e) = cause.downcast_ref::<AttribError>() {
            match e {
                AttribError::Zoo(z) => zoo_is_input(z),
                _ => true,
            }
        } else {
            continue;
        };
        return if input { EXIT_INVALID } else { EXIT_RUNTIME };
    }
    EXIT_RUNTIME
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    artifact: String,
    config: &'a C,
}

/// Writes artifacts into one directory, each with a `<name>.manifest.json`
/// sidecar carrying the command's fully resolved configuration.
pub struct Outputs<'a, C: Serialize> {
    dir: PathBuf,
    command: &'a str,
    config: &'a C,
}

impl<'a, C: Serialize> Outputs<'a, C> {
    pub fn new(dir: impl Into<PathBuf>, command: &'a str, config: &'a C) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Outputs {
            dir,
            command,
            config,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn bytes(&self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.sidecar(name)?;
        Ok(path)
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn csv<R: Serialize>(
        &self,
        name: &str,
        rows: impl IntoIterator<Item = R>,
    ) -> Result<PathBuf> {
        self.bytes(name, &csv_bytes(rows)?)
    }

    /// Records a file produced by other means (e.g. a checkpoint writer).
    pub fn sidecar(&self, name: &str) -> Result<()> {
        let m = Manifest {
            tool: "blendnet",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            artifact: name.to_string(),
            config: self.config,
        };
        let path = self.path(&format!("{name}.manifest.json"));
        let mut text = serde_json::to_string_pretty(&m)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn csv_bytes<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("flushing csv: {e}"))
}

/// Serializes `value` to stdout as pretty JSON.
pub fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

pub fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(invalid(format!("{what} not found: {}", path.display())))
    }
}
