//! Output files. Every file starts with the same provenance metadata: tool
//! version, configuration hash and seed. No timestamps, so reruns are byte-identical.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const TOOL: &str = "bose-chaos";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

impl Metadata {
    pub fn for_config(cfg: &RunConfig) -> Self {
        Metadata {
            tool: TOOL,
            version: VERSION,
            experiment: cfg.experiment.name(),
            config_sha256: cfg.hash(),
            seed: cfg.seed,
        }
    }

    fn write_csv_header(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# tool={} version={}", self.tool, self.version)?;
        writeln!(w, "# experiment={}", self.experiment)?;
        writeln!(w, "# config_sha256={}", self.config_sha256)?;
        writeln!(w, "# seed={}", self.seed)
    }
}

/// Writes files into one output directory and remembers what was written.
pub struct OutputDir {
    dir: PathBuf,
    meta: Metadata,
    written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct JsonDoc<'a, T: Serialize> {
    metadata: &'a Metadata,
    #[serde(flatten)]
    data: &'a T,
}

impl OutputDir {
    pub fn create(dir: &Path, meta: Metadata) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(OutputDir { dir: dir.to_path_buf(), meta, written: Vec::new() })
    }

    pub fn metadata(&self) -> &Metadata {
        &self.meta
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn open(&mut self, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok((path, BufWriter::new(f)))
    }

    /// CSV file: metadata comment lines, then whatever `body` writes.
    pub fn csv<F>(&mut self, name: &str, extra: &[(&str, String)], body: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> bose_chaos::Result<()>,
    {
        let meta = self.meta.clone();
        let (path, mut w) = self.open(name)?;
        meta.write_csv_header(&mut w).map_err(|e| CliError::io(&path, e))?;
        for (k, v) in extra {
            writeln!(w, "# {k}={v}").map_err(|e| CliError::io(&path, e))?;
        }
        body(&mut w)?;
        w.flush().map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    /// JSON object with a `metadata` member next to the fields of `data`.
    pub fn json<T: Serialize>(&mut self, name: &str, data: &T) -> Result<PathBuf> {
        let meta = self.meta.clone();
        let (path, mut w) = self.open(name)?;
        serde_json::to_writer_pretty(&mut w, &JsonDoc { metadata: &meta, data })
            .map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    /// Raw binary payload at an arbitrary path, with the metadata in a `.meta.json` sidecar.
    pub fn binary_at<F>(&mut self, path: &Path, body: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> bose_chaos::Result<()>,
    {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        let f = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut w = BufWriter::new(f);
        body(&mut w)?;
        w.flush().map_err(|e| CliError::io(path, e))?;
        self.written.push(path.to_path_buf());
        let mut side = path.as_os_str().to_owned();
        side.push(".meta.json");
        let side = PathBuf::from(side);
        let text = serde_json::to_string_pretty(&self.meta).expect("metadata serializes");
        fs::write(&side, text + "\n").map_err(|e| CliError::io(&side, e))?;
        self.written.push(side);
        Ok(path.to_path_buf())
    }

    /// Text payload at an arbitrary path with the CSV metadata header.
    pub fn csv_at<F>(&mut self, path: &Path, body: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> bose_chaos::Result<()>,
    {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        let f = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.meta.write_csv_header(&mut w).map_err(|e| CliError::io(path, e))?;
        body(&mut w)?;
        w.flush().map_err(|e| CliError::io(path, e))?;
        self.written.push(path.to_path_buf());
        Ok(path.to_path_buf())
    }
}

/// Formats an optional value as a CSV field; `None` becomes an empty field.
pub fn opt_field(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.12e}")).unwrap_or_default()
}
