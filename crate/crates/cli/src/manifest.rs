use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

use crate::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum TraceSource {
    Files(Vec<PathBuf>),
    Dirs(Vec<PathBuf>),
    Pair { pre: PathBuf, post: PathBuf },
}

/// Validated inputs of one `check`, `report` or `compare` run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub spec_path: PathBuf,
    pub traces: TraceSource,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub alpha: f64,
}

pub const DEFAULT_ALPHA: f64 = 0.05;

impl RunManifest {
    pub fn new(
        spec_path: PathBuf,
        traces: TraceSource,
        output_path: Option<PathBuf>,
        format: Format,
        alpha: Option<f64>,
    ) -> anyhow::Result<Self> {
        let alpha = alpha.unwrap_or(DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha < 1.0) {
            bail!("--alpha must lie strictly between 0 and 1, got {alpha}");
        }
        if spec_path.as_os_str().is_empty() {
            bail!("spec path is empty");
        }
        let paths: Vec<&PathBuf> = match &traces {
            TraceSource::Files(p) | TraceSource::Dirs(p) => p.iter().collect(),
            TraceSource::Pair { pre, post } => vec![pre, post],
        };
        if paths.is_empty() || paths.iter().any(|p| p.as_os_str().is_empty()) {
            bail!("trace paths must be nonempty");
        }
        if output_path.as_ref().is_some_and(|p| p.as_os_str().is_empty()) {
            bail!("output path is empty");
        }
        Ok(RunManifest { spec_path, traces, output_path, format, alpha })
    }
}

pub fn is_trace_file(path: &Path) -> bool {
    path.is_file() && matches!(path.extension().and_then(|e| e.to_str()), Some("csv" | "json"))
}

/// Trace files directly inside `dir`, sorted by file name.
pub fn list_traces(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).with_context(|| format!("cannot read trace directory {}", dir.display()))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.with_context(|| format!("cannot read trace directory {}", dir.display()))?.path();
        if is_trace_file(&path) {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if files.is_empty() {
        bail!("no .csv or .json traces in {}", dir.display());
    }
    Ok(files)
}
