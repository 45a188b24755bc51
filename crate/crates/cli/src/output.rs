//! Run manifests and output-file emission.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

/// Provenance record attached to every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// The full command line after the program name.
    pub args: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub library_version: String,
    pub cli_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub started_at: String,
    pub finished_at: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn now_rfc3339() -> String {
    humantime::format_rfc3339_millis(SystemTime::now()).to_string()
}

impl RunManifest {
    pub fn start(subcommand: &str, args: Vec<String>, threads: Option<usize>) -> Self {
        let t = now_rfc3339();
        RunManifest {
            subcommand: subcommand.to_string(),
            args,
            seed: None,
            library_version: nctest::VERSION.to_string(),
            cli_version: env!("CARGO_PKG_VERSION").to_string(),
            input: None,
            threads,
            started_at: t.clone(),
            finished_at: t,
            outputs: Vec::new(),
        }
    }
}

/// Where `--out` sends files: a directory, or a single named file whose
/// siblings take its stem as a prefix.
#[derive(Debug, Clone)]
pub enum OutTarget {
    Dir(PathBuf),
    File(PathBuf),
}

impl OutTarget {
    pub fn parse(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => OutTarget::File(path.to_path_buf()),
            _ => OutTarget::Dir(path.to_path_buf()),
        }
    }

    /// Path of the artifact `name`; the first artifact (`primary`) takes
    /// the explicit file name when one was given.
    fn path_for(&self, name: &str, primary: bool) -> PathBuf {
        match self {
            OutTarget::Dir(d) => d.join(name),
            OutTarget::File(f) if primary => f.clone(),
            OutTarget::File(f) => {
                let stem = f.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
                f.with_file_name(format!("{stem}_{name}"))
            }
        }
    }

    fn ensure(&self) -> std::io::Result<()> {
        let dir = match self {
            OutTarget::Dir(d) => Some(d.as_path()),
            OutTarget::File(f) => f.parent().filter(|p| !p.as_os_str().is_empty()),
        };
        match dir {
            Some(d) => fs::create_dir_all(d),
            None => Ok(()),
        }
    }
}

pub enum ArtifactKind {
    Csv,
    Svg,
}

/// A file to be written; SVGs are rendered late so they can embed the
/// final manifest.
pub struct Artifact {
    pub name: String,
    pub kind: ArtifactKind,
    pub body: ArtifactBody,
}

pub enum ArtifactBody {
    Text(String),
    Plot(crate::svg::Plot),
}

impl Artifact {
    pub fn csv(name: &str, body: String) -> Self {
        Artifact {
            name: name.to_string(),
            kind: ArtifactKind::Csv,
            body: ArtifactBody::Text(body),
        }
    }

    pub fn svg(name: &str, plot: crate::svg::Plot) -> Self {
        Artifact {
            name: name.to_string(),
            kind: ArtifactKind::Svg,
            body: ArtifactBody::Plot(plot),
        }
    }
}

/// Write every artifact under `target`. CSV files get a
/// `<file>.manifest.json` sidecar, SVG files embed the manifest, and the
/// JSON result is written alongside with the manifest inside it.
pub fn write_all(
    target: &OutTarget,
    subcommand: &str,
    artifacts: Vec<Artifact>,
    manifest: &mut RunManifest,
    result: &serde_json::Value,
) -> Result<(), CliError> {
    target
        .ensure()
        .map_err(|e| CliError::io(target_display(target), e))?;
    let mut csvs = Vec::new();
    let mut plots = Vec::new();
    for (k, a) in artifacts.into_iter().enumerate() {
        let path = target.path_for(&a.name, k == 0);
        match a.body {
            ArtifactBody::Text(body) => {
                fs::write(&path, &body).map_err(|e| CliError::io(&path, e))?;
                manifest.outputs.push(OutputDigest {
                    file: file_name(&path),
                    sha256: sha256_hex(body.as_bytes()),
                });
                if matches!(a.kind, ArtifactKind::Csv) {
                    csvs.push(path);
                }
            }
            ArtifactBody::Plot(plot) => plots.push((path, plot)),
        }
    }
    manifest.finished_at = now_rfc3339();
    let pretty = serde_json::to_string_pretty(manifest).expect("manifest serialises");
    for path in &csvs {
        let sidecar = path.with_file_name(format!("{}.manifest.json", file_name(path)));
        fs::write(&sidecar, &pretty).map_err(|e| CliError::io(&sidecar, e))?;
    }
    let compact = serde_json::to_string(manifest).expect("manifest serialises");
    for (path, plot) in &plots {
        fs::write(path, plot.render(Some(&compact))).map_err(|e| CliError::io(path, e))?;
    }
    let json_path = target.path_for(&format!("{subcommand}.json"), false);
    let mut doc = result.clone();
    doc["manifest"] = serde_json::to_value(&*manifest).expect("manifest serialises");
    fs::write(
        &json_path,
        serde_json::to_string_pretty(&doc).expect("json"),
    )
    .map_err(|e| CliError::io(&json_path, e))?;
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string()
}

fn target_display(t: &OutTarget) -> &Path {
    match t {
        OutTarget::Dir(d) | OutTarget::File(d) => d,
    }
}

/// Serialise rows with a header line; `f64` cells use the shortest
/// round-tripping representation.
pub fn csv_string<const N: usize>(
    header: [&str; N],
    rows: impl IntoIterator<Item = [String; N]>,
) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
