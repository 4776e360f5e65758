use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tonsure_core::tail::OctantSummary;
use tonsure_core::ScanCurve;

use crate::error::CliError;

/// One line of a curve file: a grid point of one named curve, with its null
/// envelope when one was computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub series: String,
    pub x: f64,
    pub value: Option<f64>,
    pub n_used: usize,
    pub low_confidence: bool,
    pub over_one: bool,
    pub null_mean: Option<f64>,
    pub null_lower: Option<f64>,
    pub null_upper: Option<f64>,
    pub null_present: Option<usize>,
    pub null_reliable: Option<bool>,
}

pub fn curve_rows(scan: &ScanCurve) -> Vec<CurveRow> {
    let mut rows = Vec::new();
    for curve in &scan.curves {
        for (j, p) in curve.points.iter().enumerate() {
            let env = curve.envelope.as_ref().and_then(|e| e.points.get(j));
            rows.push(CurveRow {
                series: curve.name.clone(),
                x: p.x,
                value: p.value,
                n_used: p.n_used,
                low_confidence: p.low_confidence,
                over_one: p.over_one,
                null_mean: env.and_then(|e| e.mean),
                null_lower: env.and_then(|e| e.lower),
                null_upper: env.and_then(|e| e.upper),
                null_present: env.map(|e| e.present),
                null_reliable: env.map(|e| e.reliable),
            });
        }
    }
    rows
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::write(path, e))?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

pub fn read_curve_rows(path: &Path) -> Result<Vec<CurveRow>, csv::Error> {
    csv::Reader::from_path(path)?.deserialize().collect()
}

pub fn write_octant_table(path: &Path, summaries: &[OctantSummary]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))?;
    let mut header = vec!["tonsure_percent".to_string()];
    header.extend((1..=8).map(|i| format!("n{i}")));
    header.extend(["n_a", "n_b", "ratio"].map(String::from));
    header.extend((1..=8).map(|i| format!("asym{i}")));
    w.write_record(&header).map_err(|e| CliError::write(path, e))?;
    for s in summaries {
        let mut rec = vec![s.tonsure_percent.to_string()];
        rec.extend(s.counts.iter().map(usize::to_string));
        rec.extend([s.n_a, s.n_b, s.ratio].map(|v| v.to_string()));
        rec.extend(s.asymmetry.iter().map(|a| a.map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&rec).map_err(|e| CliError::write(path, e))?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::read(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub role: String,
    pub path: String,
    pub column: String,
    pub transform: String,
    pub sha256: String,
}

/// Sidecar written next to every output. Holds no timestamps or absolute
/// output paths, so identical runs produce identical manifests.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub generator: String,
    /// Command line reproducing this run, minus `--out`.
    pub rerun: String,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputRecord>,
    pub metadata: BTreeMap<String, String>,
    /// File name to sha256 of everything written alongside.
    pub outputs: BTreeMap<String, String>,
}

pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::write(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Path for a new file, remembered for the manifest.
    pub fn file(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.root.join(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.file(name);
        fs::write(&path, text).map_err(|e| CliError::write(&path, e))
    }

    pub fn finish(self, mut manifest: Manifest) -> Result<(), CliError> {
        for name in &self.written {
            manifest.outputs.insert(name.clone(), sha256_file(&self.root.join(name))?);
        }
        let path = self.root.join("manifest.toml");
        let text = toml::to_string(&manifest).map_err(|e| CliError::write(&path, e))?;
        fs::write(&path, text).map_err(|e| CliError::write(&path, e))
    }
}
