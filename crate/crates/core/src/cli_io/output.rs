use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::lattice::CouplingModel;
use crate::noise_mc::ExperimentResult;
use crate::spectrum::{BroadenedCurve, LabeledStick, ModelReport, Sampling, Stick};
use crate::{Error, Result};

fn ser_err(e: impl std::fmt::Display) -> Error {
    Error::Serialization(e.to_string())
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create_file(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(ser_err)?;
    f.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    f.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(ser_err)
}

/// Serializes `rows` as CSV with a header row. An empty slice produces an
/// empty body.
pub fn write_csv_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(out);
    for r in rows {
        w.serialize(r).map_err(ser_err)?;
    }
    w.flush().map_err(ser_err)
}

pub fn read_csv_rows<R: Read, T: DeserializeOwned>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(ser_err)
}

pub fn write_csv_file<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut f = create_file(path)?;
    write_csv_rows(&mut f, rows)?;
    f.flush().map_err(|e| Error::io(path, e))
}

/// One row of the Monte Carlo summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    /// Site count of the simulated pyramid.
    pub size: u64,
    #[serde(rename = "L")]
    pub layers: u64,
    pub eps0: f64,
    pub eps1: f64,
    pub rule_set: String,
    pub diffusion_steps: u64,
    pub trials: u64,
    pub mean_signal: f64,
    pub std_err: f64,
    pub contrast: Option<f64>,
}

impl McRow {
    pub fn from_result(r: &ExperimentResult) -> Self {
        McRow {
            size: r.site_count,
            layers: r.config.layers,
            eps0: r.config.noise.eps0,
            eps1: r.config.noise.eps1,
            rule_set: r.config.rule_label().to_string(),
            diffusion_steps: r.config.diffusion.steps,
            trials: r.config.trials,
            mean_signal: r.mean_signal,
            std_err: r.std_err,
            contrast: r.contrast,
        }
    }
}

/// Full per-configuration results of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McBundle {
    pub schema_version: u32,
    pub results: Vec<ExperimentResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub frequency_hz: f64,
    pub intensity: f64,
}

pub fn curve_points(curve: &BroadenedCurve) -> Vec<CurvePoint> {
    curve
        .grid
        .frequencies()
        .into_iter()
        .zip(&curve.intensities)
        .map(|(frequency_hz, &intensity)| CurvePoint { frequency_hz, intensity })
        .collect()
}

/// Stick file of one spectrum model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SticksFile {
    pub label: String,
    pub model: CouplingModel,
    pub suppress_homonuclear: bool,
    pub partner_count: usize,
    pub sampling: Sampling,
    pub score: f64,
    pub field_overlaps: BTreeMap<i32, f64>,
    pub cluster_centers: BTreeMap<i32, f64>,
    pub sticks: Vec<Stick>,
    pub labeled: Vec<LabeledStick>,
}

impl SticksFile {
    pub fn from_report(r: &ModelReport) -> Self {
        SticksFile {
            label: r.label.clone(),
            model: r.model,
            suppress_homonuclear: r.suppress_homonuclear,
            partner_count: r.spectrum.partner_count,
            sampling: r.spectrum.sampling,
            score: r.score,
            field_overlaps: r.field_overlaps.clone(),
            cluster_centers: r.cluster_centers.clone(),
            sticks: r.spectrum.sticks.clone(),
            labeled: r.spectrum.labeled.clone(),
        }
    }
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Fully resolved configuration, defaults included.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub threads: Option<usize>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<PathBuf>,
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize, seeds: Vec<u64>, threads: Option<usize>) -> Result<Self> {
        Ok(RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: serde_json::to_value(config).map_err(ser_err)?,
            seeds,
            threads,
            started_unix: unix_now(),
            finished_unix: 0,
            outputs: Vec::new(),
        })
    }

    pub fn record(&mut self, path: PathBuf) {
        if !self.outputs.contains(&path) {
            self.outputs.push(path);
        }
    }

    pub fn finish(mut self, path: &Path) -> Result<PathBuf> {
        self.finished_unix = unix_now();
        write_json(path, &self)?;
        Ok(path.to_path_buf())
    }
}
