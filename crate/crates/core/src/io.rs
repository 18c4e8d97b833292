//! File formats: dataset, event and summary CSVs, network checkpoints and
//! result JSON, plus atomic whole-file writes.
//!
//! Floating-point CSV fields are printed like C's `%.17g`: 17 significant
//! digits with trailing zeros dropped, which parses back to the same bits.

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::encoders::{RateEncoding, SpikeTrain};
use crate::error::{Error, Result};
use crate::experiments::{SweepResult, Table1};
use crate::geometry::{inside_big_circle, which_class, ClassLabel, GeometryParams};
use crate::sampler::{Dataset, Sample};
use crate::tinynet::{Layer, Mlp, MlpArchitecture};

pub const DATASET_HEADER: &str = "x,y,class";
pub const EVENT_HEADER: &str = "sample_id,neuron_id,time_ms";
pub const RATE_HEADER: &str = "sample_id,neuron_id,rate_hz";
pub const TABLE1_HEADER: &str = "network,hidden,n_runs,mean_accuracy,std_accuracy,min_accuracy,max_accuracy";
pub const SWEEP_HEADER: &str = "hidden,n_runs,mean_error,std_error,min_error,max_error";
/// Written in place of a standard deviation that needs more values.
pub const NOT_AVAILABLE: &str = "NA";

/// `%.17g` formatting.
pub fn fmt_f64(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `contents` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    // Temporary files default to owner-only access; outputs get the usual umask-filtered mode.
    #[cfg(unix)]
    builder.permissions(std::os::unix::fs::PermissionsExt::from_mode(0o666));
    let mut tmp = builder.tempfile_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(source: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: source.to_string(), line, msg: msg.into() }
}

/// Reads a headered CSV, checking the header and handing every record to `row`.
/// Line numbers passed to `row` are 1-based file lines.
fn parse_csv<T>(
    text: &str,
    source: &str,
    header: &str,
    mut row: impl FnMut(&csv::StringRecord, usize) -> Result<T>,
) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| parse_err(source, 1, e.to_string()))?.clone();
    let expected: Vec<&str> = header.split(',').collect();
    if found.iter().collect::<Vec<_>>() != expected {
        return Err(parse_err(source, 1, format!("expected header `{header}`")));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(source, line, e.to_string()))?;
        if rec.len() != expected.len() {
            return Err(parse_err(source, line, format!("expected {} fields, got {}", expected.len(), rec.len())));
        }
        out.push(row(&rec, line)?);
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, source: &str, line: usize) -> Result<T> {
    rec[i].parse().map_err(|_| parse_err(source, line, format!("cannot parse `{}`", &rec[i])))
}

fn join_lines(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

pub fn dataset_to_csv(ds: &Dataset) -> String {
    join_lines(
        DATASET_HEADER,
        ds.samples.iter().map(|s| format!("{},{},{}", fmt_f64(s.x), fmt_f64(s.y), s.label.index())),
    )
}

/// Parses a dataset CSV, checking every sample against `geometry`.
pub fn dataset_from_csv(text: &str, source: &str, geometry: &GeometryParams) -> Result<Dataset> {
    let samples = parse_csv(text, source, DATASET_HEADER, |rec, line| {
        let x: f64 = field(rec, 0, source, line)?;
        let y: f64 = field(rec, 1, source, line)?;
        let code: u8 = field(rec, 2, source, line)?;
        let label = ClassLabel::try_from(code).map_err(|m| parse_err(source, line, m))?;
        let p = crate::geometry::Point::new(x, y);
        if !inside_big_circle(p, geometry) {
            return Err(parse_err(source, line, format!("({x}, {y}) lies outside the symbol")));
        }
        if which_class(p, geometry)? != label {
            return Err(parse_err(source, line, format!("({x}, {y}) is not in class {label}")));
        }
        Ok(Sample { x, y, label })
    })?;
    if samples.is_empty() {
        return Err(parse_err(source, 1, "dataset has no samples"));
    }
    Ok(Dataset { samples, seed: None, geometry: *geometry })
}

pub fn load_dataset(path: &Path, geometry: &GeometryParams) -> Result<Dataset> {
    dataset_from_csv(&read_to_string(path)?, &path.display().to_string(), geometry)
}

/// One row of an event CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventRow {
    pub sample_id: usize,
    pub neuron_id: usize,
    pub time_ms: f64,
}

/// One row of a rate CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateRow {
    pub sample_id: usize,
    pub neuron_id: usize,
    pub rate_hz: f64,
}

pub fn event_rows(sample_id: usize, train: &SpikeTrain) -> impl Iterator<Item = EventRow> + '_ {
    train.events().iter().map(move |e| EventRow { sample_id, neuron_id: e.neuron_id, time_ms: e.time_ms })
}

pub fn events_to_csv(rows: &[EventRow]) -> String {
    join_lines(
        EVENT_HEADER,
        rows.iter().map(|r| format!("{},{},{}", r.sample_id, r.neuron_id, fmt_f64(r.time_ms))),
    )
}

pub fn events_from_csv(text: &str, source: &str) -> Result<Vec<EventRow>> {
    parse_csv(text, source, EVENT_HEADER, |rec, line| {
        Ok(EventRow {
            sample_id: field(rec, 0, source, line)?,
            neuron_id: field(rec, 1, source, line)?,
            time_ms: field(rec, 2, source, line)?,
        })
    })
}

pub fn rates_to_csv(rows: &[RateRow]) -> String {
    join_lines(
        RATE_HEADER,
        rows.iter().map(|r| format!("{},{},{}", r.sample_id, r.neuron_id, fmt_f64(r.rate_hz))),
    )
}

pub fn rates_from_csv(text: &str, source: &str) -> Result<Vec<RateRow>> {
    parse_csv(text, source, RATE_HEADER, |rec, line| {
        Ok(RateRow {
            sample_id: field(rec, 0, source, line)?,
            neuron_id: field(rec, 1, source, line)?,
            rate_hz: field(rec, 2, source, line)?,
        })
    })
}

/// Encoded output of many samples, in sample order.
#[derive(Clone, Debug, PartialEq)]
pub enum EncodedRows {
    Events(Vec<EventRow>),
    Rates(Vec<RateRow>),
}

impl EncodedRows {
    pub fn push(&mut self, sample_id: usize, enc: &RateEncoding) {
        match (self, enc) {
            (EncodedRows::Events(rows), RateEncoding::Spikes(train)) => rows.extend(event_rows(sample_id, train)),
            (EncodedRows::Rates(rows), RateEncoding::Rates(rates)) => rows.extend(
                rates.iter().enumerate().map(|(neuron_id, &rate_hz)| RateRow { sample_id, neuron_id, rate_hz }),
            ),
            _ => panic!("mixed event and rate encodings in one file"),
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            EncodedRows::Events(rows) => events_to_csv(rows),
            EncodedRows::Rates(rows) => rates_to_csv(rows),
        }
    }
}

/// Serialized network: architecture plus row-major parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub layer_sizes: Vec<usize>,
    pub frozen: Vec<bool>,
    /// One row-major `fan_out × fan_in` array per weight layer.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl From<&Mlp> for Checkpoint {
    fn from(net: &Mlp) -> Self {
        let arch = net.architecture();
        Self {
            layer_sizes: arch.layer_sizes().to_vec(),
            frozen: arch.frozen().to_vec(),
            weights: net.layers().iter().map(|l| l.weights.clone()).collect(),
            biases: net.layers().iter().map(|l| l.biases.clone()).collect(),
        }
    }
}

impl Checkpoint {
    pub fn into_mlp(self) -> Result<Mlp> {
        let arch = MlpArchitecture::new(self.layer_sizes.clone(), self.frozen)?;
        if self.weights.len() != self.biases.len() {
            return Err(Error::config("checkpoint has mismatched weight and bias layer counts"));
        }
        let layers = self
            .layer_sizes
            .windows(2)
            .zip(self.weights.into_iter().zip(self.biases))
            .map(|(w, (weights, biases))| Layer { fan_in: w[0], fan_out: w[1], weights, biases })
            .collect();
        Mlp::from_layers(arch, layers)
    }
}

/// Pretty JSON with a trailing newline. Floats use the shortest text that
/// parses back to the same `f64`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json(&read_to_string(path)?)
}

pub fn save_checkpoint(path: &Path, net: &Mlp) -> Result<()> {
    write_atomic(path, to_json(&Checkpoint::from(net))?.as_bytes())
}

pub fn load_checkpoint(path: &Path) -> Result<Mlp> {
    load_json::<Checkpoint>(path)?.into_mlp()
}

/// One line of a summary table.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub label: Option<String>,
    pub hidden: Option<usize>,
    pub n: usize,
    pub mean: f64,
    pub std: Option<f64>,
    pub min: f64,
    pub max: f64,
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| NOT_AVAILABLE.to_string())
}

fn summary_line(r: &SummaryRow) -> String {
    let hidden = r.hidden.map(|h| h.to_string()).unwrap_or_else(|| NOT_AVAILABLE.to_string());
    let stats = format!("{},{},{},{},{}", r.n, fmt_f64(r.mean), opt_f64(r.std), fmt_f64(r.min), fmt_f64(r.max));
    match &r.label {
        Some(label) => format!("{label},{hidden},{stats}"),
        None => format!("{hidden},{stats}"),
    }
}

pub fn table1_rows(t: &Table1) -> Vec<SummaryRow> {
    t.cells
        .iter()
        .map(|c| SummaryRow {
            label: Some(c.scenario.kind().to_string()),
            hidden: c.scenario.hidden(),
            n: c.accuracy.n,
            mean: c.accuracy.mean,
            std: c.accuracy.std,
            min: c.accuracy.min,
            max: c.accuracy.max,
        })
        .collect()
}

pub fn sweep_rows(s: &SweepResult) -> Vec<SummaryRow> {
    s.entries
        .iter()
        .map(|e| SummaryRow {
            label: None,
            hidden: Some(e.hidden),
            n: e.error.n,
            mean: e.error.mean,
            std: e.error.std,
            min: e.error.min,
            max: e.error.max,
        })
        .collect()
}

/// Table layout: `network,hidden,n_runs,mean,std,min,max`, `NA` where not applicable.
pub fn table1_to_csv(rows: &[SummaryRow]) -> String {
    join_lines(TABLE1_HEADER, rows.iter().map(summary_line))
}

pub fn sweep_to_csv(rows: &[SummaryRow]) -> String {
    join_lines(SWEEP_HEADER, rows.iter().map(summary_line))
}

fn opt_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, source: &str, line: usize) -> Result<Option<T>> {
    if &rec[i] == NOT_AVAILABLE {
        Ok(None)
    } else {
        field(rec, i, source, line).map(Some)
    }
}

pub fn table1_from_csv(text: &str, source: &str) -> Result<Vec<SummaryRow>> {
    parse_csv(text, source, TABLE1_HEADER, |rec, line| {
        Ok(SummaryRow {
            label: Some(rec[0].to_string()),
            hidden: opt_field(rec, 1, source, line)?,
            n: field(rec, 2, source, line)?,
            mean: field(rec, 3, source, line)?,
            std: opt_field(rec, 4, source, line)?,
            min: field(rec, 5, source, line)?,
            max: field(rec, 6, source, line)?,
        })
    })
}

pub fn sweep_from_csv(text: &str, source: &str) -> Result<Vec<SummaryRow>> {
    parse_csv(text, source, SWEEP_HEADER, |rec, line| {
        Ok(SummaryRow {
            label: None,
            hidden: opt_field(rec, 0, source, line)?,
            n: field(rec, 1, source, line)?,
            mean: field(rec, 2, source, line)?,
            std: opt_field(rec, 3, source, line)?,
            min: field(rec, 4, source, line)?,
            max: field(rec, 5, source, line)?,
        })
    })
}
