//! File formats: scenario TOML, trace CSV, run-log CSV, and rule documents.
//!
//! Run logs are written with a fixed layout (six-decimal floats, `nan` for
//! absent scores, `0`/`1` switch flags) so that writing, reading, and writing
//! again reproduces the file byte for byte.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dsl::parse_rules;
use crate::error::{Error, Result};
use crate::rules::RuleBase;
use crate::sim::{
    generate_trace, FrameRecord, ModelProfile, NtSource, RecallCurve, RunLog, Scenario,
    ThermalModel, TraceSegment,
};
use crate::switcher::{CounterMode, ModelId};

/// Where a scenario's frame trace comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceSource {
    /// External CSV with header `frame,nt_true`.
    Csv(PathBuf),
    /// Inline synthetic generator.
    Segments(Vec<TraceSegment>),
}

impl TraceSource {
    /// Produce the per-frame counts. Relative CSV paths resolve against
    /// `base_dir` when given.
    pub fn materialize(&self, base_dir: Option<&Path>) -> Result<Vec<u32>> {
        match self {
            TraceSource::Segments(segs) => generate_trace(segs),
            TraceSource::Csv(path) => {
                let resolved = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                load_trace_csv(&resolved)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpec {
    label: String,
    base_load: f64,
    per_target_load: f64,
    #[serde(default)]
    latency_ms: f64,
    recall_curve: Vec<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceSpec {
    csv: Option<PathBuf>,
    #[serde(default)]
    segments: Vec<TraceSegment>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default = "default_threshold_k")]
    threshold_k: u32,
    #[serde(default)]
    counter_mode: CounterMode,
    #[serde(default)]
    rng_seed: Option<u64>,
    #[serde(default)]
    gu_noise_sigma: f64,
    #[serde(default)]
    controller_nt: NtSource,
    thermal: ThermalModel,
    models: Vec<ModelSpec>,
    trace: TraceSpec,
}

fn default_threshold_k() -> u32 {
    5
}

impl TraceSpec {
    fn into_source(self) -> Result<TraceSource> {
        match (self.csv, self.segments.is_empty()) {
            (Some(path), true) => Ok(TraceSource::Csv(path)),
            (None, false) => Ok(TraceSource::Segments(self.segments)),
            (Some(_), false) => Err(Error::InvalidScenario(
                "trace declares both a csv and inline segments; pick one".into(),
            )),
            (None, true) => Err(Error::InvalidScenario(
                "trace declares neither a csv nor inline segments".into(),
            )),
        }
    }
}

/// Load and validate a scenario from a TOML file. Relative trace CSV paths
/// resolve against the scenario file's directory.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ScenarioFile = toml::from_str(&text)
        .map_err(|e| Error::InvalidScenario(format!("{}: {e}", path.display())))?;
    let trace = file.trace.into_source()?.materialize(path.parent())?;
    let models = file
        .models
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            Ok(ModelProfile {
                id: ModelId(i),
                label: m.label,
                base_load: m.base_load,
                per_target_load: m.per_target_load,
                recall: RecallCurve::new(m.recall_curve)?,
                latency_ms: m.latency_ms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sc = Scenario {
        name: file.name,
        models,
        thermal: file.thermal,
        trace,
        threshold_k: file.threshold_k,
        counter_mode: file.counter_mode,
        rng_seed: file.rng_seed,
        gu_noise_sigma: file.gu_noise_sigma,
        controller_nt: file.controller_nt,
    };
    sc.validate()?;
    Ok(sc)
}

/// Load a frame trace from CSV. The header must be exactly
/// `frame,nt_true` and frame indices must run 0, 1, 2, ... without gaps.
pub fn load_trace_csv(path: impl AsRef<Path>) -> Result<Vec<u32>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::InvalidTrace {
        row: 0,
        message: e.to_string(),
    })?;
    if headers != vec!["frame", "nt_true"] {
        return Err(Error::InvalidTrace {
            row: 0,
            message: format!(
                "header must be `frame,nt_true`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut trace = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::InvalidTrace {
            row,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::InvalidTrace {
                row,
                message: format!("expected 2 fields, got {}", record.len()),
            });
        }
        let frame: u32 = record[0].parse().map_err(|_| Error::InvalidTrace {
            row,
            message: format!("bad frame index `{}`", &record[0]),
        })?;
        if frame as usize != i {
            return Err(Error::InvalidTrace {
                row,
                message: format!(
                    "frame indices must be sequential from 0; expected {i}, got {frame}"
                ),
            });
        }
        let nt: u32 = record[1].parse().map_err(|_| Error::InvalidTrace {
            row,
            message: format!("bad target count `{}`", &record[1]),
        })?;
        trace.push(nt);
    }
    if trace.is_empty() {
        return Err(Error::InvalidTrace {
            row: 0,
            message: "trace has no frames".into(),
        });
    }
    Ok(trace)
}

const RUNLOG_HEADER: &str = "frame,model,gu,gt,nt_true,nt_obs,score,switched";

/// Write a run log as CSV with the fixed layout described in the module docs.
pub fn write_runlog_csv(log: &RunLog, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_runlog(log, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write a run log to any writer; see `write_runlog_csv`.
pub fn write_runlog(log: &RunLog, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "{RUNLOG_HEADER}")?;
    for r in &log.records {
        let score = match r.score {
            Some(s) => format!("{s:.6}"),
            None => "nan".into(),
        };
        writeln!(
            w,
            "{},{},{:.6},{:.6},{},{},{},{}",
            r.frame,
            r.model,
            r.gu,
            r.gt,
            r.nt_true,
            r.nt_obs,
            score,
            u8::from(r.switched)
        )?;
    }
    Ok(())
}

/// Read a run log written by `write_runlog_csv`. The scenario name and seed
/// are not part of the CSV, so they come back empty.
pub fn read_runlog_csv(path: impl AsRef<Path>) -> Result<RunLog> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::InvalidRunLog {
        row: 0,
        message: e.to_string(),
    })?;
    let expected: Vec<&str> = RUNLOG_HEADER.split(',').collect();
    if headers != expected {
        return Err(Error::InvalidRunLog {
            row: 0,
            message: format!("header must be `{RUNLOG_HEADER}`"),
        });
    }
    let mut records = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let bad = |message: String| Error::InvalidRunLog { row, message };
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != 8 {
            return Err(bad(format!("expected 8 fields, got {}", record.len())));
        }
        let field = |j: usize| record[j].to_string();
        let frame: u32 = record[0]
            .parse()
            .map_err(|_| bad(format!("bad frame `{}`", field(0))))?;
        let gu: f64 = record[2]
            .parse()
            .map_err(|_| bad(format!("bad gu `{}`", field(2))))?;
        let gt: f64 = record[3]
            .parse()
            .map_err(|_| bad(format!("bad gt `{}`", field(3))))?;
        if !gu.is_finite() || !gt.is_finite() {
            return Err(bad("gu and gt must be finite".into()));
        }
        let nt_true: u32 = record[4]
            .parse()
            .map_err(|_| bad(format!("bad nt_true `{}`", field(4))))?;
        let nt_obs: u32 = record[5]
            .parse()
            .map_err(|_| bad(format!("bad nt_obs `{}`", field(5))))?;
        let score: f64 = record[6]
            .parse()
            .map_err(|_| bad(format!("bad score `{}`", field(6))))?;
        let score = if score.is_nan() { None } else { Some(score) };
        let switched = match &record[7] {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("switched must be 0 or 1, got `{other}`"))),
        };
        records.push(FrameRecord {
            frame,
            model: field(1),
            gu,
            gt,
            nt_true,
            nt_obs,
            score,
            switched,
        });
    }
    Ok(RunLog {
        records,
        scenario_name: None,
        seed: None,
    })
}

/// Load and validate a rule document from a file.
pub fn load_rules(path: impl AsRef<Path>) -> Result<RuleBase> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rules(&text)
}
