//! Result files: a versioned JSON document that embeds its run manifest,
//! fixed-column CSV tables, and JSON-lines hit logs.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::grw::HitRecord;
use crate::scenarios::{Aggregate, Summary, TrialDigest, TrialResult};

/// Bumped whenever a field of an emitted document changes meaning or goes away.
pub const SCHEMA_VERSION: u32 = 1;
pub const SCHEMA_NAME: &str = "grw-tails.results";
pub const TOOL_VERSION: &str = concat!("grw-tails ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::invalid(format!(
                "format must be json or csv, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

/// Seconds since the Unix epoch.
pub fn wall_clock() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// What is needed to reproduce a result file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub config: RunConfig,
    pub seed: u64,
    pub tool_version: String,
    pub rng: String,
    /// Wall-clock start and end, seconds since the Unix epoch.
    pub started_at: f64,
    pub finished_at: f64,
}

impl RunManifest {
    pub fn new(
        scenario: impl Into<String>,
        config: &RunConfig,
        rng: impl Into<String>,
        started_at: f64,
    ) -> Self {
        RunManifest {
            scenario: scenario.into(),
            seed: config.scenario.seed,
            config: config.clone(),
            tool_version: TOOL_VERSION.to_string(),
            rng: rng.into(),
            started_at,
            finished_at: started_at,
        }
    }

    pub fn finish(mut self, at: f64) -> Self {
        self.finished_at = at;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument<T> {
    pub schema: String,
    pub schema_version: u32,
    pub manifest: RunManifest,
    pub results: T,
}

impl<T> ResultDocument<T> {
    pub fn new(manifest: RunManifest, results: T) -> Self {
        ResultDocument {
            schema: SCHEMA_NAME.to_string(),
            schema_version: SCHEMA_VERSION,
            manifest,
            results,
        }
    }
}

/// Columns of the per-trial CSV table, in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: u64,
    pub outcome: Option<String>,
    pub collapse_time: Option<f64>,
    pub hits: u64,
    pub jump_events: u64,
    pub manifestation_events: u64,
    pub pointer_agreement: bool,
    pub counter_value: Option<u32>,
    pub unmeasured_hits: Option<u64>,
    pub weak_anomaly_throughout: bool,
    pub strong_anomaly_throughout: bool,
}

impl From<&TrialDigest> for TrialRow {
    fn from(d: &TrialDigest) -> Self {
        TrialRow {
            trial: d.trial,
            outcome: d.outcome.clone(),
            collapse_time: d.collapse_time,
            hits: d.hits,
            jump_events: d.jump_events,
            manifestation_events: d.manifestation_events,
            pointer_agreement: d.pointer_agreement,
            counter_value: d.counter_value,
            unmeasured_hits: d.unmeasured_hits,
            weak_anomaly_throughout: d.weak_anomaly_throughout,
            strong_anomaly_throughout: d.strong_anomaly_throughout,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResults {
    pub aggregate: Aggregate,
    pub trials: Vec<TrialDigest>,
}

impl From<&Summary> for MonteCarloResults {
    fn from(s: &Summary) -> Self {
        MonteCarloResults {
            aggregate: s.aggregate.clone(),
            trials: s.results.iter().map(TrialDigest::from).collect(),
        }
    }
}

impl MonteCarloResults {
    pub fn rows(&self) -> Vec<TrialRow> {
        self.trials.iter().map(TrialRow::from).collect()
    }
}

/// Pretty JSON with a trailing newline.
pub fn render_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| Error::Serialize(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// CSV with a header row taken from the row type's field order.
pub fn render_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::Serialize(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Serialize(e.to_string()))
}

/// One JSON object per hit, tagged with its trial.
pub fn render_event_log(results: &[TrialResult]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for r in results {
        out.extend(render_trial_events(r)?);
    }
    Ok(out)
}

/// The event-log lines of a single trial.
pub fn render_trial_events(result: &TrialResult) -> Result<Vec<u8>> {
    #[derive(Serialize)]
    struct Line<'a> {
        trial: u64,
        #[serde(flatten)]
        record: &'a HitRecord,
    }
    let mut out = Vec::new();
    for record in &result.event_log {
        serde_json::to_writer(
            &mut out,
            &Line {
                trial: result.trial,
                record,
            },
        )
        .map_err(|e| Error::Serialize(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Write `bytes` to `path`, or to standard output when `path` is `None`.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

/// Render a document as JSON, or its table as CSV, and write it out.
pub fn emit_results<T: Serialize, R: Serialize>(
    doc: &ResultDocument<T>,
    rows: &[R],
    format: Format,
    path: Option<&Path>,
) -> Result<()> {
    let bytes = match format {
        Format::Json => render_json(doc)?,
        Format::Csv => render_csv(rows)?,
    };
    write_output(path, &bytes)
}
