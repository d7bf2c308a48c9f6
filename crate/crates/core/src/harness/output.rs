//! Experiment records, summaries and result files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::SystemConfig;
use crate::ece::Allocation;
use crate::{Error, Result};

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 10] = [
    "experiment",
    "trial",
    "plant_count",
    "M",
    "variant",
    "method",
    "value",
    "feasible",
    "seed",
    "x",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::config("format", format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

/// Extra per-record data carried only in JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecordDetail {
    /// Inputs needed to re-evaluate an ECE value.
    Allocation { betas: Vec<f64>, allocation: Allocation },
    /// Cost above `c_min` and the information surplus it came from.
    Cost { excess: f64, omega: f64 },
    /// Spread of a Monte-Carlo mean.
    MonteCarlo { std_error: f64, samples: usize },
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: String,
    /// Trial or grid index; absent on aggregate rows.
    pub trial: Option<usize>,
    pub plant_count: usize,
    #[serde(rename = "M")]
    pub antennas: Option<usize>,
    pub variant: String,
    pub method: String,
    /// Absent when `feasible` is false.
    pub value: Option<f64>,
    pub feasible: bool,
    pub seed: u64,
    /// Swept parameter value, when the experiment sweeps one.
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<RecordDetail>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub value: f64,
    pub probability: f64,
}

/// Statistics over the records sharing variant, method, plant count and M.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub variant: String,
    pub method: String,
    pub plant_count: usize,
    #[serde(rename = "M")]
    pub antennas: Option<usize>,
    pub feasible: usize,
    pub infeasible: usize,
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cdf: Vec<CdfPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub config: SystemConfig,
    pub records: Vec<Record>,
    pub summary: Vec<GroupSummary>,
}

/// Empirical CDF of the finite values: sorted ascending, `P(X <= v_i) = i / n`.
pub fn empirical_cdf(values: &[f64]) -> Vec<CdfPoint> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.into_iter()
        .enumerate()
        .map(|(i, value)| CdfPoint {
            value,
            probability: (i + 1) as f64 / n,
        })
        .collect()
}

/// Groups records (in first-appearance order) and summarizes each group.
pub fn summarize(records: &[Record], with_cdf: bool) -> Vec<GroupSummary> {
    type Key = (String, String, usize, Option<usize>);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: BTreeMap<Key, Vec<&Record>> = BTreeMap::new();
    for r in records {
        let key = (r.variant.clone(), r.method.clone(), r.plant_count, r.antennas);
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rows = &groups[&key];
            let values: Vec<f64> = rows.iter().filter(|r| r.feasible).filter_map(|r| r.value).collect();
            let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
            GroupSummary {
                feasible: values.len(),
                infeasible: rows.len() - values.len(),
                mean,
                cdf: if with_cdf { empirical_cdf(&values) } else { Vec::new() },
                variant: key.0,
                method: key.1,
                plant_count: key.2,
                antennas: key.3,
            }
        })
        .collect()
}

fn output_error(path: &Path, reason: impl fmt::Display) -> Error {
    Error::Output {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    experiment: String,
    trial: Option<usize>,
    plant_count: usize,
    #[serde(rename = "M")]
    antennas: Option<usize>,
    variant: String,
    method: String,
    value: Option<f64>,
    feasible: bool,
    seed: u64,
    x: Option<f64>,
}

impl From<&Record> for CsvRow {
    fn from(r: &Record) -> Self {
        Self {
            experiment: r.experiment.clone(),
            trial: r.trial,
            plant_count: r.plant_count,
            antennas: r.antennas,
            variant: r.variant.clone(),
            method: r.method.clone(),
            value: r.value,
            feasible: r.feasible,
            seed: r.seed,
            x: r.x,
        }
    }
}

/// Writes the records as CSV (header always present) to any writer.
pub fn write_csv<W: Write>(result: &ExperimentResult, out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in &result.records {
        w.serialize(CsvRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the result, config snapshot and summary as pretty JSON.
pub fn write_json<W: Write>(result: &ExperimentResult, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, result)?;
    out.write_all(b"\n")?;
    out.flush()
}

/// Writes `result` to `path` in the requested format.
pub fn write_results(result: &ExperimentResult, path: &Path, format: OutputFormat) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let out = BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_csv(result, out).map_err(|e| output_error(path, e)),
        OutputFormat::Json => write_json(result, out).map_err(|e| output_error(path, e)),
    }
}

/// Reads records back from a CSV file written by [`write_results`].
pub fn read_csv_records(path: &Path) -> Result<Vec<Record>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| output_error(path, e))?;
    rdr.deserialize::<CsvRow>()
        .map(|row| {
            let r = row.map_err(|e| output_error(path, e))?;
            Ok(Record {
                experiment: r.experiment,
                trial: r.trial,
                plant_count: r.plant_count,
                antennas: r.antennas,
                variant: r.variant,
                method: r.method,
                value: r.value,
                feasible: r.feasible,
                seed: r.seed,
                x: r.x,
                detail: None,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(trial: usize, method: &str, value: Option<f64>) -> Record {
        Record {
            experiment: "cdf".into(),
            trial: Some(trial),
            plant_count: 8,
            antennas: None,
            variant: "fece".into(),
            method: method.into(),
            value,
            feasible: value.is_some(),
            seed: 5,
            x: None,
            detail: None,
        }
    }

    fn result(records: Vec<Record>) -> ExperimentResult {
        ExperimentResult {
            experiment: "cdf".into(),
            config: SystemConfig::default(),
            summary: summarize(&records, true),
            records,
        }
    }

    #[test]
    fn cdf_is_sorted_and_ends_at_one() {
        let cdf = empirical_cdf(&[3.0, 1.0, f64::NAN, 2.0]);
        let v: Vec<f64> = cdf.iter().map(|p| p.value).collect();
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
        assert_eq!(cdf.last().unwrap().probability, 1.0);
        assert!(cdf.windows(2).all(|w| w[0].probability < w[1].probability));
        assert!(empirical_cdf(&[]).is_empty());
    }

    #[test]
    fn summary_counts_infeasible_separately() {
        let recs = vec![
            record(0, "optimized", Some(2.0)),
            record(0, "fpepla", Some(1.0)),
            record(1, "optimized", None),
            record(1, "fpepla", None),
            record(2, "optimized", Some(4.0)),
            record(2, "fpepla", Some(0.5)),
        ];
        let s = summarize(&recs, true);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].method, "optimized");
        assert_eq!((s[0].feasible, s[0].infeasible), (2, 1));
        assert_eq!(s[0].mean, Some(3.0));
        assert_eq!(s[0].cdf.len(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut recs = vec![record(0, "optimized", Some(0.1 + 0.2)), record(1, "fpepla", None)];
        recs[1].x = Some(1e-300);
        recs[1].antennas = Some(64);
        let res = result(recs.clone());
        write_results(&res, &path, OutputFormat::Csv).unwrap();
        assert_eq!(read_csv_records(&path).unwrap(), recs);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn empty_result_is_header_only() {
        let mut out = Vec::new();
        write_csv(&result(Vec::new()), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn json_contains_seed_snapshot() {
        let mut res = result(vec![record(0, "optimized", Some(1.0))]);
        res.config.seed = 1234567890123;
        let mut out = Vec::new();
        write_json(&res, &mut out).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["config"]["seed"], 1234567890123u64);
        let back: ExperimentResult = serde_json::from_slice(&out).unwrap();
        assert_eq!(back, res);
    }

    #[test]
    fn unwritable_path_reports_path() {
        let res = result(Vec::new());
        let err = write_results(&res, Path::new("/nonexistent/dir/out.csv"), OutputFormat::Csv).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
    }

    #[test]
    fn format_parsing() {
        assert_eq!("CSV".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert_eq!("json".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
        assert!("xml".parse::<OutputFormat>().is_err());
    }
}
