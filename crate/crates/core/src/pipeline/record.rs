use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::FeatureFamily;
use crate::clustering::ClusterAssignment;
use crate::digest::Digest;
use crate::error::{Error, Result};
use crate::kernels::KernelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Sweep,
    SampleComplexity,
    NoiseCompare,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Sweep => "sweep",
            Experiment::SampleComplexity => "sample-complexity",
            Experiment::NoiseCompare => "noise-compare",
        }
    }
}

/// One evaluated cell of an experiment, with everything needed to reproduce it.
/// The field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: Experiment,
    pub run_id: String,
    /// Kernel configuration plus the feature scaler; shared by every subset of one configuration.
    pub config_digest: Digest,
    pub kernel_kind: KernelKind,
    pub feature_map: FeatureFamily,
    /// `None` for the RBF baseline.
    pub beta: Option<f64>,
    pub k: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub sc: f64,
    /// Silhouette of the noiseless clustering (noise comparison only).
    pub sc_ideal: Option<f64>,
    pub ami_vs_full: Option<f64>,
    pub ami_vs_ideal: Option<f64>,
    pub kernel_offdiag_mean: f64,
    /// Logical depth of `U†U`.
    pub circuit_depth: Option<usize>,
    pub two_qubit_count: Option<usize>,
}

impl ExperimentRecord {
    pub(crate) fn run_id(
        experiment: Experiment,
        family: FeatureFamily,
        beta: Option<f64>,
        k: usize,
        n: usize,
        seed: u64,
    ) -> String {
        let beta = beta.map_or_else(|| "na".to_string(), |b| format!("{b:.6}"));
        format!("{}/{family}/b{beta}/k{k}/n{n}/s{seed}", experiment.as_str())
    }

    /// Canonical output order: experiment, family, beta, k, subset size, seed.
    pub fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        let beta = |r: &Self| r.beta.unwrap_or(f64::NEG_INFINITY);
        self.experiment
            .cmp(&other.experiment)
            .then(self.feature_map.cmp(&other.feature_map))
            .then(beta(self).total_cmp(&beta(other)))
            .then(self.k.cmp(&other.k))
            .then(self.n_samples.cmp(&other.n_samples))
            .then(self.seed.cmp(&other.seed))
    }
}

/// A cell that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub run_id: String,
    pub message: String,
}

/// Wall time of one cell; kept apart from the records so those stay reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub run_id: String,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub records: Vec<ExperimentRecord>,
    pub failures: Vec<Failure>,
    pub timings: Vec<Timing>,
}

impl Outcome {
    pub(crate) fn merge(&mut self, other: Outcome) {
        self.records.extend(other.records);
        self.failures.extend(other.failures);
        self.timings.extend(other.timings);
    }

    pub(crate) fn finish(mut self) -> Self {
        self.records.sort_by(|a, b| a.canonical_cmp(b));
        self.failures.sort_by(|a, b| a.run_id.cmp(&b.run_id));
        self.timings.sort_by(|a, b| a.run_id.cmp(&b.run_id));
        self
    }
}

pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
}

/// Pivot of one metric: rows are cluster counts, columns the betas present.
/// Cells average every matching record.
#[derive(Debug, Clone, PartialEq)]
pub struct Pivot {
    pub family: FeatureFamily,
    pub metric: &'static str,
    pub ks: Vec<usize>,
    pub betas: Vec<Option<f64>>,
    /// `cells[row][col]`, `None` where no record exists.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl Pivot {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["k".to_string()];
        header.extend(self.betas.iter().map(|b| match b {
            Some(b) => format!("beta={b}"),
            None => "beta=na".to_string(),
        }));
        w.write_record(&header)?;
        for (k, row) in self.ks.iter().zip(&self.cells) {
            let mut line = vec![k.to_string()];
            line.extend(row.iter().map(|c| c.map_or_else(String::new, |v| v.to_string())));
            w.write_record(&line)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn pivot_metric(r: &ExperimentRecord) -> (&'static str, Option<f64>) {
    match r.experiment {
        Experiment::Sweep => ("sc", Some(r.sc)),
        Experiment::SampleComplexity => ("ami_vs_full", r.ami_vs_full),
        Experiment::NoiseCompare => ("ami_vs_ideal", r.ami_vs_ideal),
    }
}

/// One pivot per feature family, in canonical family order.
pub fn pivots(records: &[ExperimentRecord]) -> Vec<Pivot> {
    let mut groups: BTreeMap<FeatureFamily, Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.feature_map).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(family, rs)| {
            let mut ks: Vec<usize> = rs.iter().map(|r| r.k).collect();
            ks.sort_unstable();
            ks.dedup();
            let mut betas: Vec<Option<f64>> = rs.iter().map(|r| r.beta).collect();
            betas.sort_by(|a, b| {
                a.unwrap_or(f64::NEG_INFINITY)
                    .total_cmp(&b.unwrap_or(f64::NEG_INFINITY))
            });
            betas.dedup();
            let metric = pivot_metric(rs[0]).0;
            let cells = ks
                .iter()
                .map(|&k| {
                    betas
                        .iter()
                        .map(|&b| {
                            let vals: Vec<f64> = rs
                                .iter()
                                .filter(|r| r.k == k && r.beta == b)
                                .filter_map(|r| pivot_metric(r).1)
                                .collect();
                            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
                        })
                        .collect()
                })
                .collect();
            Pivot {
                family,
                metric,
                ks,
                betas,
                cells,
            }
        })
        .collect()
}

/// Writes `records.csv`, `records.json` and `pivot_<family>.csv` into `dir`.
pub fn emit_results(records: &[ExperimentRecord], dir: impl AsRef<Path>) -> Result<()> {
    if records.is_empty() {
        return Err(Error::param("no records to emit"));
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_records_csv(records, BufWriter::new(File::create(dir.join("records.csv"))?))?;
    let mut json = BufWriter::new(File::create(dir.join("records.json"))?);
    serde_json::to_writer_pretty(&mut json, records)?;
    json.write_all(b"\n")?;
    json.flush()?;
    for p in pivots(records) {
        p.write_csv(BufWriter::new(File::create(
            dir.join(format!("pivot_{}.csv", p.family)),
        )?))?;
    }
    Ok(())
}

/// Writes `failures.log` (one `run_id: message` line each; empty when all cells succeeded)
/// and `timings.csv`.
pub fn emit_diagnostics(outcome: &Outcome, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut log = BufWriter::new(File::create(dir.join("failures.log"))?);
    for f in &outcome.failures {
        writeln!(log, "{}: {}", f.run_id, f.message)?;
    }
    log.flush()?;
    let mut w = csv::Writer::from_path(dir.join("timings.csv"))?;
    for t in &outcome.timings {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}

/// Labels written as `sample_id,label`.
pub fn write_assignment_csv<W: Write>(ids: &[String], assignment: &ClusterAssignment, out: W) -> Result<()> {
    if ids.len() != assignment.labels.len() {
        return Err(Error::DimensionMismatch {
            expected: ids.len(),
            actual: assignment.labels.len(),
        });
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_id", "label"])?;
    for (id, label) in ids.iter().zip(&assignment.labels) {
        w.write_record([id.as_str(), &label.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// JSON form of an assignment, tagged with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentFile {
    pub config_digest: Digest,
    pub assignment: ClusterAssignment,
}
