use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use rand::seq::index;
use rayon::prelude::*;

use super::config::{FeatureFamily, SweepConfig};
use super::data::Dataset;
use super::record::{AssignmentFile, Experiment, ExperimentRecord, Failure, Outcome, Timing};
use crate::clustering::{ClusterAssignment, SpectralDecomposition};
use crate::digest::Digest;
use crate::encoding::{build_feature_map, FeatureMapConfig, Scaler};
use crate::error::{Error, Result};
use crate::kernels::{gram_exact, gram_rbf, gram_sampled, KernelMatrix};
use crate::metrics::{ami, kernel_distance, silhouette};
use crate::seed;
use crate::sim::{circuit_stats, Circuit, CircuitStats};

/// Stream tag for the noise-comparison subset draw.
const NOISE_SUBSET_STREAM: u64 = 0x6e6f697365;

/// One (family, beta) configuration; `beta` is `None` for RBF.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    family: FeatureFamily,
    beta: Option<f64>,
}

impl Cell {
    fn all(config: &SweepConfig) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &family in &config.feature_families {
            match family {
                FeatureFamily::Rbf => cells.push(Cell { family, beta: None }),
                FeatureFamily::Quantum(_) => cells.extend(config.betas.iter().map(|&b| Cell {
                    family,
                    beta: Some(b),
                })),
            }
        }
        cells
    }

    fn feature_map(&self, config: &SweepConfig, n_qubits: usize) -> Option<FeatureMapConfig> {
        match (self.family, self.beta) {
            (FeatureFamily::Quantum(f), Some(beta)) => Some(
                FeatureMapConfig::new(f, n_qubits, beta)
                    .with_reps(config.reps)
                    .with_pair_phase(config.pair_phase),
            ),
            _ => None,
        }
    }

    fn run_id(&self, experiment: Experiment, k: usize, n: usize, seed: u64) -> String {
        ExperimentRecord::run_id(experiment, self.family, self.beta, k, n, seed)
    }
}

/// Full-data features with the scaler fitted once on them.
struct Prepared<'a> {
    data: &'a Dataset,
    scaler: Scaler,
}

impl<'a> Prepared<'a> {
    fn new(data: &'a Dataset) -> Result<Self> {
        if data.n_samples() < 2 {
            return Err(Error::param("at least two samples are required"));
        }
        Ok(Prepared {
            data,
            scaler: Scaler::fit(&data.features)?,
        })
    }

    /// Exact kernel on the rows in `rows` (all rows when `None`), plus the configuration digest.
    fn exact_kernel(
        &self,
        cell: &Cell,
        config: &SweepConfig,
        rows: Option<&[usize]>,
    ) -> Result<(KernelMatrix, Digest)> {
        let beta = cell.beta.unwrap_or(1.0);
        let scaled = self.scaler.transform(&self.data.features, beta)?;
        let scaled = match rows {
            Some(rows) => scaled.select_rows(rows),
            None => scaled,
        };
        let kernel = match cell.feature_map(config, self.data.n_features()) {
            Some(fm) => gram_exact(&fm, &scaled)?,
            None => gram_rbf(&scaled, &config.rbf)?,
        };
        let digest = Digest::of(&(kernel.digest(), self.scaler.digest()));
        Ok((kernel, digest))
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Clusters with the decomposition and scores the labels against `kernel`.
fn cluster_and_score(
    decomposition: &SpectralDecomposition,
    kernel: &KernelMatrix,
    config: &SweepConfig,
    k: usize,
) -> Result<(ClusterAssignment, f64)> {
    if k > kernel.n() {
        return Err(Error::param(format!("k = {k} exceeds N = {}", kernel.n())));
    }
    let assignment = decomposition.cluster(&config.spectral(k, config.base_seed))?;
    let distances = kernel_distance(kernel)?;
    let sc = silhouette(&distances, &assignment.partition())?.sc;
    Ok((assignment, sc))
}

/// Silhouette heatmap: every (family, beta, k) on the full data with exact kernels.
/// Clustering uses `base_seed`; failing cells go to the failure list and the sweep continues.
pub fn run_sc_sweep(data: &Dataset, config: &SweepConfig) -> Result<Outcome> {
    config.validate()?;
    let prepared = Prepared::new(data)?;
    let n = data.n_samples();
    let seed = config.base_seed;
    let outcomes: Vec<Outcome> = Cell::all(config)
        .par_iter()
        .map(|cell| {
            let mut out = Outcome::default();
            let start = Instant::now();
            let built = prepared
                .exact_kernel(cell, config, None)
                .map(|(kernel, digest)| {
                    let dec = SpectralDecomposition::compute(&kernel, config.laplacian);
                    (kernel, digest, dec)
                })
                .map_err(|e| e.to_string());
            let kernel_ms = elapsed_ms(start);
            for k in config.ks() {
                let run_id = cell.run_id(Experiment::Sweep, k, n, seed);
                let start = Instant::now();
                let result = built
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|(kernel, digest, dec)| {
                        let (_, sc) = cluster_and_score(dec, kernel, config, k).map_err(|e| e.to_string())?;
                        Ok(ExperimentRecord {
                            experiment: Experiment::Sweep,
                            run_id: run_id.clone(),
                            config_digest: *digest,
                            kernel_kind: kernel.kind(),
                            feature_map: cell.family,
                            beta: cell.beta,
                            k,
                            n_samples: n,
                            seed,
                            sc,
                            sc_ideal: None,
                            ami_vs_full: None,
                            ami_vs_ideal: None,
                            kernel_offdiag_mean: kernel.offdiag_mean(),
                            circuit_depth: None,
                            two_qubit_count: None,
                        })
                    });
                push(&mut out, run_id, result, kernel_ms + elapsed_ms(start));
            }
            out
        })
        .collect();
    Ok(collect(outcomes))
}

fn push(out: &mut Outcome, run_id: String, result: Result<ExperimentRecord, String>, ms: f64) {
    match result {
        Ok(r) => {
            out.timings.push(Timing {
                run_id,
                wall_time_ms: ms,
            });
            out.records.push(r);
        }
        Err(e) => {
            log::warn!("{run_id}: {e}");
            out.failures.push(Failure { run_id, message: e });
        }
    }
}

fn collect(outcomes: Vec<Outcome>) -> Outcome {
    let mut all = Outcome::default();
    for o in outcomes {
        all.merge(o);
    }
    all.finish()
}

/// Sorted uniform subset of `m` of `n` indices, without replacement.
pub fn draw_subset(n: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m > n {
        return Err(Error::param(format!("subset size {m} exceeds N = {n}")));
    }
    let mut idx = index::sample(&mut seed::rng(seed), n, m).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Full-data labels, reused from `cache_dir` when a matching file is present.
fn reference_labels(
    dec: &SpectralDecomposition,
    kernel: &KernelMatrix,
    digest: Digest,
    ids: &[String],
    config: &SweepConfig,
    k: usize,
    cache_dir: Option<&Path>,
) -> Result<(ClusterAssignment, f64)> {
    let stem = format!("labels_{digest}_k{k}_s{}", config.base_seed);
    if let Some(dir) = cache_dir {
        let path = dir.join(format!("{stem}.json"));
        if let Ok(text) = fs::read_to_string(&path) {
            match serde_json::from_str::<AssignmentFile>(&text) {
                Ok(f) if f.config_digest == digest && f.assignment.labels.len() == kernel.n() => {
                    let distances = kernel_distance(kernel)?;
                    let sc = silhouette(&distances, &f.assignment.partition())?.sc;
                    return Ok((f.assignment, sc));
                }
                _ => log::warn!("ignoring stale label cache {}", path.display()),
            }
        }
    }
    let (assignment, sc) = cluster_and_score(dec, kernel, config, k)?;
    if let Some(dir) = cache_dir {
        fs::create_dir_all(dir)?;
        let file = AssignmentFile {
            config_digest: digest,
            assignment,
        };
        let mut w = BufWriter::new(File::create(dir.join(format!("{stem}.json")))?);
        serde_json::to_writer_pretty(&mut w, &file)?;
        super::record::write_assignment_csv(
            ids,
            &file.assignment,
            BufWriter::new(File::create(dir.join(format!("{stem}.csv")))?),
        )?;
        return Ok((file.assignment, sc));
    }
    Ok((assignment, sc))
}

/// Coherence of subset clusterings with the full-data clustering.
///
/// Configurations whose full-data silhouette falls below `sc_threshold` are
/// skipped. Each replicate seed draws one subset per size; the subset kernel is
/// the full kernel restricted to it, so scaling is shared and the digest matches
/// the full-data record. Full-data labels are cached under `cache_dir` when given.
pub fn run_sample_complexity(
    data: &Dataset,
    config: &SweepConfig,
    cache_dir: Option<&Path>,
) -> Result<Outcome> {
    config.validate()?;
    let prepared = Prepared::new(data)?;
    let n = data.n_samples();
    let sizes: Vec<usize> = config.sample_sizes.iter().map(|s| s.resolve(n)).collect();
    if let Some(&m) = sizes.iter().find(|&&m| m > n || m < 2) {
        return Err(Error::param(format!("sample size {m} must lie in 2..={n}")));
    }
    let outcomes: Vec<Outcome> = Cell::all(config)
        .par_iter()
        .map(|cell| {
            let mut out = Outcome::default();
            let (kernel, digest) = match prepared.exact_kernel(cell, config, None) {
                Ok(v) => v,
                Err(e) => {
                    for k in config.ks() {
                        push(
                            &mut out,
                            cell.run_id(Experiment::SampleComplexity, k, n, config.base_seed),
                            Err(e.to_string()),
                            0.0,
                        );
                    }
                    return out;
                }
            };
            let dec = SpectralDecomposition::compute(&kernel, config.laplacian);
            let mut selected = Vec::new();
            for k in config.ks() {
                match reference_labels(&dec, &kernel, digest, &data.ids, config, k, cache_dir) {
                    Ok((labels, sc)) if sc >= config.sc_threshold => selected.push((k, labels.partition())),
                    Ok((_, sc)) => log::info!(
                        "{}: full-data SC {sc:.3} below threshold, skipped",
                        cell.run_id(Experiment::SampleComplexity, k, n, config.base_seed)
                    ),
                    Err(e) => push(
                        &mut out,
                        cell.run_id(Experiment::SampleComplexity, k, n, config.base_seed),
                        Err(e.to_string()),
                        0.0,
                    ),
                }
            }
            if selected.is_empty() {
                return out;
            }
            for &m in &sizes {
                for &rep in &config.seeds {
                    let start = Instant::now();
                    let subset = draw_subset(n, m, seed::derive(rep, &[m as u64]));
                    let sub = subset
                        .map(|idx| {
                            let sub_kernel = kernel.select(&idx);
                            let sub_dec = SpectralDecomposition::compute(&sub_kernel, config.laplacian);
                            (idx, sub_kernel, sub_dec)
                        })
                        .map_err(|e| e.to_string());
                    let decompose_ms = elapsed_ms(start);
                    for (k, full_labels) in &selected {
                        let run_id = cell.run_id(Experiment::SampleComplexity, *k, m, rep);
                        let start = Instant::now();
                        let result =
                            sub.as_ref()
                                .map_err(Clone::clone)
                                .and_then(|(idx, sub_kernel, sub_dec)| {
                                    let (assignment, sc) = cluster_and_score(sub_dec, sub_kernel, config, *k)
                                        .map_err(|e| e.to_string())?;
                                    let coherence = ami(&assignment.partition(), &full_labels.select(idx))
                                        .map_err(|e| e.to_string())?;
                                    Ok(ExperimentRecord {
                                        experiment: Experiment::SampleComplexity,
                                        run_id: run_id.clone(),
                                        config_digest: digest,
                                        kernel_kind: kernel.kind(),
                                        feature_map: cell.family,
                                        beta: cell.beta,
                                        k: *k,
                                        n_samples: m,
                                        seed: rep,
                                        sc,
                                        sc_ideal: None,
                                        ami_vs_full: Some(coherence),
                                        ami_vs_ideal: None,
                                        kernel_offdiag_mean: sub_kernel.offdiag_mean(),
                                        circuit_depth: None,
                                        two_qubit_count: None,
                                    })
                                });
                        push(&mut out, run_id, result, decompose_ms + elapsed_ms(start));
                    }
                }
            }
            out
        })
        .collect();
    Ok(collect(outcomes))
}

/// Gate statistics of the compute-uncompute circuit `U†(x_0) U(x_1)`; they do
/// not depend on the data values.
fn overlap_stats(fm: &FeatureMapConfig) -> Result<CircuitStats> {
    let zero = vec![0.0; fm.n_qubits];
    let u = build_feature_map(fm, &zero)?;
    Ok(circuit_stats(&Circuit::overlap(&u, &u)?))
}

/// Noisy shot-sampled kernels against exact kernels on one shared subset.
///
/// The subset of `noise_subset_size` samples is drawn once from `base_seed`.
/// For each quantum (family, beta) and replicate seed the sampled kernel is
/// clustered and compared with the exact clustering; RBF is skipped.
pub fn run_noise_comparison(data: &Dataset, config: &SweepConfig) -> Result<Outcome> {
    config.validate()?;
    let noise = config
        .noise
        .ok_or_else(|| Error::param("noise comparison needs a noise configuration"))?;
    let prepared = Prepared::new(data)?;
    let n = data.n_samples();
    let m = config.noise_subset_size.min(n);
    let subset = draw_subset(n, m, seed::derive(config.base_seed, &[NOISE_SUBSET_STREAM]))?;
    let cells: Vec<Cell> = Cell::all(config)
        .into_iter()
        .filter(|c| {
            let quantum = c.family != FeatureFamily::Rbf;
            if !quantum {
                log::info!("noise comparison skips the classical RBF baseline");
            }
            quantum
        })
        .collect();
    let jobs: Vec<(Cell, u64)> = cells
        .iter()
        .flat_map(|&c| config.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .map(|&(cell, rep)| {
            let mut out = Outcome::default();
            let start = Instant::now();
            let built = (|| {
                let fm = cell.feature_map(config, data.n_features()).expect("quantum cell");
                let (exact, digest) = prepared.exact_kernel(&cell, config, Some(&subset))?;
                let scaled = prepared
                    .scaler
                    .transform(&data.features, fm.beta)?
                    .select_rows(&subset);
                let shot_seed = seed::derive(config.base_seed, &[rep]);
                let noisy = gram_sampled(&fm, &scaled, &noise, shot_seed)?;
                let stats = overlap_stats(&fm)?;
                let digest = Digest::of(&(digest, noise, &subset));
                let exact_dec = SpectralDecomposition::compute(&exact, config.laplacian);
                let noisy_dec = SpectralDecomposition::compute(&noisy, config.laplacian);
                Ok::<_, Error>((exact, noisy, exact_dec, noisy_dec, stats, digest))
            })()
            .map_err(|e| e.to_string());
            let kernel_ms = elapsed_ms(start);
            for k in config.ks() {
                let run_id = cell.run_id(Experiment::NoiseCompare, k, m, rep);
                let start = Instant::now();
                let result = built.as_ref().map_err(Clone::clone).and_then(
                    |(exact, noisy, exact_dec, noisy_dec, stats, digest)| {
                        let score = || -> Result<_> {
                            let (ideal, sc_ideal) = cluster_and_score(exact_dec, exact, config, k)?;
                            let (noisy_labels, sc) = cluster_and_score(noisy_dec, noisy, config, k)?;
                            Ok((sc_ideal, sc, ami(&noisy_labels.partition(), &ideal.partition())?))
                        };
                        let (sc_ideal, sc, coherence) = score().map_err(|e| e.to_string())?;
                        Ok(ExperimentRecord {
                            experiment: Experiment::NoiseCompare,
                            run_id: run_id.clone(),
                            config_digest: *digest,
                            kernel_kind: noisy.kind(),
                            feature_map: cell.family,
                            beta: cell.beta,
                            k,
                            n_samples: m,
                            seed: rep,
                            sc,
                            sc_ideal: Some(sc_ideal),
                            ami_vs_full: None,
                            ami_vs_ideal: Some(coherence),
                            kernel_offdiag_mean: noisy.offdiag_mean(),
                            circuit_depth: Some(stats.depth),
                            two_qubit_count: Some(stats.two_qubit_count),
                        })
                    },
                );
                push(&mut out, run_id, result, kernel_ms + elapsed_ms(start));
            }
            out
        })
        .collect();
    Ok(collect(outcomes))
}
