//! Gram matrices: exact fidelity kernels, shot-sampled (optionally noisy)
//! fidelity kernels, and the Gaussian RBF baseline.
//!
//! Only the upper triangle is evaluated; it is mirrored, so every kernel is
//! exactly symmetric. Per-pair work is independent and seeded per pair, so the
//! parallel result equals the sequential one bit for bit.

mod io;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digest::Digest;
use crate::encoding::{build_feature_map, FeatureMapConfig, FeatureMatrix};
use crate::error::{Error, Result};
use crate::seed;
use crate::sim::{overlap_sqr, sample_fidelity, Circuit, NoiseConfig};

pub use io::{read_binary, read_csv, write_binary, write_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KernelKind {
    QuantumExact,
    QuantumSampled,
    Rbf,
}

impl KernelKind {
    pub fn code(&self) -> u64 {
        match self {
            KernelKind::QuantumExact => 0,
            KernelKind::QuantumSampled => 1,
            KernelKind::Rbf => 2,
        }
    }

    pub fn from_code(code: u64) -> Option<Self> {
        match code {
            0 => Some(KernelKind::QuantumExact),
            1 => Some(KernelKind::QuantumSampled),
            2 => Some(KernelKind::Rbf),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            KernelKind::QuantumExact => "QuantumExact",
            KernelKind::QuantumSampled => "QuantumSampled",
            KernelKind::Rbf => "RBF",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            KernelKind::QuantumExact,
            KernelKind::QuantumSampled,
            KernelKind::Rbf,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| Error::param(format!("unknown kernel kind {s:?}")))
    }
}

/// Symmetric `N × N` Gram matrix tagged with how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    entries: DMatrix<f64>,
    kind: KernelKind,
    digest: Digest,
}

impl KernelMatrix {
    /// Wraps a square, symmetric, finite matrix.
    pub fn from_entries(entries: DMatrix<f64>, kind: KernelKind, digest: Digest) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidKernel(format!(
                "{} x {} matrix is not square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidKernel("non-finite entry".into()));
        }
        let n = entries.nrows();
        for i in 0..n {
            for j in i + 1..n {
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(Error::InvalidKernel(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(KernelMatrix {
            entries,
            kind,
            digest,
        })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn digest(&self) -> Digest {
        self.digest
    }

    /// Restriction to the given samples, in the given order.
    pub fn select(&self, indices: &[usize]) -> KernelMatrix {
        let m = indices.len();
        KernelMatrix {
            entries: DMatrix::from_fn(m, m, |a, b| self.entries[(indices[a], indices[b])]),
            kind: self.kind,
            digest: self.digest,
        }
    }

    /// Mean of the strictly off-diagonal entries; 1 for a single sample.
    pub fn offdiag_mean(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 1.0;
        }
        let mut sum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                sum += self.entries[(i, j)];
            }
        }
        sum / (n * (n - 1) / 2) as f64
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DistanceExponent {
    /// `‖x − y‖²`, the usual Gaussian kernel.
    #[default]
    Squared,
    /// `‖x − y‖`, the Laplacian-like variant.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbfConfig {
    pub sigma: f64,
    pub distance: DistanceExponent,
}

impl Default for RbfConfig {
    fn default() -> Self {
        RbfConfig {
            sigma: 1.0,
            distance: DistanceExponent::Squared,
        }
    }
}

/// Fills an upper triangle in parallel, row by row, and mirrors it.
fn assemble<F>(n: usize, diag: f64, pair: F) -> Result<DMatrix<f64>>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| pair(i, j)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut k = DMatrix::from_element(n, n, diag);
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, v) in row.into_iter().enumerate() {
            let j = i + 1 + offset;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

fn feature_circuits(config: &FeatureMapConfig, x: &FeatureMatrix) -> Result<Vec<Circuit>> {
    config.validate()?;
    if x.ncols() != config.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: config.n_qubits,
            actual: x.ncols(),
        });
    }
    (0..x.nrows())
        .into_par_iter()
        .map(|i| {
            let row: Vec<f64> = x.row(i).iter().copied().collect();
            build_feature_map(config, &row)
        })
        .collect()
}

/// `K[i][j] = |⟨φ(x_i)|φ(x_j)⟩|²` from exact statevectors.
pub fn gram_exact(config: &FeatureMapConfig, x: &FeatureMatrix) -> Result<KernelMatrix> {
    let states: Vec<_> = feature_circuits(config, x)?.par_iter().map(|c| c.run()).collect();
    let entries = assemble(states.len(), 1.0, |i, j| {
        Ok(overlap_sqr(states[i].amplitudes(), states[j].amplitudes()))
    })?;
    let digest = Digest::of(&(KernelKind::QuantumExact, config));
    KernelMatrix::from_entries(entries, KernelKind::QuantumExact, digest)
}

/// Shot-sampled kernel: each pair estimates the all-zeros frequency of
/// `U†(x_i) U(x_j)` with a seed derived from `(seed, i, j)`. Diagonal forced to 1.
pub fn gram_sampled(
    config: &FeatureMapConfig,
    x: &FeatureMatrix,
    noise: &NoiseConfig,
    seed: u64,
) -> Result<KernelMatrix> {
    noise.validate()?;
    let circuits = feature_circuits(config, x)?;
    let entries = assemble(circuits.len(), 1.0, |i, j| {
        let overlap = Circuit::overlap(&circuits[i], &circuits[j])?;
        sample_fidelity(&overlap, noise, seed::derive(seed, &[i as u64, j as u64]))
    })?;
    let digest = Digest::of(&(KernelKind::QuantumSampled, config, noise, seed));
    KernelMatrix::from_entries(entries, KernelKind::QuantumSampled, digest)
}

/// `K[i][j] = exp(−D / (2σ²))` with `D` the (squared) Euclidean distance.
pub fn gram_rbf(x: &FeatureMatrix, config: &RbfConfig) -> Result<KernelMatrix> {
    if !(config.sigma > 0.0 && config.sigma.is_finite()) {
        return Err(Error::param(format!("sigma = {} must be positive", config.sigma)));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("RBF input".into()));
    }
    let denom = 2.0 * config.sigma * config.sigma;
    let entries = assemble(x.nrows(), 1.0, |i, j| {
        let sq: f64 = x
            .row(i)
            .iter()
            .zip(x.row(j).iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let d = match config.distance {
            DistanceExponent::Squared => sq,
            DistanceExponent::Linear => sq.sqrt(),
        };
        Ok((-d / denom).exp())
    })?;
    let digest = Digest::of(&(KernelKind::Rbf, config));
    KernelMatrix::from_entries(entries, KernelKind::Rbf, digest)
}
