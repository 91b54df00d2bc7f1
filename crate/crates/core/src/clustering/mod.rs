//! Spectral clustering with a kernel matrix as the affinity.
//!
//! The affinity is the kernel with its diagonal zeroed and negative entries
//! clamped to 0. The embedding is the `k` eigenvectors of the `k` smallest
//! Laplacian eigenvalues, row-normalized, and k-means on those rows gives the
//! labels.
//!
//! The full eigendecomposition is kept in [`SpectralDecomposition`] so a sweep
//! over cluster counts pays for it once.

mod kmeans;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;

pub use kmeans::{kmeans, ClusterAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Laplacian {
    /// `I − D^{-1/2} A D^{-1/2}`
    #[default]
    SymmetricNormalized,
    /// `D − A`
    Unnormalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub k: usize,
    pub laplacian: Laplacian,
    pub kmeans_restarts: usize,
    pub kmeans_max_iter: usize,
    pub seed: u64,
    /// Maximum eigenpair residual `‖Lv − λv‖`.
    pub eig_tolerance: f64,
}

impl SpectralConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        SpectralConfig {
            k,
            laplacian: Laplacian::SymmetricNormalized,
            kmeans_restarts: 16,
            kmeans_max_iter: 300,
            seed,
            eig_tolerance: 1e-8,
        }
    }
}

/// Spectral embedding of the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// `N × k`, unit-length rows (zero rows stay zero).
    pub points: DMatrix<f64>,
    /// The `k` smallest Laplacian eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Samples with zero affinity to every other sample.
    pub isolated: Vec<usize>,
}

/// Sorted eigendecomposition of a kernel's graph Laplacian.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    laplacian: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    /// Column `c` pairs with `eigenvalues[c]`.
    eigenvectors: DMatrix<f64>,
    isolated: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn compute(k: &KernelMatrix, kind: Laplacian) -> Self {
        let n = k.n();
        let affinity = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { k.get(i, j).max(0.0) });
        let degree: Vec<f64> = affinity.row_iter().map(|r| r.sum()).collect();
        let isolated: Vec<usize> = (0..n).filter(|&i| degree[i] <= 0.0).collect();
        for &i in &isolated {
            log::debug!("sample {i} has zero affinity to all others");
        }
        let laplacian = match kind {
            Laplacian::SymmetricNormalized => {
                let inv_sqrt: Vec<f64> = degree
                    .iter()
                    .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
                    .collect();
                DMatrix::from_fn(n, n, |i, j| {
                    let m = inv_sqrt[i] * affinity[(i, j)] * inv_sqrt[j];
                    if i == j {
                        1.0 - m
                    } else {
                        -m
                    }
                })
            }
            Laplacian::Unnormalized => DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    degree[i] - affinity[(i, j)]
                } else {
                    -affinity[(i, j)]
                }
            }),
        };
        let eig = SymmetricEigen::new(laplacian.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        let eigenvalues = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(src).clone_owned();
            // Fix the sign: the largest-magnitude component is positive.
            let pivot = v.iamax();
            if v[pivot] < 0.0 {
                v.neg_mut();
            }
            eigenvectors.set_column(dst, &v);
        }
        SpectralDecomposition {
            laplacian,
            eigenvalues,
            eigenvectors,
            isolated,
        }
    }

    pub fn n(&self) -> usize {
        self.laplacian.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn isolated(&self) -> &[usize] {
        &self.isolated
    }

    /// Row-normalized embedding on the `k` lowest eigenvectors, after checking
    /// each eigenpair's residual against `tolerance`.
    pub fn embedding(&self, k: usize, tolerance: f64) -> Result<Embedding> {
        let n = self.n();
        if k == 0 || k > n {
            return Err(Error::param(format!("k = {k} must lie in 1..={n}")));
        }
        for c in 0..k {
            let v: DVector<f64> = self.eigenvectors.column(c).clone_owned();
            let residual = (&self.laplacian * &v - &v * self.eigenvalues[c]).norm();
            if residual > tolerance {
                return Err(Error::EigenResidual { residual, tolerance });
            }
        }
        let mut points = self.eigenvectors.columns(0, k).clone_owned();
        for mut row in points.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
        }
        Ok(Embedding {
            points,
            eigenvalues: self.eigenvalues[..k].to_vec(),
            isolated: self.isolated.clone(),
        })
    }

    /// k-means on the `config.k`-dimensional embedding.
    pub fn cluster(&self, config: &SpectralConfig) -> Result<ClusterAssignment> {
        if config.k < 2 {
            return Err(Error::param(format!(
                "spectral clustering needs k >= 2, got {}",
                config.k
            )));
        }
        let embedding = self.embedding(config.k, config.eig_tolerance)?;
        kmeans(
            &embedding.points,
            config.k,
            config.kmeans_restarts,
            config.kmeans_max_iter,
            config.seed,
        )
    }
}

pub fn laplacian_embed(k: &KernelMatrix, config: &SpectralConfig) -> Result<Embedding> {
    if config.k > k.n() {
        return Err(Error::param(format!("k = {} exceeds N = {}", config.k, k.n())));
    }
    SpectralDecomposition::compute(k, config.laplacian).embedding(config.k, config.eig_tolerance)
}

pub fn spectral_cluster(k: &KernelMatrix, config: &SpectralConfig) -> Result<ClusterAssignment> {
    if config.k > k.n() {
        return Err(Error::param(format!("k = {} exceeds N = {}", config.k, k.n())));
    }
    SpectralDecomposition::compute(k, config.laplacian).cluster(config)
}
