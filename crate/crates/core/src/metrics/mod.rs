//! Clustering validation: silhouette on kernel-induced distances, and
//! adjusted mutual information with the exact permutation-model expectation.
//!
//! All logarithms are natural.

mod information;
mod silhouette;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;

pub use information::{ami, contingency, entropy, expected_mi, mutual_information, Agreement};
pub use silhouette::{silhouette, Silhouette};

/// Cluster labels canonicalized to `0..n_clusters` in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    n_clusters: usize,
}

impl Partition {
    pub fn new(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Partition {
            labels,
            n_clusters: map.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Restriction to the given samples.
    pub fn select(&self, indices: &[usize]) -> Partition {
        Partition::new(&indices.iter().map(|&i| self.labels[i]).collect::<Vec<_>>())
    }
}

/// Symmetric, zero-diagonal, non-negative distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    entries: DMatrix<f64>,
}

impl DistanceMatrix {
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::param("distance matrix must be square"));
        }
        let n = entries.nrows();
        for i in 0..n {
            if entries[(i, i)] != 0.0 {
                return Err(Error::param(format!("non-zero self distance at {i}")));
            }
            for j in i + 1..n {
                let d = entries[(i, j)];
                if !(d >= 0.0 && d.is_finite()) || d != entries[(j, i)] {
                    return Err(Error::param(format!("invalid distance at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { entries })
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
}

/// Feature-space distance `d(i, j) = √(2 − 2·K[i][j])` for a unit-diagonal kernel.
pub fn kernel_distance(k: &KernelMatrix) -> Result<DistanceMatrix> {
    let n = k.n();
    if let Some((i, j)) = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| k.get(i, j) > 1.0 + 1e-9)
    {
        return Err(Error::InvalidKernel(format!(
            "entry ({i}, {j}) = {} exceeds 1",
            k.get(i, j)
        )));
    }
    let entries = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (2.0 - 2.0 * k.get(i, j)).max(0.0).sqrt()
        }
    });
    Ok(DistanceMatrix { entries })
}

/// Silhouette and, when a reference partition is available, agreement with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sc: f64,
    pub per_point_s: Vec<f64>,
    pub ami: Option<f64>,
    pub entropy_u: f64,
    pub entropy_v: f64,
    pub mi: f64,
}

impl MetricsReport {
    /// Scores `labels` against `distances`, and against `reference` if given.
    pub fn evaluate(
        distances: &DistanceMatrix,
        labels: &Partition,
        reference: Option<&Partition>,
    ) -> Result<Self> {
        let sil = silhouette(distances, labels)?;
        let (ami, entropy_u, entropy_v, mi) = match reference {
            Some(r) => {
                let a = Agreement::compute(labels, r)?;
                (Some(a.ami), a.entropy_u, a.entropy_v, a.mi)
            }
            None => (None, entropy(labels), 0.0, 0.0),
        };
        Ok(MetricsReport {
            sc: sil.sc,
            per_point_s: sil.per_point,
            ami,
            entropy_u,
            entropy_v,
            mi,
        })
    }
}
