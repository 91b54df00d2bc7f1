use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DistanceMatrix, Partition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Silhouette {
    /// Mean of `per_point`.
    pub sc: f64,
    pub per_point: Vec<f64>,
}

/// Silhouette coefficient on a precomputed distance matrix.
///
/// `a(i)` is the mean distance to the other members of `i`'s cluster, `b(i)` the
/// smallest mean distance to another cluster, `s(i) = (b − a) / max(a, b)`.
/// Members of singleton clusters score 0.
pub fn silhouette(d: &DistanceMatrix, p: &Partition) -> Result<Silhouette> {
    let n = d.n();
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: p.len(),
        });
    }
    let k = p.n_clusters();
    if k < 2 {
        return Err(Error::param("silhouette needs at least two clusters"));
    }
    let sizes = p.sizes();
    let labels = p.labels();
    let per_point: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = labels[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..n {
                if j != i {
                    sums[labels[j]] += d.get(i, j);
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect();
    let sc = per_point.iter().sum::<f64>() / n as f64;
    Ok(Silhouette { sc, per_point })
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;
    use rand::Rng;

    use super::*;

    /// Direct transcription of the per-point definition, one cluster scan per point.
    fn brute(d: &DMatrix<f64>, labels: &[usize]) -> Vec<f64> {
        let n = labels.len();
        let clusters: std::collections::BTreeSet<usize> = labels.iter().copied().collect();
        (0..n)
            .map(|i| {
                let mates: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
                if mates.is_empty() {
                    return 0.0;
                }
                let a = mates.iter().map(|&j| d[(i, j)]).sum::<f64>() / mates.len() as f64;
                let b = clusters
                    .iter()
                    .filter(|&&c| c != labels[i])
                    .map(|&c| {
                        let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
                        members.iter().map(|&j| d[(i, j)]).sum::<f64>() / members.len() as f64
                    })
                    .fold(f64::INFINITY, f64::min);
                (b - a) / a.max(b)
            })
            .collect()
    }

    fn random_distances(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = crate::seed::rng(seed);
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.random_range(0.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn duplicated_pairs_score_one() {
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0,
            ],
        );
        let s = silhouette(
            &DistanceMatrix::from_entries(m).unwrap(),
            &Partition::new(&[0, 0, 1, 1]),
        )
        .unwrap();
        assert_eq!(s.per_point, vec![1.0; 4]);
        assert_eq!(s.sc, 1.0);
    }

    #[test]
    fn four_point_hand_values() {
        // points on a line at 0, 1, 3, 6; clusters {0, 1} and {3, 6}
        let pos = [0.0f64, 1.0, 3.0, 6.0];
        let m = DMatrix::from_fn(4, 4, |i, j| (pos[i] - pos[j]).abs());
        let s = silhouette(
            &DistanceMatrix::from_entries(m).unwrap(),
            &Partition::new(&[0, 0, 1, 1]),
        )
        .unwrap();
        // a = 1, b = (3 + 6) / 2
        assert_eq!(s.per_point[0], (4.5 - 1.0) / 4.5);
        // a = 1, b = (2 + 5) / 2
        assert_eq!(s.per_point[1], (3.5 - 1.0) / 3.5);
        // a = 3, b = (3 + 2) / 2
        assert_eq!(s.per_point[2], (2.5 - 3.0) / 3.0);
        // a = 3, b = (6 + 5) / 2
        assert_eq!(s.per_point[3], (5.5 - 3.0) / 5.5);
    }

    #[test]
    fn matches_brute_force_with_singletons() {
        let m = random_distances(10, 1);
        let labels = [0, 1, 2, 0, 1, 1, 3, 0, 2, 1];
        let s = silhouette(
            &DistanceMatrix::from_entries(m.clone()).unwrap(),
            &Partition::new(&labels),
        )
        .unwrap();
        assert_eq!(s.per_point, brute(&m, &labels));
        assert_eq!(s.per_point[6], 0.0);
    }

    #[test]
    fn random_labels_near_zero() {
        let n = 200;
        let m = random_distances(n, 2);
        let mut rng = crate::seed::rng(3);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let s = silhouette(
            &DistanceMatrix::from_entries(m).unwrap(),
            &Partition::new(&labels),
        )
        .unwrap();
        assert!(s.sc.abs() <= 0.1, "sc = {}", s.sc);
    }

    #[test]
    fn single_cluster_is_an_error() {
        let m = random_distances(5, 4);
        assert!(silhouette(
            &DistanceMatrix::from_entries(m).unwrap(),
            &Partition::new(&[1; 5])
        )
        .is_err());
    }
}
