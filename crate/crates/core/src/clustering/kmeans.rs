use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Partition;
use crate::seed;

/// Labels for a requested cluster count plus the k-means objective that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
    /// Sum of squared distances to the assigned centroids.
    pub inertia: f64,
    pub seed: u64,
    /// Whether an empty cluster had to be reseeded in the winning run.
    pub repaired_empty: bool,
}

impl ClusterAssignment {
    pub fn partition(&self) -> Partition {
        Partition::new(&self.labels)
    }
}

/// Best of `restarts` k-means++ / Lloyd runs on the rows of `points`.
///
/// Restart `r` draws from a stream derived from `(seed, r)`; ties in inertia
/// go to the lowest restart index, so the result is independent of threading.
pub fn kmeans(
    points: &DMatrix<f64>,
    k: usize,
    restarts: usize,
    max_iter: usize,
    seed: u64,
) -> Result<ClusterAssignment> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::param(format!("k = {k} must lie in 1..={n}")));
    }
    if restarts == 0 || max_iter == 0 {
        return Err(Error::param("restarts and max_iter must be positive"));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("k-means input".into()));
    }
    let rows: Vec<Vec<f64>> = points.row_iter().map(|r| r.iter().copied().collect()).collect();
    let runs: Vec<Run> = (0..restarts)
        .into_par_iter()
        .map(|r| lloyd(&rows, k, max_iter, &mut seed::rng_for(seed, &[r as u64])))
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.inertia < best.inertia { run } else { best })
        .expect("at least one restart");
    Ok(ClusterAssignment {
        labels: best.labels,
        k,
        inertia: best.inertia,
        seed,
        repaired_empty: best.repaired,
    })
}

struct Run {
    labels: Vec<usize>,
    inertia: f64,
    repaired: bool,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid, lowest index on ties.
fn nearest(x: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(x, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centers = vec![rows[rng.random_range(0..n)].clone()];
    let mut weight: Vec<f64> = rows.iter().map(|x| sq_dist(x, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = weight.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            weight
                .iter()
                .position(|&w| {
                    acc += w;
                    acc > target
                })
                .unwrap_or_else(|| weight.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            rng.random_range(0..n)
        };
        let c = rows[pick].clone();
        for (w, x) in weight.iter_mut().zip(rows) {
            *w = w.min(sq_dist(x, &c));
        }
        centers.push(c);
    }
    centers
}

fn lloyd(rows: &[Vec<f64>], k: usize, max_iter: usize, rng: &mut ChaCha8Rng) -> Run {
    let dim = rows[0].len();
    let mut centers = plus_plus(rows, k, rng);
    let mut labels: Vec<usize> = rows.iter().map(|x| nearest(x, &centers).0).collect();
    let mut repaired = false;
    for _ in 0..max_iter {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (x, &l) in rows.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(x) {
                *s += v;
            }
        }
        let mut reseeded = false;
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empty.is_empty() {
            // Move each empty centroid onto the point farthest from its own centroid.
            let mut spread: Vec<f64> = rows
                .iter()
                .zip(&labels)
                .map(|(x, &l)| sq_dist(x, &centers[l]))
                .collect();
            for c in empty {
                let far = (0..rows.len()).fold(0, |best, i| if spread[i] > spread[best] { i } else { best });
                centers[c] = rows[far].clone();
                spread[far] = f64::NEG_INFINITY;
            }
            reseeded = true;
            repaired = true;
        }
        let next: Vec<usize> = rows.iter().map(|x| nearest(x, &centers).0).collect();
        let converged = next == labels && !reseeded;
        labels = next;
        if converged {
            break;
        }
    }
    let inertia = rows
        .iter()
        .zip(&labels)
        .map(|(x, &l)| sq_dist(x, &centers[l]))
        .sum();
    Run {
        labels,
        inertia,
        repaired,
    }
}
