use serde::{Deserialize, Serialize};

use super::Partition;
use crate::error::{Error, Result};

/// `table[i][j] = |U_i ∩ V_j|`.
pub fn contingency(u: &Partition, v: &Partition) -> Result<Vec<Vec<usize>>> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let mut table = vec![vec![0; v.n_clusters()]; u.n_clusters()];
    for (&a, &b) in u.labels().iter().zip(v.labels()) {
        table[a][b] += 1;
    }
    Ok(table)
}

/// Shannon entropy of the cluster-size distribution, in nats.
pub fn entropy(p: &Partition) -> f64 {
    let n = p.len() as f64;
    -p.sizes()
        .into_iter()
        .filter(|&s| s > 0)
        .map(|s| {
            let q = s as f64 / n;
            q * q.ln()
        })
        .sum::<f64>()
}

fn mi_from_table(table: &[Vec<usize>], n: usize) -> f64 {
    let row: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<usize> = (0..table.first().map_or(0, Vec::len))
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    let nf = n as f64;
    let mut mi = 0.0;
    for (i, r) in table.iter().enumerate() {
        for (j, &nij) in r.iter().enumerate() {
            if nij > 0 {
                let c = nij as f64;
                mi += c / nf * (nf * c / (row[i] as f64 * col[j] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

pub fn mutual_information(u: &Partition, v: &Partition) -> Result<f64> {
    Ok(mi_from_table(&contingency(u, v)?, u.len()))
}

/// Expected mutual information of partitions with the given cluster sizes
/// when labels are matched by a uniformly random permutation.
///
/// For each size pair `(a, b)` the overlap `n_ij` is hypergeometric on
/// `max(1, a + b − N) ..= min(a, b)`; probabilities are accumulated in log space.
pub fn expected_mi(u: &Partition, v: &Partition) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    Ok(expected_mi_from_sizes(&u.sizes(), &v.sizes(), u.len()))
}

fn expected_mi_from_sizes(a_sizes: &[usize], b_sizes: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let ln_fact = ln_factorials(n);
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in a_sizes {
        for &b in b_sizes {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            // ln of a! b! (N−a)! (N−b)! / N!, shared by every n_ij
            let shared = ln_fact[a] + ln_fact[b] + ln_fact[n - a] + ln_fact[n - b] - ln_fact[n];
            for nij in lo..=hi {
                let c = nij as f64;
                let term = c / nf * (nf * c / (a as f64 * b as f64)).ln();
                let ln_p =
                    shared - ln_fact[nij] - ln_fact[a - nij] - ln_fact[b - nij] - ln_fact[n + nij - a - b];
                emi += term * ln_p.exp();
            }
        }
    }
    emi
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(acc);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// Every quantity that enters the adjusted mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub ami: f64,
    pub mi: f64,
    pub expected_mi: f64,
    pub entropy_u: f64,
    pub entropy_v: f64,
}

impl Agreement {
    /// `(MI − E[MI]) / (max(H(U), H(V)) − E[MI])`. Partitions that coincide up
    /// to relabeling score exactly 1; otherwise a vanishing denominator yields 0.
    pub fn compute(u: &Partition, v: &Partition) -> Result<Self> {
        let table = contingency(u, v)?;
        let n = u.len();
        let mi = mi_from_table(&table, n);
        let expected_mi = expected_mi_from_sizes(&u.sizes(), &v.sizes(), n);
        let entropy_u = entropy(u);
        let entropy_v = entropy(v);
        let denom = entropy_u.max(entropy_v) - expected_mi;
        // canonical labels make relabeling-equality plain equality
        let ami = if u.labels() == v.labels() {
            1.0
        } else if denom.abs() < 1e-12 {
            0.0
        } else {
            (mi - expected_mi) / denom
        };
        Ok(Agreement {
            ami,
            mi,
            expected_mi,
            entropy_u,
            entropy_v,
        })
    }
}

pub fn ami(u: &Partition, v: &Partition) -> Result<f64> {
    Ok(Agreement::compute(u, v)?.ami)
}
