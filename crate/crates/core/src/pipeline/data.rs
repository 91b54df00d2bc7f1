use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};

use crate::encoding::FeatureMatrix;
use crate::error::{Error, Result};
use crate::metrics::Partition;
use crate::seed;

/// Feature matrix with the sample identifiers of its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub features: FeatureMatrix,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["sample_id".to_string()];
        header.extend((0..self.n_features()).map(|c| format!("f{c}")));
        w.write_record(&header)?;
        for (r, id) in self.ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(self.features.row(r).iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads `sample_id,feature_1,...` with a header row.
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    read_dataset(File::open(path)?, path)
}

pub fn read_dataset<R: Read>(input: R, path: &Path) -> Result<Dataset> {
    let parse_err = |line: u64, column: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let width = reader.headers()?.len();
    if width < 2 {
        return Err(parse_err(
            1,
            1,
            "need a sample id column and at least one feature".into(),
        ));
    }
    let mut ids = Vec::new();
    let mut seen = HashSet::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(parse_err(
                line,
                record.len().min(width) + 1,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let id = record[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(parse_err(line, 1, format!("duplicate sample id {id:?}")));
        }
        for (c, field) in record.iter().enumerate().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, c + 1, format!("non-numeric value {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(line, c + 1, format!("non-finite value {field:?}")));
            }
            values.push(v);
        }
        ids.push(id);
    }
    if ids.is_empty() {
        return Err(parse_err(1, 1, "no data rows".into()));
    }
    let features = DMatrix::from_row_slice(ids.len(), width - 1, &values);
    Ok(Dataset { ids, features })
}

/// Isotropic Gaussian blobs with planted labels.
///
/// Centres sit on an integer grid with spacing `separation`, so every pair of
/// centres is at least `separation` apart; each coordinate gets `N(0, spread²)` noise.
pub fn make_blobs(
    n_per_cluster: usize,
    n_clusters: usize,
    d: usize,
    separation: f64,
    spread: f64,
    seed: u64,
) -> Result<(Dataset, Partition)> {
    if n_per_cluster == 0 || n_clusters == 0 || d == 0 {
        return Err(Error::param("blob counts and dimension must be positive"));
    }
    if !(separation > 0.0 && spread > 0.0) {
        return Err(Error::param("separation and spread must be positive"));
    }
    let side = (1..)
        .find(|s: &usize| s.pow(d as u32) >= n_clusters)
        .expect("finite");
    let noise = Normal::new(0.0, spread).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = seed::rng(seed);
    let n = n_per_cluster * n_clusters;
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for c in 0..n_clusters {
        let mut cell = c;
        let center: Vec<f64> = (0..d)
            .map(|_| {
                let coord = (cell % side) as f64 * separation;
                cell /= side;
                coord
            })
            .collect();
        for _ in 0..n_per_cluster {
            values.extend(center.iter().map(|m| m + noise.sample(&mut rng)));
            labels.push(c);
        }
    }
    let ids = (0..n).map(|i| format!("s{i:05}")).collect();
    let features = DMatrix::from_row_slice(n, d, &values);
    Ok((Dataset { ids, features }, Partition::new(&labels)))
}
