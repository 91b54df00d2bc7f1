//! Bandwidth scaling and IQP-style feature maps.
//!
//! One repetition of a feature map is
//!
//! ```text
//! H on every qubit
//! Phase(2·x_k) on every qubit k
//! Rzz(2·φ(x_i, x_j)) for every pair (i, j) of the entanglement set, in order
//! ```
//!
//! with `φ(a, b) = a·b` ([`PairPhase::Product`]) or `(π − a)(π − b)`
//! ([`PairPhase::HavlicekPi`]). The factor 2 makes the one-qubit, one-repetition
//! kernel exactly `cos²(x − y)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::digest::Digest;
use crate::error::{Error, Result};
use crate::sim::{Circuit, Gate, Statevector};

/// `N × d` real feature matrix, one sample per row.
pub type FeatureMatrix = DMatrix<f64>;

const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Z,
    ZZLinear,
    ZZFull,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Z, Family::ZZLinear, Family::ZZFull];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Z => "Z",
            Family::ZZLinear => "ZZLinear",
            Family::ZZFull => "ZZFull",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown feature map family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum PairPhase {
    /// `x_i · x_j`
    #[default]
    Product,
    /// `(π − x_i)(π − x_j)`
    HavlicekPi,
}

impl PairPhase {
    pub fn angle(&self, a: f64, b: f64) -> f64 {
        match self {
            PairPhase::Product => a * b,
            PairPhase::HavlicekPi => (PI - a) * (PI - b),
        }
    }
}

/// Ordered list of qubit pairs that receive an `Rzz` rotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntanglementSet {
    pairs: Vec<(usize, usize)>,
}

impl EntanglementSet {
    pub fn new(pairs: Vec<(usize, usize)>, n_qubits: usize) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &pairs {
            for q in [a, b] {
                if q >= n_qubits {
                    return Err(Error::InvalidQubit { index: q, n_qubits });
                }
            }
            if a == b {
                return Err(Error::RepeatedTarget(a));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::param(format!("duplicate entanglement pair ({a}, {b})")));
            }
        }
        Ok(EntanglementSet { pairs })
    }

    pub fn for_family(family: Family, n_qubits: usize) -> Self {
        let pairs = match family {
            Family::Z => Vec::new(),
            Family::ZZLinear => (1..n_qubits).map(|q| (q - 1, q)).collect(),
            Family::ZZFull => (0..n_qubits)
                .flat_map(|i| (i + 1..n_qubits).map(move |j| (i, j)))
                .collect(),
        };
        EntanglementSet { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn canonical(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = self.pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapConfig {
    pub family: Family,
    pub n_qubits: usize,
    pub reps: usize,
    /// Upper end of the admissible input range `[0, beta]`, radians.
    pub beta: f64,
    pub pair_phase: PairPhase,
    entanglement: EntanglementSet,
}

impl FeatureMapConfig {
    pub const DEFAULT_REPS: usize = 2;

    pub fn new(family: Family, n_qubits: usize, beta: f64) -> Self {
        FeatureMapConfig {
            family,
            n_qubits,
            reps: Self::DEFAULT_REPS,
            beta,
            pair_phase: PairPhase::Product,
            entanglement: EntanglementSet::for_family(family, n_qubits),
        }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_pair_phase(mut self, pair_phase: PairPhase) -> Self {
        self.pair_phase = pair_phase;
        self
    }

    /// Replaces the pair order. The set itself must be the family's set.
    pub fn with_pair_order(mut self, order: EntanglementSet) -> Result<Self> {
        let expected = EntanglementSet::for_family(self.family, self.n_qubits);
        if order.canonical() != expected.canonical() {
            return Err(Error::param(format!(
                "pair list {:?} is not the {} entanglement set",
                order.pairs, self.family
            )));
        }
        self.entanglement = order;
        Ok(self)
    }

    pub fn entanglement(&self) -> &EntanglementSet {
        &self.entanglement
    }

    pub fn validate(&self) -> Result<()> {
        Statevector::zero(self.n_qubits)?;
        if self.reps == 0 {
            return Err(Error::param("reps must be at least 1"));
        }
        if !(self.beta > 0.0 && self.beta <= TAU + RANGE_SLACK) {
            return Err(Error::param(format!("beta = {} outside (0, 2π]", self.beta)));
        }
        Ok(())
    }

    pub fn digest(&self) -> Digest {
        Digest::of(self)
    }
}

/// Builds `U_φ(x)`: `reps` repetitions of H layer, single-qubit phases and pair rotations.
pub fn build_feature_map(config: &FeatureMapConfig, x: &[f64]) -> Result<Circuit> {
    config.validate()?;
    if x.len() != config.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: config.n_qubits,
            actual: x.len(),
        });
    }
    for (k, &v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("feature {k} = {v}")));
        }
        if v < -RANGE_SLACK || v > config.beta + RANGE_SLACK {
            return Err(Error::param(format!(
                "feature {k} = {v} outside [0, {}]",
                config.beta
            )));
        }
    }
    let n = config.n_qubits;
    let per_rep = 2 * n + config.entanglement.len();
    let mut gates = Vec::with_capacity(config.reps * per_rep);
    for _ in 0..config.reps {
        gates.extend((0..n).map(Gate::H));
        gates.extend(x.iter().enumerate().map(|(k, &v)| Gate::Phase(k, 2.0 * v)));
        gates.extend(
            config
                .entanglement
                .pairs()
                .iter()
                .map(|&(i, j)| Gate::Rzz(i, j, 2.0 * config.pair_phase.angle(x[i], x[j]))),
        );
    }
    Circuit::from_gates(n, gates)
}

/// `|φ(x)⟩ = U_φ(x)|0…0⟩`.
pub fn encode(config: &FeatureMapConfig, x: &[f64]) -> Result<Statevector> {
    Ok(build_feature_map(config, x)?.run())
}

/// Per-column min-max parameters fitted once and reused on any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl Scaler {
    pub fn fit(raw: &FeatureMatrix) -> Result<Self> {
        if raw.nrows() == 0 || raw.ncols() == 0 {
            return Err(Error::param("cannot fit a scaler on an empty matrix"));
        }
        check_finite(raw)?;
        let mins = raw.column_iter().map(|c| c.min()).collect();
        let maxs = raw.column_iter().map(|c| c.max()).collect();
        let scaler = Scaler { mins, maxs };
        for c in scaler.degenerate_columns() {
            log::warn!("feature column {c} is constant; it is mapped to 0");
        }
        Ok(scaler)
    }

    pub fn n_features(&self) -> usize {
        self.mins.len()
    }

    /// Columns with `max == min`; they carry no information and scale to 0.
    pub fn degenerate_columns(&self) -> Vec<usize> {
        (0..self.mins.len())
            .filter(|&c| self.maxs[c] <= self.mins[c])
            .collect()
    }

    /// `(x − min) / (max − min) · beta`, column by column.
    pub fn transform(&self, raw: &FeatureMatrix, beta: f64) -> Result<FeatureMatrix> {
        if raw.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: raw.ncols(),
            });
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param(format!("beta = {beta} must be positive")));
        }
        check_finite(raw)?;
        Ok(DMatrix::from_fn(raw.nrows(), raw.ncols(), |r, c| {
            let span = self.maxs[c] - self.mins[c];
            if span > 0.0 {
                (raw[(r, c)] - self.mins[c]) / span * beta
            } else {
                0.0
            }
        }))
    }

    pub fn digest(&self) -> Digest {
        Digest::of(self)
    }
}

/// Fits a scaler on `raw` and maps every entry into `[0, beta]`.
pub fn scale_features(raw: &FeatureMatrix, beta: f64) -> Result<(FeatureMatrix, Scaler)> {
    let scaler = Scaler::fit(raw)?;
    let scaled = scaler.transform(raw, beta)?;
    Ok((scaled, scaler))
}

fn check_finite(m: &FeatureMatrix) -> Result<()> {
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        // column-major storage
        let (r, c) = (pos % m.nrows(), pos / m.nrows());
        return Err(Error::NonFinite(format!("feature matrix entry ({r}, {c})")));
    }
    Ok(())
}
