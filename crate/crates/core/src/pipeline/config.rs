use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, TAU};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::clustering::{Laplacian, SpectralConfig};
use crate::encoding::{Family, PairPhase};
use crate::error::{Error, Result};
use crate::kernels::RbfConfig;
use crate::sim::NoiseConfig;

/// A quantum feature-map family or the classical RBF baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureFamily {
    Quantum(Family),
    Rbf,
}

impl FeatureFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureFamily::Quantum(f) => f.as_str(),
            FeatureFamily::Rbf => "RBF",
        }
    }
}

impl fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FeatureFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "RBF" {
            Ok(FeatureFamily::Rbf)
        } else {
            s.parse().map(FeatureFamily::Quantum)
        }
    }
}

impl Serialize for FeatureFamily {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for FeatureFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A subset size, or the whole dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleSize {
    Count(usize),
    Full,
}

impl SampleSize {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            SampleSize::Count(c) => c,
            SampleSize::Full => n,
        }
    }
}

impl Serialize for SampleSize {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SampleSize::Count(c) => s.serialize_u64(*c as u64),
            SampleSize::Full => s.serialize_str("full"),
        }
    }
}

impl<'de> Deserialize<'de> for SampleSize {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(c) => Ok(SampleSize::Count(c)),
            Raw::Word(w) if w == "full" => Ok(SampleSize::Full),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "sample size must be a count or \"full\", got {w:?}"
            ))),
        }
    }
}

/// Everything an experiment run needs. The JSON config file uses these field
/// names; unknown keys are rejected and omitted keys take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub feature_families: Vec<FeatureFamily>,
    /// Upper ends of the quantum input range, radians.
    pub betas: Vec<f64>,
    /// Inclusive cluster-count range.
    pub k_range: [usize; 2],
    pub sample_sizes: Vec<SampleSize>,
    /// Minimum full-data silhouette for a configuration to enter the sample-complexity study.
    pub sc_threshold: f64,
    /// Replicate seeds: subset draws and shot sampling.
    pub seeds: Vec<u64>,
    pub noise: Option<NoiseConfig>,
    pub base_seed: u64,
    pub reps: usize,
    pub pair_phase: PairPhase,
    pub rbf: RbfConfig,
    pub laplacian: Laplacian,
    pub kmeans_restarts: usize,
    pub kmeans_max_iter: usize,
    pub eig_tolerance: f64,
    /// Subset size for the noisy-versus-ideal comparison.
    pub noise_subset_size: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            feature_families: vec![
                FeatureFamily::Quantum(Family::Z),
                FeatureFamily::Quantum(Family::ZZLinear),
                FeatureFamily::Quantum(Family::ZZFull),
                FeatureFamily::Rbf,
            ],
            betas: vec![FRAC_PI_8, FRAC_PI_4, FRAC_PI_2, PI, TAU],
            k_range: [2, 10],
            sample_sizes: [50, 100, 250, 500, 800, 1000]
                .into_iter()
                .map(SampleSize::Count)
                .chain([SampleSize::Full])
                .collect(),
            sc_threshold: 0.3,
            seeds: vec![0, 1, 2, 3, 4],
            noise: None,
            base_seed: 0,
            reps: 2,
            pair_phase: PairPhase::Product,
            rbf: RbfConfig::default(),
            laplacian: Laplacian::SymmetricNormalized,
            kmeans_restarts: 16,
            kmeans_max_iter: 300,
            eig_tolerance: 1e-8,
            noise_subset_size: 100,
        }
    }
}

impl SweepConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: SweepConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_families.is_empty() {
            return Err(Error::param("feature_families is empty"));
        }
        if self.betas.is_empty() || self.betas.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            return Err(Error::param("betas must be a non-empty list of positive numbers"));
        }
        let [lo, hi] = self.k_range;
        if lo < 2 || lo > hi {
            return Err(Error::param(format!(
                "k_range [{lo}, {hi}] must satisfy 2 <= lo <= hi"
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::param("seeds is empty"));
        }
        if self.kmeans_restarts == 0 || self.kmeans_max_iter == 0 || self.reps == 0 {
            return Err(Error::param(
                "reps, kmeans_restarts and kmeans_max_iter must be positive",
            ));
        }
        if self.eig_tolerance.is_nan() || self.eig_tolerance <= 0.0 {
            return Err(Error::param("eig_tolerance must be positive"));
        }
        if self.noise_subset_size < 2 {
            return Err(Error::param("noise_subset_size must be at least 2"));
        }
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        Ok(())
    }

    pub fn ks(&self) -> std::ops::RangeInclusive<usize> {
        self.k_range[0]..=self.k_range[1]
    }

    pub(crate) fn spectral(&self, k: usize, seed: u64) -> SpectralConfig {
        SpectralConfig {
            k,
            laplacian: self.laplacian,
            kmeans_restarts: self.kmeans_restarts,
            kmeans_max_iter: self.kmeans_max_iter,
            seed,
            eig_tolerance: self.eig_tolerance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_protocol() {
        let c = SweepConfig::default();
        assert_eq!(c.betas, vec![FRAC_PI_8, FRAC_PI_4, FRAC_PI_2, PI, TAU]);
        assert_eq!(c.ks().count(), 9);
        assert_eq!(c.sample_sizes.len(), 7);
        assert_eq!(c.sc_threshold, 0.3);
        c.validate().unwrap();
    }

    #[test]
    fn partial_json_uses_defaults() {
        let c = SweepConfig::from_json_str(
            r#"{"feature_families": ["Z", "RBF"], "betas": [1.5], "sample_sizes": [50, "full"],
                "noise": {"p1": 0.0, "p2": 0.01, "p_readout": 0.0, "shots": 100}}"#,
        )
        .unwrap();
        assert_eq!(
            c.feature_families,
            vec![FeatureFamily::Quantum(Family::Z), FeatureFamily::Rbf]
        );
        assert_eq!(c.sample_sizes, vec![SampleSize::Count(50), SampleSize::Full]);
        assert_eq!(c.k_range, [2, 10]);
        assert_eq!(c.noise.unwrap().shots, 100);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(SweepConfig::from_json_str(r#"{"betaz": [1.0]}"#).is_err());
        assert!(SweepConfig::from_json_str(r#"{"feature_families": ["XY"]}"#).is_err());
        assert!(SweepConfig::from_json_str(r#"{"k_range": [1, 4]}"#).is_err());
        assert!(SweepConfig::from_json_str(r#"{"betas": [-1.0]}"#).is_err());
        assert!(SweepConfig::from_json_str(r#"{"sample_sizes": ["most"]}"#).is_err());
        assert!(SweepConfig::from_json_str(
            r#"{"noise": {"p1": 0.1, "p2": 0.1, "p_readout": 0.1, "shots": 0}}"#
        )
        .is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = SweepConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(SweepConfig::from_json_str(&text).unwrap(), c);
    }
}
