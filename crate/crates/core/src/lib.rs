//! Quantum fidelity kernels for clustering low-dimensional data.
//!
//! The crate covers the whole path from a feature matrix to a scored
//! stratification:
//!
//! - [`sim`]: dense statevector simulation, fidelities, circuit statistics and
//!   shot sampling under stochastic Pauli noise.
//! - [`encoding`]: min-max bandwidth scaling and IQP-style feature maps
//!   (Z, ZZ-linear, ZZ-full).
//! - [`kernels`]: exact, shot-sampled and RBF Gram matrices plus their file formats.
//! - [`clustering`]: spectral clustering on a kernel used as an affinity.
//! - [`metrics`]: silhouette on kernel-induced distances and adjusted mutual information.
//! - [`pipeline`]: data ingestion, synthetic blobs and the three experiment drivers.
//!
//! ```
//! use qkstrat::encoding::{FeatureMapConfig, Family, Scaler};
//! use qkstrat::kernels::gram_exact;
//! use nalgebra::DMatrix;
//!
//! let raw = DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 0.5, 0.0, 1.0, 0.5]);
//! let scaled = Scaler::fit(&raw).unwrap().transform(&raw, std::f64::consts::FRAC_PI_2).unwrap();
//! let config = FeatureMapConfig::new(Family::ZZLinear, 2, std::f64::consts::FRAC_PI_2);
//! let k = gram_exact(&config, &scaled).unwrap();
//! assert_eq!(k.get(1, 1), 1.0);
//! ```

pub mod clustering;
pub mod digest;
pub mod encoding;
pub mod error;
pub mod kernels;
pub mod metrics;
pub mod pipeline;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
