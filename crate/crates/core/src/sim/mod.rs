//! Dense statevector simulation of the small circuits used by the feature maps.

mod circuit;
mod gate;
mod noise;
mod statevector;
mod stats;

pub use circuit::{run_circuit, Circuit};
pub use gate::Gate;
pub use noise::{sample_fidelity, NoiseConfig};
pub use statevector::{apply_gate, fidelity, Statevector};
pub use stats::{circuit_stats, CircuitStats};

pub(crate) use statevector::overlap_sqr;
