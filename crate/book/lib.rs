// mdbook cannot compile listings against a local crate, so each chapter is
// pulled in as a module doc comment and `cargo test --doc` runs the listings.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/statevectors.md")]
pub mod statevectors {}
#[doc = include_str!("src/feature-maps.md")]
pub mod feature_maps {}
#[doc = include_str!("src/kernels.md")]
pub mod kernels {}
#[doc = include_str!("src/noise.md")]
pub mod noise {}
#[doc = include_str!("src/clustering.md")]
pub mod clustering {}
#[doc = include_str!("src/metrics.md")]
pub mod metrics {}
#[doc = include_str!("src/experiments.md")]
pub mod experiments {}
#[doc = include_str!("../README.md")]
pub mod readme {}
