//! Coordinate-delay SAR image statistics for delayed and instantaneous
//! extended scatterers, and maximum-likelihood discrimination between them.
//!
//! The crate is layered bottom-up:
//!
//! - [`specfun`]: `Φ(v1, v2)`, Fresnel and sine integrals, `F̆_t`, `b_Φ`.
//! - [`kernel`]: radar geometry, `κ`, resolutions, the dimensionless imaging
//!   kernel and ambiguity-pair coordinates.
//! - [`moments`]: the `G^S`, `G^T`, `H` operators per scatterer kind, moment
//!   triples and the 4×4 pair covariance.
//! - [`sampler`]: synthetic datasets of circular-Gaussian ambiguity pairs.
//! - [`discriminator`]: per-model likelihood maximization and the decision.
//! - [`montecarlo`]: ensembles, contingency tables and parameter sweeps.
//! - [`experiments`]: the published reference runs and their metrics.

pub mod discriminator;
pub mod error;
pub mod experiments;
pub mod kernel;
pub mod moments;
pub mod montecarlo;
pub mod optim;
pub mod quad;
pub mod sampler;
pub mod specfun;

pub use error::{Error, Result};
