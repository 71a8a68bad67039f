//! Spectra of transverse-field spin-S chains with couplings `J0 / |i-j|^alpha`.
//!
//! * [`model`]: chain specification, couplings, zeta-type special functions.
//! * [`exact`]: dense exact diagonalization.
//! * [`meanfield`]: coherent-state configurations, semiclassical levels and bifurcations.
//! * [`spinwaves`]: ring spin-wave dispersions and gaps.
//! * [`sublattice`]: two-sublattice Bogoliubov-de Gennes bands.

pub mod error;
pub mod exact;
pub mod meanfield;
pub mod model;
pub mod spinwaves;
pub mod sublattice;

pub use error::{Error, ErrorClass, Result};
pub use model::{Alpha, Boundary, ChainSpec, Sites};
