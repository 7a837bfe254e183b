//! Quasienergy spectra and resonance-cell dynamics of a wave-driven Landau
//! ladder.
//!
//! The library builds the nearest-neighbour coupling chain of a charged
//! particle driven at (or near) its cyclotron frequency, diagonalizes the
//! resulting symmetric tridiagonal operator, and evolves arbitrary states
//! through the spectral propagator. On top of the raw dynamics it provides
//! the resonance-cell structure of the level ladder, localization and
//! tunneling observables, penetration scans over the inverse effective
//! Planck constant, and coherent-state (Husimi) phase-space distributions.
//!
//! Quantities are dimensionless throughout: energies in units of the photon
//! quantum, times in wave periods.
//!
//! Everything numerical is generic over the scalar type through the
//! [`scalar::Real`] trait (`f32` or `f64`); the aliases at the crate root fix
//! the common double-precision instantiation.
//!
//! ```
//! use qecell::{ModelParams64, CouplingChain64, StateVector64};
//!
//! let params = ModelParams64::new(0.6, 0.1, 0.0, 64).unwrap();
//! let chain = CouplingChain64::build(params).unwrap();
//! let cells = qecell::model::cell_partition(&chain).unwrap();
//! let spectrum = qecell::spectrum::solve(chain).unwrap();
//! let state = StateVector64::delta_at(cells.cells()[0].center(), 64).unwrap();
//! let evolved = qecell::evolve::evolve(&state, &spectrum, 1.0e4).unwrap();
//! assert!(evolved.norm_defect() < 1e-10);
//! ```

// `!(x > 0)`-style guards are used on purpose: they reject NaN along with
// the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolve;
pub mod export;
pub mod husimi;
pub mod invariants;
pub mod model;
pub mod scalar;
pub mod special;
pub mod spectrum;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision instantiations of the main types.
pub type ModelParams64 = model::ModelParams<f64>;
pub type CouplingChain64 = model::CouplingChain<f64>;
pub type QeSpectrum64 = spectrum::QeSpectrum<f64>;
pub type StateVector64 = evolve::StateVector<f64>;
pub type Propagator64 = evolve::Propagator<f64>;
pub type HusimiGrid64 = husimi::HusimiGrid<f64>;
