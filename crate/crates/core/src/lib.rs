//! Entanglement entropies and ground-state structure of generalized
//! Lipkin–Meshkov–Glick (gLMG) models with su(m+1) internal symmetry.
//!
//! The ground state of a gLMG model is a Dicke state, so the reduced density
//! matrix of an `L`-site block is diagonal with a multivariate hypergeometric
//! spectrum. This crate provides:
//!
//! - [`model`]: the model definition, weight simplex and field → density map,
//! - [`rdm`]: the exact block spectrum, its Schmidt coefficients and moments,
//! - [`entropy`]: exact and asymptotic von Neumann, Rényi and Tsallis entropies,
//! - [`gaussian`]: Gaussian approximations of the spectrum,
//! - [`phase`]: the ground-state phase solver (weighted projection onto the simplex),
//! - [`diag`]: small-N exact diagonalization used to verify the Dicke ground state,
//! - [`figures`]: the tabulated data sets exposed by the command-line tool.
//!
//! All component indices in the public API are zero-based: magnon type `a`
//! ranges over `0..=m`, with `m` the "last" type whose weight is `-Σ e_a`.
//! Entropies are in natural-log units.

pub mod diag;
pub mod entropy;
pub mod error;
pub mod figures;
pub mod fmt;
pub mod gaussian;
pub mod model;
pub mod numeric;
pub mod phase;
pub mod rdm;

pub use diag::{GroundStateReport, HalfInt, SectorSpectrum};
pub use entropy::{AsymptoticInput, EntropyFlag, EntropyKind, EntropyValue, ZeroEntropyFace};
pub use error::{Error, Result};
pub use gaussian::GaussianModel;
pub use model::{CouplingScheme, FieldLocation, MagnonDensities, MagnonNumbers, ModelSpec, WeightSet};
pub use phase::{GridSpec, PhaseResult, ScanRow, Su3Region};
pub use rdm::{BlockSpec, Moments, RdmSpectrum};
