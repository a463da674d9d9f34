//! Generalized power measures, alpha-Fisher information and related bounds
//! for heavy-tailed (alpha-stable) noise.
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alphapower;
pub mod bounds;
pub mod capacity;
pub mod density;
pub mod error;
pub mod estimate;
pub mod fourier;
pub mod grid;
pub mod jalpha;
pub mod quad;
pub mod root;
pub mod specfun;
pub mod stable;
pub mod sweeps;

pub use density::{convolve, entropy, log_moment, realize, RandomLaw};
pub use error::{Error, Result};
pub use grid::{GridConfig, GridSpec, GriddedDensity, TailLaw};
pub use stable::{StableParams, ReferenceStable};
