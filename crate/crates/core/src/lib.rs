//! Propagation of partially coherent Gaussian-Schell-model light in a
//! parabolic graded-index waveguide by coherent-mode decomposition.
//!
//! The source is split into its coherent modes, each mode is projected on
//! the waveguide modes, and the coherence matrix is then known in closed
//! form at any distance. From it the crate derives intensity profiles
//! (with the mixture/coherence split), purity, entropy, second moments,
//! coherence radius, squeezing and uncertainty products, and locates the
//! distance at which a displaced beam turns into a two-lobe cat state.

pub mod cli;
pub mod config;
pub mod coupling;
pub mod engine;
pub mod error;
pub mod evolution;
pub mod hgbasis;
pub mod observables;
pub mod source;
pub mod waveguide;

pub use engine::{Engine, Numerics};
pub use error::{Error, Result};
pub use source::SourceSpec;
pub use waveguide::{Regime, WaveguideSpec};
