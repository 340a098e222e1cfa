//! Certified spectral-gap lower bounds for finitely generated groups.
//!
//! The crate searches for a decomposition `Δ² − λΔ = Σ ξᵢ*ξᵢ` in the real
//! group ring, reduces the resulting semidefinite program by a finite group
//! of symmetries, and turns a floating point solution into a rigorous bound
//! with interval arithmetic.

pub mod certify;
pub mod error;
pub mod groupring;
pub mod groups;
pub mod interval;
pub mod linalg;
pub mod pipeline;
pub mod sdp;
pub mod symmetry;

pub use error::{Error, Result};
