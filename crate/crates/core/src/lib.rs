//! Resonance combinatorics and quasi-resonant dynamics for the cubic
//! nonlinear Schrödinger equation on waveguides `ℝ × T^d_θ`.

pub mod error;
pub mod fields;
pub mod diophantine;
pub mod dynamics;
pub mod experiments;
pub mod lattice;
pub mod oscillatory;
pub mod resonance;

pub use error::{Error, Result};
