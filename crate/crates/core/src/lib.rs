//! Group-invariant polynomial separation.
//!
//! Builds polynomials invariant under a compact group action that separate a
//! point from an invariant set, and checks every inequality numerically.

pub mod casebook;
pub mod diophantine;
pub mod error;
pub mod groups;
pub mod poly;
pub mod rng;
pub mod setspec;
pub mod symmetrize;

pub use error::{Error, Result};
pub use groups::{FiniteGroup, Group, GroupElement, GroupSpec, Phase, TorusGroup};
pub use poly::{Field, Monomial, Polynomial};
