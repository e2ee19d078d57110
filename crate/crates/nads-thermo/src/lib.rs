//! Numerical thermodynamic formalism for nonautonomous discrete dynamical
//! systems (NADDS) on finite models of compact metric spaces.
//!
//! The toolkit estimates topological entropy and pressure from separated-set
//! partition sums, the Misiurewicz variants built from diagonal entourages
//! and shifted orbit sums, and the convex-duality layer on top of them:
//! entropy maps by conjugation over a finite potential dictionary,
//! variational maximizer search, invariant-measure search by exact
//! cycle analysis, and non-invariance certification by scaled coboundary
//! witnesses.
//!
//! Start with [`space::SampledSpace`] and [`nads::MapSequence`], or with the
//! [`catalog`] of built-in systems; `pressure::pressure_estimate` and the
//! [`duality`] layer sit on top. The `nads-thermo` binary drives the same
//! code from JSON experiment configs.

#![forbid(unsafe_code)]

pub mod catalog;
pub mod config;
pub mod covers;
pub mod duality;
pub mod error;
pub mod measures;
pub mod nads;
pub mod pressure;
pub mod runner;
pub mod space;

#[doc(hidden)]
pub mod book;

pub use error::{NadsError, Result};
