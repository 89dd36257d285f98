//! Exact-arithmetic measurement theory for finite-dimensional general
//! probabilistic theories (GPTs) with polyhedral cones.
//!
//! Everything here is pure computation over [`Rational`] numbers: the
//! crate is `no_std` and only needs `alloc`. File formats, the command line
//! front end and other IO live in the companion `gpt-measure` crate.
//!
//! The layers, bottom-up:
//!
//! * [`lp`]: an exact simplex solver returning optimality, infeasibility
//!   (Farkas) or unboundedness certificates that can be re-checked by plain
//!   arithmetic.
//! * [`space`]: order unit spaces with a cone given by generators.
//! * [`evm`]: finite-outcome effect-valued measures and their algebra.
//! * [`gain`]: ensembles and state discrimination (gain) functionals.
//! * [`order`]: the post-processing preorder with two-sided certificates.
//! * [`simulability`] and [`incompatibility`]: robustness measures as linear
//!   programs with dual ensemble certificates.
//! * [`experiments`]: classical statistical experiments and Blackwell
//!   comparison.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod evm;
pub mod experiments;
pub mod gain;
pub mod incompatibility;
pub mod lp;
pub mod order;
pub mod random;
pub mod rational;
pub mod simulability;
pub mod space;

pub use error::{Error, Result};
pub use evm::{Evm, OutcomePartition, StochasticMatrix};
pub use gain::{Ensemble, Functional, PartitionedEnsemble, WStarFamily};
pub use rational::Rational;
pub use space::{GptSpace, RawSpace, SpaceKind};
