//! Computational rough paths over the free step-N nilpotent group.
//!
//! The crate provides dense truncated tensor-series arithmetic (`series`),
//! group and Lie-algebra views of it (`group`), Chen lifts of piecewise
//! linear paths (`lift`), rescaled random-walk lifts (`walk`), homogeneous
//! norms and Holder-type metrics (`metrics`), an exact rational calculus
//! for moments of group-valued walks (`poly`, `moment`, `exponents`), and a
//! second-order solver for differential equations driven by lifted paths
//! (`rde`).
//!
//! Everything outside the test suites is `no_std`-compatible (with `alloc`);
//! the default `std` feature only switches the float intrinsics and error
//! trait impls.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod exponents;
mod fmath;
pub mod group;
pub mod lift;
pub mod metrics;
pub mod moment;
pub mod poly;
pub mod rde;
pub mod scalar;
pub mod series;
pub mod walk;

pub use exponents::{tightness_exponents, ExponentSummary};
pub use group::{GroupElement, LieElement};
pub use lift::{Interpolation, LiftedPath};
pub use metrics::{cc_distance, holder_distance, holder_norm, homogeneous_norm};
pub use moment::MomentOracle;
pub use poly::GradedPolynomial;
pub use rde::{IntegrandSet, StatePath, VectorFieldSet};
pub use series::{AlgebraError, TensorSeries};
pub use walk::{replica_rng, IncrementDistribution, IncrementKind, WalkSpec};
