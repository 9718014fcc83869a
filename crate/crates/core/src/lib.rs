//! Harmonic measure distribution functions (h-functions) of circle domains
//! and blocked circle domains.
//!
//! * [`geometry`]: circle domains, gates, channel depths and exact distance
//!   queries.
//! * [`hfunction`]: candidate functions, their descriptors `μ, M, α, β`,
//!   step approximations and necessary conditions.
//! * [`potential`]: walk-on-spheres, a log-polar finite volume solver and
//!   closed-form oracles.
//! * [`bounds`]: closed-form thresholds and harmonic measure bounds.
//! * [`construct`]: inversion of step functions into circle domains and the
//!   blocked-domain construction with its diagnostics.
//!
//! The geometry, h-function and bound code is generic over [`scalar::Real`];
//! the aliases below fix it to `f64`. The channel depth functions in
//! [`geometry::channel`] also accept exact rationals ([`Exact`]).
//!
//! ```
//! use hmdf::{bounds::thresholds, CandidateH, SegmentKind};
//!
//! let f = CandidateH::new(vec![1.0, 1.0992], vec![0.5, 1.0], vec![SegmentKind::Linear]).unwrap();
//! let (alpha, beta) = (f.minimal_secant_slope().unwrap(), f.jump_at_mu().unwrap());
//! let t = thresholds(alpha, beta).unwrap();
//! assert!(0.0992 < t.m0());
//! ```

// negated comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod construct;
pub mod error;
pub mod geometry;
pub mod hfunction;
pub mod potential;
pub mod scalar;

pub use error::{Error, Result};
pub use geometry::{BoundaryFeature, Domain, FeatureKind};
pub use hfunction::SegmentKind;
pub use potential::{HFunctionTable, MeasureEstimate, Method, Target};
pub use scalar::Real;

pub type CircleDomain = geometry::CircleDomain<f64>;
pub type BlockedCircleDomain = geometry::BlockedCircleDomain<f64>;
pub type OffCenterDisk = geometry::OffCenterDisk<f64>;
pub type Arc = geometry::Arc<f64>;
pub type CandidateH = hfunction::CandidateH<f64>;
pub type StepH = hfunction::StepH<f64>;
pub type Thresholds = bounds::Thresholds<f64>;
pub type Chi = bounds::Chi<f64>;

/// Exact rational scalar for the channel depth identities.
pub type Exact = num_rational::BigRational;
