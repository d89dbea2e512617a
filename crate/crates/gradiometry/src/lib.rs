//! Moment dynamics and gradient-estimation precision for macroscopic
//! singlet states of collective spins.
//!
//! A singlet of N spins is insensitive to homogeneous magnetic fields, but a
//! field gradient along the ensemble dephases it and makes the variance of
//! the collective spin components grow. This crate computes that growth and
//! the resulting estimation precision for the accumulated phase Θ:
//!
//! - [`chain`] — closed forms for a singlet on a fixed chain of spin-1/2
//!   particles;
//! - [`profile`] — ensembles described by a smooth density profile
//!   (Gaussian, tabulated) or a delta chain;
//! - [`noise`] — local depolarizing noise on the initial state and the
//!   projector-based estimator;
//! - [`spinj`] — the spin-j scaling of the second moment and the Gaussian
//!   fourth-moment assumption;
//! - [`oracle`] — dense exact simulation at small N, the ground truth the
//!   closed forms are validated against.
//!
//! Conventions: ħ = 1, positions are measured in units of the characteristic
//! length L, and Θ = ω_L·t is dimensionless.

pub mod chain;
pub mod correlators;
pub mod curve;
pub mod ensemble;
pub mod error;
pub mod noise;
pub mod oracle;
pub mod profile;
pub mod spinj;

pub use curve::MomentCurve;
pub use ensemble::{ChainGeometry, EnsembleSpec, PhasePoint, PositionStats, Spin};
pub use error::{Error, Result};
