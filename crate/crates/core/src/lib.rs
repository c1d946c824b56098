//! Quasimodes of Schrödinger operators with repulsive homogeneous potentials
//! and the scaling experiments built on them.
//!
//! Every numerical routine is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what the command-line tool uses.

pub mod cutoff;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod linalg;
pub mod mixed_norm;
pub mod oscillator;
pub mod potential;
pub mod quadrature;
pub mod quasimode;
pub mod sampling;
pub mod scalar;
pub mod sweep;

pub use cutoff::CutoffProfile;
pub use error::{LabError, Result};
pub use exponents::{resolve_plan, select_parameters, ExponentPlan};
pub use mixed_norm::{QuadratureConfig, UCap};
pub use quasimode::{ForcingParts, SpaceTimePoint, TimeQuadratic};
pub use scalar::Scalar;
pub use sweep::{SweepRecord, SweepResult};

pub type SpdMatrix = linalg::SpdMatrix<f64>;
pub type Eigenpair = oscillator::Eigenpair<f64>;
pub type HomogeneousPotential = potential::HomogeneousPotential<f64>;
pub type MorseData = potential::MorseData<f64>;
pub type QuasimodeFamily = quasimode::QuasimodeFamily<f64>;
pub type NormSpec = mixed_norm::NormSpec<f64>;
pub type Domain = mixed_norm::Domain<f64>;
pub type NormEstimate = mixed_norm::NormEstimate<f64>;
