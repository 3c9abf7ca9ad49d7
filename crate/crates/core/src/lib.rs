//! Seamless phase I–II dose optimisation with PK/PD-integrated Bayesian models.
//!
//! The deterministic model mathematics ([`pkpd`], [`quadrature`], and the
//! utility arithmetic in [`phase2`]) is generic over [`Real`]; the sampler,
//! design rules and simulator run in `f64`. Aliases at the crate root name
//! the `f64` instantiations used throughout.

pub mod bayes;
pub mod error;
pub mod phase1;
pub mod phase2;
pub mod pkpd;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DoseGrid = pkpd::DoseGrid<f64>;
pub type PkPopulation = pkpd::PkPopulation<f64>;
pub type PatientPk = pkpd::PatientPk<f64>;
pub type ToxicityLink = pkpd::ToxicityLink<f64>;
pub type PdParams = pkpd::PdParams<f64>;
pub type ModelParams = pkpd::ModelParams<f64>;
pub type UtilityWeights = phase2::UtilityWeights<f64>;
pub type BetaParams = phase2::BetaParams<f64>;

pub type DoseGridF32 = pkpd::DoseGrid<f32>;
pub type PkPopulationF32 = pkpd::PkPopulation<f32>;
pub type PdParamsF32 = pkpd::PdParams<f32>;
pub type UtilityWeightsF32 = phase2::UtilityWeights<f32>;
