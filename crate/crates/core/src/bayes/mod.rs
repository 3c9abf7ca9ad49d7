//! Bayesian engine: priors, joint posterior, adaptive MCMC, posterior curves.

pub mod comparator;
pub mod curves;
pub mod data;
pub mod mcmc;
pub mod posterior;
pub mod prior;
pub mod sampler;

pub use comparator::{sample_comparator_posterior, ComparatorDraws, ComparatorParams};
pub use curves::{dose_curves, tail_prob, CurveMatrix, CurveModel, Direction, DoseCurves};
pub use data::{DoseCounts, PatientRecord, Phase1Data};
pub use mcmc::{BlockAcceptance, DrawMeta, McmcSettings, PosteriorDraws};
pub use posterior::{log_posterior, log_prior};
pub use prior::{ComparatorPrior, Dist, HillShape, PriorSpec};
pub use sampler::{prior_mean_params, sample_posterior, ModelDraws, PARAMETER_BLOCKS};
