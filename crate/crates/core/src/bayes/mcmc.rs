//! Shared machinery for the component-wise adaptive random-walk Metropolis samplers.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pkpd::PatientPk;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSettings {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Acceptance rate the step sizes are adapted toward during burn-in.
    #[serde(default = "default_target")]
    pub target_acceptance: f64,
}

fn default_target() -> f64 {
    0.3
}

impl Default for McmcSettings {
    fn default() -> Self {
        Self { iterations: 10_000, burn_in: 5_000, thin: 5, target_acceptance: 0.3 }
    }
}

impl McmcSettings {
    /// Short chains for desk-scale simulation.
    pub fn desk() -> Self {
        Self { iterations: 2_000, burn_in: 1_000, thin: 2, target_acceptance: 0.3 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::Config(format!(
                "iterations ({}) must exceed burn_in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::Config("target_acceptance must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in).div_ceil(self.thin)
    }

    pub(crate) fn keeps(&self, iteration: usize) -> bool {
        iteration >= self.burn_in && (iteration - self.burn_in) % self.thin == 0
    }
}

/// Post-adaptation acceptance rate of one update block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockAcceptance {
    pub block: String,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawMeta {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub acceptance: Vec<BlockAcceptance>,
}

impl DrawMeta {
    pub fn acceptance_of(&self, block: &str) -> Option<f64> {
        self.acceptance.iter().find(|b| b.block == block).map(|b| b.rate)
    }
}

/// Retained MCMC output.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws<P> {
    pub params: Vec<P>,
    /// Per retained draw, the patient latents (empty for models without them).
    pub latents: Vec<Vec<PatientPk<f64>>>,
    pub meta: DrawMeta,
}

impl<P> PosteriorDraws<P> {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }
}

/// Robbins–Monro step-size controller on the log scale.
#[derive(Debug, Clone)]
pub(crate) struct StepAdapter {
    log_scale: f64,
    updates: u64,
    proposed: u64,
    accepted: u64,
    proposed_after: u64,
    accepted_after: u64,
}

impl StepAdapter {
    pub fn new(initial_scale: f64) -> Self {
        Self { log_scale: initial_scale.ln(), updates: 0, proposed: 0, accepted: 0, proposed_after: 0, accepted_after: 0 }
    }

    #[inline]
    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    #[inline]
    pub fn record(&mut self, accepted: bool, adapting: bool, target: f64) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
        if adapting {
            self.updates += 1;
            let gain = (self.updates as f64 + 1.0).powf(-0.6);
            let hit = if accepted { 1.0 } else { 0.0 };
            self.log_scale = (self.log_scale + gain * (hit - target)).clamp(-12.0, 4.0);
        } else {
            self.proposed_after += 1;
            self.accepted_after += u64::from(accepted);
        }
    }

    /// Counts `(accepted, proposed)` after adaptation froze, or over the
    /// whole run if no post-adaptation proposals happened.
    pub fn counts(&self) -> (u64, u64) {
        if self.proposed_after > 0 {
            (self.accepted_after, self.proposed_after)
        } else {
            (self.accepted, self.proposed)
        }
    }

    pub fn rate(&self) -> f64 {
        let (a, p) = self.counts();
        if p == 0 {
            0.0
        } else {
            a as f64 / p as f64
        }
    }
}

pub(crate) fn pooled_rate<'a>(adapters: impl IntoIterator<Item = &'a StepAdapter>) -> f64 {
    let (a, p) = adapters
        .into_iter()
        .map(StepAdapter::counts)
        .fold((0u64, 0u64), |(a, p), (x, y)| (a + x, p + y));
    if p == 0 {
        0.0
    } else {
        a as f64 / p as f64
    }
}

/// One random-walk Metropolis update of a scalar coordinate.
///
/// Returns the (possibly unchanged) coordinate and its log density.
#[inline]
pub(crate) fn metropolis_step<R, F>(
    rng: &mut R,
    adapter: &mut StepAdapter,
    current: f64,
    current_lp: f64,
    adapting: bool,
    target: f64,
    mut log_density: F,
) -> (f64, f64)
where
    R: Rng + ?Sized,
    F: FnMut(f64) -> f64,
{
    let noise: f64 = rng.sample(StandardNormal);
    let proposal = current + adapter.scale() * noise;
    let proposal_lp = log_density(proposal);
    let log_u = rng.random::<f64>().ln();
    let accepted = proposal_lp.is_finite() && (log_u < proposal_lp - current_lp || !current_lp.is_finite());
    adapter.record(accepted, adapting, target);
    if accepted {
        (proposal, proposal_lp)
    } else {
        (current, current_lp)
    }
}
