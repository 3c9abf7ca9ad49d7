//! Dose-only comparator: logistic toxicity in log dose and an Emax efficacy
//! curve in dose, with no PK information.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::{DoseCounts, Phase1Data};
use super::mcmc::{metropolis_step, BlockAcceptance, DrawMeta, McmcSettings, PosteriorDraws, StepAdapter};
use super::posterior::{binomial_eta_kernel, binomial_logit_kernel};
use super::prior::ComparatorPrior;
use crate::error::{domain, Error, Result};
use crate::pkpd::{efficacy_link, expit};

pub const COMPARATOR_BLOCKS: [&str; 5] = ["beta0", "beta1", "e_max", "ed50", "gamma"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparatorParams {
    pub beta0: f64,
    pub beta1: f64,
    pub e_max: f64,
    pub ed50: f64,
    pub gamma: f64,
}

impl ComparatorParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !(self.beta0.is_finite() && pos(self.beta1) && pos(self.e_max) && pos(self.ed50) && pos(self.gamma)) {
            return domain(format!("invalid comparator parameters {self:?}"));
        }
        Ok(())
    }

    /// `logit p = beta0 + beta1 ln d`.
    pub fn toxicity_logit(&self, dose: f64) -> f64 {
        self.beta0 + self.beta1 * dose.ln()
    }

    pub fn toxicity_prob(&self, dose: f64) -> f64 {
        expit(self.toxicity_logit(dose))
    }

    /// `eta(d) = e_max d^gamma / (ed50^gamma + d^gamma)`.
    pub fn effect(&self, dose: f64) -> f64 {
        self.e_max / (1.0 + (self.ed50 / dose).powf(self.gamma))
    }

    /// `q = 1 - exp(-eta(d))`.
    pub fn efficacy_prob(&self, dose: f64) -> f64 {
        efficacy_link(self.effect(dose))
    }
}

pub type ComparatorDraws = PosteriorDraws<ComparatorParams>;

fn decode(u: &[f64; 5]) -> ComparatorParams {
    ComparatorParams { beta0: u[0], beta1: u[1].exp(), e_max: u[2].exp(), ed50: u[3].exp(), gamma: u[4].exp() }
}

pub fn comparator_log_posterior(
    theta: &ComparatorParams,
    doses: &[f64],
    counts: &DoseCounts,
    prior: &ComparatorPrior,
    include_efficacy: bool,
) -> f64 {
    if theta.validate().is_err() {
        return f64::NEG_INFINITY;
    }
    let mut lp = prior.beta0.ln_pdf(theta.beta0)
        + prior.beta1.ln_pdf(theta.beta1)
        + prior.e_max.ln_pdf(theta.e_max)
        + prior.ed50.ln_pdf(theta.ed50)
        + prior.gamma.ln_pdf(theta.gamma);
    for (d, dose) in doses.iter().enumerate() {
        lp += binomial_logit_kernel(theta.toxicity_logit(*dose), counts.dlt[d], counts.n[d]);
        if include_efficacy {
            lp += binomial_eta_kernel(theta.effect(*dose), counts.eff[d], counts.n_eff[d]);
        }
    }
    lp
}

/// Posterior draws of the comparator; PK observations are ignored.
pub fn sample_comparator_posterior(
    data: &Phase1Data,
    prior: &ComparatorPrior,
    settings: &McmcSettings,
    include_efficacy: bool,
    seed: u64,
) -> Result<ComparatorDraws> {
    settings.validate()?;
    prior.validate()?;
    data.validate()?;
    let counts = data.counts();
    let doses = data.grid.amounts();

    let density = |u: &[f64; 5]| {
        let theta = decode(u);
        comparator_log_posterior(&theta, doses, &counts, prior, include_efficacy) + u[1] + u[2] + u[3] + u[4]
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = [
        prior.beta0.mean(),
        prior.beta1.mean().ln(),
        prior.e_max.mean().ln(),
        prior.ed50.mean().ln(),
        prior.gamma.mean().ln(),
    ];
    let mut current = density(&u);
    if !current.is_finite() {
        return Err(Error::Sampler("comparator initial state has zero density".into()));
    }
    let mut adapters: Vec<StepAdapter> = (0..5).map(|_| StepAdapter::new(0.5)).collect();
    let mut params = Vec::with_capacity(settings.retained());

    for iteration in 0..settings.iterations {
        let adapting = iteration < settings.burn_in;
        for j in 0..5 {
            let mut trial = u;
            let (x, lp) = metropolis_step(
                &mut rng,
                &mut adapters[j],
                u[j],
                current,
                adapting,
                settings.target_acceptance,
                |x| {
                    trial[j] = x;
                    density(&trial)
                },
            );
            u[j] = x;
            current = lp;
        }
        if settings.keeps(iteration) {
            params.push(decode(&u));
        }
    }

    Ok(PosteriorDraws {
        params,
        latents: Vec::new(),
        meta: DrawMeta {
            iterations: settings.iterations,
            burn_in: settings.burn_in,
            thin: settings.thin,
            seed,
            acceptance: adapters
                .iter()
                .zip(COMPARATOR_BLOCKS)
                .map(|(a, name)| BlockAcceptance { block: name.into(), rate: a.rate() })
                .collect(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_follow_definitions() {
        let th = ComparatorParams { beta0: -3.0, beta1: 1.0, e_max: 1.0, ed50: 10.0, gamma: 2.0 };
        assert!((th.toxicity_prob(3f64.exp()) - 0.5).abs() < 1e-12);
        assert!((th.effect(10.0) - 0.5).abs() < 1e-12);
        assert!((th.efficacy_prob(10.0) - (1.0 - (-0.5f64).exp())).abs() < 1e-12);
        let flat = ComparatorParams { beta1: 1e-300, ..th };
        assert!((flat.toxicity_prob(7.0) - flat.toxicity_prob(150.0)).abs() < 1e-15);
    }
}
