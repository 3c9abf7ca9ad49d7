//! Metropolis-within-Gibbs sampler for the PK/PD posterior.
//!
//! Every positive parameter is updated on the log scale (shape parameters as
//! `ln(alpha - 1)`), `beta0` on its natural scale, and each patient's
//! `(ln V_i, ln k_i)` one coordinate at a time. The population-level
//! conditional only needs `sum ln V`, `sum V`, `sum ln k`, `sum k` and the
//! total squared log-concentration residual, which are kept up to date as the
//! latents move, so a parameter update costs O(doses).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::{DoseCounts, Phase1Data};
use super::mcmc::{metropolis_step, pooled_rate, BlockAcceptance, DrawMeta, McmcSettings, PosteriorDraws, StepAdapter};
use super::posterior::{efficacy_loglik, gamma_population_term, log_prior, toxicity_loglik};
use super::prior::{HillShape, PriorSpec};
use crate::error::{Error, Result};
use crate::pkpd::{ModelParams, PatientPk, PdParams, PkPopulation, ToxicityLink};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Block names in coordinate order.
pub const PARAMETER_BLOCKS: [&str; 10] =
    ["alpha_v", "lambda_v", "alpha_k", "lambda_k", "sigma", "beta0", "beta1", "e_max", "ed50", "gamma"];

const BETA0: usize = 5;

pub type ModelDraws = PosteriorDraws<ModelParams<f64>>;

fn decode(u: &[f64]) -> ModelParams<f64> {
    let alpha_k = 1.0 + u[2].exp();
    let gamma = if u.len() > 9 { u[9].exp() } else { 2.0 / alpha_k };
    ModelParams {
        pk: PkPopulation { alpha_v: 1.0 + u[0].exp(), lambda_v: u[1].exp(), alpha_k, lambda_k: u[3].exp() },
        sigma: u[4].exp(),
        tox: ToxicityLink { beta0: u[BETA0], beta1: u[6].exp() },
        pd: PdParams { e_max: u[7].exp(), ed50: u[8].exp(), gamma },
    }
}

fn encode(theta: &ModelParams<f64>, free_hill: bool) -> Vec<f64> {
    let mut u = vec![
        (theta.pk.alpha_v - 1.0).ln(),
        theta.pk.lambda_v.ln(),
        (theta.pk.alpha_k - 1.0).ln(),
        theta.pk.lambda_k.ln(),
        theta.sigma.ln(),
        theta.tox.beta0,
        theta.tox.beta1.ln(),
        theta.pd.e_max.ln(),
        theta.pd.ed50.ln(),
    ];
    if free_hill {
        u.push(theta.pd.gamma.ln());
    }
    u
}

/// Parameter vector at the prior means (shapes at `1 + E[alpha - 1]`).
pub fn prior_mean_params(prior: &PriorSpec) -> ModelParams<f64> {
    let alpha_k = 1.0 + prior.alpha_k_minus_one.mean();
    let gamma = match prior.hill {
        HillShape::TiedToAlphaK => 2.0 / alpha_k,
        HillShape::Free { prior } => prior.mean().max(2.0 / alpha_k),
    };
    ModelParams {
        pk: PkPopulation {
            alpha_v: 1.0 + prior.alpha_v_minus_one.mean(),
            lambda_v: prior.lambda_v.mean(),
            alpha_k,
            lambda_k: prior.lambda_k.mean(),
        },
        sigma: prior.sigma.mean(),
        tox: ToxicityLink { beta0: prior.beta0.mean(), beta1: prior.beta1.mean() },
        pd: PdParams { e_max: prior.e_max.mean(), ed50: prior.ed50.mean(), gamma },
    }
}

struct PatientObs<'a> {
    log_dose: f64,
    times: &'a [f64],
    log_conc: &'a [f64],
}

impl PatientObs<'_> {
    #[inline]
    fn ssr(&self, ln_v: f64, k: f64) -> f64 {
        let intercept = self.log_dose - ln_v;
        self.times
            .iter()
            .zip(self.log_conc)
            .map(|(t, y)| {
                let r = y - (intercept - k * t);
                r * r
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct LatentStats {
    sum_ln_v: f64,
    sum_v: f64,
    sum_ln_k: f64,
    sum_k: f64,
    ssr: f64,
}

struct Target<'a> {
    patients: Vec<PatientObs<'a>>,
    doses: &'a [f64],
    counts: DoseCounts,
    n_obs: usize,
    prior: &'a PriorSpec,
    include_efficacy: bool,
}

impl Target<'_> {
    /// Log density of the full posterior as a function of the parameter
    /// coordinates, latents held fixed (includes the log-scale Jacobian).
    fn parameter_lp(&self, u: &[f64], stats: &LatentStats) -> f64 {
        let theta = decode(u);
        if theta.validate().is_err() {
            return f64::NEG_INFINITY;
        }
        let n = self.patients.len();
        let sigma = theta.sigma;
        let mut lp = -(self.n_obs as f64) * (0.5 * LN_2PI + sigma.ln()) - stats.ssr / (2.0 * sigma * sigma);
        lp += gamma_population_term(theta.pk.alpha_v, theta.pk.lambda_v, n, stats.sum_ln_v, stats.sum_v);
        lp += gamma_population_term(theta.pk.alpha_k, theta.pk.lambda_k, n, stats.sum_ln_k, stats.sum_k);
        lp += toxicity_loglik(&theta, self.doses, &self.counts);
        if self.include_efficacy {
            lp += efficacy_loglik(&theta, self.doses, &self.counts);
        }
        lp += log_prior(&theta, self.prior);
        let jacobian: f64 = u.iter().enumerate().filter(|(i, _)| *i != BETA0).map(|(_, x)| x).sum();
        lp + jacobian
    }

    /// Conditional log density of one patient's `(ln V, ln k)` (with Jacobian).
    #[inline]
    fn latent_lp(&self, i: usize, ln_v: f64, ln_k: f64, theta: &ModelParams<f64>) -> f64 {
        let v = ln_v.exp();
        let k = ln_k.exp();
        if !(v > 0.0 && v.is_finite() && k > 0.0 && k.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let ssr = self.patients[i].ssr(ln_v, k);
        -ssr / (2.0 * theta.sigma * theta.sigma) + theta.pk.alpha_v * ln_v - theta.pk.lambda_v * v
            + theta.pk.alpha_k * ln_k
            - theta.pk.lambda_k * k
    }
}

/// Draws from the joint posterior of the PK/PD model.
///
/// With no patients the chain samples the prior. Deterministic given `seed`.
pub fn sample_posterior(
    data: &Phase1Data,
    prior: &PriorSpec,
    settings: &McmcSettings,
    include_efficacy: bool,
    seed: u64,
) -> Result<ModelDraws> {
    settings.validate()?;
    prior.validate()?;
    data.validate()?;

    let free_hill = matches!(prior.hill, HillShape::Free { .. });
    let doses = data.grid.amounts();
    let target = Target {
        patients: data
            .patients
            .iter()
            .map(|p| PatientObs { log_dose: doses[p.dose_index].ln(), times: &p.times, log_conc: &p.log_conc })
            .collect(),
        doses,
        counts: data.counts(),
        n_obs: data.observation_count(),
        prior,
        include_efficacy,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = prior_mean_params(prior);
    let mut u = encode(&init, free_hill);
    let n = target.patients.len();
    let mut ln_v = vec![(init.pk.alpha_v / init.pk.lambda_v).ln(); n];
    let mut ln_k = vec![(init.pk.alpha_k / init.pk.lambda_k).ln(); n];
    let mut ssr: Vec<f64> = (0..n).map(|i| target.patients[i].ssr(ln_v[i], ln_k[i].exp())).collect();
    let mut stats = LatentStats {
        sum_ln_v: ln_v.iter().sum(),
        sum_v: ln_v.iter().map(|x| x.exp()).sum(),
        sum_ln_k: ln_k.iter().sum(),
        sum_k: ln_k.iter().map(|x| x.exp()).sum(),
        ssr: ssr.iter().sum(),
    };

    if !target.parameter_lp(&u, &stats).is_finite() {
        return Err(Error::Sampler("initial parameter vector has zero posterior density".into()));
    }

    let mut theta_adapt: Vec<StepAdapter> = (0..u.len()).map(|_| StepAdapter::new(0.3)).collect();
    let mut v_adapt: Vec<StepAdapter> = (0..n).map(|_| StepAdapter::new(0.2)).collect();
    let mut k_adapt: Vec<StepAdapter> = (0..n).map(|_| StepAdapter::new(0.2)).collect();

    let mut params = Vec::with_capacity(settings.retained());
    let mut latents = Vec::with_capacity(settings.retained());
    let goal = settings.target_acceptance;

    for iteration in 0..settings.iterations {
        let adapting = iteration < settings.burn_in;

        let theta = decode(&u);
        for i in 0..n {
            let mut current = target.latent_lp(i, ln_v[i], ln_k[i], &theta);

            let lk = ln_k[i];
            let (new_v, lp) = metropolis_step(&mut rng, &mut v_adapt[i], ln_v[i], current, adapting, goal, |x| {
                target.latent_lp(i, x, lk, &theta)
            });
            current = lp;
            if new_v != ln_v[i] {
                stats.sum_ln_v += new_v - ln_v[i];
                stats.sum_v += new_v.exp() - ln_v[i].exp();
                ln_v[i] = new_v;
            }

            let lv = ln_v[i];
            let (new_k, _) = metropolis_step(&mut rng, &mut k_adapt[i], ln_k[i], current, adapting, goal, |x| {
                target.latent_lp(i, lv, x, &theta)
            });
            if new_k != ln_k[i] {
                stats.sum_ln_k += new_k - ln_k[i];
                stats.sum_k += new_k.exp() - ln_k[i].exp();
                ln_k[i] = new_k;
            }

            let fresh = target.patients[i].ssr(ln_v[i], ln_k[i].exp());
            stats.ssr += fresh - ssr[i];
            ssr[i] = fresh;
        }
        // Re-sum to stop floating drift from the running updates.
        if iteration % 256 == 0 {
            stats.sum_ln_v = ln_v.iter().sum();
            stats.sum_v = ln_v.iter().map(|x| x.exp()).sum();
            stats.sum_ln_k = ln_k.iter().sum();
            stats.sum_k = ln_k.iter().map(|x| x.exp()).sum();
            stats.ssr = ssr.iter().sum();
        }

        let mut current = target.parameter_lp(&u, &stats);
        for j in 0..u.len() {
            let mut trial = u.clone();
            let (x, lp) = metropolis_step(&mut rng, &mut theta_adapt[j], u[j], current, adapting, goal, |x| {
                trial[j] = x;
                target.parameter_lp(&trial, &stats)
            });
            u[j] = x;
            current = lp;
        }

        if settings.keeps(iteration) {
            params.push(decode(&u));
            latents.push(
                ln_v.iter()
                    .zip(&ln_k)
                    .map(|(lv, lk)| PatientPk { v: lv.exp(), k: lk.exp() })
                    .collect(),
            );
        }
    }

    let mut acceptance: Vec<BlockAcceptance> = theta_adapt
        .iter()
        .zip(PARAMETER_BLOCKS)
        .map(|(a, name)| BlockAcceptance { block: name.to_string(), rate: a.rate() })
        .collect();
    if n > 0 {
        acceptance.push(BlockAcceptance { block: "latent_v".into(), rate: pooled_rate(&v_adapt) });
        acceptance.push(BlockAcceptance { block: "latent_k".into(), rate: pooled_rate(&k_adapt) });
    }

    Ok(PosteriorDraws {
        params,
        latents,
        meta: DrawMeta {
            iterations: settings.iterations,
            burn_in: settings.burn_in,
            thin: settings.thin,
            seed,
            acceptance,
        },
    })
}
