//! Joint log posterior of the PK/PD model.
//!
//! Terms: normal log-concentration likelihood given each patient's `(V_i, k_i)`,
//! gamma population densities of the latents, per-dose binomial kernels for
//! toxicity and (optionally) efficacy, and the prior. Binomial coefficients are
//! dropped; they do not depend on the parameters.

use statrs::function::gamma::ln_gamma;

use super::data::{DoseCounts, Phase1Data};
use super::prior::{HillShape, PriorSpec};
use crate::error::{domain, Result};
use crate::pkpd::{self, ModelParams, PatientPk};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln expit(x)`.
#[inline]
pub(crate) fn ln_expit(x: f64) -> f64 {
    -softplus(-x)
}

/// `ln(1 - expit(x))`.
#[inline]
pub(crate) fn ln_one_minus_expit(x: f64) -> f64 {
    -softplus(x)
}

/// Binomial kernel `y ln p + (n - y) ln(1 - p)` from a logit.
#[inline]
pub(crate) fn binomial_logit_kernel(logit: f64, y: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    if y > 0 {
        acc += y as f64 * ln_expit(logit);
    }
    if n > y {
        acc += (n - y) as f64 * ln_one_minus_expit(logit);
    }
    acc
}

/// Binomial kernel for `q = 1 - exp(-eta)`: `ln q = ln(-expm1(-eta))`, `ln(1 - q) = -eta`.
#[inline]
pub(crate) fn binomial_eta_kernel(eta: f64, z: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut acc = -((n - z) as f64) * eta;
    if z > 0 {
        let ln_q = (-(-eta).exp_m1()).ln();
        acc += z as f64 * ln_q;
    }
    acc
}

/// Gamma log density summed over `n` points given `sum ln x` and `sum x`.
#[inline]
pub(crate) fn gamma_population_term(shape: f64, rate: f64, n: usize, sum_ln: f64, sum: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    n as f64 * (shape * rate.ln() - ln_gamma(shape)) + (shape - 1.0) * sum_ln - rate * sum
}

/// Whether the Hill coefficient is consistent with the prior's tying rule.
pub(crate) fn hill_consistent(theta: &ModelParams<f64>, prior: &PriorSpec) -> bool {
    match prior.hill {
        HillShape::TiedToAlphaK => {
            let tied = 2.0 / theta.pk.alpha_k;
            (theta.pd.gamma - tied).abs() <= 1e-9 * tied
        }
        HillShape::Free { .. } => true,
    }
}

/// `ln g(theta)`.
pub fn log_prior(theta: &ModelParams<f64>, prior: &PriorSpec) -> f64 {
    let mut lp = prior.alpha_v_minus_one.ln_pdf(theta.pk.alpha_v - 1.0)
        + prior.lambda_v.ln_pdf(theta.pk.lambda_v)
        + prior.alpha_k_minus_one.ln_pdf(theta.pk.alpha_k - 1.0)
        + prior.lambda_k.ln_pdf(theta.pk.lambda_k)
        + prior.sigma.ln_pdf(theta.sigma)
        + prior.beta0.ln_pdf(theta.tox.beta0)
        + prior.beta1.ln_pdf(theta.tox.beta1)
        + prior.e_max.ln_pdf(theta.pd.e_max)
        + prior.ed50.ln_pdf(theta.pd.ed50);
    if let HillShape::Free { prior: hill } = prior.hill {
        lp += hill.ln_pdf(theta.pd.gamma);
    }
    lp
}

/// Per-dose toxicity log likelihood.
pub(crate) fn toxicity_loglik(theta: &ModelParams<f64>, doses: &[f64], counts: &DoseCounts) -> f64 {
    doses
        .iter()
        .enumerate()
        .filter(|(d, _)| counts.n[*d] > 0)
        .map(|(d, dose)| {
            let logit = theta.tox.beta0 + theta.tox.beta1 * pkpd::log_auc_unchecked(*dose, &theta.pk);
            binomial_logit_kernel(logit, counts.dlt[d], counts.n[d])
        })
        .sum()
}

/// Per-dose efficacy log likelihood; `-inf` if the effect integral fails.
pub(crate) fn efficacy_loglik(theta: &ModelParams<f64>, doses: &[f64], counts: &DoseCounts) -> f64 {
    let mut acc = 0.0;
    for (d, dose) in doses.iter().enumerate() {
        if counts.n_eff[d] == 0 {
            continue;
        }
        match pkpd::cumulative_effect(*dose, &theta.pk, &theta.pd) {
            Ok(eta) => acc += binomial_eta_kernel(eta, counts.eff[d], counts.n_eff[d]),
            Err(_) => return f64::NEG_INFINITY,
        }
    }
    acc
}

/// Joint log posterior (up to the normalising constant).
///
/// Returns `-inf` for parameters outside the support. Fails only when the
/// latent list is not aligned with the patients.
pub fn log_posterior(
    theta: &ModelParams<f64>,
    latents: &[PatientPk<f64>],
    data: &Phase1Data,
    prior: &PriorSpec,
    include_efficacy: bool,
) -> Result<f64> {
    if latents.len() != data.patients.len() {
        return domain(format!("{} latents for {} patients", latents.len(), data.patients.len()));
    }
    if theta.validate().is_err() || !hill_consistent(theta, prior) {
        return Ok(f64::NEG_INFINITY);
    }
    if latents.iter().any(|l| l.validate().is_err()) {
        return Ok(f64::NEG_INFINITY);
    }

    let sigma = theta.sigma;
    let mut lp = 0.0;
    for (patient, latent) in data.patients.iter().zip(latents) {
        let dose = data.grid.amounts()[patient.dose_index];
        let intercept = (dose / latent.v).ln();
        for (t, y) in patient.times.iter().zip(&patient.log_conc) {
            let z = (y - (intercept - latent.k * t)) / sigma;
            lp += -0.5 * LN_2PI - sigma.ln() - 0.5 * z * z;
        }
        lp += gamma_population_term(theta.pk.alpha_v, theta.pk.lambda_v, 1, latent.v.ln(), latent.v);
        lp += gamma_population_term(theta.pk.alpha_k, theta.pk.lambda_k, 1, latent.k.ln(), latent.k);
    }

    let counts = data.counts();
    let doses = data.grid.amounts();
    lp += toxicity_loglik(theta, doses, &counts);
    if include_efficacy {
        lp += efficacy_loglik(theta, doses, &counts);
    }
    lp += log_prior(theta, prior);
    Ok(lp)
}
