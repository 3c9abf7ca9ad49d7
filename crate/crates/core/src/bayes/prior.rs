//! Prior distributions for the PK/PD model and the dose-only comparator.
//!
//! Second parameters of `Normal` and `LogNormal` are variances (of the
//! variable and of its logarithm respectively); gamma distributions use
//! shape/rate.

use rand::Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dist {
    Gamma { shape: f64, rate: f64 },
    Normal { mean: f64, variance: f64 },
    LogNormal { mu: f64, variance: f64 },
}

impl Dist {
    pub fn gamma(shape: f64, rate: f64) -> Self {
        Dist::Gamma { shape, rate }
    }

    pub fn normal(mean: f64, variance: f64) -> Self {
        Dist::Normal { mean, variance }
    }

    pub fn log_normal(mu: f64, variance: f64) -> Self {
        Dist::LogNormal { mu, variance }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Dist::Gamma { shape, rate } => shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite(),
            Dist::Normal { mean, variance } | Dist::LogNormal { mu: mean, variance } => {
                mean.is_finite() && variance > 0.0 && variance.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid prior hyperparameters {self:?}")))
        }
    }

    pub fn positive_support(&self) -> bool {
        !matches!(self, Dist::Normal { .. })
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            Dist::Gamma { shape, rate } => {
                if !(x > 0.0) || !x.is_finite() {
                    return f64::NEG_INFINITY;
                }
                shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
            }
            Dist::Normal { mean, variance } => {
                if !x.is_finite() {
                    return f64::NEG_INFINITY;
                }
                let z = x - mean;
                -0.5 * (LN_2PI + variance.ln()) - z * z / (2.0 * variance)
            }
            Dist::LogNormal { mu, variance } => {
                if !(x > 0.0) || !x.is_finite() {
                    return f64::NEG_INFINITY;
                }
                let lx = x.ln();
                let z = lx - mu;
                -lx - 0.5 * (LN_2PI + variance.ln()) - z * z / (2.0 * variance)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Dist::Gamma { shape, rate } => shape / rate,
            Dist::Normal { mean, .. } => mean,
            Dist::LogNormal { mu, variance } => (mu + 0.5 * variance).exp(),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Dist::Gamma { shape, rate } => shape / (rate * rate),
            Dist::Normal { variance, .. } => variance,
            Dist::LogNormal { mu, variance } => (variance.exp() - 1.0) * (2.0 * mu + variance).exp(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate).expect("validated gamma").sample(rng),
            Dist::Normal { mean, variance } => Normal::new(mean, variance.sqrt()).expect("validated normal").sample(rng),
            Dist::LogNormal { mu, variance } => {
                LogNormal::new(mu, variance.sqrt()).expect("validated lognormal").sample(rng)
            }
        }
    }
}

/// Treatment of the Hill coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum HillShape {
    /// `gamma = 2 / alpha_k` on every draw, so the arctan closed form applies.
    TiedToAlphaK,
    /// Free parameter with its own prior; the effect integral uses quadrature.
    Free { prior: Dist },
}

/// Prior of the PK/PD model. The two shape priors are on `alpha - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    pub alpha_v_minus_one: Dist,
    pub lambda_v: Dist,
    pub alpha_k_minus_one: Dist,
    pub lambda_k: Dist,
    pub sigma: Dist,
    pub beta0: Dist,
    pub beta1: Dist,
    pub e_max: Dist,
    pub ed50: Dist,
    pub hill: HillShape,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            alpha_v_minus_one: Dist::gamma(4.0, 1.0),
            lambda_v: Dist::gamma(1.0, 1.0),
            alpha_k_minus_one: Dist::gamma(3.0, 1.0),
            lambda_k: Dist::gamma(1.0, 1.0),
            sigma: Dist::gamma(3.0, 3.0),
            beta0: Dist::normal(-3.0, 10.0),
            beta1: Dist::log_normal(0.0, 1.0),
            e_max: Dist::log_normal(-1.0, 0.5),
            ed50: Dist::gamma(20.0, 0.5),
            hill: HillShape::TiedToAlphaK,
        }
    }
}

impl PriorSpec {
    /// Free-Hill variant with the comparator's `Gamma(0.1, 0.1)` prior.
    pub fn with_free_hill() -> Self {
        Self { hill: HillShape::Free { prior: Dist::gamma(0.1, 0.1) }, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha_v_minus_one", self.alpha_v_minus_one),
            ("lambda_v", self.lambda_v),
            ("alpha_k_minus_one", self.alpha_k_minus_one),
            ("lambda_k", self.lambda_k),
            ("sigma", self.sigma),
            ("beta1", self.beta1),
            ("e_max", self.e_max),
            ("ed50", self.ed50),
        ];
        for (name, dist) in positive {
            dist.validate()?;
            if !dist.positive_support() {
                return Err(Error::Config(format!("prior for {name} must have positive support")));
            }
        }
        self.beta0.validate()?;
        if let HillShape::Free { prior } = self.hill {
            prior.validate()?;
            if !prior.positive_support() {
                return Err(Error::Config("prior for gamma must have positive support".into()));
            }
        }
        Ok(())
    }
}

/// Prior of the dose-only logistic + Emax comparator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparatorPrior {
    pub beta0: Dist,
    pub beta1: Dist,
    pub e_max: Dist,
    pub ed50: Dist,
    pub gamma: Dist,
}

impl Default for ComparatorPrior {
    fn default() -> Self {
        Self {
            beta0: Dist::normal(-3.0, 100.0),
            beta1: Dist::log_normal(-1.0, 2.0),
            e_max: Dist::log_normal(-1.0, 0.5),
            ed50: Dist::gamma(10.0, 0.1),
            gamma: Dist::gamma(0.1, 0.1),
        }
    }
}

impl ComparatorPrior {
    pub fn validate(&self) -> Result<()> {
        self.beta0.validate()?;
        for (name, dist) in [("beta1", self.beta1), ("e_max", self.e_max), ("ed50", self.ed50), ("gamma", self.gamma)] {
            dist.validate()?;
            if !dist.positive_support() {
                return Err(Error::Config(format!("comparator prior for {name} must have positive support")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_densities_match_closed_forms() {
        // Gamma(2, 3) at 1: 2 ln 3 - ln Gamma(2) + ln 1 - 3
        assert!((Dist::gamma(2.0, 3.0).ln_pdf(1.0) - (2.0 * 3f64.ln() - 3.0)).abs() < 1e-12);
        let n = Dist::normal(-3.0, 10.0).ln_pdf(-1.0);
        assert!((n - (-0.5 * (2.0 * std::f64::consts::PI * 10.0).ln() - 4.0 / 20.0)).abs() < 1e-12);
        let ln = Dist::log_normal(0.0, 1.0).ln_pdf(1.0);
        assert!((ln + 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
        assert_eq!(Dist::gamma(2.0, 1.0).ln_pdf(-1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn sample_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dist in [Dist::gamma(4.0, 1.0), Dist::normal(-3.0, 10.0), Dist::log_normal(-1.0, 0.5)] {
            let n = 200_000;
            let mean = (0..n).map(|_| dist.sample(&mut rng)).sum::<f64>() / n as f64;
            let se = (dist.variance() / n as f64).sqrt();
            assert!((mean - dist.mean()).abs() < 4.0 * se, "{dist:?}: {mean} vs {}", dist.mean());
        }
    }

    #[test]
    fn default_priors_validate() {
        PriorSpec::default().validate().unwrap();
        PriorSpec::with_free_hill().validate().unwrap();
        ComparatorPrior::default().validate().unwrap();
        let bad = PriorSpec { sigma: Dist::normal(1.0, 1.0), ..PriorSpec::default() };
        assert!(bad.validate().is_err());
    }
}
