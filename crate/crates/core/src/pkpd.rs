//! Deterministic PK/PD mathematics.
//!
//! One-compartment IV kinetics with gamma-distributed patient volume `V` and
//! elimination rate `k`. Integrating the patient model over the gamma
//! population gives closed forms for the population concentration curve and
//! dose-level AUC. Toxicity is logistic in log AUC; efficacy is
//! `1 - exp(-eta)` where `eta` is the time-integrated sigmoid-Emax effect of
//! the population concentration.
//!
//! All dose arguments are physical amounts, not grid indices.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::scalar::Real;

/// Shapes closer than this to 1 are rejected by the population closed forms.
pub const SHAPE_MARGIN: f64 = 1e-9;

/// `gamma * alpha_k` within this distance of 2 uses the arctan closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct DoseGrid<T> {
    amounts: Vec<T>,
}

impl<T: Real> DoseGrid<T> {
    pub fn new(amounts: Vec<T>) -> Result<Self> {
        if amounts.len() < 2 {
            return domain(format!("dose grid needs at least 2 doses, got {}", amounts.len()));
        }
        if amounts.iter().any(|a| !(a.is_finite() && *a > T::zero())) {
            return domain("dose amounts must be finite and positive");
        }
        if amounts.windows(2).any(|w| w[1] <= w[0]) {
            return domain("dose amounts must be strictly increasing");
        }
        Ok(Self { amounts })
    }

    pub fn len(&self) -> usize {
        self.amounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amounts.is_empty()
    }

    pub fn amounts(&self) -> &[T] {
        &self.amounts
    }

    /// Amount at a zero-based index.
    pub fn amount(&self, index: usize) -> Option<T> {
        self.amounts.get(index).copied()
    }

    /// Zero-based index of an amount present in the grid.
    pub fn index_of(&self, amount: T) -> Option<usize> {
        let tol = T::epsilon() * T::lit(64.0);
        self.amounts.iter().position(|a| ((*a - amount) / *a).abs() <= tol)
    }
}

impl<T: Real> TryFrom<Vec<T>> for DoseGrid<T> {
    type Error = Error;

    fn try_from(value: Vec<T>) -> Result<Self> {
        Self::new(value)
    }
}

impl<T> From<DoseGrid<T>> for Vec<T> {
    fn from(grid: DoseGrid<T>) -> Self {
        grid.amounts
    }
}

/// Gamma population of patient PK parameters: `V ~ Gamma(alpha_v, lambda_v)`,
/// `k ~ Gamma(alpha_k, lambda_k)` (shape, rate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PkPopulation<T> {
    pub alpha_v: T,
    pub lambda_v: T,
    pub alpha_k: T,
    pub lambda_k: T,
}

impl<T: Real> PkPopulation<T> {
    pub fn new(alpha_v: T, lambda_v: T, alpha_k: T, lambda_k: T) -> Result<Self> {
        let pk = Self { alpha_v, lambda_v, alpha_k, lambda_k };
        pk.validate()?;
        Ok(pk)
    }

    pub fn validate(&self) -> Result<()> {
        let margin = T::lit(SHAPE_MARGIN);
        let all_finite = [self.alpha_v, self.lambda_v, self.alpha_k, self.lambda_k]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return domain("PK population parameters must be finite");
        }
        if !(self.alpha_v - T::one() > margin) {
            return domain(format!("alpha_v must exceed 1, got {}", self.alpha_v));
        }
        if !(self.alpha_k - T::one() > margin) {
            return domain(format!("alpha_k must exceed 1, got {}", self.alpha_k));
        }
        if !(self.lambda_v > T::zero() && self.lambda_k > T::zero()) {
            return domain("PK rate parameters must be positive");
        }
        Ok(())
    }

    /// `lambda_v / (alpha_v - 1)`, the population mean of `1 / V`.
    pub fn mean_inverse_volume(&self) -> T {
        self.lambda_v / (self.alpha_v - T::one())
    }
}

/// A single patient's one-compartment parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatientPk<T> {
    pub v: T,
    pub k: T,
}

impl<T: Real> PatientPk<T> {
    pub fn new(v: T, k: T) -> Result<Self> {
        let pk = Self { v, k };
        pk.validate()?;
        Ok(pk)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v.is_finite() && self.v > T::zero() && self.k.is_finite() && self.k > T::zero()) {
            return domain(format!("patient PK requires finite v > 0 and k > 0, got v={} k={}", self.v, self.k));
        }
        Ok(())
    }
}

/// Logistic link on log AUC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToxicityLink<T> {
    pub beta0: T,
    pub beta1: T,
}

impl<T: Real> ToxicityLink<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.beta0.is_finite() || !(self.beta1.is_finite() && self.beta1 > T::zero()) {
            return domain(format!("toxicity link needs finite beta0 and beta1 > 0, got beta1={}", self.beta1));
        }
        Ok(())
    }
}

/// Sigmoid Emax pharmacodynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdParams<T> {
    pub e_max: T,
    pub ed50: T,
    pub gamma: T,
}

impl<T: Real> PdParams<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: T| x.is_finite() && x > T::zero();
        if !(ok(self.e_max) && ok(self.ed50) && ok(self.gamma)) {
            return domain(format!(
                "PD parameters must be positive: e_max={} ed50={} gamma={}",
                self.e_max, self.ed50, self.gamma
            ));
        }
        Ok(())
    }
}

/// Complete dose-level parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub pk: PkPopulation<T>,
    pub tox: ToxicityLink<T>,
    pub pd: PdParams<T>,
    /// Log-scale SD of observed concentrations.
    pub sigma: T,
}

impl<T: Real> ModelParams<T> {
    pub fn validate(&self) -> Result<()> {
        self.pk.validate()?;
        self.tox.validate()?;
        self.pd.validate()?;
        if !(self.sigma.is_finite() && self.sigma > T::zero()) {
            return domain(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.pd.gamma * self.pk.alpha_k > T::one()) {
            return Err(Error::Divergent((self.pd.gamma * self.pk.alpha_k).as_f64()));
        }
        Ok(())
    }

    pub fn toxicity_prob(&self, dose: T) -> Result<T> {
        toxicity_prob(dose, &self.pk, &self.tox)
    }

    pub fn efficacy_prob(&self, dose: T) -> Result<T> {
        efficacy_prob(dose, &self.pk, &self.pd)
    }
}

fn check_dose<T: Real>(dose: T) -> Result<()> {
    if !(dose.is_finite() && dose > T::zero()) {
        return domain(format!("dose must be finite and positive, got {dose}"));
    }
    Ok(())
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t.is_finite() && t >= T::zero()) {
        return domain(format!("time must be finite and non-negative, got {t}"));
    }
    Ok(())
}

/// `c_i(t) = d / V * exp(-k t)`.
pub fn concentration_patient<T: Real>(dose: T, pk: &PatientPk<T>, t: T) -> Result<T> {
    check_dose(dose)?;
    check_time(t)?;
    pk.validate()?;
    Ok(dose / pk.v * (-pk.k * t).exp())
}

/// Mean of the patient curve over the gamma population:
/// `d lambda_v / (alpha_v - 1) * (lambda_k / (lambda_k + t))^alpha_k`.
pub fn concentration_population<T: Real>(dose: T, pk: &PkPopulation<T>, t: T) -> Result<T> {
    check_dose(dose)?;
    check_time(t)?;
    pk.validate()?;
    Ok(dose * pk.mean_inverse_volume() * (pk.lambda_k / (pk.lambda_k + t)).powf(pk.alpha_k))
}

/// Observation horizon for [`auc_patient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon<T> {
    Finite(T),
    Infinite,
}

/// Area under the patient curve on `[0, t_ref]`.
pub fn auc_patient<T: Real>(dose: T, pk: &PatientPk<T>, horizon: Horizon<T>) -> Result<T> {
    check_dose(dose)?;
    pk.validate()?;
    let total = dose / (pk.v * pk.k);
    match horizon {
        Horizon::Infinite => Ok(total),
        Horizon::Finite(t_ref) => {
            if !(t_ref >= T::zero()) || t_ref.is_nan() {
                return domain(format!("t_ref must be non-negative, got {t_ref}"));
            }
            if t_ref.is_infinite() {
                return Ok(total);
            }
            Ok(total * -(-pk.k * t_ref).exp_m1())
        }
    }
}

/// `log AUC(d) = log d + log lambda_v + log lambda_k - log(alpha_v - 1) - log(alpha_k - 1)`.
#[inline]
pub(crate) fn log_auc_unchecked<T: Real>(dose: T, pk: &PkPopulation<T>) -> T {
    dose.ln() + pk.lambda_v.ln() + pk.lambda_k.ln() - (pk.alpha_v - T::one()).ln() - (pk.alpha_k - T::one()).ln()
}

/// Dose-level AUC `d lambda_v lambda_k / ((alpha_v - 1)(alpha_k - 1))`.
pub fn auc_population<T: Real>(dose: T, pk: &PkPopulation<T>) -> Result<T> {
    check_dose(dose)?;
    pk.validate()?;
    Ok(dose * pk.mean_inverse_volume() * (pk.lambda_k / (pk.alpha_k - T::one())))
}

#[inline]
pub(crate) fn expit<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `logit p_d = beta0 + beta1 log AUC(d)`.
pub fn toxicity_prob<T: Real>(dose: T, pk: &PkPopulation<T>, tox: &ToxicityLink<T>) -> Result<T> {
    check_dose(dose)?;
    pk.validate()?;
    tox.validate()?;
    Ok(expit(tox.beta0 + tox.beta1 * log_auc_unchecked(dose, pk)))
}

/// Sigmoid Emax intensity of the population concentration at time `t`.
pub fn effect_intensity<T: Real>(dose: T, pk: &PkPopulation<T>, pd: &PdParams<T>, t: T) -> Result<T> {
    pd.validate()?;
    let c = concentration_population(dose, pk, t)?;
    Ok(emax_response(c, pd))
}

/// `e_max c^gamma / (ed50^gamma + c^gamma)`.
pub fn emax_response<T: Real>(c: T, pd: &PdParams<T>) -> T {
    if c <= T::zero() {
        return T::zero();
    }
    pd.e_max / (T::one() + (pd.ed50 / c).powf(pd.gamma))
}

/// `ln C(d)` with `C(d) = (d lambda_v lambda_k^alpha_k / (alpha_v - 1))^gamma / ed50^gamma`.
#[inline]
fn log_effect_scale<T: Real>(dose: T, pk: &PkPopulation<T>, pd: &PdParams<T>) -> T {
    pd.gamma
        * (dose.ln() + pk.lambda_v.ln() + pk.alpha_k * pk.lambda_k.ln() - (pk.alpha_v - T::one()).ln()
            - pd.ed50.ln())
}

/// How [`cumulative_effect`] evaluated the integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectMethod {
    ClosedForm,
    Quadrature,
}

/// Cumulative drug effect `eta(d) = int_0^inf r(t | d) dt`.
pub fn cumulative_effect<T: Real>(dose: T, pk: &PkPopulation<T>, pd: &PdParams<T>) -> Result<T> {
    cumulative_effect_with(dose, pk, pd, None).map(|(eta, _)| eta)
}

/// As [`cumulative_effect`] but lets the caller force the evaluation path
/// (`None` picks the closed form whenever `gamma * alpha_k == 2`).
pub fn cumulative_effect_with<T: Real>(
    dose: T,
    pk: &PkPopulation<T>,
    pd: &PdParams<T>,
    force: Option<EffectMethod>,
) -> Result<(T, EffectMethod)> {
    if !(dose.is_finite() && dose >= T::zero()) {
        return domain(format!("dose must be finite and non-negative, got {dose}"));
    }
    pk.validate()?;
    pd.validate()?;
    let m = pd.gamma * pk.alpha_k;
    if !(m > T::one()) {
        return Err(Error::Divergent(m.as_f64()));
    }
    let closed = (m - T::lit(2.0)).abs() <= T::lit(CLOSED_FORM_TOL);
    let method = match force {
        Some(EffectMethod::ClosedForm) if !closed => {
            return domain(format!("closed form requires gamma * alpha_k = 2, got {m}"));
        }
        Some(method) => method,
        None if closed => EffectMethod::ClosedForm,
        None => EffectMethod::Quadrature,
    };
    if dose == T::zero() {
        return Ok((T::zero(), method));
    }

    let log_c = log_effect_scale(dose, pk, pd);
    let eta = match method {
        EffectMethod::ClosedForm => {
            // sqrt(C) e_max (pi/2 - atan(lambda_k / sqrt(C))) = sqrt(C) e_max atan(sqrt(C) / lambda_k)
            let root_c = (log_c * T::lit(0.5)).exp();
            root_c * pd.e_max * (root_c / pk.lambda_k).atan()
        }
        EffectMethod::Quadrature => log_c.exp() * pd.e_max * effect_kernel_integral(log_c, pk.lambda_k, m)?,
    };
    Ok((eta, method))
}

/// `int_{lower}^inf dx / (x^m + C)`, `C = exp(log_c)`.
///
/// Adaptive Gauss–Kronrod on `[lower, X]` with `X = max(lower, (2C)^(1/m))`;
/// beyond `X`, `C / x^m <= 1/2` and the tail is the convergent series
/// `sum_n (-C)^n X^(1 - m(n+1)) / (m(n+1) - 1)`.
fn effect_kernel_integral<T: Real>(log_c: T, lower: T, m: T) -> Result<T> {
    let c = log_c.exp();
    let split = lower.max(((T::lit(2.0).ln() + log_c) / m).exp());
    let tol = Tolerance::default();

    let body = if split > lower {
        quadrature::integrate(|x: T| T::one() / (x.powf(m) + c), lower, split, tol)?.value
    } else {
        T::zero()
    };

    let ratio = -c * split.powf(-m);
    let lead = split.powf(T::one() - m);
    let mut power = T::one();
    let mut tail = T::zero();
    for n in 1..=2000usize {
        let term = power * lead / (m * T::lit(n as f64) - T::one());
        tail = tail + term;
        if term.abs() <= T::epsilon() * tail.abs() {
            break;
        }
        power = power * ratio;
        if n == 2000 {
            return Err(Error::Quadrature("tail series did not converge".into()));
        }
    }
    Ok(body + tail)
}

/// `q_d = 1 - exp(-eta(d))`.
pub fn efficacy_prob<T: Real>(dose: T, pk: &PkPopulation<T>, pd: &PdParams<T>) -> Result<T> {
    let eta = cumulative_effect(dose, pk, pd)?;
    Ok(efficacy_link(eta))
}

/// The efficacy link `h(eta) = 1 - exp(-eta)`.
#[inline]
pub fn efficacy_link<T: Real>(eta: T) -> T {
    -(-eta).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, LN_2, PI};

    fn sim2_pk() -> PkPopulation<f64> {
        PkPopulation::new(10.0, 1.0, 9.0, 1.5).unwrap()
    }

    fn unit_pd() -> PdParams<f64> {
        PdParams { e_max: 1.0, ed50: 1.0, gamma: 1.0 }
    }

    #[test]
    fn patient_concentration_examples() {
        let pk = PatientPk::new(10.0, 0.5).unwrap();
        assert_eq!(concentration_patient(30.0, &pk, 0.0).unwrap(), 3.0);
        let c2 = concentration_patient(30.0, &pk, 2.0).unwrap();
        assert!((c2 - 3.0 * (-1f64).exp()).abs() < 1e-12);
        assert!((c2 - 1.10364).abs() < 1e-5);
        let slow = PatientPk::<f64>::new(10.0, 1e-12).unwrap();
        assert!((concentration_patient(30.0, &slow, 1.0).unwrap() - 3.0).abs() < 1e-10);
        assert!(concentration_patient(-1.0, &pk, 0.0).is_err());
        assert!(concentration_patient(30.0, &pk, f64::NAN).is_err());
        assert!(PatientPk::new(0.0, 1.0).is_err());
    }

    #[test]
    fn population_concentration_examples() {
        let pk = PkPopulation::<f64>::new(10.0, 1.0, 9.0, 1.5).unwrap();
        assert!((concentration_population(60.0, &pk, 0.0).unwrap() - 60.0 / 9.0).abs() < 1e-12);
        let c = concentration_population(60.0, &pk, 1.5).unwrap();
        assert!((c - 60.0 / 9.0 * 0.5f64.powi(9)).abs() < 1e-15);
        assert!((c - 0.013021).abs() < 1e-6);
        assert!(concentration_population(60.0, &pk, 1e12).unwrap() < 1e-80);
        let bad = PkPopulation { alpha_v: 1.0, ..pk };
        assert!(concentration_population(60.0, &bad, 0.0).is_err());
    }

    #[test]
    fn patient_auc_examples() {
        let pk = PatientPk::<f64>::new(10.0, 0.5).unwrap();
        assert!((auc_patient(30.0, &pk, Horizon::Infinite).unwrap() - 6.0).abs() < 1e-12);
        let a = auc_patient(30.0, &pk, Horizon::Finite(2.0)).unwrap();
        assert!((a - 6.0 * (1.0 - (-1f64).exp())).abs() < 1e-12);
        assert!((a - 3.79272).abs() < 1e-5);
        assert_eq!(auc_patient(30.0, &pk, Horizon::Finite(0.0)).unwrap(), 0.0);
        assert!(auc_patient(0.0, &pk, Horizon::Infinite).is_err());
        assert!(auc_patient(30.0, &pk, Horizon::Finite(-1.0)).is_err());
    }

    #[test]
    fn population_auc_table_row() {
        let pk = sim2_pk();
        let expected = [0.3125, 0.625, 1.25, 1.875, 2.5];
        for (d, e) in [15.0, 30.0, 60.0, 90.0, 120.0].iter().zip(expected) {
            assert!((auc_population(*d, &pk).unwrap() - e).abs() < 1e-12);
        }
        let pk2 = PkPopulation::<f64>::new(5.0, 1.0, 4.0, 1.0).unwrap();
        assert!((auc_population(30.0, &pk2).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(auc_population(120.0, &pk).unwrap(), 2.0 * auc_population(60.0, &pk).unwrap());
        let degenerate = PkPopulation { alpha_k: 1.0 + 1e-10, ..pk };
        assert!(auc_population(60.0, &degenerate).is_err());
    }

    #[test]
    fn toxicity_examples() {
        // Choose PK so that AUC(d) = e^3 exactly: d lambda_v lambda_k / (1 * 1) with alpha's = 2.
        let pk = PkPopulation::new(2.0, 1.0, 2.0, 1.0).unwrap();
        let tox = ToxicityLink { beta0: -3.0, beta1: 1.0 };
        let d = 3f64.exp();
        assert!((toxicity_prob(d, &pk, &tox).unwrap() - 0.5).abs() < 1e-12);
        let p1 = toxicity_prob(1.0, &pk, &tox).unwrap();
        assert!((p1 - 0.04743).abs() < 1e-5);
        let flat = ToxicityLink { beta0: -3.0, beta1: 1e-300 };
        assert!((toxicity_prob(500.0, &pk, &flat).unwrap() - expit(-3.0)).abs() < 1e-15);
        assert!(toxicity_prob(1.0, &pk, &ToxicityLink { beta0: 0.0, beta1: 0.0 }).is_err());
    }

    #[test]
    fn intensity_examples() {
        let pd = PdParams::<f64> { e_max: 1.0, ed50: 1.0, gamma: 2.0 };
        assert!((emax_response(2.0, &pd) - 0.8).abs() < 1e-12);
        assert!((emax_response(1.0, &pd) - 0.5).abs() < 1e-12);
        assert_eq!(emax_response(0.0, &pd), 0.0);
        // c(0|d) = d lambda_v / (alpha_v - 1) = 2 with these values.
        let pk = PkPopulation::new(2.0, 1.0, 2.0, 1.0).unwrap();
        let r0 = effect_intensity(2.0, &pk, &pd, 0.0).unwrap();
        assert!((r0 - 0.8).abs() < 1e-12);
        assert!(effect_intensity(2.0, &pk, &pd, 5.0).unwrap() < r0);
    }

    #[test]
    fn cumulative_effect_examples() {
        let pk = PkPopulation::new(2.0, 1.0, 2.0, 1.0).unwrap();
        let pd = unit_pd();
        let (eta, method) = cumulative_effect_with(1.0, &pk, &pd, None).unwrap();
        assert_eq!(method, EffectMethod::ClosedForm);
        assert!((eta - FRAC_PI_4).abs() < 1e-14);
        let (eta_q, _) = cumulative_effect_with(1.0, &pk, &pd, Some(EffectMethod::Quadrature)).unwrap();
        assert!((eta_q - FRAC_PI_4).abs() / FRAC_PI_4 < 1e-8);

        let eta4 = cumulative_effect(4.0, &pk, &pd).unwrap();
        // C(4) = 4 with gamma = 1.
        let expected = 2.0 * (PI / 2.0 - 0.5f64.atan());
        assert!((eta4 - expected).abs() < 1e-12);
        assert!((eta4 - 2.21430).abs() < 1e-5);

        assert_eq!(cumulative_effect(0.0, &pk, &pd).unwrap(), 0.0);
        let divergent = PdParams { gamma: 0.5, ..pd };
        assert!(matches!(cumulative_effect(1.0, &pk, &divergent), Err(Error::Divergent(_))));
    }

    #[test]
    fn efficacy_examples() {
        assert_eq!(efficacy_link(0.0), 0.0);
        assert!((efficacy_link(LN_2) - 0.5).abs() < 1e-15);
        let pk = PkPopulation::new(2.0, 1.0, 2.0, 1.0).unwrap();
        let q = efficacy_prob(1.0, &pk, &unit_pd()).unwrap();
        assert!((q - (1.0 - (-FRAC_PI_4).exp())).abs() < 1e-14);
        assert!((q - 0.54406).abs() < 1e-5);
        assert!((1.0 - efficacy_link(1e6)) <= 1e-6);
    }

    #[test]
    fn grid_validation_and_lookup() {
        assert!(DoseGrid::new(vec![10.0]).is_err());
        assert!(DoseGrid::new(vec![10.0, 10.0]).is_err());
        assert!(DoseGrid::new(vec![0.0, 10.0]).is_err());
        let g = DoseGrid::new(vec![15.0, 30.0, 60.0]).unwrap();
        assert_eq!(g.index_of(30.0), Some(1));
        assert_eq!(g.index_of(31.0), None);
        assert_eq!(g.amount(2), Some(60.0));
    }

    #[test]
    fn single_precision_paths() {
        let pk = PkPopulation::<f32>::new(10.0, 1.0, 9.0, 1.5).unwrap();
        assert!((auc_population(60.0f32, &pk).unwrap() - 1.25).abs() < 1e-6);
        let pk = PkPopulation::<f32>::new(2.0, 1.0, 3.0, 1.0).unwrap();
        let pd = PdParams { e_max: 1.0f32, ed50: 1.0, gamma: 1.0 };
        let eta = cumulative_effect(2.0f32, &pk, &pd).unwrap();
        assert!(eta.is_finite() && eta > 0.0);
    }
}
