use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scenario::{draw_patient, ArmTruth, Scenario};
use crate::bayes::comparator::sample_comparator_posterior;
use crate::bayes::curves::{dose_curves, DoseCurves};
use crate::bayes::data::Phase1Data;
use crate::bayes::mcmc::McmcSettings;
use crate::bayes::prior::{ComparatorPrior, PriorSpec};
use crate::bayes::sampler::sample_posterior;
use crate::error::{Error, Result};
use crate::phase1::{graduate, next_dose, phase1_arms, select_with_utility, Decision, Graduation, Phase1Config};
use crate::phase2::{
    bar_probabilities, equal_split, randomize_cohort, select_arm, ArmSelection, ArmState, Outcome, Phase2Config,
};
use crate::rng::{derive_seed, stream};

/// Which dose-response model drives phase I.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignModel {
    /// PK/PD-integrated model.
    #[default]
    Pedoop,
    /// Dose-only logistic toxicity with Emax efficacy.
    LogitEmax,
}

/// Phase II size that reproduces the tabulated seamless-study enrolment.
pub const SIMULATION2_PHASE2_N: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrialConfig {
    pub model: DesignModel,
    pub prior: PriorSpec,
    pub comparator_prior: ComparatorPrior,
    pub phase1: Phase1Config,
    pub phase2: Phase2Config,
    pub mcmc: McmcSettings,
    /// Run the randomized phase II after graduation.
    pub seamless: bool,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            model: DesignModel::Pedoop,
            prior: PriorSpec::default(),
            comparator_prior: ComparatorPrior::default(),
            phase1: Phase1Config::default(),
            phase2: Phase2Config::default(),
            mcmc: McmcSettings::default(),
            seamless: true,
        }
    }
}

impl TrialConfig {
    /// Phase I only study: p_T = pi_T = 0.3, pi_E = 0.2, p* = q* = 0.6.
    pub fn simulation1() -> Self {
        Self {
            phase1: Phase1Config { p_t: 0.3, pi_t: 0.3, pi_e: 0.2, p_star: 0.6, q_star: 0.6, ..Phase1Config::default() },
            mcmc: McmcSettings::desk(),
            seamless: false,
            ..Self::default()
        }
    }

    /// Seamless study as tabulated: p_T = pi_T = pi_E = 0.2, p** = 0.7,
    /// q** = 0.9 and a 60-patient phase II in cohorts of 10.
    pub fn simulation2() -> Self {
        Self {
            phase1: Phase1Config { p_t: 0.2, pi_t: 0.2, pi_e: 0.2, p_star: 0.6, q_star: 0.6, ..Phase1Config::default() },
            phase2: Phase2Config { max_n: SIMULATION2_PHASE2_N, ..Phase2Config::default() },
            mcmc: McmcSettings::desk(),
            seamless: true,
            ..Self::default()
        }
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        scenario.validate()?;
        self.phase1.validate(scenario.grid.len())?;
        self.mcmc.validate()?;
        self.prior.validate()?;
        self.comparator_prior.validate()?;
        if self.seamless {
            self.phase2.validate()?;
            if scenario.control.is_none() {
                return Err(Error::Config(format!("scenario '{}' has no control arm for phase II", scenario.label)));
            }
        }
        Ok(())
    }
}

/// Posterior toxicity and efficacy curves under the configured model.
pub fn fit_curves(data: &Phase1Data, cfg: &TrialConfig, include_efficacy: bool, seed: u64) -> Result<DoseCurves> {
    fit_curves_with(data, cfg.model, &cfg.prior, &cfg.comparator_prior, &cfg.mcmc, include_efficacy, seed)
}

pub fn fit_curves_with(
    data: &Phase1Data,
    model: DesignModel,
    prior: &PriorSpec,
    comparator_prior: &ComparatorPrior,
    mcmc: &McmcSettings,
    include_efficacy: bool,
    seed: u64,
) -> Result<DoseCurves> {
    match model {
        DesignModel::Pedoop => dose_curves(&sample_posterior(data, prior, mcmc, include_efficacy, seed)?, &data.grid),
        DesignModel::LogitEmax => dose_curves(
            &sample_comparator_posterior(data, comparator_prior, mcmc, include_efficacy, seed)?,
            &data.grid,
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase1Outcome {
    pub data: Phase1Data,
    /// Decision taken after each cohort, in order.
    pub decisions: Vec<Decision>,
    pub terminated: bool,
    /// Graduation diagnostics; `None` when the trial terminated for safety.
    pub graduation: Option<Graduation>,
    pub graduates: Vec<usize>,
    /// The single dose chosen by posterior utility among the graduates.
    pub selected: Option<usize>,
}

impl Phase1Outcome {
    pub fn patients_per_dose(&self) -> Vec<usize> {
        self.data.counts().n
    }
}

/// Cohort loop: escalation posterior without efficacy after each cohort,
/// one efficacy-inclusive fit at the end for graduation.
pub fn simulate_phase1(scenario: &Scenario, cfg: &TrialConfig, seed: u64) -> Result<Phase1Outcome> {
    let p1 = &cfg.phase1;
    let mut patients_rng = stream(seed, 0);
    let mut data = Phase1Data::new(scenario.grid.clone());
    let mut decisions = Vec::new();
    let mut current = p1.start_index();
    let mut terminated = false;
    let mut cohort = 0u64;

    while data.patients.len() < p1.max_n {
        let size = p1.cohort_size.min(p1.max_n - data.patients.len());
        for _ in 0..size {
            data.patients.push(draw_patient(scenario, current, &mut patients_rng)?);
        }
        cohort += 1;
        if data.patients.len() >= p1.max_n {
            break;
        }
        let curves = fit_curves(&data, cfg, false, derive_seed(seed, 1000 + cohort))?;
        let report = next_dose(current, &data.counts(), &curves.toxicity, p1)?;
        decisions.push(report.decision);
        match report.decision.dose() {
            Some(d) => current = d,
            None => {
                terminated = true;
                break;
            }
        }
    }

    if terminated {
        return Ok(Phase1Outcome { data, decisions, terminated, graduation: None, graduates: vec![], selected: None });
    }
    let curves = fit_curves(&data, cfg, true, derive_seed(seed, 1))?;
    let graduation = graduate(&curves, p1);
    let graduates = graduation.doses.clone();
    let selected =
        select_with_utility(&graduates, &data, &cfg.phase2.weights, cfg.phase2.bar_draws, derive_seed(seed, 2))?;
    Ok(Phase1Outcome { data, decisions, terminated, graduation: Some(graduation), graduates, selected })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase2Outcome {
    /// Control first (arm id 0), then graduates as arm id = dose index + 1.
    pub arms: Vec<ArmState>,
    /// Randomization probabilities used for each adaptive cohort.
    pub xi_history: Vec<Vec<f64>>,
    pub selection: ArmSelection,
}

impl Phase2Outcome {
    /// Zero-based dose index of the recommendation.
    pub fn recommended_dose(&self) -> Option<usize> {
        self.selection.recommended.map(|r| self.arms[r].arm_id - 1)
    }

    pub fn candidate_doses(&self) -> Vec<usize> {
        self.selection.candidates.iter().map(|&r| self.arms[r].arm_id - 1).collect()
    }

    /// Treatment arm with the largest final `xi` (lower dose on ties).
    pub fn top_dose(&self) -> Option<usize> {
        (0..self.arms.len())
            .filter(|&r| self.arms[r].arm_id != 0)
            .fold(None, |best: Option<usize>, r| match best {
                Some(b) if self.selection.xi[b] >= self.selection.xi[r] => Some(b),
                _ => Some(r),
            })
            .map(|r| self.arms[r].arm_id - 1)
    }
}

fn enroll<R: Rng + ?Sized>(arm: &mut ArmState, truth: ArmTruth, n: usize, rng: &mut R) {
    for _ in 0..n {
        let tox = rng.random::<f64>() < truth.tox;
        let eff = rng.random::<f64>() < truth.eff;
        arm.record(Outcome::from_flags(tox, eff));
    }
}

/// Run-in with equal allocation, then adaptive cohorts until `max_n`, then
/// final selection. Returns `None` when there is nothing to randomize.
pub fn simulate_phase2(
    graduates: &[usize],
    scenario: &Scenario,
    cfg: &Phase2Config,
    phase1: Option<&[ArmState]>,
    seed: u64,
) -> Result<Option<Phase2Outcome>> {
    if graduates.is_empty() {
        return Ok(None);
    }
    let control = scenario
        .control
        .ok_or_else(|| Error::Config(format!("scenario '{}' has no control arm", scenario.label)))?;
    let mut arms: Vec<ArmState> = std::iter::once(ArmState::new(0))
        .chain(graduates.iter().map(|&d| ArmState::new(d + 1)))
        .collect();
    let truths: Vec<ArmTruth> =
        std::iter::once(control).chain(graduates.iter().map(|&d| scenario.truth(d))).collect();
    let mut rng = stream(seed, 0);

    let first = cfg.cohort_size.min(cfg.max_n);
    for (r, n) in equal_split(first, arms.len()).into_iter().enumerate() {
        enroll(&mut arms[r], truths[r], n, &mut rng);
    }
    let mut enrolled = first;
    let mut xi_history = Vec::new();
    let mut cohort = 0u64;
    while enrolled < cfg.max_n {
        cohort += 1;
        let posteriors: Vec<_> = arms
            .iter()
            .map(|a| cfg.posterior(a, phase1.and_then(|p| p.iter().find(|x| x.arm_id == a.arm_id && a.arm_id != 0))))
            .collect();
        let xi = bar_probabilities(&posteriors, cfg.bar_draws, derive_seed(seed, 2 * cohort))?;
        let size = cfg.cohort_size.min(cfg.max_n - enrolled);
        let counts = randomize_cohort(&xi, size, derive_seed(seed, 2 * cohort + 1))?;
        for (r, n) in counts.into_iter().enumerate() {
            enroll(&mut arms[r], truths[r], n, &mut rng);
        }
        enrolled += size;
        xi_history.push(xi);
    }
    let selection = select_arm(&arms, phase1, cfg, derive_seed(seed, 1))?;
    Ok(Some(Phase2Outcome { arms, xi_history, selection }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub phase1: Phase1Outcome,
    pub phase2: Option<Phase2Outcome>,
}

/// Phase I, then (in seamless mode) phase II among the graduates.
pub fn simulate_trial(scenario: &Scenario, cfg: &TrialConfig, seed: u64) -> Result<TrialOutcome> {
    let phase1 = simulate_phase1(scenario, cfg, derive_seed(seed, 0))?;
    let phase2 = if cfg.seamless {
        let pooled = cfg.phase2.include_phase1_data.then(|| phase1_arms(&phase1.data));
        simulate_phase2(&phase1.graduates, scenario, &cfg.phase2, pooled.as_deref(), derive_seed(seed, 1))?
    } else {
        None
    };
    Ok(TrialOutcome { phase1, phase2 })
}
