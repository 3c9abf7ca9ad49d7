//! Phase I decision rules: model-based escalation with acceleration and
//! no-skip constraints, the overdose safety rule, graduation to phase II, and
//! utility-assisted single-dose selection.
//!
//! Dose indices are zero-based here; configuration and external interfaces
//! use one-based levels.

use serde::{Deserialize, Serialize};

use crate::bayes::curves::{tail_prob, CurveMatrix, Direction, DoseCurves};
use crate::bayes::data::{DoseCounts, Phase1Data};
use crate::error::{domain, Error, Result};
use crate::phase2::{bar_probabilities, utility_posterior, ArmState, Outcome, UtilityWeights};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Phase1Config {
    /// Target toxicity probability.
    pub p_t: f64,
    /// Overdose threshold of the safety rule; `None` means `p_t`.
    pub pi_s: Option<f64>,
    pub s_star: f64,
    pub pi_t: f64,
    pub pi_e: f64,
    pub p_star: f64,
    pub q_star: f64,
    pub cohort_size: usize,
    pub max_n: usize,
    /// One-based starting level.
    pub start_dose: usize,
}

impl Default for Phase1Config {
    fn default() -> Self {
        Self {
            p_t: 0.3,
            pi_s: None,
            s_star: 0.95,
            pi_t: 0.3,
            pi_e: 0.2,
            p_star: 0.6,
            q_star: 0.6,
            cohort_size: 3,
            max_n: 30,
            start_dose: 1,
        }
    }
}

impl Phase1Config {
    pub fn safety_threshold(&self) -> f64 {
        self.pi_s.unwrap_or(self.p_t)
    }

    pub fn start_index(&self) -> usize {
        self.start_dose.saturating_sub(1)
    }

    pub fn validate(&self, grid_len: usize) -> Result<()> {
        let prob = |x: f64| x > 0.0 && x < 1.0;
        let all = [self.p_t, self.safety_threshold(), self.s_star, self.pi_t, self.pi_e, self.p_star, self.q_star];
        if !all.iter().all(|x| prob(*x)) {
            return Err(Error::Config("phase I probabilities must lie in (0, 1)".into()));
        }
        if self.cohort_size == 0 || self.max_n < self.cohort_size {
            return Err(Error::Config("phase I needs cohort_size >= 1 and max_n >= cohort_size".into()));
        }
        if self.start_dose == 0 || self.start_dose > grid_len {
            return Err(Error::Config(format!("start_dose must be in 1..={grid_len}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Movement {
    Escalate,
    Stay,
    DeEscalate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// No DLT so far at or below the current dose: one level up.
    Acceleration,
    /// Posterior mean toxicity closest to target.
    Closest,
    /// Closest dose would skip an untried level: one level up instead.
    NoSkip,
    /// No dose satisfies the safety rule.
    Safety,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Decision {
    Assign { dose: usize, movement: Movement, rule: Rule },
    Terminate,
}

impl Decision {
    pub fn dose(&self) -> Option<usize> {
        match self {
            Decision::Assign { dose, .. } => Some(*dose),
            Decision::Terminate => None,
        }
    }
}

/// A decision together with the posterior summaries it was based on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub decision: Decision,
    pub mean_toxicity: Vec<f64>,
    /// `Pr(p_d > pi_S | data)`.
    pub overdose_prob: Vec<f64>,
    pub safe: Vec<bool>,
}

/// Overdose tail probability strictly below `s_star`.
pub fn is_safe(dose: usize, toxicity: &CurveMatrix, cfg: &Phase1Config) -> bool {
    tail_prob(toxicity, dose, cfg.safety_threshold(), Direction::Above) < cfg.s_star
}

pub fn safe_set(toxicity: &CurveMatrix, cfg: &Phase1Config) -> Vec<bool> {
    (0..toxicity.n_doses()).map(|d| is_safe(d, toxicity, cfg)).collect()
}

/// Chooses the dose for the next cohort.
///
/// `current` is the dose the last cohort received; `counts` are the per-dose
/// enrolment and DLT totals so far.
pub fn next_dose(
    current: usize,
    counts: &DoseCounts,
    toxicity: &CurveMatrix,
    cfg: &Phase1Config,
) -> Result<DecisionReport> {
    let n_doses = toxicity.n_doses();
    if toxicity.n_draws() == 0 {
        return domain("no posterior draws");
    }
    if current >= n_doses || counts.n.len() != n_doses {
        return domain(format!("current dose {current} / counts inconsistent with {n_doses} doses"));
    }

    let mean_toxicity = toxicity.means();
    let overdose_prob: Vec<f64> = (0..n_doses)
        .map(|d| tail_prob(toxicity, d, cfg.safety_threshold(), Direction::Above))
        .collect();
    let safe: Vec<bool> = overdose_prob.iter().map(|p| *p < cfg.s_star).collect();
    let report = |decision| DecisionReport {
        decision,
        mean_toxicity: mean_toxicity.clone(),
        overdose_prob: overdose_prob.clone(),
        safe: safe.clone(),
    };

    if !safe.iter().any(|s| *s) {
        return Ok(report(Decision::Terminate));
    }

    let movement = |dose: usize| match dose.cmp(&current) {
        std::cmp::Ordering::Greater => Movement::Escalate,
        std::cmp::Ordering::Equal => Movement::Stay,
        std::cmp::Ordering::Less => Movement::DeEscalate,
    };

    let dlts_so_far: usize = counts.dlt[..=current].iter().sum();
    if dlts_so_far == 0 {
        let up = (current + 1).min(n_doses - 1);
        if safe[up] {
            return Ok(report(Decision::Assign { dose: up, movement: movement(up), rule: Rule::Acceleration }));
        }
    }

    let closest = (0..n_doses)
        .filter(|d| safe[*d])
        .fold(None, |best: Option<usize>, d| match best {
            Some(b) if (mean_toxicity[b] - cfg.p_t).abs() <= (mean_toxicity[d] - cfg.p_t).abs() => Some(b),
            _ => Some(d),
        })
        .expect("safe set is non-empty");

    if closest > current + 1 && counts.n[closest - 1] == 0 {
        let up = current + 1;
        return Ok(report(Decision::Assign { dose: up, movement: Movement::Escalate, rule: Rule::NoSkip }));
    }
    Ok(report(Decision::Assign { dose: closest, movement: movement(closest), rule: Rule::Closest }))
}

/// Per-dose graduation diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graduation {
    pub doses: Vec<usize>,
    /// `Pr(p_d < pi_T)`.
    pub prob_tolerable: Vec<f64>,
    /// `Pr(q_d > pi_E)`.
    pub prob_efficacious: Vec<f64>,
    pub safe: Vec<bool>,
}

/// Safe doses with `Pr(p_d < pi_T) > p*` and `Pr(q_d > pi_E) > q*`.
pub fn graduate(curves: &DoseCurves, cfg: &Phase1Config) -> Graduation {
    let n_doses = curves.toxicity.n_doses();
    let safe = safe_set(&curves.toxicity, cfg);
    let prob_tolerable: Vec<f64> =
        (0..n_doses).map(|d| tail_prob(&curves.toxicity, d, cfg.pi_t, Direction::Below)).collect();
    let prob_efficacious: Vec<f64> =
        (0..n_doses).map(|d| tail_prob(&curves.efficacy, d, cfg.pi_e, Direction::Above)).collect();
    let doses = (0..n_doses)
        .filter(|&d| safe[d] && prob_tolerable[d] > cfg.p_star && prob_efficacious[d] > cfg.q_star)
        .collect();
    Graduation { doses, prob_tolerable, prob_efficacious, safe }
}

/// Phase I joint outcome counts per dose; pending efficacy is left out.
pub fn phase1_arms(data: &Phase1Data) -> Vec<ArmState> {
    let mut arms: Vec<ArmState> = (0..data.grid.len()).map(|d| ArmState::new(d + 1)).collect();
    for p in &data.patients {
        if let Some(eff) = p.efficacy {
            arms[p.dose_index].record(Outcome::from_flags(p.dlt, eff));
        }
    }
    arms
}

/// Tie margin for comparing Monte Carlo `xi` estimates from `draws` rounds.
pub fn xi_tie_margin(draws: usize) -> f64 {
    4.0 / (draws as f64).sqrt()
}

/// Picks at most one graduated dose: the one most likely to have the highest
/// utility given phase I outcomes (`Beta(1, 1)` utility priors).
pub fn select_with_utility(
    graduates: &[usize],
    data: &Phase1Data,
    weights: &UtilityWeights<f64>,
    draws: usize,
    seed: u64,
) -> Result<Option<usize>> {
    match graduates {
        [] => return Ok(None),
        [only] => return Ok(Some(*only)),
        _ => {}
    }
    let arms = phase1_arms(data);
    let posteriors: Vec<_> =
        graduates.iter().map(|&d| utility_posterior(&arms[d], weights, 1.0, 1.0, None)).collect();
    let xi = bar_probabilities(&posteriors, draws, seed)?;
    let margin = xi_tie_margin(draws);
    let mut best = 0;
    for i in 1..xi.len() {
        if xi[i] > xi[best] + margin {
            best = i;
        }
    }
    Ok(Some(graduates[best]))
}
