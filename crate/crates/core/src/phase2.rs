//! Randomised phase II: utility scoring, quasi-binomial Beta posteriors,
//! Bayesian adaptive randomisation and final arm selection.
//!
//! Outcome cells are always ordered (Eff,NoTox), (Eff,Tox), (NoEff,NoTox),
//! (NoEff,Tox). Efficacy is cells 1+2, toxicity cells 2+4.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityWeights<T> {
    pub s1: T,
    pub s2: T,
    pub s3: T,
    pub s4: T,
}

impl<T: Real> Default for UtilityWeights<T> {
    fn default() -> Self {
        Self { s1: T::one(), s2: T::lit(0.6), s3: T::lit(0.4), s4: T::zero() }
    }
}

impl<T: Real> UtilityWeights<T> {
    pub fn new(s2: T, s3: T) -> Result<Self> {
        let w = Self { s1: T::one(), s2, s3, s4: T::zero() };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: T| x >= T::zero() && x <= T::one();
        if self.s1 != T::one() || self.s4 != T::zero() {
            return domain("utility weights need s1 = 1 and s4 = 0");
        }
        if !(unit(self.s2) && unit(self.s3)) {
            return domain(format!("s2, s3 must lie in [0, 1], got {} and {}", self.s2, self.s3));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.s1, self.s2, self.s3, self.s4]
    }
}

/// Joint outcome of one patient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    EffNoTox,
    EffTox,
    NoEffNoTox,
    NoEffTox,
}

impl Outcome {
    pub fn from_flags(toxicity: bool, efficacy: bool) -> Self {
        match (efficacy, toxicity) {
            (true, false) => Outcome::EffNoTox,
            (true, true) => Outcome::EffTox,
            (false, false) => Outcome::NoEffNoTox,
            (false, true) => Outcome::NoEffTox,
        }
    }

    pub fn cell(self) -> usize {
        self as usize
    }
}

/// Cell probabilities for independent toxicity and efficacy.
pub fn independent_cells<T: Real>(tox: T, eff: T) -> [T; 4] {
    let one = T::one();
    [eff * (one - tox), eff * tox, (one - eff) * (one - tox), (one - eff) * tox]
}

/// `u = sum_i s_i p_i`.
pub fn expected_utility<T: Real>(cells: [T; 4], w: &UtilityWeights<T>) -> Result<T> {
    let total = cells.iter().fold(T::zero(), |a, b| a + *b);
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(16.0));
    if cells.iter().any(|p| !(*p >= T::zero())) || (total - T::one()).abs() > tol {
        return domain(format!("cell probabilities must be non-negative and sum to 1, got sum {total}"));
    }
    Ok(cells.iter().zip(w.as_array()).fold(T::zero(), |acc, (p, s)| acc + *p * s))
}

/// Outcome counts of one arm; `arm_id` 0 is the control.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmState {
    pub arm_id: usize,
    pub counts: [usize; 4],
}

impl ArmState {
    pub fn new(arm_id: usize) -> Self {
        Self { arm_id, counts: [0; 4] }
    }

    pub fn with_counts(arm_id: usize, counts: [usize; 4]) -> Self {
        Self { arm_id, counts }
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn record(&mut self, outcome: Outcome) {
        self.counts[outcome.cell()] += 1;
    }

    pub fn toxicities(&self) -> usize {
        self.counts[1] + self.counts[3]
    }

    pub fn responses(&self) -> usize {
        self.counts[0] + self.counts[1]
    }

    pub fn merged(&self, other: &ArmState) -> ArmState {
        let mut counts = self.counts;
        counts.iter_mut().zip(other.counts).for_each(|(a, b)| *a += b);
        ArmState { arm_id: self.arm_id, counts }
    }
}

/// Quasi-binomial score `S = sum_i s_i y_i` with its trial count.
pub fn quasi_score<T: Real>(arm: &ArmState, w: &UtilityWeights<T>) -> (T, usize) {
    let s = arm
        .counts
        .iter()
        .zip(w.as_array())
        .fold(T::zero(), |acc, (y, s)| acc + T::lit(*y as f64) * s);
    (s, arm.n())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> BetaParams<T> {
    pub fn mean(&self) -> T {
        self.a / (self.a + self.b)
    }
}

/// `Beta(alpha + S, beta + n - S)`, optionally adding an arm's phase I data.
pub fn utility_posterior<T: Real>(
    arm: &ArmState,
    w: &UtilityWeights<T>,
    alpha: T,
    beta: T,
    phase1: Option<&ArmState>,
) -> BetaParams<T> {
    let pooled = match phase1 {
        Some(p1) => arm.merged(p1),
        None => arm.clone(),
    };
    let (s, n) = quasi_score(&pooled, w);
    BetaParams { a: alpha + s, b: beta + T::lit(n as f64) - s }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Phase2Config {
    pub cohort_size: usize,
    pub max_n: usize,
    pub prior_alpha: f64,
    pub prior_beta: f64,
    pub pi_t: f64,
    pub pi_e: f64,
    pub p_star_star: f64,
    pub q_star_star: f64,
    pub include_phase1_data: bool,
    pub weights: UtilityWeights<f64>,
    pub bar_draws: usize,
}

impl Default for Phase2Config {
    fn default() -> Self {
        Self {
            cohort_size: 10,
            max_n: 150,
            prior_alpha: 1.0,
            prior_beta: 1.0,
            pi_t: 0.2,
            pi_e: 0.2,
            p_star_star: 0.7,
            q_star_star: 0.9,
            include_phase1_data: false,
            weights: UtilityWeights::default(),
            bar_draws: 100_000,
        }
    }
}

impl Phase2Config {
    pub fn validate(&self) -> Result<()> {
        let prob = |x: f64| x > 0.0 && x < 1.0;
        if !(prob(self.pi_t) && prob(self.pi_e) && prob(self.p_star_star) && prob(self.q_star_star)) {
            return Err(Error::Config("phase II thresholds must lie in (0, 1)".into()));
        }
        if !(self.prior_alpha > 0.0 && self.prior_beta > 0.0) {
            return Err(Error::Config("phase II Beta prior parameters must be positive".into()));
        }
        if self.cohort_size == 0 || self.max_n < self.cohort_size || self.bar_draws == 0 {
            return Err(Error::Config("phase II needs cohort_size >= 1, max_n >= cohort_size, bar_draws >= 1".into()));
        }
        self.weights.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn posterior(&self, arm: &ArmState, phase1: Option<&ArmState>) -> BetaParams<f64> {
        let pooled = if self.include_phase1_data { phase1 } else { None };
        utility_posterior(arm, &self.weights, self.prior_alpha, self.prior_beta, pooled)
    }
}

/// Monte Carlo `xi_r = Pr(u_r > max_{r' != r} u_r')`.
///
/// Each round draws every arm once from its Beta posterior; the strict
/// maximum scores the round, exact ties are split uniformly.
pub fn bar_probabilities(arms: &[BetaParams<f64>], draws: usize, seed: u64) -> Result<Vec<f64>> {
    if arms.len() < 2 {
        return domain(format!("adaptive randomisation needs at least 2 arms, got {}", arms.len()));
    }
    if draws == 0 {
        return domain("bar_probabilities needs at least one draw");
    }
    let dists = arms
        .iter()
        .map(|b| Beta::new(b.a, b.b).map_err(|e| Error::Domain(format!("Beta({}, {}): {e}", b.a, b.b))))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wins = vec![0u64; arms.len()];
    let mut tied = Vec::with_capacity(arms.len());
    for _ in 0..draws {
        let mut best = f64::NEG_INFINITY;
        tied.clear();
        for (r, dist) in dists.iter().enumerate() {
            let x = dist.sample(&mut rng);
            if x > best {
                best = x;
                tied.clear();
                tied.push(r);
            } else if x == best {
                tied.push(r);
            }
        }
        let winner = if tied.len() == 1 { tied[0] } else { tied[rng.random_range(0..tied.len())] };
        wins[winner] += 1;
    }
    Ok(wins.into_iter().map(|w| w as f64 / draws as f64).collect())
}

/// Counts per arm for `cohort_size` independent categorical draws from `xi`.
pub fn randomize_cohort(xi: &[f64], cohort_size: usize, seed: u64) -> Result<Vec<usize>> {
    let total: f64 = xi.iter().sum();
    if xi.is_empty() || xi.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return domain(format!("randomisation probabilities must be non-negative and sum to 1, got {total}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; xi.len()];
    for _ in 0..cohort_size {
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = xi.len() - 1;
        for (r, p) in xi.iter().enumerate() {
            acc += p;
            if u < acc {
                chosen = r;
                break;
            }
        }
        // Never land on a zero-probability arm through rounding at the top end.
        while xi[chosen] == 0.0 && chosen > 0 {
            chosen -= 1;
        }
        counts[chosen] += 1;
    }
    Ok(counts)
}

/// Equal allocation of `n` patients, remainders to the lowest arm ids.
pub fn equal_split(n: usize, arms: usize) -> Vec<usize> {
    (0..arms).map(|r| n / arms + usize::from(r < n % arms)).collect()
}

/// `Pr(p < pi_T)` and `Pr(q > pi_E)` under independent `Beta(1, 1)` priors.
pub fn arm_tail_probs(arm: &ArmState, pi_t: f64, pi_e: f64) -> (f64, f64) {
    let n = arm.n() as f64;
    let tox = arm.toxicities() as f64;
    let eff = arm.responses() as f64;
    let p_safe = beta_reg(1.0 + tox, 1.0 + n - tox, pi_t);
    let p_eff = 1.0 - beta_reg(1.0 + eff, 1.0 + n - eff, pi_e);
    (p_safe, p_eff)
}

/// Positions (into `arms`) of treatment arms meeting both selection criteria.
pub fn candidate_set(arms: &[ArmState], cfg: &Phase2Config) -> Vec<usize> {
    arms.iter()
        .enumerate()
        .filter(|(_, a)| a.arm_id != 0)
        .filter(|(_, a)| {
            let (p_safe, p_eff) = arm_tail_probs(a, cfg.pi_t, cfg.pi_e);
            p_safe > cfg.p_star_star && p_eff > cfg.q_star_star
        })
        .map(|(i, _)| i)
        .collect()
}

/// Result of the end-of-phase-II selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSelection {
    pub xi: Vec<f64>,
    /// Positions of arms in the candidate set.
    pub candidates: Vec<usize>,
    /// Position of the recommended arm.
    pub recommended: Option<usize>,
}

/// Argmax of `xi` over `candidates` (lower position wins exact ties), vetoed
/// when the control arm's `xi` is at least as large.
pub fn select_from_xi(xi: &[f64], candidates: &[usize], control: Option<usize>) -> Option<usize> {
    let best = candidates.iter().copied().fold(None, |best: Option<usize>, r| match best {
        Some(b) if xi[b] >= xi[r] => Some(b),
        _ => Some(r),
    })?;
    match control {
        Some(c) if xi[c] >= xi[best] => None,
        _ => Some(best),
    }
}

/// Final selection: `xi` over every arm (control included), candidate set over
/// treatment arms, argmax within the candidates unless the control dominates.
pub fn select_arm(
    arms: &[ArmState],
    phase1: Option<&[ArmState]>,
    cfg: &Phase2Config,
    seed: u64,
) -> Result<ArmSelection> {
    let posteriors: Vec<_> = arms
        .iter()
        .map(|a| cfg.posterior(a, phase1.and_then(|p| p.iter().find(|x| x.arm_id == a.arm_id && a.arm_id != 0))))
        .collect();
    let xi = bar_probabilities(&posteriors, cfg.bar_draws, seed)?;
    let candidates = candidate_set(arms, cfg);
    let control = arms.iter().position(|a| a.arm_id == 0);
    let recommended = select_from_xi(&xi, &candidates, control);
    Ok(ArmSelection { xi, candidates, recommended })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn utility_table_values() {
        let w = UtilityWeights::<f64>::default();
        let u = expected_utility(independent_cells(0.03, 0.2), &w).unwrap();
        assert!((u - 0.508).abs() < 1e-12);
        let u = expected_utility(independent_cells(0.17, 0.2), &w).unwrap();
        assert!((u - 0.452).abs() < 1e-12);
        assert_eq!(expected_utility(independent_cells(0.0, 1.0), &w).unwrap(), 1.0);
        assert!(expected_utility([0.5, 0.5, 0.5, 0.0], &w).is_err());
    }

    #[test]
    fn quasi_score_examples() {
        let w = UtilityWeights::<f64>::default();
        let (s, n) = quasi_score(&ArmState::with_counts(1, [3, 1, 4, 2]), &w);
        assert!((s - 5.2).abs() < 1e-12);
        assert_eq!(n, 10);
        assert_eq!(quasi_score(&ArmState::with_counts(1, [7, 0, 0, 0]), &w).0, 7.0);
        assert_eq!(quasi_score(&ArmState::with_counts(1, [0, 0, 0, 7]), &w).0, 0.0);
    }

    #[test]
    fn utility_posterior_examples() {
        let w = UtilityWeights::<f64>::default();
        let arm = ArmState::with_counts(1, [3, 1, 4, 2]);
        let b = utility_posterior(&arm, &w, 1.0, 1.0, None);
        assert!((b.a - 6.2).abs() < 1e-12 && (b.b - 5.8).abs() < 1e-12);
        let empty = utility_posterior(&ArmState::new(2), &w, 1.0, 1.0, None);
        assert_eq!((empty.a, empty.b), (1.0, 1.0));
        let pooled = utility_posterior(&arm, &w, 1.0, 1.0, Some(&arm));
        assert!((pooled.a - 11.4).abs() < 1e-12 && (pooled.b - 10.6).abs() < 1e-12);
    }

    #[test]
    fn randomisation_examples() {
        assert_eq!(randomize_cohort(&[1.0, 0.0, 0.0], 10, 1).unwrap(), vec![10, 0, 0]);
        assert_eq!(randomize_cohort(&[0.5, 0.5], 0, 1).unwrap(), vec![0, 0]);
        let counts = randomize_cohort(&[1.0 / 3.0; 3], 30_000, 5).unwrap();
        let se = (30_000.0 * (1.0 / 3.0) * (2.0 / 3.0f64)).sqrt();
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 3.0 * se, "{c}");
        }
        assert!(randomize_cohort(&[0.7, 0.7], 3, 1).is_err());
        assert_eq!(equal_split(10, 3), vec![4, 3, 3]);
        assert_eq!(equal_split(10, 4), vec![3, 3, 2, 2]);
    }

    #[test]
    fn bar_symmetric_arms() {
        let xi = bar_probabilities(&[BetaParams { a: 3.0, b: 4.0 }; 2], 100_000, 9).unwrap();
        assert!((xi[0] - 0.5).abs() < 0.01);
        let xi = bar_probabilities(&[BetaParams { a: 3.0, b: 4.0 }; 3], 100_000, 9).unwrap();
        assert!(xi.iter().all(|x| (x - 1.0 / 3.0).abs() < 0.01));
        assert!((xi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(bar_probabilities(&[BetaParams { a: 1.0, b: 1.0 }], 10, 1).is_err());
    }

    #[test]
    fn candidate_examples() {
        let cfg = Phase2Config::default();
        // n = 30, 3 toxicities, 15 responses (cells: 2 EffTox, 13 EffNoTox, 1 NoEffTox, 14 NoEffNoTox)
        let good = ArmState::with_counts(1, [13, 2, 14, 1]);
        assert_eq!(good.n(), 30);
        assert_eq!((good.toxicities(), good.responses()), (3, 15));
        assert_eq!(candidate_set(&[ArmState::new(0), good.clone()], &cfg), vec![1]);
        let toxic = ArmState::with_counts(2, [0, 15, 0, 15]);
        let inert = ArmState::with_counts(3, [0, 0, 60, 0]);
        assert!(candidate_set(&[toxic, inert], &cfg).is_empty());
    }

    #[test]
    fn selection_examples() {
        assert_eq!(select_from_xi(&[0.1, 0.2, 0.3, 0.4], &[2, 3], Some(0)), Some(3));
        assert_eq!(select_from_xi(&[0.1, 0.2, 0.3, 0.4], &[], Some(0)), None);
        assert_eq!(select_from_xi(&[0.5, 0.2, 0.3], &[1, 2], Some(0)), None);
        let cfg = Phase2Config { bar_draws: 20_000, ..Phase2Config::default() };
        let arms = [ArmState::with_counts(0, [30, 0, 0, 0]), ArmState::with_counts(1, [0, 0, 30, 0])];
        assert_eq!(select_arm(&arms, None, &cfg, 3).unwrap().recommended, None);
    }

    #[test]
    fn single_precision_utility() {
        let w = UtilityWeights::<f32>::default();
        let u = expected_utility(independent_cells(0.03f32, 0.2), &w).unwrap();
        assert!((u - 0.508).abs() < 1e-6);
    }
}
