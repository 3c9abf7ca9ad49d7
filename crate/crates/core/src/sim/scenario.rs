use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bayes::data::PatientRecord;
use crate::error::{Error, Result};
use crate::phase2::{expected_utility, independent_cells, UtilityWeights};
use crate::pkpd::DoseGrid;
use crate::rng;

/// Generative law for patient PK: `V ~ Gamma(v_shape, v_rate)`,
/// `k ~ Gamma(k_shape, k_rate)`, `log X ~ N(log(d / V) - k t, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PkGenerator {
    pub v_shape: f64,
    pub v_rate: f64,
    pub k_shape: f64,
    pub k_rate: f64,
    pub sigma: f64,
}

impl PkGenerator {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !(pos(self.v_shape) && pos(self.v_rate) && pos(self.k_shape) && pos(self.k_rate)) {
            return Err(Error::Config(format!("PK generator shapes and rates must be positive: {self:?}")));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Config(format!("PK generator sigma must be non-negative, got {}", self.sigma)));
        }
        Ok(())
    }
}

/// True toxicity and efficacy probabilities of one arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmTruth {
    pub tox: f64,
    pub eff: f64,
}

/// Ground truth for simulated trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    pub grid: DoseGrid<f64>,
    pub true_tox: Vec<f64>,
    pub true_eff: Vec<f64>,
    pub pk_gen: PkGenerator,
    pub sample_times: Vec<f64>,
    /// Control arm truth; required when phase II is simulated.
    #[serde(default)]
    pub control: Option<ArmTruth>,
}

pub const SAMPLE_TIMES: [f64; 6] = [1.0, 3.0, 5.0, 7.0, 12.0, 24.0];
pub const DOSES: [f64; 5] = [15.0, 30.0, 60.0, 90.0, 120.0];

const SIM1_EFF: [f64; 5] = [0.12, 0.18, 0.27, 0.33, 0.37];
const SIM1_TOX: [[f64; 5]; 4] = [
    [0.17, 0.29, 0.45, 0.55, 0.62],
    [0.11, 0.19, 0.31, 0.39, 0.46],
    [0.04, 0.09, 0.2, 0.3, 0.39],
    [0.11, 0.16, 0.21, 0.24, 0.27],
];

const SIM2_TOX: [[f64; 5]; 2] = [[0.03, 0.06, 0.17, 0.3, 0.5], [0.03, 0.06, 0.09, 0.12, 0.15]];
const SIM2_EFF: [[f64; 5]; 6] = [
    [0.2, 0.2, 0.2, 0.2, 0.2],
    [0.2, 0.3, 0.5, 0.7, 0.8],
    [0.8, 0.7, 0.5, 0.3, 0.2],
    [0.2, 0.4, 0.8, 0.4, 0.2],
    [0.8, 0.4, 0.2, 0.4, 0.8],
    [0.2, 0.4, 0.5, 0.5, 0.5],
];

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if self.true_tox.len() != n || self.true_eff.len() != n {
            return Err(Error::Config(format!(
                "scenario '{}': truth vectors must have {n} entries",
                self.label
            )));
        }
        let prob = |p: &f64| (0.0..=1.0).contains(p);
        let control_ok = self.control.is_none_or(|c| prob(&c.tox) && prob(&c.eff));
        if !(self.true_tox.iter().all(prob) && self.true_eff.iter().all(prob) && control_ok) {
            return Err(Error::Config(format!("scenario '{}': probabilities must lie in [0, 1]", self.label)));
        }
        if self.sample_times.is_empty()
            || self.sample_times.iter().any(|t| !(t.is_finite() && *t >= 0.0))
            || self.sample_times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Config(format!(
                "scenario '{}': sample times must be non-empty, non-negative and increasing",
                self.label
            )));
        }
        self.pk_gen.validate()
    }

    /// Scenario `n` (1 to 4) of the phase I study.
    pub fn simulation1(n: usize) -> Result<Self> {
        let tox = SIM1_TOX
            .get(n.wrapping_sub(1))
            .ok_or_else(|| Error::Config(format!("phase I study has scenarios 1-4, got {n}")))?;
        Ok(Self {
            label: format!("sim1-sc{n}"),
            grid: DoseGrid::new(DOSES.to_vec())?,
            true_tox: tox.to_vec(),
            true_eff: SIM1_EFF.to_vec(),
            pk_gen: PkGenerator { v_shape: 4.0, v_rate: 1.0, k_shape: 3.0, k_rate: 1.0, sigma: 1.0 },
            sample_times: SAMPLE_TIMES.to_vec(),
            control: None,
        })
    }

    /// Scenario `n` (1 to 12) of the seamless study.
    pub fn simulation2(n: usize) -> Result<Self> {
        if !(1..=12).contains(&n) {
            return Err(Error::Config(format!("seamless study has scenarios 1-12, got {n}")));
        }
        Ok(Self {
            label: format!("sim2-sc{n}"),
            grid: DoseGrid::new(DOSES.to_vec())?,
            true_tox: SIM2_TOX[(n - 1) / 6].to_vec(),
            true_eff: SIM2_EFF[(n - 1) % 6].to_vec(),
            pk_gen: PkGenerator { v_shape: 10.0, v_rate: 1.0, k_shape: 9.0, k_rate: 1.5, sigma: 4.0 },
            sample_times: SAMPLE_TIMES.to_vec(),
            control: Some(ArmTruth { tox: 0.17, eff: 0.2 }),
        })
    }

    /// Look up a preset by study (1 or 2) and scenario number.
    pub fn preset(study: usize, n: usize) -> Result<Self> {
        match study {
            1 => Self::simulation1(n),
            2 => Self::simulation2(n),
            _ => Err(Error::Config(format!("unknown study {study}; expected 1 or 2"))),
        }
    }

    pub fn truth(&self, dose: usize) -> ArmTruth {
        ArmTruth { tox: self.true_tox[dose], eff: self.true_eff[dose] }
    }

    /// True expected utility per dose under independent outcomes.
    pub fn utilities(&self, w: &UtilityWeights<f64>) -> Result<Vec<f64>> {
        (0..self.grid.len())
            .map(|d| expected_utility(independent_cells(self.true_tox[d], self.true_eff[d]), w))
            .collect()
    }

    pub fn control_utility(&self, w: &UtilityWeights<f64>) -> Result<Option<f64>> {
        self.control.map(|c| expected_utility(independent_cells(c.tox, c.eff), w)).transpose()
    }
}

/// Simulated phase I subject at zero-based `dose`.
pub fn draw_patient<R: Rng + ?Sized>(scenario: &Scenario, dose: usize, rng: &mut R) -> Result<PatientRecord> {
    let g = &scenario.pk_gen;
    let amount = scenario
        .grid
        .amount(dose)
        .ok_or_else(|| Error::Domain(format!("dose index {dose} outside grid")))?;
    let gamma = |shape: f64, rate: f64| {
        Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Config(format!("Gamma({shape}, {rate}): {e}")))
    };
    let v = gamma(g.v_shape, g.v_rate)?.sample(rng);
    let k = gamma(g.k_shape, g.k_rate)?.sample(rng);
    let base = (amount / v).ln();
    let log_conc = scenario
        .sample_times
        .iter()
        .map(|t| {
            let z: f64 = StandardNormal.sample(rng);
            base - k * t + g.sigma * z
        })
        .collect();
    let truth = scenario.truth(dose);
    let dlt = rng.random::<f64>() < truth.tox;
    let efficacy = rng.random::<f64>() < truth.eff;
    Ok(PatientRecord { dose_index: dose, times: scenario.sample_times.clone(), log_conc, dlt, efficacy: Some(efficacy) })
}

/// [`draw_patient`] on its own seeded stream.
pub fn generate_patient(scenario: &Scenario, dose: usize, seed: u64) -> Result<PatientRecord> {
    draw_patient(scenario, dose, &mut rng::stream(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn presets_are_valid() {
        for n in 1..=4 {
            Scenario::simulation1(n).unwrap().validate().unwrap();
        }
        for n in 1..=12 {
            Scenario::simulation2(n).unwrap().validate().unwrap();
        }
        assert!(Scenario::simulation1(5).is_err());
        assert!(Scenario::simulation2(0).is_err());
        assert!(Scenario::preset(3, 1).is_err());
    }

    #[test]
    fn noiseless_concentrations() {
        let mut sc = Scenario::simulation2(1).unwrap();
        sc.pk_gen.sigma = 0.0;
        let p = generate_patient(&sc, 2, 9).unwrap();
        // Recover V and k from two noiseless points and check the rest.
        let k = (p.log_conc[0] - p.log_conc[1]) / (p.times[1] - p.times[0]);
        let ln_c0 = p.log_conc[0] + k * p.times[0];
        for (t, y) in p.times.iter().zip(&p.log_conc) {
            assert!((ln_c0 - k * t - y).abs() < 1e-10);
        }
        assert!(k > 0.0 && (60.0 / ln_c0.exp()) > 0.0);
    }

    #[test]
    fn certain_toxicity() {
        let mut sc = Scenario::simulation2(1).unwrap();
        sc.true_tox = vec![1.0; 5];
        sc.true_eff = vec![0.0; 5];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = draw_patient(&sc, 0, &mut rng).unwrap();
            assert!(p.dlt);
            assert_eq!(p.efficacy, Some(false));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let sc = Scenario::simulation1(2).unwrap();
        assert_eq!(generate_patient(&sc, 1, 77).unwrap(), generate_patient(&sc, 1, 77).unwrap());
        assert_ne!(generate_patient(&sc, 1, 77).unwrap(), generate_patient(&sc, 1, 78).unwrap());
    }
}
