use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use super::trial::{simulate_trial, TrialConfig, TrialOutcome};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReplicationSettings {
    pub replications: usize,
    /// Worker threads; 0 means one per core.
    pub parallelism: usize,
    pub master_seed: u64,
}

impl Default for ReplicationSettings {
    fn default() -> Self {
        Self { replications: 200, parallelism: 0, master_seed: 20240601 }
    }
}

impl ReplicationSettings {
    pub fn replicate_seed(&self, replicate: usize) -> u64 {
        derive_seed(self.master_seed, replicate as u64)
    }
}

/// What one replicate contributes to the operating characteristics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub phase1_n: Vec<usize>,
    pub phase2_n: Vec<usize>,
    pub control_n: usize,
    /// Doses meeting the selection rule (graduation in phase I only mode).
    pub selected: Vec<usize>,
    /// At most one recommended dose.
    pub selected_with_u: Option<usize>,
    /// Treatment arm with the largest final randomization probability.
    pub top_dose: Option<usize>,
    pub terminated: bool,
}

impl ReplicateSummary {
    pub fn from_outcome(outcome: &TrialOutcome, n_doses: usize, seamless: bool) -> Self {
        let phase1_n = outcome.phase1.patients_per_dose();
        let mut phase2_n = vec![0; n_doses];
        let mut control_n = 0;
        if let Some(p2) = &outcome.phase2 {
            for arm in &p2.arms {
                match arm.arm_id {
                    0 => control_n = arm.n(),
                    id => phase2_n[id - 1] = arm.n(),
                }
            }
        }
        let (selected, selected_with_u, top_dose) = match (&outcome.phase2, seamless) {
            (_, false) => (outcome.phase1.graduates.clone(), outcome.phase1.selected, None),
            (Some(p2), true) => (p2.candidate_doses(), p2.recommended_dose(), p2.top_dose()),
            (None, true) => (vec![], None, None),
        };
        Self { phase1_n, phase2_n, control_n, selected, selected_with_u, top_dose, terminated: outcome.phase1.terminated }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoseSummary {
    /// One-based dose level.
    pub dose_level: usize,
    pub dose_amount: f64,
    pub true_tox: f64,
    pub true_eff: f64,
    pub utility: f64,
    pub avg_patients_phase1: f64,
    pub avg_patients_total: f64,
    pub sel_pct: f64,
    pub sel_pct_with_u: f64,
    pub top_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSummary {
    pub true_tox: f64,
    pub true_eff: f64,
    pub utility: f64,
    pub avg_patients: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFailure {
    pub replicate: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingCharacteristics {
    pub label: String,
    pub seamless: bool,
    pub replications: usize,
    pub completed: usize,
    pub master_seed: u64,
    pub doses: Vec<DoseSummary>,
    pub control: Option<ControlSummary>,
    pub pct_no_recommendation: f64,
    pub pct_terminated: f64,
    pub avg_total_n: f64,
    pub failures: Vec<ReplicateFailure>,
}

impl OperatingCharacteristics {
    /// Aggregate per-replicate summaries in replicate order.
    pub fn aggregate(
        scenario: &Scenario,
        cfg: &TrialConfig,
        settings: &ReplicationSettings,
        results: &[std::result::Result<ReplicateSummary, ReplicateFailure>],
    ) -> Result<Self> {
        let n_doses = scenario.grid.len();
        let ok: Vec<&ReplicateSummary> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
        let failures: Vec<ReplicateFailure> = results.iter().filter_map(|r| r.as_ref().err().cloned()).collect();
        let m = ok.len().max(1) as f64;
        let frac = |count: usize| count as f64 / m;
        let utilities = scenario.utilities(&cfg.phase2.weights)?;

        let doses: Vec<DoseSummary> = (0..n_doses)
            .map(|d| {
                let p1: usize = ok.iter().map(|s| s.phase1_n[d]).sum();
                let p2: usize = ok.iter().map(|s| s.phase2_n[d]).sum();
                DoseSummary {
                    dose_level: d + 1,
                    dose_amount: scenario.grid.amounts()[d],
                    true_tox: scenario.true_tox[d],
                    true_eff: scenario.true_eff[d],
                    utility: utilities[d],
                    avg_patients_phase1: frac(p1),
                    avg_patients_total: frac(p1 + p2),
                    sel_pct: frac(ok.iter().filter(|s| s.selected.contains(&d)).count()),
                    sel_pct_with_u: frac(ok.iter().filter(|s| s.selected_with_u == Some(d)).count()),
                    top_pct: frac(ok.iter().filter(|s| s.top_dose == Some(d)).count()),
                }
            })
            .collect();
        let control = match (scenario.control, cfg.seamless) {
            (Some(c), true) => Some(ControlSummary {
                true_tox: c.tox,
                true_eff: c.eff,
                utility: scenario.control_utility(&cfg.phase2.weights)?.unwrap_or_default(),
                avg_patients: frac(ok.iter().map(|s| s.control_n).sum()),
            }),
            _ => None,
        };
        let avg_total_n = doses.iter().map(|d| d.avg_patients_total).sum::<f64>()
            + control.as_ref().map_or(0.0, |c| c.avg_patients);
        Ok(Self {
            label: scenario.label.clone(),
            seamless: cfg.seamless,
            replications: results.len(),
            completed: ok.len(),
            master_seed: settings.master_seed,
            doses,
            control,
            pct_no_recommendation: frac(ok.iter().filter(|s| s.selected_with_u.is_none()).count()),
            pct_terminated: frac(ok.iter().filter(|s| s.terminated).count()),
            avg_total_n,
            failures,
        })
    }
}

/// Independent replicates on counter-split seed streams; the result does not
/// depend on `parallelism`.
pub fn run_replications(
    scenario: &Scenario,
    cfg: &TrialConfig,
    settings: &ReplicationSettings,
) -> Result<OperatingCharacteristics> {
    if settings.replications == 0 {
        return Err(Error::Config("replications must be at least 1".into()));
    }
    cfg.validate(scenario)?;
    let n_doses = scenario.grid.len();
    let one = |rep: usize| {
        simulate_trial(scenario, cfg, settings.replicate_seed(rep))
            .map(|o| ReplicateSummary::from_outcome(&o, n_doses, cfg.seamless))
            .map_err(|e| ReplicateFailure {
                replicate: rep,
                message: Error::Trial { trial: rep as u64, source: Box::new(e) }.to_string(),
            })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| (0..settings.replications).into_par_iter().map(one).collect());

    let failed = results.iter().filter(|r| r.is_err()).count();
    if failed * 100 > settings.replications {
        let first = results.iter().find_map(|r| r.as_ref().err()).map(|f| f.message.clone()).unwrap_or_default();
        return Err(Error::FailureBudget { failed, total: settings.replications, first });
    }
    OperatingCharacteristics::aggregate(scenario, cfg, settings, &results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::mcmc::McmcSettings;

    fn small() -> (Scenario, TrialConfig) {
        let cfg = TrialConfig {
            mcmc: McmcSettings { iterations: 300, burn_in: 150, thin: 3, ..McmcSettings::default() },
            phase2: crate::phase2::Phase2Config { bar_draws: 500, max_n: 40, ..Default::default() },
            ..TrialConfig::simulation2()
        };
        (Scenario::simulation2(3).unwrap(), cfg)
    }

    #[test]
    fn single_replicate_matches_direct_call() {
        let (sc, cfg) = small();
        let settings = ReplicationSettings { replications: 1, parallelism: 1, master_seed: 99 };
        let oc = run_replications(&sc, &cfg, &settings).unwrap();
        let direct = simulate_trial(&sc, &cfg, settings.replicate_seed(0)).unwrap();
        let summary = ReplicateSummary::from_outcome(&direct, 5, true);
        for d in 0..5 {
            assert_eq!(oc.doses[d].avg_patients_phase1, summary.phase1_n[d] as f64);
            assert_eq!(oc.doses[d].sel_pct_with_u, f64::from(u8::from(summary.selected_with_u == Some(d))));
        }
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let (sc, cfg) = small();
        let serial = ReplicationSettings { replications: 6, parallelism: 1, master_seed: 5 };
        let parallel = ReplicationSettings { parallelism: 4, ..serial };
        assert_eq!(run_replications(&sc, &cfg, &serial).unwrap(), run_replications(&sc, &cfg, &parallel).unwrap());
    }

    #[test]
    fn totals_add_up() {
        let (sc, cfg) = small();
        let oc = run_replications(&sc, &cfg, &ReplicationSettings { replications: 4, parallelism: 2, master_seed: 1 })
            .unwrap();
        let sum: f64 = oc.doses.iter().map(|d| d.avg_patients_total).sum::<f64>() + oc.control.unwrap().avg_patients;
        assert_eq!(sum, oc.avg_total_n);
        assert!(oc.doses.iter().all(|d| d.sel_pct_with_u <= d.sel_pct));
    }
}
