//! Trial events and the state they fold into.
//!
//! Events are the only persisted record of a trial; [`TrialState`] is a pure
//! function of the event sequence. Dose levels and arm ids are one-based in
//! every payload, arm 0 is the control.

use chrono::{DateTime, Utc};
use pedoop::bayes::{PatientRecord, Phase1Data};
use pedoop::phase1::Rule;
use pedoop::phase2::{ArmState, Outcome};
use pedoop::pkpd::DoseGrid;
use pedoop::sim::TrialConfig;
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEvent {
    pub trial_id: String,
    pub sequence: u64,
    pub timestamp: DateTime<Utc>,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    Created(Created),
    CohortAssigned(CohortAssigned),
    OutcomesRecorded(Outcomes),
    PosteriorComputed(PosteriorSummary),
    Graduated(Graduated),
    Randomized(Randomized),
    Recommended(Recommended),
    Terminated(Terminated),
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::Created(_) => "created",
            EventBody::CohortAssigned(_) => "cohort_assigned",
            EventBody::OutcomesRecorded(_) => "outcomes_recorded",
            EventBody::PosteriorComputed(_) => "posterior_computed",
            EventBody::Graduated(_) => "graduated",
            EventBody::Randomized(_) => "randomized",
            EventBody::Recommended(_) => "recommended",
            EventBody::Terminated(_) => "terminated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub label: String,
    pub doses: Vec<f64>,
    pub design: TrialConfig,
    /// Root of every seed the trial uses.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortAssigned {
    pub dose_level: usize,
    pub size: usize,
    /// `None` for the first cohort.
    pub decision: Option<DecisionView>,
}

/// One phase I subject as submitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientInput {
    pub dose_level: usize,
    pub times: Vec<f64>,
    pub log_conc: Vec<f64>,
    pub dlt: bool,
    #[serde(default)]
    pub efficacy: Option<bool>,
}

impl PatientInput {
    pub fn to_record(&self) -> PatientRecord {
        PatientRecord {
            dose_index: self.dose_level.saturating_sub(1),
            times: self.times.clone(),
            log_conc: self.log_conc.clone(),
            dlt: self.dlt,
            efficacy: self.efficacy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficacyUpdate {
    /// One-based enrolment number of the phase I patient.
    pub patient: usize,
    pub efficacy: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmOutcome {
    pub arm: usize,
    pub dlt: bool,
    pub efficacy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Outcomes {
    Phase1 { patients: Vec<PatientInput> },
    EfficacyUpdate { updates: Vec<EfficacyUpdate> },
    Phase2 { outcomes: Vec<ArmOutcome> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoseSummary {
    pub dose_level: usize,
    pub tox_mean: f64,
    pub tox_lower: f64,
    pub tox_upper: f64,
    pub eff_mean: f64,
    pub eff_lower: f64,
    pub eff_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub seed: u64,
    pub include_efficacy: bool,
    pub draws: usize,
    /// Posterior means and 2.5% / 97.5% quantiles.
    pub doses: Vec<DoseSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Escalate,
    Stay,
    DeEscalate,
    Terminate,
}

/// An escalation decision with the numbers behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionView {
    pub action: Action,
    pub dose_level: Option<usize>,
    pub rule: Option<Rule>,
    pub mean_toxicity: Vec<f64>,
    /// `|mean toxicity - p_T|` per dose.
    pub distance_to_target: Vec<f64>,
    pub overdose_prob: Vec<f64>,
    pub safe: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graduated {
    pub graduates: Vec<usize>,
    pub prob_tolerable: Vec<f64>,
    pub prob_efficacious: Vec<f64>,
    pub safe: Vec<bool>,
    pub selected_with_u: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Randomized {
    pub arms: Vec<usize>,
    /// `None` for the equal-allocation run-in.
    pub xi: Option<Vec<f64>>,
    /// Patients per arm for the next cohort, aligned with `arms`.
    pub allocation: Vec<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommended {
    pub arms: Vec<usize>,
    pub xi: Option<Vec<f64>>,
    /// Dose levels meeting the selection criteria.
    pub candidates: Vec<usize>,
    pub recommended: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terminated {
    pub reason: String,
    /// The escalation decision that stopped the trial, if any.
    pub decision: Option<DecisionView>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Escalating; `next_cohort` says where.
    Phase1,
    /// Phase I enrolment is full; waiting for completion.
    Phase1Full,
    Phase2,
    Completed,
    Terminated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub dose_level: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoseStatus {
    pub dose_level: usize,
    pub amount: f64,
    pub n: usize,
    pub dlt: usize,
    pub n_eff: usize,
    pub eff: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmStatus {
    pub arm: usize,
    /// (Eff,NoTox), (Eff,Tox), (NoEff,NoTox), (NoEff,Tox).
    pub counts: [usize; 4],
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialState {
    pub trial_id: String,
    pub label: String,
    pub doses: Vec<f64>,
    pub design: TrialConfig,
    pub seed: u64,
    pub phase: Phase,
    pub last_sequence: u64,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub patients: Vec<PatientInput>,
    pub dose_status: Vec<DoseStatus>,
    pub next_cohort: Option<Assignment>,
    pub decisions: Vec<DecisionView>,
    pub posterior: Option<PosteriorSummary>,
    pub graduation: Option<Graduated>,
    pub arms: Vec<ArmStatus>,
    pub phase2_enrolled: usize,
    pub allocation: Option<Randomized>,
    pub recommendation: Option<Recommended>,
    pub termination: Option<String>,
}

impl TrialState {
    fn from_created(event: &TrialEvent, c: &Created) -> Self {
        Self {
            trial_id: event.trial_id.clone(),
            label: c.label.clone(),
            doses: c.doses.clone(),
            design: c.design.clone(),
            seed: c.seed,
            phase: Phase::Phase1,
            last_sequence: event.sequence,
            created_at: event.timestamp,
            updated_at: event.timestamp,
            patients: Vec::new(),
            dose_status: c
                .doses
                .iter()
                .enumerate()
                .map(|(d, &amount)| DoseStatus { dose_level: d + 1, amount, n: 0, dlt: 0, n_eff: 0, eff: 0 })
                .collect(),
            next_cohort: None,
            decisions: Vec::new(),
            posterior: None,
            graduation: None,
            arms: Vec::new(),
            phase2_enrolled: 0,
            allocation: None,
            recommendation: None,
            termination: None,
        }
    }

    /// Rebuilds the state from a complete log.
    pub fn replay(events: &[TrialEvent]) -> Result<Self, ServiceError> {
        let (first, rest) = events
            .split_first()
            .ok_or_else(|| ServiceError::Corrupt { trial: String::new(), message: "empty event log".into() })?;
        let EventBody::Created(created) = &first.body else {
            return Err(corrupt(first, "first event is not `created`"));
        };
        if first.sequence != 1 {
            return Err(corrupt(first, "log must start at sequence 1"));
        }
        let mut state = Self::from_created(first, created);
        for e in rest {
            state.apply(e)?;
        }
        Ok(state)
    }

    pub fn apply(&mut self, event: &TrialEvent) -> Result<(), ServiceError> {
        if event.trial_id != self.trial_id {
            return Err(corrupt(event, "event belongs to another trial"));
        }
        if event.sequence != self.last_sequence + 1 {
            return Err(corrupt(event, &format!("expected sequence {}", self.last_sequence + 1)));
        }
        match &event.body {
            EventBody::Created(_) => return Err(corrupt(event, "duplicate `created`")),
            EventBody::CohortAssigned(a) => {
                self.next_cohort = Some(Assignment { dose_level: a.dose_level, size: a.size });
                if let Some(d) = &a.decision {
                    self.decisions.push(d.clone());
                }
            }
            EventBody::OutcomesRecorded(Outcomes::Phase1 { patients }) => {
                self.patients.extend(patients.iter().cloned());
                self.next_cohort = None;
                self.recount();
                if self.patients.len() >= self.design.phase1.max_n {
                    self.phase = Phase::Phase1Full;
                }
            }
            EventBody::OutcomesRecorded(Outcomes::EfficacyUpdate { updates }) => {
                for u in updates {
                    let p = self
                        .patients
                        .get_mut(u.patient.wrapping_sub(1))
                        .ok_or_else(|| corrupt(event, &format!("no patient {}", u.patient)))?;
                    p.efficacy = Some(u.efficacy);
                }
                self.recount();
            }
            EventBody::OutcomesRecorded(Outcomes::Phase2 { outcomes }) => {
                for o in outcomes {
                    let arm = self
                        .arms
                        .iter_mut()
                        .find(|a| a.arm == o.arm)
                        .ok_or_else(|| corrupt(event, &format!("no arm {}", o.arm)))?;
                    arm.counts[Outcome::from_flags(o.dlt, o.efficacy).cell()] += 1;
                    arm.n += 1;
                }
                self.phase2_enrolled += outcomes.len();
                self.allocation = None;
            }
            EventBody::PosteriorComputed(p) => self.posterior = Some(p.clone()),
            EventBody::Graduated(g) => {
                self.graduation = Some(g.clone());
                self.next_cohort = None;
            }
            EventBody::Randomized(r) => {
                if self.phase != Phase::Phase2 {
                    self.phase = Phase::Phase2;
                    self.arms = r.arms.iter().map(|&arm| ArmStatus { arm, counts: [0; 4], n: 0 }).collect();
                }
                self.allocation = Some(r.clone());
            }
            EventBody::Recommended(r) => {
                self.recommendation = Some(r.clone());
                self.allocation = None;
                self.phase = Phase::Completed;
            }
            EventBody::Terminated(t) => {
                self.termination = Some(t.reason.clone());
                if let Some(d) = &t.decision {
                    self.decisions.push(d.clone());
                }
                self.next_cohort = None;
                self.allocation = None;
                self.phase = Phase::Terminated;
            }
        }
        self.last_sequence = event.sequence;
        self.updated_at = event.timestamp;
        Ok(())
    }

    fn recount(&mut self) {
        for s in &mut self.dose_status {
            (s.n, s.dlt, s.n_eff, s.eff) = (0, 0, 0, 0);
        }
        for p in &self.patients {
            if let Some(s) = self.dose_status.get_mut(p.dose_level.wrapping_sub(1)) {
                s.n += 1;
                s.dlt += usize::from(p.dlt);
                if let Some(e) = p.efficacy {
                    s.n_eff += 1;
                    s.eff += usize::from(e);
                }
            }
        }
    }

    pub fn phase1_data(&self) -> Result<Phase1Data, ServiceError> {
        Ok(Phase1Data {
            grid: DoseGrid::new(self.doses.clone())?,
            patients: self.patients.iter().map(PatientInput::to_record).collect(),
        })
    }

    /// Phase II arms in library form, control first.
    pub fn arm_states(&self) -> Vec<ArmState> {
        self.arms.iter().map(|a| ArmState::with_counts(a.arm, a.counts)).collect()
    }

    /// Zero-based dose of the most recent phase I cohort.
    pub fn last_dose_index(&self) -> Option<usize> {
        self.patients.last().map(|p| p.dose_level - 1)
    }
}

fn corrupt(event: &TrialEvent, message: &str) -> ServiceError {
    ServiceError::Corrupt {
        trial: event.trial_id.clone(),
        message: format!("event {} ({}): {message}", event.sequence, event.body.kind()),
    }
}

pub fn to_ndjson_line(event: &TrialEvent) -> Result<String, ServiceError> {
    serde_json::to_string(event).map(|s| s + "\n").map_err(|e| ServiceError::Io(e.to_string()))
}

pub fn parse_ndjson(trial: &str, text: &str) -> Result<Vec<TrialEvent>, ServiceError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| ServiceError::Corrupt {
                trial: trial.to_string(),
                message: format!("line {}: {e}", i + 1),
            })
        })
        .collect()
}
