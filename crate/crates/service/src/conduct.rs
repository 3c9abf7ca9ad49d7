//! Live trial conduct: each request plus the current state yields the events
//! to append. Every statistical decision is a library call.

use pedoop::bayes::DoseCurves;
use pedoop::phase1::{graduate, next_dose, phase1_arms, select_with_utility, Decision, DecisionReport, Movement};
use pedoop::phase2::{bar_probabilities, equal_split, randomize_cohort, select_arm};
use pedoop::pkpd::DoseGrid;
use pedoop::rng::derive_seed;
use pedoop::sim::{fit_curves, TrialConfig};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::events::{
    Action, ArmOutcome, CohortAssigned, Created, DecisionView, DoseSummary, EfficacyUpdate, EventBody, Graduated,
    Outcomes, PatientInput, Phase, PosteriorSummary, Randomized, Recommended, Terminated, TrialState,
};
use crate::simulate::sha256_hex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateTrial {
    #[serde(default)]
    pub label: Option<String>,
    pub doses: Vec<f64>,
    #[serde(default)]
    pub design: TrialConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortSubmission {
    pub patients: Vec<PatientInput>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompletePhase1 {
    #[serde(default)]
    pub efficacy_updates: Vec<EfficacyUpdate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase2Submission {
    pub outcomes: Vec<ArmOutcome>,
}

/// Root seed of a trial.
pub fn trial_seed(trial_id: &str) -> u64 {
    let hex = sha256_hex(trial_id.as_bytes());
    u64::from_str_radix(&hex[..16], 16).expect("hex digest")
}

/// Seed for the random work recorded by the event at `sequence`.
pub fn event_seed(state_seed: u64, sequence: u64) -> u64 {
    derive_seed(state_seed, sequence)
}

fn invalid(msg: impl Into<String>) -> ServiceError {
    ServiceError::Invalid(msg.into())
}

fn conflict(msg: impl Into<String>) -> ServiceError {
    ServiceError::Conflict(msg.into())
}

fn validate_design(design: &TrialConfig, grid_len: usize) -> Result<(), ServiceError> {
    let check = |r: pedoop::Result<()>| r.map_err(|e| invalid(e.to_string()));
    check(design.phase1.validate(grid_len))?;
    check(design.mcmc.validate())?;
    check(design.prior.validate())?;
    check(design.comparator_prior.validate())?;
    if design.seamless {
        check(design.phase2.validate())?;
    }
    Ok(())
}

pub fn create(trial_id: &str, req: &CreateTrial) -> Result<Vec<EventBody>, ServiceError> {
    DoseGrid::new(req.doses.clone()).map_err(|e| invalid(e.to_string()))?;
    validate_design(&req.design, req.doses.len())?;
    let p1 = &req.design.phase1;
    Ok(vec![
        EventBody::Created(Created {
            label: req.label.clone().unwrap_or_else(|| trial_id.to_string()),
            doses: req.doses.clone(),
            design: req.design.clone(),
            seed: trial_seed(trial_id),
        }),
        EventBody::CohortAssigned(CohortAssigned {
            dose_level: p1.start_dose,
            size: p1.cohort_size.min(p1.max_n),
            decision: None,
        }),
    ])
}

fn summarize(curves: &DoseCurves, seed: u64, include_efficacy: bool) -> PosteriorSummary {
    let doses = (0..curves.toxicity.n_doses())
        .map(|d| DoseSummary {
            dose_level: d + 1,
            tox_mean: curves.toxicity.mean(d),
            tox_lower: curves.toxicity.quantile(d, 0.025),
            tox_upper: curves.toxicity.quantile(d, 0.975),
            eff_mean: curves.efficacy.mean(d),
            eff_lower: curves.efficacy.quantile(d, 0.025),
            eff_upper: curves.efficacy.quantile(d, 0.975),
        })
        .collect();
    PosteriorSummary { seed, include_efficacy, draws: curves.toxicity.n_draws(), doses }
}

pub fn decision_view(report: &DecisionReport, p_t: f64) -> DecisionView {
    let (action, dose_level, rule) = match report.decision {
        Decision::Assign { dose, movement, rule } => {
            let action = match movement {
                Movement::Escalate => Action::Escalate,
                Movement::Stay => Action::Stay,
                Movement::DeEscalate => Action::DeEscalate,
            };
            (action, Some(dose + 1), Some(rule))
        }
        Decision::Terminate => (Action::Terminate, None, None),
    };
    DecisionView {
        action,
        dose_level,
        rule,
        mean_toxicity: report.mean_toxicity.clone(),
        distance_to_target: report.mean_toxicity.iter().map(|m| (m - p_t).abs()).collect(),
        overdose_prob: report.overdose_prob.clone(),
        safe: report.safe.clone(),
    }
}

/// Records a phase I cohort, refits without efficacy and assigns the next
/// cohort (or terminates, or closes enrolment once `max_n` is reached).
pub fn submit_cohort(state: &TrialState, req: &CohortSubmission) -> Result<Vec<EventBody>, ServiceError> {
    if state.phase != Phase::Phase1 {
        return Err(conflict(format!("phase I cohorts are not accepted in phase {:?}", state.phase)));
    }
    let assignment = state.next_cohort.ok_or_else(|| conflict("no cohort is currently assigned"))?;
    if req.patients.len() != assignment.size {
        return Err(invalid(format!(
            "cohort must contain {} patients, got {}",
            assignment.size,
            req.patients.len()
        )));
    }
    for (i, p) in req.patients.iter().enumerate() {
        if p.dose_level != assignment.dose_level {
            return Err(invalid(format!(
                "patients[{i}]: dose_level {} but the cohort is assigned to level {}",
                p.dose_level, assignment.dose_level
            )));
        }
        p.to_record().validate(state.doses.len()).map_err(|e| invalid(format!("patients[{i}]: {e}")))?;
    }

    let mut seq = state.last_sequence;
    let mut events = vec![EventBody::OutcomesRecorded(Outcomes::Phase1 { patients: req.patients.clone() })];
    seq += 1;
    let mut data = state.phase1_data()?;
    data.patients.extend(req.patients.iter().map(PatientInput::to_record));
    let design = &state.design;
    if data.patients.len() >= design.phase1.max_n {
        return Ok(events);
    }

    seq += 1;
    let seed = event_seed(state.seed, seq);
    let curves = fit_curves(&data, design, false, seed)?;
    events.push(EventBody::PosteriorComputed(summarize(&curves, seed, false)));
    let report = next_dose(assignment.dose_level - 1, &data.counts(), &curves.toxicity, &design.phase1)?;
    let view = decision_view(&report, design.phase1.p_t);
    match report.decision.dose() {
        Some(d) => events.push(EventBody::CohortAssigned(CohortAssigned {
            dose_level: d + 1,
            size: design.phase1.cohort_size.min(design.phase1.max_n - data.patients.len()),
            decision: Some(view),
        })),
        None => events.push(EventBody::Terminated(Terminated {
            reason: "no dose satisfies the overdose safety rule".into(),
            decision: Some(view),
        })),
    }
    Ok(events)
}

/// Efficacy-inclusive refit, graduation and utility selection; opens phase II
/// with an equal-allocation run-in when the design is seamless.
pub fn complete_phase1(state: &TrialState, req: &CompletePhase1) -> Result<Vec<EventBody>, ServiceError> {
    if !matches!(state.phase, Phase::Phase1 | Phase::Phase1Full) {
        return Err(conflict(format!("phase I cannot be completed in phase {:?}", state.phase)));
    }
    if state.patients.is_empty() {
        return Err(conflict("phase I has no patients yet"));
    }
    for u in &req.efficacy_updates {
        if u.patient == 0 || u.patient > state.patients.len() {
            return Err(invalid(format!("efficacy update for unknown patient {}", u.patient)));
        }
    }
    let mut seq = state.last_sequence;
    let mut events = Vec::new();
    let mut data = state.phase1_data()?;
    if !req.efficacy_updates.is_empty() {
        for u in &req.efficacy_updates {
            data.patients[u.patient - 1].efficacy = Some(u.efficacy);
        }
        events.push(EventBody::OutcomesRecorded(Outcomes::EfficacyUpdate { updates: req.efficacy_updates.clone() }));
        seq += 1;
    }
    let design = &state.design;

    seq += 1;
    let fit_seed = event_seed(state.seed, seq);
    let curves = fit_curves(&data, design, true, fit_seed)?;
    events.push(EventBody::PosteriorComputed(summarize(&curves, fit_seed, true)));

    seq += 1;
    let select_seed = event_seed(state.seed, seq);
    let graduation = graduate(&curves, &design.phase1);
    let selected =
        select_with_utility(&graduation.doses, &data, &design.phase2.weights, design.phase2.bar_draws, select_seed)?;
    let graduates: Vec<usize> = graduation.doses.iter().map(|d| d + 1).collect();
    events.push(EventBody::Graduated(Graduated {
        graduates: graduates.clone(),
        prob_tolerable: graduation.prob_tolerable,
        prob_efficacious: graduation.prob_efficacious,
        safe: graduation.safe,
        selected_with_u: selected.map(|d| d + 1),
        seed: select_seed,
    }));

    if graduates.is_empty() {
        events.push(EventBody::Terminated(Terminated { reason: "no dose graduated from phase I".into(), decision: None }));
    } else if design.seamless {
        let arms: Vec<usize> = std::iter::once(0).chain(graduates).collect();
        let first = design.phase2.cohort_size.min(design.phase2.max_n);
        events.push(EventBody::Randomized(Randomized {
            allocation: equal_split(first, arms.len()),
            arms,
            xi: None,
            seed: None,
        }));
    } else {
        events.push(EventBody::Recommended(Recommended {
            arms: vec![],
            xi: None,
            candidates: graduates,
            recommended: selected.map(|d| d + 1),
            seed: None,
        }));
    }
    Ok(events)
}

/// Records a phase II cohort, then either adapts the allocation or makes the
/// final recommendation.
pub fn submit_phase2(state: &TrialState, req: &Phase2Submission) -> Result<Vec<EventBody>, ServiceError> {
    if state.phase != Phase::Phase2 {
        return Err(conflict(format!("phase II outcomes are not accepted in phase {:?}", state.phase)));
    }
    let allocation = state.allocation.as_ref().ok_or_else(|| conflict("no phase II cohort is allocated"))?;
    let mut submitted = vec![0usize; allocation.arms.len()];
    for (i, o) in req.outcomes.iter().enumerate() {
        let r = allocation
            .arms
            .iter()
            .position(|&a| a == o.arm)
            .ok_or_else(|| invalid(format!("outcomes[{i}]: arm {} is not in phase II", o.arm)))?;
        submitted[r] += 1;
    }
    if submitted != allocation.allocation {
        return Err(invalid(format!(
            "cohort must follow the allocation {:?} over arms {:?}, got {:?}",
            allocation.allocation, allocation.arms, submitted
        )));
    }

    let mut seq = state.last_sequence + 1;
    let mut events = vec![EventBody::OutcomesRecorded(Outcomes::Phase2 { outcomes: req.outcomes.clone() })];
    let mut next = state.clone();
    next.arms.iter_mut().for_each(|a| {
        for o in req.outcomes.iter().filter(|o| o.arm == a.arm) {
            a.counts[pedoop::phase2::Outcome::from_flags(o.dlt, o.efficacy).cell()] += 1;
            a.n += 1;
        }
    });
    let arms = next.arm_states();
    let cfg = &state.design.phase2;
    let pooled = cfg.include_phase1_data.then(|| state.phase1_data().map(|d| phase1_arms(&d))).transpose()?;
    let enrolled = state.phase2_enrolled + req.outcomes.len();
    let ids: Vec<usize> = arms.iter().map(|a| a.arm_id).collect();

    seq += 1;
    let seed = event_seed(state.seed, seq);
    if enrolled >= cfg.max_n {
        let selection = select_arm(&arms, pooled.as_deref(), cfg, seed)?;
        events.push(EventBody::Recommended(Recommended {
            candidates: selection.candidates.iter().map(|&r| ids[r]).collect(),
            recommended: selection.recommended.map(|r| ids[r]),
            xi: Some(selection.xi),
            arms: ids,
            seed: Some(seed),
        }));
    } else {
        let posteriors: Vec<_> = arms
            .iter()
            .map(|a| {
                cfg.posterior(a, pooled.as_deref().and_then(|p| p.iter().find(|x| x.arm_id == a.arm_id && a.arm_id != 0)))
            })
            .collect();
        let xi = bar_probabilities(&posteriors, cfg.bar_draws, derive_seed(seed, 0))?;
        let size = cfg.cohort_size.min(cfg.max_n - enrolled);
        let allocation = randomize_cohort(&xi, size, derive_seed(seed, 1))?;
        events.push(EventBody::Randomized(Randomized { arms: ids, xi: Some(xi), allocation, seed: Some(seed) }));
    }
    Ok(events)
}
