//! Trial simulation: scenarios, single trials, replication and operating characteristics.

pub mod replicate;
pub mod scenario;
pub mod trial;

pub use replicate::{run_replications, OperatingCharacteristics, ReplicateSummary, ReplicationSettings};
pub use scenario::{draw_patient, generate_patient, ArmTruth, PkGenerator, Scenario, DOSES, SAMPLE_TIMES};
pub use trial::{
    fit_curves, simulate_phase1, simulate_phase2, simulate_trial, DesignModel, Phase1Outcome, Phase2Outcome,
    TrialConfig, TrialOutcome,
};
