use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::pkpd::DoseGrid;

/// One phase I subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    /// Zero-based index into the trial's dose grid.
    pub dose_index: usize,
    /// Sampling times in hours, strictly increasing.
    pub times: Vec<f64>,
    /// Observed log concentrations aligned with `times`.
    pub log_conc: Vec<f64>,
    pub dlt: bool,
    /// `None` while the efficacy assessment is pending.
    pub efficacy: Option<bool>,
}

impl PatientRecord {
    pub fn validate(&self, grid_len: usize) -> Result<()> {
        if self.dose_index >= grid_len {
            return domain(format!("dose index {} outside grid of {grid_len} doses", self.dose_index));
        }
        if self.times.len() != self.log_conc.len() {
            return domain(format!(
                "{} sampling times but {} concentrations",
                self.times.len(),
                self.log_conc.len()
            ));
        }
        if self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return domain("sampling times must be finite and non-negative");
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return domain("sampling times must be strictly increasing");
        }
        if self.log_conc.iter().any(|x| !x.is_finite()) {
            return domain("log concentrations must be finite");
        }
        Ok(())
    }
}

/// All phase I observations for one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase1Data {
    pub grid: DoseGrid<f64>,
    pub patients: Vec<PatientRecord>,
}

/// Per-dose sufficient counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DoseCounts {
    /// Patients treated.
    pub n: Vec<usize>,
    /// DLTs observed.
    pub dlt: Vec<usize>,
    /// Patients with a resolved efficacy assessment.
    pub n_eff: Vec<usize>,
    /// Efficacy responses.
    pub eff: Vec<usize>,
}

impl Phase1Data {
    pub fn new(grid: DoseGrid<f64>) -> Self {
        Self { grid, patients: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        self.patients.iter().try_for_each(|p| p.validate(self.grid.len()))
    }

    pub fn counts(&self) -> DoseCounts {
        let d = self.grid.len();
        let mut c = DoseCounts { n: vec![0; d], dlt: vec![0; d], n_eff: vec![0; d], eff: vec![0; d] };
        for p in &self.patients {
            c.n[p.dose_index] += 1;
            c.dlt[p.dose_index] += usize::from(p.dlt);
            if let Some(z) = p.efficacy {
                c.n_eff[p.dose_index] += 1;
                c.eff[p.dose_index] += usize::from(z);
            }
        }
        c
    }

    pub fn observation_count(&self) -> usize {
        self.patients.iter().map(|p| p.log_conc.len()).sum()
    }

    /// True when nothing informs the likelihood.
    pub fn is_uninformative(&self) -> bool {
        self.patients.is_empty()
    }
}
