//! Per-draw dose-response curves and posterior tail queries.

use serde::{Deserialize, Serialize};

use super::comparator::ComparatorParams;
use super::mcmc::PosteriorDraws;
use crate::error::{domain, Result};
use crate::pkpd::{DoseGrid, ModelParams};

/// A parameter draw that implies toxicity and efficacy probabilities per dose.
pub trait CurveModel {
    fn toxicity_at(&self, dose: f64) -> Result<f64>;
    fn efficacy_at(&self, dose: f64) -> Result<f64>;
}

impl CurveModel for ModelParams<f64> {
    fn toxicity_at(&self, dose: f64) -> Result<f64> {
        self.toxicity_prob(dose)
    }

    fn efficacy_at(&self, dose: f64) -> Result<f64> {
        self.efficacy_prob(dose)
    }
}

impl CurveModel for ComparatorParams {
    fn toxicity_at(&self, dose: f64) -> Result<f64> {
        Ok(self.toxicity_prob(dose))
    }

    fn efficacy_at(&self, dose: f64) -> Result<f64> {
        Ok(self.efficacy_prob(dose))
    }
}

/// Row-major draws x doses matrix of probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMatrix {
    n_doses: usize,
    values: Vec<f64>,
}

impl CurveMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_doses = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || n_doses == 0 {
            return domain("curve matrix needs at least one draw and one dose");
        }
        if rows.iter().any(|r| r.len() != n_doses) {
            return domain("ragged curve matrix");
        }
        Ok(Self { n_doses, values: rows.concat() })
    }

    pub fn n_draws(&self) -> usize {
        self.values.len() / self.n_doses
    }

    pub fn n_doses(&self) -> usize {
        self.n_doses
    }

    pub fn row(&self, draw: usize) -> &[f64] {
        &self.values[draw * self.n_doses..(draw + 1) * self.n_doses]
    }

    pub fn column(&self, dose: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(dose).step_by(self.n_doses).copied()
    }

    pub fn mean(&self, dose: usize) -> f64 {
        self.column(dose).sum::<f64>() / self.n_draws() as f64
    }

    pub fn means(&self) -> Vec<f64> {
        (0..self.n_doses).map(|d| self.mean(d)).collect()
    }

    /// Empirical quantile (linear interpolation between order statistics).
    pub fn quantile(&self, dose: usize, prob: f64) -> f64 {
        let mut col: Vec<f64> = self.column(dose).collect();
        col.sort_by(f64::total_cmp);
        let pos = prob.clamp(0.0, 1.0) * (col.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        col[lo] + (col[hi] - col[lo]) * (pos - lo as f64)
    }
}

/// Toxicity and efficacy curves evaluated on every retained draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoseCurves {
    pub toxicity: CurveMatrix,
    pub efficacy: CurveMatrix,
}

pub fn dose_curves<P: CurveModel>(draws: &PosteriorDraws<P>, grid: &DoseGrid<f64>) -> Result<DoseCurves> {
    if draws.is_empty() {
        return domain("no posterior draws");
    }
    let mut tox = Vec::with_capacity(draws.len());
    let mut eff = Vec::with_capacity(draws.len());
    for p in &draws.params {
        tox.push(grid.amounts().iter().map(|d| p.toxicity_at(*d)).collect::<Result<Vec<_>>>()?);
        eff.push(grid.amounts().iter().map(|d| p.efficacy_at(*d)).collect::<Result<Vec<_>>>()?);
    }
    Ok(DoseCurves { toxicity: CurveMatrix::from_rows(&tox)?, efficacy: CurveMatrix::from_rows(&eff)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Above,
    Below,
}

/// Fraction of draws strictly beyond `threshold` at `dose`.
pub fn tail_prob(matrix: &CurveMatrix, dose: usize, threshold: f64, direction: Direction) -> f64 {
    let hits = matrix
        .column(dose)
        .filter(|&x| match direction {
            Direction::Above => x > threshold,
            Direction::Below => x < threshold,
        })
        .count();
    hits as f64 / matrix.n_draws() as f64
}
