//! `pedoop validate`: reference checks of the model arithmetic.

use pedoop::phase2::{arm_tail_probs, bar_probabilities, utility_posterior, ArmState};
use pedoop::pkpd::{
    auc_population, concentration_population, cumulative_effect_with, EffectMethod, PdParams, PkPopulation,
};
use pedoop::quadrature::{integrate_to_infinity, Tolerance};
use pedoop::rng::stream;
use pedoop::sim::Scenario;
use pedoop::{BetaParams, UtilityWeights};
use rand::Rng;
use serde::Serialize;

use crate::error::ServiceError;
use crate::tables;

pub const REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub observed: String,
    pub expected: String,
    pub passed: bool,
}

/// Deliberate faults for exercising the report.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Perturbation {
    /// Relative error added to every closed-form cumulative effect.
    pub eta_closed_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status}  {:<22} observed {}  expected {}\n", c.name, c.observed, c.expected));
        }
        let failed = self.failed().len();
        out.push_str(&format!("{} checks, {} failed\n", self.checks.len(), failed));
        out
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// `(pk, pd, dose)` with `gamma * alpha_k = 2`.
pub fn closed_form_cases(n: usize, seed: u64) -> Vec<(PkPopulation<f64>, PdParams<f64>, f64)> {
    let mut rng = stream(seed, 0);
    (0..n)
        .map(|_| {
            let alpha_k = rng.random_range(1.2..8.0);
            let pk = PkPopulation::new(
                rng.random_range(1.5..12.0),
                rng.random_range(0.2..3.0),
                alpha_k,
                rng.random_range(0.2..3.0),
            )
            .expect("valid population");
            let pd = PdParams { e_max: rng.random_range(0.05..2.0), ed50: rng.random_range(5.0..80.0), gamma: 2.0 / alpha_k };
            (pk, pd, rng.random_range(1.0..150.0))
        })
        .collect()
}

pub fn eta_check(perturb: f64) -> Result<Check, ServiceError> {
    let mut worst = 0.0f64;
    for (pk, pd, dose) in closed_form_cases(20, 11) {
        let (closed, _) = cumulative_effect_with(dose, &pk, &pd, Some(EffectMethod::ClosedForm))?;
        let (quad, _) = cumulative_effect_with(dose, &pk, &pd, Some(EffectMethod::Quadrature))?;
        worst = worst.max(rel_err(closed * (1.0 + perturb), quad));
    }
    Ok(Check {
        name: "eta_closed_form",
        observed: format!("max rel err {worst:.2e} over 20 sets"),
        expected: format!("< {REL_TOL:.0e}"),
        passed: worst < REL_TOL,
    })
}

pub fn auc_quadrature_check() -> Result<Check, ServiceError> {
    let mut worst = 0.0f64;
    for (pk, _, dose) in closed_form_cases(20, 12) {
        let closed = auc_population(dose, &pk)?;
        let quad = integrate_to_infinity(
            |t: f64| concentration_population(dose, &pk, t).unwrap_or(f64::NAN),
            0.0,
            Tolerance { abs: 1e-13, rel: 1e-12, max_intervals: 4000 },
        )?;
        worst = worst.max(rel_err(closed, quad.value));
    }
    Ok(Check {
        name: "auc_quadrature",
        observed: format!("max rel err {worst:.2e} over 20 sets"),
        expected: format!("< {REL_TOL:.0e}"),
        passed: worst < REL_TOL,
    })
}

pub const AUC_ROW: [f64; 5] = [0.3125, 0.625, 1.25, 1.875, 2.5];

pub fn auc_table_check() -> Result<Check, ServiceError> {
    let pk = PkPopulation::new(10.0, 1.0, 9.0, 1.5)?;
    let got = pedoop::sim::DOSES.iter().map(|&d| auc_population(d, &pk)).collect::<Result<Vec<_>, _>>()?;
    let passed = got.iter().zip(AUC_ROW).all(|(g, e)| (g - e).abs() < 1e-12);
    Ok(Check { name: "auc_table", observed: format!("{got:?}"), expected: format!("{AUC_ROW:?}"), passed })
}

pub fn utility_table_check() -> Result<Check, ServiceError> {
    let w = UtilityWeights::default();
    let mut worst1 = 0.0f64;
    let mut worst2 = 0.0f64;
    for (n, row) in tables::SIM1_UTILITIES.iter().enumerate() {
        let got = Scenario::simulation1(n + 1)?.utilities(&w)?;
        worst1 = got.iter().zip(row).fold(worst1, |m, (g, e)| m.max((g - e).abs()));
    }
    for (n, row) in tables::SIM2_UTILITIES.iter().enumerate() {
        let sc = Scenario::simulation2(n + 1)?;
        let got = sc.utilities(&w)?;
        worst2 = got.iter().zip(row).fold(worst2, |m, (g, e)| m.max((g - e).abs()));
        let control = sc.control_utility(&w)?.unwrap_or(f64::NAN);
        worst2 = worst2.max((control - tables::SIM2_CONTROL_UTILITY).abs());
    }
    Ok(Check {
        name: "utility_table",
        observed: format!("max abs err {worst1:.4} (phase I study), {worst2:.4} (seamless study)"),
        expected: format!("<= {} and <= {}", tables::SIM1_TOLERANCE, tables::SIM2_TOLERANCE),
        passed: worst1 <= tables::SIM1_TOLERANCE && worst2 <= tables::SIM2_TOLERANCE,
    })
}

pub fn beta_update_check() -> Check {
    let w = UtilityWeights::default();
    let arm = ArmState::with_counts(1, [3, 1, 4, 2]);
    let one = utility_posterior(&arm, &w, 1.0, 1.0, None);
    let pooled = utility_posterior(&arm, &w, 1.0, 1.0, Some(&arm));
    let close = |b: BetaParams, a: f64, bb: f64| (b.a - a).abs() < 1e-12 && (b.b - bb).abs() < 1e-12;
    Check {
        name: "beta_update",
        observed: format!("Beta({}, {}), pooled Beta({}, {})", one.a, one.b, pooled.a, pooled.b),
        expected: "Beta(6.2, 5.8), pooled Beta(11.4, 10.6)".into(),
        passed: close(one, 6.2, 5.8) && close(pooled, 11.4, 10.6),
    }
}

pub fn beta_tail_check() -> Check {
    // 3 toxicities and 15 responses in 30: Beta(4, 28) and Beta(16, 16).
    let arm = ArmState::with_counts(1, [14, 1, 13, 2]);
    let (p_safe, p_eff) = arm_tail_probs(&arm, 0.2, 0.2);
    Check {
        name: "beta_tails",
        observed: format!("{p_safe:.6}, {p_eff:.6}"),
        expected: "0.892996, 0.999912".into(),
        passed: (p_safe - 0.892_996).abs() < 1e-5 && (p_eff - 0.999_912).abs() < 1e-5,
    }
}

pub fn bar_exact_check() -> Result<Check, ServiceError> {
    let xi = bar_probabilities(&[BetaParams { a: 2.0, b: 1.0 }, BetaParams { a: 1.0, b: 2.0 }], 100_000, 5)?;
    Ok(Check {
        name: "bar_exact",
        observed: format!("({:.4}, {:.4})", xi[0], xi[1]),
        expected: "(0.8333, 0.1667) +- 0.01".into(),
        passed: (xi[0] - 5.0 / 6.0).abs() < 0.01 && (xi[1] - 1.0 / 6.0).abs() < 0.01,
    })
}

pub fn run(perturbation: Perturbation) -> Result<Report, ServiceError> {
    Ok(Report {
        checks: vec![
            auc_table_check()?,
            auc_quadrature_check()?,
            eta_check(perturbation.eta_closed_form)?,
            utility_table_check()?,
            beta_update_check(),
            beta_tail_check(),
            bar_exact_check()?,
        ],
    })
}
