#![allow(dead_code)]

use pedoop::bayes::Phase1Data;
use pedoop::sim::{draw_patient, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Phase I dataset with `per_dose` patients on every dose of the phase I
/// study's scenario 2 (V ~ Gamma(4, 1), k ~ Gamma(3, 1), sigma = 1).
pub fn synthetic_phase1(per_dose: usize, seed: u64) -> Phase1Data {
    let scenario = Scenario::simulation1(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Phase1Data::new(scenario.grid.clone());
    for d in 0..scenario.grid.len() {
        for _ in 0..per_dose {
            data.patients.push(draw_patient(&scenario, d, &mut rng).unwrap());
        }
    }
    data
}

/// Batch-means mean and its standard error.
pub fn batch_mean_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let n = xs.len();
    let size = n / batches;
    let mean = xs.iter().sum::<f64>() / n as f64;
    let bm: Vec<f64> = (0..batches).map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let grand = bm.iter().sum::<f64>() / batches as f64;
    let var = bm.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}
