#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pedoop::bayes::McmcSettings;
use pedoop::phase1::Phase1Config;
use pedoop::phase2::Phase2Config;
use pedoop::sim::{generate_patient, Scenario, TrialConfig};
use pedoop_service::events::PatientInput;
use pedoop_service::store::Store;
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn app(dir: &std::path::Path) -> (Router, Arc<Store>) {
    let store = Arc::new(Store::open(dir).unwrap());
    (pedoop_service::http::router(store.clone()), store)
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

/// Small but complete design for end-to-end runs.
pub fn quick_design() -> TrialConfig {
    TrialConfig {
        phase1: Phase1Config { max_n: 9, ..TrialConfig::simulation2().phase1 },
        phase2: Phase2Config { cohort_size: 6, max_n: 18, bar_draws: 4000, ..Phase2Config::default() },
        mcmc: McmcSettings { iterations: 800, burn_in: 400, thin: 2, ..McmcSettings::default() },
        ..TrialConfig::simulation2()
    }
}

pub fn create_body(design: &TrialConfig) -> Value {
    json!({ "label": "test", "doses": [15.0, 30.0, 60.0, 90.0, 120.0], "design": design })
}

/// `size` simulated patients at one-based `level`, DLTs forced to `dlt`.
pub fn cohort(level: usize, size: usize, dlt: bool, seed: u64) -> Vec<PatientInput> {
    let sc = Scenario::simulation1(2).unwrap();
    (0..size)
        .map(|i| {
            let p = generate_patient(&sc, level - 1, seed * 100 + i as u64).unwrap();
            PatientInput { dose_level: level, times: p.times, log_conc: p.log_conc, dlt, efficacy: p.efficacy }
        })
        .collect()
}
