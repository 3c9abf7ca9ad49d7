//! File-backed event logs, one NDJSON file per trial, with per-trial
//! serialization of mutations.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::Utc;
use uuid::Uuid;

use crate::error::ServiceError;
use crate::events::{parse_ndjson, to_ndjson_line, EventBody, TrialEvent, TrialState};

#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl Store {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| ServiceError::Io(format!("creating {}: {e}", dir.display())))?;
        Ok(Self { dir, locks: Mutex::new(HashMap::new()) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Canonical form of a trial id; anything that is not a UUID is unknown.
    pub fn canonical_id(id: &str) -> Result<String, ServiceError> {
        Uuid::parse_str(id).map(|u| u.to_string()).map_err(|_| ServiceError::NotFound(id.to_string()))
    }

    pub fn log_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.ndjson"))
    }

    /// Lock serializing mutations of one trial.
    pub fn lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut map = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(id.to_string()).or_default().clone()
    }

    pub fn events(&self, id: &str) -> Result<Vec<TrialEvent>, ServiceError> {
        let path = self.log_path(id);
        match std::fs::read_to_string(&path) {
            Ok(text) => parse_ndjson(id, &text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(ServiceError::NotFound(id.to_string())),
            Err(e) => Err(ServiceError::Io(format!("reading {}: {e}", path.display()))),
        }
    }

    pub fn load(&self, id: &str) -> Result<TrialState, ServiceError> {
        TrialState::replay(&self.events(id)?)
    }

    /// Stamps `bodies` with consecutive sequence numbers after `state`, appends
    /// them to the log and applies them. With no state, starts a new log.
    pub fn append(
        &self,
        id: &str,
        state: Option<TrialState>,
        bodies: Vec<EventBody>,
    ) -> Result<(TrialState, Vec<TrialEvent>), ServiceError> {
        let now = Utc::now();
        let start = state.as_ref().map_or(0, |s| s.last_sequence);
        let events: Vec<TrialEvent> = bodies
            .into_iter()
            .enumerate()
            .map(|(i, body)| TrialEvent { trial_id: id.to_string(), sequence: start + 1 + i as u64, timestamp: now, body })
            .collect();
        let next = match state {
            Some(mut s) => {
                for e in &events {
                    s.apply(e)?;
                }
                s
            }
            None => TrialState::replay(&events)?,
        };
        let mut text = String::new();
        for e in &events {
            text.push_str(&to_ndjson_line(e)?);
        }
        let path = self.log_path(id);
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| ServiceError::Io(format!("opening {}: {e}", path.display())))?;
        file.write_all(text.as_bytes())?;
        file.sync_data()?;
        Ok((next, events))
    }
}
