//! Twin plane: per-backend validity metadata fed by telemetry and read by
//! the matcher and the postcondition checks.
//!
//! The twin models themselves live in the adapters; this plane only tracks
//! synchronization timestamps, confidence, drift, and staleness.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::clock::Clock;
use crate::config::TwinConfig;
use crate::model::TwinStateView;

#[derive(Debug, Error)]
pub enum TwinError {
    #[error("unknown backend: {0}")]
    UnknownBackend(String),
}

#[derive(Debug)]
struct TwinRecord {
    twin_id: String,
    freshness_bound_ms: f64,
    confidence: f64,
    drift_score: f64,
    last_sync_ms: Option<f64>,
    was_stale: bool,
}

impl TwinRecord {
    fn age_ms(&self, now: f64) -> Option<f64> {
        self.last_sync_ms.map(|ts| (now - ts).max(0.0))
    }

    fn stale(&self, now: f64) -> bool {
        match self.age_ms(now) {
            Some(age) => age > self.freshness_bound_ms,
            None => true, // never synced
        }
    }

    fn view(&self, backend_id: &str, now: f64) -> TwinStateView {
        TwinStateView {
            backend_id: backend_id.to_string(),
            twin_id: self.twin_id.clone(),
            confidence: self.confidence,
            drift_score: self.drift_score,
            last_sync_ts: self.last_sync_ms.unwrap_or(0.0),
            age_of_information_ms: self.age_ms(now).unwrap_or(0.0),
            stale: self.stale(now),
        }
    }
}

pub struct TwinPlane {
    clock: Arc<dyn Clock>,
    config: TwinConfig,
    records: Mutex<BTreeMap<String, TwinRecord>>,
}

impl TwinPlane {
    pub fn new(clock: Arc<dyn Clock>, config: TwinConfig) -> Self {
        TwinPlane {
            clock,
            config,
            records: Mutex::new(BTreeMap::new()),
        }
    }

    /// Registers a twin record and performs the initial synchronization.
    pub fn register_twin(&self, backend_id: &str, twin_id: &str, freshness_bound_ms: f64) {
        let now = self.clock.now_ms();
        self.records.lock().unwrap().insert(
            backend_id.to_string(),
            TwinRecord {
                twin_id: twin_id.to_string(),
                freshness_bound_ms,
                confidence: self.config.initial_confidence,
                drift_score: 0.0,
                last_sync_ms: Some(now),
                was_stale: false,
            },
        );
    }

    /// Associates telemetry with the twin and updates synchronization
    /// metadata. Consistent telemetry slowly raises confidence; telemetry
    /// carrying an unhealthy `health_flag` halves it.
    pub fn ingest_telemetry(
        &self,
        backend_id: &str,
        telemetry: &BTreeMap<String, f64>,
        now: f64,
    ) -> Result<TwinStateView, TwinError> {
        let mut records = self.records.lock().unwrap();
        let record = records
            .get_mut(backend_id)
            .ok_or_else(|| TwinError::UnknownBackend(backend_id.to_string()))?;
        record.last_sync_ms = Some(now);
        if let Some(&drift) = telemetry.get("drift_score") {
            record.drift_score = drift.clamp(0.0, 1.0);
        }
        let unhealthy = telemetry.get("health_flag").is_some_and(|&f| f > 0.0);
        if unhealthy {
            record.confidence *= self.config.confidence_loss_factor;
        } else {
            record.confidence = (record.confidence + self.config.confidence_gain).clamp(0.0, 1.0);
        }
        record.was_stale = record.stale(now);
        Ok(record.view(backend_id, now))
    }

    /// Milliseconds since the last sync, `None` when the backend has never
    /// synced (treated as infinitely old, hence always stale).
    pub fn age_of_information(&self, backend_id: &str, now: f64) -> Result<Option<f64>, TwinError> {
        let records = self.records.lock().unwrap();
        let record = records
            .get(backend_id)
            .ok_or_else(|| TwinError::UnknownBackend(backend_id.to_string()))?;
        Ok(record.age_ms(now))
    }

    pub fn view(&self, backend_id: &str, now: f64) -> Result<TwinStateView, TwinError> {
        let records = self.records.lock().unwrap();
        let record = records
            .get(backend_id)
            .ok_or_else(|| TwinError::UnknownBackend(backend_id.to_string()))?;
        Ok(record.view(backend_id, now))
    }

    /// Recomputes staleness for every backend and returns the ids that
    /// transitioned fresh -> stale since the previous sweep.
    pub fn mark_stale_sweep(&self, now: f64) -> Vec<String> {
        let mut records = self.records.lock().unwrap();
        let mut newly_stale = Vec::new();
        for (id, record) in records.iter_mut() {
            let stale = record.stale(now);
            if stale && !record.was_stale {
                newly_stale.push(id.clone());
            }
            record.was_stale = stale;
        }
        newly_stale
    }

    /// Fault-injection hook: forces the age of information to `age_ms` by
    /// moving the last sync timestamp into the past.
    pub fn force_age(&self, backend_id: &str, age_ms: f64) -> Result<(), TwinError> {
        let now = self.clock.now_ms();
        let mut records = self.records.lock().unwrap();
        let record = records
            .get_mut(backend_id)
            .ok_or_else(|| TwinError::UnknownBackend(backend_id.to_string()))?;
        record.last_sync_ms = Some(now - age_ms);
        Ok(())
    }

    /// Resets a record to its post-registration state.
    pub fn resync(&self, backend_id: &str) -> Result<(), TwinError> {
        let now = self.clock.now_ms();
        let mut records = self.records.lock().unwrap();
        let record = records
            .get_mut(backend_id)
            .ok_or_else(|| TwinError::UnknownBackend(backend_id.to_string()))?;
        record.last_sync_ms = Some(now);
        record.confidence = self.config.initial_confidence;
        record.drift_score = 0.0;
        record.was_stale = false;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::VirtualClock;

    fn plane() -> (Arc<VirtualClock>, TwinPlane) {
        let clock = VirtualClock::new();
        let plane = TwinPlane::new(clock.clone(), TwinConfig::default());
        (clock, plane)
    }

    fn telemetry(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn healthy_ingest_raises_confidence_by_gain() {
        let (clock, plane) = plane();
        plane.register_twin("b", "twin-b", 1000.0);
        // Drive confidence down to 0.9 first: one unhealthy (1.0 -> 0.5),
        // then eight healthy ingests (0.5 + 8 * 0.05 = 0.9).
        plane
            .ingest_telemetry("b", &telemetry(&[("health_flag", 1.0)]), clock.now_ms())
            .unwrap();
        for _ in 0..8 {
            plane
                .ingest_telemetry("b", &telemetry(&[]), clock.now_ms())
                .unwrap();
        }
        let view = plane
            .ingest_telemetry("b", &telemetry(&[]), clock.now_ms())
            .unwrap();
        assert!((view.confidence - 0.95).abs() < 1e-12);
        assert_eq!(view.age_of_information_ms, 0.0);
    }

    #[test]
    fn degraded_ingest_halves_confidence() {
        let (clock, plane) = plane();
        plane.register_twin("b", "twin-b", 1000.0);
        // 1.0 -> 0.5 -> ... -> reach 0.8 via 0.5 + 6*0.05; then halve.
        plane
            .ingest_telemetry("b", &telemetry(&[("health_flag", 1.0)]), clock.now_ms())
            .unwrap();
        for _ in 0..6 {
            plane
                .ingest_telemetry("b", &telemetry(&[]), clock.now_ms())
                .unwrap();
        }
        let view = plane
            .ingest_telemetry("b", &telemetry(&[("health_flag", 1.0)]), clock.now_ms())
            .unwrap();
        assert!((view.confidence - 0.4).abs() < 1e-12);
    }

    #[test]
    fn drift_passes_through() {
        let (clock, plane) = plane();
        plane.register_twin("b", "twin-b", 1000.0);
        let view = plane
            .ingest_telemetry("b", &telemetry(&[("drift_score", 1.0)]), clock.now_ms())
            .unwrap();
        assert_eq!(view.drift_score, 1.0);
    }

    #[test]
    fn age_is_zero_at_sync_and_grows_past_bound() {
        let (clock, plane) = plane();
        plane.register_twin("chem", "twin-chem", 600_000.0);
        let t0 = clock.now_ms();
        plane.ingest_telemetry("chem", &telemetry(&[]), t0).unwrap();
        assert_eq!(plane.age_of_information("chem", t0).unwrap(), Some(0.0));
        clock.advance_ms(600_001.0);
        let view = plane.view("chem", clock.now_ms()).unwrap();
        assert!(view.stale);
        assert_eq!(view.age_of_information_ms, 600_001.0);
    }

    #[test]
    fn never_synced_backend_is_stale() {
        let (clock, plane) = plane();
        {
            let mut records = plane.records.lock().unwrap();
            records.insert(
                "raw".into(),
                TwinRecord {
                    twin_id: "twin-raw".into(),
                    freshness_bound_ms: 1000.0,
                    confidence: 1.0,
                    drift_score: 0.0,
                    last_sync_ms: None,
                    was_stale: false,
                },
            );
        }
        assert_eq!(plane.age_of_information("raw", clock.now_ms()).unwrap(), None);
        assert!(plane.view("raw", clock.now_ms()).unwrap().stale);
    }

    #[test]
    fn sweep_reports_only_transitions() {
        let (clock, plane) = plane();
        plane.register_twin("a", "twin-a", 1000.0);
        plane.register_twin("b", "twin-b", 5000.0);
        assert!(plane.mark_stale_sweep(clock.now_ms()).is_empty());
        clock.advance_ms(1500.0);
        assert_eq!(plane.mark_stale_sweep(clock.now_ms()), vec!["a".to_string()]);
        // Idempotent without clock advance.
        assert!(plane.mark_stale_sweep(clock.now_ms()).is_empty());
    }

    #[test]
    fn unknown_backend_errors() {
        let (clock, plane) = plane();
        assert!(plane.view("ghost", clock.now_ms()).is_err());
    }
}
