//! Wetware API stub: reproduces the two-timescale latency structure of an
//! external wetware-facing runtime (seconds-scale session handling around
//! a milliseconds-scale observation cycle) without any external dependency.
//! Session latencies are sampled numbers on the model clock; nothing
//! sleeps.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adapter::{ensure_supported, health_flag, Adapter, AdapterError, RawResult};
use crate::config::CorticalStubConfig;
use crate::fixtures;
use crate::model::{
    CapabilityDescriptor, HealthStatus, LifecycleOp, LifecycleState, ModalPayload,
    ResourceDescriptor,
};

#[derive(Debug)]
struct StubState {
    session: Option<String>,
    sessions_opened: u64,
    recordings: u64,
    rng: ChaCha8Rng,
    lifecycle: LifecycleState,
}

pub struct CorticalStubAdapter {
    config: CorticalStubConfig,
    resource: ResourceDescriptor,
    capability: CapabilityDescriptor,
    state: Mutex<StubState>,
    calls: AtomicU64,
}

impl CorticalStubAdapter {
    pub fn new(config: CorticalStubConfig) -> Self {
        let (resource, capability) = fixtures::cortical_stub_descriptor();
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        CorticalStubAdapter {
            config,
            resource,
            capability,
            state: Mutex::new(StubState {
                session: None,
                sessions_opened: 0,
                recordings: 0,
                rng,
                lifecycle: LifecycleState::Uninitialized,
            }),
            calls: AtomicU64::new(0),
        }
    }
}

impl Adapter for CorticalStubAdapter {
    fn describe(&self) -> (ResourceDescriptor, CapabilityDescriptor) {
        (self.resource.clone(), self.capability.clone())
    }

    fn prepare(&self) -> Result<(), AdapterError> {
        let mut state = self.state.lock().unwrap();
        state.sessions_opened += 1;
        state.session = Some(format!("cl-sess-{}", state.sessions_opened));
        state.lifecycle = LifecycleState::Ready;
        Ok(())
    }

    fn invoke(
        &self,
        payload: &ModalPayload,
        _required_telemetry: &BTreeSet<String>,
    ) -> Result<RawResult, AdapterError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let mut state = self.state.lock().unwrap();
        let session = state
            .session
            .clone()
            .ok_or_else(|| AdapterError::NotReady("session not established".into()))?;
        let stim = match payload {
            ModalPayload::Stimulation(stim) => stim,
            other => {
                return Err(AdapterError::InvalidInput(format!(
                    "expected stimulation, got {:?} payload",
                    other.modality()
                )))
            }
        };
        let bound = self.resource.tenancy.safety_bounds;
        if stim.iter().any(|e| e.amplitude.abs() > bound) {
            return Err(AdapterError::InvalidInput(
                "stimulation amplitude beyond safety bound".into(),
            ));
        }

        let (lat_lo, lat_hi) = self.config.backend_latency_range_ms;
        let (obs_lo, obs_hi) = self.config.observation_latency_range_ms;
        let backend_latency_ms = state.rng.random_range(lat_lo..lat_hi);
        let observation_latency_ms = state.rng.random_range(obs_lo..obs_hi);
        let fingerprint: Vec<f64> = (0..self.config.fingerprint_len)
            .map(|_| state.rng.random_range(0.0..30.0))
            .collect();
        let firing_rate = fingerprint.iter().sum::<f64>() / fingerprint.len() as f64;
        state.recordings += 1;

        let mut telemetry = BTreeMap::new();
        telemetry.insert("firing_rate".into(), firing_rate);
        telemetry.insert("response_delay_ms".into(), observation_latency_ms);
        telemetry.insert("viability_score".into(), 0.9);
        telemetry.insert("drift_score".into(), 0.0);
        telemetry.insert("health_flag".into(), health_flag(HealthStatus::Healthy));

        let mut metadata = BTreeMap::new();
        metadata.insert(
            "recording_artifact".into(),
            format!("artifact://cortical-stub/{session}/rec-{}", state.recordings),
        );
        metadata.insert("session_id".into(), session);

        Ok(RawResult {
            ok: true,
            output: ModalPayload::Vector(fingerprint),
            telemetry,
            backend_latency_ms,
            observation_latency_ms,
            metadata,
        })
    }

    fn lifecycle(&self, op: LifecycleOp) -> Result<(), AdapterError> {
        ensure_supported(&self.capability, op)?;
        let mut state = self.state.lock().unwrap();
        match op {
            LifecycleOp::Reset => {
                state.session = None;
                state.lifecycle = LifecycleState::Uninitialized;
                return Ok(());
            }
            LifecycleOp::Rest | LifecycleOp::Recalibrate => {}
            _ => unreachable!("filtered by ensure_supported"),
        }
        if state.session.is_some() {
            state.lifecycle = LifecycleState::Ready;
        }
        Ok(())
    }

    fn telemetry_snapshot(&self) -> BTreeMap<String, f64> {
        let state = self.state.lock().unwrap();
        let mut map = BTreeMap::new();
        map.insert("viability_score".into(), 0.9);
        map.insert("drift_score".into(), 0.0);
        map.insert(
            "session_established".into(),
            if state.session.is_some() { 1.0 } else { 0.0 },
        );
        map.insert("health_flag".into(), health_flag(HealthStatus::Healthy));
        map
    }

    fn lifecycle_state(&self) -> LifecycleState {
        self.state.lock().unwrap().lifecycle
    }

    fn health(&self) -> HealthStatus {
        HealthStatus::Healthy
    }

    fn prep_estimate_s(&self) -> f64 {
        self.config.prep_cost_s
    }

    fn call_count(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StimulationEvent;

    fn stim() -> ModalPayload {
        ModalPayload::Stimulation(vec![StimulationEvent {
            channel: 1,
            amplitude: 4.0,
            onset_ms: 0.0,
        }])
    }

    #[test]
    fn invoke_before_prepare_is_rejected() {
        let adapter = CorticalStubAdapter::new(CorticalStubConfig::default());
        let err = adapter.invoke(&stim(), &BTreeSet::new());
        assert!(matches!(err, Err(AdapterError::NotReady(_))));
    }

    #[test]
    fn latencies_stay_within_the_two_timescale_ranges() {
        let adapter = CorticalStubAdapter::new(CorticalStubConfig::default());
        adapter.prepare().unwrap();
        for _ in 0..3 {
            let result = adapter.invoke(&stim(), &BTreeSet::new()).unwrap();
            assert!(result.ok);
            assert!((6940.0..=7730.0).contains(&result.backend_latency_ms));
            assert!((16.4..=49.7).contains(&result.observation_latency_ms));
            assert!(result.metadata.contains_key("recording_artifact"));
        }
    }

    #[test]
    fn reset_tears_down_the_session() {
        let adapter = CorticalStubAdapter::new(CorticalStubConfig::default());
        adapter.prepare().unwrap();
        adapter.lifecycle(LifecycleOp::Reset).unwrap();
        assert!(adapter.invoke(&stim(), &BTreeSet::new()).is_err());
    }
}
