//! Synthetic wetware backend: seeded spike-response twin with
//! viability-sensitive state and rest/recalibrate recovery.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::adapter::{ensure_supported, health_flag, Adapter, AdapterError, FailureCode, RawResult};
use crate::config::WetwareConfig;
use crate::fixtures;
use crate::model::{
    CapabilityDescriptor, HealthStatus, LifecycleOp, LifecycleState, ModalPayload,
    ResourceDescriptor,
};

#[derive(Debug)]
struct WetwareTwinState {
    viability: f64,
    invocations_since_recalibrate: u32,
    rng: ChaCha8Rng,
    lifecycle: LifecycleState,
}

pub struct WetwareAdapter {
    config: WetwareConfig,
    resource: ResourceDescriptor,
    capability: CapabilityDescriptor,
    state: Mutex<WetwareTwinState>,
    calls: AtomicU64,
}

impl WetwareAdapter {
    pub fn new(config: WetwareConfig) -> Self {
        let (resource, capability) = fixtures::wetware_descriptor();
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let viability = config.initial_viability;
        WetwareAdapter {
            config,
            resource,
            capability,
            state: Mutex::new(WetwareTwinState {
                viability,
                invocations_since_recalibrate: 0,
                rng,
                lifecycle: LifecycleState::Uninitialized,
            }),
            calls: AtomicU64::new(0),
        }
    }

    fn drift(invocations: u32) -> f64 {
        (invocations as f64 / 100.0).min(1.0)
    }
}

impl Adapter for WetwareAdapter {
    fn describe(&self) -> (ResourceDescriptor, CapabilityDescriptor) {
        (self.resource.clone(), self.capability.clone())
    }

    fn prepare(&self) -> Result<(), AdapterError> {
        self.state.lock().unwrap().lifecycle = LifecycleState::Ready;
        Ok(())
    }

    fn invoke(
        &self,
        payload: &ModalPayload,
        _required_telemetry: &BTreeSet<String>,
    ) -> Result<RawResult, AdapterError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let mut state = self.state.lock().unwrap();
        if state.lifecycle != LifecycleState::Ready {
            return Err(AdapterError::NotReady(format!(
                "wetware adapter in state {:?}",
                state.lifecycle
            )));
        }
        let stim = match payload {
            ModalPayload::Stimulation(stim) => stim,
            other => {
                return Err(AdapterError::InvalidInput(format!(
                    "expected stimulation, got {:?} payload",
                    other.modality()
                )))
            }
        };
        if stim.iter().any(|e| e.channel >= self.config.channels) {
            return Err(AdapterError::InvalidInput(format!(
                "channel out of range (have {} channels)",
                self.config.channels
            )));
        }

        let bound = self.resource.tenancy.safety_bounds;
        if stim.iter().any(|e| e.amplitude.abs() > bound) {
            let mut result =
                RawResult::failure(FailureCode::SafetyBound, ModalPayload::Vector(vec![]));
            result.telemetry.insert("viability_score".into(), state.viability);
            return Ok(result);
        }
        if state.viability <= 0.2 {
            let mut result =
                RawResult::failure(FailureCode::Nonviable, ModalPayload::Vector(vec![]));
            result.telemetry.insert("viability_score".into(), state.viability);
            result.telemetry.insert("health_flag".into(), 1.0);
            return Ok(result);
        }

        let total_amplitude: f64 = stim.iter().map(|e| e.amplitude.abs()).sum();
        let gain = (total_amplitude / 10.0).tanh();
        let noise = Normal::new(0.0, self.config.noise_sigma)
            .expect("noise_sigma must be non-negative")
            .sample(&mut state.rng);
        let firing_rate = self.config.base_rate_hz * state.viability * gain + noise;
        let response_delay_ms: f64 = state.rng.random_range(5.0..20.0);

        state.viability = (state.viability - self.config.viability_decrement).max(0.0);
        state.invocations_since_recalibrate += 1;

        let mut telemetry = BTreeMap::new();
        telemetry.insert("firing_rate".into(), firing_rate);
        telemetry.insert("response_delay_ms".into(), response_delay_ms);
        telemetry.insert("noise_level".into(), self.config.noise_sigma);
        telemetry.insert("viability_score".into(), state.viability);
        telemetry.insert(
            "drift_score".into(),
            Self::drift(state.invocations_since_recalibrate),
        );
        telemetry.insert("health_flag".into(), health_flag(health_of(state.viability)));

        let mut metadata = BTreeMap::new();
        metadata.insert("stimulation_protocol".into(), "burst_v1".into());
        metadata.insert("supervision_ack".into(), "true".into());

        Ok(RawResult {
            ok: true,
            output: ModalPayload::Vector(vec![firing_rate]),
            telemetry,
            backend_latency_ms: response_delay_ms,
            observation_latency_ms: response_delay_ms,
            metadata,
        })
    }

    fn lifecycle(&self, op: LifecycleOp) -> Result<(), AdapterError> {
        ensure_supported(&self.capability, op)?;
        let mut state = self.state.lock().unwrap();
        match op {
            LifecycleOp::Rest => {
                state.viability =
                    (state.viability + self.config.rest_increment).min(self.config.rest_cap);
            }
            LifecycleOp::Recalibrate => state.invocations_since_recalibrate = 0,
            _ => unreachable!("filtered by ensure_supported"),
        }
        state.lifecycle = LifecycleState::Ready;
        Ok(())
    }

    fn telemetry_snapshot(&self) -> BTreeMap<String, f64> {
        let state = self.state.lock().unwrap();
        let mut map = BTreeMap::new();
        map.insert("viability_score".into(), state.viability);
        map.insert("noise_level".into(), self.config.noise_sigma);
        map.insert(
            "drift_score".into(),
            Self::drift(state.invocations_since_recalibrate),
        );
        map.insert("health_flag".into(), health_flag(health_of(state.viability)));
        map
    }

    fn lifecycle_state(&self) -> LifecycleState {
        self.state.lock().unwrap().lifecycle
    }

    fn health(&self) -> HealthStatus {
        health_of(self.state.lock().unwrap().viability)
    }

    fn prep_estimate_s(&self) -> f64 {
        self.config.prep_cost_s
    }

    fn call_count(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

fn health_of(viability: f64) -> HealthStatus {
    if viability <= 0.2 {
        HealthStatus::Degraded
    } else {
        HealthStatus::Healthy
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StimulationEvent;

    fn stim(amplitude: f64) -> ModalPayload {
        ModalPayload::Stimulation(vec![StimulationEvent {
            channel: 0,
            amplitude,
            onset_ms: 0.0,
        }])
    }

    fn ready_adapter() -> WetwareAdapter {
        let adapter = WetwareAdapter::new(WetwareConfig::default());
        adapter.prepare().unwrap();
        adapter
    }

    #[test]
    fn empty_stimulation_yields_noise_only_firing() {
        let adapter = ready_adapter();
        let result = adapter
            .invoke(&ModalPayload::Stimulation(vec![]), &BTreeSet::new())
            .unwrap();
        assert!(result.ok);
        // tanh(0) = 0, so firing rate is pure noise with sigma 0.5.
        let firing = result.telemetry["firing_rate"];
        assert!(firing.abs() < 5.0 * 0.5, "firing {firing} should be noise only");
    }

    #[test]
    fn seventy_five_invocations_exhaust_viability() {
        let adapter = ready_adapter();
        for i in 0..75 {
            let r = adapter.invoke(&stim(1.0), &BTreeSet::new()).unwrap();
            assert!(r.ok, "invoke {i} should succeed");
        }
        let tel = adapter.telemetry_snapshot();
        assert!((tel["viability_score"] - 0.20).abs() < 1e-9);
        let failed = adapter.invoke(&stim(1.0), &BTreeSet::new()).unwrap();
        assert!(!failed.ok);
        assert_eq!(failed.metadata["failure"], "nonviable");
    }

    #[test]
    fn rest_recovers_viability_up_to_cap() {
        let adapter = ready_adapter();
        adapter.invoke(&stim(1.0), &BTreeSet::new()).unwrap();
        // 0.95 - 0.01 = 0.94; one rest caps at 0.95.
        adapter.lifecycle(LifecycleOp::Rest).unwrap();
        assert!((adapter.telemetry_snapshot()["viability_score"] - 0.95).abs() < 1e-12);
        adapter.lifecycle(LifecycleOp::Rest).unwrap();
        assert!((adapter.telemetry_snapshot()["viability_score"] - 0.95).abs() < 1e-12);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let a = ready_adapter();
        let b = ready_adapter();
        let ra = a.invoke(&stim(2.0), &BTreeSet::new()).unwrap();
        let rb = b.invoke(&stim(2.0), &BTreeSet::new()).unwrap();
        assert_eq!(ra, rb);
    }

    #[test]
    fn amplitude_beyond_safety_bound_fails() {
        let adapter = ready_adapter();
        let result = adapter.invoke(&stim(11.0), &BTreeSet::new()).unwrap();
        assert!(!result.ok);
        assert_eq!(result.metadata["failure"], "safety_bound");
    }

    #[test]
    fn metadata_carries_exactly_two_keys() {
        let adapter = ready_adapter();
        let result = adapter.invoke(&stim(1.0), &BTreeSet::new()).unwrap();
        assert_eq!(result.metadata.len(), 2);
        assert!(result.metadata.contains_key("stimulation_protocol"));
        assert!(result.metadata.contains_key("supervision_ack"));
    }
}
