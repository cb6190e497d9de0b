//! Fast backend: low-latency vector twin with multiplicative weight drift,
//! drift-aware telemetry, and reprogram/reset recovery. Also carries the
//! fault-injection hooks used by the campaign (forced drift, prepare
//! failure, telemetry omission).

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::adapter::{ensure_supported, health_flag, Adapter, AdapterError, RawResult};
use crate::config::FastConfig;
use crate::fixtures;
use crate::model::{
    CapabilityDescriptor, HealthStatus, LifecycleOp, LifecycleState, ModalPayload,
    ResourceDescriptor,
};

#[derive(Debug)]
struct FastTwinState {
    w_current: Vec<Vec<f64>>,
    drift_accumulator: f64,
    lifecycle: LifecycleState,
    omit_telemetry: Option<String>,
}

pub struct FastAdapter {
    config: FastConfig,
    resource: ResourceDescriptor,
    capability: CapabilityDescriptor,
    state: Mutex<FastTwinState>,
    fail_prepare: AtomicBool,
    calls: AtomicU64,
}

impl FastAdapter {
    pub fn new(config: FastConfig) -> Self {
        Self::with_descriptor(config, fixtures::local_fast_descriptor())
    }

    /// Same twin behind a different identity; used by the externalized
    /// service to host its own independent instance.
    pub fn with_descriptor(
        config: FastConfig,
        (resource, capability): (ResourceDescriptor, CapabilityDescriptor),
    ) -> Self {
        let w_current = config.weights.clone();
        FastAdapter {
            config,
            resource,
            capability,
            state: Mutex::new(FastTwinState {
                w_current,
                drift_accumulator: 0.0,
                lifecycle: LifecycleState::Uninitialized,
                omit_telemetry: None,
            }),
            fail_prepare: AtomicBool::new(false),
            calls: AtomicU64::new(0),
        }
    }

    /// Fault hook: forces the drift accumulator to `value`.
    pub fn set_drift(&self, value: f64) {
        self.state.lock().unwrap().drift_accumulator = value.clamp(0.0, 1.0);
    }

    /// Fault hook: makes the next `prepare` calls fail until disarmed.
    pub fn arm_prepare_failure(&self, armed: bool) {
        self.fail_prepare.store(armed, Ordering::SeqCst);
    }

    /// Fault hook: drops the named field from invoke telemetry.
    pub fn set_telemetry_omission(&self, field: Option<String>) {
        self.state.lock().unwrap().omit_telemetry = field;
    }
}

impl Adapter for FastAdapter {
    fn describe(&self) -> (ResourceDescriptor, CapabilityDescriptor) {
        (self.resource.clone(), self.capability.clone())
    }

    fn prepare(&self) -> Result<(), AdapterError> {
        let mut state = self.state.lock().unwrap();
        if self.fail_prepare.load(Ordering::SeqCst) {
            state.lifecycle = LifecycleState::Recovering;
            return Err(AdapterError::PrepareFailed("injected prepare fault".into()));
        }
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
        if state.lifecycle != LifecycleState::Ready {
            return Err(AdapterError::NotReady(format!(
                "fast adapter in state {:?}",
                state.lifecycle
            )));
        }
        let x = match payload {
            ModalPayload::Vector(x) => x,
            other => {
                return Err(AdapterError::InvalidInput(format!(
                    "expected vector, got {:?} payload",
                    other.modality()
                )))
            }
        };
        if x.len() != self.config.dim {
            return Err(AdapterError::InvalidInput(format!(
                "expected dimension {}, got {}",
                self.config.dim,
                x.len()
            )));
        }

        let wall_start = Instant::now();
        let y: Vec<f64> = state
            .w_current
            .iter()
            .map(|row| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>().tanh())
            .collect();
        for row in &mut state.w_current {
            for w in row {
                *w *= 1.0 + self.config.drift_delta;
            }
        }
        state.drift_accumulator = (state.drift_accumulator + self.config.drift_delta).min(1.0);
        let wall_ms = wall_start.elapsed().as_secs_f64() * 1000.0;

        let energy_proxy: f64 = y.iter().map(|v| v.abs()).sum();
        let mut telemetry = BTreeMap::new();
        telemetry.insert("drift_score".into(), state.drift_accumulator);
        telemetry.insert("execution_latency_ms".into(), wall_ms);
        telemetry.insert("energy_proxy".into(), energy_proxy);
        telemetry.insert("health_flag".into(), health_flag(HealthStatus::Healthy));
        if let Some(field) = &state.omit_telemetry {
            telemetry.remove(field);
        }

        let mut metadata = BTreeMap::new();
        metadata.insert("program_version".into(), self.config.program_version.clone());

        Ok(RawResult {
            ok: true,
            output: ModalPayload::Vector(y),
            telemetry,
            backend_latency_ms: wall_ms,
            observation_latency_ms: wall_ms,
            metadata,
        })
    }

    fn lifecycle(&self, op: LifecycleOp) -> Result<(), AdapterError> {
        ensure_supported(&self.capability, op)?;
        let mut state = self.state.lock().unwrap();
        match op {
            LifecycleOp::Reprogram => {
                state.w_current = self.config.weights.clone();
                state.drift_accumulator = 0.0;
            }
            LifecycleOp::Reset => {
                state.w_current = self.config.weights.clone();
                state.drift_accumulator = 0.0;
                state.omit_telemetry = None;
            }
            LifecycleOp::Recalibrate => state.drift_accumulator = 0.0,
            _ => unreachable!("filtered by ensure_supported"),
        }
        state.lifecycle = LifecycleState::Ready;
        Ok(())
    }

    fn telemetry_snapshot(&self) -> BTreeMap<String, f64> {
        let state = self.state.lock().unwrap();
        let mut map = BTreeMap::new();
        map.insert("drift_score".into(), state.drift_accumulator);
        map.insert("health_flag".into(), health_flag(HealthStatus::Healthy));
        map
    }

    fn lifecycle_state(&self) -> LifecycleState {
        self.state.lock().unwrap().lifecycle
    }

    fn health(&self) -> HealthStatus {
        if self.state.lock().unwrap().lifecycle == LifecycleState::Failed {
            HealthStatus::Failed
        } else {
            HealthStatus::Healthy
        }
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

    fn ready_adapter() -> FastAdapter {
        let adapter = FastAdapter::new(FastConfig::default());
        adapter.prepare().unwrap();
        adapter
    }

    #[test]
    fn zero_vector_maps_to_zero_output() {
        let adapter = ready_adapter();
        let result = adapter
            .invoke(&ModalPayload::Vector(vec![0.0; 4]), &BTreeSet::new())
            .unwrap();
        let ModalPayload::Vector(y) = result.output else {
            panic!("wrong modality")
        };
        assert_eq!(y, vec![0.0; 4]);
        assert_eq!(result.telemetry["energy_proxy"], 0.0);
    }

    #[test]
    fn drift_accumulates_and_reprogram_resets() {
        let adapter = ready_adapter();
        for _ in 0..100 {
            adapter
                .invoke(&ModalPayload::Vector(vec![0.1; 4]), &BTreeSet::new())
                .unwrap();
        }
        assert!((adapter.telemetry_snapshot()["drift_score"] - 0.5).abs() < 1e-9);
        adapter.lifecycle(LifecycleOp::Reprogram).unwrap();
        assert_eq!(adapter.telemetry_snapshot()["drift_score"], 0.0);
    }

    #[test]
    fn output_components_stay_in_open_unit_interval() {
        let adapter = ready_adapter();
        let result = adapter
            .invoke(&ModalPayload::Vector(vec![50.0, -50.0, 10.0, -10.0]), &BTreeSet::new())
            .unwrap();
        let ModalPayload::Vector(y) = result.output else {
            panic!("wrong modality")
        };
        assert!(y.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let adapter = ready_adapter();
        assert!(matches!(
            adapter.invoke(&ModalPayload::Vector(vec![1.0; 3]), &BTreeSet::new()),
            Err(AdapterError::InvalidInput(_))
        ));
    }

    #[test]
    fn armed_prepare_failure_fails_until_disarmed() {
        let adapter = FastAdapter::new(FastConfig::default());
        adapter.arm_prepare_failure(true);
        assert!(adapter.prepare().is_err());
        assert_eq!(adapter.lifecycle_state(), LifecycleState::Recovering);
        adapter.arm_prepare_failure(false);
        assert!(adapter.prepare().is_ok());
    }

    #[test]
    fn telemetry_omission_drops_the_field() {
        let adapter = ready_adapter();
        adapter.set_telemetry_omission(Some("energy_proxy".into()));
        let result = adapter
            .invoke(&ModalPayload::Vector(vec![0.1; 4]), &BTreeSet::new())
            .unwrap();
        assert!(!result.telemetry.contains_key("energy_proxy"));
    }
}
