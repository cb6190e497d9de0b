//! Chemical backend: concentration-driven assay computation realized as an
//! ODE twin with slow model-time semantics and contamination-gated reuse.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::adapter::{ensure_supported, health_flag, Adapter, AdapterError, FailureCode, RawResult};
use crate::config::ChemicalConfig;
use crate::fixtures;
use crate::model::{
    CapabilityDescriptor, HealthStatus, LifecycleOp, LifecycleState, ModalPayload,
    ResourceDescriptor,
};

/// Outcome of integrating the concentration dynamics to steady state.
#[derive(Debug, Clone)]
pub struct IntegrationResult {
    pub x: Vec<f64>,
    pub model_time_s: f64,
    pub converged: bool,
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn mat_vec(w: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    w.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Explicit-Euler integration of dx/dt = k * (sigma(W u + b) - x) from
/// `x0` until the per-step infinity-norm change drops below `tol` or model
/// time exceeds `max_t`.
pub fn integrate_to_fixed_point(
    k: f64,
    w: &[Vec<f64>],
    b: &[f64],
    u: &[f64],
    x0: &[f64],
    h: f64,
    tol: f64,
    max_t: f64,
) -> IntegrationResult {
    let drive: Vec<f64> = mat_vec(w, u)
        .iter()
        .zip(b)
        .map(|(wu, bi)| logistic(wu + bi))
        .collect();
    let mut x = x0.to_vec();
    let mut t = 0.0;
    while t <= max_t {
        let mut max_step = 0.0f64;
        for (xi, di) in x.iter_mut().zip(&drive) {
            let step = h * k * (di - *xi);
            *xi += step;
            max_step = max_step.max(step.abs());
        }
        t += h;
        if max_step < tol {
            return IntegrationResult {
                x,
                model_time_s: t,
                converged: true,
            };
        }
    }
    IntegrationResult {
        x,
        model_time_s: t,
        converged: false,
    }
}

#[derive(Debug)]
struct ChemicalTwinState {
    x: Vec<f64>,
    invokes_since_flush: u32,
    invokes_since_recalibrate: u32,
    model_clock_s: f64,
    lifecycle: LifecycleState,
}

pub struct ChemicalAdapter {
    config: ChemicalConfig,
    resource: ResourceDescriptor,
    capability: CapabilityDescriptor,
    state: Mutex<ChemicalTwinState>,
    calls: AtomicU64,
}

impl ChemicalAdapter {
    pub fn new(config: ChemicalConfig) -> Self {
        let (resource, capability) = fixtures::chemical_descriptor();
        let dim = config.dim;
        ChemicalAdapter {
            config,
            resource,
            capability,
            state: Mutex::new(ChemicalTwinState {
                x: vec![0.0; dim],
                invokes_since_flush: 0,
                invokes_since_recalibrate: 0,
                model_clock_s: 0.0,
                lifecycle: LifecycleState::Uninitialized,
            }),
            calls: AtomicU64::new(0),
        }
    }

    /// Contamination is derived from an integer invoke counter so the
    /// threshold comparison is exact.
    fn contamination(&self, invokes_since_flush: u32) -> f64 {
        (self.config.contamination_increment * invokes_since_flush as f64).min(1.0)
    }

    fn calibration_confidence(invokes: u32) -> f64 {
        (1.0 - 0.01 * invokes as f64).max(0.5)
    }

    fn drift(invokes: u32) -> f64 {
        (0.01 * invokes as f64).min(1.0)
    }
}

impl Adapter for ChemicalAdapter {
    fn describe(&self) -> (ResourceDescriptor, CapabilityDescriptor) {
        (self.resource.clone(), self.capability.clone())
    }

    fn prepare(&self) -> Result<(), AdapterError> {
        let mut state = self.state.lock().unwrap();
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
                "chemical adapter in state {:?}",
                state.lifecycle
            )));
        }
        let u = match payload {
            ModalPayload::Concentrations(u) => u,
            other => {
                return Err(AdapterError::InvalidInput(format!(
                    "expected concentrations, got {:?} payload",
                    other.modality()
                )))
            }
        };
        if u.len() != self.config.dim {
            return Err(AdapterError::InvalidInput(format!(
                "expected {} concentrations, got {}",
                self.config.dim,
                u.len()
            )));
        }
        let range = &self.capability.admissible_range;
        if u.iter().any(|v| !v.is_finite() || *v < range.min || *v > range.max) {
            return Err(AdapterError::InvalidInput(
                "concentration outside admissible range".into(),
            ));
        }

        let contamination = self.contamination(state.invokes_since_flush);
        if contamination >= self.config.contamination_threshold {
            let mut result = RawResult::failure(
                FailureCode::Contaminated,
                ModalPayload::Concentrations(state.x.clone()),
            );
            result
                .telemetry
                .insert("contamination_level".into(), contamination);
            result.telemetry.insert("health_flag".into(), 1.0);
            return Ok(result);
        }

        let wall_start = Instant::now();
        state.lifecycle = LifecycleState::Executing;
        let integration = integrate_to_fixed_point(
            self.config.rate_k,
            &self.config.weights,
            &self.config.bias,
            u,
            &state.x,
            self.config.euler_step_s,
            self.config.convergence_tol,
            self.config.max_model_time_s,
        );
        debug_assert!(integration.x.iter().all(|v| *v >= 0.0));
        state.model_clock_s += integration.model_time_s;
        state.lifecycle = LifecycleState::Ready;
        let wall_ms = wall_start.elapsed().as_secs_f64() * 1000.0;

        if !integration.converged {
            let mut result = RawResult::failure(
                FailureCode::NoConvergence,
                ModalPayload::Concentrations(integration.x),
            );
            result.telemetry.insert("health_flag".into(), 1.0);
            result.backend_latency_ms = wall_ms;
            return Ok(result);
        }

        state.x = integration.x.clone();
        state.invokes_since_flush += 1;
        state.invokes_since_recalibrate += 1;

        let mut telemetry = BTreeMap::new();
        telemetry.insert(
            "contamination_level".into(),
            self.contamination(state.invokes_since_flush),
        );
        telemetry.insert("convergence_time".into(), integration.model_time_s);
        telemetry.insert(
            "calibration_confidence".into(),
            Self::calibration_confidence(state.invokes_since_recalibrate),
        );
        telemetry.insert(
            "drift_score".into(),
            Self::drift(state.invokes_since_recalibrate),
        );
        telemetry.insert("health_flag".into(), health_flag(self.health_locked(&state)));

        let mut metadata = BTreeMap::new();
        metadata.insert("assay_protocol".into(), "steady_state_v1".into());

        Ok(RawResult {
            ok: true,
            output: ModalPayload::Concentrations(integration.x),
            telemetry,
            // Wall latency of the compute; the seconds-scale assay duration
            // is model time and reported as convergence_time.
            backend_latency_ms: wall_ms,
            observation_latency_ms: integration.model_time_s * 1000.0,
            metadata,
        })
    }

    fn lifecycle(&self, op: LifecycleOp) -> Result<(), AdapterError> {
        ensure_supported(&self.capability, op)?;
        let mut state = self.state.lock().unwrap();
        match op {
            LifecycleOp::Flush => state.invokes_since_flush = 0,
            LifecycleOp::Recharge => {
                state.x = vec![0.0; self.config.dim];
            }
            LifecycleOp::Recalibrate => state.invokes_since_recalibrate = 0,
            _ => unreachable!("filtered by ensure_supported"),
        }
        state.lifecycle = LifecycleState::Ready;
        Ok(())
    }

    fn telemetry_snapshot(&self) -> BTreeMap<String, f64> {
        let state = self.state.lock().unwrap();
        let mut map = BTreeMap::new();
        map.insert(
            "contamination_level".into(),
            self.contamination(state.invokes_since_flush),
        );
        map.insert(
            "calibration_confidence".into(),
            Self::calibration_confidence(state.invokes_since_recalibrate),
        );
        map.insert(
            "drift_score".into(),
            Self::drift(state.invokes_since_recalibrate),
        );
        map.insert("health_flag".into(), health_flag(self.health_locked(&state)));
        map
    }

    fn lifecycle_state(&self) -> LifecycleState {
        self.state.lock().unwrap().lifecycle
    }

    fn health(&self) -> HealthStatus {
        let state = self.state.lock().unwrap();
        self.health_locked(&state)
    }

    fn prep_estimate_s(&self) -> f64 {
        self.config.prep_cost_s
    }

    fn call_count(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ChemicalAdapter {
    fn health_locked(&self, state: &ChemicalTwinState) -> HealthStatus {
        if self.contamination(state.invokes_since_flush) >= self.config.contamination_threshold {
            HealthStatus::Degraded
        } else {
            HealthStatus::Healthy
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ready_adapter() -> ChemicalAdapter {
        let adapter = ChemicalAdapter::new(ChemicalConfig::default());
        adapter.prepare().unwrap();
        adapter
    }

    fn zero_input() -> ModalPayload {
        ModalPayload::Concentrations(vec![0.0; 4])
    }

    #[test]
    fn zero_input_zero_bias_converges_to_half() {
        // sigma(0) = 0.5 is the analytic fixed point.
        let mut config = ChemicalConfig::default();
        config.weights = vec![vec![0.0; 4]; 4];
        let adapter = ChemicalAdapter::new(config);
        adapter.prepare().unwrap();
        let result = adapter.invoke(&zero_input(), &BTreeSet::new()).unwrap();
        assert!(result.ok);
        let ModalPayload::Concentrations(x) = result.output else {
            panic!("wrong output modality")
        };
        for v in x {
            assert!((v - 0.5).abs() < 1e-4, "got {v}");
        }
    }

    #[test]
    fn contamination_accumulates_per_invoke() {
        let adapter = ready_adapter();
        for _ in 0..3 {
            assert!(adapter.invoke(&zero_input(), &BTreeSet::new()).unwrap().ok);
        }
        let tel = adapter.telemetry_snapshot();
        assert!((tel["contamination_level"] - 0.15).abs() < 1e-12);
    }

    #[test]
    fn eleventh_invoke_fails_contaminated_until_flush() {
        let adapter = ready_adapter();
        for i in 0..10 {
            let r = adapter.invoke(&zero_input(), &BTreeSet::new()).unwrap();
            assert!(r.ok, "invoke {i} should succeed");
        }
        let failed = adapter.invoke(&zero_input(), &BTreeSet::new()).unwrap();
        assert!(!failed.ok);
        assert_eq!(failed.metadata["failure"], "contaminated");
        assert!(failed.telemetry.contains_key("failure_code"));

        adapter.lifecycle(LifecycleOp::Flush).unwrap();
        assert!(adapter.invoke(&zero_input(), &BTreeSet::new()).unwrap().ok);
    }

    #[test]
    fn invoke_counts_are_observable() {
        let adapter = ready_adapter();
        assert_eq!(adapter.call_count(), 0);
        adapter.invoke(&zero_input(), &BTreeSet::new()).unwrap();
        assert_eq!(adapter.call_count(), 1);
    }

    #[test]
    fn out_of_range_concentration_is_rejected() {
        let adapter = ready_adapter();
        let err = adapter.invoke(
            &ModalPayload::Concentrations(vec![0.0, 2.0, 0.0, 0.0]),
            &BTreeSet::new(),
        );
        assert!(matches!(err, Err(AdapterError::InvalidInput(_))));
    }

    #[test]
    fn unsupported_op_is_rejected() {
        let adapter = ready_adapter();
        assert!(matches!(
            adapter.lifecycle(LifecycleOp::Rest),
            Err(AdapterError::UnsupportedOp(LifecycleOp::Rest))
        ));
    }

    #[test]
    fn integration_matches_algebraic_fixed_point() {
        let config = ChemicalConfig::default();
        let u = vec![0.3, 0.7, 0.1, 0.9];
        let drive: Vec<f64> = mat_vec(&config.weights, &u)
            .iter()
            .zip(&config.bias)
            .map(|(wu, b)| logistic(wu + b))
            .collect();
        let result = integrate_to_fixed_point(
            config.rate_k,
            &config.weights,
            &config.bias,
            &u,
            &vec![0.0; 4],
            config.euler_step_s,
            config.convergence_tol,
            config.max_model_time_s,
        );
        assert!(result.converged);
        for (a, b) in result.x.iter().zip(&drive) {
            assert!((a - b).abs() < 1e-4);
        }
    }
}
