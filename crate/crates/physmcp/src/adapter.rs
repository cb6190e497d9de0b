//! Uniform data-plane contract every substrate adapter implements.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    CapabilityDescriptor, HealthStatus, LifecycleOp, LifecycleState, ModalPayload,
    ResourceDescriptor,
};

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("adapter not ready: {0}")]
    NotReady(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported lifecycle op: {0:?}")]
    UnsupportedOp(LifecycleOp),
    #[error("lifecycle op failed: {0}")]
    LifecycleFailed(String),
    #[error("preparation failed: {0}")]
    PrepareFailed(String),
    #[error("transport failure: {0}")]
    Transport(String),
}

/// Substrate-native outcome of one invocation, before normalization into a
/// `SessionResult`. Soft failures (contamination, nonviability, protocol
/// faults) come back as `ok = false` with a failure code in the telemetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawResult {
    pub ok: bool,
    pub output: ModalPayload,
    pub telemetry: BTreeMap<String, f64>,
    pub backend_latency_ms: f64,
    pub observation_latency_ms: f64,
    pub metadata: BTreeMap<String, String>,
}

/// Numeric failure codes placed under the `failure_code` telemetry key when
/// `ok` is false. The symbolic name also lands in `metadata["failure"]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureCode {
    NoConvergence,
    Contaminated,
    SafetyBound,
    Nonviable,
    SessionNotEstablished,
    Unreachable,
    Busy,
    Fault,
    Protocol,
    Invalid,
}

impl FailureCode {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureCode::NoConvergence => "no_convergence",
            FailureCode::Contaminated => "contaminated",
            FailureCode::SafetyBound => "safety_bound",
            FailureCode::Nonviable => "nonviable",
            FailureCode::SessionNotEstablished => "session_not_established",
            FailureCode::Unreachable => "unreachable",
            FailureCode::Busy => "busy",
            FailureCode::Fault => "fault",
            FailureCode::Protocol => "protocol",
            FailureCode::Invalid => "invalid",
        }
    }

    pub fn as_code(self) -> f64 {
        match self {
            FailureCode::NoConvergence => 1.0,
            FailureCode::Contaminated => 2.0,
            FailureCode::SafetyBound => 3.0,
            FailureCode::Nonviable => 4.0,
            FailureCode::SessionNotEstablished => 5.0,
            FailureCode::Unreachable => 6.0,
            FailureCode::Busy => 7.0,
            FailureCode::Fault => 8.0,
            FailureCode::Protocol => 9.0,
            FailureCode::Invalid => 10.0,
        }
    }
}

impl RawResult {
    /// A failed result carrying the mandatory failure code.
    pub fn failure(code: FailureCode, output: ModalPayload) -> Self {
        let mut telemetry = BTreeMap::new();
        telemetry.insert("failure_code".to_string(), code.as_code());
        let mut metadata = BTreeMap::new();
        metadata.insert("failure".to_string(), code.as_str().to_string());
        RawResult {
            ok: false,
            output,
            telemetry,
            backend_latency_ms: 0.0,
            observation_latency_ms: 0.0,
            metadata,
        }
    }
}

/// Contract every substrate adapter fulfills toward the control plane.
///
/// `invoke` is only legal in the ready state and increments the call
/// counter on every call; the counter exists so that tests can assert how
/// often a backend was actually touched.
pub trait Adapter: Send + Sync {
    fn describe(&self) -> (ResourceDescriptor, CapabilityDescriptor);
    fn prepare(&self) -> Result<(), AdapterError>;
    fn invoke(
        &self,
        payload: &ModalPayload,
        required_telemetry: &BTreeSet<String>,
    ) -> Result<RawResult, AdapterError>;
    fn lifecycle(&self, op: LifecycleOp) -> Result<(), AdapterError>;
    fn telemetry_snapshot(&self) -> BTreeMap<String, f64>;
    fn lifecycle_state(&self) -> LifecycleState;
    fn health(&self) -> HealthStatus;
    /// Estimated preparation time in seconds, used as the lifecycle cost
    /// term by the matcher.
    fn prep_estimate_s(&self) -> f64;
    fn call_count(&self) -> u64;
}

/// Checks that `op` is advertised by the capability before dispatching.
pub fn ensure_supported(cd: &CapabilityDescriptor, op: LifecycleOp) -> Result<(), AdapterError> {
    if cd.lifecycle_ops.contains(&op) {
        Ok(())
    } else {
        Err(AdapterError::UnsupportedOp(op))
    }
}

/// Numeric health flag for telemetry maps (0 healthy, 1 degraded, 2 failed).
pub fn health_flag(health: HealthStatus) -> f64 {
    match health {
        HealthStatus::Healthy => 0.0,
        HealthStatus::Degraded => 1.0,
        HealthStatus::Failed => 2.0,
    }
}
