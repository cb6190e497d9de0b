//! Core domain types shared by every plane: descriptors, tasks, payloads,
//! runtime snapshots, and session results.
//!
//! All types here are immutable values with a canonical JSON form (see
//! [`crate::canon`]). Backend-specific variation is confined to the
//! `metadata` map and telemetry field names; the top-level key set of each
//! type is identical across backends.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstrateClass {
    Chemical,
    Wetware,
    Fast,
    WetwareApiStub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterType {
    LocalTwin,
    HttpExternal,
    ApiStub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Lab,
    DeviceEdge,
    ServiceSameHost,
    SimulatedLab,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    ConcentrationVector,
    SpikeStimulation,
    DigitalVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatencyRegime {
    SlowSeconds,
    FastMilliseconds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerMode {
    RequestResponse,
    Streaming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Programmability {
    Fixed,
    Configurable,
    Tunable,
    InSituAdaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifecycleOp {
    Warmup,
    Flush,
    Recharge,
    Rest,
    Recalibrate,
    Reprogram,
    Reset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HealthStatus {
    Healthy,
    Degraded,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifecycleState {
    Uninitialized,
    Preparing,
    Ready,
    Executing,
    NeedsReset,
    Recovering,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackPolicy {
    None,
    NextRankedOnce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Success,
    Rejected,
    FailedAfterFallback,
}

/// Access policy for a shared physical backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TenancyPolicy {
    pub exclusive: bool,
    pub concurrency_limit: u32,
    pub cooldown_ms: f64,
    /// Maximum admissible stimulation/input magnitude.
    pub safety_bounds: f64,
}

/// Stable identity and operating context of a backend instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceDescriptor {
    pub backend_id: String,
    pub substrate_class: SubstrateClass,
    pub adapter_type: AdapterType,
    pub location: Location,
    pub twin_id: String,
    pub tenancy: TenancyPolicy,
}

/// Inclusive per-element value bounds on payload elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibleRange {
    pub min: f64,
    pub max: f64,
}

/// Operational semantics of a backend: what it can do and under which
/// signal, timing, lifecycle, and observability conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapabilityDescriptor {
    pub input_modality: Modality,
    pub output_modality: Modality,
    pub encoding: String,
    pub admissible_range: AdmissibleRange,
    pub latency_regime: LatencyRegime,
    pub expected_latency_ms: f64,
    pub observation_window_ms: f64,
    /// Maximum admissible age of information before the twin is stale.
    pub freshness_bound_ms: f64,
    pub trigger_mode: TriggerMode,
    pub programmability: Programmability,
    pub telemetry_fields: BTreeSet<String>,
    pub lifecycle_ops: BTreeSet<LifecycleOp>,
    pub requires_supervision: bool,
}

/// A single stimulation event on one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StimulationEvent {
    pub channel: u32,
    pub amplitude: f64,
    pub onset_ms: f64,
}

/// Tagged union over the three I/O carriers. Exactly one variant is
/// populated in serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModalPayload {
    Concentrations(Vec<f64>),
    Stimulation(Vec<StimulationEvent>),
    Vector(Vec<f64>),
}

impl ModalPayload {
    pub fn modality(&self) -> Modality {
        match self {
            ModalPayload::Concentrations(_) => Modality::ConcentrationVector,
            ModalPayload::Stimulation(_) => Modality::SpikeStimulation,
            ModalPayload::Vector(_) => Modality::DigitalVector,
        }
    }

    /// Largest absolute element magnitude; 0 for an empty payload.
    pub fn max_magnitude(&self) -> f64 {
        match self {
            ModalPayload::Concentrations(v) | ModalPayload::Vector(v) => {
                v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
            }
            ModalPayload::Stimulation(events) => {
                events.iter().fold(0.0f64, |m, e| m.max(e.amplitude.abs()))
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        match self {
            ModalPayload::Concentrations(v) | ModalPayload::Vector(v) => {
                v.iter().all(|x| x.is_finite())
            }
            ModalPayload::Stimulation(events) => events
                .iter()
                .all(|e| e.amplitude.is_finite() && e.onset_ms.is_finite()),
        }
    }
}

/// A client's structured request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRequest {
    pub task_id: String,
    pub function: String,
    pub input_modality: Modality,
    pub payload: ModalPayload,
    pub latency_target_ms: f64,
    pub max_twin_age_ms: f64,
    pub required_telemetry: BTreeSet<String>,
    pub human_supervision_available: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend_preference: Option<String>,
    pub fallback_policy: FallbackPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_profile: Option<String>,
}

/// Per-backend dynamic state consulted by the matcher and the policy layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeSnapshot {
    pub backend_id: String,
    pub health_status: HealthStatus,
    pub drift_score: f64,
    pub age_of_information_ms: f64,
    pub lifecycle_state: LifecycleState,
    /// Twin-plane confidence feeding the matcher's twin/locality term.
    pub twin_confidence: f64,
    /// Adapter's estimated preparation time in seconds (lifecycle cost).
    pub prep_cost_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viability_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contamination_level: Option<f64>,
}

/// Twin validity metadata as embedded in session results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwinStateView {
    pub backend_id: String,
    pub twin_id: String,
    pub confidence: f64,
    pub drift_score: f64,
    pub last_sync_ts: f64,
    pub age_of_information_ms: f64,
    pub stale: bool,
}

impl TwinStateView {
    /// Placeholder view for results that never touched a backend
    /// (rejections). All validity fields are pessimistic.
    pub fn detached() -> Self {
        TwinStateView {
            backend_id: String::new(),
            twin_id: String::new(),
            confidence: 0.0,
            drift_score: 0.0,
            last_sync_ts: 0.0,
            age_of_information_ms: 0.0,
            stale: true,
        }
    }
}

/// Timing split of a session: substrate execution, observation, and the
/// control-plane cost on top of both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionTiming {
    pub backend_latency_ms: f64,
    pub observation_latency_ms: f64,
    pub control_overhead_ms: f64,
}

/// Normalized invocation outcome. The top-level key set is identical for
/// every backend; substrate-specific variation lives in `metadata` and in
/// the telemetry field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionResult {
    pub task_id: String,
    pub backend_id: String,
    pub status: SessionStatus,
    pub output: ModalPayload,
    pub telemetry: BTreeMap<String, f64>,
    pub twin_state: TwinStateView,
    pub timing: SessionTiming,
    pub metadata: BTreeMap<String, String>,
    pub fallback_used: bool,
    pub rejection_reasons: Vec<String>,
}

/// Weights for the five selection-score terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl MatchWeights {
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        for (name, w) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("epsilon", self.epsilon),
        ] {
            if !w.is_finite() || w < 0.0 {
                violations.push(format!("{name} must be a non-negative finite real"));
            }
        }
        if self.alpha + self.beta + self.gamma + self.delta + self.epsilon <= 0.0 {
            violations.push("weight sum must be positive".into());
        }
        violations
    }
}

impl Default for MatchWeights {
    fn default() -> Self {
        MatchWeights {
            alpha: 0.35,
            beta: 0.25,
            gamma: 0.15,
            delta: 0.15,
            epsilon: 0.10,
        }
    }
}

/// Checks every type invariant of a descriptor pair. Violations are
/// returned, not thrown; an empty list means the pair is well formed.
pub fn validate_descriptor(rd: &ResourceDescriptor, cd: &CapabilityDescriptor) -> Vec<String> {
    let mut violations = Vec::new();

    if rd.backend_id.is_empty() {
        violations.push("backend_id must be non-empty".into());
    }
    if rd.twin_id.is_empty() {
        violations.push("twin_id must be non-empty".into());
    }
    if rd.tenancy.exclusive && rd.tenancy.concurrency_limit != 1 {
        violations.push("exclusive implies concurrency_limit=1".into());
    }
    if rd.tenancy.concurrency_limit == 0 {
        violations.push("concurrency_limit must be positive".into());
    }
    if !(rd.tenancy.cooldown_ms >= 0.0) {
        violations.push("cooldown_ms must be non-negative".into());
    }
    if !(rd.tenancy.safety_bounds > 0.0) {
        violations.push("safety_bounds must be positive".into());
    }

    if !(cd.expected_latency_ms > 0.0) {
        violations.push("expected_latency_ms must be positive".into());
    }
    if cd.latency_regime == LatencyRegime::SlowSeconds && cd.expected_latency_ms < 1000.0 {
        violations.push("slow_seconds implies expected_latency_ms >= 1000".into());
    }
    if !(cd.observation_window_ms > 0.0) {
        violations.push("observation_window_ms must be positive".into());
    }
    if !(cd.freshness_bound_ms > 0.0) {
        violations.push("freshness_bound_ms must be positive".into());
    }
    if cd.telemetry_fields.is_empty() {
        violations.push("telemetry_fields must be non-empty".into());
    }
    if !(cd.admissible_range.min < cd.admissible_range.max) {
        violations.push("admissible_range.min must be below admissible_range.max".into());
    }

    violations
}
