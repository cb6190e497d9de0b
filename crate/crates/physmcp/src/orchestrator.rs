//! Session orchestration: match, admit, prepare, invoke, synchronize the
//! twin, validate postconditions, and fall back at most one ranked step.
//!
//! Every submission produces a structured `SessionResult`; failures are
//! data, not exceptions. The control overhead reported in the result
//! timing is the wall time spent in this layer, i.e. total session wall
//! time minus the time spent inside adapter calls.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::adapter::RawResult;
use crate::clock::Clock;
use crate::config::WeightProfiles;
use crate::matcher::{select_full, MatchDecision};
use crate::model::{
    CapabilityDescriptor, FallbackPolicy, LifecycleOp, LifecycleState, ModalPayload,
    SessionResult, SessionStatus, SessionTiming, TaskRequest, TwinStateView,
};
use crate::policy::{PolicyEngine, PolicyVerdict};
use crate::registry::{Registry, RegistryEntry};

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("unknown backend: {0}")]
    UnknownBackend(String),
    #[error("unknown weight profile: {0}")]
    UnknownProfile(String),
    #[error("registry error: {0}")]
    Registry(#[from] crate::registry::RegistryError),
    #[error("adapter error: {0}")]
    Adapter(#[from] crate::adapter::AdapterError),
}

/// Postcondition audit of a finished invocation. Empty means the result is
/// acceptable; any entry voids the attempt and may trigger fallback.
pub fn validate_postconditions(
    task: &TaskRequest,
    capability: &CapabilityDescriptor,
    raw: &RawResult,
    twin_after: &TwinStateView,
) -> Vec<String> {
    let mut reasons = Vec::new();
    if !raw.ok {
        let code = raw
            .metadata
            .get("failure")
            .cloned()
            .unwrap_or_else(|| "unknown".into());
        reasons.push(format!("backend_failure: {code}"));
    }
    let missing: Vec<&String> = task
        .required_telemetry
        .iter()
        .filter(|f| !raw.telemetry.contains_key(*f))
        .collect();
    if !missing.is_empty() {
        reasons.push(format!("telemetry_incomplete: {missing:?}"));
    }
    if twin_after.age_of_information_ms > task.max_twin_age_ms {
        reasons.push(format!(
            "twin_stale_after_sync: age {:.1} ms",
            twin_after.age_of_information_ms
        ));
    }
    if raw.ok && raw.output.modality() != capability.output_modality {
        reasons.push(format!(
            "output_modality_mismatch: got {:?}, capability promises {:?}",
            raw.output.modality(),
            capability.output_modality
        ));
    }
    reasons
}

struct AttemptOutcome {
    raw: Option<RawResult>,
    twin_after: Option<TwinStateView>,
    reasons: Vec<String>,
}

pub struct Orchestrator {
    registry: Arc<Registry>,
    policy: PolicyEngine,
    profiles: WeightProfiles,
    clock: Arc<dyn Clock>,
}

impl Orchestrator {
    pub fn new(registry: Arc<Registry>, clock: Arc<dyn Clock>, profiles: WeightProfiles) -> Self {
        Orchestrator {
            registry,
            policy: PolicyEngine::new(clock.clone()),
            profiles,
            clock,
        }
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    /// Runs the matching pass only, without touching any adapter.
    pub fn plan(&self, task: &TaskRequest) -> Result<MatchDecision, OrchestratorError> {
        let weights = self
            .profiles
            .get(task.weight_profile.as_deref().unwrap_or("default"))
            .map_err(|_| {
                OrchestratorError::UnknownProfile(
                    task.weight_profile.clone().unwrap_or_default(),
                )
            })?;
        let entries = self.registry.entries();
        let snapshots = self.registry.snapshots_for(&entries)?;
        Ok(select_full(task, &entries, &snapshots, &weights)
            .expect("snapshots cover all candidates"))
    }

    /// Full submission pipeline. Always returns a structured result; a
    /// `Rejected` status means no backend was ever invoked.
    pub fn submit(&self, task: &TaskRequest) -> Result<SessionResult, OrchestratorError> {
        let wall_start = Instant::now();
        let mut adapter_wall_s = 0.0f64;

        let decision = self.plan(task)?;
        if decision.ranked.is_empty() {
            let reasons = decision
                .rejections
                .iter()
                .flat_map(|(id, rs)| rs.iter().map(move |r| format!("{id}: {r}")))
                .collect();
            return Ok(rejected_result(task, reasons, wall_start));
        }

        let max_attempts = match task.fallback_policy {
            FallbackPolicy::None => 1,
            FallbackPolicy::NextRankedOnce => 2,
        };
        let mut reasons: Vec<String> = Vec::new();
        let mut last_failed: Option<(String, AttemptOutcome)> = None;
        for (attempt, (backend_id, _)) in
            decision.ranked.iter().take(max_attempts).enumerate()
        {
            let entry = self
                .registry
                .get(backend_id)
                .ok_or_else(|| OrchestratorError::UnknownBackend(backend_id.clone()))?;
            let outcome = self.attempt(task, &entry, &mut adapter_wall_s);
            if outcome.reasons.is_empty() {
                let raw = outcome.raw.expect("clean attempt has a result");
                let twin_after = outcome.twin_after.expect("clean attempt synced the twin");
                let overhead =
                    (wall_start.elapsed().as_secs_f64() - adapter_wall_s).max(0.0) * 1000.0;
                return Ok(SessionResult {
                    task_id: task.task_id.clone(),
                    backend_id: backend_id.clone(),
                    status: SessionStatus::Success,
                    output: raw.output,
                    telemetry: raw.telemetry,
                    twin_state: twin_after,
                    timing: SessionTiming {
                        backend_latency_ms: raw.backend_latency_ms,
                        observation_latency_ms: raw.observation_latency_ms,
                        control_overhead_ms: overhead,
                    },
                    metadata: raw.metadata,
                    fallback_used: attempt > 0,
                    rejection_reasons: reasons,
                });
            }
            for r in &outcome.reasons {
                reasons.push(format!("{backend_id}: {r}"));
            }
            last_failed = Some((backend_id.clone(), outcome));
        }

        let (backend_id, outcome) = last_failed.expect("at least one attempt ran");
        let overhead = (wall_start.elapsed().as_secs_f64() - adapter_wall_s).max(0.0) * 1000.0;
        let (output, telemetry, metadata, backend_latency_ms, observation_latency_ms) =
            match outcome.raw {
                Some(raw) => (
                    raw.output,
                    raw.telemetry,
                    raw.metadata,
                    raw.backend_latency_ms,
                    raw.observation_latency_ms,
                ),
                None => (ModalPayload::Vector(vec![]), BTreeMap::new(), BTreeMap::new(), 0.0, 0.0),
            };
        Ok(SessionResult {
            task_id: task.task_id.clone(),
            backend_id,
            status: SessionStatus::FailedAfterFallback,
            output,
            telemetry,
            twin_state: outcome.twin_after.unwrap_or_else(TwinStateView::detached),
            timing: SessionTiming {
                backend_latency_ms,
                observation_latency_ms,
                control_overhead_ms: overhead,
            },
            metadata,
            fallback_used: max_attempts > 1 && decision.ranked.len() > 1,
            rejection_reasons: reasons,
        })
    }

    /// One admission + invocation attempt against a single backend.
    fn attempt(
        &self,
        task: &TaskRequest,
        entry: &RegistryEntry,
        adapter_wall_s: &mut f64,
    ) -> AttemptOutcome {
        let backend_id = &entry.resource.backend_id;
        match self.policy.acquire(backend_id, &entry.resource.tenancy) {
            PolicyVerdict::Granted => {}
            PolicyVerdict::DeniedBusy => {
                return AttemptOutcome {
                    raw: None,
                    twin_after: None,
                    reasons: vec!["policy_denied: busy".into()],
                }
            }
            PolicyVerdict::DeniedCooldown(remaining) => {
                return AttemptOutcome {
                    raw: None,
                    twin_after: None,
                    reasons: vec![format!("policy_denied: cooldown {remaining:.1} ms left")],
                }
            }
        }
        let outcome = self.attempt_granted(task, entry, adapter_wall_s);
        self.policy.release(backend_id);
        outcome
    }

    fn attempt_granted(
        &self,
        task: &TaskRequest,
        entry: &RegistryEntry,
        adapter_wall_s: &mut f64,
    ) -> AttemptOutcome {
        let backend_id = &entry.resource.backend_id;
        if entry.adapter.lifecycle_state() != LifecycleState::Ready {
            let t = Instant::now();
            let prepared = entry.adapter.prepare();
            *adapter_wall_s += t.elapsed().as_secs_f64();
            if let Err(err) = prepared {
                return AttemptOutcome {
                    raw: None,
                    twin_after: None,
                    reasons: vec![format!("prepare_failed: {err}")],
                };
            }
        }

        let t = Instant::now();
        let invoked = entry.adapter.invoke(&task.payload, &task.required_telemetry);
        *adapter_wall_s += t.elapsed().as_secs_f64();
        let raw = match invoked {
            Ok(raw) => raw,
            Err(err) => {
                return AttemptOutcome {
                    raw: None,
                    twin_after: None,
                    reasons: vec![format!("invoke_failed: {err}")],
                }
            }
        };

        let twin_after = self
            .registry
            .twin_plane()
            .ingest_telemetry(backend_id, &raw.telemetry, self.clock.now_ms())
            .expect("registered backend has a twin record");
        let reasons = validate_postconditions(task, &entry.capability, &raw, &twin_after);
        AttemptOutcome {
            raw: Some(raw),
            twin_after: Some(twin_after),
            reasons,
        }
    }

    /// Runs a lifecycle operation on a backend and resynchronizes its twin
    /// from the post-operation telemetry.
    pub fn run_lifecycle(
        &self,
        backend_id: &str,
        op: LifecycleOp,
    ) -> Result<(), OrchestratorError> {
        let entry = self
            .registry
            .get(backend_id)
            .ok_or_else(|| OrchestratorError::UnknownBackend(backend_id.to_string()))?;
        entry.adapter.lifecycle(op)?;
        let telemetry = entry.adapter.telemetry_snapshot();
        self.registry
            .twin_plane()
            .ingest_telemetry(backend_id, &telemetry, self.clock.now_ms())
            .expect("registered backend has a twin record");
        Ok(())
    }
}

fn rejected_result(task: &TaskRequest, reasons: Vec<String>, wall_start: Instant) -> SessionResult {
    SessionResult {
        task_id: task.task_id.clone(),
        backend_id: String::new(),
        status: SessionStatus::Rejected,
        output: ModalPayload::Vector(vec![]),
        telemetry: BTreeMap::new(),
        twin_state: TwinStateView::detached(),
        timing: SessionTiming {
            backend_latency_ms: 0.0,
            observation_latency_ms: 0.0,
            control_overhead_ms: wall_start.elapsed().as_secs_f64() * 1000.0,
        },
        metadata: BTreeMap::new(),
        fallback_used: false,
        rejection_reasons: reasons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    use crate::adapter::Adapter;
    use crate::adapters::{ChemicalAdapter, FastAdapter, WetwareAdapter};
    use crate::clock::VirtualClock;
    use crate::config::AdapterConfig;
    use crate::fixtures;
    use crate::model::Modality;
    use crate::twin::TwinPlane;

    struct Rig {
        orchestrator: Orchestrator,
        local_fast: Arc<FastAdapter>,
        remote_fast: Arc<FastAdapter>,
        wetware: Arc<WetwareAdapter>,
    }

    fn rig() -> Rig {
        let clock = VirtualClock::new();
        let config = AdapterConfig::default();
        let twin = Arc::new(TwinPlane::new(clock.clone(), config.twin.clone()));
        let registry = Arc::new(Registry::new(clock.clone(), twin));
        let local_fast = Arc::new(FastAdapter::new(config.fast.clone()));
        let remote_fast = Arc::new(FastAdapter::with_descriptor(
            config.fast.clone(),
            fixtures::remote_fast_descriptor(),
        ));
        let wetware = Arc::new(WetwareAdapter::new(config.wetware.clone()));
        registry
            .register(Arc::new(ChemicalAdapter::new(config.chemical)))
            .unwrap();
        registry.register(wetware.clone()).unwrap();
        registry.register(local_fast.clone()).unwrap();
        registry.register(remote_fast.clone()).unwrap();
        Rig {
            orchestrator: Orchestrator::new(registry, clock, WeightProfiles::default()),
            local_fast,
            remote_fast,
            wetware,
        }
    }

    fn vector_task(fallback: FallbackPolicy) -> TaskRequest {
        TaskRequest {
            task_id: "t-vec".into(),
            function: "map_vector".into(),
            input_modality: Modality::DigitalVector,
            payload: ModalPayload::Vector(vec![0.1, 0.2, 0.3, 0.4]),
            latency_target_ms: 10.0,
            max_twin_age_ms: 60_000.0,
            required_telemetry: ["energy_proxy".to_string()].into_iter().collect(),
            human_supervision_available: false,
            backend_preference: None,
            fallback_policy: fallback,
            weight_profile: None,
        }
    }

    #[test]
    fn clean_vector_task_lands_on_local_fast() {
        let rig = rig();
        let result = rig
            .orchestrator
            .submit(&vector_task(FallbackPolicy::NextRankedOnce))
            .unwrap();
        assert_eq!(result.status, SessionStatus::Success);
        assert_eq!(result.backend_id, "local-fast");
        assert!(!result.fallback_used);
        assert!(result.rejection_reasons.is_empty());
        assert_eq!(result.twin_state.age_of_information_ms, 0.0);
        assert!(result.timing.control_overhead_ms >= 0.0);
    }

    #[test]
    fn chemical_task_routes_to_the_chemical_backend() {
        let rig = rig();
        let task = TaskRequest {
            task_id: "t-chem".into(),
            function: "steady_state".into(),
            input_modality: Modality::ConcentrationVector,
            payload: ModalPayload::Concentrations(vec![0.3, 0.4, 0.5, 0.6]),
            latency_target_ms: 10_000.0,
            max_twin_age_ms: 600_000.0,
            required_telemetry: BTreeSet::new(),
            human_supervision_available: false,
            backend_preference: None,
            fallback_policy: FallbackPolicy::None,
            weight_profile: None,
        };
        let result = rig.orchestrator.submit(&task).unwrap();
        assert_eq!(result.status, SessionStatus::Success);
        assert_eq!(result.backend_id, "chemical");
        assert_eq!(result.output.modality(), Modality::ConcentrationVector);
        assert_eq!(result.metadata.len(), 1);
        assert!(result.metadata.contains_key("assay_protocol"));
    }

    #[test]
    fn unsupervised_stimulation_task_is_rejected_without_any_calls() {
        let rig = rig();
        let task = TaskRequest {
            task_id: "t-stim".into(),
            function: "stimulate".into(),
            input_modality: Modality::SpikeStimulation,
            payload: ModalPayload::Stimulation(vec![]),
            latency_target_ms: 100.0,
            max_twin_age_ms: 120_000.0,
            required_telemetry: BTreeSet::new(),
            human_supervision_available: false,
            backend_preference: None,
            fallback_policy: FallbackPolicy::NextRankedOnce,
            weight_profile: None,
        };
        let result = rig.orchestrator.submit(&task).unwrap();
        assert_eq!(result.status, SessionStatus::Rejected);
        assert!(result
            .rejection_reasons
            .iter()
            .any(|r| r.contains("supervision_unavailable")));
        assert_eq!(rig.wetware.call_count(), 0);
    }

    #[test]
    fn prepare_failure_falls_back_to_the_next_ranked_backend() {
        let rig = rig();
        rig.local_fast.arm_prepare_failure(true);
        let result = rig
            .orchestrator
            .submit(&vector_task(FallbackPolicy::NextRankedOnce))
            .unwrap();
        assert_eq!(result.status, SessionStatus::Success);
        assert_eq!(result.backend_id, "remote-fast");
        assert!(result.fallback_used);
        assert!(result.rejection_reasons[0].contains("prepare_failed"));
        assert_eq!(rig.local_fast.call_count(), 0);
        assert_eq!(rig.remote_fast.call_count(), 1);
    }

    #[test]
    fn telemetry_loss_voids_the_result_and_falls_back() {
        let rig = rig();
        rig.local_fast.set_telemetry_omission(Some("energy_proxy".into()));
        let result = rig
            .orchestrator
            .submit(&vector_task(FallbackPolicy::NextRankedOnce))
            .unwrap();
        assert_eq!(result.status, SessionStatus::Success);
        assert_eq!(result.backend_id, "remote-fast");
        assert!(result.fallback_used);
        assert!(result
            .rejection_reasons
            .iter()
            .any(|r| r.contains("telemetry_incomplete")));
        assert_eq!(rig.local_fast.call_count(), 1);
        assert_eq!(rig.remote_fast.call_count(), 1);
    }

    #[test]
    fn without_fallback_a_voided_result_fails_the_session() {
        let rig = rig();
        rig.local_fast.set_telemetry_omission(Some("energy_proxy".into()));
        let result = rig
            .orchestrator
            .submit(&vector_task(FallbackPolicy::None))
            .unwrap();
        assert_eq!(result.status, SessionStatus::FailedAfterFallback);
        assert_eq!(result.backend_id, "local-fast");
        assert!(!result.fallback_used);
        assert_eq!(rig.remote_fast.call_count(), 0);
    }

    #[test]
    fn backend_preference_overrides_the_ranking() {
        let rig = rig();
        let mut task = vector_task(FallbackPolicy::None);
        task.backend_preference = Some("remote-fast".into());
        let result = rig.orchestrator.submit(&task).unwrap();
        assert_eq!(result.status, SessionStatus::Success);
        assert_eq!(result.backend_id, "remote-fast");
        assert_eq!(rig.local_fast.call_count(), 0);
    }

    #[test]
    fn lifecycle_run_resynchronizes_the_twin() {
        let rig = rig();
        // Accumulate drift, then recover via reprogram.
        for _ in 0..20 {
            rig.orchestrator
                .submit(&vector_task(FallbackPolicy::None))
                .unwrap();
        }
        let drifted = rig.orchestrator.registry().snapshot("local-fast").unwrap();
        assert!(drifted.drift_score > 0.05);
        rig.orchestrator
            .run_lifecycle("local-fast", LifecycleOp::Reprogram)
            .unwrap();
        let recovered = rig.orchestrator.registry().snapshot("local-fast").unwrap();
        assert_eq!(recovered.drift_score, 0.0);
    }
}
