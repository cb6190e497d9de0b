//! Client-side adapter for the externalized backend: speaks the service's
//! HTTP API but presents the uniform [`Adapter`] contract, so the registry
//! cannot tell it apart from a local twin. Transport failures surface as
//! failed results and a `failed` health status, never as panics.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use ureq::Agent;

use crate::adapter::{Adapter, AdapterError, FailureCode, RawResult};
use crate::ext::{InvokeRequest, LifecycleRequest, WireResponse, WireStatus};
use crate::fixtures;
use crate::model::{
    CapabilityDescriptor, HealthStatus, LifecycleOp, LifecycleState, ModalPayload,
    ResourceDescriptor,
};

pub struct RemoteFastAdapter {
    base_url: String,
    agent: Agent,
    resource: ResourceDescriptor,
    capability: CapabilityDescriptor,
    calls: AtomicU64,
    reachable: AtomicBool,
}

impl RemoteFastAdapter {
    /// Connects to `base_url` and fetches the remote descriptor. When the
    /// service is unreachable the adapter still constructs — with the
    /// fixture descriptor and a `failed` health — so registration and
    /// error handling stay uniform.
    pub fn new(base_url: impl Into<String>) -> Self {
        let base_url = base_url.into();
        let agent: Agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(5)))
            .build()
            .new_agent();
        let fetched: Option<(ResourceDescriptor, CapabilityDescriptor)> = agent
            .get(format!("{base_url}/descriptor"))
            .call()
            .ok()
            .and_then(|resp| resp.into_body().read_json::<WireResponse>().ok())
            .and_then(|wire| Some((wire.resource?, wire.capability?)));
        let reachable = fetched.is_some();
        let (resource, capability) = fetched.unwrap_or_else(fixtures::remote_fast_descriptor);
        RemoteFastAdapter {
            base_url,
            agent,
            resource,
            capability,
            calls: AtomicU64::new(0),
            reachable: AtomicBool::new(reachable),
        }
    }

    fn get_wire(&self, path: &str) -> Result<WireResponse, String> {
        let outcome = self
            .agent
            .get(format!("{}{path}", self.base_url))
            .call()
            .map_err(|e| e.to_string())
            .and_then(|resp| {
                resp.into_body()
                    .read_json::<WireResponse>()
                    .map_err(|e| e.to_string())
            });
        self.reachable.store(outcome.is_ok(), Ordering::SeqCst);
        outcome
    }

    fn post_wire<B: serde::Serialize>(&self, path: &str, body: &B) -> Result<WireResponse, String> {
        let outcome = self
            .agent
            .post(format!("{}{path}", self.base_url))
            .send_json(body)
            .map_err(|e| e.to_string())
            .and_then(|resp| {
                resp.into_body()
                    .read_json::<WireResponse>()
                    .map_err(|e| e.to_string())
            });
        self.reachable.store(outcome.is_ok(), Ordering::SeqCst);
        outcome
    }
}

impl Adapter for RemoteFastAdapter {
    fn describe(&self) -> (ResourceDescriptor, CapabilityDescriptor) {
        (self.resource.clone(), self.capability.clone())
    }

    fn prepare(&self) -> Result<(), AdapterError> {
        let wire = self
            .post_wire("/prepare", &serde_json::json!({}))
            .map_err(AdapterError::Transport)?;
        match wire.status {
            WireStatus::Ok => Ok(()),
            _ => Err(AdapterError::PrepareFailed(
                wire.error.unwrap_or_else(|| "remote prepare refused".into()),
            )),
        }
    }

    fn invoke(
        &self,
        payload: &ModalPayload,
        required_telemetry: &BTreeSet<String>,
    ) -> Result<RawResult, AdapterError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let request = InvokeRequest {
            payload: payload.clone(),
            required_telemetry: required_telemetry.clone(),
        };
        let wall_start = Instant::now();
        let wire = self.post_wire("/invoke", &request);
        let round_trip_ms = wall_start.elapsed().as_secs_f64() * 1000.0;
        let mut result = match wire {
            Err(_) => RawResult::failure(FailureCode::Unreachable, ModalPayload::Vector(vec![])),
            Ok(wire) => match wire.status {
                WireStatus::Ok => wire.result.ok_or_else(|| {
                    AdapterError::Transport("ok response without a result body".into())
                })?,
                WireStatus::Invalid => {
                    return Err(AdapterError::InvalidInput(
                        wire.error.unwrap_or_else(|| "invalid request".into()),
                    ))
                }
                WireStatus::Busy => {
                    RawResult::failure(FailureCode::Busy, ModalPayload::Vector(vec![]))
                }
                WireStatus::Fault => {
                    RawResult::failure(FailureCode::Fault, ModalPayload::Vector(vec![]))
                }
            },
        };
        // The boundary cost is part of the telemetry record, so clients can
        // compare it with the backend-side execution latency.
        result.telemetry.insert("round_trip_ms".into(), round_trip_ms);
        Ok(result)
    }

    fn lifecycle(&self, op: LifecycleOp) -> Result<(), AdapterError> {
        let wire = self
            .post_wire("/lifecycle", &LifecycleRequest { op })
            .map_err(AdapterError::Transport)?;
        match wire.status {
            WireStatus::Ok => Ok(()),
            WireStatus::Invalid => Err(AdapterError::UnsupportedOp(op)),
            _ => Err(AdapterError::LifecycleFailed(
                wire.error.unwrap_or_else(|| "remote lifecycle refused".into()),
            )),
        }
    }

    fn telemetry_snapshot(&self) -> BTreeMap<String, f64> {
        self.get_wire("/telemetry")
            .ok()
            .and_then(|wire| wire.telemetry)
            .unwrap_or_default()
    }

    fn lifecycle_state(&self) -> LifecycleState {
        self.get_wire("/health")
            .ok()
            .and_then(|wire| wire.lifecycle_state)
            .unwrap_or(LifecycleState::Failed)
    }

    fn health(&self) -> HealthStatus {
        match self.get_wire("/health") {
            Ok(wire) if wire.status == WireStatus::Ok => HealthStatus::Healthy,
            Ok(_) => HealthStatus::Degraded,
            Err(_) => HealthStatus::Failed,
        }
    }

    fn prep_estimate_s(&self) -> f64 {
        0.0
    }

    fn call_count(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FastConfig;
    use crate::ext::ExtService;

    #[test]
    fn descriptor_round_trips_over_the_boundary() {
        let service = ExtService::spawn(FastConfig::default(), 0).unwrap();
        let client = RemoteFastAdapter::new(service.base_url());
        let (resource, capability) = client.describe();
        assert_eq!(resource.backend_id, "remote-fast");
        assert_eq!(capability.expected_latency_ms, 4.0);
        assert_eq!(client.health(), HealthStatus::Healthy);
    }

    #[test]
    fn invoke_round_trip_carries_boundary_timing() {
        let service = ExtService::spawn(FastConfig::default(), 0).unwrap();
        let client = RemoteFastAdapter::new(service.base_url());
        client.prepare().unwrap();
        let result = client
            .invoke(&ModalPayload::Vector(vec![0.1; 4]), &BTreeSet::new())
            .unwrap();
        assert!(result.ok);
        assert_eq!(result.metadata["program_version"], "ext-1");
        let round_trip = result.telemetry["round_trip_ms"];
        assert!(round_trip > 0.0);
        assert!(round_trip >= result.telemetry["execution_latency_ms"]);
    }

    #[test]
    fn unreachable_service_degrades_to_failed_health() {
        let client = RemoteFastAdapter::new("http://127.0.0.1:9");
        assert_eq!(client.health(), HealthStatus::Failed);
        let result = client
            .invoke(&ModalPayload::Vector(vec![0.1; 4]), &BTreeSet::new())
            .unwrap();
        assert!(!result.ok);
        assert_eq!(result.metadata["failure"], "unreachable");
    }

    #[test]
    fn service_fault_flag_maps_to_a_fault_result() {
        let service = ExtService::spawn(FastConfig::default(), 0).unwrap();
        let client = RemoteFastAdapter::new(service.base_url());
        client.prepare().unwrap();
        service.set_force_fault(true);
        let result = client
            .invoke(&ModalPayload::Vector(vec![0.1; 4]), &BTreeSet::new())
            .unwrap();
        assert!(!result.ok);
        assert_eq!(result.metadata["failure"], "fault");
        service.set_force_fault(false);
    }

    #[test]
    fn malformed_invoke_is_invalid_not_fault() {
        let service = ExtService::spawn(FastConfig::default(), 0).unwrap();
        let client = RemoteFastAdapter::new(service.base_url());
        client.prepare().unwrap();
        let err = client.invoke(&ModalPayload::Vector(vec![0.1; 3]), &BTreeSet::new());
        assert!(matches!(err, Err(AdapterError::InvalidInput(_))));
    }
}
