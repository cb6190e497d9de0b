//! In-code definitions of the five evaluated backends' descriptors and a
//! few canned values used by tests and the harness.
//!
//! The JSON files under `fixtures/descriptors/` are golden copies of these
//! builders; a test asserts byte equality between the two.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::*;

/// On-disk form of a backend fixture: both descriptors together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorPair {
    pub resource: ResourceDescriptor,
    pub capability: CapabilityDescriptor,
}

impl From<(ResourceDescriptor, CapabilityDescriptor)> for DescriptorPair {
    fn from((resource, capability): (ResourceDescriptor, CapabilityDescriptor)) -> Self {
        DescriptorPair {
            resource,
            capability,
        }
    }
}

fn telemetry(fields: &[&str]) -> BTreeSet<String> {
    fields.iter().map(|s| s.to_string()).collect()
}

fn ops(ops: &[LifecycleOp]) -> BTreeSet<LifecycleOp> {
    ops.iter().copied().collect()
}

pub fn chemical_descriptor() -> (ResourceDescriptor, CapabilityDescriptor) {
    (
        ResourceDescriptor {
            backend_id: "chemical".into(),
            substrate_class: SubstrateClass::Chemical,
            adapter_type: AdapterType::LocalTwin,
            location: Location::Lab,
            twin_id: "twin-chemical".into(),
            tenancy: TenancyPolicy {
                exclusive: true,
                concurrency_limit: 1,
                cooldown_ms: 0.0,
                safety_bounds: 1.0,
            },
        },
        CapabilityDescriptor {
            input_modality: Modality::ConcentrationVector,
            output_modality: Modality::ConcentrationVector,
            encoding: "concentration_mol_l".into(),
            admissible_range: AdmissibleRange { min: 0.0, max: 1.0 },
            latency_regime: LatencyRegime::SlowSeconds,
            expected_latency_ms: 5000.0,
            observation_window_ms: 60000.0,
            freshness_bound_ms: 600_000.0,
            trigger_mode: TriggerMode::RequestResponse,
            programmability: Programmability::Fixed,
            telemetry_fields: telemetry(&[
                "contamination_level",
                "convergence_time",
                "calibration_confidence",
                "drift_score",
            ]),
            lifecycle_ops: ops(&[
                LifecycleOp::Flush,
                LifecycleOp::Recharge,
                LifecycleOp::Recalibrate,
            ]),
            requires_supervision: false,
        },
    )
}

pub fn wetware_descriptor() -> (ResourceDescriptor, CapabilityDescriptor) {
    (
        ResourceDescriptor {
            backend_id: "wetware".into(),
            substrate_class: SubstrateClass::Wetware,
            adapter_type: AdapterType::LocalTwin,
            location: Location::Lab,
            twin_id: "twin-wetware".into(),
            tenancy: TenancyPolicy {
                exclusive: true,
                concurrency_limit: 1,
                cooldown_ms: 0.0,
                safety_bounds: 10.0,
            },
        },
        CapabilityDescriptor {
            input_modality: Modality::SpikeStimulation,
            output_modality: Modality::DigitalVector,
            encoding: "spike_train_ua".into(),
            admissible_range: AdmissibleRange {
                min: -10.0,
                max: 10.0,
            },
            latency_regime: LatencyRegime::FastMilliseconds,
            expected_latency_ms: 20.0,
            observation_window_ms: 200.0,
            freshness_bound_ms: 120_000.0,
            trigger_mode: TriggerMode::RequestResponse,
            programmability: Programmability::Tunable,
            telemetry_fields: telemetry(&[
                "firing_rate",
                "response_delay_ms",
                "noise_level",
                "viability_score",
                "drift_score",
            ]),
            lifecycle_ops: ops(&[LifecycleOp::Rest, LifecycleOp::Recalibrate]),
            requires_supervision: true,
        },
    )
}

pub fn local_fast_descriptor() -> (ResourceDescriptor, CapabilityDescriptor) {
    (
        ResourceDescriptor {
            backend_id: "local-fast".into(),
            substrate_class: SubstrateClass::Fast,
            adapter_type: AdapterType::LocalTwin,
            location: Location::DeviceEdge,
            twin_id: "twin-local-fast".into(),
            tenancy: TenancyPolicy {
                exclusive: false,
                concurrency_limit: 4,
                cooldown_ms: 0.0,
                safety_bounds: 100.0,
            },
        },
        fast_capability(2.0),
    )
}

/// The externalized fast backend: same capability profile as the local
/// fast twin, reached over an HTTP boundary. The id sorts after
/// `local-fast` so that deterministic tie-breaks prefer the local twin.
pub fn remote_fast_descriptor() -> (ResourceDescriptor, CapabilityDescriptor) {
    (
        ResourceDescriptor {
            backend_id: "remote-fast".into(),
            substrate_class: SubstrateClass::Fast,
            adapter_type: AdapterType::HttpExternal,
            location: Location::ServiceSameHost,
            twin_id: "twin-remote-fast".into(),
            tenancy: TenancyPolicy {
                exclusive: false,
                concurrency_limit: 4,
                cooldown_ms: 0.0,
                safety_bounds: 100.0,
            },
        },
        fast_capability(4.0),
    )
}

fn fast_capability(expected_latency_ms: f64) -> CapabilityDescriptor {
    CapabilityDescriptor {
        input_modality: Modality::DigitalVector,
        output_modality: Modality::DigitalVector,
        encoding: "f64_vector".into(),
        admissible_range: AdmissibleRange {
            min: -100.0,
            max: 100.0,
        },
        latency_regime: LatencyRegime::FastMilliseconds,
        expected_latency_ms,
        observation_window_ms: 10.0,
        freshness_bound_ms: 60_000.0,
        trigger_mode: TriggerMode::RequestResponse,
        programmability: Programmability::Configurable,
        telemetry_fields: telemetry(&["drift_score", "execution_latency_ms", "energy_proxy"]),
        lifecycle_ops: ops(&[
            LifecycleOp::Reprogram,
            LifecycleOp::Reset,
            LifecycleOp::Recalibrate,
        ]),
        requires_supervision: false,
    }
}

pub fn cortical_stub_descriptor() -> (ResourceDescriptor, CapabilityDescriptor) {
    (
        ResourceDescriptor {
            backend_id: "cortical-stub".into(),
            substrate_class: SubstrateClass::WetwareApiStub,
            adapter_type: AdapterType::ApiStub,
            location: Location::SimulatedLab,
            twin_id: "twin-cortical-stub".into(),
            tenancy: TenancyPolicy {
                exclusive: true,
                concurrency_limit: 1,
                cooldown_ms: 0.0,
                safety_bounds: 10.0,
            },
        },
        CapabilityDescriptor {
            input_modality: Modality::SpikeStimulation,
            output_modality: Modality::DigitalVector,
            encoding: "spike_train_ua".into(),
            admissible_range: AdmissibleRange {
                min: -10.0,
                max: 10.0,
            },
            latency_regime: LatencyRegime::FastMilliseconds,
            // The advertised latency covers the observation cycle; session
            // handling around it is reported separately in the result
            // timing, which is the point of the two-timescale stub.
            expected_latency_ms: 15.0,
            observation_window_ms: 50.0,
            freshness_bound_ms: 120_000.0,
            trigger_mode: TriggerMode::RequestResponse,
            programmability: Programmability::Fixed,
            telemetry_fields: telemetry(&[
                "firing_rate",
                "response_delay_ms",
                "viability_score",
                "drift_score",
            ]),
            lifecycle_ops: ops(&[
                LifecycleOp::Reset,
                LifecycleOp::Rest,
                LifecycleOp::Recalibrate,
            ]),
            requires_supervision: true,
        },
    )
}

/// All five descriptor pairs, in ascending backend_id order.
pub fn all_descriptors() -> Vec<(ResourceDescriptor, CapabilityDescriptor)> {
    let mut all = vec![
        chemical_descriptor(),
        cortical_stub_descriptor(),
        local_fast_descriptor(),
        remote_fast_descriptor(),
        wetware_descriptor(),
    ];
    all.sort_by(|a, b| a.0.backend_id.cmp(&b.0.backend_id));
    all
}

/// Fixture file name for a backend id (the externalized backend keeps the
/// descriptive file name).
pub fn fixture_file_name(backend_id: &str) -> &'static str {
    match backend_id {
        "chemical" => "chemical.json",
        "wetware" => "wetware.json",
        "local-fast" => "local-fast.json",
        "remote-fast" => "externalized-fast.json",
        "cortical-stub" => "cortical-labs-stub.json",
        _ => panic!("no fixture for backend {backend_id}"),
    }
}

/// A filled-in result used by serialization tests; not produced by any
/// adapter.
pub fn synthetic_session_result(backend_id: &str) -> SessionResult {
    let mut telemetry = BTreeMap::new();
    telemetry.insert("drift_score".to_string(), 0.1);
    let mut metadata = BTreeMap::new();
    metadata.insert("assay_protocol".to_string(), "steady_state_v1".to_string());
    SessionResult {
        task_id: "task-synthetic".into(),
        backend_id: backend_id.into(),
        status: SessionStatus::Success,
        output: ModalPayload::Concentrations(vec![0.5, 0.5]),
        telemetry,
        twin_state: TwinStateView {
            backend_id: backend_id.into(),
            twin_id: format!("twin-{backend_id}"),
            confidence: 1.0,
            drift_score: 0.1,
            last_sync_ts: 1000.0,
            age_of_information_ms: 0.0,
            stale: false,
        },
        timing: SessionTiming {
            backend_latency_ms: 3.0,
            observation_latency_ms: 1.0,
            control_overhead_ms: 0.2,
        },
        metadata,
        fallback_used: false,
        rejection_reasons: vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_descriptor;

    #[test]
    fn all_fixture_descriptors_validate() {
        for (rd, cd) in all_descriptors() {
            assert_eq!(
                validate_descriptor(&rd, &cd),
                Vec::<String>::new(),
                "descriptor {} should be valid",
                rd.backend_id
            );
        }
    }

    #[test]
    fn backend_ids_are_unique_and_sorted() {
        let ids: Vec<String> = all_descriptors()
            .into_iter()
            .map(|(rd, _)| rd.backend_id)
            .collect();
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(ids, sorted);
        assert_eq!(ids.len(), 5);
    }
}
