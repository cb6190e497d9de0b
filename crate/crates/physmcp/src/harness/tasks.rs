//! Canned task requests used by the evaluation harness and the CLI demo.

use std::collections::BTreeSet;

use crate::model::{
    FallbackPolicy, ModalPayload, Modality, StimulationEvent, TaskRequest,
};

/// Seconds-scale chemical assay request.
pub fn concentration_task(task_id: &str) -> TaskRequest {
    TaskRequest {
        task_id: task_id.into(),
        function: "steady_state_assay".into(),
        input_modality: Modality::ConcentrationVector,
        payload: ModalPayload::Concentrations(vec![0.3, 0.4, 0.5, 0.6]),
        latency_target_ms: 10_000.0,
        max_twin_age_ms: 600_000.0,
        required_telemetry: BTreeSet::new(),
        human_supervision_available: false,
        backend_preference: None,
        fallback_policy: FallbackPolicy::NextRankedOnce,
        weight_profile: None,
    }
}

/// Milliseconds-scale vector mapping request.
pub fn vector_task(task_id: &str) -> TaskRequest {
    TaskRequest {
        task_id: task_id.into(),
        function: "map_vector".into(),
        input_modality: Modality::DigitalVector,
        payload: ModalPayload::Vector(vec![0.1, 0.2, 0.3, 0.4]),
        latency_target_ms: 10.0,
        max_twin_age_ms: 60_000.0,
        required_telemetry: BTreeSet::new(),
        human_supervision_available: false,
        backend_preference: None,
        fallback_policy: FallbackPolicy::NextRankedOnce,
        weight_profile: None,
    }
}

/// Spike stimulation request; `supervised` sets the human-supervision flag
/// both wetware-class backends require.
pub fn spike_task(task_id: &str, supervised: bool) -> TaskRequest {
    TaskRequest {
        task_id: task_id.into(),
        function: "stimulate_and_record".into(),
        input_modality: Modality::SpikeStimulation,
        payload: ModalPayload::Stimulation(vec![
            StimulationEvent {
                channel: 0,
                amplitude: 2.0,
                onset_ms: 0.0,
            },
            StimulationEvent {
                channel: 1,
                amplitude: -1.5,
                onset_ms: 5.0,
            },
        ]),
        latency_target_ms: 100.0,
        max_twin_age_ms: 120_000.0,
        required_telemetry: BTreeSet::new(),
        human_supervision_available: supervised,
        backend_preference: None,
        fallback_policy: FallbackPolicy::NextRankedOnce,
        weight_profile: None,
    }
}

/// Directed request pinned to one backend; used by the overhead bench so
/// accumulated drift cannot reroute mid-campaign.
pub fn directed(mut task: TaskRequest, backend_id: &str) -> TaskRequest {
    task.backend_preference = Some(backend_id.into());
    task.fallback_policy = FallbackPolicy::None;
    task
}
