//! Capability matching: hard admissibility gates followed by a weighted
//! soft score over capability, timing, lifecycle, twin/locality, and
//! overhead terms. Also hosts the degraded baseline selectors used by the
//! evaluation harness.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AdapterType, CapabilityDescriptor, HealthStatus, MatchWeights, ResourceDescriptor,
    RuntimeSnapshot, TaskRequest,
};
use crate::registry::RegistryEntry;

/// Assumed control-path overhead used by the O term, per adapter locality.
fn assumed_overhead_ms(adapter_type: AdapterType) -> f64 {
    match adapter_type {
        AdapterType::HttpExternal => 5.0,
        AdapterType::LocalTwin | AdapterType::ApiStub => 0.5,
    }
}

/// Locality factor of the D term: remote and stubbed twins are trusted
/// progressively less than a co-located one.
fn locality_factor(adapter_type: AdapterType) -> f64 {
    match adapter_type {
        AdapterType::LocalTwin => 1.0,
        AdapterType::HttpExternal => 0.8,
        AdapterType::ApiStub => 0.6,
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("backend {backend_id} is inadmissible: {reasons:?}")]
    Inadmissible {
        backend_id: String,
        reasons: Vec<String>,
    },
    #[error("no runtime snapshot for backend {0}")]
    MissingSnapshot(String),
    #[error("no admissible backend for task {0}")]
    NoAdmissibleBackend(String),
}

/// Per-term decomposition of one backend's selection score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermBreakdown {
    #[serde(rename = "C")]
    pub capability: f64,
    #[serde(rename = "T")]
    pub timing: f64,
    #[serde(rename = "L")]
    pub lifecycle: f64,
    #[serde(rename = "D")]
    pub twin_locality: f64,
    #[serde(rename = "O")]
    pub overhead: f64,
    pub score: f64,
}

/// Outcome of a full matching pass over a candidate list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchDecision {
    /// Winning backend, if any candidate passed all gates.
    pub selected: Option<String>,
    /// Admissible candidates with their scores, descending by score and
    /// ascending by backend_id on ties.
    pub ranked: Vec<(String, TermBreakdown)>,
    /// Gate failures per inadmissible candidate, in gate order.
    pub rejections: BTreeMap<String, Vec<String>>,
}

/// Hard admissibility gates, evaluated in a fixed order. All failed gates
/// are reported, not just the first.
pub fn admissible(
    task: &TaskRequest,
    resource: &ResourceDescriptor,
    capability: &CapabilityDescriptor,
    snapshot: &RuntimeSnapshot,
) -> Vec<String> {
    let mut reasons = Vec::new();
    if capability.input_modality != task.input_modality {
        reasons.push(format!(
            "modality_mismatch: task needs {:?}, backend accepts {:?}",
            task.input_modality, capability.input_modality
        ));
    }
    if capability.requires_supervision && !task.human_supervision_available {
        reasons.push("supervision_unavailable".into());
    }
    if snapshot.age_of_information_ms > task.max_twin_age_ms {
        reasons.push(format!(
            "twin_stale: age {:.1} ms exceeds task bound {:.1} ms",
            snapshot.age_of_information_ms, task.max_twin_age_ms
        ));
    }
    if snapshot.health_status == HealthStatus::Failed {
        reasons.push("health_failed".into());
    }
    let missing: Vec<&String> = task
        .required_telemetry
        .iter()
        .filter(|f| !capability.telemetry_fields.contains(*f))
        .collect();
    if !missing.is_empty() {
        reasons.push(format!("telemetry_missing: {missing:?}"));
    }
    if task.payload.max_magnitude() > resource.tenancy.safety_bounds {
        reasons.push(format!(
            "safety_bounds: payload magnitude {:.3} exceeds bound {:.3}",
            task.payload.max_magnitude(),
            resource.tenancy.safety_bounds
        ));
    }
    reasons
}

/// Weighted soft score for an admissible backend. Returns the per-term
/// breakdown so rankings can be audited.
pub fn score(
    task: &TaskRequest,
    resource: &ResourceDescriptor,
    capability: &CapabilityDescriptor,
    snapshot: &RuntimeSnapshot,
    weights: &MatchWeights,
) -> Result<TermBreakdown, MatchError> {
    let reasons = admissible(task, resource, capability, snapshot);
    if !reasons.is_empty() {
        return Err(MatchError::Inadmissible {
            backend_id: resource.backend_id.clone(),
            reasons,
        });
    }

    let modality_match = if capability.input_modality == task.input_modality {
        1.0
    } else {
        0.0
    };
    let telemetry_coverage = if task.required_telemetry.is_empty() {
        1.0
    } else {
        let covered = task
            .required_telemetry
            .iter()
            .filter(|f| capability.telemetry_fields.contains(*f))
            .count();
        covered as f64 / task.required_telemetry.len() as f64
    };
    let capability_term = 0.5 * modality_match + 0.5 * telemetry_coverage;

    let timing = (task.latency_target_ms / capability.expected_latency_ms).min(1.0);
    let lifecycle = 1.0 / (1.0 + snapshot.prep_cost_s);
    let twin_locality = snapshot.twin_confidence
        * (1.0 - snapshot.drift_score).clamp(0.0, 1.0)
        * locality_factor(resource.adapter_type);
    let overhead = (assumed_overhead_ms(resource.adapter_type) / 100.0).min(1.0);

    let total = weights.alpha * capability_term + weights.beta * timing
        + weights.gamma * lifecycle
        + weights.delta * twin_locality
        - weights.epsilon * overhead;
    Ok(TermBreakdown {
        capability: capability_term,
        timing,
        lifecycle,
        twin_locality,
        overhead,
        score: total,
    })
}

fn preferred_subset<'a>(task: &TaskRequest, entries: &'a [RegistryEntry]) -> Vec<&'a RegistryEntry> {
    match &task.backend_preference {
        Some(id) => entries
            .iter()
            .filter(|e| &e.resource.backend_id == id)
            .collect(),
        None => entries.iter().collect(),
    }
}

/// The full matcher: hard gates, then the weighted score, highest score
/// wins with ascending-id tie-break. A `backend_preference` collapses the
/// candidate list to that backend before gating.
pub fn select_full(
    task: &TaskRequest,
    entries: &[RegistryEntry],
    snapshots: &BTreeMap<String, RuntimeSnapshot>,
    weights: &MatchWeights,
) -> Result<MatchDecision, MatchError> {
    let mut ranked = Vec::new();
    let mut rejections = BTreeMap::new();
    for entry in preferred_subset(task, entries) {
        let id = entry.resource.backend_id.clone();
        let snapshot = snapshots
            .get(&id)
            .ok_or_else(|| MatchError::MissingSnapshot(id.clone()))?;
        match score(task, &entry.resource, &entry.capability, snapshot, weights) {
            Ok(breakdown) => ranked.push((id, breakdown)),
            Err(MatchError::Inadmissible { reasons, .. }) => {
                rejections.insert(id, reasons);
            }
            Err(other) => return Err(other),
        }
    }
    ranked.sort_by(|a, b| {
        b.1.score
            .partial_cmp(&a.1.score)
            .expect("scores are finite")
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(MatchDecision {
        selected: ranked.first().map(|(id, _)| id.clone()),
        ranked,
        rejections,
    })
}

/// Degraded baseline: uniform choice among statically compatible
/// candidates. The staleness and supervision gates are deliberately not
/// applied, modelling a selector that checks static compatibility but is
/// blind to runtime state and operating policy.
pub fn select_random_admissible(
    task: &TaskRequest,
    entries: &[RegistryEntry],
    snapshots: &BTreeMap<String, RuntimeSnapshot>,
    seed: u64,
) -> Option<String> {
    let mut pool = Vec::new();
    for entry in preferred_subset(task, entries) {
        let id = &entry.resource.backend_id;
        let snapshot = snapshots.get(id)?;
        let reasons = admissible(task, &entry.resource, &entry.capability, snapshot);
        if reasons
            .iter()
            .all(|r| r.starts_with("twin_stale") || r == "supervision_unavailable")
        {
            pool.push(id.clone());
        }
    }
    if pool.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = rng.random_range(0..pool.len());
    Some(pool[index].clone())
}

/// Degraded baseline: first backend (ascending id) whose input modality
/// matches; everything else is ignored.
pub fn select_modality_only(task: &TaskRequest, entries: &[RegistryEntry]) -> Option<String> {
    preferred_subset(task, entries)
        .iter()
        .filter(|e| e.capability.input_modality == task.input_modality)
        .map(|e| e.resource.backend_id.clone())
        .min()
}

/// Degraded baseline: lowest advertised expected latency among modality
/// matches, ascending-id tie-break. Twin validity, telemetry, supervision,
/// and safety are all ignored.
pub fn select_latency_only(task: &TaskRequest, entries: &[RegistryEntry]) -> Option<String> {
    preferred_subset(task, entries)
        .iter()
        .filter(|e| e.capability.input_modality == task.input_modality)
        .min_by(|a, b| {
            a.capability
                .expected_latency_ms
                .partial_cmp(&b.capability.expected_latency_ms)
                .expect("latencies are finite")
                .then_with(|| a.resource.backend_id.cmp(&b.resource.backend_id))
        })
        .map(|e| e.resource.backend_id.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    use crate::fixtures;
    use crate::model::{FallbackPolicy, LifecycleState, ModalPayload, Modality};

    fn healthy_snapshot(backend_id: &str) -> RuntimeSnapshot {
        RuntimeSnapshot {
            backend_id: backend_id.into(),
            health_status: HealthStatus::Healthy,
            drift_score: 0.0,
            age_of_information_ms: 0.0,
            lifecycle_state: LifecycleState::Ready,
            twin_confidence: 1.0,
            prep_cost_s: 0.0,
            viability_score: None,
            contamination_level: None,
        }
    }

    fn vector_task() -> TaskRequest {
        TaskRequest {
            task_id: "t-vec".into(),
            function: "map_vector".into(),
            input_modality: Modality::DigitalVector,
            payload: ModalPayload::Vector(vec![0.1, 0.2, 0.3, 0.4]),
            latency_target_ms: 10.0,
            max_twin_age_ms: 60_000.0,
            required_telemetry: BTreeSet::new(),
            human_supervision_available: false,
            backend_preference: None,
            fallback_policy: FallbackPolicy::None,
            weight_profile: None,
        }
    }

    #[test]
    fn healthy_local_fast_scores_0_8995() {
        let (rd, cd) = fixtures::local_fast_descriptor();
        let snap = healthy_snapshot("local-fast");
        let b = score(&vector_task(), &rd, &cd, &snap, &MatchWeights::default()).unwrap();
        assert!((b.score - 0.8995).abs() < 1e-12, "score was {}", b.score);
        assert_eq!(b.capability, 1.0);
        assert_eq!(b.timing, 1.0);
        assert_eq!(b.lifecycle, 1.0);
        assert_eq!(b.twin_locality, 1.0);
        assert_eq!(b.overhead, 0.005);
    }

    #[test]
    fn remote_fast_scores_0_8650() {
        let (rd, cd) = fixtures::remote_fast_descriptor();
        let snap = healthy_snapshot("remote-fast");
        let b = score(&vector_task(), &rd, &cd, &snap, &MatchWeights::default()).unwrap();
        assert!((b.score - 0.8650).abs() < 1e-12, "score was {}", b.score);
        assert_eq!(b.twin_locality, 0.8);
        assert_eq!(b.overhead, 0.05);
    }

    #[test]
    fn drifted_local_fast_drops_to_0_7795_and_loses_to_remote() {
        let (rd, cd) = fixtures::local_fast_descriptor();
        let mut snap = healthy_snapshot("local-fast");
        snap.drift_score = 0.8;
        let b = score(&vector_task(), &rd, &cd, &snap, &MatchWeights::default()).unwrap();
        assert!((b.score - 0.7795).abs() < 1e-12, "score was {}", b.score);
        assert!(b.score < 0.8650);
    }

    #[test]
    fn modality_mismatch_is_the_first_gate() {
        let (rd, cd) = fixtures::chemical_descriptor();
        let reasons = admissible(&vector_task(), &rd, &cd, &healthy_snapshot("chemical"));
        assert!(reasons[0].starts_with("modality_mismatch"));
    }

    #[test]
    fn supervision_gate_blocks_wetware_without_a_supervisor() {
        let (rd, cd) = fixtures::wetware_descriptor();
        let mut task = vector_task();
        task.input_modality = Modality::SpikeStimulation;
        task.payload = ModalPayload::Stimulation(vec![]);
        let reasons = admissible(&task, &rd, &cd, &healthy_snapshot("wetware"));
        assert_eq!(reasons, vec!["supervision_unavailable".to_string()]);
        task.human_supervision_available = true;
        assert!(admissible(&task, &rd, &cd, &healthy_snapshot("wetware")).is_empty());
    }

    #[test]
    fn stale_twin_is_inadmissible() {
        let (rd, cd) = fixtures::local_fast_descriptor();
        let mut snap = healthy_snapshot("local-fast");
        snap.age_of_information_ms = 120_000.0;
        let reasons = admissible(&vector_task(), &rd, &cd, &snap);
        assert!(reasons.iter().any(|r| r.starts_with("twin_stale")));
        assert!(score(&vector_task(), &rd, &cd, &snap, &MatchWeights::default()).is_err());
    }

    #[test]
    fn failed_health_is_inadmissible() {
        let (rd, cd) = fixtures::local_fast_descriptor();
        let mut snap = healthy_snapshot("local-fast");
        snap.health_status = HealthStatus::Failed;
        assert!(admissible(&vector_task(), &rd, &cd, &snap)
            .contains(&"health_failed".to_string()));
    }

    #[test]
    fn unadvertised_telemetry_is_inadmissible() {
        let (rd, cd) = fixtures::local_fast_descriptor();
        let mut task = vector_task();
        task.required_telemetry = ["firing_rate".to_string()].into_iter().collect();
        let reasons = admissible(&task, &rd, &cd, &healthy_snapshot("local-fast"));
        assert!(reasons.iter().any(|r| r.starts_with("telemetry_missing")));
    }

    #[test]
    fn payload_beyond_safety_bounds_is_inadmissible() {
        let (rd, cd) = fixtures::local_fast_descriptor();
        let mut task = vector_task();
        task.payload = ModalPayload::Vector(vec![500.0, 0.0, 0.0, 0.0]);
        let reasons = admissible(&task, &rd, &cd, &healthy_snapshot("local-fast"));
        assert!(reasons.iter().any(|r| r.starts_with("safety_bounds")));
    }

    #[test]
    fn gates_report_in_fixed_order() {
        let (rd, cd) = fixtures::wetware_descriptor();
        let mut task = vector_task(); // wrong modality, no supervisor
        task.payload = ModalPayload::Vector(vec![50.0; 4]); // beyond wetware bound 10
        let mut snap = healthy_snapshot("wetware");
        snap.age_of_information_ms = 1e9;
        snap.health_status = HealthStatus::Failed;
        let reasons = admissible(&task, &rd, &cd, &snap);
        assert_eq!(reasons.len(), 5);
        assert!(reasons[0].starts_with("modality_mismatch"));
        assert_eq!(reasons[1], "supervision_unavailable");
        assert!(reasons[2].starts_with("twin_stale"));
        assert_eq!(reasons[3], "health_failed");
        assert!(reasons[4].starts_with("safety_bounds"));
    }
}
