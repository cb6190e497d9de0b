//! Capability registry: registration, conjunctive discovery, runtime
//! snapshots, and the shared-key portability analysis.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapter::Adapter;
use crate::canon::{top_level_keys, CanonError};
use crate::clock::Clock;
use crate::model::{
    CapabilityDescriptor, LatencyRegime, LifecycleOp, Location, Modality, ResourceDescriptor,
    RuntimeSnapshot, validate_descriptor,
};
use crate::twin::TwinPlane;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("duplicate backend_id: {0}")]
    Duplicate(String),
    #[error("invalid descriptor for {backend_id}: {violations:?}")]
    InvalidDescriptor {
        backend_id: String,
        violations: Vec<String>,
    },
    #[error("unknown backend_id: {0}")]
    UnknownBackend(String),
}

/// Conjunctive discovery filter. Every populated field must be satisfied;
/// an all-empty query matches every backend.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscoveryQuery {
    pub input_modality: Option<Modality>,
    pub latency_regime: Option<LatencyRegime>,
    pub required_telemetry: BTreeSet<String>,
    pub required_lifecycle_ops: BTreeSet<LifecycleOp>,
    pub location: Option<Location>,
}

impl DiscoveryQuery {
    pub fn for_modality(modality: Modality) -> Self {
        DiscoveryQuery {
            input_modality: Some(modality),
            ..Default::default()
        }
    }

    fn matches(&self, capability: &CapabilityDescriptor, resource: &ResourceDescriptor) -> bool {
        if let Some(modality) = self.input_modality {
            if capability.input_modality != modality {
                return false;
            }
        }
        if let Some(regime) = self.latency_regime {
            if capability.latency_regime != regime {
                return false;
            }
        }
        if !self
            .required_telemetry
            .iter()
            .all(|f| capability.telemetry_fields.contains(f))
        {
            return false;
        }
        if !self
            .required_lifecycle_ops
            .iter()
            .all(|op| capability.lifecycle_ops.contains(op))
        {
            return false;
        }
        if let Some(location) = self.location {
            if resource.location != location {
                return false;
            }
        }
        true
    }
}

/// Registered backend: cached descriptors plus the adapter handle. The
/// registry is the single source of descriptors; `describe()` is consulted
/// once at registration.
#[derive(Clone)]
pub struct RegistryEntry {
    pub resource: ResourceDescriptor,
    pub capability: CapabilityDescriptor,
    pub adapter: Arc<dyn Adapter>,
}

pub struct Registry {
    clock: Arc<dyn Clock>,
    twin: Arc<TwinPlane>,
    entries: RwLock<BTreeMap<String, RegistryEntry>>,
}

impl Registry {
    pub fn new(clock: Arc<dyn Clock>, twin: Arc<TwinPlane>) -> Self {
        Registry {
            clock,
            twin,
            entries: RwLock::new(BTreeMap::new()),
        }
    }

    pub fn twin_plane(&self) -> &Arc<TwinPlane> {
        &self.twin
    }

    /// Registers an adapter. The descriptor pair is read once from the
    /// adapter, validated, cached, and a twin record is created with an
    /// initial synchronization.
    pub fn register(&self, adapter: Arc<dyn Adapter>) -> Result<(), RegistryError> {
        let (resource, capability) = adapter.describe();
        let violations = validate_descriptor(&resource, &capability);
        if !violations.is_empty() {
            return Err(RegistryError::InvalidDescriptor {
                backend_id: resource.backend_id,
                violations,
            });
        }
        let mut entries = self.entries.write().unwrap();
        if entries.contains_key(&resource.backend_id) {
            return Err(RegistryError::Duplicate(resource.backend_id));
        }
        self.twin.register_twin(
            &resource.backend_id,
            &resource.twin_id,
            capability.freshness_bound_ms,
        );
        entries.insert(
            resource.backend_id.clone(),
            RegistryEntry {
                resource,
                capability,
                adapter,
            },
        );
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, backend_id: &str) -> Option<RegistryEntry> {
        self.entries.read().unwrap().get(backend_id).cloned()
    }

    /// All entries in ascending backend_id order.
    pub fn entries(&self) -> Vec<RegistryEntry> {
        self.entries.read().unwrap().values().cloned().collect()
    }

    /// Entries whose capability satisfies every populated query field, in
    /// ascending backend_id order.
    pub fn discover(&self, query: &DiscoveryQuery) -> Vec<RegistryEntry> {
        self.entries
            .read()
            .unwrap()
            .values()
            .filter(|e| query.matches(&e.capability, &e.resource))
            .cloned()
            .collect()
    }

    /// Current dynamic state of a backend, combining the adapter's own
    /// telemetry with the twin plane's validity metadata.
    pub fn snapshot(&self, backend_id: &str) -> Result<RuntimeSnapshot, RegistryError> {
        let entry = self
            .get(backend_id)
            .ok_or_else(|| RegistryError::UnknownBackend(backend_id.to_string()))?;
        let now = self.clock.now_ms();
        let telemetry = entry.adapter.telemetry_snapshot();
        let view = self
            .twin
            .view(backend_id, now)
            .map_err(|_| RegistryError::UnknownBackend(backend_id.to_string()))?;
        let drift = telemetry
            .get("drift_score")
            .copied()
            .unwrap_or(view.drift_score);
        Ok(RuntimeSnapshot {
            backend_id: backend_id.to_string(),
            health_status: entry.adapter.health(),
            drift_score: drift,
            age_of_information_ms: view.age_of_information_ms,
            lifecycle_state: entry.adapter.lifecycle_state(),
            twin_confidence: view.confidence,
            prep_cost_s: entry.adapter.prep_estimate_s(),
            viability_score: telemetry.get("viability_score").copied(),
            contamination_level: telemetry.get("contamination_level").copied(),
        })
    }

    /// Snapshots for a candidate list, keyed by backend_id.
    pub fn snapshots_for(
        &self,
        entries: &[RegistryEntry],
    ) -> Result<BTreeMap<String, RuntimeSnapshot>, RegistryError> {
        entries
            .iter()
            .map(|e| {
                self.snapshot(&e.resource.backend_id)
                    .map(|s| (e.resource.backend_id.clone(), s))
            })
            .collect()
    }
}

/// |intersection| / |union| of the top-level key sets of a group of
/// serialized objects. 1.0 means every object exposes exactly the same
/// client-visible structure.
pub fn shared_key_ratio(serialized_set: &[Vec<u8>]) -> Result<f64, CanonError> {
    let mut sets = Vec::with_capacity(serialized_set.len());
    for bytes in serialized_set {
        sets.push(top_level_keys(bytes)?);
    }
    let Some(first) = sets.first() else {
        return Err(CanonError::Parse("empty input set".into()));
    };
    let mut intersection = first.clone();
    let mut union = first.clone();
    for set in &sets[1..] {
        intersection = intersection.intersection(set).cloned().collect();
        union = union.union(set).cloned().collect();
    }
    if union.is_empty() {
        return Ok(1.0);
    }
    Ok(intersection.len() as f64 / union.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapters::{ChemicalAdapter, CorticalStubAdapter, FastAdapter, WetwareAdapter};
    use crate::canon::canonical_json;
    use crate::clock::VirtualClock;
    use crate::config::AdapterConfig;
    use crate::fixtures;

    fn registry_with_local_backends() -> (Arc<VirtualClock>, Registry) {
        let clock = VirtualClock::new();
        let config = AdapterConfig::default();
        let twin = Arc::new(TwinPlane::new(clock.clone(), config.twin.clone()));
        let registry = Registry::new(clock.clone(), twin);
        registry
            .register(Arc::new(ChemicalAdapter::new(config.chemical.clone())))
            .unwrap();
        registry
            .register(Arc::new(WetwareAdapter::new(config.wetware.clone())))
            .unwrap();
        registry
            .register(Arc::new(FastAdapter::new(config.fast.clone())))
            .unwrap();
        registry
            .register(Arc::new(FastAdapter::with_descriptor(
                config.fast.clone(),
                fixtures::remote_fast_descriptor(),
            )))
            .unwrap();
        registry
            .register(Arc::new(CorticalStubAdapter::new(config.cortical)))
            .unwrap();
        (clock, registry)
    }

    fn ids(entries: &[RegistryEntry]) -> Vec<String> {
        entries.iter().map(|e| e.resource.backend_id.clone()).collect()
    }

    #[test]
    fn five_fixture_backends_register() {
        let (_, registry) = registry_with_local_backends();
        assert_eq!(registry.len(), 5);
    }

    #[test]
    fn duplicate_registration_is_rejected() {
        let (_, registry) = registry_with_local_backends();
        let err = registry.register(Arc::new(ChemicalAdapter::new(Default::default())));
        assert!(matches!(err, Err(RegistryError::Duplicate(_))));
        assert_eq!(registry.len(), 5);
    }

    #[test]
    fn empty_query_returns_all_in_ascending_order() {
        let (_, registry) = registry_with_local_backends();
        assert_eq!(
            ids(&registry.discover(&DiscoveryQuery::default())),
            vec!["chemical", "cortical-stub", "local-fast", "remote-fast", "wetware"]
        );
    }

    #[test]
    fn spike_query_finds_the_wetware_backends() {
        let (_, registry) = registry_with_local_backends();
        let found = registry.discover(&DiscoveryQuery::for_modality(Modality::SpikeStimulation));
        assert_eq!(ids(&found), vec!["cortical-stub", "wetware"]);
    }

    #[test]
    fn energy_proxy_query_finds_the_fast_backends() {
        let (_, registry) = registry_with_local_backends();
        let query = DiscoveryQuery {
            required_telemetry: ["energy_proxy".to_string()].into_iter().collect(),
            ..Default::default()
        };
        assert_eq!(ids(&registry.discover(&query)), vec!["local-fast", "remote-fast"]);
    }

    #[test]
    fn fresh_fast_snapshot_is_clean() {
        let (_, registry) = registry_with_local_backends();
        registry.get("local-fast").unwrap().adapter.prepare().unwrap();
        let snap = registry.snapshot("local-fast").unwrap();
        assert_eq!(snap.health_status, crate::model::HealthStatus::Healthy);
        assert_eq!(snap.drift_score, 0.0);
        assert!(snap.age_of_information_ms < 1.0);
        assert_eq!(snap.lifecycle_state, crate::model::LifecycleState::Ready);
    }

    #[test]
    fn drift_shows_up_in_the_snapshot_after_invocations() {
        let (_, registry) = registry_with_local_backends();
        let entry = registry.get("local-fast").unwrap();
        entry.adapter.prepare().unwrap();
        for _ in 0..10 {
            entry
                .adapter
                .invoke(
                    &crate::model::ModalPayload::Vector(vec![0.1; 4]),
                    &BTreeSet::new(),
                )
                .unwrap();
        }
        assert!(registry.snapshot("local-fast").unwrap().drift_score > 0.0);
    }

    #[test]
    fn unknown_backend_snapshot_is_an_error() {
        let (_, registry) = registry_with_local_backends();
        assert!(registry.snapshot("ghost").is_err());
    }

    #[test]
    fn all_fixture_descriptors_share_every_key() {
        let serialized: Vec<Vec<u8>> = fixtures::all_descriptors()
            .iter()
            .map(|(rd, _)| canonical_json(rd).unwrap())
            .collect();
        assert_eq!(shared_key_ratio(&serialized).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_objects_share_nothing() {
        let a = br#"{"x": 1}"#.to_vec();
        let b = br#"{"y": 2}"#.to_vec();
        assert_eq!(shared_key_ratio(&[a, b]).unwrap(), 0.0);
    }

    #[test]
    fn adding_a_constraint_never_adds_entries() {
        let (_, registry) = registry_with_local_backends();
        let base = registry.discover(&DiscoveryQuery::default());
        let narrowed = registry.discover(&DiscoveryQuery {
            latency_regime: Some(LatencyRegime::FastMilliseconds),
            ..Default::default()
        });
        let base_ids = ids(&base);
        for id in ids(&narrowed) {
            assert!(base_ids.contains(&id));
        }
        assert!(narrowed.len() <= base.len());
    }
}
