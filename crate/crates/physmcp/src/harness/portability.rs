//! Portability check: every backend must expose the same client-visible
//! structure. Descriptors and executed session results are serialized
//! canonically and compared by top-level key set; backend-specific detail
//! may only appear inside the metadata map.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::canon::canonical_json;
use crate::harness::rig::DeskRig;
use crate::harness::tasks;
use crate::model::{SessionResult, SessionStatus};
use crate::registry::shared_key_ratio;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PortabilityReport {
    pub registered_backends: usize,
    pub executable_backends: Vec<String>,
    /// |intersection| / |union| of top-level keys across all resource
    /// descriptors.
    pub descriptor_shared_key_ratio: f64,
    /// Same ratio across the session results of the executable backends.
    pub result_shared_key_ratio: f64,
    /// Per-backend count of metadata keys in the session result — the only
    /// place substrate-specific structure is allowed.
    pub metadata_key_counts: BTreeMap<String, usize>,
}

/// Executes one task on each executable backend and measures structural
/// uniformity of descriptors and results. The wetware-API stub stays
/// registered but unexecuted, standing in for an external dependency that
/// is discoverable without being callable from the desk.
pub fn run_portability_check(http: bool) -> PortabilityReport {
    let rig = if http {
        DeskRig::with_http_boundary(0).expect("ephemeral HTTP service spawns")
    } else {
        DeskRig::in_process()
    };

    let descriptor_bytes: Vec<Vec<u8>> = rig
        .registry
        .entries()
        .iter()
        .map(|e| canonical_json(&e.resource).expect("descriptors serialize"))
        .collect();

    let directed = [
        tasks::directed(tasks::concentration_task("port-chemical"), "chemical"),
        tasks::directed(tasks::vector_task("port-local-fast"), "local-fast"),
        tasks::directed(tasks::vector_task("port-remote-fast"), "remote-fast"),
        tasks::directed(tasks::spike_task("port-wetware", true), "wetware"),
    ];
    let results: Vec<SessionResult> = directed
        .iter()
        .map(|task| {
            let result = rig
                .orchestrator
                .submit(task)
                .expect("submission always yields a result");
            assert_eq!(
                result.status,
                SessionStatus::Success,
                "portability run on {:?} failed: {:?}",
                task.backend_preference,
                result.rejection_reasons
            );
            result
        })
        .collect();
    let result_bytes: Vec<Vec<u8>> = results
        .iter()
        .map(|r| canonical_json(r).expect("results serialize"))
        .collect();

    PortabilityReport {
        registered_backends: rig.registry.len(),
        executable_backends: results.iter().map(|r| r.backend_id.clone()).collect(),
        descriptor_shared_key_ratio: shared_key_ratio(&descriptor_bytes)
            .expect("descriptor key sets parse"),
        result_shared_key_ratio: shared_key_ratio(&result_bytes)
            .expect("result key sets parse"),
        metadata_key_counts: results
            .iter()
            .map(|r| (r.backend_id.clone(), r.metadata.len()))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_backends_share_every_top_level_key() {
        let report = run_portability_check(false);
        assert_eq!(report.registered_backends, 5);
        assert_eq!(report.executable_backends.len(), 4);
        assert_eq!(report.descriptor_shared_key_ratio, 1.0);
        assert_eq!(report.result_shared_key_ratio, 1.0);
    }

    #[test]
    fn substrate_detail_is_confined_to_metadata() {
        let report = run_portability_check(false);
        assert_eq!(report.metadata_key_counts["chemical"], 1);
        assert_eq!(report.metadata_key_counts["local-fast"], 1);
        assert_eq!(report.metadata_key_counts["remote-fast"], 1);
        assert_eq!(report.metadata_key_counts["wetware"], 2);
    }
}
