//! Fault campaign: five injected runtime faults, each on a fresh rig, with
//! the observed routing decision and per-backend invocation counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::harness::rig::DeskRig;
use crate::harness::tasks;
use crate::model::SessionStatus;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaultScenarioReport {
    pub name: String,
    pub description: String,
    pub task_id: String,
    pub status: SessionStatus,
    /// Backend that produced the final result; empty for rejections.
    pub selected_backend: String,
    pub fallback_used: bool,
    pub rejection_reasons: Vec<String>,
    /// Data-plane invocation counts per backend after the scenario.
    pub invoke_counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaultCampaignReport {
    pub scenarios: Vec<FaultScenarioReport>,
}

fn counts(rig: &DeskRig) -> BTreeMap<String, u64> {
    ["chemical", "cortical-stub", "local-fast", "remote-fast", "wetware"]
        .iter()
        .map(|id| (id.to_string(), rig.call_count(id)))
        .collect()
}

fn new_rig(http: bool) -> DeskRig {
    if http {
        DeskRig::with_http_boundary(0).expect("ephemeral HTTP service spawns")
    } else {
        DeskRig::in_process()
    }
}

/// Runs all five scenarios, each on a fresh rig so faults cannot leak
/// between them. `http` selects whether the externalized backend sits
/// behind a live HTTP boundary.
pub fn run_fault_campaign(http: bool) -> FaultCampaignReport {
    let mut scenarios = Vec::new();

    // 1. Heavy drift on the preferred local twin: routed around before any
    //    invocation, no fallback machinery involved.
    {
        let rig = new_rig(http);
        rig.local_fast.set_drift(0.8);
        let result = rig
            .orchestrator
            .submit(&tasks::vector_task("fault-drift"))
            .expect("submission always yields a result");
        scenarios.push(FaultScenarioReport {
            name: "drift_injection".into(),
            description: "local fast twin driven to drift 0.8; scoring reroutes to the \
                          externalized twin without invoking the drifted one"
                .into(),
            task_id: result.task_id.clone(),
            status: result.status,
            selected_backend: result.backend_id.clone(),
            fallback_used: result.fallback_used,
            rejection_reasons: result.rejection_reasons.clone(),
            invoke_counts: counts(&rig),
        });
    }

    // 2. Stale twin: the admissibility gate excludes the backend outright.
    {
        let rig = new_rig(http);
        rig.registry
            .twin_plane()
            .force_age("local-fast", 120_000.0)
            .expect("local-fast is registered");
        let result = rig
            .orchestrator
            .submit(&tasks::vector_task("fault-stale"))
            .expect("submission always yields a result");
        scenarios.push(FaultScenarioReport {
            name: "stale_twin".into(),
            description: "local twin aged past the task's freshness budget; gated out \
                          before scoring"
                .into(),
            task_id: result.task_id.clone(),
            status: result.status,
            selected_backend: result.backend_id.clone(),
            fallback_used: result.fallback_used,
            rejection_reasons: result.rejection_reasons.clone(),
            invoke_counts: counts(&rig),
        });
    }

    // 3. Supervision revoked: both wetware-class backends are inadmissible
    //    and the task is rejected without touching any substrate.
    {
        let rig = new_rig(http);
        let result = rig
            .orchestrator
            .submit(&tasks::spike_task("fault-supervision", false))
            .expect("submission always yields a result");
        scenarios.push(FaultScenarioReport {
            name: "supervision_revoked".into(),
            description: "spike task with no supervisor available; rejected with zero \
                          data-plane calls"
                .into(),
            task_id: result.task_id.clone(),
            status: result.status,
            selected_backend: result.backend_id.clone(),
            fallback_used: result.fallback_used,
            rejection_reasons: result.rejection_reasons.clone(),
            invoke_counts: counts(&rig),
        });
    }

    // 4. Preparation failure: the winner fails in prepare, the one
    //    permitted fallback hop completes the task.
    {
        let rig = new_rig(http);
        rig.local_fast.arm_prepare_failure(true);
        let result = rig
            .orchestrator
            .submit(&tasks::vector_task("fault-prepare"))
            .expect("submission always yields a result");
        scenarios.push(FaultScenarioReport {
            name: "prepare_failure".into(),
            description: "local twin fails preparation; fallback completes on the \
                          externalized twin, preferred backend never invoked"
                .into(),
            task_id: result.task_id.clone(),
            status: result.status,
            selected_backend: result.backend_id.clone(),
            fallback_used: result.fallback_used,
            rejection_reasons: result.rejection_reasons.clone(),
            invoke_counts: counts(&rig),
        });
    }

    // 5. Telemetry loss: the invocation succeeds but violates the task's
    //    telemetry postcondition, so the result is voided and retried once.
    {
        let rig = new_rig(http);
        rig.local_fast.set_telemetry_omission(Some("energy_proxy".into()));
        let mut task = tasks::vector_task("fault-telemetry");
        task.required_telemetry = ["energy_proxy".to_string()].into_iter().collect();
        let result = rig
            .orchestrator
            .submit(&task)
            .expect("submission always yields a result");
        scenarios.push(FaultScenarioReport {
            name: "telemetry_loss".into(),
            description: "local twin drops a required telemetry field; postcondition \
                          voids the result and fallback recovers"
                .into(),
            task_id: result.task_id.clone(),
            status: result.status,
            selected_backend: result.backend_id.clone(),
            fallback_used: result.fallback_used,
            rejection_reasons: result.rejection_reasons.clone(),
            invoke_counts: counts(&rig),
        });
    }

    FaultCampaignReport { scenarios }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn campaign_outcomes_and_call_counts_match_the_design() {
        let report = run_fault_campaign(false);
        assert_eq!(report.scenarios.len(), 5);
        let by_name: BTreeMap<&str, &FaultScenarioReport> = report
            .scenarios
            .iter()
            .map(|s| (s.name.as_str(), s))
            .collect();

        let drift = by_name["drift_injection"];
        assert_eq!(drift.status, SessionStatus::Success);
        assert_eq!(drift.selected_backend, "remote-fast");
        assert!(!drift.fallback_used);
        assert_eq!(drift.invoke_counts["local-fast"], 0);
        assert_eq!(drift.invoke_counts["remote-fast"], 1);

        let stale = by_name["stale_twin"];
        assert_eq!(stale.status, SessionStatus::Success);
        assert_eq!(stale.selected_backend, "remote-fast");
        assert_eq!(stale.invoke_counts["local-fast"], 0);

        let supervision = by_name["supervision_revoked"];
        assert_eq!(supervision.status, SessionStatus::Rejected);
        assert_eq!(supervision.selected_backend, "");
        assert_eq!(supervision.invoke_counts["wetware"], 0);
        assert_eq!(supervision.invoke_counts["cortical-stub"], 0);

        let prepare = by_name["prepare_failure"];
        assert_eq!(prepare.status, SessionStatus::Success);
        assert_eq!(prepare.selected_backend, "remote-fast");
        assert!(prepare.fallback_used);
        assert_eq!(prepare.invoke_counts["local-fast"], 0);
        assert_eq!(prepare.invoke_counts["remote-fast"], 1);

        let telemetry = by_name["telemetry_loss"];
        assert_eq!(telemetry.status, SessionStatus::Success);
        assert_eq!(telemetry.selected_backend, "remote-fast");
        assert!(telemetry.fallback_used);
        assert_eq!(telemetry.invoke_counts["local-fast"], 1);
        assert_eq!(telemetry.invoke_counts["remote-fast"], 1);
    }
}
