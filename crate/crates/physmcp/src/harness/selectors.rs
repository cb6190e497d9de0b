//! Selector comparison: the full matcher against three degraded baselines
//! over a fixed seven-task routing suite.
//!
//! The suite is pure: scenario mutations are applied to copies of the
//! runtime snapshots, so no adapter state changes and every selector sees
//! the exact same world.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::WeightProfiles;
use crate::harness::rig::DeskRig;
use crate::harness::tasks;
use crate::matcher::{
    select_full, select_latency_only, select_modality_only, select_random_admissible,
};
use crate::model::{HealthStatus, RuntimeSnapshot, TaskRequest};

/// Partial runtime-state mutation applied to one backend's snapshot.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnapshotOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub age_of_information_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub health_status: Option<HealthStatus>,
}

impl SnapshotOverride {
    fn apply(&self, snapshot: &mut RuntimeSnapshot) {
        if let Some(drift) = self.drift_score {
            snapshot.drift_score = drift;
        }
        if let Some(age) = self.age_of_information_ms {
            snapshot.age_of_information_ms = age;
        }
        if let Some(health) = self.health_status {
            snapshot.health_status = health;
        }
    }
}

/// One routing scenario: a task, the runtime-state mutations that define
/// the scenario, and the backend a correct selector must pick (`None`
/// means the only correct decision is to reject).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteTask {
    pub task: TaskRequest,
    #[serde(default)]
    pub overrides: BTreeMap<String, SnapshotOverride>,
    pub expected: Option<String>,
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorSuite {
    pub tasks: Vec<SuiteTask>,
}

impl SelectorSuite {
    /// The built-in seven-task suite. `fixtures/selector_suite.json` is a
    /// golden copy of this value.
    pub fn builtin() -> Self {
        let mut suite = Vec::new();

        suite.push(SuiteTask {
            task: tasks::concentration_task("t1-chem-steady"),
            overrides: BTreeMap::new(),
            expected: Some("chemical".into()),
            note: "seconds-scale assay; only the chemical backend speaks concentrations".into(),
        });

        let mut drift = BTreeMap::new();
        drift.insert(
            "local-fast".to_string(),
            SnapshotOverride {
                drift_score: Some(0.8),
                ..Default::default()
            },
        );
        suite.push(SuiteTask {
            task: tasks::vector_task("t2-vec-drifted-local"),
            overrides: drift,
            expected: Some("remote-fast".into()),
            note: "heavy drift on the local twin; validity-aware routing crosses the boundary"
                .into(),
        });

        suite.push(SuiteTask {
            task: tasks::vector_task("t3-vec-clean"),
            overrides: BTreeMap::new(),
            expected: Some("local-fast".into()),
            note: "clean fast path; the local twin wins on latency and locality".into(),
        });

        let mut task4 = tasks::spike_task("t4-spike-noise-telemetry", true);
        task4.required_telemetry = ["noise_level".to_string()].into_iter().collect();
        suite.push(SuiteTask {
            task: task4,
            overrides: BTreeMap::new(),
            expected: Some("wetware".into()),
            note: "noise telemetry is only advertised by the wetware culture".into(),
        });

        let mut stale = BTreeMap::new();
        stale.insert(
            "local-fast".to_string(),
            SnapshotOverride {
                age_of_information_ms: Some(120_000.0),
                ..Default::default()
            },
        );
        suite.push(SuiteTask {
            task: tasks::vector_task("t5-vec-stale-local"),
            overrides: stale,
            expected: Some("remote-fast".into()),
            note: "stale local twin beyond the task's freshness budget".into(),
        });

        suite.push(SuiteTask {
            task: tasks::spike_task("t6-spike-unsupervised", false),
            overrides: BTreeMap::new(),
            expected: None,
            note: "no supervisor on duty; the only safe decision is rejection".into(),
        });

        let mut wet_drift = BTreeMap::new();
        wet_drift.insert(
            "wetware".to_string(),
            SnapshotOverride {
                drift_score: Some(0.8),
                ..Default::default()
            },
        );
        suite.push(SuiteTask {
            task: tasks::spike_task("t7-spike-drifted-wetware", true),
            overrides: wet_drift,
            expected: Some("cortical-stub".into()),
            note: "drifted culture; the external stub is the more trustworthy spike target".into(),
        });

        SelectorSuite { tasks: suite }
    }

    /// Loads the suite from `path`, falling back to the built-in suite when
    /// the file is absent.
    pub fn load(path: &Path) -> std::io::Result<Self> {
        if !path.exists() {
            return Ok(Self::builtin());
        }
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }
}

/// Per-task choices of every selector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub task_id: String,
    pub expected: Option<String>,
    pub full: Option<String>,
    pub modality_only: Option<String>,
    pub latency_only: Option<String>,
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectorReport {
    pub tasks: Vec<TaskOutcome>,
    pub task_count: usize,
    pub full_correct: usize,
    pub modality_only_correct: usize,
    pub latency_only_correct: usize,
    pub random_correct_seed_42: usize,
    /// Mean correct count of the random baseline over seeds 0..100.
    pub random_mean_correct: f64,
}

/// Runs every selector over the suite against the rig's current registry
/// state (plus per-task snapshot overrides) and scores them against the
/// expected choices.
pub fn run_selector_suite(rig: &DeskRig, suite: &SelectorSuite) -> SelectorReport {
    let entries = rig.registry.entries();
    let base_snapshots = rig
        .registry
        .snapshots_for(&entries)
        .expect("snapshots exist for all registered backends");
    let weights = WeightProfiles::default()
        .get("default")
        .expect("default profile exists");

    let mut outcomes = Vec::new();
    let mut full_correct = 0;
    let mut modality_correct = 0;
    let mut latency_correct = 0;
    for scenario in &suite.tasks {
        let mut snapshots = base_snapshots.clone();
        for (backend_id, patch) in &scenario.overrides {
            if let Some(snapshot) = snapshots.get_mut(backend_id) {
                patch.apply(snapshot);
            }
        }
        let full = select_full(&scenario.task, &entries, &snapshots, &weights)
            .expect("snapshots cover all candidates")
            .selected;
        let modality = select_modality_only(&scenario.task, &entries);
        let latency = select_latency_only(&scenario.task, &entries);
        if full == scenario.expected {
            full_correct += 1;
        }
        if modality == scenario.expected {
            modality_correct += 1;
        }
        if latency == scenario.expected {
            latency_correct += 1;
        }
        outcomes.push(TaskOutcome {
            task_id: scenario.task.task_id.clone(),
            expected: scenario.expected.clone(),
            full,
            modality_only: modality,
            latency_only: latency,
            note: scenario.note.clone(),
        });
    }

    let random_correct = |seed: u64| -> usize {
        suite
            .tasks
            .iter()
            .enumerate()
            .filter(|(idx, scenario)| {
                let mut snapshots = base_snapshots.clone();
                for (backend_id, patch) in &scenario.overrides {
                    if let Some(snapshot) = snapshots.get_mut(backend_id) {
                        patch.apply(snapshot);
                    }
                }
                let choice = select_random_admissible(
                    &scenario.task,
                    &entries,
                    &snapshots,
                    seed.wrapping_mul(1000).wrapping_add(*idx as u64),
                );
                choice == scenario.expected
            })
            .count()
    };
    let random_mean =
        (0..100).map(|seed| random_correct(seed) as f64).sum::<f64>() / 100.0;

    SelectorReport {
        task_count: suite.tasks.len(),
        full_correct,
        modality_only_correct: modality_correct,
        latency_only_correct: latency_correct,
        random_correct_seed_42: random_correct(42),
        random_mean_correct: random_mean,
        tasks: outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_matcher_solves_the_entire_suite() {
        let rig = DeskRig::in_process();
        let report = run_selector_suite(&rig, &SelectorSuite::builtin());
        assert_eq!(report.task_count, 7);
        assert_eq!(report.full_correct, 7, "outcomes: {:#?}", report.tasks);
    }

    #[test]
    fn degraded_baselines_each_solve_three_of_seven() {
        let rig = DeskRig::in_process();
        let report = run_selector_suite(&rig, &SelectorSuite::builtin());
        assert_eq!(report.modality_only_correct, 3, "outcomes: {:#?}", report.tasks);
        assert_eq!(report.latency_only_correct, 3, "outcomes: {:#?}", report.tasks);
    }

    #[test]
    fn random_baseline_stays_below_the_full_matcher() {
        let rig = DeskRig::in_process();
        let report = run_selector_suite(&rig, &SelectorSuite::builtin());
        assert!(report.random_correct_seed_42 < 7);
        assert!(
            report.random_mean_correct >= 3.0 && report.random_mean_correct <= 5.0,
            "mean was {}",
            report.random_mean_correct
        );
    }
}
