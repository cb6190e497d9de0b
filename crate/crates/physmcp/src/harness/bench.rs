//! Control-overhead and HTTP-boundary benches.
//!
//! The overhead bench compares raw adapter invocation against the full
//! orchestrated path, per backend, with lifecycle maintenance (chemical
//! flushes) kept outside the timed region. The HTTP bench measures the
//! client-observed round trip against the backend-side execution time.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adapter::Adapter;
use crate::config::FastConfig;
use crate::ext::{ExtService, RemoteFastAdapter};
use crate::harness::rig::DeskRig;
use crate::harness::tasks;
use crate::model::{LifecycleOp, ModalPayload, SessionStatus, TaskRequest};

/// One timed run, as written to the CSV (`backend,mode,run,latency_ms`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverheadSample {
    pub backend: String,
    pub mode: String,
    pub run: usize,
    pub latency_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverheadStats {
    pub runs_per_mode: usize,
    pub mean_direct_ms: f64,
    pub mean_orchestrated_total_ms: f64,
    pub mean_control_overhead_ms: f64,
    pub control_overhead_samples_ms: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverheadReport {
    pub runs_per_mode: usize,
    pub per_backend: BTreeMap<String, OverheadStats>,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

struct BenchTarget {
    backend_id: &'static str,
    payload: ModalPayload,
    task: TaskRequest,
    /// Lifecycle maintenance run untimed before every chemical-style run.
    maintenance: Vec<LifecycleOp>,
}

fn targets() -> Vec<BenchTarget> {
    vec![
        BenchTarget {
            backend_id: "chemical",
            payload: ModalPayload::Concentrations(vec![0.3, 0.4, 0.5, 0.6]),
            task: tasks::directed(tasks::concentration_task("bench-chemical"), "chemical"),
            maintenance: vec![LifecycleOp::Flush, LifecycleOp::Recharge],
        },
        BenchTarget {
            backend_id: "wetware",
            payload: tasks::spike_task("bench-wetware-payload", true).payload,
            task: tasks::directed(tasks::spike_task("bench-wetware", true), "wetware"),
            maintenance: vec![],
        },
        BenchTarget {
            backend_id: "local-fast",
            payload: ModalPayload::Vector(vec![0.1, 0.2, 0.3, 0.4]),
            task: tasks::directed(tasks::vector_task("bench-local-fast"), "local-fast"),
            maintenance: vec![],
        },
    ]
}

/// Runs `runs` direct and `runs` orchestrated invocations per benched
/// backend on a fresh in-process rig.
pub fn run_overhead_bench(runs: usize) -> (OverheadReport, Vec<OverheadSample>) {
    let rig = DeskRig::in_process();
    let mut samples = Vec::new();
    let mut per_backend = BTreeMap::new();

    for target in targets() {
        let entry = rig
            .registry
            .get(target.backend_id)
            .expect("bench backends are registered");
        entry.adapter.prepare().expect("bench backends prepare");

        let mut direct = Vec::with_capacity(runs);
        for run in 0..runs {
            for op in &target.maintenance {
                entry.adapter.lifecycle(*op).expect("maintenance op supported");
            }
            let started = Instant::now();
            let result = entry
                .adapter
                .invoke(&target.payload, &BTreeSet::new())
                .expect("bench payloads are valid");
            let elapsed_ms = started.elapsed().as_secs_f64() * 1000.0;
            assert!(result.ok, "direct bench run must succeed");
            direct.push(elapsed_ms);
            samples.push(OverheadSample {
                backend: target.backend_id.into(),
                mode: "direct".into(),
                run,
                latency_ms: elapsed_ms,
            });
        }

        let mut orchestrated = Vec::with_capacity(runs);
        let mut overheads = Vec::with_capacity(runs);
        for run in 0..runs {
            for op in &target.maintenance {
                rig.orchestrator
                    .run_lifecycle(target.backend_id, *op)
                    .expect("maintenance op supported");
            }
            let started = Instant::now();
            let result = rig
                .orchestrator
                .submit(&target.task)
                .expect("submission always yields a result");
            let elapsed_ms = started.elapsed().as_secs_f64() * 1000.0;
            assert_eq!(result.status, SessionStatus::Success, "orchestrated bench run");
            orchestrated.push(elapsed_ms);
            overheads.push(result.timing.control_overhead_ms);
            samples.push(OverheadSample {
                backend: target.backend_id.into(),
                mode: "orchestrated".into(),
                run,
                latency_ms: elapsed_ms,
            });
        }

        per_backend.insert(
            target.backend_id.to_string(),
            OverheadStats {
                runs_per_mode: runs,
                mean_direct_ms: mean(&direct),
                mean_orchestrated_total_ms: mean(&orchestrated),
                mean_control_overhead_ms: mean(&overheads),
                control_overhead_samples_ms: overheads,
            },
        );
    }

    (
        OverheadReport {
            runs_per_mode: runs,
            per_backend,
        },
        samples,
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HttpPairSample {
    pub round_trip_ms: f64,
    pub backend_ms: f64,
    pub boundary_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HttpReport {
    pub pair_count: usize,
    pub mean_round_trip_ms: f64,
    pub mean_backend_ms: f64,
    pub mean_boundary_ms: f64,
    pub samples: Vec<HttpPairSample>,
}

/// Spawns the externalized service (port 0 for ephemeral) and measures
/// `pair_count` invocations, pairing the client round trip with the
/// backend-side execution latency.
pub fn run_http_bench(pair_count: usize, port: u16) -> std::io::Result<HttpReport> {
    let service = ExtService::spawn(FastConfig::default(), port)?;
    let client = RemoteFastAdapter::new(service.base_url());
    client
        .prepare()
        .map_err(|e| std::io::Error::other(e.to_string()))?;

    let payload = ModalPayload::Vector(vec![0.1, 0.2, 0.3, 0.4]);
    let mut samples = Vec::with_capacity(pair_count);
    for _ in 0..pair_count {
        let result = client
            .invoke(&payload, &BTreeSet::new())
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        if !result.ok {
            return Err(std::io::Error::other("bench invocation failed"));
        }
        let round_trip_ms = result.telemetry["round_trip_ms"];
        let backend_ms = result.telemetry["execution_latency_ms"];
        samples.push(HttpPairSample {
            round_trip_ms,
            backend_ms,
            boundary_ms: round_trip_ms - backend_ms,
        });
    }
    let round_trips: Vec<f64> = samples.iter().map(|s| s.round_trip_ms).collect();
    let backends: Vec<f64> = samples.iter().map(|s| s.backend_ms).collect();
    let boundaries: Vec<f64> = samples.iter().map(|s| s.boundary_ms).collect();
    Ok(HttpReport {
        pair_count,
        mean_round_trip_ms: mean(&round_trips),
        mean_backend_ms: mean(&backends),
        mean_boundary_ms: mean(&boundaries),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overhead_bench_produces_paired_samples() {
        let (report, samples) = run_overhead_bench(5);
        assert_eq!(report.per_backend.len(), 3);
        assert_eq!(samples.len(), 3 * 2 * 5);
        for stats in report.per_backend.values() {
            assert_eq!(stats.control_overhead_samples_ms.len(), 5);
            assert!(stats.mean_control_overhead_ms >= 0.0);
        }
    }

    #[test]
    fn http_bench_pairs_are_internally_consistent() {
        let report = run_http_bench(5, 0).unwrap();
        assert_eq!(report.samples.len(), 5);
        for sample in &report.samples {
            assert!(sample.round_trip_ms >= sample.backend_ms);
        }
        assert!(report.mean_boundary_ms > 0.0);
    }
}
