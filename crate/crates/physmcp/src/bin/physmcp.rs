//! Command-line entry point: serve the externalized backend, inspect the
//! registry, submit tasks, run the evaluation benches, or walk through the
//! screening demo.
//!
//! Exit codes: 0 on success, 1 when a submitted task is rejected or fails,
//! 2 on usage or input errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use physmcp::config::FastConfig;
use physmcp::ext::ExtService;
use physmcp::harness::report::{write_overhead_csv, write_pretty_json};
use physmcp::harness::{
    run_fault_campaign, run_http_bench, run_overhead_bench, run_portability_check,
    run_selector_suite, tasks, DeskRig, SelectorSuite,
};
use physmcp::model::{SessionStatus, TaskRequest};

#[derive(Parser)]
#[command(name = "physmcp", version, about = "Substrate-aware control plane for simulated physical-neural backends")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the externalized fast backend over HTTP until interrupted.
    ServeExt {
        /// Port to bind; falls back to PHYSMCP_EXT_PORT, then 7171.
        #[arg(long)]
        port: Option<u16>,
    },
    /// Registry operations.
    Registry {
        #[command(subcommand)]
        command: RegistryCommand,
    },
    /// Submit a task request (JSON file) to a freshly built desk rig.
    Submit {
        /// Path to the task request JSON.
        #[arg(long)]
        task: PathBuf,
        /// Write the session result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the evaluation benches and write its report files.
    Bench {
        #[command(subcommand)]
        kind: BenchKind,
    },
    /// Guided demos.
    Demo {
        #[command(subcommand)]
        kind: DemoKind,
    },
}

#[derive(Subcommand)]
enum RegistryCommand {
    /// List all registered backends with their capability summary.
    List,
}

#[derive(Subcommand)]
enum BenchKind {
    /// Selector comparison over the seven-task routing suite.
    Selectors {
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Five-scenario fault-injection campaign.
    Faults {
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        /// Put the externalized backend behind a live HTTP boundary.
        #[arg(long)]
        http: bool,
    },
    /// Direct-vs-orchestrated control-overhead bench.
    Overhead {
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[arg(long, default_value_t = 25)]
        runs: usize,
    },
    /// HTTP boundary cost bench against a spawned service.
    Http {
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[arg(long, default_value_t = 15)]
        pairs: usize,
    },
    /// Structural portability check across all backends.
    Portability {
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[arg(long)]
        http: bool,
    },
}

#[derive(Subcommand)]
enum DemoKind {
    /// End-to-end screening walk: discovery, routing, supervision, and a
    /// rejected request.
    Screening,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::ServeExt { port } => serve_ext(port),
        Command::Registry {
            command: RegistryCommand::List,
        } => registry_list(),
        Command::Submit { task, out } => submit(&task, out.as_deref()),
        Command::Bench { kind } => bench(kind),
        Command::Demo {
            kind: DemoKind::Screening,
        } => demo_screening(),
    }
}

fn serve_ext(port: Option<u16>) -> Result<ExitCode, String> {
    let port = match port {
        Some(port) => port,
        None => std::env::var("PHYSMCP_EXT_PORT")
            .ok()
            .map(|v| v.parse::<u16>().map_err(|_| "PHYSMCP_EXT_PORT must be a port number"))
            .transpose()?
            .unwrap_or(7171),
    };
    let service = ExtService::spawn(FastConfig::default(), port).map_err(|e| e.to_string())?;
    println!(
        "externalized backend 'remote-fast' serving on {}",
        service.base_url()
    );
    println!("endpoints: GET /descriptor /health /telemetry, POST /prepare /invoke /lifecycle");
    loop {
        std::thread::sleep(std::time::Duration::from_secs(3600));
    }
}

fn registry_list() -> Result<ExitCode, String> {
    let rig = DeskRig::in_process();
    println!(
        "{:<14} {:<18} {:<22} {:>12}  {:<18} {}",
        "backend", "substrate", "input modality", "latency(ms)", "location", "health"
    );
    for entry in rig.registry.entries() {
        let snapshot = rig
            .registry
            .snapshot(&entry.resource.backend_id)
            .map_err(|e| e.to_string())?;
        println!(
            "{:<14} {:<18} {:<22} {:>12.1}  {:<18} {:?}",
            entry.resource.backend_id,
            format!("{:?}", entry.resource.substrate_class),
            format!("{:?}", entry.capability.input_modality),
            entry.capability.expected_latency_ms,
            format!("{:?}", entry.resource.location),
            snapshot.health_status,
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn submit(task_path: &Path, out: Option<&Path>) -> Result<ExitCode, String> {
    let text = std::fs::read_to_string(task_path)
        .map_err(|e| format!("cannot read {}: {e}", task_path.display()))?;
    let task: TaskRequest = serde_json::from_str(&text)
        .map_err(|e| format!("cannot parse {}: {e}", task_path.display()))?;
    let rig = DeskRig::in_process();
    let result = rig.orchestrator.submit(&task).map_err(|e| e.to_string())?;
    let rendered = serde_json::to_string_pretty(&result).map_err(|e| e.to_string())?;
    match out {
        Some(path) => std::fs::write(path, format!("{rendered}\n")).map_err(|e| e.to_string())?,
        None => println!("{rendered}"),
    }
    Ok(match result.status {
        SessionStatus::Success => ExitCode::SUCCESS,
        _ => ExitCode::from(1),
    })
}

fn bench(kind: BenchKind) -> Result<ExitCode, String> {
    match kind {
        BenchKind::Selectors { out } => {
            let rig = DeskRig::in_process();
            let suite = SelectorSuite::load(Path::new("fixtures/selector_suite.json"))
                .map_err(|e| e.to_string())?;
            let report = run_selector_suite(&rig, &suite);
            write_pretty_json(&out.join("selectors.json"), &report).map_err(|e| e.to_string())?;
            println!(
                "selectors: full {}/{}, modality-only {}/{}, latency-only {}/{}, random mean {:.2}",
                report.full_correct,
                report.task_count,
                report.modality_only_correct,
                report.task_count,
                report.latency_only_correct,
                report.task_count,
                report.random_mean_correct
            );
        }
        BenchKind::Faults { out, http } => {
            let report = run_fault_campaign(http);
            write_pretty_json(&out.join("faults.json"), &report).map_err(|e| e.to_string())?;
            for scenario in &report.scenarios {
                println!(
                    "fault {:<22} -> {:?} via '{}'{}",
                    scenario.name,
                    scenario.status,
                    scenario.selected_backend,
                    if scenario.fallback_used { " (fallback)" } else { "" }
                );
            }
        }
        BenchKind::Overhead { out, runs } => {
            let (report, samples) = run_overhead_bench(runs);
            write_pretty_json(&out.join("overhead.json"), &report).map_err(|e| e.to_string())?;
            write_overhead_csv(&out.join("overhead.csv"), &samples).map_err(|e| e.to_string())?;
            for (backend, stats) in &report.per_backend {
                println!(
                    "overhead {:<12} direct {:.3} ms, orchestrated {:.3} ms, control {:.3} ms",
                    backend,
                    stats.mean_direct_ms,
                    stats.mean_orchestrated_total_ms,
                    stats.mean_control_overhead_ms
                );
            }
        }
        BenchKind::Http { out, pairs } => {
            let report = run_http_bench(pairs, 0).map_err(|e| e.to_string())?;
            write_pretty_json(&out.join("http.json"), &report).map_err(|e| e.to_string())?;
            println!(
                "http: {} pairs, round trip {:.3} ms, backend {:.3} ms, boundary {:.3} ms",
                report.pair_count,
                report.mean_round_trip_ms,
                report.mean_backend_ms,
                report.mean_boundary_ms
            );
        }
        BenchKind::Portability { out, http } => {
            let report = run_portability_check(http);
            write_pretty_json(&out.join("portability.json"), &report)
                .map_err(|e| e.to_string())?;
            println!(
                "portability: {} registered, {} executable, descriptor ratio {:.2}, result ratio {:.2}",
                report.registered_backends,
                report.executable_backends.len(),
                report.descriptor_shared_key_ratio,
                report.result_shared_key_ratio
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn demo_screening() -> Result<ExitCode, String> {
    let rig = DeskRig::in_process();
    println!("registered backends:");
    for entry in rig.registry.entries() {
        println!(
            "  {:<14} ({:?}, {:?})",
            entry.resource.backend_id,
            entry.resource.substrate_class,
            entry.capability.input_modality
        );
    }
    println!();

    let battery = [
        tasks::concentration_task("demo-assay"),
        tasks::vector_task("demo-vector"),
        tasks::spike_task("demo-spike-supervised", true),
        tasks::spike_task("demo-spike-unsupervised", false),
    ];
    for task in &battery {
        let result = rig.orchestrator.submit(task).map_err(|e| e.to_string())?;
        match result.status {
            SessionStatus::Success => println!(
                "  {:<26} -> {} (backend {:.3} ms, control {:.3} ms)",
                task.task_id,
                result.backend_id,
                result.timing.backend_latency_ms,
                result.timing.control_overhead_ms
            ),
            _ => println!(
                "  {:<26} -> {:?}: {}",
                task.task_id,
                result.status,
                result.rejection_reasons.join("; ")
            ),
        }
    }
    Ok(ExitCode::SUCCESS)
}
