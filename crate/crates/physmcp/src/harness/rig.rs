//! The desk rig: all five backends registered against one control plane,
//! on a virtual clock, with the externalized backend either in-process or
//! behind a real HTTP boundary.

use std::sync::Arc;

use crate::adapters::{ChemicalAdapter, CorticalStubAdapter, FastAdapter, WetwareAdapter};
use crate::clock::VirtualClock;
use crate::config::{AdapterConfig, WeightProfiles};
use crate::ext::{ExtService, RemoteFastAdapter};
use crate::fixtures;
use crate::orchestrator::Orchestrator;
use crate::registry::Registry;
use crate::twin::TwinPlane;

enum RemoteHandle {
    /// The externalized backend hosted in-process (no sockets); fast and
    /// hermetic, used by most tests.
    InProcess(Arc<FastAdapter>),
    /// The externalized backend behind a live HTTP boundary.
    Http {
        service: ExtService,
        client: Arc<RemoteFastAdapter>,
    },
}

pub struct DeskRig {
    pub clock: Arc<VirtualClock>,
    pub registry: Arc<Registry>,
    pub orchestrator: Orchestrator,
    pub chemical: Arc<ChemicalAdapter>,
    pub wetware: Arc<WetwareAdapter>,
    pub local_fast: Arc<FastAdapter>,
    pub cortical: Arc<CorticalStubAdapter>,
    remote: RemoteHandle,
}

impl DeskRig {
    /// Rig with the externalized backend hosted in-process.
    pub fn in_process() -> Self {
        let config = AdapterConfig::default();
        let remote = RemoteHandle::InProcess(Arc::new(FastAdapter::with_descriptor(
            config.fast.clone(),
            fixtures::remote_fast_descriptor(),
        )));
        Self::build(config, remote)
    }

    /// Rig with a spawned HTTP service for the externalized backend.
    /// `port` 0 binds an ephemeral port.
    pub fn with_http_boundary(port: u16) -> std::io::Result<Self> {
        let config = AdapterConfig::default();
        let service = ExtService::spawn(config.fast.clone(), port)?;
        let client = Arc::new(RemoteFastAdapter::new(service.base_url()));
        Ok(Self::build(config, RemoteHandle::Http { service, client }))
    }

    fn build(config: AdapterConfig, remote: RemoteHandle) -> Self {
        let clock = VirtualClock::new();
        let twin = Arc::new(TwinPlane::new(clock.clone(), config.twin.clone()));
        let registry = Arc::new(Registry::new(clock.clone(), twin));

        let chemical = Arc::new(ChemicalAdapter::new(config.chemical.clone()));
        let wetware = Arc::new(WetwareAdapter::new(config.wetware.clone()));
        let local_fast = Arc::new(FastAdapter::new(config.fast.clone()));
        let cortical = Arc::new(CorticalStubAdapter::new(config.cortical.clone()));

        registry.register(chemical.clone()).expect("chemical registers");
        registry.register(wetware.clone()).expect("wetware registers");
        registry.register(local_fast.clone()).expect("local-fast registers");
        registry.register(cortical.clone()).expect("cortical-stub registers");
        match &remote {
            RemoteHandle::InProcess(adapter) => {
                registry.register(adapter.clone()).expect("remote-fast registers")
            }
            RemoteHandle::Http { client, .. } => {
                registry.register(client.clone()).expect("remote-fast registers")
            }
        }

        let orchestrator =
            Orchestrator::new(registry.clone(), clock.clone(), WeightProfiles::default());
        DeskRig {
            clock,
            registry,
            orchestrator,
            chemical,
            wetware,
            local_fast,
            cortical,
            remote,
        }
    }

    /// Invocation count observed by a backend's adapter.
    pub fn call_count(&self, backend_id: &str) -> u64 {
        self.registry
            .get(backend_id)
            .map_or(0, |entry| entry.adapter.call_count())
    }

    /// True when the externalized backend sits behind a live HTTP boundary.
    pub fn has_http_boundary(&self) -> bool {
        matches!(self.remote, RemoteHandle::Http { .. })
    }

    /// Port of the spawned HTTP service, when one exists.
    pub fn ext_port(&self) -> Option<u16> {
        match &self.remote {
            RemoteHandle::Http { service, .. } => Some(service.port()),
            RemoteHandle::InProcess(_) => None,
        }
    }

    /// Fault hook on the externalized backend's hosted twin, regardless of
    /// boundary mode.
    pub fn set_remote_drift(&self, drift: f64) {
        match &self.remote {
            RemoteHandle::InProcess(adapter) => adapter.set_drift(drift),
            RemoteHandle::Http { service, .. } => service.adapter().set_drift(drift),
        }
    }
}
