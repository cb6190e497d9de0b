//! Substrate-aware control plane for simulated physical-neural backends.
//!
//! Heterogeneous substrates — a chemical reservoir, a synthetic wetware
//! culture, fast digital twins, and an external wetware-API stub — are
//! exposed behind one uniform contract so that clients can discover,
//! score, invoke, and supervise them without substrate-specific code.
//!
//! The crate is organized in three planes:
//!
//! * control plane: [`registry`], [`matcher`], [`policy`], [`orchestrator`]
//! * twin plane: [`twin`] (validity metadata; the twin models themselves
//!   live in the adapters)
//! * data plane: [`adapter`], [`adapters`], and the HTTP boundary in
//!   [`ext`]
//!
//! [`harness`] drives the desk-scale evaluation: selector comparison,
//! fault campaign, overhead and HTTP benches, and the portability check.

pub mod adapter;
pub mod adapters;
pub mod canon;
pub mod clock;
pub mod config;
pub mod ext;
pub mod fixtures;
pub mod harness;
pub mod matcher;
pub mod model;
pub mod orchestrator;
pub mod policy;
pub mod registry;
pub mod twin;

pub use adapter::{Adapter, AdapterError, RawResult};
pub use matcher::{MatchDecision, TermBreakdown};
pub use model::{
    CapabilityDescriptor, MatchWeights, ModalPayload, ResourceDescriptor, RuntimeSnapshot,
    SessionResult, SessionStatus, TaskRequest,
};
pub use orchestrator::Orchestrator;
pub use registry::{DiscoveryQuery, Registry};
pub use twin::TwinPlane;
