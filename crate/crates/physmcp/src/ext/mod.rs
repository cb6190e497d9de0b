//! HTTP boundary: the externalized backend service and the client adapter
//! that makes it look like any other registered backend.

pub mod client;
pub mod service;

pub use client::RemoteFastAdapter;
pub use service::ExtService;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::adapter::RawResult;
use crate::model::{
    CapabilityDescriptor, LifecycleOp, LifecycleState, ModalPayload, ResourceDescriptor,
};

/// Wire status carried by every service response. HTTP codes mirror it:
/// ok -> 200, invalid -> 400, busy -> 409, fault -> 500.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireStatus {
    Ok,
    Busy,
    Invalid,
    Fault,
}

impl WireStatus {
    pub fn http_code(self) -> u16 {
        match self {
            WireStatus::Ok => 200,
            WireStatus::Invalid => 400,
            WireStatus::Busy => 409,
            WireStatus::Fault => 500,
        }
    }
}

/// Body of `POST /invoke`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvokeRequest {
    pub payload: ModalPayload,
    #[serde(default)]
    pub required_telemetry: BTreeSet<String>,
}

/// Body of `POST /lifecycle`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifecycleRequest {
    pub op: LifecycleOp,
}

/// Uniform response envelope for every endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireResponse {
    pub status: WireStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource: Option<ResourceDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capability: Option<CapabilityDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<RawResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub telemetry: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifecycle_state: Option<LifecycleState>,
}

impl WireResponse {
    pub fn ok() -> Self {
        WireResponse {
            status: WireStatus::Ok,
            error: None,
            resource: None,
            capability: None,
            result: None,
            telemetry: None,
            lifecycle_state: None,
        }
    }

    pub fn error(status: WireStatus, message: impl Into<String>) -> Self {
        WireResponse {
            error: Some(message.into()),
            ..WireResponse::ok()
        }
        .with_status(status)
    }

    fn with_status(mut self, status: WireStatus) -> Self {
        self.status = status;
        self
    }
}
