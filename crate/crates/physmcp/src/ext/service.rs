//! Externalized backend service: hosts an independent fast twin behind a
//! small HTTP API (descriptor, health, prepare, invoke, lifecycle,
//! telemetry) so that the control plane can reach it like a remote
//! substrate runtime.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use tiny_http::{Header, Method, Response, Server};

use crate::adapter::{Adapter, AdapterError};
use crate::adapters::FastAdapter;
use crate::config::FastConfig;
use crate::ext::{InvokeRequest, LifecycleRequest, WireResponse, WireStatus};
use crate::fixtures;

pub struct ExtService {
    adapter: Arc<FastAdapter>,
    port: u16,
    stop: Arc<AtomicBool>,
    force_fault: Arc<AtomicBool>,
    force_busy: Arc<AtomicBool>,
    worker: Option<JoinHandle<()>>,
}

impl ExtService {
    /// Binds `127.0.0.1:port` (0 for an ephemeral port) and serves the
    /// externalized fast backend until the handle is dropped or
    /// [`stop`](Self::stop) is called.
    pub fn spawn(mut config: FastConfig, port: u16) -> std::io::Result<Self> {
        if config.program_version == FastConfig::default().program_version {
            config.program_version = "ext-1".into();
        }
        let adapter = Arc::new(FastAdapter::with_descriptor(
            config,
            fixtures::remote_fast_descriptor(),
        ));
        let server = Server::http(("127.0.0.1", port))
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        let port = match server.server_addr().to_ip() {
            Some(addr) => addr.port(),
            None => port,
        };
        let stop = Arc::new(AtomicBool::new(false));
        let force_fault = Arc::new(AtomicBool::new(false));
        let force_busy = Arc::new(AtomicBool::new(false));

        let worker = {
            let adapter = adapter.clone();
            let stop = stop.clone();
            let force_fault = force_fault.clone();
            let force_busy = force_busy.clone();
            std::thread::spawn(move || {
                while !stop.load(Ordering::SeqCst) {
                    match server.recv_timeout(Duration::from_millis(50)) {
                        Ok(Some(request)) => {
                            handle(&adapter, &force_fault, &force_busy, request)
                        }
                        Ok(None) => {}
                        Err(_) => break,
                    }
                }
            })
        };
        Ok(ExtService {
            adapter,
            port,
            stop,
            force_fault,
            force_busy,
            worker: Some(worker),
        })
    }

    pub fn port(&self) -> u16 {
        self.port
    }

    pub fn base_url(&self) -> String {
        format!("http://127.0.0.1:{}", self.port)
    }

    /// The hosted adapter, for in-process fault injection in tests.
    pub fn adapter(&self) -> &Arc<FastAdapter> {
        &self.adapter
    }

    /// Fault hook: every subsequent request answers 500/fault.
    pub fn set_force_fault(&self, on: bool) {
        self.force_fault.store(on, Ordering::SeqCst);
    }

    /// Fault hook: every subsequent request answers 409/busy.
    pub fn set_force_busy(&self, on: bool) {
        self.force_busy.store(on, Ordering::SeqCst);
    }

    pub fn stop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(worker) = self.worker.take() {
            let _ = worker.join();
        }
    }
}

impl Drop for ExtService {
    fn drop(&mut self) {
        self.stop();
    }
}

fn handle(
    adapter: &Arc<FastAdapter>,
    force_fault: &AtomicBool,
    force_busy: &AtomicBool,
    mut request: tiny_http::Request,
) {
    let response = if force_fault.load(Ordering::SeqCst) {
        WireResponse::error(WireStatus::Fault, "injected service fault")
    } else if force_busy.load(Ordering::SeqCst) {
        WireResponse::error(WireStatus::Busy, "injected busy state")
    } else {
        let mut body = String::new();
        let _ = request.as_reader().read_to_string(&mut body);
        route(adapter, request.method(), request.url(), &body)
    };
    respond(request, response);
}

fn route(adapter: &Arc<FastAdapter>, method: &Method, url: &str, body: &str) -> WireResponse {
    match (method, url) {
        (Method::Get, "/descriptor") => {
            let (resource, capability) = adapter.describe();
            WireResponse {
                resource: Some(resource),
                capability: Some(capability),
                ..WireResponse::ok()
            }
        }
        (Method::Get, "/health") => WireResponse {
            lifecycle_state: Some(adapter.lifecycle_state()),
            ..WireResponse::ok()
        },
        (Method::Get, "/telemetry") => WireResponse {
            telemetry: Some(adapter.telemetry_snapshot()),
            ..WireResponse::ok()
        },
        (Method::Post, "/prepare") => match adapter.prepare() {
            Ok(()) => WireResponse::ok(),
            Err(err) => WireResponse::error(WireStatus::Fault, err.to_string()),
        },
        (Method::Post, "/invoke") => {
            let parsed: InvokeRequest = match serde_json::from_str(body) {
                Ok(parsed) => parsed,
                Err(err) => {
                    return WireResponse::error(
                        WireStatus::Invalid,
                        format!("malformed invoke body: {err}"),
                    )
                }
            };
            match adapter.invoke(&parsed.payload, &parsed.required_telemetry) {
                Ok(result) => WireResponse {
                    result: Some(result),
                    ..WireResponse::ok()
                },
                Err(AdapterError::InvalidInput(msg)) => {
                    WireResponse::error(WireStatus::Invalid, msg)
                }
                Err(AdapterError::NotReady(msg)) => WireResponse::error(WireStatus::Busy, msg),
                Err(err) => WireResponse::error(WireStatus::Fault, err.to_string()),
            }
        }
        (Method::Post, "/lifecycle") => {
            let parsed: LifecycleRequest = match serde_json::from_str(body) {
                Ok(parsed) => parsed,
                Err(err) => {
                    return WireResponse::error(
                        WireStatus::Invalid,
                        format!("malformed lifecycle body: {err}"),
                    )
                }
            };
            match adapter.lifecycle(parsed.op) {
                Ok(()) => WireResponse::ok(),
                Err(AdapterError::UnsupportedOp(op)) => WireResponse::error(
                    WireStatus::Invalid,
                    format!("unsupported lifecycle op {op:?}"),
                ),
                Err(err) => WireResponse::error(WireStatus::Fault, err.to_string()),
            }
        }
        _ => WireResponse::error(WireStatus::Invalid, format!("no route for {method} {url}")),
    }
}

fn respond(request: tiny_http::Request, payload: WireResponse) {
    let code = payload.status.http_code();
    let body = serde_json::to_string(&payload).expect("wire responses always serialize");
    let header = Header::from_bytes("Content-Type", "application/json")
        .expect("static header is valid");
    let response = Response::from_string(body)
        .with_status_code(code)
        .with_header(header);
    let _ = request.respond(response);
}
