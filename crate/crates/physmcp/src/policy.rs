//! Tenancy enforcement: per-backend concurrency slots and cooldown windows
//! on the injected clock.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::clock::Clock;
use crate::model::TenancyPolicy;

/// Outcome of an admission attempt against a backend's tenancy policy.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyVerdict {
    Granted,
    /// Concurrency limit reached (or exclusive backend busy).
    DeniedBusy,
    /// Backend still in its cooldown window; remaining time in ms.
    DeniedCooldown(f64),
}

#[derive(Debug, Default)]
struct SlotState {
    in_flight: u32,
    last_release_ms: Option<f64>,
}

pub struct PolicyEngine {
    clock: Arc<dyn Clock>,
    slots: Mutex<BTreeMap<String, SlotState>>,
}

impl PolicyEngine {
    pub fn new(clock: Arc<dyn Clock>) -> Self {
        PolicyEngine {
            clock,
            slots: Mutex::new(BTreeMap::new()),
        }
    }

    /// Tries to occupy a slot on `backend_id` under `tenancy`. A grant must
    /// be paired with a later [`release`](Self::release).
    pub fn acquire(&self, backend_id: &str, tenancy: &TenancyPolicy) -> PolicyVerdict {
        let now = self.clock.now_ms();
        let mut slots = self.slots.lock().unwrap();
        let slot = slots.entry(backend_id.to_string()).or_default();
        if let Some(released) = slot.last_release_ms {
            let since = now - released;
            if since < tenancy.cooldown_ms {
                return PolicyVerdict::DeniedCooldown(tenancy.cooldown_ms - since);
            }
        }
        let limit = if tenancy.exclusive {
            1
        } else {
            tenancy.concurrency_limit
        };
        if slot.in_flight >= limit {
            return PolicyVerdict::DeniedBusy;
        }
        slot.in_flight += 1;
        PolicyVerdict::Granted
    }

    /// Frees a slot and starts the cooldown window.
    pub fn release(&self, backend_id: &str) {
        let now = self.clock.now_ms();
        let mut slots = self.slots.lock().unwrap();
        let slot = slots.entry(backend_id.to_string()).or_default();
        slot.in_flight = slot.in_flight.saturating_sub(1);
        slot.last_release_ms = Some(now);
    }

    pub fn in_flight(&self, backend_id: &str) -> u32 {
        self.slots
            .lock()
            .unwrap()
            .get(backend_id)
            .map_or(0, |s| s.in_flight)
    }
}
