//! Injected time source. Cooldowns, twin ages, and staleness are all
//! measured on this clock so that tests can advance time without sleeping.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

pub trait Clock: Send + Sync {
    /// Current time in milliseconds. The origin is arbitrary but fixed for
    /// the lifetime of the clock; only differences are meaningful.
    fn now_ms(&self) -> f64;
}

/// Wall clock (Unix epoch milliseconds).
#[derive(Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> f64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .expect("system time before epoch")
            .as_secs_f64()
            * 1000.0
    }
}

/// Manually advanced clock for deterministic tests and scenarios.
///
/// Stores microseconds in an atomic so concurrent readers never block.
#[derive(Debug, Default)]
pub struct VirtualClock {
    micros: AtomicU64,
}

impl VirtualClock {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn advance_ms(&self, ms: f64) {
        assert!(ms >= 0.0 && ms.is_finite());
        self.micros
            .fetch_add((ms * 1000.0).round() as u64, Ordering::SeqCst);
    }

    pub fn set_ms(&self, ms: f64) {
        assert!(ms >= 0.0 && ms.is_finite());
        self.micros
            .store((ms * 1000.0).round() as u64, Ordering::SeqCst);
    }
}

impl Clock for VirtualClock {
    fn now_ms(&self) -> f64 {
        self.micros.load(Ordering::SeqCst) as f64 / 1000.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn virtual_clock_advances() {
        let clock = VirtualClock::new();
        assert_eq!(clock.now_ms(), 0.0);
        clock.advance_ms(600_001.0);
        assert_eq!(clock.now_ms(), 600_001.0);
    }

    #[test]
    fn system_clock_is_monotone_enough() {
        let clock = SystemClock;
        let a = clock.now_ms();
        let b = clock.now_ms();
        assert!(b >= a - 1.0);
    }
}
