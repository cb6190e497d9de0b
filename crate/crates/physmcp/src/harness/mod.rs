//! Desk-scale evaluation harness: one reproducible rig with all five
//! backends, plus the selector comparison, fault campaign, overhead and
//! HTTP-boundary benches, and the portability check.

pub mod bench;
pub mod faults;
pub mod portability;
pub mod report;
pub mod rig;
pub mod selectors;
pub mod tasks;

pub use bench::{run_http_bench, run_overhead_bench, HttpReport, OverheadReport};
pub use faults::{run_fault_campaign, FaultCampaignReport};
pub use portability::{run_portability_check, PortabilityReport};
pub use rig::DeskRig;
pub use selectors::{run_selector_suite, SelectorReport, SelectorSuite};
