//! Simulated data-plane backends: chemical ODE twin, wetware
//! spike-response twin, fast vector twin, and the two-timescale wetware
//! API stub.

pub mod chemical;
pub mod cortical;
pub mod fast;
pub mod wetware;

pub use chemical::ChemicalAdapter;
pub use cortical::CorticalStubAdapter;
pub use fast::FastAdapter;
pub use wetware::WetwareAdapter;
