//! Numerical model of group-delay dispersion cancellation in
//! frequency-entangled photon pairs, observed through time-resolved
//! upconversion.
//!
//! The crate covers the full table-top system: a quasi-phase-matched
//! MgO:LiNbO₃ downconversion source pumped at 532 nm, four-prism SF10
//! compressors in the signal and idler arms (ray-traced to get the spectral
//! phases), the upconversion rate R(τ) as a function of signal/idler delay,
//! and the counting statistics of the detection chain.
//!
//! Modules:
//! - [`materials`] — Sellmeier dispersion models (n, group index, GVD).
//! - [`grid`] — symmetric detuning grids about the degenerate frequency.
//! - [`spdc`] — phase mismatch, poling-period calibration, the
//!   phase-matching function and its bandwidth.
//! - [`compressor`] — 2D sequential ray tracing of the prism compressors,
//!   spectral phase and its derivatives, insertion/translator maps.
//! - [`correlation`] — combined two-photon phase, upconverted amplitude,
//!   R(τ) by zero-padded FFT, peak metrics.
//! - [`harness`] — scenario sweeps replicating the dispersion-sensitivity
//!   and cancellation experiments, group-index extraction, bandwidth
//!   scaling, Poisson count simulation and background subtraction.

pub mod compressor;
pub mod constants;
pub mod correlation;
pub mod grid;
pub mod harness;
pub mod materials;
pub mod spdc;

pub use compressor::{CompressorLayout, PrismSpec, SpectralPhase, TraceError};
pub use correlation::{ArmPhase, BiphotonAmplitude, CorrelationError, CorrelationTrace, PeakMetrics};
pub use grid::SpectralGrid;
pub use materials::{MaterialDb, MaterialError, MaterialModel};
pub use spdc::{PhaseMatchingFunction, SpdcError, SpdcSource};
