//! Uniform detuning grid, symmetric about the degenerate frequency.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::angular_frequency_from_nm;

#[derive(Debug, Clone, Error)]
pub enum GridError {
    #[error("sample_count must be a power of two >= 4, got {0}")]
    BadSampleCount(usize),
    #[error("half_span must be positive and smaller than the center frequency, got {0}")]
    BadSpan(f64),
}

/// Uniform grid of detunings Δω about a center frequency ω_d.
///
/// Samples are Δω_j = H·(2j − (N−1))/(N−1), so for every sample +Δω there
/// is a bit-exact partner −Δω at the mirrored index (Δω = 0 itself is not a
/// sample for even N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    center: f64,
    half_span: f64,
    sample_count: usize,
}

impl SpectralGrid {
    pub fn new(center: f64, half_span: f64, sample_count: usize) -> Result<Self, GridError> {
        if sample_count < 4 || !sample_count.is_power_of_two() {
            return Err(GridError::BadSampleCount(sample_count));
        }
        if !(half_span > 0.0) || half_span >= center {
            return Err(GridError::BadSpan(half_span));
        }
        Ok(SpectralGrid { center, half_span, sample_count })
    }

    /// Grid covering a signal wavelength window (nm) around a degenerate
    /// frequency; the half-span is the smaller of the two one-sided spans so
    /// the grid stays symmetric.
    pub fn from_signal_band_nm(
        center: f64,
        band_lo_nm: f64,
        band_hi_nm: f64,
        sample_count: usize,
    ) -> Result<Self, GridError> {
        let w_hi = angular_frequency_from_nm(band_lo_nm);
        let w_lo = angular_frequency_from_nm(band_hi_nm);
        let half = (w_hi - center).min(center - w_lo);
        Self::new(center, half, sample_count)
    }

    /// Default grid of the experiment: signal 800–1600 nm, 2¹⁴ samples.
    pub fn default_for_center(center: f64) -> SpectralGrid {
        Self::from_signal_band_nm(center, 800.0, 1600.0, 1 << 14)
            .expect("default band is valid")
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_span(&self) -> f64 {
        self.half_span
    }

    pub fn len(&self) -> usize {
        self.sample_count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing δω = 2H/(N−1).
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_span / (self.sample_count - 1) as f64
    }

    /// Detuning of sample j; exactly antisymmetric under j ↔ N−1−j.
    pub fn detuning(&self, j: usize) -> f64 {
        let n1 = (self.sample_count - 1) as f64;
        self.half_span * (2.0 * j as f64 - n1) / n1
    }

    /// Index of the sample at −Δω_j.
    pub fn mirror_index(&self, j: usize) -> usize {
        self.sample_count - 1 - j
    }

    /// Absolute frequency ω_d + Δω_j of sample j.
    pub fn frequency(&self, j: usize) -> f64 {
        self.center + self.detuning(j)
    }

    pub fn detunings(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.sample_count).map(|j| self.detuning(j))
    }

    /// Grid with the same span and twice the samples, for refinement checks.
    pub fn refined(&self) -> SpectralGrid {
        SpectralGrid {
            center: self.center,
            half_span: self.half_span,
            sample_count: self.sample_count * 2,
        }
    }
}
