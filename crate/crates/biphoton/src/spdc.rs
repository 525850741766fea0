//! Quasi-phase-matched downconversion source: phase mismatch Δk, poling
//! period calibration, the phase-matching function Φ, spectrum bandwidth,
//! and photons-per-mode bookkeeping.
//!
//! The crystal is periodically poled with a uniform grating (first-order
//! poling), pumped by a single-frequency laser, so Φ = sinc(Δk·L/2) with
//! Δk = k(ω_p) − k(ω_s) − k(ω_p − ω_s) − 2π/Λ, all indices on the
//! extraordinary axis at the oven temperature.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{angular_frequency_from_nm, nm_from_angular_frequency, MM, SPEED_OF_LIGHT, UM};
use crate::grid::{GridError, SpectralGrid};
use crate::materials::{MaterialDb, MaterialError, MaterialModel};

#[derive(Debug, Clone, Error)]
pub enum SpdcError {
    #[error(transparent)]
    Material(#[from] MaterialError),

    #[error(transparent)]
    Grid(#[from] GridError),

    #[error("poling-period calibration failed: no sign change of Δk over [{lo_um}, {hi_um}] um")]
    CalibrationFailure { lo_um: f64, hi_um: f64 },

    #[error("grid too narrow: |Φ|² half-maximum not bracketed on the {side} side")]
    GridTooNarrow { side: &'static str },

    #[error("bandwidth fit failed: target {target_nm} nm not reachable with effective length in [{lo_mm}, {hi_mm}] mm")]
    FitFailure { target_nm: f64, lo_mm: f64, hi_mm: f64 },

    #[error("invalid source parameter: {0}")]
    InvalidParam(String),
}

/// Pump and crystal specification, before calibration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpdcParams {
    pub pump_wavelength_nm: f64,
    pub pump_power_w: f64,
    pub crystal_length_mm: f64,
    pub temperature_c: f64,
    pub crystal_id: String,
}

impl Default for SpdcParams {
    fn default() -> Self {
        SpdcParams {
            pump_wavelength_nm: 532.0,
            pump_power_w: 1.0,
            crystal_length_mm: 5.0,
            temperature_c: 50.0,
            crystal_id: "mgo_cln_e".into(),
        }
    }
}

/// A calibrated downconversion source.
///
/// `poling_period_um` is chosen so that Δk vanishes at the degenerate
/// frequency ω_d = ω_p/2. `effective_length_mm` is the length used inside
/// Φ; it equals the physical length unless [`SpdcSource::fit_bandwidth`]
/// rescaled it to match a measured spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpdcSource {
    pub params: SpdcParams,
    pub crystal: MaterialModel,
    pub poling_period_um: f64,
    pub effective_length_mm: f64,
}

/// sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl SpdcSource {
    /// Build a source and calibrate its poling period by bracketing +
    /// bisection on Δk(ω_d; Λ), to a relative tolerance of 1e-12.
    pub fn calibrated(params: SpdcParams, db: &MaterialDb) -> Result<SpdcSource, SpdcError> {
        if params.crystal_length_mm <= 0.0 {
            return Err(SpdcError::InvalidParam("crystal_length_mm must be > 0".into()));
        }
        if params.pump_wavelength_nm <= 0.0 {
            return Err(SpdcError::InvalidParam("pump_wavelength_nm must be > 0".into()));
        }
        let crystal = db.get(&params.crystal_id)?.clone();
        let w_p = angular_frequency_from_nm(params.pump_wavelength_nm);
        let w_d = w_p / 2.0;
        let k_p = crystal.wavenumber(w_p, params.temperature_c)?;
        let k_d = crystal.wavenumber(w_d, params.temperature_c)?;
        let mismatch = |period_um: f64| k_p - 2.0 * k_d - 2.0 * std::f64::consts::PI / (period_um * UM);

        let (mut lo, mut hi) = (1.0f64, 200.0f64);
        let (f_lo, f_hi) = (mismatch(lo), mismatch(hi));
        if f_lo.signum() == f_hi.signum() {
            return Err(SpdcError::CalibrationFailure { lo_um: lo, hi_um: hi });
        }
        while (hi - lo) / (0.5 * (hi + lo)) > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if mismatch(mid).signum() == f_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let effective_length_mm = params.crystal_length_mm;
        Ok(SpdcSource {
            params,
            crystal,
            poling_period_um: 0.5 * (lo + hi),
            effective_length_mm,
        })
    }

    /// Pump angular frequency ω_p (rad/s).
    pub fn pump_frequency(&self) -> f64 {
        angular_frequency_from_nm(self.params.pump_wavelength_nm)
    }

    /// Degenerate frequency ω_d = ω_p/2, exact by construction.
    pub fn degenerate_frequency(&self) -> f64 {
        self.pump_frequency() / 2.0
    }

    /// Phase mismatch Δk = k(ω_p) − k(ω_s) − k(ω_p − ω_s) − 2π/Λ, rad/m.
    pub fn delta_k(&self, signal_frequency: f64) -> Result<f64, SpdcError> {
        let w_p = self.pump_frequency();
        let w_i = w_p - signal_frequency;
        let t = self.params.temperature_c;
        let k_p = self.crystal.wavenumber(w_p, t)?;
        let k_s = self.crystal.wavenumber(signal_frequency, t)?;
        let k_i = self.crystal.wavenumber(w_i, t)?;
        // summing k_s + k_i first keeps Δk bit-exactly even under s ↔ i
        Ok(k_p - (k_s + k_i) - 2.0 * std::f64::consts::PI / (self.poling_period_um * UM))
    }

    /// Φ at a single detuning from ω_d, using the effective length.
    pub fn phi_at(&self, detuning: f64) -> Result<f64, SpdcError> {
        let dk = self.delta_k(self.degenerate_frequency() + detuning)?;
        Ok(sinc(dk * self.effective_length_mm * MM / 2.0))
    }

    /// Sample Φ on a grid.
    pub fn phase_matching(&self, grid: &SpectralGrid) -> Result<PhaseMatchingFunction, SpdcError> {
        self.phase_matching_stretched(grid, 1.0)
    }

    /// Sample Φ with |Φ|² stretched in Δω by `scale` (scale > 1 widens the
    /// spectrum), used by the bandwidth-scaling study.
    pub fn phase_matching_stretched(
        &self,
        grid: &SpectralGrid,
        scale: f64,
    ) -> Result<PhaseMatchingFunction, SpdcError> {
        if !(scale > 0.0) {
            return Err(SpdcError::InvalidParam(format!("bandwidth scale must be > 0, got {scale}")));
        }
        let mut phi = Vec::with_capacity(grid.len());
        for j in 0..grid.len() {
            phi.push(self.phi_at(grid.detuning(j) / scale)?);
        }
        let phi_sq = phi.iter().map(|p| p * p).collect();
        Ok(PhaseMatchingFunction { grid: grid.clone(), phi, phi_sq })
    }

    /// Rescale the effective length so the |Φ|² bandwidth on `grid` equals
    /// `target_nm`. Returns the fitted effective length in mm. Bisection on
    /// L (bandwidth is monotone decreasing in L).
    pub fn fit_bandwidth(&mut self, target_nm: f64, grid: &SpectralGrid) -> Result<f64, SpdcError> {
        let (lo, hi) = (0.01 * self.params.crystal_length_mm, 4.0 * self.params.crystal_length_mm);
        let bw = |src: &mut SpdcSource, len_mm: f64| -> Result<f64, SpdcError> {
            src.effective_length_mm = len_mm;
            src.phase_matching(grid)?.bandwidth_fwhm_nm()
        };
        let bw_lo = bw(self, lo)?;
        let bw_hi = bw(self, hi)?;
        if !(bw_hi <= target_nm && target_nm <= bw_lo) {
            self.effective_length_mm = self.params.crystal_length_mm;
            return Err(SpdcError::FitFailure { target_nm, lo_mm: lo, hi_mm: hi });
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if bw(self, mid)? > target_nm {
                a = mid;
            } else {
                b = mid;
            }
        }
        self.effective_length_mm = 0.5 * (a + b);
        Ok(self.effective_length_mm)
    }
}

/// Photons per spectral mode, n = flux/Δν with Δν = c·Δλ/λ².
pub fn photons_per_mode(flux_per_s: f64, center_wavelength_nm: f64, bandwidth_fwhm_nm: f64) -> f64 {
    let lam = center_wavelength_nm * 1e-9;
    let dlam = bandwidth_fwhm_nm * 1e-9;
    let dnu = SPEED_OF_LIGHT * dlam / (lam * lam);
    flux_per_s / dnu
}

/// Φ sampled on a grid, with |Φ|² cached.
#[derive(Debug, Clone)]
pub struct PhaseMatchingFunction {
    grid: SpectralGrid,
    phi: Vec<f64>,
    phi_sq: Vec<f64>,
}

impl PhaseMatchingFunction {
    /// Build from explicit Φ samples (synthetic spectra in tests/demos).
    pub fn from_samples(grid: SpectralGrid, phi: Vec<f64>) -> PhaseMatchingFunction {
        assert_eq!(grid.len(), phi.len(), "sample count must match the grid");
        let phi_sq = phi.iter().map(|p| p * p).collect();
        PhaseMatchingFunction { grid, phi, phi_sq }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn phi_sq(&self) -> &[f64] {
        &self.phi_sq
    }

    /// FWHM of |Φ|² expressed in signal wavelength (nm).
    ///
    /// Half crossings adjacent to the peak are located by linear
    /// interpolation in Δω, then converted to wavelength.
    pub fn bandwidth_fwhm_nm(&self) -> Result<f64, SpdcError> {
        let (peak_idx, peak) = self
            .phi_sq
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty grid");
        let half = 0.5 * peak;

        let crossing = |mut j: usize, step: isize, side: &'static str| -> Result<f64, SpdcError> {
            loop {
                let next = j as isize + step;
                if next < 0 || next as usize >= self.phi_sq.len() {
                    return Err(SpdcError::GridTooNarrow { side });
                }
                let nj = next as usize;
                if self.phi_sq[nj] < half {
                    let (x0, x1) = (self.grid.detuning(j), self.grid.detuning(nj));
                    let (y0, y1) = (self.phi_sq[j], self.phi_sq[nj]);
                    return Ok(x0 + (half - y0) / (y1 - y0) * (x1 - x0));
                }
                j = nj;
            }
        };

        let d_minus = crossing(peak_idx, -1, "low-frequency")?;
        let d_plus = crossing(peak_idx, 1, "high-frequency")?;
        let lam_lo = nm_from_angular_frequency(self.grid.center() + d_plus);
        let lam_hi = nm_from_angular_frequency(self.grid.center() + d_minus);
        Ok(lam_hi - lam_lo)
    }

    /// Detunings of the two half-maximum crossings (rad/s), for symmetry checks.
    pub fn half_crossings(&self) -> Result<(f64, f64), SpdcError> {
        let (peak_idx, peak) = self
            .phi_sq
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty grid");
        let half = 0.5 * peak;
        let mut lo = peak_idx;
        while self.phi_sq[lo] >= half {
            if lo == 0 {
                return Err(SpdcError::GridTooNarrow { side: "low-frequency" });
            }
            lo -= 1;
        }
        let mut hi = peak_idx;
        while self.phi_sq[hi] >= half {
            hi += 1;
            if hi == self.phi_sq.len() {
                return Err(SpdcError::GridTooNarrow { side: "high-frequency" });
            }
        }
        let interp = |a: usize, b: usize| {
            let (x0, x1) = (self.grid.detuning(a), self.grid.detuning(b));
            let (y0, y1) = (self.phi_sq[a], self.phi_sq[b]);
            x0 + (half - y0) / (y1 - y0) * (x1 - x0)
        };
        Ok((interp(lo + 1, lo), interp(hi - 1, hi)))
    }
}
