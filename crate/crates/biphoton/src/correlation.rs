//! Two-photon correlation machinery: the combined spectral phase of the
//! signal/idler pair, the upconverted amplitude, the upconversion rate
//! R(τ), and peak metrics.
//!
//! R(τ) is the squared modulus of ∫ |Φ(Δω)|² e^{iθ(Δω)} e^{iΔωτ} dΔω with
//! θ(Δω) = φ_s(ω_d+Δω) + φ_i(ω_d−Δω); the unit-modulus carrier e^{iω_dτ}
//! is dropped, so τ is envelope delay. The integral is evaluated as a
//! zero-padded FFT over the detuning grid, with a direct quadrature sum
//! kept as the cross-check in the test suites.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use thiserror::Error;

use crate::compressor::SpectralPhase;
use crate::constants::{FS, FS2, FS3};
use crate::grid::SpectralGrid;
use crate::spdc::PhaseMatchingFunction;

#[derive(Debug, Clone, Error)]
pub enum CorrelationError {
    #[error("grid mismatch between phase-matching function and phase samples")]
    GridMismatch,

    #[error("τ resolution {requested_fs} fs is coarser than the required {required_fs} fs")]
    ResolutionTooCoarse { requested_fs: f64, required_fs: f64 },

    #[error("τ span {span_fs} fs exceeds the alias-free coverage {max_fs} fs of this grid")]
    Aliasing { span_fs: f64, max_fs: f64 },

    #[error("trace maximum sits at the window edge")]
    MaximumAtEdge,

    #[error("no half-height crossing on the {side} side of the maximum")]
    NoHalfCrossing { side: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

/// Spectral phase of one arm, either polynomial coefficients at ω_d or a
/// ray-traced sample set.
#[derive(Debug, Clone)]
pub enum ArmPhase {
    /// φ(ω_d+δ) = gd·δ + gdd·δ²/2 + tod·δ³/6 evaluated exactly
    /// (coefficients in fs, fs², fs³).
    Polynomial { gd_fs: f64, gdd_fs2: f64, tod_fs3: f64 },
    /// Sampled phase from the compressor ray trace.
    RayTraced(SpectralPhase),
}

impl ArmPhase {
    pub fn zero() -> ArmPhase {
        ArmPhase::Polynomial { gd_fs: 0.0, gdd_fs2: 0.0, tod_fs3: 0.0 }
    }

    pub fn gdd_only(gdd_fs2: f64) -> ArmPhase {
        ArmPhase::Polynomial { gd_fs: 0.0, gdd_fs2, tod_fs3: 0.0 }
    }

    /// Derivative coefficients (φ⁽¹⁾ fs, φ⁽²⁾ fs², φ⁽³⁾ fs³) at ω_d.
    pub fn derivatives(&self) -> (f64, f64, f64) {
        match self {
            ArmPhase::Polynomial { gd_fs, gdd_fs2, tod_fs3 } => (*gd_fs, *gdd_fs2, *tod_fs3),
            ArmPhase::RayTraced(sp) => (sp.gd_fs, sp.gdd_fs2, sp.tod_fs3),
        }
    }
}

/// θ(Δω) sampled on a grid, with the aperture transmission mask of the
/// contributing arms (all-pass unless a ray-traced arm clipped).
#[derive(Debug, Clone)]
pub struct CombinedPhase {
    grid: SpectralGrid,
    theta: Vec<f64>,
    mask: Vec<bool>,
}

impl CombinedPhase {
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }
}

/// θ(Δω) = φ_s(ω_d+Δω) + φ_i(ω_d−Δω) on the grid. The idler samples come
/// from the mirrored grid index, which is exact because the grid detunings
/// are bit-exact ± pairs. In polynomial mode the result equals
/// Σ [φ_s⁽ⁿ⁾ + (−1)ⁿφ_i⁽ⁿ⁾]Δωⁿ/n! term by term.
pub fn combined_phase(
    signal: &ArmPhase,
    idler: &ArmPhase,
    grid: &SpectralGrid,
) -> Result<CombinedPhase, CorrelationError> {
    let n = grid.len();
    let mut theta = vec![0.0; n];
    let mut mask = vec![true; n];

    for (arm, idler_side) in [(signal, false), (idler, true)] {
        match arm {
            ArmPhase::Polynomial { gd_fs, gdd_fs2, tod_fs3 } => {
                for (j, th) in theta.iter_mut().enumerate() {
                    let d = if idler_side { -grid.detuning(j) } else { grid.detuning(j) };
                    *th += gd_fs * FS * d
                        + gdd_fs2 * FS2 * d * d / 2.0
                        + tod_fs3 * FS3 * d * d * d / 6.0;
                }
            }
            ArmPhase::RayTraced(sp) => {
                if sp.grid() != grid {
                    return Err(CorrelationError::GridMismatch);
                }
                for j in 0..n {
                    let src = if idler_side { grid.mirror_index(j) } else { j };
                    theta[j] += sp.phase()[src];
                    mask[j] &= sp.mask()[src];
                }
            }
        }
    }
    Ok(CombinedPhase { grid: grid.clone(), theta, mask })
}

/// Per-order cancellation residuals φ_s⁽ⁿ⁾ + (−1)ⁿ φ_i⁽ⁿ⁾ for n = 1..3,
/// in fs, fs², fs³.
pub fn cancellation_residual(signal: &ArmPhase, idler: &ArmPhase) -> [f64; 3] {
    let s = signal.derivatives();
    let i = idler.derivatives();
    [s.0 - i.0, s.1 + i.1, s.2 - i.2]
}

/// Complex spectral amplitude a_j = |Φ_j|²·e^{iθ_j} of the upconverted
/// state (zero where the combined mask clips).
#[derive(Debug, Clone)]
pub struct BiphotonAmplitude {
    grid: SpectralGrid,
    samples: Vec<Complex64>,
}

pub fn assemble_amplitude(
    pmf: &PhaseMatchingFunction,
    phase: &CombinedPhase,
) -> Result<BiphotonAmplitude, CorrelationError> {
    if pmf.grid() != phase.grid() {
        return Err(CorrelationError::GridMismatch);
    }
    let samples = pmf
        .phi_sq()
        .iter()
        .zip(phase.theta.iter().zip(&phase.mask))
        .map(|(&p2, (&th, &ok))| {
            if ok {
                Complex64::from_polar(p2, th)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(BiphotonAmplitude { grid: phase.grid.clone(), samples })
}

impl BiphotonAmplitude {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Apply a pure delay: a_j ← a_j·e^{iΔω_j·τ}. This is the τ-stage move
    /// of the experiment, exact on the grid.
    pub fn apply_delay(&mut self, tau_fs: f64) {
        let t = tau_fs * FS;
        for (j, a) in self.samples.iter_mut().enumerate() {
            *a *= Complex64::from_polar(1.0, self.grid.detuning(j) * t);
        }
    }
}

/// R(τ) on a uniform τ grid centered at zero, in arbitrary units
/// (δω²·|Σ a e^{iΔωτ}|²).
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationTrace {
    pub tau_fs: Vec<f64>,
    pub r: Vec<f64>,
    pub delta_tau_fs: f64,
    /// ∫R dτ over the entire alias-free range (not just the window);
    /// invariant under pure-phase changes of the amplitude.
    pub full_integral: f64,
    pub normalization: String,
}

/// R(τ_m) = |Σ_j a_j e^{iΔω_j τ_m} δω|² by zero-padded FFT.
///
/// `tau_samples` sets the requested resolution δτ = span/(samples−1); the
/// actual grid is the nearest finer FFT-native spacing. Resolution must be
/// ≤ 0.5 fs and the span must stay inside the grid's alias-free coverage.
pub fn correlation_trace(
    amplitude: &BiphotonAmplitude,
    tau_span_fs: f64,
    tau_samples: usize,
) -> Result<CorrelationTrace, CorrelationError> {
    if tau_samples < 2 || !(tau_span_fs > 0.0) {
        return Err(CorrelationError::InvalidParam(
            "need tau_span_fs > 0 and at least 2 samples".into(),
        ));
    }
    let requested_fs = tau_span_fs / (tau_samples - 1) as f64;
    if requested_fs > 0.5 {
        return Err(CorrelationError::ResolutionTooCoarse { requested_fs, required_fs: 0.5 });
    }
    let dw = amplitude.grid.spacing();
    let max_span_fs = 1.0 / (2.0 * dw) / FS;
    if tau_span_fs > max_span_fs {
        return Err(CorrelationError::Aliasing { span_fs: tau_span_fs, max_fs: max_span_fs });
    }

    // pad so the FFT-native δτ = 2π/(M·δω) is at least as fine as requested
    let n = amplitude.samples.len();
    let min_pad = (2.0 * std::f64::consts::PI / (dw * requested_fs * FS)).ceil() as usize;
    let pad = min_pad.max(2 * n).next_power_of_two();

    let mut buf = vec![Complex64::new(0.0, 0.0); pad];
    buf[..n].copy_from_slice(&amplitude.samples);
    FftPlanner::new().plan_fft_inverse(pad).process(&mut buf);
    // rustfft's inverse is unnormalized: buf[m] = Σ_j a_j e^{+2πi jm/M},
    // which is Σ_j a_j e^{iΔω_j τ_m} up to a unit-modulus prefactor

    let delta_tau = 2.0 * std::f64::consts::PI / (pad as f64 * dw);
    let r_all: Vec<f64> = buf.iter().map(|c| c.norm_sqr() * dw * dw).collect();
    let full_integral = r_all.iter().sum::<f64>() * delta_tau;

    let k_max = ((tau_span_fs * FS / 2.0) / delta_tau).floor() as isize;
    let mut tau_fs = Vec::with_capacity(2 * k_max as usize + 1);
    let mut r = Vec::with_capacity(2 * k_max as usize + 1);
    for k in -k_max..=k_max {
        let m = k.rem_euclid(pad as isize) as usize;
        tau_fs.push(k as f64 * delta_tau / FS);
        r.push(r_all[m]);
    }

    Ok(CorrelationTrace {
        tau_fs,
        r,
        delta_tau_fs: delta_tau / FS,
        full_integral,
        normalization: "arbitrary units (δω²·|Σ a e^{iΔωτ}|²)".into(),
    })
}

impl CorrelationTrace {
    /// Copy rescaled so the trace maximum equals `peak`.
    pub fn normalized_to(&self, peak: f64) -> CorrelationTrace {
        let max = self.peak();
        self.scaled(peak / max, format!("normalized (peak = {peak})"))
    }

    /// Copy rescaled by an externally chosen factor (e.g. a reference
    /// trace's peak), keeping cross-case height ratios meaningful.
    pub fn scaled(&self, factor: f64, note: String) -> CorrelationTrace {
        CorrelationTrace {
            tau_fs: self.tau_fs.clone(),
            r: self.r.iter().map(|v| v * factor).collect(),
            delta_tau_fs: self.delta_tau_fs,
            full_integral: self.full_integral * factor,
            normalization: note,
        }
    }

    pub fn peak(&self) -> f64 {
        self.r.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Build a trace from explicit samples (synthetic shapes in tests and
    /// demos). `full_integral` covers only the given window.
    pub fn from_samples(tau_fs: Vec<f64>, r: Vec<f64>) -> CorrelationTrace {
        let dt = if tau_fs.len() > 1 { tau_fs[1] - tau_fs[0] } else { 0.0 };
        let integral = r.iter().sum::<f64>() * dt * FS;
        CorrelationTrace {
            tau_fs,
            r,
            delta_tau_fs: dt,
            full_integral: integral,
            normalization: "synthetic".into(),
        }
    }
}

/// Shape metrics of one trace.
#[derive(Debug, Clone, Serialize)]
pub struct PeakMetrics {
    pub height: f64,
    pub fwhm_fs: f64,
    /// First moment of R over the contiguous above-threshold region.
    pub centroid_fs: f64,
    /// Local maxima outside the half-height interval, above threshold.
    pub secondary_maxima: Vec<(f64, f64)>,
    /// Third standardized moment over the centroid region.
    pub skewness: f64,
}

/// Extract peak metrics; `threshold_fraction` bounds the centroid/skewness
/// support region and the secondary-maxima floor.
pub fn peak_metrics(
    trace: &CorrelationTrace,
    threshold_fraction: f64,
) -> Result<PeakMetrics, CorrelationError> {
    let r = &trace.r;
    let tau = &trace.tau_fs;
    let n = r.len();
    if n < 3 {
        return Err(CorrelationError::InvalidParam("trace too short".into()));
    }
    let (i_max, &height) = r
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if i_max == 0 || i_max == n - 1 {
        return Err(CorrelationError::MaximumAtEdge);
    }

    let half = height / 2.0;
    let cross = |from: usize, step: isize, side: &'static str| -> Result<f64, CorrelationError> {
        let mut i = from;
        loop {
            let next = i as isize + step;
            if next < 0 || next as usize >= n {
                return Err(CorrelationError::NoHalfCrossing { side });
            }
            let j = next as usize;
            if r[j] < half {
                let t = (half - r[i]) / (r[j] - r[i]);
                return Ok(tau[i] + t * (tau[j] - tau[i]));
            }
            i = j;
        }
    };
    let left_half = cross(i_max, -1, "left")?;
    let right_half = cross(i_max, 1, "right")?;
    let fwhm_fs = right_half - left_half;

    // contiguous above-threshold region around the maximum
    let floor = threshold_fraction * height;
    let mut lo = i_max;
    while lo > 0 && r[lo - 1] >= floor {
        lo -= 1;
    }
    let mut hi = i_max;
    while hi < n - 1 && r[hi + 1] >= floor {
        hi += 1;
    }
    let w_sum: f64 = r[lo..=hi].iter().sum();
    let centroid_fs: f64 =
        r[lo..=hi].iter().zip(&tau[lo..=hi]).map(|(w, t)| w * t).sum::<f64>() / w_sum;
    let var: f64 = r[lo..=hi]
        .iter()
        .zip(&tau[lo..=hi])
        .map(|(w, t)| w * (t - centroid_fs).powi(2))
        .sum::<f64>()
        / w_sum;
    let m3: f64 = r[lo..=hi]
        .iter()
        .zip(&tau[lo..=hi])
        .map(|(w, t)| w * (t - centroid_fs).powi(3))
        .sum::<f64>()
        / w_sum;
    let skewness = if var > 0.0 { m3 / var.powf(1.5) } else { 0.0 };

    let mut secondary_maxima = Vec::new();
    for i in 1..n - 1 {
        if tau[i] >= left_half && tau[i] <= right_half {
            continue;
        }
        if r[i] >= floor && r[i] > r[i - 1] && r[i] >= r[i + 1] {
            secondary_maxima.push((tau[i], r[i]));
        }
    }

    Ok(PeakMetrics {
        height,
        fwhm_fs,
        centroid_fs,
        secondary_maxima,
        skewness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::MaterialDb;
    use crate::spdc::{SpdcParams, SpdcSource};
    use approx::assert_relative_eq;

    fn grid() -> SpectralGrid {
        SpectralGrid::new(1.77e15, 5.8e14, 1 << 12).unwrap()
    }

    /// Independent quadrature route: R(τ) = |Σ a_j e^{iΔω_j τ} δω|².
    fn direct_sum(amp: &BiphotonAmplitude, tau_s: f64) -> f64 {
        let dw = amp.grid().spacing();
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, a) in amp.samples().iter().enumerate() {
            acc += a * Complex64::from_polar(1.0, amp.grid().detuning(j) * tau_s);
        }
        (acc * dw).norm_sqr()
    }

    fn rect_pmf(grid: &SpectralGrid, full_width: f64) -> PhaseMatchingFunction {
        let phi: Vec<f64> = (0..grid.len())
            .map(|j| if grid.detuning(j).abs() <= full_width / 2.0 { 1.0 } else { 0.0 })
            .collect();
        PhaseMatchingFunction::from_samples(grid.clone(), phi)
    }

    fn model_pmf() -> PhaseMatchingFunction {
        let db = MaterialDb::builtin();
        let mut src = SpdcSource::calibrated(SpdcParams::default(), &db).unwrap();
        let g = SpectralGrid::default_for_center(src.degenerate_frequency());
        src.fit_bandwidth(117.0, &g).unwrap();
        src.phase_matching(&g).unwrap()
    }

    #[test]
    fn combined_phase_zero_arms() {
        let g = grid();
        let c = combined_phase(&ArmPhase::zero(), &ArmPhase::zero(), &g).unwrap();
        assert!(c.theta().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn combined_phase_gdd_cancellation_is_exact() {
        let g = grid();
        let c = combined_phase(&ArmPhase::gdd_only(734.0), &ArmPhase::gdd_only(-734.0), &g).unwrap();
        assert!(c.theta().iter().all(|&t| t == 0.0), "quadratic term must cancel exactly");
    }

    #[test]
    fn combined_phase_cubic_coefficient() {
        let g = grid();
        let (a, b) = (900.0, -300.0);
        let c = combined_phase(
            &ArmPhase::Polynomial { gd_fs: 0.0, gdd_fs2: 0.0, tod_fs3: a },
            &ArmPhase::Polynomial { gd_fs: 0.0, gdd_fs2: 0.0, tod_fs3: b },
            &g,
        )
        .unwrap();
        // polynomial oracle at a grid point near Δω = 1e13 rad/s:
        // θ = (a − b)/6·FS3·Δω³
        let j = (0..g.len())
            .min_by(|&x, &y| (g.detuning(x) - 1e13).abs().total_cmp(&(g.detuning(y) - 1e13).abs()))
            .unwrap();
        let dj = g.detuning(j);
        let expected = (a - b) / 6.0 * FS3 * dj * dj * dj;
        assert_relative_eq!(c.theta()[j], expected, max_relative = 1e-12);
        let res = cancellation_residual(
            &ArmPhase::Polynomial { gd_fs: 0.0, gdd_fs2: 0.0, tod_fs3: a },
            &ArmPhase::Polynomial { gd_fs: 0.0, gdd_fs2: 0.0, tod_fs3: b },
        );
        assert_eq!(res[2], a - b);
    }

    #[test]
    fn residuals_match_definition() {
        let s = ArmPhase::Polynomial { gd_fs: 10.0, gdd_fs2: -367.0, tod_fs3: 50.0 };
        let i = ArmPhase::Polynomial { gd_fs: 4.0, gdd_fs2: 367.0, tod_fs3: 80.0 };
        let r = cancellation_residual(&s, &i);
        assert_eq!(r, [6.0, 0.0, -30.0]);
        let r2 = cancellation_residual(&ArmPhase::zero(), &ArmPhase::gdd_only(734.0));
        assert_eq!(r2[1], 734.0);
    }

    #[test]
    fn amplitude_modulus_is_phase_independent() {
        let g = grid();
        let pmf = rect_pmf(&g, 3e14);
        let theta = combined_phase(&ArmPhase::gdd_only(1101.0), &ArmPhase::zero(), &g).unwrap();
        let a = assemble_amplitude(&pmf, &theta).unwrap();
        for (j, s) in a.samples().iter().enumerate() {
            assert!((s.norm() - pmf.phi_sq()[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_phase_amplitude_is_real_even_nonnegative() {
        let g = grid();
        let pmf = rect_pmf(&g, 3e14);
        let theta = combined_phase(&ArmPhase::zero(), &ArmPhase::zero(), &g).unwrap();
        let a = assemble_amplitude(&pmf, &theta).unwrap();
        for j in 0..g.len() {
            let s = a.samples()[j];
            assert_eq!(s.im, 0.0);
            assert!(s.re >= 0.0);
            assert_eq!(s.re, a.samples()[g.mirror_index(j)].re);
        }
    }

    #[test]
    fn conjugating_phase_conjugates_amplitude() {
        let g = grid();
        let pmf = rect_pmf(&g, 3e14);
        let plus = combined_phase(&ArmPhase::gdd_only(500.0), &ArmPhase::zero(), &g).unwrap();
        let minus = combined_phase(&ArmPhase::gdd_only(-500.0), &ArmPhase::zero(), &g).unwrap();
        let ap = assemble_amplitude(&pmf, &plus).unwrap();
        let am = assemble_amplitude(&pmf, &minus).unwrap();
        for (x, y) in ap.samples().iter().zip(am.samples()) {
            assert_eq!(x.re, y.re);
            assert_eq!(x.im, -y.im);
        }
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let g = grid();
        let other = SpectralGrid::new(1.77e15, 5.8e14, 1 << 11).unwrap();
        let pmf = rect_pmf(&g, 3e14);
        let theta = combined_phase(&ArmPhase::zero(), &ArmPhase::zero(), &other).unwrap();
        assert!(matches!(
            assemble_amplitude(&pmf, &theta),
            Err(CorrelationError::GridMismatch)
        ));
    }

    #[test]
    fn rectangular_spectrum_gives_analytic_sinc_squared() {
        // R(τ) ∝ sinc²(Wτ/2) for a rectangular |Φ|² of full width W, so
        // FWHM = 2·2.7831/W
        let g = grid();
        let w = 2.0e14;
        let pmf = rect_pmf(&g, w);
        let theta = combined_phase(&ArmPhase::zero(), &ArmPhase::zero(), &g).unwrap();
        let amp = assemble_amplitude(&pmf, &theta).unwrap();
        let trace = correlation_trace(&amp, 400.0, 2048).unwrap();
        let m = peak_metrics(&trace, 0.1).unwrap();
        // effective width of the sampled rectangle (edges quantize to the grid)
        let w_eff = pmf.phi_sq().iter().filter(|&&p| p > 0.0).count() as f64 * g.spacing();
        let expected_fwhm_fs = 2.0 * 2.7831 / w_eff / FS;
        assert_relative_eq!(m.fwhm_fs, expected_fwhm_fs, max_relative = 5e-3);
        // and the shape itself matches the closed form at a few points,
        // evaluated at the exact τ samples of the trace
        let peak = trace.peak();
        for &tf in &[5.0, 13.0, 37.0] {
            let i = trace
                .tau_fs
                .iter()
                .position(|&t| (t - tf).abs() < trace.delta_tau_fs / 2.0 + 1e-12)
                .unwrap();
            let x = w_eff * trace.tau_fs[i] * FS / 2.0;
            let expected = (x.sin() / x).powi(2);
            assert_relative_eq!(trace.r[i] / peak, expected, epsilon = 2e-3);
        }
    }

    #[test]
    fn fft_matches_direct_quadrature() {
        let pmf = model_pmf();
        let gg = pmf.grid().clone();
        let theta = combined_phase(
            &ArmPhase::Polynomial { gd_fs: 25.0, gdd_fs2: -734.0, tod_fs3: 400.0 },
            &ArmPhase::Polynomial { gd_fs: -10.0, gdd_fs2: 367.0, tod_fs3: -80.0 },
            &gg,
        )
        .unwrap();
        let amp = assemble_amplitude(&pmf, &theta).unwrap();
        let trace = correlation_trace(&amp, 600.0, 2048).unwrap();
        // 20 spread-out τ samples, exact FFT grid values vs the quadrature
        let n = trace.tau_fs.len();
        for k in 0..20 {
            let i = (k * 53 + 11) % n;
            let direct = direct_sum(&amp, trace.tau_fs[i] * FS);
            let rel = (trace.r[i] - direct).abs() / direct.max(1e-300);
            assert!(
                rel < 1e-6 || direct < 1e-12 * trace.peak(),
                "τ = {} fs: fft {} vs direct {}",
                trace.tau_fs[i],
                trace.r[i],
                direct
            );
        }
    }

    #[test]
    fn parseval_invariance_under_phase_changes() {
        let g = grid();
        let pmf = rect_pmf(&g, 3.5e14);
        let zero = combined_phase(&ArmPhase::zero(), &ArmPhase::zero(), &g).unwrap();
        let disp = combined_phase(
            &ArmPhase::Polynomial { gd_fs: 40.0, gdd_fs2: 1101.0, tod_fs3: -900.0 },
            &ArmPhase::gdd_only(367.0),
            &g,
        )
        .unwrap();
        let a0 = assemble_amplitude(&pmf, &zero).unwrap();
        let a1 = assemble_amplitude(&pmf, &disp).unwrap();
        let t0 = correlation_trace(&a0, 500.0, 1024).unwrap();
        let t1 = correlation_trace(&a1, 500.0, 1024).unwrap();
        let rel = (t0.full_integral - t1.full_integral).abs() / t0.full_integral;
        assert!(rel < 1e-9, "Parseval violation {rel}");
    }

    #[test]
    fn mirror_property_under_gdd_sign_flip() {
        let pmf = model_pmf();
        let gg = pmf.grid().clone();
        let plus = combined_phase(&ArmPhase::gdd_only(734.0), &ArmPhase::zero(), &gg).unwrap();
        let minus = combined_phase(&ArmPhase::gdd_only(-734.0), &ArmPhase::zero(), &gg).unwrap();
        let tp = correlation_trace(&assemble_amplitude(&pmf, &plus).unwrap(), 500.0, 1024).unwrap();
        let tm = correlation_trace(&assemble_amplitude(&pmf, &minus).unwrap(), 500.0, 1024).unwrap();
        let n = tp.r.len();
        let peak = tp.peak();
        for i in 0..n {
            let d = (tp.r[i] - tm.r[n - 1 - i]).abs();
            assert!(d <= 1e-9 * peak, "mirror mismatch at τ = {} fs", tp.tau_fs[i]);
        }
    }

    #[test]
    fn exact_cancellation_reproduces_zero_phase_trace() {
        let pmf = model_pmf();
        let gg = pmf.grid().clone();
        let zero = combined_phase(&ArmPhase::zero(), &ArmPhase::zero(), &gg).unwrap();
        // opposite GDD and equal TOD on both arms: all residuals vanish
        let cancel = combined_phase(
            &ArmPhase::Polynomial { gd_fs: 7.0, gdd_fs2: -1101.0, tod_fs3: 555.0 },
            &ArmPhase::Polynomial { gd_fs: 7.0, gdd_fs2: 1101.0, tod_fs3: 555.0 },
            &gg,
        )
        .unwrap();
        let a0 = assemble_amplitude(&pmf, &zero).unwrap();
        let a1 = assemble_amplitude(&pmf, &cancel).unwrap();
        let t0 = correlation_trace(&a0, 400.0, 1024).unwrap();
        let t1 = correlation_trace(&a1, 400.0, 1024).unwrap();
        let peak = t0.peak();
        for i in 0..t0.r.len() {
            assert!(
                (t0.r[i] - t1.r[i]).abs() <= 1e-9 * peak,
                "deviation at τ = {} fs",
                t0.tau_fs[i]
            );
        }
    }

    #[test]
    fn pure_delay_shifts_without_reshaping() {
        let g = grid();
        let pmf = rect_pmf(&g, 3e14);
        let zero = combined_phase(&ArmPhase::zero(), &ArmPhase::zero(), &g).unwrap();
        let a0 = assemble_amplitude(&pmf, &zero).unwrap();
        let mut a1 = a0.clone();
        let shift_fs = 42.0;
        a1.apply_delay(shift_fs);
        // compare via the quadrature route at exact offset points
        for &tf in &[0.0, 10.0, -33.0, 77.5] {
            let r0 = direct_sum(&a0, tf * FS);
            let r1 = direct_sum(&a1, (tf - shift_fs) * FS);
            assert_relative_eq!(r0, r1, max_relative = 1e-9);
        }
    }

    #[test]
    fn monotone_broadening_with_one_arm_gdd() {
        let pmf = model_pmf();
        let gg = pmf.grid().clone();
        let mut heights = Vec::new();
        let mut widths = Vec::new();
        for k in 0..4 {
            let theta =
                combined_phase(&ArmPhase::gdd_only(-367.0 * k as f64), &ArmPhase::zero(), &gg)
                    .unwrap();
            let amp = assemble_amplitude(&pmf, &theta).unwrap();
            let trace = correlation_trace(&amp, 700.0, 2048).unwrap();
            let m = peak_metrics(&trace, 0.1).unwrap();
            heights.push(m.height);
            widths.push(m.fwhm_fs);
        }
        for k in 1..4 {
            assert!(heights[k] < heights[k - 1], "height not decreasing at {k}");
            assert!(widths[k] >= widths[k - 1], "width not nondecreasing at {k}");
        }
    }

    #[test]
    fn metrics_of_even_trace_are_centered() {
        let pmf = model_pmf();
        let gg = pmf.grid().clone();
        let theta = combined_phase(&ArmPhase::zero(), &ArmPhase::zero(), &gg).unwrap();
        let amp = assemble_amplitude(&pmf, &theta).unwrap();
        let trace = correlation_trace(&amp, 400.0, 1024).unwrap();
        let m = peak_metrics(&trace, 0.1).unwrap();
        assert!(m.centroid_fs.abs() < 1e-3, "centroid {}", m.centroid_fs);
        assert!(m.skewness.abs() < 1e-3, "skewness {}", m.skewness);
    }

    #[test]
    fn gaussian_fwhm_relation() {
        // injected Gaussian R with σ = 10 fs: FWHM = 2√(2 ln 2)·σ = 23.548 fs
        let sigma = 10.0;
        let tau: Vec<f64> = (-2000..=2000).map(|i| i as f64 * 0.05).collect();
        let r: Vec<f64> = tau.iter().map(|t| (-t * t / (2.0 * sigma * sigma)).exp()).collect();
        let trace = CorrelationTrace::from_samples(tau, r);
        let m = peak_metrics(&trace, 0.1).unwrap();
        assert!((m.fwhm_fs - 23.548).abs() < 0.1, "fwhm {}", m.fwhm_fs);
        assert!(m.skewness.abs() < 1e-9);
    }

    #[test]
    fn metrics_error_paths() {
        // maximum at the edge
        let tau: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let r: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let t = CorrelationTrace::from_samples(tau, r);
        assert!(matches!(peak_metrics(&t, 0.1), Err(CorrelationError::MaximumAtEdge)));
        // no half crossing: plateau trace
        let tau: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let mut r = vec![1.0; 100];
        r[50] = 1.1;
        let t = CorrelationTrace::from_samples(tau, r);
        assert!(matches!(
            peak_metrics(&t, 0.1),
            Err(CorrelationError::NoHalfCrossing { .. })
        ));
    }

    #[test]
    fn trace_preconditions() {
        let g = grid();
        let pmf = rect_pmf(&g, 3e14);
        let theta = combined_phase(&ArmPhase::zero(), &ArmPhase::zero(), &g).unwrap();
        let amp = assemble_amplitude(&pmf, &theta).unwrap();
        assert!(matches!(
            correlation_trace(&amp, 400.0, 100),
            Err(CorrelationError::ResolutionTooCoarse { .. })
        ));
        // span beyond the alias-free coverage (~1765 fs for this grid),
        // with a resolution that still passes the 0.5 fs requirement
        assert!(matches!(
            correlation_trace(&amp, 4000.0, 1 << 15),
            Err(CorrelationError::Aliasing { .. })
        ));
    }
}
