//! Physical constants and unit conversions.
//!
//! Internally everything runs in SI (meters, seconds, rad/s). Public APIs
//! speak the lab units of the experiment (nm, mm, fs, fs², fs³, °C); the
//! helpers here convert at the boundary.

/// Speed of light in vacuum (m/s, exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Seconds per femtosecond.
pub const FS: f64 = 1e-15;
/// Squared-seconds per fs² (group-delay dispersion unit).
pub const FS2: f64 = 1e-30;
/// Cubed-seconds per fs³ (third-order dispersion unit).
pub const FS3: f64 = 1e-45;
/// Meters per millimeter.
pub const MM: f64 = 1e-3;
/// Meters per micrometer.
pub const UM: f64 = 1e-6;
/// Meters per nanometer.
pub const NM: f64 = 1e-9;

/// Angular frequency (rad/s) of a vacuum wavelength given in nm.
pub fn angular_frequency_from_nm(wavelength_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / (wavelength_nm * NM)
}

/// Vacuum wavelength in nm of an angular frequency in rad/s.
pub fn nm_from_angular_frequency(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega / NM
}

/// Optical period (fs) of an angular frequency in rad/s.
pub fn optical_period_fs(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI / omega / FS
}
