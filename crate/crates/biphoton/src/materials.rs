//! Dispersion models for the optical materials in the setup: Schott SF10
//! (prisms), 5% MgO-doped congruent lithium niobate (crystals, extraordinary
//! axis), and vacuum.
//!
//! Coefficients live in `data/materials.json`, shipped with the crate and
//! embedded at compile time, so alternate models can be swapped in for
//! sensitivity studies without touching code. Every operation is a pure
//! function of the model data: identical inputs give bit-identical outputs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{FS2, MM, NM, SPEED_OF_LIGHT, UM};

/// Embedded copy of the shipped material database.
const BUILTIN_JSON: &str = include_str!("../data/materials.json");

/// Errors from material property evaluation.
#[derive(Debug, Clone, Error)]
pub enum MaterialError {
    #[error("wavelength {wavelength_um} um is outside the valid range [{min_um}, {max_um}] um of material '{id}'")]
    OutOfRange {
        id: String,
        wavelength_um: f64,
        min_um: f64,
        max_um: f64,
    },

    #[error("material '{0}' not found in the database")]
    NotFound(String),

    #[error("material database parse error: {0}")]
    Parse(String),

    #[error("material '{id}': {message}")]
    Invalid { id: String, message: String },
}

/// Dispersion-formula identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionForm {
    /// n = 1 at every wavelength.
    Vacuum,
    /// Three-term Sellmeier, n² − 1 = Σ Bᵢλ²/(λ² − Cᵢ) with λ in µm.
    /// Coefficients are [B1, B2, B3, C1, C2, C3].
    Sellmeier3,
    /// Gayer et al. temperature-dependent model for 5% MgO:CLN (e axis):
    /// n² = a1 + b1 f + (a2 + b2 f)/(λ² − (a3 + b3 f)²) + (a4 + b4 f)/(λ² − a5²) − a6 λ²
    /// with f = (T − t_offset)(T + t_shift), T in °C, λ in µm.
    /// Coefficients are [a1..a6]; the bᵢ live in the temperature model.
    MgoClnGayer,
}

/// Temperature-correction parameters for temperature-dependent forms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemperatureModel {
    /// [b1, b2, b3, b4] multipliers of f(T).
    pub b: [f64; 4],
    /// Offset in f(T) = (T − t_offset)(T + t_shift).
    pub t_offset_c: f64,
    /// Shift in f(T).
    pub t_shift_c: f64,
}

/// A named dispersion model giving n(λ, T).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaterialModel {
    pub id: String,
    pub form: DispersionForm,
    pub coefficients: Vec<f64>,
    /// Wavelength validity interval in µm; evaluation outside is an error,
    /// never an extrapolated value.
    pub valid_range_um: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_model: Option<TemperatureModel>,
    pub reference: String,
}

/// Relative finite-difference step for the group-index derivative dn/dλ.
///
/// 1e-4 of the evaluation wavelength balances truncation against round-off
/// in double precision; the tests Richardson-check h against h/2.
pub const GROUP_INDEX_REL_STEP: f64 = 1e-4;

/// Relative finite-difference step (in frequency) for d²k/dω².
pub const GVD_REL_STEP: f64 = 1e-4;

impl MaterialModel {
    fn check_range(&self, wavelength_um: f64) -> Result<(), MaterialError> {
        let [lo, hi] = self.valid_range_um;
        if wavelength_um < lo || wavelength_um > hi {
            return Err(MaterialError::OutOfRange {
                id: self.id.clone(),
                wavelength_um,
                min_um: lo,
                max_um: hi,
            });
        }
        Ok(())
    }

    /// Phase refractive index n at a wavelength (nm) and temperature (°C).
    ///
    /// Temperature is ignored by temperature-independent models.
    pub fn refractive_index(&self, wavelength_nm: f64, temperature_c: f64) -> Result<f64, MaterialError> {
        let lam_um = wavelength_nm * NM / UM;
        self.check_range(lam_um)?;
        self.index_unchecked(lam_um, temperature_c)
    }

    fn index_unchecked(&self, lam_um: f64, temperature_c: f64) -> Result<f64, MaterialError> {
        match self.form {
            DispersionForm::Vacuum => Ok(1.0),
            DispersionForm::Sellmeier3 => {
                let c = &self.coefficients;
                if c.len() != 6 {
                    return Err(MaterialError::Invalid {
                        id: self.id.clone(),
                        message: format!("sellmeier3 needs 6 coefficients, got {}", c.len()),
                    });
                }
                let l2 = lam_um * lam_um;
                let n2 = 1.0
                    + c[0] * l2 / (l2 - c[3])
                    + c[1] * l2 / (l2 - c[4])
                    + c[2] * l2 / (l2 - c[5]);
                Ok(n2.sqrt())
            }
            DispersionForm::MgoClnGayer => {
                let a = &self.coefficients;
                if a.len() != 6 {
                    return Err(MaterialError::Invalid {
                        id: self.id.clone(),
                        message: format!("mgo_cln_gayer needs 6 coefficients, got {}", a.len()),
                    });
                }
                let tm = self.temperature_model.as_ref().ok_or_else(|| MaterialError::Invalid {
                    id: self.id.clone(),
                    message: "mgo_cln_gayer needs a temperature_model".into(),
                })?;
                let f = (temperature_c - tm.t_offset_c) * (temperature_c + tm.t_shift_c);
                let l2 = lam_um * lam_um;
                let pole1 = a[2] + tm.b[2] * f;
                let n2 = a[0] + tm.b[0] * f
                    + (a[1] + tm.b[1] * f) / (l2 - pole1 * pole1)
                    + (a[3] + tm.b[3] * f) / (l2 - a[4] * a[4])
                    - a[5] * l2;
                Ok(n2.sqrt())
            }
        }
    }

    /// Group index N = n − λ·dn/dλ.
    ///
    /// The derivative is a central finite difference with relative step
    /// [`GROUP_INDEX_REL_STEP`]; both stencil points must stay inside the
    /// valid range, so the interior of the range is required.
    pub fn group_index(&self, wavelength_nm: f64, temperature_c: f64) -> Result<f64, MaterialError> {
        self.group_index_with_step(wavelength_nm, temperature_c, GROUP_INDEX_REL_STEP)
    }

    /// Group index with an explicit relative step, for convergence checks.
    pub fn group_index_with_step(
        &self,
        wavelength_nm: f64,
        temperature_c: f64,
        rel_step: f64,
    ) -> Result<f64, MaterialError> {
        if self.form == DispersionForm::Vacuum {
            return Ok(1.0);
        }
        let lam_um = wavelength_nm * NM / UM;
        let h = lam_um * rel_step;
        self.check_range(lam_um - h)?;
        self.check_range(lam_um + h)?;
        let n0 = self.index_unchecked(lam_um, temperature_c)?;
        let np = self.index_unchecked(lam_um + h, temperature_c)?;
        let nm = self.index_unchecked(lam_um - h, temperature_c)?;
        let dn_dlam = (np - nm) / (2.0 * h);
        Ok(n0 - lam_um * dn_dlam)
    }

    /// Wavenumber k = n(λ, T)·ω/c in rad/m for an angular frequency in rad/s.
    pub fn wavenumber(&self, angular_frequency: f64, temperature_c: f64) -> Result<f64, MaterialError> {
        let lam_nm = crate::constants::nm_from_angular_frequency(angular_frequency);
        let n = self.refractive_index(lam_nm, temperature_c)?;
        Ok(n * angular_frequency / SPEED_OF_LIGHT)
    }

    /// Group-velocity dispersion d²k/dω² per unit length, in fs²/mm.
    ///
    /// Second-order central difference on k(ω) with relative step
    /// [`GVD_REL_STEP`]; the tests Richardson-check the step.
    pub fn gvd(&self, wavelength_nm: f64, temperature_c: f64) -> Result<f64, MaterialError> {
        self.gvd_with_step(wavelength_nm, temperature_c, GVD_REL_STEP)
    }

    /// GVD with an explicit relative frequency step, for convergence checks.
    pub fn gvd_with_step(
        &self,
        wavelength_nm: f64,
        temperature_c: f64,
        rel_step: f64,
    ) -> Result<f64, MaterialError> {
        if self.form == DispersionForm::Vacuum {
            return Ok(0.0);
        }
        let w0 = crate::constants::angular_frequency_from_nm(wavelength_nm);
        let h = w0 * rel_step;
        let k = |w: f64| self.wavenumber(w, temperature_c);
        let d2 = (k(w0 + h)? - 2.0 * k(w0)? + k(w0 - h)?) / (h * h); // s²/m
        Ok(d2 / FS2 * MM)
    }
}

/// The set of material models loaded from a data file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaterialDb {
    pub schema: String,
    pub materials: Vec<MaterialModel>,
}

impl MaterialDb {
    /// The database shipped with the crate (SF10, MgO:CLN e-axis, vacuum).
    pub fn builtin() -> MaterialDb {
        Self::from_json_str(BUILTIN_JSON).expect("embedded materials.json must parse")
    }

    pub fn from_json_str(s: &str) -> Result<MaterialDb, MaterialError> {
        serde_json::from_str(s).map_err(|e| MaterialError::Parse(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<MaterialDb, MaterialError> {
        let s = std::fs::read_to_string(path).map_err(|e| MaterialError::Parse(e.to_string()))?;
        Self::from_json_str(&s)
    }

    pub fn get(&self, id: &str) -> Result<&MaterialModel, MaterialError> {
        self.materials
            .iter()
            .find(|m| m.id == id)
            .ok_or_else(|| MaterialError::NotFound(id.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn db() -> MaterialDb {
        MaterialDb::builtin()
    }

    /// Analytic dn/dλ of the 3-term Sellmeier form, the independent oracle
    /// for the finite-difference derivative inside group_index.
    fn sellmeier3_dn_dlam(m: &MaterialModel, lam_um: f64) -> f64 {
        let c = &m.coefficients;
        let l2 = lam_um * lam_um;
        let n = m.refractive_index(lam_um * 1e3, 20.0).unwrap();
        let dn2: f64 = (0..3)
            .map(|i| -2.0 * c[i] * c[i + 3] * lam_um / (l2 - c[i + 3]).powi(2))
            .sum();
        dn2 / (2.0 * n)
    }

    #[test]
    fn vacuum_identities() {
        let v = db().get("vacuum").unwrap().clone();
        for lam in [100.0, 532.0, 1064.0, 10_000.0] {
            assert_eq!(v.refractive_index(lam, 20.0).unwrap(), 1.0);
            assert_eq!(v.group_index(lam, -40.0).unwrap(), 1.0);
            assert_eq!(v.gvd(lam, 95.0).unwrap(), 0.0);
        }
        let w = crate::constants::angular_frequency_from_nm(1064.0);
        assert_relative_eq!(v.wavenumber(w, 20.0).unwrap(), w / SPEED_OF_LIGHT, max_relative = 1e-15);
    }

    #[test]
    fn sf10_paper_values_at_1064() {
        let sf10 = db().get("sf10").unwrap().clone();
        let n = sf10.refractive_index(1064.0, 20.0).unwrap();
        let gi = sf10.group_index(1064.0, 20.0).unwrap();
        // "usual refractive index (1.7022)" / "group index of SF10 glass (1.7281"
        assert!((n - 1.7022).abs() < 5e-4, "n = {n}");
        assert!((gi - 1.7281).abs() < 5e-4, "N = {gi}");
        // "0.0259 higher than the usual refractive index"
        assert!((gi - n - 0.0259).abs() < 5e-4, "N - n = {}", gi - n);
    }

    #[test]
    fn sf10_single_point_sellmeier_at_532() {
        // Hand evaluation of the catalog formula at 532 nm, frozen:
        // l2 = 0.283024; n^2 = 1 + 1.61625977 l2/(l2-0.0127534559)
        //   + 0.259229334 l2/(l2-0.0581983954) + 1.07762317 l2/(l2-116.60768)
        let sf10 = db().get("sf10").unwrap().clone();
        let n = sf10.refractive_index(532.0, 20.0).unwrap();
        assert_relative_eq!(n, 1.7367322721835639, max_relative = 1e-12);
    }

    #[test]
    fn wavenumber_matches_index_composition() {
        let sf10 = db().get("sf10").unwrap().clone();
        let w = crate::constants::angular_frequency_from_nm(1064.0);
        let n1 = sf10.refractive_index(1064.0, 20.0).unwrap();
        let n2 = sf10.refractive_index(532.0, 20.0).unwrap();
        assert_relative_eq!(sf10.wavenumber(w, 20.0).unwrap(), n1 * w / SPEED_OF_LIGHT, max_relative = 1e-12);
        // k(2ω)/k(ω) = 2 n(λ/2)/n(λ) evaluated against separate index calls
        let ratio = sf10.wavenumber(2.0 * w, 20.0).unwrap() / sf10.wavenumber(w, 20.0).unwrap();
        assert_relative_eq!(ratio, 2.0 * n2 / n1, max_relative = 1e-12);
    }

    #[test]
    fn group_index_matches_analytic_derivative() {
        let sf10 = db().get("sf10").unwrap().clone();
        for lam_nm in [700.0, 900.0, 1064.0, 1400.0] {
            let lam_um = lam_nm * 1e-3;
            let n = sf10.refractive_index(lam_nm, 20.0).unwrap();
            let oracle = n - lam_um * sellmeier3_dn_dlam(&sf10, lam_um);
            let fd = sf10.group_index(lam_nm, 20.0).unwrap();
            assert!((fd - oracle).abs() < 1e-6, "lam {lam_nm}: fd {fd} vs analytic {oracle}");
        }
    }

    #[test]
    fn group_index_step_richardson_check() {
        let sf10 = db().get("sf10").unwrap().clone();
        let g1 = sf10.group_index_with_step(1064.0, 20.0, GROUP_INDEX_REL_STEP).unwrap();
        let g2 = sf10.group_index_with_step(1064.0, 20.0, GROUP_INDEX_REL_STEP / 2.0).unwrap();
        // central difference is O(h²): halving h shrinks the error ~4x, so
        // the difference between the two estimates bounds the error of g1
        assert!((g1 - g2).abs() < 1e-8, "step check: {g1} vs {g2}");
    }

    #[test]
    fn gvd_sf10_near_105_and_richardson() {
        let sf10 = db().get("sf10").unwrap().clone();
        let g = sf10.gvd(1064.0, 20.0).unwrap();
        // material GVD dominates the system's 105 fs²/mm slope
        assert!((g - 105.0).abs() / 105.0 < 0.10, "gvd = {g}");
        let g2 = sf10.gvd_with_step(1064.0, 20.0, GVD_REL_STEP / 2.0).unwrap();
        assert!((g - g2).abs() / g.abs() < 1e-3, "h vs h/2: {g} vs {g2}");
    }

    #[test]
    fn gvd_matches_polynomial_fit_oracle() {
        // Independent route: least-squares quartic fit of k(ω) on a dense
        // window, analytic second derivative of the fit at the center.
        let sf10 = db().get("sf10").unwrap().clone();
        let w0 = crate::constants::angular_frequency_from_nm(1064.0);
        let half = 2e-3 * w0;
        let m = 41;
        // fit k(w0 + x) ≈ Σ c_p x^p, p = 0..4 via normal equations on
        // scaled x to keep the system well conditioned
        let xs: Vec<f64> = (0..m).map(|i| -half + 2.0 * half * i as f64 / (m - 1) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| sf10.wavenumber(w0 + x, 20.0).unwrap()).collect();
        let s = half;
        let mut ata = [[0.0f64; 5]; 5];
        let mut atb = [0.0f64; 5];
        for (&x, &y) in xs.iter().zip(&ys) {
            let t = x / s;
            let basis = [1.0, t, t * t, t * t * t, t * t * t * t];
            for i in 0..5 {
                for j in 0..5 {
                    ata[i][j] += basis[i] * basis[j];
                }
                atb[i] += basis[i] * y;
            }
        }
        // Gaussian elimination
        let mut a = ata;
        let mut b = atb;
        for col in 0..5 {
            let piv = (col..5).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for row in 0..5 {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    for k in 0..5 {
                        a[row][k] -= f * a[col][k];
                    }
                    b[row] -= f * b[col];
                }
            }
        }
        let c2 = b[2] / a[2][2]; // coefficient of t²
        let oracle_fs2_mm = 2.0 * c2 / (s * s) / FS2 * MM;
        let fd = sf10.gvd(1064.0, 20.0).unwrap();
        assert!(
            ((fd - oracle_fs2_mm) / oracle_fs2_mm).abs() < 1e-3,
            "fd {fd} vs fit oracle {oracle_fs2_mm}"
        );
    }

    #[test]
    fn sf10_normal_dispersion_over_band() {
        // n strictly decreasing in λ and N > n over 700–1400 nm on a 1 nm grid
        let sf10 = db().get("sf10").unwrap().clone();
        let mut prev = f64::INFINITY;
        for lam in (700..=1400).map(f64::from) {
            let n = sf10.refractive_index(lam, 20.0).unwrap();
            let gi = sf10.group_index(lam, 20.0).unwrap();
            assert!(n < prev, "n not decreasing at {lam} nm");
            assert!(gi > n, "N <= n at {lam} nm");
            prev = n;
        }
    }

    #[test]
    fn ln_temperature_dependence_is_active() {
        let ln = db().get("mgo_cln_e").unwrap().clone();
        let n40 = ln.refractive_index(1064.0, 40.0).unwrap();
        let n60 = ln.refractive_index(1064.0, 60.0).unwrap();
        assert!(n60 > n40, "dn/dT should be positive for the e axis");
        assert!(n40 > 2.1 && n40 < 2.3, "n_e(1064) = {n40}");
    }

    #[test]
    fn out_of_range_is_an_error_with_bounds() {
        let sf10 = db().get("sf10").unwrap().clone();
        let err = sf10.refractive_index(300.0, 20.0).unwrap_err();
        match err {
            MaterialError::OutOfRange { min_um, max_um, .. } => {
                assert_eq!(min_um, 0.38);
                assert_eq!(max_um, 2.5);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(sf10.refractive_index(3000.0, 20.0).is_err());
    }

    #[test]
    fn evaluation_is_deterministic() {
        let ln = db().get("mgo_cln_e").unwrap().clone();
        let a = ln.refractive_index(1234.5678, 51.3).unwrap();
        let b = ln.refractive_index(1234.5678, 51.3).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn unknown_material_is_not_found() {
        assert!(matches!(db().get("bk7"), Err(MaterialError::NotFound(_))));
    }
}
