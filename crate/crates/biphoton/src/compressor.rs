//! Four-prism compressor: 2D sequential ray tracing in the dispersion
//! plane, spectral phase φ(ω) = ω·OPL(ω)/c and its derivatives at ω_d,
//! insertion/translator maps, and the insertion-delay formula.
//!
//! The four prisms sit in the symmetric minimum-deviation arrangement:
//! each prism is oriented at minimum deviation for the design ray reaching
//! it, with apex sides alternating [+, −, −, +]. That construction makes
//! the faces of a pair antiparallel, so the pair cancels its own angular
//! dispersion exactly at every frequency and the exit ray of the system is
//! parallel to the entrance ray across the band.
//!
//! Prism translation ("insertion") is along the base-perpendicular stage
//! axis; positive insertion adds glass. Geometry is in millimeters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{angular_frequency_from_nm, nm_from_angular_frequency, FS, FS2, FS3, MM, SPEED_OF_LIGHT};
use crate::grid::SpectralGrid;
use crate::materials::{MaterialError, MaterialModel};

/// Prism bench temperature (°C); SF10 is modeled temperature-independent.
pub const ROOM_TEMPERATURE_C: f64 = 20.0;

/// Relative frequency step for the 5-point φ⁽¹⁾/φ⁽²⁾ stencils.
pub const PHASE_DERIV_REL_STEP: f64 = 1e-4;

/// Relative frequency step for the φ⁽³⁾ stencil. Wider than the φ⁽²⁾ step:
/// the third difference of the traced optical path loses ~9 digits to
/// cancellation at 1e-4·ω_d, so the step trades truncation (still ~1e-5
/// relative) against round-off.
pub const PHASE_DERIV3_REL_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Error)]
pub enum TraceError {
    #[error(transparent)]
    Material(#[from] MaterialError),

    #[error("ray misses face {face} of prism {prism} by {miss_mm:.3} mm (hit parameter {hit_mm:.3} mm, face length {face_mm} mm)")]
    MissedFace {
        prism: usize,
        face: &'static str,
        hit_mm: f64,
        miss_mm: f64,
        face_mm: f64,
    },

    #[error("total internal reflection at face {face} of prism {prism}")]
    TotalInternalReflection { prism: usize, face: &'static str },

    #[error("ray parallel to face {face} of prism {prism}")]
    NoIntersection { prism: usize, face: &'static str },

    #[error("geometry does not close: {0}")]
    GeometryDoesNotClose(String),

    #[error("insertion {insertion_mm} mm on prism {prism} puts the design ray off the face")]
    InsertionOutOfBounds { prism: usize, insertion_mm: f64 },

    #[error("trace failed at grid point {index} (ω = {omega:.6e} rad/s): {source}")]
    AtGridPoint {
        index: usize,
        omega: f64,
        source: Box<TraceError>,
    },

    #[error("invalid layout parameter: {0}")]
    InvalidParam(String),
}

// ---------------------------------------------------------------------------
// small 2D vector helpers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Vec2 {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Counter-clockwise rotation.
    pub fn rotated(self, angle_rad: f64) -> Vec2 {
        let (s, c) = angle_rad.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// CCW perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    /// Signed angle of self relative to `other` (rad, CCW positive).
    pub fn angle_to(self, other: Vec2) -> f64 {
        let cross = other.x * self.y - other.y * self.x;
        let dot = self.dot(other);
        cross.atan2(dot)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Vec2,
    pub dir: Vec2,
}

/// One planar refracting face: a segment of length `length` starting at the
/// prism apex along `along`, with unit outward normal `outward`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct Face {
    apex: Vec2,
    along: Vec2,
    outward: Vec2,
    length: f64,
}

impl Face {
    /// Forward intersection parameter t and hit parameter s (distance from
    /// apex along the face). Returns None when the ray is parallel.
    fn intersect(&self, ray: &Ray) -> Option<(f64, f64)> {
        let denom = ray.dir.dot(self.outward);
        if denom.abs() < 1e-15 {
            return None;
        }
        let t = (self.apex - ray.origin).dot(self.outward) / denom;
        let hit = ray.origin + ray.dir * t;
        let s = (hit - self.apex).dot(self.along);
        Some((t, s))
    }
}

/// Snell refraction of unit direction `d` at a face with unit normal `n`
/// (any orientation), from index `n_from` into `n_to`.
fn refract(d: Vec2, n: Vec2, n_from: f64, n_to: f64) -> Option<Vec2> {
    // use the normal facing the incoming ray
    let n = if d.dot(n) > 0.0 { n * -1.0 } else { n };
    let eta = n_from / n_to;
    let cos_i = -d.dot(n);
    let sin2_t = eta * eta * (1.0 - cos_i * cos_i);
    if sin2_t > 1.0 {
        return None;
    }
    let cos_t = (1.0 - sin2_t).sqrt();
    Some((d * eta + n * (eta * cos_i - cos_t)).normalized())
}

// ---------------------------------------------------------------------------
// specs and layout
// ---------------------------------------------------------------------------

/// One prism of the compressor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrismSpec {
    /// Apex angle (degrees).
    pub apex_angle_deg: f64,
    /// Face length (mm).
    pub side_length_mm: f64,
    /// Stage insertion along the base-perpendicular axis, relative to the
    /// baseline position (mm; positive adds glass).
    pub insertion_mm: f64,
    /// Design-ray glass chord at zero insertion (mm).
    pub baseline_chord_mm: f64,
}

impl PrismSpec {
    pub fn standard(baseline_chord_mm: f64) -> PrismSpec {
        PrismSpec {
            apex_angle_deg: 60.0,
            side_length_mm: 30.0,
            insertion_mm: 0.0,
            baseline_chord_mm,
        }
    }
}

/// Parameters of a four-prism compressor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompressorParams {
    /// Apex-to-apex distance within each pair (mm): P1–P2 and P3–P4.
    pub tip_spacing_mm: f64,
    /// Apex-to-apex distance between the pairs (mm): P2–P3. Contributes
    /// only a frequency-linear phase; the default is a bench-scale value.
    pub pair_separation_mm: f64,
    /// Wavelength the geometry is aligned for (nm).
    pub design_wavelength_nm: f64,
    /// Straight path from the reference entrance point to P1 (mm).
    pub lead_in_mm: f64,
    pub prisms: [PrismSpec; 4],
}

impl CompressorParams {
    /// Geometry of the experiment's signal arm (500 mm pairs). Baseline
    /// chords seat P2/P3 mid-face (the beam is spectrally fanned out
    /// there, roughly ±9 mm across the band) and leave room on P3 for the
    /// ±10.5 mm glass moves of the measurement protocol; P1/P4 see the
    /// recombined beam and their chords mainly budget glass for the
    /// zero-GDD calibration.
    pub fn signal_arm() -> CompressorParams {
        CompressorParams {
            tip_spacing_mm: 500.0,
            pair_separation_mm: 200.0,
            design_wavelength_nm: 1064.0,
            lead_in_mm: 50.0,
            prisms: [
                PrismSpec::standard(6.0),
                PrismSpec::standard(14.0),
                PrismSpec::standard(16.0),
                PrismSpec::standard(6.0),
            ],
        }
    }

    /// Geometry of the experiment's idler arm (352 mm pairs).
    pub fn idler_arm() -> CompressorParams {
        CompressorParams {
            tip_spacing_mm: 352.0,
            ..Self::signal_arm()
        }
    }
}

/// Minimum-deviation geometry for a given index and apex angle:
/// incidence = arcsin(n·sin(α/2)), deflection Δθ = 2·incidence − α.
/// Errors when n·sin(α/2) > 1 (no propagating solution).
pub fn min_deviation_geometry(index: f64, apex_angle_deg: f64) -> Result<MinDeviation, TraceError> {
    let half = (apex_angle_deg / 2.0).to_radians();
    let s = index * half.sin();
    if s > 1.0 {
        return Err(TraceError::InvalidParam(format!(
            "n·sin(α/2) = {s:.6} > 1: no minimum-deviation geometry for n = {index}, α = {apex_angle_deg}°"
        )));
    }
    let incidence = s.asin();
    Ok(MinDeviation {
        incidence_deg: incidence.to_degrees(),
        deflection_deg: (2.0 * incidence).to_degrees() - apex_angle_deg,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct MinDeviation {
    pub incidence_deg: f64,
    pub deflection_deg: f64,
}

/// Apex side of each prism relative to the local ray direction
/// (+1 = apex on the CCW side).
const APEX_SIDES: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// A built compressor: prism geometry in the lab frame plus the design ray.
#[derive(Debug, Clone)]
pub struct CompressorLayout {
    pub params: CompressorParams,
    pub material: MaterialModel,
    faces: [(Face, Face); 4],
    start: Ray,
    exit_plane_x: f64,
    design_deflection_deg: f64,
}

/// Result of tracing one frequency through the system.
#[derive(Debug, Clone)]
pub struct TraceResult {
    /// Optical path length from the entrance reference point to the exit
    /// reference plane (meters).
    pub opl_m: f64,
    /// Total geometric in-glass path (mm).
    pub glass_path_mm: f64,
    pub exit_ray: Ray,
    /// Entry/exit points on each prism (mm), for plotting.
    pub vertices: Vec<Vec2>,
}

impl CompressorLayout {
    /// Build the layout: orient all four prisms at minimum deviation for
    /// the design wavelength, place them at the configured spacings and
    /// baseline chords, apply the per-prism insertions, and verify closure.
    pub fn build(params: CompressorParams, material: MaterialModel) -> Result<CompressorLayout, TraceError> {
        if params.tip_spacing_mm <= 0.0 || params.pair_separation_mm <= 0.0 {
            return Err(TraceError::InvalidParam("spacings must be positive".into()));
        }
        let n_design = material.refractive_index(params.design_wavelength_nm, ROOM_TEMPERATURE_C)?;
        let start = Ray {
            origin: Vec2::new(0.0, 0.0),
            dir: Vec2::new(1.0, 0.0),
        };

        let mut faces: Vec<(Face, Face)> = Vec::with_capacity(4);
        let mut ray = start;
        // the placement chain runs at zero insertion: stages move a single
        // prism, they never re-seat its neighbours
        let mut prev_baseline_apex: Option<Vec2> = None;
        let mut last_inserted_apex = Vec2::new(0.0, 0.0);

        for (k, prism) in params.prisms.iter().enumerate() {
            let alpha = prism.apex_angle_deg.to_radians();
            let md = min_deviation_geometry(n_design, prism.apex_angle_deg)?;
            let theta_in = md.incidence_deg.to_radians();
            let sigma = APEX_SIDES[k];

            // orientation from the local design ray direction
            let internal = ray.dir.rotated(-sigma * (theta_in - alpha / 2.0));
            let apexward = internal.rotated(sigma * std::f64::consts::FRAC_PI_2);
            let baseward = apexward * -1.0;
            let e1 = baseward.rotated(-sigma * alpha / 2.0); // entrance face, apex -> base
            let e2 = baseward.rotated(sigma * alpha / 2.0); // exit face
            let n1 = e1.rotated(-sigma * std::f64::consts::FRAC_PI_2);
            let n2 = e2.rotated(sigma * std::f64::consts::FRAC_PI_2);

            // baseline entry point at the configured chord
            let chord = prism.baseline_chord_mm;
            if chord <= 0.0 || chord / (2.0 * (alpha / 2.0).sin()) > prism.side_length_mm {
                return Err(TraceError::InvalidParam(format!(
                    "baseline chord {chord} mm of prism {} not on the {} mm face",
                    k + 1,
                    prism.side_length_mm
                )));
            }
            let s_entry = chord / (2.0 * (alpha / 2.0).sin());

            // baseline apex position: E - s·ê₁ with E on the incoming ray
            // line; the along-ray location comes from the spacing to the
            // previous baseline apex (or the lead-in for P1)
            let baseline_apex = match prev_baseline_apex {
                None => {
                    let entry = ray.origin + ray.dir * params.lead_in_mm;
                    entry - e1 * s_entry
                }
                Some(prev) => {
                    let spacing = if k == 2 {
                        params.pair_separation_mm
                    } else {
                        params.tip_spacing_mm
                    };
                    // |Q + t·d − s·ê₁ − prev| = spacing, forward root
                    let u = ray.origin - e1 * s_entry - prev;
                    let b = u.dot(ray.dir);
                    let c = u.dot(u) - spacing * spacing;
                    let disc = b * b - c;
                    if disc < 0.0 {
                        return Err(TraceError::GeometryDoesNotClose(format!(
                            "prism {} cannot be placed {spacing} mm from the previous apex",
                            k + 1
                        )));
                    }
                    let t = -b + disc.sqrt();
                    ray.origin + ray.dir * t - e1 * s_entry
                }
            };
            prev_baseline_apex = Some(baseline_apex);

            // stage insertion along the base-perpendicular axis
            let apex = baseline_apex + apexward * prism.insertion_mm;
            last_inserted_apex = apex;

            let entrance = Face {
                apex,
                along: e1,
                outward: n1,
                length: prism.side_length_mm,
            };
            let exit = Face {
                apex,
                along: e2,
                outward: n2,
                length: prism.side_length_mm,
            };
            faces.push((entrance, exit));

            // advance the design ray through the zero-insertion prism:
            // refract to the internal (base-parallel) direction at the
            // entrance, cross to the exit face, leave at the full
            // min-deviation deflection
            let baseline_entrance = Face { apex: baseline_apex, ..entrance };
            let baseline_exit = Face { apex: baseline_apex, ..exit };
            let hit = baseline_entrance
                .intersect(&ray)
                .ok_or(TraceError::NoIntersection { prism: k + 1, face: "entrance" })?;
            let inside = Ray {
                origin: ray.origin + ray.dir * hit.0,
                dir: internal,
            };
            let exit_hit = baseline_exit
                .intersect(&inside)
                .ok_or(TraceError::NoIntersection { prism: k + 1, face: "exit" })?;
            ray = Ray {
                origin: inside.origin + inside.dir * exit_hit.0,
                dir: ray.dir.rotated(-sigma * md.deflection_deg.to_radians()),
            };
        }

        let _ = last_inserted_apex;
        let faces: [(Face, Face); 4] = faces.try_into().expect("four prisms");
        // fixed reference plane: insertion moves must not drag it along
        let exit_plane_x = prev_baseline_apex.unwrap().x + 80.0;
        let layout = CompressorLayout {
            params,
            material,
            faces,
            start,
            exit_plane_x,
            design_deflection_deg: min_deviation_geometry(n_design, 60.0)
                .map(|m| m.deflection_deg)
                .unwrap_or(f64::NAN),
        };

        // closure invariant: traced design ray exits parallel to the input
        let design = layout.trace_frequency(angular_frequency_from_nm(layout.params.design_wavelength_nm))?;
        let residual = design.exit_ray.dir.angle_to(layout.start.dir).abs();
        if residual > 1e-9 {
            return Err(TraceError::GeometryDoesNotClose(format!(
                "design-ray exit angle residual {residual:.3e} rad"
            )));
        }
        Ok(layout)
    }

    /// Layout with one prism's insertion changed (stage move).
    pub fn with_insertion(&self, prism_index: usize, insertion_mm: f64) -> Result<CompressorLayout, TraceError> {
        if prism_index == 0 || prism_index > 4 {
            return Err(TraceError::InvalidParam(format!(
                "prism index must be 1..=4, got {prism_index}"
            )));
        }
        let mut params = self.params.clone();
        params.prisms[prism_index - 1].insertion_mm = insertion_mm;
        Self::build(params, self.material.clone())
    }

    /// Deflection of one prism at the design wavelength (degrees).
    pub fn design_deflection_deg(&self) -> f64 {
        self.design_deflection_deg
    }

    /// Design entrance ray (mm frame).
    pub fn entrance(&self) -> Ray {
        self.start
    }

    /// Sequential trace of one frequency through all eight faces.
    pub fn trace_frequency(&self, angular_frequency: f64) -> Result<TraceResult, TraceError> {
        let lam_nm = nm_from_angular_frequency(angular_frequency);
        let n = self.material.refractive_index(lam_nm, ROOM_TEMPERATURE_C)?;
        self.trace_with_index(n, self.start, false)
    }

    /// Trace an arbitrary ray backwards through the system (exit side
    /// first), used by the reversibility checks.
    pub fn trace_reverse(&self, angular_frequency: f64, ray: Ray) -> Result<TraceResult, TraceError> {
        let lam_nm = nm_from_angular_frequency(angular_frequency);
        let n = self.material.refractive_index(lam_nm, ROOM_TEMPERATURE_C)?;
        self.trace_with_index(n, ray, true)
    }

    fn trace_with_index(&self, n: f64, start: Ray, reverse: bool) -> Result<TraceResult, TraceError> {
        let mut ray = start;
        let mut opl_mm = 0.0;
        let mut glass_mm = 0.0;
        let mut vertices = vec![ray.origin];

        let order: Vec<usize> = if reverse { (0..4).rev().collect() } else { (0..4).collect() };
        for &k in &order {
            let (entrance, exit) = if reverse {
                (self.faces[k].1, self.faces[k].0)
            } else {
                self.faces[k]
            };
            let prism = k + 1;

            let (t_in, s_in) = entrance
                .intersect(&ray)
                .ok_or(TraceError::NoIntersection { prism, face: "entrance" })?;
            Self::check_face(prism, "entrance", t_in, s_in, entrance.length)?;
            opl_mm += t_in; // vacuum segment
            let hit_in = ray.origin + ray.dir * t_in;
            let d_glass = refract(ray.dir, entrance.outward, 1.0, n)
                .ok_or(TraceError::TotalInternalReflection { prism, face: "entrance" })?;
            ray = Ray { origin: hit_in, dir: d_glass };
            vertices.push(hit_in);

            let (t_g, s_out) = exit
                .intersect(&ray)
                .ok_or(TraceError::NoIntersection { prism, face: "exit" })?;
            Self::check_face(prism, "exit", t_g, s_out, exit.length)?;
            opl_mm += n * t_g;
            glass_mm += t_g;
            let hit_out = ray.origin + ray.dir * t_g;
            let d_out = refract(ray.dir, exit.outward, n, 1.0)
                .ok_or(TraceError::TotalInternalReflection { prism, face: "exit" })?;
            ray = Ray { origin: hit_out, dir: d_out };
            vertices.push(hit_out);
        }

        // final vacuum segment to the reference plane (skipped for reverse
        // traces, which are only used for ray-level checks)
        if !reverse {
            if ray.dir.x <= 0.0 {
                return Err(TraceError::GeometryDoesNotClose("exit ray does not reach the reference plane".into()));
            }
            let t_end = (self.exit_plane_x - ray.origin.x) / ray.dir.x;
            opl_mm += t_end;
            ray = Ray { origin: ray.origin + ray.dir * t_end, dir: ray.dir };
            vertices.push(ray.origin);
        }

        Ok(TraceResult {
            opl_m: opl_mm * MM,
            glass_path_mm: glass_mm,
            exit_ray: ray,
            vertices,
        })
    }

    fn check_face(prism: usize, face: &'static str, t: f64, s: f64, len: f64) -> Result<(), TraceError> {
        if t <= 0.0 {
            return Err(TraceError::NoIntersection { prism, face });
        }
        if s < 0.0 || s > len {
            let miss = if s < 0.0 { -s } else { s - len };
            return Err(TraceError::MissedFace { prism, face, hit_mm: s, miss_mm: miss, face_mm: len });
        }
        Ok(())
    }

    /// Optical path length (m) and glass path (mm) at one frequency.
    pub fn trace_optical_path(&self, angular_frequency: f64) -> Result<(f64, f64), TraceError> {
        let r = self.trace_frequency(angular_frequency)?;
        Ok((r.opl_m, r.glass_path_mm))
    }

    /// Spectral phase on a grid with derivatives at the grid center.
    pub fn spectral_phase(&self, grid: &SpectralGrid) -> Result<SpectralPhase, TraceError> {
        let phase = self.sample_phase(grid, true)?.0;
        let d = self.phase_derivatives(grid.center())?;
        Ok(SpectralPhase {
            grid: grid.clone(),
            phase,
            mask: vec![true; grid.len()],
            clipped_fraction: 0.0,
            gd_fs: d.0,
            gdd_fs2: d.1,
            tod_fs3: d.2,
        })
    }

    /// Spectral phase where grid points whose rays walk off a face are
    /// masked out (transmission zero) instead of failing the whole grid.
    /// The harness uses this: at strong prism moves the extreme tails of
    /// the band clip on the 30 mm faces, exactly as a real aperture does.
    pub fn spectral_phase_masked(&self, grid: &SpectralGrid) -> Result<SpectralPhase, TraceError> {
        let (phase, mask) = self.sample_phase(grid, false)?;
        let clipped = mask.iter().filter(|&&m| !m).count();
        let d = self.phase_derivatives(grid.center())?;
        Ok(SpectralPhase {
            grid: grid.clone(),
            phase,
            clipped_fraction: clipped as f64 / grid.len() as f64,
            mask,
            gd_fs: d.0,
            gdd_fs2: d.1,
            tod_fs3: d.2,
        })
    }

    fn sample_phase(&self, grid: &SpectralGrid, strict: bool) -> Result<(Vec<f64>, Vec<bool>), TraceError> {
        let wd = grid.center();
        let opl_d = self.trace_frequency(wd)?.opl_m;
        let mut phase = Vec::with_capacity(grid.len());
        let mut mask = vec![true; grid.len()];
        for j in 0..grid.len() {
            let w = grid.frequency(j);
            match self.trace_frequency(w) {
                Ok(r) => {
                    // φ(ω) − ω_d·OPL(ω_d)/c: dropping the constant keeps the
                    // sampled phase small enough for exact e^{iφ} evaluation
                    let rel = (w * r.opl_m - wd * opl_d) / SPEED_OF_LIGHT;
                    phase.push(rel);
                }
                Err(e) if strict => {
                    return Err(TraceError::AtGridPoint { index: j, omega: w, source: Box::new(e) });
                }
                Err(_) => {
                    phase.push(0.0);
                    mask[j] = false;
                }
            }
        }
        Ok((phase, mask))
    }

    /// Group delay (fs), GDD (fs²) and TOD (fs³) at ω₀ by 5-point central
    /// stencils on g(Δ) = (ω₀+Δ)·[OPL(ω₀+Δ) − OPL(ω₀)]/c, which carries the
    /// full nonlinear phase while avoiding catastrophic cancellation.
    pub fn phase_derivatives(&self, omega0: f64) -> Result<(f64, f64, f64), TraceError> {
        let opl0 = self.trace_frequency(omega0)?.opl_m;
        let g = |d: f64| -> Result<f64, TraceError> {
            let opl = self.trace_frequency(omega0 + d)?.opl_m;
            Ok((omega0 + d) * (opl - opl0) / SPEED_OF_LIGHT)
        };

        let h = PHASE_DERIV_REL_STEP * omega0;
        let (gp2, gp1, gm1, gm2) = (g(2.0 * h)?, g(h)?, g(-h)?, g(-2.0 * h)?);
        let d1 = (-gp2 + 8.0 * gp1 - 8.0 * gm1 + gm2) / (12.0 * h) + opl0 / SPEED_OF_LIGHT;
        let d2 = (-gp2 + 16.0 * gp1 + 16.0 * gm1 - gm2) / (12.0 * h * h);

        let h3 = PHASE_DERIV3_REL_STEP * omega0;
        let (fp2, fp1, fm1, fm2) = (g(2.0 * h3)?, g(h3)?, g(-h3)?, g(-2.0 * h3)?);
        let d3 = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h3 * h3 * h3);

        Ok((d1 / FS, d2 / FS2, d3 / FS3))
    }

    /// Glass-path change (mm) produced by moving one prism (1..=4) by
    /// `translator_move_mm` along its stage axis.
    pub fn translator_to_glass_path(&self, translator_move_mm: f64, prism_index: usize) -> Result<f64, TraceError> {
        let base = self.params.prisms[prism_index - 1].insertion_mm;
        let moved = self.with_insertion(prism_index, base + translator_move_mm)?;
        let wd = angular_frequency_from_nm(self.params.design_wavelength_nm);
        let g0 = self.trace_frequency(wd)?.glass_path_mm;
        let g1 = moved.trace_frequency(wd)?.glass_path_mm;
        Ok(g1 - g0)
    }
}

/// Time delay from adding glass path ΔL in a prism at deflection Δθ:
/// (ΔL/c)·[N − 1/cos(Δθ/2)], returned in fs.
pub fn insertion_delay_fs(glass_path_mm: f64, group_index: f64, deflection_deg: f64) -> f64 {
    let dl = glass_path_mm * MM;
    let half = (deflection_deg / 2.0).to_radians();
    dl / SPEED_OF_LIGHT * (group_index - 1.0 / half.cos()) / FS
}

/// Sampled spectral phase of one arm with derivatives at the grid center.
#[derive(Debug, Clone)]
pub struct SpectralPhase {
    grid: SpectralGrid,
    phase: Vec<f64>,
    mask: Vec<bool>,
    /// Fraction of grid points clipped by face apertures (0 for strict traces).
    pub clipped_fraction: f64,
    /// φ⁽¹⁾ at the grid center (fs).
    pub gd_fs: f64,
    /// φ⁽²⁾ at the grid center (fs²).
    pub gdd_fs2: f64,
    /// φ⁽³⁾ at the grid center (fs³).
    pub tod_fs3: f64,
}

impl SpectralPhase {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Phase sample at grid index j (rad, constant term removed).
    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// Aperture transmission of grid point j.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}
