//! Mode-matching coefficients between the laser mode and the vacuum mode
//! returned by the mirror.
//!
//! Two geometries are covered:
//!
//! * detector waist: laser and vacuum share a waist `w0` at the detector; the
//!   vacuum mode travels to the mirror and back (`2 z1`) and its overlap with
//!   itself gives `mu`.
//! * mirror waist: the vacuum mode has waist `wm` at the mirror; propagated
//!   `z1` to the detector, its overlap with the laser waist gives the
//!   effective mirror amplitude reflectance `sqrt(R_m)`.
//!
//! The closed forms are the ones used by the fluctuation model. The
//! quadrature overlap is an independent check and is reported next to them,
//! not forced to agree.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::beam_optics::{rayleigh_range, GaussianBeam};
use crate::error::{require_non_negative, Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Radial cut-off in units of the wider beam's width at the evaluation plane.
pub const RADIAL_CUTOFF_WIDTHS: f64 = 8.0;

/// Target accuracy of [`overlap_numeric`].
pub const OVERLAP_TOLERANCE: f64 = 1e-8;

/// How the overlap normalization is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InnerProductKind {
    /// `N = int |E|^2`: the usual mode-overlap, bounded by 1.
    Conjugated,
    /// `N = |int E^2|`: squares without conjugation.
    Nonconjugated,
}

impl InnerProductKind {
    pub const ALL: [InnerProductKind; 2] = [InnerProductKind::Conjugated, InnerProductKind::Nonconjugated];

    pub fn name(&self) -> &'static str {
        match self {
            InnerProductKind::Conjugated => "conjugated",
            InnerProductKind::Nonconjugated => "nonconjugated",
        }
    }
}

/// `mu` for counter-propagating copies of a waist separated by a round trip
/// of `2 z1`, written as `(1+4u^2)^(1/4) / (1+5u^2+4u^4)^(1/4)` with
/// `u = z1/z0`. Requires `z1 >= 0`, `z0 > 0`.
pub fn mu_closed(z1: f64, z0: f64) -> f64 {
    let u2 = (z1 / z0).powi(2);
    (1.0 + 4.0 * u2).powf(0.25) / (1.0 + 5.0 * u2 + 4.0 * u2 * u2).powf(0.25)
}

/// Effective amplitude reflectance `sqrt(R_m)` of a perfect mirror when the
/// vacuum waist `wm` sits on the mirror and the laser waist `w0` on the
/// detector, a distance `z1` apart.
pub fn rm_closed(z1: f64, w0: f64, wm: f64, wavelength: f64) -> f64 {
    let z0 = rayleigh_range(w0, wavelength);
    let zm = rayleigh_range(wm, wavelength);
    let ratio = wm / w0;
    let mirror_term = 1.0 + (z1 / zm).powi(2);
    let size_term = (1.0 + ratio * ratio).powi(2) + (z1 / z0).powi(2);
    2f64.sqrt() * ratio.sqrt() * mirror_term.powf(0.25) / (size_term * mirror_term).powf(0.25)
}

/// Normalized transverse overlap of two beams on a common plane.
///
/// `plane_offset_*` is the axial distance from each beam's waist to the
/// plane. Integration runs over `rho in [0, 8 max(w_a, w_b)]`.
pub fn overlap_numeric(
    beam_a: &GaussianBeam,
    plane_offset_a: f64,
    beam_b: &GaussianBeam,
    plane_offset_b: f64,
    kind: InnerProductKind,
) -> Result<f64> {
    // The ratio is invariant under rescaling rho, so integrate in units of
    // the wider beam to keep the integrals O(1).
    let scale = beam_a.beam_width(plane_offset_a).max(beam_b.beam_width(plane_offset_b));
    let upper = RADIAL_CUTOFF_WIDTHS;
    let tol = Tolerance::absolute(1e-11).with_relative(1e-10);

    let field_a = |x: f64| beam_a.field_amplitude(x * scale, plane_offset_a);
    let field_b = |x: f64| beam_b.field_amplitude(x * scale, plane_offset_b);
    let measure = |x: f64| 2.0 * PI * x;

    let cross = integrate(|x| field_a(x) * field_b(x).conj() * measure(x), 0.0, upper, tol)?.value;
    let (norm_a, norm_b) = match kind {
        InnerProductKind::Conjugated => (
            integrate(|x| field_a(x).norm_sqr() * measure(x), 0.0, upper, tol)?.value,
            integrate(|x| field_b(x).norm_sqr() * measure(x), 0.0, upper, tol)?.value,
        ),
        InnerProductKind::Nonconjugated => {
            let sq = |f: &dyn Fn(f64) -> Complex64| -> Result<f64> {
                Ok(integrate(|x| f(x) * f(x) * measure(x), 0.0, upper, tol)?.value.norm())
            };
            (sq(&field_a)?, sq(&field_b)?)
        }
    };
    Ok(cross.norm() / (norm_a * norm_b).sqrt())
}

/// Beam geometry for one of the two mode-matching scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapScenario {
    pub laser_beam: GaussianBeam,
    pub vacuum_beam: GaussianBeam,
    pub mirror_distance: f64,
}

impl OverlapScenario {
    pub fn new(laser_beam: GaussianBeam, vacuum_beam: GaussianBeam, mirror_distance: f64) -> Result<Self> {
        require_non_negative("z1", mirror_distance)?;
        if laser_beam.wavelength() != vacuum_beam.wavelength() {
            return Err(Error::invalid(
                "wavelength",
                format!(
                    "laser and vacuum beams must share a wavelength ({} vs {})",
                    laser_beam.wavelength(),
                    vacuum_beam.wavelength()
                ),
            ));
        }
        Ok(Self {
            laser_beam,
            vacuum_beam,
            mirror_distance,
        })
    }

    /// Laser and vacuum both have waist `w0` on the detector.
    pub fn detector_waist(w0: f64, z1: f64, wavelength: f64) -> Result<Self> {
        let beam = GaussianBeam::new(w0, 0.0, wavelength)?;
        Self::new(beam, beam, z1)
    }

    /// Laser waist `w0` on the detector (lab z = 0), vacuum waist `wm` on the
    /// mirror (lab z = z1).
    pub fn mirror_waist(w0: f64, wm: f64, z1: f64, wavelength: f64) -> Result<Self> {
        let laser = GaussianBeam::new(w0, 0.0, wavelength)?;
        let vacuum = GaussianBeam::new(wm, z1, wavelength)?;
        Self::new(laser, vacuum, z1)
    }
}

/// Which route computes a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientMethod {
    ClosedForm,
    Numeric(InnerProductKind),
}

/// `mu` for the detector-waist scenario.
pub fn mu_effective(scenario: &OverlapScenario, method: CoefficientMethod) -> Result<f64> {
    let z1 = scenario.mirror_distance;
    match method {
        CoefficientMethod::ClosedForm => Ok(mu_closed(z1, scenario.vacuum_beam.rayleigh_range())),
        CoefficientMethod::Numeric(kind) => {
            let v = &scenario.vacuum_beam;
            overlap_numeric(v, 0.0, v, 2.0 * z1, kind)
        }
    }
}

/// `sqrt(R_m)` for the mirror-waist scenario.
pub fn rm_effective(scenario: &OverlapScenario, method: CoefficientMethod) -> Result<f64> {
    let z1 = scenario.mirror_distance;
    let laser = &scenario.laser_beam;
    let vacuum = &scenario.vacuum_beam;
    match method {
        CoefficientMethod::ClosedForm => Ok(rm_closed(
            z1,
            laser.waist_radius(),
            vacuum.waist_radius(),
            laser.wavelength(),
        )),
        CoefficientMethod::Numeric(kind) => overlap_numeric(laser, 0.0, vacuum, z1, kind),
    }
}
