//! Fundamental-mode Gaussian beam propagation.
//!
//! Lengths are in units of the wavelength unless a beam is built with an
//! explicit wavelength. The axial coordinate `z` passed to every method is
//! measured from the beam's own waist; use [`GaussianBeam::offset_from_waist`]
//! to convert a lab-frame position.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{require_finite, require_positive, Result};

/// A TEM00 Gaussian beam with unit on-axis amplitude at the waist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBeam {
    waist_radius: f64,
    waist_position: f64,
    wavelength: f64,
}

impl GaussianBeam {
    pub fn new(waist_radius: f64, waist_position: f64, wavelength: f64) -> Result<Self> {
        Ok(Self {
            waist_radius: require_positive("waist_radius", waist_radius)?,
            waist_position: require_finite("waist_position", waist_position)?,
            wavelength: require_positive("wavelength", wavelength)?,
        })
    }

    /// Beam with waist at the origin, wavelength 1.
    pub fn with_waist(waist_radius: f64) -> Result<Self> {
        Self::new(waist_radius, 0.0, 1.0)
    }

    pub fn waist_radius(&self) -> f64 {
        self.waist_radius
    }

    pub fn waist_position(&self) -> f64 {
        self.waist_position
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Axial distance of a lab-frame position from this beam's waist.
    pub fn offset_from_waist(&self, lab_z: f64) -> f64 {
        lab_z - self.waist_position
    }

    /// `pi w0^2 / lambda`.
    pub fn rayleigh_range(&self) -> f64 {
        rayleigh_range(self.waist_radius, self.wavelength)
    }

    /// `w0 sqrt(1 + (z/z0)^2)`.
    pub fn beam_width(&self, z: f64) -> f64 {
        let s = z / self.rayleigh_range();
        self.waist_radius * (1.0 + s * s).sqrt()
    }

    /// `1/R(z) = z / (z^2 + z0^2)`, which is finite (zero) at the waist.
    pub fn inverse_curvature(&self, z: f64) -> f64 {
        let z0 = self.rayleigh_range();
        z / (z * z + z0 * z0)
    }

    /// `atan(z/z0)`.
    pub fn gouy_phase(&self, z: f64) -> f64 {
        (z / self.rayleigh_range()).atan()
    }

    /// Complex scalar field at radius `rho` and axial offset `z`:
    ///
    /// `(w0/w) exp(-rho^2/w^2) exp(-i k z - i k rho^2 / (2R) + i zeta)`.
    pub fn field_amplitude(&self, rho: f64, z: f64) -> Complex64 {
        let w = self.beam_width(z);
        let k = self.wavenumber();
        let envelope = self.waist_radius / w * (-(rho * rho) / (w * w)).exp();
        let phase = -k * z - 0.5 * k * rho * rho * self.inverse_curvature(z) + self.gouy_phase(z);
        Complex64::from_polar(envelope, phase)
    }
}

/// Rayleigh range for a waist radius and wavelength.
pub fn rayleigh_range(waist_radius: f64, wavelength: f64) -> f64 {
    PI * waist_radius * waist_radius / wavelength
}
