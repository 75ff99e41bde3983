//! Linear bookkeeping of the vacuum modes reaching the detector.
//!
//! The beam splitter mixes the laser-port vacuum `b` with the mode `c`
//! coming back from the mirror; `c` in turn contains the vacuum `d` leaking
//! through the mirror and the reflected part of the two splitter input
//! vacua `a1`, `a2`. Each observable is stored as the complex coefficients
//! of the four independent annihilation operators. On the vacuum state the
//! variance of `sum c_j a_j + h.c.` is `sum |c_j|^2`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{require_finite, require_non_negative, require_unit_interval, Error, Result};

/// Allowed deviation from `T + R = 1` and `T_m + R_m = 1`.
pub const LOSSLESS_TOLERANCE: f64 = 1e-12;

/// The independent input vacuum modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeLabel {
    /// Splitter input on the detector side, also the mode that returns from the mirror.
    A1,
    /// Second splitter input feeding the mirror arm.
    A2,
    /// Vacuum entering with the laser.
    B,
    /// Vacuum behind the mirror.
    D,
}

impl ModeLabel {
    pub const ALL: [ModeLabel; 4] = [ModeLabel::A1, ModeLabel::A2, ModeLabel::B, ModeLabel::D];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModeLabel::A1 => "a1",
            ModeLabel::A2 => "a2",
            ModeLabel::B => "b",
            ModeLabel::D => "d",
        };
        f.write_str(s)
    }
}

/// Linear combination of the input annihilation operators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeExpression {
    coefficients: [Complex64; 4],
}

impl ModeExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(label: ModeLabel, coefficient: Complex64) -> Self {
        Self::zero().with(label, coefficient)
    }

    pub fn with(mut self, label: ModeLabel, coefficient: Complex64) -> Self {
        self.coefficients[label.index()] = coefficient;
        self
    }

    pub fn coefficient(&self, label: ModeLabel) -> Complex64 {
        self.coefficients[label.index()]
    }

    pub fn terms(&self) -> impl Iterator<Item = (ModeLabel, Complex64)> + '_ {
        ModeLabel::ALL.iter().map(|&l| (l, self.coefficient(l)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            coefficients: self.coefficients.map(|c| c * factor),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = *self;
        for (o, c) in out.coefficients.iter_mut().zip(other.coefficients) {
            *o += c;
        }
        out
    }
}

/// Beam splitter, mirror, distances and local oscillator of the setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalNetworkParams {
    /// Splitter intensity transmittance `T`.
    pub transmittance: f64,
    /// Splitter intensity reflectance `R`.
    pub reflectance: f64,
    /// Mirror intensity transmittance `T_m`.
    pub mirror_transmittance: f64,
    /// Mirror intensity reflectance `R_m` (effective, i.e. including mode matching).
    pub mirror_reflectance: f64,
    /// Match between the outgoing and returning vacuum mode at the detector.
    pub mu: f64,
    /// Detector to mirror distance `z1`.
    pub mirror_distance: f64,
    /// Detector to laser distance `Z1`.
    pub laser_distance: f64,
    /// Path phase reference of the vacuum behind the mirror, `Z_M`.
    pub mirror_source_distance: f64,
    pub wavenumber: f64,
    /// Local oscillator phase `phi`.
    pub phase: f64,
    /// Local oscillator amplitude `|alpha|`.
    pub amplitude: f64,
}

impl OpticalNetworkParams {
    /// Lossless splitter and mirror: `R = 1 - T`, `T_m = 1 - R_m`. Wavenumber
    /// defaults to `2 pi` (unit wavelength), unit amplitude, zero phases.
    pub fn lossless(transmittance: f64, mirror_reflectance: f64, mu: f64, mirror_distance: f64) -> Self {
        Self {
            transmittance,
            reflectance: 1.0 - transmittance,
            mirror_transmittance: 1.0 - mirror_reflectance,
            mirror_reflectance,
            mu,
            mirror_distance,
            laser_distance: 0.0,
            mirror_source_distance: 0.0,
            wavenumber: 2.0 * std::f64::consts::PI,
            phase: 0.0,
            amplitude: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_unit_interval("T", self.transmittance)?;
        require_unit_interval("R", self.reflectance)?;
        require_unit_interval("Tm", self.mirror_transmittance)?;
        require_unit_interval("Rm", self.mirror_reflectance)?;
        require_unit_interval("mu", self.mu)?;
        if (self.transmittance + self.reflectance - 1.0).abs() > LOSSLESS_TOLERANCE {
            return Err(Error::invalid(
                "R",
                format!("T + R must equal 1, got {}", self.transmittance + self.reflectance),
            ));
        }
        if (self.mirror_transmittance + self.mirror_reflectance - 1.0).abs() > LOSSLESS_TOLERANCE {
            return Err(Error::invalid(
                "Tm",
                format!(
                    "Tm + Rm must equal 1, got {}",
                    self.mirror_transmittance + self.mirror_reflectance
                ),
            ));
        }
        require_finite("z1", self.mirror_distance)?;
        require_finite("Z1", self.laser_distance)?;
        require_finite("ZM", self.mirror_source_distance)?;
        require_finite("k", self.wavenumber)?;
        require_finite("phi", self.phase)?;
        require_non_negative("alpha", self.amplitude)?;
        Ok(())
    }

    /// `sqrt(R_m)`, the mirror amplitude reflectance.
    pub fn sqrt_mirror_reflectance(&self) -> f64 {
        self.mirror_reflectance.sqrt()
    }
}

fn phase(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

/// Vacuum field arriving at the detector through the `a1` port.
pub fn detected_field_expression(p: &OpticalNetworkParams) -> Result<ModeExpression> {
    p.validate()?;
    let k = p.wavenumber;
    let z1 = p.mirror_distance;
    let (t, r) = (p.transmittance, p.reflectance);
    let sqrt_rm = p.sqrt_mirror_reflectance();

    // Outgoing copy of a1 and the copy that went to the mirror and back.
    let a1 = phase(k * z1) * p.mu - phase(-k * z1) * (r * sqrt_rm);
    let a2 = -phase(-k * z1) * (r * t * p.mirror_reflectance).sqrt();
    let b = phase(-k * p.laser_distance) * t.sqrt();
    let d = phase(-k * p.mirror_source_distance) * (r * p.mirror_transmittance).sqrt();

    Ok(ModeExpression::zero()
        .with(ModeLabel::A1, a1)
        .with(ModeLabel::A2, a2)
        .with(ModeLabel::B, b)
        .with(ModeLabel::D, d))
}

/// Linearized photocurrent with the dc term dropped: the beat of the
/// transmitted local oscillator `sqrt(T) |alpha| e^{i phi} / sqrt(2)` against
/// every vacuum mode at the detector.
pub fn photocurrent_expression(p: &OpticalNetworkParams) -> Result<ModeExpression> {
    let field = detected_field_expression(p)?;
    let beat = phase(p.phase) * (p.amplitude * p.transmittance.sqrt() / 2f64.sqrt());
    Ok(field.scaled(beat))
}

/// Vacuum expectation of the squared Hermitian observable.
pub fn vacuum_variance(expr: &ModeExpression) -> f64 {
    expr.terms().map(|(_, c)| c.norm_sqr()).sum()
}

/// Beam splitter outputs `(a1_out, a2_out)` with the mirror loop expanded:
/// `c = sqrt(T_m) d - sqrt(R_m) (sqrt(R) a1 + sqrt(T) a2)`.
pub fn splitter_output_modes(p: &OpticalNetworkParams) -> Result<(ModeExpression, ModeExpression)> {
    p.validate()?;
    let st = Complex64::from(p.transmittance.sqrt());
    let sr = Complex64::from(p.reflectance.sqrt());
    let b = ModeExpression::single(ModeLabel::B, Complex64::from(1.0));
    let c_out = ModeExpression::zero().with(ModeLabel::A1, sr).with(ModeLabel::A2, st);
    let c = ModeExpression::single(ModeLabel::D, Complex64::from(p.mirror_transmittance.sqrt()))
        .plus(&c_out.scaled(Complex64::from(-p.sqrt_mirror_reflectance())));

    let a1_out = b.scaled(st).plus(&c.scaled(sr));
    let a2_out = b.scaled(-sr).plus(&c.scaled(st));
    Ok((a1_out, a2_out))
}
