//! Fixed inputs shared by the criterion benches.

use mirrorvac::fluctuation::{DetectorModel, LaserModel};
use mirrorvac::sweep::{Axis, Param};
use mirrorvac::{GaussianBeam, OpticalNetworkParams, Quantity, SweepSpec};

/// A network with every coefficient non-trivial.
pub fn network() -> OpticalNetworkParams {
    let mut p = OpticalNetworkParams::lossless(0.3, 0.8, 0.7, 1.37);
    p.phase = 0.4;
    p.laser_distance = 12.0;
    p.mirror_source_distance = 5.0;
    p
}

pub fn laser() -> LaserModel {
    LaserModel::new(1.0, 0.0, 2.0 * std::f64::consts::PI, 0.05).unwrap()
}

pub fn detector() -> DetectorModel {
    DetectorModel::new(40.0, 2.5).unwrap()
}

pub fn beam(w0: f64) -> GaussianBeam {
    GaussianBeam::with_waist(w0).unwrap()
}

/// A 40 x 50 practical-variance grid.
pub fn practical_grid() -> SweepSpec {
    SweepSpec::new(Quantity::PracticalVariance)
        .with_fixed(Param::T, 0.2)
        .with_fixed(Param::Rm, 1.0)
        .with_fixed(Param::Mu, 0.9)
        .with_axis(Axis::log(Param::Kappa, 1.0, 1e3, 40))
        .with_axis(Axis::linear(Param::Z1, 0.0, 5.0, 50))
}
