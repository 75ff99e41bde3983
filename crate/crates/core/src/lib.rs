//! Vacuum-fluctuation modulation by a mirror on the unused port of a beam
//! splitter.
//!
//! The crate models a homodyne-style photocurrent whose noise depends on the
//! mirror-detector distance `z1`:
//!
//! * [`beam_optics`]: Gaussian TEM00 propagation.
//! * [`overlap`]: mode-matching coefficients `mu` and `sqrt(R_m)`, closed
//!   forms plus a transverse-quadrature overlap.
//! * [`mode_network`]: the splitter/mirror mode relations and the vacuum
//!   variance of the linearized photocurrent.
//! * [`fluctuation`]: ideal and practical (linewidth, absorption depth)
//!   fluctuation formulas and sub-Poisson scans.
//! * [`sweep`]: deterministic parameter grids, figure datasets and CSV.
//! * [`validation`]: cross-checks between independent derivations.
//!
//! Lengths are in units of the wavelength by default (`k0 = 2 pi`).

pub mod beam_optics;
mod error;
pub mod fluctuation;
pub mod mode_network;
pub mod overlap;
pub mod quadrature;
pub mod sweep;
pub mod validation;

pub use beam_optics::GaussianBeam;
pub use error::{Error, Result};
pub use fluctuation::{
    detector_response_factor, ideal_variance, normalized_variance, practical_variance, sub_poisson_scan, DetectorModel,
    LaserModel, ModeMatching, SubPoissonScan, VarianceModel,
};
pub use mode_network::{ModeExpression, ModeLabel, OpticalNetworkParams};
pub use overlap::{mu_closed, overlap_numeric, rm_closed, InnerProductKind, OverlapScenario};
pub use sweep::{run_sweep, run_sweep_with_workers, Quantity, SweepResult, SweepSpec};
