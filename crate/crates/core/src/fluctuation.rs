//! Photocurrent fluctuation with a mirror on the unused splitter port.
//!
//! All variances are in units where a lone vacuum mode beating against the
//! local oscillator gives the shot-noise level `|alpha|^2 T / 2`.

use rayon::prelude::*;

use crate::beam_optics::rayleigh_range;
use crate::error::{require_finite, require_non_negative, require_positive, Error, Result};
use crate::mode_network::OpticalNetworkParams;
use crate::overlap::{mu_closed, rm_closed};

/// Slack below 1 required before a normalized variance counts as sub-Poisson.
pub const SUB_POISSON_SLACK: f64 = 1e-12;

/// Local oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserModel {
    /// `|alpha|`.
    pub amplitude: f64,
    pub phase: f64,
    /// Carrier wavenumber `k0 = 2 pi / lambda`.
    pub wavenumber: f64,
    /// Width `dk` of the Gaussian wavenumber distribution.
    pub linewidth: f64,
}

impl LaserModel {
    pub fn new(amplitude: f64, phase: f64, wavenumber: f64, linewidth: f64) -> Result<Self> {
        let laser = Self {
            amplitude,
            phase,
            wavenumber,
            linewidth,
        };
        laser.validate()?;
        Ok(laser)
    }

    /// Unit amplitude, zero phase and linewidth, unit wavelength.
    pub fn monochromatic() -> Self {
        Self {
            amplitude: 1.0,
            phase: 0.0,
            wavenumber: 2.0 * std::f64::consts::PI,
            linewidth: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_non_negative("alpha", self.amplitude)?;
        require_finite("phi", self.phase)?;
        require_positive("k0", self.wavenumber)?;
        require_non_negative("dk", self.linewidth)?;
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavenumber
    }

    /// Shot-noise level `|alpha|^2 T / 2`.
    pub fn shot_noise(&self, transmittance: f64) -> f64 {
        self.amplitude * self.amplitude * transmittance / 2.0
    }
}

/// Photodetector with exponential absorption over a finite active depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    /// Absorption coefficient `kappa`.
    pub absorption: f64,
    /// Active depth `D`.
    pub depth: f64,
}

impl DetectorModel {
    pub fn new(absorption: f64, depth: f64) -> Result<Self> {
        Ok(Self {
            absorption: require_positive("kappa", absorption)?,
            depth: require_non_negative("D", depth)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.absorption, self.depth).map(|_| ())
    }

    /// `1 - exp(-kappa D)`.
    pub fn absorbed_fraction(&self) -> f64 {
        -(-self.absorption * self.depth).exp_m1()
    }
}

fn interference_strength(p: &OpticalNetworkParams) -> f64 {
    2.0 * p.mu * p.reflectance * p.sqrt_mirror_reflectance()
}

/// `|alpha|^2 T/2 {1 + mu^2 - 2 mu R sqrt(R_m) cos(2 k0 z1)}`.
///
/// Amplitude and wavenumber are taken from `laser`; the corresponding fields
/// of `p` are not used.
pub fn ideal_variance(p: &OpticalNetworkParams, laser: &LaserModel) -> Result<f64> {
    p.validate()?;
    laser.validate()?;
    let modulation = (2.0 * laser.wavenumber * p.mirror_distance).cos();
    Ok(laser.shot_noise(p.transmittance) * (1.0 + p.mu * p.mu - interference_strength(p) * modulation))
}

/// Absorption-weighted average of the standing-wave modulation over the
/// active depth,
///
/// `int_0^D kappa e^{-kappa eta} cos(2 k0 (z1 + eta)) d eta
///   = kappa [cos(2 k0 z1 + phi0) - e^{-kappa D} cos(2 k0 (z1 + D) + phi0)] / sqrt(4 k0^2 + kappa^2)`
///
/// with `phi0 = atan(2 k0 / kappa)`.
pub fn detector_response_factor(det: &DetectorModel, wavenumber: f64, z1: f64) -> f64 {
    let kappa = det.absorption;
    let two_k = 2.0 * wavenumber;
    let phi0 = (two_k / kappa).atan();
    let front = (two_k * z1 + phi0).cos();
    let back = (-kappa * det.depth).exp() * (two_k * (z1 + det.depth) + phi0).cos();
    kappa * (front - back) / two_k.hypot(kappa)
}

/// Ideal variance corrected for the local-oscillator linewidth envelope
/// `exp(-z1^2 dk^2)` and the finite absorption depth of the detector.
pub fn practical_variance(p: &OpticalNetworkParams, laser: &LaserModel, det: &DetectorModel) -> Result<f64> {
    p.validate()?;
    laser.validate()?;
    det.validate()?;
    let z1 = p.mirror_distance;
    let envelope = (-(z1 * laser.linewidth).powi(2)).exp();
    let response = detector_response_factor(det, laser.wavenumber, z1);
    Ok(laser.shot_noise(p.transmittance) * (1.0 + p.mu * p.mu - interference_strength(p) * envelope * response))
}

/// Which fluctuation formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceModel {
    Ideal,
    Practical(DetectorModel),
}

impl VarianceModel {
    pub fn variance(&self, p: &OpticalNetworkParams, laser: &LaserModel) -> Result<f64> {
        match self {
            VarianceModel::Ideal => ideal_variance(p, laser),
            VarianceModel::Practical(det) => practical_variance(p, laser, det),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            VarianceModel::Ideal => "ideal",
            VarianceModel::Practical(_) => "practical",
        }
    }
}

/// Variance relative to the shot-noise level; below 1 means sub-Poisson.
pub fn normalized_variance(p: &OpticalNetworkParams, laser: &LaserModel, model: &VarianceModel) -> Result<f64> {
    let baseline = laser.shot_noise(p.transmittance);
    if baseline == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok(model.variance(p, laser)? / baseline)
}

pub fn is_sub_poisson(normalized: f64) -> bool {
    normalized < 1.0 - SUB_POISSON_SLACK
}

/// Source of `mu` and `sqrt(R_m)` at each mirror distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeMatching {
    /// Use the values already in the network parameters.
    Fixed,
    /// Laser and vacuum share waist `w0` at the detector: `mu` from the
    /// round-trip closed form, `sqrt(R_m) = 1`.
    DetectorWaist { w0: f64 },
    /// Vacuum waist `wm` on the mirror, laser waist `w0` on the detector:
    /// `mu = 1`, `sqrt(R_m)` from the closed form.
    MirrorWaist { w0: f64, wm: f64 },
}

impl ModeMatching {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModeMatching::Fixed => Ok(()),
            ModeMatching::DetectorWaist { w0 } => require_positive("w0", w0).map(|_| ()),
            ModeMatching::MirrorWaist { w0, wm } => {
                require_positive("w0", w0)?;
                require_positive("wm", wm).map(|_| ())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModeMatching::Fixed => "fixed",
            ModeMatching::DetectorWaist { .. } => "detector_waist",
            ModeMatching::MirrorWaist { .. } => "mirror_waist",
        }
    }

    /// Copy of `template` at mirror distance `z1` with `mu` and `R_m` set by
    /// this rule (`T_m = 1 - R_m`).
    pub fn apply(&self, template: &OpticalNetworkParams, z1: f64, wavelength: f64) -> OpticalNetworkParams {
        let mut p = *template;
        p.mirror_distance = z1;
        let coupled = match *self {
            ModeMatching::Fixed => None,
            ModeMatching::DetectorWaist { w0 } => Some((mu_closed(z1, rayleigh_range(w0, wavelength)), 1.0)),
            ModeMatching::MirrorWaist { w0, wm } => Some((1.0, rm_closed(z1, w0, wm, wavelength))),
        };
        if let Some((mu, sqrt_rm)) = coupled {
            p.mu = mu;
            p.mirror_reflectance = sqrt_rm * sqrt_rm;
            p.mirror_transmittance = 1.0 - p.mirror_reflectance;
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub z1: f64,
    pub mu: f64,
    pub sqrt_rm: f64,
    pub normalized_variance: f64,
    pub is_sub_poisson: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubPoissonScan {
    pub matching: ModeMatching,
    pub model: VarianceModel,
    pub points: Vec<ScanPoint>,
    /// Index into `points` of the smallest normalized variance (first on ties).
    pub minimum: usize,
}

impl SubPoissonScan {
    pub fn minimum_point(&self) -> &ScanPoint {
        &self.points[self.minimum]
    }

    pub fn sub_poisson_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_sub_poisson).count()
    }
}

/// Samples the normalized variance uniformly over `z1 in [start, stop]`.
pub fn sub_poisson_scan(
    template: &OpticalNetworkParams,
    laser: &LaserModel,
    model: &VarianceModel,
    matching: ModeMatching,
    z1_range: (f64, f64),
    samples: usize,
) -> Result<SubPoissonScan> {
    let (start, stop) = z1_range;
    if samples < 2 {
        return Err(Error::invalid("samples", format!("need at least 2, got {samples}")));
    }
    require_non_negative("z1 start", start)?;
    require_finite("z1 stop", stop)?;
    if stop <= start {
        return Err(Error::invalid("z1 stop", format!("range [{start}, {stop}] is empty")));
    }
    laser.validate()?;
    matching.validate()?;
    let wavelength = laser.wavelength();
    let last = (samples - 1) as f64;

    let points = (0..samples)
        .into_par_iter()
        .map(|i| {
            let z1 = if i + 1 == samples {
                stop
            } else {
                start + (stop - start) * (i as f64 / last)
            };
            let p = matching.apply(template, z1, wavelength);
            let normalized = normalized_variance(&p, laser, model)?;
            Ok(ScanPoint {
                z1,
                mu: p.mu,
                sqrt_rm: p.sqrt_mirror_reflectance(),
                normalized_variance: normalized,
                is_sub_poisson: is_sub_poisson(normalized),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let minimum = points.iter().enumerate().fold(0, |best, (i, pt)| {
        if pt.normalized_variance < points[best].normalized_variance {
            i
        } else {
            best
        }
    });
    Ok(SubPoissonScan {
        matching,
        model: *model,
        points,
        minimum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};
    use std::f64::consts::PI;

    const K0: f64 = 2.0 * PI;

    fn laser(alpha2: f64) -> LaserModel {
        LaserModel::new(alpha2.sqrt(), 0.0, K0, 0.0).unwrap()
    }

    fn net(t: f64, rm: f64, mu: f64, z1: f64) -> OpticalNetworkParams {
        OpticalNetworkParams::lossless(t, rm, mu, z1)
    }

    fn depth_average(det: &DetectorModel, z1: f64) -> f64 {
        let kappa = det.absorption;
        integrate(
            |eta: f64| kappa * (-kappa * eta).exp() * (2.0 * K0 * (z1 + eta)).cos(),
            0.0,
            det.depth,
            Tolerance::absolute(1e-13),
        )
        .unwrap()
        .value
    }

    #[test]
    fn ideal_examples() {
        let v = ideal_variance(&net(0.5, 0.7, 0.0, 0.3), &laser(2.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        // Perfect loop: T = 0 makes the shot-noise level zero as well, so use
        // the normalized bracket with |alpha|^2 T / 2 = 1.
        let v = ideal_variance(&net(0.0, 1.0, 1.0, 0.0), &laser(2.0)).unwrap();
        assert_eq!(v, 0.0);
        let v = ideal_variance(&net(0.5, 1.0, 1.0, 0.0), &laser(2.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn normalized_examples() {
        let model = VarianceModel::Ideal;
        let n = normalized_variance(&net(0.5, 1.0, 0.0, 0.0), &laser(1.0), &model).unwrap();
        assert!((n - 1.0).abs() < 1e-15);
        let n = normalized_variance(&net(0.25, 1.0, 1.0, 0.0), &laser(1.0), &model).unwrap();
        assert!((n - 0.5).abs() < 1e-15);
        let n = normalized_variance(&net(0.5, 1.0, 1.0, 0.0), &laser(1.0), &model).unwrap();
        assert!((n - 1.0).abs() < 1e-15);
        assert!(!is_sub_poisson(n));
    }

    #[test]
    fn normalized_rejects_zero_baseline() {
        let model = VarianceModel::Ideal;
        assert_eq!(
            normalized_variance(&net(0.0, 1.0, 1.0, 0.0), &laser(1.0), &model),
            Err(Error::ZeroBaseline)
        );
        assert_eq!(
            normalized_variance(&net(0.5, 1.0, 1.0, 0.0), &laser(0.0), &model),
            Err(Error::ZeroBaseline)
        );
    }

    #[test]
    fn detector_factor_zero_depth() {
        let det = DetectorModel::new(3.0, 0.0).unwrap();
        assert_eq!(detector_response_factor(&det, K0, 0.37), 0.0);
    }

    #[test]
    fn detector_factor_surface_limit() {
        let kappa = 1e6 * K0;
        let det = DetectorModel::new(kappa, 1.0).unwrap();
        for z1 in [0.0, 0.1, 0.25, 0.33, 7.9] {
            let f = detector_response_factor(&det, K0, z1);
            assert!((f - (2.0 * K0 * z1).cos()).abs() < 1e-5);
        }
    }

    #[test]
    fn detector_factor_matches_quadrature() {
        for &(kappa, depth, z1) in &[(0.5, 3.0, 0.1), (20.0, 0.05, 1.7), (6.0, 10.0, 0.0), (1e-3, 2.0, 0.4)] {
            let det = DetectorModel::new(kappa, depth).unwrap();
            let closed = detector_response_factor(&det, K0, z1);
            let numeric = depth_average(&det, z1);
            assert!(
                (closed - numeric).abs() < 1e-9,
                "{kappa} {depth} {z1}: {closed} vs {numeric}"
            );
        }
    }

    #[test]
    fn detector_validation() {
        assert!(DetectorModel::new(0.0, 1.0).is_err());
        assert!(DetectorModel::new(1.0, -1.0).is_err());
        let det = DetectorModel::new(2.0, 0.5).unwrap();
        assert!((det.absorbed_fraction() - (1.0 - (-1f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn practical_limits() {
        let p = net(0.4, 0.81, 0.7, 0.13);
        let l = laser(3.0);
        let ideal = ideal_variance(&p, &l).unwrap();
        let surface = DetectorModel::new(1e6 * K0, 1.0).unwrap();
        let v = practical_variance(&p, &l, &surface).unwrap();
        assert!((v - ideal).abs() < 1e-5);

        let flat = l.shot_noise(0.4) * (1.0 + 0.49);
        let thin = DetectorModel::new(10.0 * K0, 0.0).unwrap();
        assert!((practical_variance(&p, &l, &thin).unwrap() - flat).abs() < 1e-15);

        let broad = LaserModel::new(3f64.sqrt(), 0.0, K0, 100.0).unwrap();
        assert!((practical_variance(&p, &broad, &surface).unwrap() - flat).abs() < 1e-12);
    }

    #[test]
    fn scan_finds_minima() {
        let model = VarianceModel::Ideal;
        let scan = sub_poisson_scan(
            &net(0.1, 1.0, 1.0, 0.0),
            &laser(1.0),
            &model,
            ModeMatching::Fixed,
            (0.0, 2.0),
            9,
        )
        .unwrap();
        let min = scan.minimum_point();
        assert!((min.normalized_variance - 0.2).abs() < 1e-12);
        assert_eq!(min.z1, 0.0);
        for pt in &scan.points {
            let n = (pt.z1 * 2.0).round();
            if (pt.z1 * 2.0 - n).abs() < 1e-12 {
                assert!((pt.normalized_variance - 0.2).abs() < 1e-12);
            }
        }

        let none = sub_poisson_scan(
            &net(0.5, 1.0, 1.0, 0.0),
            &laser(1.0),
            &model,
            ModeMatching::Fixed,
            (0.0, 2.0),
            81,
        )
        .unwrap();
        assert_eq!(none.sub_poisson_count(), 0);
        let zero_mu = sub_poisson_scan(
            &net(0.1, 1.0, 0.0, 0.0),
            &laser(1.0),
            &model,
            ModeMatching::Fixed,
            (0.0, 2.0),
            17,
        )
        .unwrap();
        assert_eq!(zero_mu.sub_poisson_count(), 0);
    }

    #[test]
    fn scan_with_broad_linewidth_flags_nothing() {
        let det = DetectorModel::new(1e6 * K0, 1.0).unwrap();
        let model = VarianceModel::Practical(det);
        let l = LaserModel::new(1.0, 0.0, K0, 50.0).unwrap();
        let scan = sub_poisson_scan(
            &net(0.1, 1.0, 1.0, 0.0),
            &l,
            &model,
            ModeMatching::Fixed,
            (1.0, 5.0),
            101,
        )
        .unwrap();
        assert_eq!(scan.sub_poisson_count(), 0);
    }

    #[test]
    fn scan_geometry_coupling() {
        let model = VarianceModel::Ideal;
        let z0 = rayleigh_range(1.0, 1.0);
        let scan = sub_poisson_scan(
            &net(0.1, 1.0, 1.0, 0.0),
            &laser(1.0),
            &model,
            ModeMatching::DetectorWaist { w0: 1.0 },
            (0.0, z0),
            3,
        )
        .unwrap();
        assert_eq!(scan.points[0].mu, 1.0);
        assert!((scan.points[2].mu - 2f64.powf(-0.25)).abs() < 1e-15);
        assert_eq!(scan.points[2].sqrt_rm, 1.0);

        let scan = sub_poisson_scan(
            &net(0.1, 0.3, 0.2, 0.0),
            &laser(1.0),
            &model,
            ModeMatching::MirrorWaist { w0: 100.0, wm: 100.0 },
            (0.0, 1.0),
            2,
        )
        .unwrap();
        assert_eq!(scan.points[0].mu, 1.0);
        assert!((scan.points[0].sqrt_rm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scan_rejects_bad_ranges() {
        let model = VarianceModel::Ideal;
        let p = net(0.5, 1.0, 1.0, 0.0);
        assert!(sub_poisson_scan(&p, &laser(1.0), &model, ModeMatching::Fixed, (0.0, 1.0), 1).is_err());
        assert!(sub_poisson_scan(&p, &laser(1.0), &model, ModeMatching::Fixed, (1.0, 1.0), 5).is_err());
        assert!(sub_poisson_scan(
            &p,
            &laser(1.0),
            &model,
            ModeMatching::DetectorWaist { w0: 0.0 },
            (0.0, 1.0),
            5
        )
        .is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ideal_is_periodic_and_bounded(
                t in 0.01f64..=1.0, rm in 0.0f64..=1.0, mu in 0.0f64..=1.0, z1 in 0.0f64..100.0, n in 1u32..50,
            ) {
                let l = laser(1.0);
                let v = ideal_variance(&net(t, rm, mu, z1), &l).unwrap();
                let period = PI / K0;
                let shifted = ideal_variance(&net(t, rm, mu, z1 + n as f64 * period), &l).unwrap();
                prop_assert!((v - shifted).abs() < 1e-11);
                let s = l.shot_noise(t);
                let amp = 2.0 * mu * (1.0 - t) * rm.sqrt();
                prop_assert!(v >= s * (1.0 + mu * mu - amp) - 1e-14);
                prop_assert!(v <= s * (1.0 + mu * mu + amp) + 1e-14);
            }

            #[test]
            fn detector_factor_bound(kappa in 1e-3f64..1e3, depth in 0.0f64..20.0, z1 in 0.0f64..10.0) {
                let det = DetectorModel::new(kappa, depth).unwrap();
                let f = detector_response_factor(&det, K0, z1);
                let bound = kappa / (4.0 * K0 * K0 + kappa * kappa).sqrt() * (1.0 + (-kappa * depth).exp());
                prop_assert!(f.abs() <= bound + 1e-15);
            }

            #[test]
            fn practical_is_non_negative(
                t in 0.0f64..=1.0, rm in 0.0f64..=1.0, mu in 0.0f64..=1.0, z1 in 0.0f64..10.0,
                kappa in 1e-2f64..1e4, depth in 0.0f64..5.0, dk in 0.0f64..2.0,
            ) {
                let l = LaserModel::new(1.3, 0.0, K0, dk).unwrap();
                let det = DetectorModel::new(kappa, depth).unwrap();
                prop_assert!(practical_variance(&net(t, rm, mu, z1), &l, &det).unwrap() >= 0.0);
            }
        }

        #[test]
        fn detector_factor_vanishes_for_weak_absorption() {
            let mut last = f64::INFINITY;
            for kappa in [1e-2, 1e-4, 1e-6, 1e-8] {
                let det = DetectorModel::new(kappa, 1.3).unwrap();
                let f = detector_response_factor(&det, K0, 0.2).abs();
                assert!(f < last);
                last = f;
            }
            assert!(last < 1e-7);
        }

        #[test]
        fn linewidth_drives_towards_flat_level() {
            let p = net(0.3, 0.9, 0.8, 1.0);
            let det = DetectorModel::new(40.0, 0.2).unwrap();
            let flat = laser(1.0).shot_noise(0.3) * (1.0 + 0.64);
            let mut last_gap = f64::INFINITY;
            for dk in [0.0, 0.5, 1.0, 2.0, 4.0] {
                let l = LaserModel::new(1.0, 0.0, K0, dk).unwrap();
                let gap = (practical_variance(&p, &l, &det).unwrap() - flat).abs();
                assert!(gap <= last_gap);
                last_gap = gap;
            }
            assert!(last_gap < 1e-6);
        }
    }
}
