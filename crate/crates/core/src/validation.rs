//! Cross-checks between independent derivations, run by `mirrorvac validate`.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fluctuation::{detector_response_factor, ideal_variance, practical_variance, DetectorModel, LaserModel};
use crate::mode_network::{photocurrent_expression, vacuum_variance, OpticalNetworkParams};
use crate::overlap::{mu_effective, rm_effective, CoefficientMethod, InnerProductKind, OverlapScenario};
use crate::quadrature::{integrate, Tolerance};

pub const DEFAULT_SEED: u64 = 20_240_917;

pub const MODENET_DRAWS: usize = 10_000;
pub const MODENET_TOLERANCE: f64 = 1e-12;
pub const DETECTOR_POINTS: usize = 1_000;
pub const DETECTOR_TOLERANCE: f64 = 1e-9;
pub const LIMIT_RELATIVE_TOLERANCE: f64 = 1e-5;
pub const FLAT_LIMIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Modenet,
    Detector,
    Overlap,
    Limits,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Modenet, Suite::Detector, Suite::Overlap, Suite::Limits];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Modenet => "modenet",
            Suite::Detector => "detector",
            Suite::Overlap => "overlap",
            Suite::Limits => "limits",
        }
    }

    /// Report-only suites never fail the run.
    pub fn is_mandatory(self) -> bool {
        self != Suite::Overlap
    }

    pub fn run(self, seed: u64) -> Result<SuiteReport> {
        match self {
            Suite::Modenet => modenet(seed),
            Suite::Detector => detector(seed),
            Suite::Overlap => overlap(),
            Suite::Limits => limits(),
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    /// Largest deviation seen, where the suite measures one.
    pub worst: Option<f64>,
    pub lines: Vec<String>,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (self.passed, self.suite.is_mandatory()) {
            (_, false) => "REPORT",
            (true, true) => "PASS",
            (false, true) => "FAIL",
        };
        writeln!(f, "== {} [{status}]", self.suite.name())?;
        for line in &self.lines {
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

fn modenet(seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0f64, None);
    for _ in 0..MODENET_DRAWS {
        let t: f64 = rng.gen_range(0.0..=1.0);
        let rm: f64 = rng.gen_range(0.0..=1.0);
        let mu: f64 = rng.gen_range(0.0..=1.0);
        let kz1: f64 = rng.gen_range(0.0..1e3);
        let mut p = OpticalNetworkParams::lossless(t, rm, mu, 0.0);
        p.mirror_distance = kz1 / p.wavenumber;
        p.phase = rng.gen_range(-PI..PI);
        p.laser_distance = rng.gen_range(-1e3..1e3);
        p.mirror_source_distance = rng.gen_range(-1e3..1e3);
        let laser = LaserModel::new(p.amplitude, p.phase, p.wavenumber, 0.0)?;

        let from_modes = vacuum_variance(&photocurrent_expression(&p)?);
        let closed = ideal_variance(&p, &laser)?;
        let dev = (from_modes - closed).abs();
        if dev >= worst.0 {
            worst = (dev, Some(p));
        }
    }
    let passed = worst.0 < MODENET_TOLERANCE;
    let mut lines = vec![
        format!("draws = {MODENET_DRAWS}, seed = {seed}"),
        format!(
            "max |mode sum - closed form| = {:.3e} (tolerance {MODENET_TOLERANCE:e})",
            worst.0
        ),
    ];
    if let Some(p) = worst.1 {
        lines.push(format!(
            "worst at T={:.6} Rm={:.6} mu={:.6} k z1={:.6}",
            p.transmittance,
            p.mirror_reflectance,
            p.mu,
            p.wavenumber * p.mirror_distance
        ));
    }
    Ok(SuiteReport {
        suite: Suite::Modenet,
        passed,
        worst: Some(worst.0),
        lines,
    })
}

/// `int_0^D kappa e^{-kappa eta} cos(2 k0 (z1 + eta)) d eta` by quadrature.
pub fn detector_factor_by_quadrature(det: &DetectorModel, wavenumber: f64, z1: f64) -> Result<f64> {
    let kappa = det.absorption;
    let two_k = 2.0 * wavenumber;
    Ok(integrate(
        |eta: f64| kappa * (-kappa * eta).exp() * (two_k * (z1 + eta)).cos(),
        0.0,
        det.depth,
        Tolerance::absolute(1e-13),
    )?
    .value)
}

/// Random detector configurations with `kappa D` log-uniform in
/// `[1e-3, 1e2]` and `kappa` log-uniform in `[0.1, 100] k0`.
pub fn detector_sample<R: Rng>(rng: &mut R, wavenumber: f64) -> (DetectorModel, f64) {
    let kappa = wavenumber * 10f64.powf(rng.gen_range(-1.0..=2.0));
    let optical_depth = 10f64.powf(rng.gen_range(-3.0..=2.0));
    let z1 = rng.gen_range(0.0..10.0);
    let det = DetectorModel {
        absorption: kappa,
        depth: optical_depth / kappa,
    };
    (det, z1)
}

fn detector(seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k0 = 2.0 * PI;
    let mut worst = (0.0f64, (0.0, 0.0, 0.0));
    for _ in 0..DETECTOR_POINTS {
        let (det, z1) = detector_sample(&mut rng, k0);
        let closed = detector_response_factor(&det, k0, z1);
        let numeric = detector_factor_by_quadrature(&det, k0, z1)?;
        let dev = (closed - numeric).abs();
        if dev >= worst.0 {
            worst = (dev, (det.absorption, det.depth, z1));
        }
    }
    let passed = worst.0 < DETECTOR_TOLERANCE;
    let (kappa, depth, z1) = worst.1;
    Ok(SuiteReport {
        suite: Suite::Detector,
        passed,
        worst: Some(worst.0),
        lines: vec![
            format!("points = {DETECTOR_POINTS}, seed = {seed}, kappa D in [1e-3, 1e2]"),
            format!(
                "max |closed - quadrature| = {:.3e} (tolerance {DETECTOR_TOLERANCE:e})",
                worst.0
            ),
            format!("worst at kappa={kappa:.6e} D={depth:.6e} z1={z1:.6}"),
        ],
    })
}

/// One row of the overlap comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapRow {
    pub waist: f64,
    /// `z1 / z0` of the relevant beam.
    pub u: f64,
    pub closed: f64,
    pub conjugated: f64,
    pub nonconjugated: f64,
}

/// `mu`: closed form vs quadrature under both normalizations.
pub fn mu_comparison(waists: &[f64], us: &[f64]) -> Result<Vec<OverlapRow>> {
    let mut rows = Vec::new();
    for &w0 in waists {
        for &u in us {
            let z0 = crate::beam_optics::rayleigh_range(w0, 1.0);
            let s = OverlapScenario::detector_waist(w0, u * z0, 1.0)?;
            rows.push(OverlapRow {
                waist: w0,
                u,
                closed: mu_effective(&s, CoefficientMethod::ClosedForm)?,
                conjugated: mu_effective(&s, CoefficientMethod::Numeric(InnerProductKind::Conjugated))?,
                nonconjugated: mu_effective(&s, CoefficientMethod::Numeric(InnerProductKind::Nonconjugated))?,
            });
        }
    }
    Ok(rows)
}

/// `sqrt(R_m)` with `w0 = 100`: closed form vs quadrature. `waist` is `wm`,
/// `u` is `z1 / z0` of the laser beam.
pub fn rm_comparison(wms: &[f64], us: &[f64]) -> Result<Vec<OverlapRow>> {
    let w0 = 100.0;
    let z0 = crate::beam_optics::rayleigh_range(w0, 1.0);
    let mut rows = Vec::new();
    for &wm in wms {
        for &u in us {
            let s = OverlapScenario::mirror_waist(w0, wm, u * z0, 1.0)?;
            rows.push(OverlapRow {
                waist: wm,
                u,
                closed: rm_effective(&s, CoefficientMethod::ClosedForm)?,
                conjugated: rm_effective(&s, CoefficientMethod::Numeric(InnerProductKind::Conjugated))?,
                nonconjugated: rm_effective(&s, CoefficientMethod::Numeric(InnerProductKind::Nonconjugated))?,
            });
        }
    }
    Ok(rows)
}

/// Largest `|closed^2 - conjugated|` over the rows.
pub fn squared_gap(rows: &[OverlapRow]) -> f64 {
    rows.iter()
        .map(|r| (r.closed * r.closed - r.conjugated).abs())
        .fold(0.0, f64::max)
}

fn overlap() -> Result<SuiteReport> {
    let us = [0.0, 0.25, 0.5, 1.0, 2.0, 5.0];
    let mu_rows = mu_comparison(&[1.0, 100.0], &us)?;
    let rm_rows = rm_comparison(&[50.0, 100.0, 200.0], &us)?;
    let mut lines = vec!["mu (detector waist): closed form vs quadrature".to_string()];
    lines.push(format!(
        "{:>8} {:>6} {:>14} {:>14} {:>14} {:>14}",
        "w0", "u", "closed", "conjugated", "(1+u^2)^-1/2", "nonconjugated"
    ));
    for r in &mu_rows {
        lines.push(format!(
            "{:>8} {:>6} {:>14.10} {:>14.10} {:>14.10} {:>14.10}",
            r.waist,
            r.u,
            r.closed,
            r.conjugated,
            (1.0 + r.u * r.u).powf(-0.5),
            r.nonconjugated
        ));
    }
    let agree = |rows: &[OverlapRow], pick: fn(&OverlapRow) -> f64| {
        rows.iter().map(|r| (r.closed - pick(r)).abs()).fold(0.0, f64::max)
    };
    lines.push(format!(
        "max |closed - conjugated| = {:.3e}, max |closed - nonconjugated| = {:.3e}",
        agree(&mu_rows, |r| r.conjugated),
        agree(&mu_rows, |r| r.nonconjugated)
    ));
    lines.push(format!("max |closed^2 - conjugated| = {:.3e}", squared_gap(&mu_rows)));
    lines.push("sqrt(Rm) (mirror waist, w0 = 100): closed form vs quadrature".to_string());
    lines.push(format!(
        "{:>8} {:>6} {:>14} {:>14} {:>14}",
        "wm", "u", "closed", "conjugated", "nonconjugated"
    ));
    for r in &rm_rows {
        lines.push(format!(
            "{:>8} {:>6} {:>14.10} {:>14.10} {:>14.10}",
            r.waist, r.u, r.closed, r.conjugated, r.nonconjugated
        ));
    }
    lines.push(format!(
        "max |closed - conjugated| = {:.3e}, max |closed - nonconjugated| = {:.3e}",
        agree(&rm_rows, |r| r.conjugated),
        agree(&rm_rows, |r| r.nonconjugated)
    ));
    lines.push(format!("max |closed^2 - conjugated| = {:.3e}", squared_gap(&rm_rows)));
    lines.push("report only: the closed forms are used by the fluctuation model regardless".to_string());
    Ok(SuiteReport {
        suite: Suite::Overlap,
        passed: true,
        worst: None,
        lines,
    })
}

/// Parameter sets for the limit checks: `R <= 1/2` keeps the ideal variance
/// at or above `3/4` of shot noise so relative errors are meaningful.
pub fn limit_parameter_grid() -> Vec<OpticalNetworkParams> {
    let mut out = Vec::new();
    for t in [0.5, 0.7, 0.9] {
        for mu in [0.0, 0.5, 1.0] {
            for rm in [0.25, 1.0] {
                for z1 in [0.0, 0.125, 0.25, 0.5, 1.1, 3.3] {
                    out.push(OpticalNetworkParams::lossless(t, rm, mu, z1));
                }
            }
        }
    }
    out
}

fn limits() -> Result<SuiteReport> {
    let k0 = 2.0 * PI;
    let laser = LaserModel::new(2f64.sqrt(), 0.0, k0, 0.0)?;
    let surface = DetectorModel::new(1e6 * k0, 1.0)?;
    let flat_detector = DetectorModel::new(10.0 * k0, 0.0)?;

    let mut surface_worst = 0.0f64;
    let mut thin_worst = 0.0f64;
    let mut linewidth_worst = 0.0f64;
    for p in limit_parameter_grid() {
        let ideal = ideal_variance(&p, &laser)?;
        let practical = practical_variance(&p, &laser, &surface)?;
        surface_worst = surface_worst.max((practical - ideal).abs() / ideal);

        let flat = laser.shot_noise(p.transmittance) * (1.0 + p.mu * p.mu);
        thin_worst = thin_worst.max((practical_variance(&p, &laser, &flat_detector)? - flat).abs());

        // Coherence envelope: choose dk so that dk z1 = 10 at a non-zero distance.
        let mut far = p;
        far.mirror_distance = p.mirror_distance.max(0.5);
        let broad = LaserModel {
            linewidth: 10.0 / far.mirror_distance,
            ..laser
        };
        linewidth_worst = linewidth_worst.max((practical_variance(&far, &broad, &surface)? - flat).abs());
    }
    let passed = surface_worst < LIMIT_RELATIVE_TOLERANCE
        && thin_worst < FLAT_LIMIT_TOLERANCE
        && linewidth_worst < FLAT_LIMIT_TOLERANCE;
    Ok(SuiteReport {
        suite: Suite::Limits,
        passed,
        worst: Some(surface_worst.max(thin_worst).max(linewidth_worst)),
        lines: vec![
            format!(
                "dk = 0, kappa = 1e6 k0, D = 1: max |practical - ideal| / ideal = {surface_worst:.3e} (tolerance {LIMIT_RELATIVE_TOLERANCE:e})"
            ),
            format!("kappa D = 0: max |practical - flat| = {thin_worst:.3e} (tolerance {FLAT_LIMIT_TOLERANCE:e})"),
            format!("dk z1 = 10: max |practical - flat| = {linewidth_worst:.3e} (tolerance {FLAT_LIMIT_TOLERANCE:e})"),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
        assert!(!Suite::Overlap.is_mandatory());
    }

    #[test]
    fn detector_samples_span_optical_depths() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for _ in 0..2000 {
            let (d, _) = detector_sample(&mut rng, 2.0 * PI);
            let od = d.absorption * d.depth;
            lo = lo.min(od);
            hi = hi.max(od);
        }
        assert!((1e-3 * (1.0 - 1e-12)..2e-3).contains(&lo));
        assert!(hi <= 1e2 * (1.0 + 1e-12) && hi > 50.0);
    }

    #[test]
    fn limits_suite_passes() {
        let r = Suite::Limits.run(DEFAULT_SEED).unwrap();
        assert!(r.passed, "{r}");
    }
}
