use std::f64::consts::PI;

use mirrorvac::sweep::{Axis, MatchingKind, ModelKind, Param};
use mirrorvac::{run_sweep, Quantity, SweepResult, SweepSpec};
use proptest::prelude::*;

#[test]
fn detector_waist_variance_matches_hand_formula() {
    let text = "\
quantity = ideal_variance
matching = detector_waist
T = 0.2
w0 = 3
alpha2 = 2
[axis z1]
start = 0
stop = 40
count = 81
";
    let spec = SweepSpec::parse(text).unwrap();
    let result = run_sweep(&spec).unwrap();
    let z0 = PI * 9.0;
    for rec in &result.records {
        let (z1, v) = (rec[0], rec[1]);
        let u = z1 / z0;
        let mu = (1.0 + u * u).powf(-0.25);
        let expect = 2.0 * 0.2 / 2.0 * (1.0 + mu * mu - 2.0 * mu * 0.8 * (4.0 * PI * z1).cos());
        assert!((v - expect).abs() < 1e-12, "z1={z1}: {v} vs {expect}");
    }
}

#[test]
fn mirror_waist_rm_is_bounded_and_peaks_when_matched() {
    let spec = SweepSpec::new(Quantity::Rm)
        .with_matching(MatchingKind::MirrorWaist)
        .with_fixed(Param::W0, 20.0)
        .with_fixed(Param::Z1, 0.0)
        .with_axis(Axis::log(Param::Wm, 2.0, 200.0, 21));
    let r = run_sweep(&spec).unwrap();
    let rm = r.column("rm").unwrap();
    let wm = r.column("wm").unwrap();
    let best = rm.iter().cloned().fold(f64::MIN, f64::max);
    let at = rm.iter().position(|&v| v == best).unwrap();
    assert!((wm[at] - 20.0).abs() < 1e-9);
    assert!((best - 1.0).abs() < 1e-12);
    assert!(rm.iter().all(|&v| v <= 1.0));
}

#[test]
fn csv_preserves_every_bit() {
    let spec = SweepSpec::new(Quantity::NormalizedVariance)
        .with_model(ModelKind::Practical)
        .with_fixed(Param::T, 0.35)
        .with_fixed(Param::Rm, 0.9)
        .with_fixed(Param::Mu, 0.8)
        .with_axis(Axis::linear(Param::Z1, 0.0, 1.7, 23))
        .with_axis(Axis::log(Param::Kappa, 0.5, 500.0, 4));
    let r = run_sweep(&spec).unwrap();
    let back = SweepResult::from_csv(&r.to_csv_string()).unwrap();
    assert_eq!(back, r);
}

proptest! {
    #[test]
    fn spec_text_round_trips(
        start in 0.01f64..10.0,
        width in 0.01f64..100.0,
        count in 2usize..50,
        log in any::<bool>(),
        t in 0.0f64..=1.0,
        w0 in 0.5f64..500.0,
    ) {
        let axis = if log {
            Axis::log(Param::Z1, start, start + width, count)
        } else {
            Axis::linear(Param::Z1, start, start + width, count)
        };
        let spec = SweepSpec::new(Quantity::PracticalVariance)
            .with_matching(MatchingKind::DetectorWaist)
            .with_fixed(Param::T, t)
            .with_fixed(Param::W0, w0)
            .with_axis(axis);
        let parsed = SweepSpec::parse(&spec.to_text()).unwrap();
        prop_assert_eq!(parsed, spec);
    }

    #[test]
    fn grid_points_follow_row_major_order(a in 2usize..6, b in 2usize..6, c in 2usize..6) {
        let spec = SweepSpec::new(Quantity::DetectorFactor)
            .with_axis(Axis::linear(Param::Kappa, 1.0, 2.0, a))
            .with_axis(Axis::linear(Param::D, 0.0, 1.0, b))
            .with_axis(Axis::linear(Param::Z1, 0.0, 1.0, c));
        prop_assert_eq!(spec.record_count(), a * b * c);
        for i in 0..a {
            for j in 0..b {
                for k in 0..c {
                    let p = spec.grid_point((i * b + j) * c + k);
                    prop_assert_eq!(p, vec![spec.axes[0].value(i), spec.axes[1].value(j), spec.axes[2].value(k)]);
                }
            }
        }
    }
}
