use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mirrorvac::fluctuation::{detector_response_factor, practical_variance};
use mirrorvac::mode_network::{photocurrent_expression, vacuum_variance};
use mirrorvac::overlap::{mu_closed, overlap_numeric, rm_closed, InnerProductKind};
use mirrorvac::sweep::{figure2_spec, figure3_spec};
use mirrorvac::{run_sweep, run_sweep_with_workers};
use mirrorvac_bench::{beam, detector, laser, network, practical_grid};

fn closed_forms(c: &mut Criterion) {
    c.bench_function("mu_closed", |b| {
        b.iter(|| mu_closed(black_box(1234.5), black_box(31415.9)))
    });
    c.bench_function("rm_closed", |b| {
        b.iter(|| rm_closed(black_box(1234.5), black_box(100.0), black_box(70.0), black_box(1.0)))
    });
    let det = detector();
    c.bench_function("detector_response_factor", |b| {
        b.iter(|| detector_response_factor(black_box(&det), black_box(std::f64::consts::TAU), black_box(0.37)))
    });
}

fn network_kernels(c: &mut Criterion) {
    let p = network();
    c.bench_function("photocurrent_variance", |b| {
        b.iter(|| vacuum_variance(&photocurrent_expression(black_box(&p)).unwrap()))
    });
    let (laser, det) = (laser(), detector());
    c.bench_function("practical_variance", |b| {
        b.iter(|| practical_variance(black_box(&p), &laser, &det).unwrap())
    });
}

fn overlaps(c: &mut Criterion) {
    let mut g = c.benchmark_group("overlap_numeric");
    for w0 in [1.0, 100.0] {
        let bm = beam(w0);
        let z = bm.rayleigh_range();
        g.bench_function(format!("w0={w0}"), |b| {
            b.iter(|| overlap_numeric(&bm, 0.0, &bm, black_box(z), InnerProductKind::Conjugated).unwrap())
        });
    }
    g.finish();
}

fn sweeps(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep");
    g.sample_size(20);
    let (fig2, fig3, grid) = (figure2_spec(), figure3_spec(), practical_grid());
    g.bench_function("fig2", |b| b.iter(|| run_sweep(&fig2).unwrap()));
    g.bench_function("fig3", |b| b.iter(|| run_sweep(&fig3).unwrap()));
    g.bench_function("practical_grid_1_worker", |b| {
        b.iter(|| run_sweep_with_workers(&grid, 1).unwrap())
    });
    g.bench_function("practical_grid_all_workers", |b| b.iter(|| run_sweep(&grid).unwrap()));
    g.finish();
}

criterion_group!(benches, closed_forms, network_kernels, overlaps, sweeps);
criterion_main!(benches);
