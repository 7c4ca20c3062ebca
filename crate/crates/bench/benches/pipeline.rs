use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use isoflat::{
    build_phi_lambda, expm, integrate_frame, make_cylinder_patch, revolution_patch, solve_meridian,
    zero_curvature_residual, AlgebraElement, Grid, GroupElement, TurningAngle,
};

fn wavy_patch(n: usize) -> isoflat::IsothermicPatch {
    let theta = TurningAngle::Sine { base: PI / 2.0, amplitude: 0.3, frequency: 1.0, phase: 0.0 };
    let g = Grid::spanning(n, n, (0.0, 2.0 * PI), (0.0, 2.0 * PI)).unwrap();
    let m = solve_meridian(theta, 1.0, g.x0, g.hx, g.nx).unwrap();
    revolution_patch(&m, g).unwrap()
}

fn bench_expm(c: &mut Criterion) {
    let mut a = AlgebraElement::zero();
    a.set_pair(1, 2, 0.3);
    a.set_pair(1, 3, -0.7);
    a.set_pair(1, 4, 1.1);
    a.set_pair(2, 5, 0.4);
    let mut group = c.benchmark_group("expm");
    for scale in [0.1, 1.0, 10.0] {
        let m = a.0 * scale;
        group.bench_with_input(BenchmarkId::from_parameter(scale), &m, |b, m| b.iter(|| expm(black_box(m))));
    }
    group.finish();
}

fn bench_integrate(c: &mut Criterion) {
    let mut group = c.benchmark_group("integrate_frame");
    group.sample_size(10);
    for n in [33, 65, 129] {
        let g = Grid::spanning(n, n, (0.0, 2.0 * PI), (0.0, 1.0)).unwrap();
        let form = build_phi_lambda(&make_cylinder_patch(1.0, g).unwrap(), 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &form, |b, f| {
            b.iter(|| integrate_frame(black_box(f), &GroupElement::identity()).unwrap())
        });
    }
    group.finish();
}

fn bench_residual(c: &mut Criterion) {
    let mut group = c.benchmark_group("zero_curvature_residual");
    for n in [33, 65, 129] {
        let form = build_phi_lambda(&wavy_patch(n), 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &form, |b, f| {
            b.iter(|| zero_curvature_residual(black_box(f)).max_norm())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_expm, bench_integrate, bench_residual);
criterion_main!(benches);
