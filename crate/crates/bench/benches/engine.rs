use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fcl_bench::{fixture, FUNK3, RANDERS3};
use fcl_core::classify::predicates;
use fcl_core::geodesic::integrate_geodesic;
use fcl_core::identities::verify_identities;
use fcl_core::{CurvaturePack, Geometry, Suite, Tolerances};

fn jets(c: &mut Criterion) {
    let (m, pts) = fixture(FUNK3, 1);
    let mut group = c.benchmark_group("f2_jet");
    for order in [3, 5, 7] {
        group.bench_with_input(BenchmarkId::from_parameter(order), &order, |b, &k| {
            b.iter(|| m.f2_jet(black_box(&pts[0]), k).unwrap())
        });
    }
    group.finish();
}

fn curvature_pack(c: &mut Criterion) {
    for (name, src) in [("funk3", FUNK3), ("randers3", RANDERS3)] {
        let (m, pts) = fixture(src, 1);
        c.bench_function(&format!("curvature_pack/{name}"), |b| {
            b.iter(|| {
                let geo = Geometry::new(&m, black_box(&pts[0]), 7).unwrap();
                CurvaturePack::compute(&geo).unwrap()
            })
        });
    }
}

fn batch(c: &mut Criterion) {
    let (m, pts) = fixture(FUNK3, 16);
    let mut group = c.benchmark_group("batch16");
    group.sample_size(10);
    group.bench_function("classify", |b| b.iter(|| predicates(&m, &pts, &Tolerances::default())));
    group.bench_function("verify_all", |b| b.iter(|| verify_identities(&m, &pts, Suite::All, 1e-6)));
    group.finish();
}

fn geodesic(c: &mut Criterion) {
    let (m, _) = fixture(FUNK3, 0);
    c.bench_function("geodesic/funk3_256_steps", |b| {
        b.iter(|| integrate_geodesic(&m, &[0.1, 0.0, -0.1], &[0.6, 0.3, 0.2], 0.5, 256).unwrap())
    });
}

criterion_group!(benches, jets, curvature_pack, batch, geodesic);
criterion_main!(benches);
