use criterion::{black_box, criterion_group, criterion_main, Criterion};

use anisotm_core::functionals::{tm_integral, IntegrandVariant, TmParams};
use anisotm_core::gauge::Gauge;
use anisotm_core::profile::moser_profile;
use anisotm_core::seqopt::mu_estimate;

fn bench_gauge(c: &mut Criterion) {
    let gauges = [
        ("euclidean", Gauge::euclidean(2)),
        ("p4", Gauge::p_norm(2, 4.0).unwrap()),
        (
            "ellipsoid",
            Gauge::ellipsoid(vec![vec![1.0, 0.2], vec![0.2, 2.0]]).unwrap(),
        ),
    ];
    let xi = [0.6, -0.8];
    for (name, g) in gauges {
        c.bench_function(&format!("gauge_eval_{name}"), |b| {
            b.iter(|| g.eval(black_box(&xi)).unwrap())
        });
        c.bench_function(&format!("gauge_polar_{name}"), |b| {
            b.iter(|| g.polar(black_box(&xi)).unwrap())
        });
    }
}

fn bench_tm_integral(c: &mut Criterion) {
    let g = Gauge::euclidean(2);
    let lam = g.constants().unwrap().lambda;
    let u = moser_profile(32.0, 0.0, &g).unwrap();
    let params = TmParams::new(2, 2.0, 0.0)
        .unwrap()
        .with_p(2.0)
        .with_lambda(lam);
    c.bench_function("tm_integral_critical_n32", |b| {
        b.iter(|| tm_integral(black_box(&u), &params, &g, IntegrandVariant::Phi).unwrap())
    });
    let singular = TmParams::new(2, 2.0, 1.0)
        .unwrap()
        .with_p(2.0)
        .with_lambda(0.9 * lam);
    let us = moser_profile(32.0, 1.0, &g).unwrap();
    c.bench_function("tm_integral_singular_n32", |b| {
        b.iter(|| tm_integral(black_box(&us), &singular, &g, IntegrandVariant::ExpP).unwrap())
    });
}

fn bench_mu(c: &mut Criterion) {
    c.bench_function("mu_estimate_h3", |b| {
        b.iter(|| mu_estimate(black_box(3.0), 2.0, 2.0, 64, 2, 11).unwrap())
    });
}

criterion_group!(benches, bench_gauge, bench_tm_integral, bench_mu);
criterion_main!(benches);
