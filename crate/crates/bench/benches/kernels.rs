use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nfpls::stats::rho_nusw;
use nfpls::{
    build_channel, capacity_eigen_oracle, chebyshev_gauss_nodes, erf_complex, rho_direct,
    secrecy_capacity_closed, ChannelModel, FormVariant, OracleMethod,
};
use nfpls_bench::{budget, channels, nodes, square_array};
use num_complex::Complex64;

fn erf(c: &mut Criterion) {
    let mut g = c.benchmark_group("erf_complex");
    for (name, z) in [
        ("small", Complex64::new(0.3, 0.4)),
        ("series", Complex64::new(2.5, 2.5)),
        ("tail", Complex64::new(7.0, -3.0)),
    ] {
        g.bench_with_input(BenchmarkId::from_parameter(name), &z, |b, &z| {
            b.iter(|| erf_complex(black_box(z)))
        });
    }
    g.finish();
}

fn correlation(c: &mut Criterion) {
    let (nb, ne) = nodes();
    let mut g = c.benchmark_group("rho_nusw");
    for order in [25, 100, 400] {
        let rule = chebyshev_gauss_nodes(order).unwrap();
        let arr = square_array(51);
        g.bench_with_input(BenchmarkId::from_parameter(order), &rule, |b, rule| {
            b.iter(|| rho_nusw(&arr, &nb, &ne, rule, FormVariant::Corrected))
        });
    }
    g.finish();
}

fn channel(c: &mut Criterion) {
    let (nb, _) = nodes();
    let mut g = c.benchmark_group("build_channel");
    for side in [15, 51] {
        let arr = square_array(side);
        for model in ChannelModel::ALL {
            g.bench_function(BenchmarkId::new(model.name(), side), |b| {
                b.iter(|| build_channel(model, &arr, &nb))
            });
        }
    }
    g.finish();
}

fn capacity(c: &mut Criterion) {
    let budget = budget();
    let mut g = c.benchmark_group("capacity");
    for side in [5, 15] {
        let (hb, he) = channels(ChannelModel::Usw, side);
        let stats = rho_direct(&hb, &he).unwrap();
        g.bench_function(BenchmarkId::new("closed", side), |b| {
            b.iter(|| secrecy_capacity_closed(black_box(&stats), &budget))
        });
        for (name, method) in [
            ("span", OracleMethod::SpanReduction),
            ("dense", OracleMethod::DenseEigen),
        ] {
            g.bench_function(BenchmarkId::new(name, side), |b| {
                b.iter(|| capacity_eigen_oracle(hb.entries(), he.entries(), &budget, method))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, erf, correlation, channel, capacity);
criterion_main!(benches);
