use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use snewton_bench::experiments::{kernel_tolerance, table_config};
use snewton_bench::variant::{perturbed_start, random_variant};
use snewton_core::lvz::{deflate_once, gauss_newton};
use snewton_core::twostep::two_step;

fn one_iteration(c: &mut Criterion) {
    let mut group = c.benchmark_group("one_iteration");
    group.sample_size(10);
    for (n, k) in [(10, 2), (10, 8), (25, 2)] {
        let v = random_variant(n, k, 0);
        let x0 = perturbed_start(&v.zero, 1e-3, 1);
        let tau = kernel_tolerance(&v.system.jacobian(x0.as_slice()).unwrap(), k);
        let cfg = table_config(tau, 1, 0);
        let id = format!("n{n}_k{k}");
        group.bench_with_input(BenchmarkId::new("two_step", &id), &x0, |b, x| {
            b.iter(|| two_step(&v.system, x.as_slice(), &cfg).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("deflate_gauss_newton", &id),
            &x0,
            |b, x| {
                b.iter(|| {
                    let (d, y) = deflate_once(&v.system, x.as_slice(), tau, 0).unwrap();
                    gauss_newton(&d.g, y.as_slice(), 1, f64::MIN_POSITIVE).unwrap()
                })
            },
        );
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let v = random_variant(25, 2, 0);
    let x = perturbed_start(&v.zero, 1e-3, 1);
    c.bench_function("jacobian_n25", |b| {
        b.iter(|| v.system.jacobian(x.as_slice()).unwrap())
    });
    c.bench_function("svd_n25", |b| {
        let j = v.system.jacobian(x.as_slice()).unwrap();
        b.iter(|| snewton_core::linalg::svd(&j))
    });
}

criterion_group!(benches, one_iteration, evaluation);
criterion_main!(benches);
