use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use smes_core::{smes_step, RngStream, SmesConfig, SmesState};

fn bench_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("smes_step");
    for alpha in [-0.3, 0.0, 0.5] {
        let cfg = SmesConfig::adam().with_alpha(alpha);
        let mut rng = RngStream::new(1);
        let grad = rng.normal(0.0, 1.0, &[4096]).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(alpha), &alpha, |b, _| {
            let mut param = rng.normal(0.0, 1.0, &[4096]).unwrap();
            let mut state = SmesState::new(param.shape());
            b.iter(|| smes_step(&mut param, black_box(&grad), &mut state, &cfg).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_step);
criterion_main!(benches);
