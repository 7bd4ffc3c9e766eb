use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use wconcur::roof::{roof_upper_bound, wootters_concurrence_2qubit, Functional};
use wconcur::sampling::{random_density_matrix, stream_rng};
use wconcur::tensor::density_from_pure;
use wconcur::{DensityMatrix, EstimatorConfig, PureState, WCoefficients};

fn roof(c: &mut Criterion) {
    let full = Functional::Full;
    let evaluate = |psi: &PureState| full.evaluate(psi);

    let two = random_density_matrix(&mut stream_rng(4, 0), &[2, 2], 4);
    let cfg = EstimatorConfig::default();
    c.bench_function("roof_2q_rank4_default", |b| {
        b.iter(|| roof_upper_bound(black_box(&two), &evaluate, &cfg).unwrap())
    });
    c.bench_function("wootters_2q", |b| {
        b.iter(|| wootters_concurrence_2qubit(black_box(&two)).unwrap())
    });

    let w = density_from_pure(&WCoefficients::uniform(4).to_state());
    let noise = DensityMatrix::maximally_mixed(vec![2; 4]).unwrap();
    let noisy = DensityMatrix::mixture(&[(0.9, &w), (0.1, &noise)]).unwrap();
    let small = EstimatorConfig {
        restarts: 8,
        refine_steps: 200,
        ..EstimatorConfig::default()
    };
    let mut group = c.benchmark_group("roof_4q_noisy_w");
    group.sample_size(10);
    group.bench_function("restarts8_steps200", |b| {
        b.iter(|| roof_upper_bound(black_box(&noisy), &evaluate, &small).unwrap())
    });
    group.finish();
}

criterion_group!(benches, roof);
criterion_main!(benches);
