use std::hint::black_box;

use cfsmote::datasets::{generate_biased_drift_stream, DriftStreamParams};
use cfsmote::rebalance::{Grouping, SubgroupWindow};
use cfsmote::{
    AdaptiveReset, Adwin, Classifier, HoeffdingTree, HoeffdingTreeParams, Instance, Mode, Rebalancer, RebalancerConfig,
    StreamSchema, SubgroupKey,
};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STREAM: usize = 5_000;

fn stream() -> (StreamSchema, Vec<Instance>) {
    let params = DriftStreamParams {
        n: STREAM,
        n_features: 6,
        group_positive_gap: 0.15,
        drift_points: vec![STREAM / 2],
        ..DriftStreamParams::default()
    };
    (params.schema(), generate_biased_drift_stream(&params).unwrap())
}

fn learner(schema: &StreamSchema) -> AdaptiveReset<HoeffdingTree> {
    AdaptiveReset::new(
        HoeffdingTree::new(schema, HoeffdingTreeParams::default()).unwrap(),
        Adwin::default(),
    )
}

fn adwin(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let bits: Vec<f64> = (0..100_000)
        .map(|i| f64::from(u8::from(rng.random_bool(if i < 50_000 { 0.3 } else { 0.6 }))))
        .collect();
    let mut g = c.benchmark_group("adwin");
    g.throughput(Throughput::Elements(bits.len() as u64));
    g.bench_function("add_element", |b| {
        b.iter(|| {
            let mut a = Adwin::default();
            for &v in &bits {
                black_box(a.add_element(v).unwrap());
            }
            a.width()
        })
    });
    g.finish();
}

fn tree(c: &mut Criterion) {
    let (schema, xs) = stream();
    let mut g = c.benchmark_group("hoeffding_tree");
    g.throughput(Throughput::Elements(xs.len() as u64));
    g.bench_function("learn_one", |b| {
        b.iter(|| {
            let mut m = learner(&schema);
            xs.iter().for_each(|x| m.learn_one(x));
            m
        })
    });
    let mut trained = learner(&schema);
    xs.iter().for_each(|x| trained.learn_one(x));
    g.bench_function("predict_one", |b| {
        b.iter(|| {
            xs.iter()
                .map(|x| usize::from(trained.predict_one(black_box(x))))
                .sum::<usize>()
        })
    });
    g.finish();
}

fn rebalancer(c: &mut Criterion) {
    let (schema, xs) = stream();
    let mut g = c.benchmark_group("rebalancer");
    g.throughput(Throughput::Elements(xs.len() as u64));
    g.sample_size(10);
    for mode in [Mode::Cfsmote, Mode::Csmote] {
        g.bench_function(format!("{mode:?}").to_lowercase(), |b| {
            b.iter_batched(
                || Rebalancer::new(RebalancerConfig::for_mode(mode), &schema, learner(&schema), 1).unwrap(),
                |mut r| {
                    for x in &xs {
                        black_box(r.process(x).unwrap());
                    }
                    r
                },
                BatchSize::LargeInput,
            )
        });
    }
    g.finish();
}

fn synthesis(c: &mut Criterion) {
    let (schema, xs) = stream();
    let mut window = SubgroupWindow::new(&schema, Grouping::LabelAndSensitive, Adwin::default(), true);
    for x in &xs[..STREAM / 2] {
        window.observe(x).unwrap();
    }
    let key = SubgroupKey { label: 1, sensitive: 0 }.index();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    c.bench_function("generate_synthetic", |b| {
        b.iter(|| window.generate_synthetic(key, 3, 10, &mut rng).unwrap())
    });
}

criterion_group!(benches, adwin, tree, rebalancer, synthesis);
criterion_main!(benches);
