use criterion::{BatchSize, Criterion, Throughput};
use overshoot_core::measures::estimate_law;
use overshoot_core::oracle::{exact_passage_law, LatticeChainSpec};
use overshoot_core::rng::StreamFamily;
use overshoot_core::{classify, Atom, LevyTriplet, Scalar, SimConfig, Simulator};

fn chain(atoms: &[(i64, i64, i64)]) -> LevyTriplet {
    LevyTriplet::compound_poisson(atoms.iter().map(|&(s, n, d)| Atom::new(s, Scalar::ratio(n, d))).collect())
}

pub fn classification(c: &mut Criterion) {
    let t = chain(&[(1, 3, 10), (-1, 7, 10), (-4, 1, 10), (-7, 1, 5)]);
    c.bench_function("classify/lattice_chain", |b| b.iter(|| classify(std::hint::black_box(&t)).unwrap()));
}

pub fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    let exact = LatticeChainSpec::from_triplet(&chain(&[(1, 3, 10), (-1, 7, 10)])).unwrap();
    g.bench_function("skip_free_rational", |b| b.iter(|| exact_passage_law(&exact, 2.5).unwrap()));
    let float = LatticeChainSpec::new(1i64, vec![(2, Scalar::from_f64(0.4)), (-1, Scalar::from_f64(0.6))]).unwrap();
    g.bench_function("two_up_float", |b| b.iter(|| exact_passage_law(&float, 10.5).unwrap()));
    g.finish();
}

pub fn passage(c: &mut Criterion) {
    let mut g = c.benchmark_group("passage");
    g.throughput(Throughput::Elements(1));
    let cfg = SimConfig::default();
    let event = Simulator::new(&chain(&[(1, 1, 2), (3, 1, 2), (-1, 1, 1)]), &cfg).unwrap();
    let family = StreamFamily::new(1);
    let mut i = 0;
    g.bench_function("event_driven", |b| {
        b.iter_batched(
            || {
                i += 1;
                family.stream(i)
            },
            |mut rng| event.passage(2.5, false, &mut rng),
            BatchSize::SmallInput,
        )
    });
    let grid = Simulator::new(&LevyTriplet::brownian(1i64, 1i64), &cfg.clone().with_dt(1e-3)).unwrap();
    g.bench_function("grid_brownian", |b| {
        b.iter_batched(
            || {
                i += 1;
                family.stream(i)
            },
            |mut rng| grid.passage(1.0, false, &mut rng),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

pub fn estimation(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimate_law");
    g.sample_size(20);
    let t = chain(&[(1, 3, 10), (-1, 7, 10)]);
    for workers in [1, 4] {
        let cfg = SimConfig {
            workers: Some(workers),
            ..SimConfig::default()
        };
        g.bench_function(format!("skip_free_10k/workers={workers}"), |b| {
            b.iter(|| estimate_law(&t, 0.5, false, 10_000, &cfg).unwrap())
        });
    }
    g.finish();
}

pub fn benchmarks(c: &mut Criterion) {
    classification(c);
    oracle(c);
    passage(c);
    estimation(c);
}
