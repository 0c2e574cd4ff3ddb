use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use hetsim_core::engine::{base_context, bootstrap_r, stream, Network, ELECTION_STREAM, PLACEMENT_STREAM};
use hetsim_core::{run_simulation, ProtocolKind, ScenarioConfig};

fn full_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_simulation");
    group.sample_size(20);
    for protocol in ProtocolKind::ALL {
        let config = ScenarioConfig { protocol, seed: 1, ..Default::default() };
        group.bench_function(protocol.name(), |b| b.iter(|| run_simulation(black_box(&config)).unwrap()));
    }
    group.finish();
}

fn single_round(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_round");
    for protocol in ProtocolKind::ALL {
        let config = ScenarioConfig { protocol, seed: 3, ..Default::default() };
        let net = Network::from_config(&config, &mut stream(config.seed, PLACEMENT_STREAM)).unwrap();
        let ctx = base_context(&config, &net, bootstrap_r(&config, &net));
        group.bench_function(protocol.name(), |b| {
            b.iter_batched(
                || (net.clone(), stream(config.seed, ELECTION_STREAM)),
                |(mut net, mut rng)| net.run_round(0, protocol, &ctx, config.e_avg_scope, &mut rng),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, full_runs, single_round);
criterion_main!(benches);
