use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qfc_core::capacity::{entanglement_assisted_capacity, CapacityOptions};
use qfc_core::channels::{depolarizing, qubit_erasure};
use qfc_core::feedback::{max_delta_search, simulate_many, FeedbackDims, FeedbackProtocol};
use qfc_core::suites::{run_suite, Suite, VerifyTolerances};
use qfc_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn delta_search(c: &mut Criterion) {
    let ch = qubit_erasure(0.25).unwrap();
    let mut g = c.benchmark_group("delta_search_200");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| max_delta_search(&ch, 200, 1, 2, exec).unwrap())
        });
    }
    g.finish();
}

fn capacity_multistart(c: &mut Criterion) {
    let ch = depolarizing(0.6).unwrap();
    let mut g = c.benchmark_group("capacity_multistart");
    for (name, exec) in MODES {
        let opts = CapacityOptions { restarts: 8, execution: exec, ..CapacityOptions::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| entanglement_assisted_capacity(&ch, &opts).unwrap())
        });
    }
    g.finish();
}

fn protocol_batch(c: &mut Criterion) {
    let ch = qubit_erasure(0.5).unwrap();
    let protocols: Vec<_> = (0..16)
        .map(|s| FeedbackProtocol::random(ch.clone(), 2, FeedbackDims::default(), 4, s).unwrap())
        .collect();
    let mut g = c.benchmark_group("protocol_batch_16");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| simulate_many(&protocols, exec)));
    }
    g.finish();
}

fn entropic_suite(c: &mut Criterion) {
    let tol = VerifyTolerances::default();
    let mut g = c.benchmark_group("entropic_suite_50");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_suite(Suite::Entropic, 50, 0, &tol, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = delta_search, capacity_multistart, protocol_batch, entropic_suite
}
criterion_main!(benches);
