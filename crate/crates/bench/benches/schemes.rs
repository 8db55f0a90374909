use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sandwich_bench::{memory_graph, prepared, sampled_defects};
use sandwich_core::harness::engine::{decoder_set, CellEngine, WindowClock};
use sandwich_core::{InnerKind, ScheduleParams};

/// Whole-shot decoding on one graph with each scheme.
fn full_shot(c: &mut Criterion) {
    let mut group = c.benchmark_group("shot");
    group.sample_size(10);
    let d: usize = 7;
    let s = d.div_ceil(2);
    let graph = memory_graph(d, 10 * s, 0.005);
    let shots = sampled_defects(&graph, 32, 2);
    for (name, params) in [
        ("batch", ScheduleParams::batch()),
        ("forward", ScheduleParams::forward(s, s).unwrap()),
        ("sandwich", ScheduleParams::sandwich(s, s, 0).unwrap()),
    ] {
        let schedule = prepared(&graph, &params);
        let mut decoder = InnerKind::Uf.build();
        group.bench_with_input(BenchmarkId::new(name, d), &shots, |b, shots| {
            let mut i = 0;
            b.iter(|| {
                i = (i + 1) % shots.len();
                schedule.decode_serial(&shots[i], decoder.as_mut()).unwrap()
            })
        });
    }
    group.finish();
}

/// Sandwich windows of one shot spread over a thread pool.
fn window_workers(c: &mut Criterion) {
    let mut group = c.benchmark_group("window_workers");
    group.sample_size(10);
    let d: usize = 7;
    let s = d.div_ceil(2);
    let graphs = vec![memory_graph(d, 10 * s, 0.005)];
    let params = ScheduleParams::sandwich(s, s, 0).unwrap();
    for workers in [1, 2, 4] {
        let engine = CellEngine::new(&graphs, &params, 3, workers).unwrap();
        let mut decoders = decoder_set(InnerKind::Uf, workers);
        let mut clock = WindowClock::default();
        group.bench_function(BenchmarkId::from_parameter(workers), |b| {
            let mut shot = 0;
            b.iter(|| {
                shot += 1;
                engine.run_shot(shot, &mut decoders, &mut clock).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, full_shot, window_workers);
criterion_main!(benches);
