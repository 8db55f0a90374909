//! Fixtures shared by the criterion benchmarks.

use sandwich_core::surface_code::build_decoder_graph;
use sandwich_core::{
    build_layout, build_memory_circuit, DecoderGraph, PauliType, PreparedSchedule, Schedule, ScheduleParams,
    ShotSampler,
};

/// Z-type memory-experiment graph.
pub fn memory_graph(d: usize, rounds: usize, p: f64) -> DecoderGraph {
    let circuit = build_memory_circuit(&build_layout(d).expect("valid distance"), rounds).expect("valid rounds");
    build_decoder_graph(&circuit, p, PauliType::Z).expect("valid error rate")
}

/// Defect lists of `count` sampled shots.
pub fn sampled_defects(graph: &DecoderGraph, count: u64, seed: u64) -> Vec<Vec<usize>> {
    let sampler = ShotSampler::new(&[graph], seed).expect("one graph");
    (0..count)
        .map(|shot| sampler.sample(shot).pop().expect("one record").defects)
        .collect()
}

pub fn prepared<'g>(graph: &'g DecoderGraph, params: &ScheduleParams) -> PreparedSchedule<'g> {
    PreparedSchedule::new(graph, Schedule::build(params, graph.num_layers).expect("valid schedule")).expect("cores partition the graph")
}
