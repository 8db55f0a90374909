use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use proptest::prelude::*;
use sandwich_core::windows::{generalized_sandwich, GsInstance, Hypergraph, TimePartition};
use sandwich_core::{
    build_decoder_graph, build_layout, build_memory_circuit, DecoderGraph, InnerKind, PauliType, PreparedSchedule,
    Schedule, ScheduleParams, Scheme, ShotSampler, WindowType,
};

/// Graphs are shared between proptest cases; building them dominates.
fn graph(d: usize, rounds: usize) -> &'static DecoderGraph {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), &'static DecoderGraph>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    cache.entry((d, rounds)).or_insert_with(|| {
        let circuit = build_memory_circuit(&build_layout(d).unwrap(), rounds).unwrap();
        Box::leak(Box::new(build_decoder_graph(&circuit, 0.006, PauliType::Z).unwrap()))
    })
}

fn params() -> impl Strategy<Value = ScheduleParams> {
    prop_oneof![
        Just(ScheduleParams::batch()),
        (1usize..6, 1usize..7).prop_map(|(s, b)| ScheduleParams::forward(s, b).unwrap()),
        (2usize..6, 1usize..5, -4i64..5).prop_filter_map("seam offset out of range", |(s, b, t)| {
            ScheduleParams::sandwich(s, b, t).ok()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn cores_partition_edges_and_dependencies_are_shallow(p in params(), rounds in 1usize..26, d in prop::sample::select(vec![3usize, 5])) {
        let g = graph(d, rounds);
        let schedule = Schedule::build(&p, g.num_layers).unwrap();
        // the constructor rejects any edge owned by zero or two cores
        let prepared = PreparedSchedule::new(g, schedule.clone()).unwrap();
        let depths = schedule.depths();
        for w in &schedule.windows {
            prop_assert!(w.depends_on.iter().all(|&j| j < schedule.len()));
            match w.window_type {
                WindowType::Type1 | WindowType::Batch => prop_assert!(w.depends_on.is_empty()),
                WindowType::Type2 => {
                    prop_assert_eq!(w.depends_on.len(), 2);
                    prop_assert!(w.depends_on.iter().all(|&j| schedule.windows[j].window_type == WindowType::Type1));
                }
                WindowType::Forward => prop_assert!(w.id == 0 || w.depends_on == vec![w.id - 1]),
            }
        }
        let expected = match p.scheme {
            Scheme::Batch => 1,
            Scheme::Forward => schedule.len(),
            Scheme::Sandwich => if schedule.len() > 1 { 2 } else { 1 },
        };
        prop_assert_eq!(schedule.critical_path(), expected);
        prop_assert_eq!(depths.iter().max().copied(), Some(expected));
        prop_assert_eq!(prepared.stages().len(), expected);
    }

    #[test]
    fn decoded_shots_annihilate_their_defects(p in params(), rounds in 1usize..20, seed in any::<u64>()) {
        let g = graph(3, rounds);
        let prepared = PreparedSchedule::new(g, Schedule::build(&p, g.num_layers).unwrap()).unwrap();
        let sampler = ShotSampler::new(&[g], seed).unwrap();
        for kind in [InnerKind::Uf, InnerKind::Mwpm] {
            let mut decoder = kind.build();
            for shot in 0..8 {
                let record = sampler.sample(shot).pop().unwrap();
                // decode_serial assembles and checks the boundary itself
                let set = prepared.decode_serial(&record.defects, decoder.as_mut()).unwrap();
                prop_assert_eq!(g.boundary_of(set.edges.iter().copied()), record.defects);
            }
        }
    }

    #[test]
    fn short_experiments_decode_like_batch(s in 2usize..5, b in 1usize..4, seed in any::<u64>()) {
        let sandwich = ScheduleParams::sandwich(s, b, 0).unwrap();
        let forward = ScheduleParams::forward(s, b).unwrap();
        let rounds = forward.w.min(sandwich.w) - 1;
        let g = graph(3, rounds);
        let batch = PreparedSchedule::new(g, Schedule::build(&ScheduleParams::batch(), g.num_layers).unwrap()).unwrap();
        let sampler = ShotSampler::new(&[g], seed).unwrap();
        for p in [sandwich, forward] {
            let prepared = PreparedSchedule::new(g, Schedule::build(&p, g.num_layers).unwrap()).unwrap();
            prop_assert_eq!(prepared.schedule.len(), 1);
            for kind in [InnerKind::Uf, InnerKind::Mwpm] {
                let mut decoder = kind.build();
                for shot in 0..4 {
                    let defects = sampler.sample(shot).pop().unwrap().defects;
                    prop_assert_eq!(
                        prepared.decode_serial(&defects, decoder.as_mut()).unwrap(),
                        batch.decode_serial(&defects, decoder.as_mut()).unwrap()
                    );
                }
            }
        }
    }
}

#[test]
fn recursion_reproduces_the_sandwich_decoder() {
    let g = graph(3, 6);
    let hg = Hypergraph::from_decoder_graph(g);
    for t in [0i64, 1, -1] {
        // w = 4, so seven layers give two type-1 windows and a seam
        let params = ScheduleParams::sandwich(2, 1, t).unwrap();
        let schedule = Schedule::build(&params, g.num_layers).unwrap();
        assert!(schedule.num_type1() >= 2);
        let prepared = PreparedSchedule::new(g, schedule.clone()).unwrap();
        let partition = TimePartition {
            graph: g,
            schedule: &schedule,
        };
        let sampler = ShotSampler::new(&[g], 77).unwrap();
        for kind in [InnerKind::Uf, InnerKind::Mwpm] {
            let mut decoder = kind.build();
            for shot in 0..1000 {
                let record = sampler.sample(shot).pop().unwrap();
                let direct = prepared.decode_serial(&record.defects, decoder.as_mut()).unwrap();
                let instance = GsInstance::whole(&hg, record.defects.clone()).unwrap();
                let gs = generalized_sandwich(&hg, &instance, &partition, decoder.as_mut()).unwrap();
                assert_eq!(hg.boundary_of(&gs.edges), record.defects);
                assert_eq!(
                    gs.logical_parity ^ record.true_parity,
                    direct.logical_parity ^ record.true_parity,
                    "t={t} {kind} shot {shot}"
                );
            }
        }
    }
}
