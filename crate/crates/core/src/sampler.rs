//! Noise sampling on decoder-graph edges with shots shared across cycle
//! counts.
//!
//! Faults are sampled per origin (state preparation, each cycle, final
//! data measurement) so that experiments with different cycle counts can
//! share everything except their final measurement. Each origin draws from
//! its own counter-based stream keyed by `(seed, shot, origin)`, which makes
//! a shot independent of how many experiments use it and of which thread
//! samples it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface_code::{DecoderGraph, FaultOrigin};
use crate::windows::window_graph::odd_multiplicity;

/// Stream offset of the final-measurement blocks; cycle blocks use their
/// cycle index and preparation uses 0.
const FINAL_BLOCK_BASE: u64 = 1 << 20;
/// Words reserved for one block of one shot.
const BLOCK_WORDS: u128 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub seed: u64,
    pub shot: u64,
    pub rounds: usize,
    /// Sorted edge ids of the `rounds`-cycle graph.
    pub sampled_edges: Vec<usize>,
    pub defects: Vec<usize>,
    pub true_parity: bool,
}

#[derive(Debug, Clone)]
struct Group {
    ln_keep: f64,
    probability: f64,
    edges: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
struct Block {
    groups: Vec<Group>,
    /// `(canonical key, probability bits)` of every mechanism, in order.
    signature: Vec<(usize, usize, bool, u64)>,
}

impl Block {
    fn build(graph: &DecoderGraph, origin: FaultOrigin) -> Self {
        let mut members: Vec<((usize, usize, bool), u64, usize)> = graph
            .mechanisms
            .iter()
            .filter(|m| m.origin == origin)
            .map(|m| {
                let edge = &graph.edges[m.edge];
                // imaginary ids depend on the graph size, so key them by
                // the boundary they stand for instead
                let b = if graph.is_real(edge.b) {
                    edge.b
                } else {
                    let (_, kind) = graph.vertices[edge.b].attached.expect("imaginary detectors are attached");
                    usize::MAX - kind as usize
                };
                ((edge.a, b, edge.logical), m.probability.to_bits(), m.edge)
            })
            .collect();
        members.sort_unstable_by_key(|&(key, bits, _)| (bits, key));
        let signature = members
            .iter()
            .map(|&((a, b, l), bits, _)| (a, b, l, bits))
            .collect();
        let mut groups: Vec<Group> = Vec::new();
        for (_, bits, edge) in members {
            let probability = f64::from_bits(bits);
            match groups.last_mut() {
                Some(g) if g.probability.to_bits() == bits => g.edges.push(edge),
                _ => groups.push(Group {
                    ln_keep: (-probability).ln_1p(),
                    probability,
                    edges: vec![edge],
                }),
            }
        }
        Block { groups, signature }
    }

    /// Appends `(group, member)` of the mechanisms that fire, skipping over
    /// the quiet ones with geometric jumps.
    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut Vec<(usize, usize)>) {
        for (g, group) in self.groups.iter().enumerate() {
            if group.probability <= 0.0 {
                continue;
            }
            let len = group.edges.len();
            let mut i = 0usize;
            loop {
                if group.probability < 1.0 {
                    let u: f64 = rng.random();
                    let skip = ((-u).ln_1p() / group.ln_keep).floor();
                    if skip >= (len - i) as f64 {
                        break;
                    }
                    i += skip as usize;
                }
                out.push((g, i));
                i += 1;
                if i >= len {
                    break;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Plan {
    rounds: usize,
    /// Index 0 is preparation, index `c` is cycle `c`.
    blocks: Vec<Block>,
    final_block: Block,
}

/// Samples shots for one or more graphs that differ only in cycle count.
#[derive(Debug, Clone)]
pub struct ShotSampler<'g> {
    seed: u64,
    base: ChaCha8Rng,
    graphs: Vec<&'g DecoderGraph>,
    plans: Vec<Plan>,
}

impl<'g> ShotSampler<'g> {
    /// `graphs` must share distance, noise strength, Pauli type and
    /// observable; their early cycles must produce identical mechanisms.
    pub fn new(graphs: &[&'g DecoderGraph], seed: u64) -> Result<Self> {
        let mut graphs: Vec<&DecoderGraph> = graphs.to_vec();
        if graphs.is_empty() {
            return Err(Error::Config("the sampler needs at least one graph".into()));
        }
        graphs.sort_by_key(|g| g.rounds);
        let first = graphs[0];
        for g in &graphs {
            if (g.d, g.pauli, g.p.to_bits(), g.observable_row) != (first.d, first.pauli, first.p.to_bits(), first.observable_row) {
                return Err(Error::Config("sampled graphs differ in more than their cycle count".into()));
            }
        }
        if graphs.windows(2).any(|w| w[0].rounds == w[1].rounds) {
            return Err(Error::Config("duplicate cycle count in sampled graphs".into()));
        }
        let plans: Vec<Plan> = graphs
            .iter()
            .map(|g| Plan {
                rounds: g.rounds,
                blocks: std::iter::once(FaultOrigin::Preparation)
                    .chain((1..=g.rounds).map(FaultOrigin::Cycle))
                    .map(|o| Block::build(g, o))
                    .collect(),
                final_block: Block::build(g, FaultOrigin::FinalMeasurement),
            })
            .collect();
        let largest = plans.last().expect("non-empty");
        for plan in &plans {
            for (c, block) in plan.blocks.iter().enumerate() {
                if block.signature != largest.blocks[c].signature {
                    return Err(Error::Invariant(format!(
                        "cycle {c} faults differ between the {}- and {}-cycle graphs; shots cannot be shared",
                        plan.rounds, largest.rounds
                    )));
                }
            }
        }
        Ok(ShotSampler {
            seed,
            base: ChaCha8Rng::seed_from_u64(seed),
            graphs,
            plans,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Cycle counts served, ascending.
    pub fn rounds(&self) -> Vec<usize> {
        self.plans.iter().map(|p| p.rounds).collect()
    }

    pub fn graph(&self, rounds: usize) -> Option<&'g DecoderGraph> {
        self.graphs.iter().copied().find(|g| g.rounds == rounds)
    }

    fn stream(&self, shot: u64, block: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(shot);
        rng.set_word_pos(block as u128 * BLOCK_WORDS);
        rng
    }

    /// One record per cycle count, ascending. All records share the faults
    /// of their common cycles.
    pub fn sample(&self, shot: u64) -> Vec<ShotRecord> {
        let largest = self.plans.last().expect("non-empty");
        let fired: Vec<Vec<(usize, usize)>> = largest
            .blocks
            .iter()
            .enumerate()
            .map(|(c, block)| {
                let mut out = Vec::new();
                block.sample(&mut self.stream(shot, c as u64), &mut out);
                out
            })
            .collect();
        self.plans
            .iter()
            .zip(&self.graphs)
            .map(|(plan, graph)| {
                // blocks match member for member, so positions carry over
                let mut edges: Vec<usize> = plan
                    .blocks
                    .iter()
                    .zip(&fired)
                    .flat_map(|(block, hits)| hits.iter().map(|&(g, i)| block.groups[g].edges[i]))
                    .collect();
                let mut hits = Vec::new();
                let mut rng = self.stream(shot, FINAL_BLOCK_BASE + plan.rounds as u64);
                plan.final_block.sample(&mut rng, &mut hits);
                edges.extend(hits.iter().map(|&(g, i)| plan.final_block.groups[g].edges[i]));
                let sampled_edges = odd_multiplicity(edges);
                let defects = graph.boundary_of(sampled_edges.iter().copied());
                let true_parity = sampled_edges.iter().fold(false, |acc, &e| acc ^ graph.edges[e].logical);
                ShotRecord {
                    seed: self.seed,
                    shot,
                    rounds: plan.rounds,
                    sampled_edges,
                    defects,
                    true_parity,
                }
            })
            .collect()
    }

    /// The record for one cycle count.
    pub fn sample_rounds(&self, shot: u64, rounds: usize) -> Option<ShotRecord> {
        self.sample(shot).into_iter().find(|r| r.rounds == rounds)
    }
}

/// Samples every edge of `graph` independently with its probability.
pub fn sample_errors(graph: &DecoderGraph, seed: u64, shot: u64) -> Vec<usize> {
    let sampler = ShotSampler::new(&[graph], seed).expect("a single graph is always consistent");
    sampler.sample(shot).pop().expect("one record").sampled_edges
}

/// Real detectors flipped an odd number of times by `edges`.
pub fn defects_of(graph: &DecoderGraph, edges: &[usize]) -> Vec<usize> {
    graph.boundary_of(edges.iter().copied())
}
