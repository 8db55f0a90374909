//! Decodes one `(d, p)` cell for every requested cycle count at once.
//!
//! Errors are sampled for the longest experiment and every shorter one
//! reuses them (see [`crate::sampler`]). Decoding follows the same idea: a
//! window of a shorter schedule whose layers, boundaries and core match a
//! window of the longest schedule, which ends before the shorter
//! experiment's last layer and whose dependencies are reused as well, sees
//! exactly the same local graph and syndrome, so its retained correction is
//! copied. A window that could be copied but has no twin means the two
//! schedules do not line up, which is an error. The remaining windows near the end of the shorter experiment are
//! decoded on its own graph. Every experiment is assembled and checked on
//! its own graph.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::scheduler::{schedule_parallel, SchedulerReport};
use crate::decoders::{InnerDecoder, InnerKind};
use crate::error::{Error, Result};
use crate::sampler::ShotSampler;
use crate::surface_code::{build_decoder_graph, build_layout, build_memory_circuit, DecoderGraph, PauliType};
use crate::windows::{assemble, PreparedSchedule, Schedule, ScheduleParams, WindowSpec, WindowType};

/// Builds the memory-experiment graphs for the given cycle counts.
pub fn build_graphs(d: usize, p: f64, rounds: &[usize]) -> Result<Vec<DecoderGraph>> {
    let layout = build_layout(d)?;
    rounds
        .iter()
        .map(|&n| build_decoder_graph(&build_memory_circuit(&layout, n)?, p, PauliType::Z))
        .collect()
}

/// Accumulated decode time per window type.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindowClock {
    slots: [(u64, Duration); 4],
}

fn slot(t: WindowType) -> usize {
    match t {
        WindowType::Batch => 0,
        WindowType::Forward => 1,
        WindowType::Type1 => 2,
        WindowType::Type2 => 3,
    }
}

const SLOT_TYPES: [WindowType; 4] = [WindowType::Batch, WindowType::Forward, WindowType::Type1, WindowType::Type2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowTiming {
    pub window_type: WindowType,
    pub decodes: u64,
    pub total_seconds: f64,
    pub mean_micros: f64,
}

impl WindowClock {
    pub fn add(&mut self, t: WindowType, elapsed: Duration) {
        let s = &mut self.slots[slot(t)];
        s.0 += 1;
        s.1 += elapsed;
    }

    pub fn merge(&mut self, other: &WindowClock) {
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            a.0 += b.0;
            a.1 += b.1;
        }
    }

    pub fn total(&self) -> Duration {
        self.slots.iter().map(|s| s.1).sum()
    }

    pub fn timings(&self) -> Vec<WindowTiming> {
        self.slots
            .iter()
            .zip(SLOT_TYPES)
            .filter(|(s, _)| s.0 > 0)
            .map(|(&(count, total), window_type)| WindowTiming {
                window_type,
                decodes: count,
                total_seconds: total.as_secs_f64(),
                mean_micros: total.as_secs_f64() * 1e6 / count as f64,
            })
            .collect()
    }
}

/// One experiment's schedule and the windows it takes from the longest one.
struct RoundPlan<'g> {
    prepared: PreparedSchedule<'g>,
    reused: Vec<Option<usize>>,
}

/// Outcome of one shot for every cycle count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotOutcome {
    /// Bit `i` is set when the experiment with the `i`-th smallest cycle
    /// count failed.
    pub failures: u64,
}

pub struct CellEngine<'g> {
    sampler: ShotSampler<'g>,
    plans: Vec<RoundPlan<'g>>,
    window_workers: usize,
}

fn same_window(a: &WindowSpec, b: &WindowSpec) -> bool {
    (a.window_type, a.layers, a.past_boundary, a.future_boundary, a.core)
        == (b.window_type, b.layers, b.past_boundary, b.future_boundary, b.core)
}

impl<'g> CellEngine<'g> {
    /// `graphs` must differ only in cycle count. Fails if a shorter
    /// schedule does not line up with the longest one.
    pub fn new(graphs: &'g [DecoderGraph], params: &ScheduleParams, seed: u64, window_workers: usize) -> Result<Self> {
        let mut sorted: Vec<&'g DecoderGraph> = graphs.iter().collect();
        sorted.sort_by_key(|g| g.rounds);
        let sampler = ShotSampler::new(&sorted, seed)?;
        if sorted.len() > 64 {
            return Err(Error::Config(format!("at most 64 cycle counts per cell, got {}", sorted.len())));
        }
        let longest = PreparedSchedule::new(
            sorted.last().expect("sampler checked non-empty"),
            Schedule::build(params, sorted.last().expect("non-empty").num_layers)?,
        )?;
        let mut plans = Vec::with_capacity(sorted.len());
        for g in &sorted[..sorted.len() - 1] {
            let prepared = PreparedSchedule::new(g, Schedule::build(params, g.num_layers)?)?;
            let mut reused: Vec<Option<usize>> = vec![None; prepared.schedule.len()];
            for stage in prepared.stages() {
                for &id in stage {
                    let spec = &prepared.schedule.windows[id];
                    if spec.layers.1 >= g.num_layers {
                        continue;
                    }
                    let Some(deps) = spec.depends_on.iter().map(|&j| reused[j]).collect::<Option<Vec<usize>>>() else {
                        continue;
                    };
                    let twin = longest
                        .schedule
                        .windows
                        .iter()
                        .find(|w| same_window(w, spec) && w.depends_on == deps);
                    match twin {
                        Some(twin) => reused[id] = Some(twin.id),
                        None => {
                            return Err(Error::InvalidSchedule(format!(
                                "window {id} of the {}-cycle schedule has no twin in the {}-cycle schedule",
                                g.rounds, longest.graph.rounds
                            )))
                        }
                    }
                }
            }
            plans.push(RoundPlan { prepared, reused });
        }
        let reused = vec![None; longest.schedule.len()];
        plans.push(RoundPlan {
            prepared: longest,
            reused,
        });
        Ok(CellEngine {
            sampler,
            plans,
            window_workers: window_workers.max(1),
        })
    }

    /// Cycle counts, ascending; bit order of [`ShotOutcome::failures`].
    pub fn rounds(&self) -> Vec<usize> {
        self.sampler.rounds()
    }

    pub fn longest(&self) -> &PreparedSchedule<'g> {
        &self.plans.last().expect("non-empty").prepared
    }

    /// Windows decoded per shot with reuse, and without.
    pub fn decode_counts(&self) -> (usize, usize) {
        let fresh = self
            .plans
            .iter()
            .map(|p| p.reused.iter().filter(|r| r.is_none()).count())
            .sum();
        let total = self.plans.iter().map(|p| p.prepared.schedule.len()).sum();
        (fresh, total)
    }

    /// Runs one shot. `decoders` must hold at least one decoder; with
    /// several window workers the longest schedule uses one per worker.
    pub fn run_shot(
        &self,
        shot: u64,
        decoders: &mut [Box<dyn InnerDecoder>],
        clock: &mut WindowClock,
    ) -> Result<(ShotOutcome, Option<SchedulerReport>)> {
        let records = self.sampler.sample(shot);
        let last = self.plans.len() - 1;
        let top = &self.plans[last].prepared;
        let top_defects = &records[last].defects;

        let (top_kept, report) = if self.window_workers > 1 && top.schedule.len() > 1 {
            let pool: Vec<std::sync::Mutex<&mut Box<dyn InnerDecoder>>> =
                decoders.iter_mut().map(std::sync::Mutex::new).collect();
            let (kept, report) = schedule_parallel(&top.schedule, self.window_workers, |id, deps: &[(Vec<usize>, Duration)], worker| {
                let mut dec = pool[worker % pool.len()].lock().expect("decoder lock");
                let refs: Vec<&[usize]> = deps.iter().map(|(v, _)| v.as_slice()).collect();
                let t = Instant::now();
                let kept = top.decode_window(id, top_defects, &refs, dec.as_mut())?;
                Ok((kept, t.elapsed()))
            })?;
            let mut out = Vec::with_capacity(kept.len());
            for (id, (k, elapsed)) in kept.into_iter().enumerate() {
                clock.add(top.schedule.windows[id].window_type, elapsed);
                out.push(k);
            }
            (out, Some(report))
        } else {
            (decode_in_order(top, top_defects, &[], decoders[0].as_mut(), clock)?, None)
        };

        let mut failures = 0u64;
        for (i, (plan, record)) in self.plans.iter().zip(&records).enumerate() {
            let kept = if i == last {
                top_kept.clone()
            } else {
                let seeded: Vec<Option<Vec<usize>>> =
                    plan.reused.iter().map(|r| r.map(|j| top_kept[j].clone())).collect();
                decode_in_order(&plan.prepared, &record.defects, &seeded, decoders[0].as_mut(), clock)?
            };
            let set = assemble(plan.prepared.graph, &kept, &record.defects).map_err(|e| {
                Error::Invariant(format!(
                    "d={} p={} n={} seed={} shot={shot}: {e}",
                    plan.prepared.graph.d,
                    plan.prepared.graph.p,
                    record.rounds,
                    self.sampler.seed()
                ))
            })?;
            if set.logical_parity != record.true_parity {
                failures |= 1 << i;
            }
        }
        Ok((ShotOutcome { failures }, report))
    }
}

/// Decodes the windows not already supplied in `seeded`, in stage order.
fn decode_in_order(
    prepared: &PreparedSchedule,
    defects: &[usize],
    seeded: &[Option<Vec<usize>>],
    decoder: &mut dyn InnerDecoder,
    clock: &mut WindowClock,
) -> Result<Vec<Vec<usize>>> {
    let mut kept: Vec<Option<Vec<usize>>> = if seeded.is_empty() {
        vec![None; prepared.schedule.len()]
    } else {
        seeded.to_vec()
    };
    for stage in prepared.stages() {
        for &id in stage {
            if kept[id].is_some() {
                continue;
            }
            let spec = &prepared.schedule.windows[id];
            let deps: Vec<&[usize]> = spec
                .depends_on
                .iter()
                .map(|&j| kept[j].as_deref().expect("dependencies come in earlier stages"))
                .collect();
            let t = Instant::now();
            let out = prepared.decode_window(id, defects, &deps, decoder);
            clock.add(spec.window_type, t.elapsed());
            kept[id] = Some(out.map_err(|e| {
                Error::Invariant(format!(
                    "d={} p={} n={} window {id}: {e}",
                    prepared.graph.d, prepared.graph.p, prepared.graph.rounds
                ))
            })?);
        }
    }
    Ok(kept.into_iter().map(|k| k.expect("every window decoded")).collect())
}

/// Fresh decoders for one shot worker.
pub fn decoder_set(kind: InnerKind, count: usize) -> Vec<Box<dyn InnerDecoder>> {
    (0..count.max(1)).map(|_| kind.build()).collect()
}
