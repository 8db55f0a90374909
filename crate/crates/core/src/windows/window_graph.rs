//! Cutting window graphs out of a full decoder graph and decoding them.

use serde::Serialize;

use super::schedule::{Schedule, WindowSpec, WindowType};
use super::{assemble, CorrectionSet};
use crate::decoders::{length_of, DecodingGraph, InnerDecoder};
use crate::error::{Error, Result};
use crate::surface_code::{BoundaryState, DecoderGraph};

/// A window of a decoder graph, ready for an inner decoder.
#[derive(Debug, Clone)]
pub struct WindowGraph {
    pub spec: WindowSpec,
    pub decoding: DecodingGraph,
    /// Global id of the first real vertex in the window. Real vertices keep
    /// their order, so local `v` is global `offset + v`.
    pub offset: usize,
    pub num_real: usize,
    /// Global edge behind each local edge.
    pub local_to_global: Vec<usize>,
    pub core_mask: Vec<bool>,
    /// Sorted global ids of the core edges.
    pub core_edges: Vec<usize>,
    /// Sorted global ids of the other edges seen by the window.
    pub buffer_edges: Vec<usize>,
    /// Imaginary detectors added for edges crossing an open time boundary.
    pub cut_boundaries: usize,
}

/// Builds the window's decoding graph. Edges crossing an open time side are
/// reattached to a fresh imaginary detector; across a closed side they are
/// left out.
pub fn extract_window_graph(graph: &DecoderGraph, spec: &WindowSpec) -> Result<WindowGraph> {
    let base = graph.first_layer - 1;
    let (rel_lo, rel_hi) = spec.layers;
    if rel_lo == 0 || rel_lo > rel_hi || rel_hi + base > graph.last_layer() || graph.num_layers == 0 {
        return Err(Error::InvalidSchedule(format!(
            "window {} spans layers {rel_lo}..={rel_hi}, outside the graph's {} layers",
            spec.id, graph.num_layers
        )));
    }
    let (f, h) = (rel_lo + base, rel_hi + base);
    let offset = graph.real_vertex(f, 0);
    let num_real = (h - f + 1) * graph.checks_per_layer;
    let end_real = offset + num_real;
    let inside = |v: usize| v >= offset && v < end_real;

    let first_edge = if f > graph.first_layer {
        graph.edges_at_layer(f - 1).start
    } else {
        graph.edges_at_layer(f).start
    };
    let edge_range = first_edge..graph.edges_at_layer(h).end;

    let mut imaginaries: Vec<usize> = graph.edges[edge_range.clone()]
        .iter()
        .filter(|e| !graph.is_real(e.b) && inside(e.a))
        .map(|e| e.b)
        .collect();
    imaginaries.sort_unstable();
    imaginaries.dedup();
    let imaginary_local = |g: usize| num_real + imaginaries.binary_search(&g).expect("collected above");

    let mut boundary = vec![false; num_real];
    boundary.resize(num_real + imaginaries.len(), true);
    let mut edges = Vec::new();
    let mut local_to_global = Vec::new();
    let mut core_mask = Vec::new();
    let mut core_edges = Vec::new();
    let mut buffer_edges = Vec::new();
    let mut cut_boundaries = 0;
    let fresh = |boundary: &mut Vec<bool>| {
        boundary.push(true);
        boundary.len() - 1
    };

    for e in edge_range {
        let edge = &graph.edges[e];
        let a_in = inside(edge.a);
        let b_real = graph.is_real(edge.b);
        let b_in = b_real && inside(edge.b);
        let length = length_of(edge.weight);
        let (u, v, is_core) = if !a_in {
            // lower endpoint below the window
            if !b_in {
                continue;
            }
            if spec.past_boundary == BoundaryState::Closed {
                continue;
            }
            cut_boundaries += 1;
            (edge.b - offset, fresh(&mut boundary), false)
        } else if b_real && !b_in {
            if spec.future_boundary == BoundaryState::Closed {
                continue;
            }
            cut_boundaries += 1;
            let core = spec.core.contains(edge.layer - base, edge.horizontal);
            (edge.a - offset, fresh(&mut boundary), core)
        } else {
            let v = if b_real { edge.b - offset } else { imaginary_local(edge.b) };
            (edge.a - offset, v, spec.core.contains(edge.layer - base, edge.horizontal))
        };
        edges.push((u, v, length, edge.logical));
        local_to_global.push(e);
        core_mask.push(is_core);
        if is_core {
            core_edges.push(e);
        } else {
            buffer_edges.push(e);
        }
    }

    Ok(WindowGraph {
        spec: spec.clone(),
        decoding: DecodingGraph::new(boundary, &edges),
        offset,
        num_real,
        local_to_global,
        core_mask,
        core_edges,
        buffer_edges,
        cut_boundaries,
    })
}

/// XORs the boundary of `accepted` onto `defects` for the detectors inside
/// `range` (global real ids); detectors outside stay as they are.
pub fn propagate_syndrome(
    graph: &DecoderGraph,
    defects: &[usize],
    range: std::ops::Range<usize>,
    accepted: &[usize],
) -> Vec<usize> {
    let mut toggles: Vec<usize> = defects.to_vec();
    for &e in accepted {
        let edge = &graph.edges[e];
        for v in [edge.a, edge.b] {
            if graph.is_real(v) && range.contains(&v) {
                toggles.push(v);
            }
        }
    }
    odd_multiplicity(toggles)
}

/// Elements appearing an odd number of times, sorted.
pub(crate) fn odd_multiplicity(mut items: Vec<usize>) -> Vec<usize> {
    items.sort_unstable();
    let mut out = Vec::with_capacity(items.len());
    let mut i = 0;
    while i < items.len() {
        let mut j = i;
        while j < items.len() && items[j] == items[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(items[i]);
        }
        i = j;
    }
    out
}

impl WindowGraph {
    pub fn real_range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.num_real
    }

    /// Local defects: the shot's defects inside the window, updated by the
    /// corrections already accepted by the windows this one depends on.
    pub fn local_defects(&self, graph: &DecoderGraph, defects: &[usize], accepted: &[&[usize]]) -> Vec<usize> {
        let lo = defects.partition_point(|&v| v < self.offset);
        let hi = defects.partition_point(|&v| v < self.offset + self.num_real);
        let mut global = defects[lo..hi].to_vec();
        for edges in accepted {
            global = propagate_syndrome(graph, &global, self.real_range(), edges);
        }
        global.into_iter().map(|v| v - self.offset).collect()
    }

    /// Runs the inner decoder and returns the retained core edges as sorted
    /// global ids.
    pub fn decode(&self, decoder: &mut dyn InnerDecoder, local_defects: &[usize]) -> Result<Vec<usize>> {
        let local = decoder.decode(&self.decoding, local_defects)?;
        let mut kept: Vec<usize> = local
            .into_iter()
            .filter(|&e| self.core_mask[e])
            .map(|e| self.local_to_global[e])
            .collect();
        kept.sort_unstable();
        Ok(kept)
    }
}

/// Per-window summary for schedule dumps.
#[derive(Debug, Clone, Serialize)]
pub struct WindowSummary {
    pub id: usize,
    pub window_type: WindowType,
    pub layers: (usize, usize),
    pub past_boundary: BoundaryState,
    pub future_boundary: BoundaryState,
    pub core_edges: usize,
    pub buffer_edges: usize,
    pub cut_boundaries: usize,
    pub depends_on: Vec<usize>,
}

/// A schedule with every window graph cut out of one decoder graph.
#[derive(Debug, Clone)]
pub struct PreparedSchedule<'g> {
    pub graph: &'g DecoderGraph,
    pub schedule: Schedule,
    pub windows: Vec<WindowGraph>,
    stages: Vec<Vec<usize>>,
}

impl<'g> PreparedSchedule<'g> {
    /// Extracts all windows and checks that the cores partition the edges.
    pub fn new(graph: &'g DecoderGraph, schedule: Schedule) -> Result<Self> {
        if schedule.num_layers != graph.num_layers {
            return Err(Error::InvalidSchedule(format!(
                "schedule covers {} layers but the graph has {}",
                schedule.num_layers, graph.num_layers
            )));
        }
        let windows = schedule
            .windows
            .iter()
            .map(|spec| extract_window_graph(graph, spec))
            .collect::<Result<Vec<_>>>()?;
        let mut owner = vec![usize::MAX; graph.edges.len()];
        for w in &windows {
            for &e in &w.core_edges {
                if owner[e] != usize::MAX {
                    return Err(Error::Invariant(format!(
                        "edge {e} lies in the cores of windows {} and {}",
                        owner[e], w.spec.id
                    )));
                }
                owner[e] = w.spec.id;
            }
        }
        if let Some(e) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::Invariant(format!("edge {e} lies in no core")));
        }
        let stages = schedule.stages();
        Ok(PreparedSchedule {
            graph,
            schedule,
            windows,
            stages,
        })
    }

    pub fn stages(&self) -> &[Vec<usize>] {
        &self.stages
    }

    /// Decodes one window given the retained corrections of its
    /// dependencies, in `depends_on` order.
    pub fn decode_window(
        &self,
        id: usize,
        defects: &[usize],
        accepted: &[&[usize]],
        decoder: &mut dyn InnerDecoder,
    ) -> Result<Vec<usize>> {
        let window = &self.windows[id];
        let local = window.local_defects(self.graph, defects, accepted);
        window.decode(decoder, &local)
    }

    /// Decodes every window in dependency order on the calling thread.
    pub fn decode_serial(&self, defects: &[usize], decoder: &mut dyn InnerDecoder) -> Result<CorrectionSet> {
        let mut retained: Vec<Option<Vec<usize>>> = vec![None; self.windows.len()];
        for stage in &self.stages {
            for &id in stage {
                let deps: Vec<&[usize]> = self.windows[id]
                    .spec
                    .depends_on
                    .iter()
                    .map(|&j| retained[j].as_deref().expect("dependency decoded in an earlier stage"))
                    .collect();
                let kept = self.decode_window(id, defects, &deps, decoder)?;
                retained[id] = Some(kept);
            }
        }
        let parts: Vec<Vec<usize>> = retained.into_iter().map(|r| r.unwrap_or_default()).collect();
        assemble(self.graph, &parts, defects)
    }

    pub fn summary(&self) -> Vec<WindowSummary> {
        self.windows
            .iter()
            .map(|w| WindowSummary {
                id: w.spec.id,
                window_type: w.spec.window_type,
                layers: w.spec.layers,
                past_boundary: w.spec.past_boundary,
                future_boundary: w.spec.future_boundary,
                core_edges: w.core_edges.len(),
                buffer_edges: w.buffer_edges.len(),
                cut_boundaries: w.cut_boundaries,
                depends_on: w.spec.depends_on.clone(),
            })
            .collect()
    }
}
