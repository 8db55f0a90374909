//! Generalized sandwich decoding on an arbitrary (hyper)graph.
//!
//! At each level a partition method picks cores `C_i` whose incident edge
//! sets `Δ(E, C_i)` are pairwise disjoint. Each core is decoded inside a
//! larger window and only `K_i ⊆ Δ(E, C_i)` is kept, which fixes the
//! defects on `C_i` exactly. The cores and their incident edges are then
//! removed, the defects updated by `∂(⊔ K_i)`, and the rest is decoded
//! recursively. When the partition method declines, every connected
//! component of what is left goes straight to the inner decoder.

use super::schedule::{EdgeRule, Schedule, WindowType};
use super::window_graph::odd_multiplicity;
use super::CorrectionSet;
use crate::decoders::{length_of, DecodingGraph, InnerDecoder};
use crate::error::{Error, Result};
use crate::surface_code::{BoundaryState, DecoderGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct HyperEdge {
    /// Sorted detector endpoints.
    pub vertices: Vec<usize>,
    /// Boundary vertex the edge also ends on, if any. Edges sharing a
    /// boundary vertex share it in every decoding graph built from them.
    pub boundary: Option<usize>,
    pub length: i64,
    pub logical: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    pub num_vertices: usize,
    pub edges: Vec<HyperEdge>,
}

impl Hypergraph {
    /// Real detectors become vertices; imaginary ones become boundary tags.
    pub fn from_decoder_graph(graph: &DecoderGraph) -> Self {
        let edges = graph
            .edges
            .iter()
            .map(|e| {
                let (vertices, boundary) = if graph.is_real(e.b) {
                    (vec![e.a, e.b], None)
                } else {
                    (vec![e.a], Some(e.b))
                };
                HyperEdge {
                    vertices,
                    boundary,
                    length: length_of(e.weight),
                    logical: e.logical,
                }
            })
            .collect();
        Hypergraph {
            num_vertices: graph.num_real(),
            edges,
        }
    }

    /// Vertices with odd incidence under `edges`, sorted.
    pub fn boundary_of(&self, edges: &[usize]) -> Vec<usize> {
        odd_multiplicity(edges.iter().flat_map(|&e| self.edges[e].vertices.iter().copied()).collect())
    }

    pub fn correction(&self, mut edges: Vec<usize>) -> CorrectionSet {
        edges.sort_unstable();
        let logical_parity = edges.iter().fold(false, |acc, &e| acc ^ self.edges[e].logical);
        CorrectionSet { edges, logical_parity }
    }
}

/// A decoding problem `(V, E, D)` on a hypergraph.
#[derive(Debug, Clone, PartialEq)]
pub struct GsInstance {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub defects: Vec<usize>,
}

impl GsInstance {
    pub fn new(hg: &Hypergraph, mut vertices: Vec<usize>, mut edges: Vec<usize>, mut defects: Vec<usize>) -> Result<Self> {
        vertices.sort_unstable();
        vertices.dedup();
        edges.sort_unstable();
        edges.dedup();
        defects.sort_unstable();
        defects.dedup();
        let member = |v: &usize| vertices.binary_search(v).is_ok();
        if let Some(v) = defects.iter().find(|v| !member(v)) {
            return Err(Error::Invariant(format!("defect {v} is not a vertex of the instance")));
        }
        for &e in &edges {
            let edge = hg
                .edges
                .get(e)
                .ok_or_else(|| Error::Invariant(format!("edge {e} is not in the hypergraph")))?;
            if let Some(v) = edge.vertices.iter().find(|v| !member(v)) {
                return Err(Error::Invariant(format!("edge {e} ends on {v}, outside the instance")));
            }
        }
        Ok(GsInstance { vertices, edges, defects })
    }

    /// The whole hypergraph with the given defects.
    pub fn whole(hg: &Hypergraph, defects: Vec<usize>) -> Result<Self> {
        Self::new(hg, (0..hg.num_vertices).collect(), (0..hg.edges.len()).collect(), defects)
    }
}

/// One core and the window it is decoded in.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreRegion {
    pub core: Vec<usize>,
    /// Vertices of the window, a superset of the core.
    pub window: Vec<usize>,
    /// Whether edges leaving the window end on a fresh boundary vertex
    /// (open) or are left out (closed).
    pub open_cut: bool,
}

pub trait PartitionMethod {
    /// Cores for this level of the recursion, or `None` to hand the
    /// instance to the inner decoder component by component.
    fn partition(&self, hg: &Hypergraph, instance: &GsInstance, depth: usize) -> Option<Vec<CoreRegion>>;
}

pub fn generalized_sandwich(
    hg: &Hypergraph,
    instance: &GsInstance,
    partition: &dyn PartitionMethod,
    decoder: &mut dyn InnerDecoder,
) -> Result<CorrectionSet> {
    let edges = recurse(hg, instance, partition, decoder, 0)?;
    Ok(hg.correction(edges))
}

fn recurse(
    hg: &Hypergraph,
    instance: &GsInstance,
    partition: &dyn PartitionMethod,
    decoder: &mut dyn InnerDecoder,
    depth: usize,
) -> Result<Vec<usize>> {
    if instance.defects.is_empty() {
        return Ok(Vec::new());
    }
    let Some(regions) = partition.partition(hg, instance, depth) else {
        return solve_components(hg, instance, decoder);
    };
    let in_instance = |v: usize| instance.vertices.binary_search(&v).is_ok();

    const FREE: usize = usize::MAX;
    let mut core_of = vec![FREE; hg.num_vertices];
    let mut removed = 0;
    for (i, region) in regions.iter().enumerate() {
        for &v in &region.core {
            if !in_instance(v) {
                return Err(Error::Invariant(format!("core {i} contains {v}, outside the instance")));
            }
            if core_of[v] != FREE {
                return Err(Error::Invariant(format!("vertex {v} lies in cores {} and {i}", core_of[v])));
            }
            core_of[v] = i;
            removed += 1;
        }
    }
    if removed == 0 {
        return Err(Error::Invariant("partition produced no core vertices".into()));
    }

    // Δ(E, C_i), checked for disjointness
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); regions.len()];
    let mut remaining_edges = Vec::new();
    for &e in &instance.edges {
        let mut owner = None;
        for &v in &hg.edges[e].vertices {
            let c = core_of[v];
            if c == FREE {
                continue;
            }
            match owner {
                None => owner = Some(c),
                Some(o) if o != c => {
                    return Err(Error::Invariant(format!("edge {e} is incident to cores {o} and {c}")));
                }
                _ => {}
            }
        }
        match owner {
            Some(c) => incident[c].push(e),
            None => remaining_edges.push(e),
        }
    }

    let mut kept = Vec::new();
    for (i, region) in regions.iter().enumerate() {
        let k = solve_region(hg, instance, region, &incident[i], decoder)?;
        let mut core = region.core.clone();
        core.sort_unstable();
        let on_core = |vs: Vec<usize>| -> Vec<usize> { vs.into_iter().filter(|v| core.binary_search(v).is_ok()).collect() };
        let got = on_core(hg.boundary_of(&k));
        let want = on_core(instance.defects.clone());
        if got != want {
            return Err(Error::Invariant(format!(
                "corrections for core {i} do not reproduce its defects"
            )));
        }
        kept.extend(k);
    }

    let vertices: Vec<usize> = instance.vertices.iter().copied().filter(|&v| core_of[v] == FREE).collect();
    let defects = odd_multiplicity(
        instance
            .defects
            .iter()
            .copied()
            .chain(hg.boundary_of(&kept))
            .collect(),
    );
    if let Some(&v) = defects.iter().find(|&&v| core_of[v] != FREE) {
        return Err(Error::Invariant(format!("defect {v} left on a removed core")));
    }
    let rest = GsInstance {
        vertices,
        edges: remaining_edges,
        defects,
    };
    kept.extend(recurse(hg, &rest, partition, decoder, depth + 1)?);
    kept.sort_unstable();
    Ok(kept)
}

/// Decodes the window around a core and keeps the edges incident to it.
fn solve_region(
    hg: &Hypergraph,
    instance: &GsInstance,
    region: &CoreRegion,
    incident: &[usize],
    decoder: &mut dyn InnerDecoder,
) -> Result<Vec<usize>> {
    let mut window = region.window.clone();
    window.sort_unstable();
    let inside = |v: &usize| window.binary_search(v).is_ok();
    let edges: Vec<usize> = instance
        .edges
        .iter()
        .copied()
        .filter(|&e| hg.edges[e].vertices.iter().any(inside))
        .collect();
    let defects: Vec<usize> = instance.defects.iter().copied().filter(|v| inside(v)).collect();
    let local = decode_local(hg, &window, &edges, region.open_cut, &defects, decoder)?;
    Ok(local.into_iter().filter(|e| incident.binary_search(e).is_ok()).collect())
}

fn solve_components(hg: &Hypergraph, instance: &GsInstance, decoder: &mut dyn InnerDecoder) -> Result<Vec<usize>> {
    let n = instance.vertices.len();
    let pos = |v: usize| instance.vertices.binary_search(&v).expect("edge endpoints lie in the instance");
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for &e in &instance.edges {
        let vs = &hg.edges[e].vertices;
        for w in vs.windows(2) {
            let (a, b) = (find(&mut parent, pos(w[0])), find(&mut parent, pos(w[1])));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut comp_vertices: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut comp_defects: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut comp_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &v) in instance.vertices.iter().enumerate() {
        let r = find(&mut parent, i);
        comp_vertices[r].push(v);
    }
    for &d in &instance.defects {
        let r = find(&mut parent, pos(d));
        comp_defects[r].push(d);
    }
    for &e in &instance.edges {
        if let Some(&v) = hg.edges[e].vertices.first() {
            let r = find(&mut parent, pos(v));
            comp_edges[r].push(e);
        }
    }
    let mut out = Vec::new();
    for r in 0..n {
        if comp_defects[r].is_empty() {
            continue;
        }
        out.extend(decode_local(hg, &comp_vertices[r], &comp_edges[r], false, &comp_defects[r], decoder)?);
    }
    Ok(out)
}

/// Builds a decoding graph on `vertices` (sorted) from `edges` (sorted)
/// and runs the inner decoder. Local vertex ids follow the global order,
/// boundary vertices follow in tag order, then one fresh boundary vertex
/// per cut edge.
fn decode_local(
    hg: &Hypergraph,
    vertices: &[usize],
    edges: &[usize],
    open_cut: bool,
    defects: &[usize],
    decoder: &mut dyn InnerDecoder,
) -> Result<Vec<usize>> {
    let local_of = |v: usize| vertices.binary_search(&v).ok();
    let mut tags: Vec<usize> = edges
        .iter()
        .filter_map(|&e| {
            let edge = &hg.edges[e];
            let all_inside = edge.vertices.iter().all(|&v| local_of(v).is_some());
            edge.boundary.filter(|_| all_inside)
        })
        .collect();
    tags.sort_unstable();
    tags.dedup();
    let n = vertices.len();
    let mut boundary = vec![false; n];
    boundary.resize(n + tags.len(), true);
    let mut local_edges = Vec::with_capacity(edges.len());
    let mut local_to_global = Vec::with_capacity(edges.len());
    for &e in edges {
        let edge = &hg.edges[e];
        if edge.vertices.len() > 2 {
            return Err(Error::Invariant(format!(
                "edge {e} has {} endpoints; graph decoders need at most two",
                edge.vertices.len()
            )));
        }
        let inside: Vec<usize> = edge.vertices.iter().filter_map(|&v| local_of(v)).collect();
        let cut = inside.len() < edge.vertices.len();
        let (u, v) = match (inside.as_slice(), cut) {
            ([a, b], _) => (*a, *b),
            ([a], false) => match edge.boundary {
                Some(tag) => (*a, n + tags.binary_search(&tag).expect("collected above")),
                None => return Err(Error::Invariant(format!("edge {e} has a single endpoint and no boundary"))),
            },
            ([a], true) => {
                if !open_cut {
                    continue;
                }
                boundary.push(true);
                (*a, boundary.len() - 1)
            }
            _ => continue,
        };
        local_edges.push((u, v, edge.length, edge.logical));
        local_to_global.push(e);
    }
    let graph = DecodingGraph::new(boundary, &local_edges);
    let local_defects: Vec<usize> = defects
        .iter()
        .map(|&d| local_of(d).expect("defects lie inside the decoded region"))
        .collect();
    let found = decoder.decode(&graph, &local_defects)?;
    Ok(found.into_iter().map(|e| local_to_global[e]).collect())
}

/// Time-layer cores of a sandwich schedule: the type-1 cores at the first
/// level, then every seam decoded directly.
#[derive(Debug, Clone)]
pub struct TimePartition<'a> {
    pub graph: &'a DecoderGraph,
    pub schedule: &'a Schedule,
}

impl PartitionMethod for TimePartition<'_> {
    fn partition(&self, _hg: &Hypergraph, _instance: &GsInstance, depth: usize) -> Option<Vec<CoreRegion>> {
        if depth > 0 {
            return None;
        }
        let type1: Vec<_> = self
            .schedule
            .windows
            .iter()
            .filter(|w| w.window_type == WindowType::Type1)
            .collect();
        if type1.is_empty() {
            return None;
        }
        let base = self.graph.first_layer - 1;
        let vertices_of = |lo: usize, hi: usize| -> Vec<usize> {
            if lo > hi {
                return Vec::new();
            }
            let start = self.graph.real_vertex(lo + base, 0);
            let end = self.graph.real_vertex(hi + base, 0) + self.graph.checks_per_layer;
            (start..end).collect()
        };
        let open_cut = self.schedule.params.artificial_boundary == BoundaryState::Open;
        Some(
            type1
                .into_iter()
                .map(|w| {
                    // a core that skips horizontal edges on its first layer
                    // does not own that layer's vertices
                    let first = match w.core.lo_rule {
                        EdgeRule::All => w.core.lo,
                        _ => w.core.lo + 1,
                    };
                    CoreRegion {
                        core: vertices_of(first, w.core.hi),
                        window: vertices_of(w.layers.0, w.layers.1),
                        open_cut,
                    }
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoders::{MwpmDecoder, UnionFindDecoder};
    use crate::surface_code::{build_decoder_graph, build_layout, build_memory_circuit, PauliType};
    use crate::windows::{PreparedSchedule, ScheduleParams};

    struct Direct;

    impl PartitionMethod for Direct {
        fn partition(&self, _: &Hypergraph, _: &GsInstance, _: usize) -> Option<Vec<CoreRegion>> {
            None
        }
    }

    fn z_graph(d: usize, rounds: usize) -> DecoderGraph {
        let circuit = build_memory_circuit(&build_layout(d).unwrap(), rounds).unwrap();
        build_decoder_graph(&circuit, 0.002, PauliType::Z).unwrap()
    }

    #[test]
    fn no_defects_means_no_corrections() {
        let graph = z_graph(3, 3);
        let hg = Hypergraph::from_decoder_graph(&graph);
        let inst = GsInstance::whole(&hg, vec![]).unwrap();
        let k = generalized_sandwich(&hg, &inst, &Direct, &mut UnionFindDecoder::new()).unwrap();
        assert!(k.edges.is_empty() && !k.logical_parity);
    }

    #[test]
    fn disconnected_components_are_decoded_separately() {
        // two paths 0-1 and 2-3, each with a boundary on its left end
        let edge = |vertices: Vec<usize>, boundary| HyperEdge {
            vertices,
            boundary,
            length: 10,
            logical: false,
        };
        let hg = Hypergraph {
            num_vertices: 4,
            edges: vec![
                edge(vec![0], Some(100)),
                edge(vec![0, 1], None),
                edge(vec![2], Some(101)),
                edge(vec![2, 3], None),
            ],
        };
        let inst = GsInstance::whole(&hg, vec![1, 3]).unwrap();
        let k = generalized_sandwich(&hg, &inst, &Direct, &mut MwpmDecoder::new()).unwrap();
        assert_eq!(k.edges, vec![0, 1, 2, 3]);
        assert_eq!(hg.boundary_of(&k.edges), vec![1, 3]);
    }

    #[test]
    fn instance_rejects_foreign_defects() {
        let graph = z_graph(3, 2);
        let hg = Hypergraph::from_decoder_graph(&graph);
        assert!(GsInstance::new(&hg, vec![0, 1], vec![], vec![2]).is_err());
    }

    #[test]
    fn overlapping_incident_sets_are_rejected() {
        struct Adjacent;
        impl PartitionMethod for Adjacent {
            fn partition(&self, hg: &Hypergraph, _: &GsInstance, _: usize) -> Option<Vec<CoreRegion>> {
                let e = hg.edges.iter().find(|e| e.vertices.len() == 2).unwrap();
                let region = |v: usize| CoreRegion {
                    core: vec![v],
                    window: vec![v],
                    open_cut: true,
                };
                Some(vec![region(e.vertices[0]), region(e.vertices[1])])
            }
        }
        let graph = z_graph(3, 2);
        let hg = Hypergraph::from_decoder_graph(&graph);
        let inst = GsInstance::whole(&hg, graph.boundary_of([0])).unwrap();
        let err = generalized_sandwich(&hg, &inst, &Adjacent, &mut UnionFindDecoder::new()).unwrap_err();
        assert!(err.to_string().contains("incident to cores"));
    }

    #[test]
    fn time_partition_matches_sandwich_on_single_faults() {
        let graph = z_graph(3, 8);
        let hg = Hypergraph::from_decoder_graph(&graph);
        for t in [-1i64, 0, 1] {
            let params = ScheduleParams::sandwich(2, 1, t).unwrap();
            let schedule = Schedule::build(&params, graph.num_layers).unwrap();
            let prepared = PreparedSchedule::new(&graph, schedule.clone()).unwrap();
            let part = TimePartition {
                graph: &graph,
                schedule: &schedule,
            };
            let mut uf = UnionFindDecoder::new();
            for e in 0..graph.edges.len() {
                let defects = graph.boundary_of([e]);
                let direct = prepared.decode_serial(&defects, &mut uf).unwrap();
                let inst = GsInstance::whole(&hg, defects).unwrap();
                let gs = generalized_sandwich(&hg, &inst, &part, &mut uf).unwrap();
                assert_eq!(gs, direct, "t={t} edge {e}");
            }
        }
    }
}
