//! Decoder graphs: detectors as vertices, fault equivalence classes as
//! weighted edges.
//!
//! Real detectors are numbered `(layer, check)` lexicographically and
//! imaginary detectors follow. Edges are sorted by the lowest layer they
//! touch, so the edges of an `n`-cycle graph that stay below layer `n + 1`
//! have the same ids in every graph built for a larger cycle count.

use std::collections::{BTreeSet, HashMap};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use super::faults::{enumerate_fault_classes, BoundaryKind, FaultClass, FaultLocation, FaultOrigin};
use super::layout::PauliType;
use crate::error::{Error, Result};

pub const GRAPH_SCHEMA_VERSION: u32 = 1;

/// Probabilities below this are treated as this value when computing weights.
const MIN_EDGE_PROBABILITY: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorKind {
    Real,
    Imaginary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetectorId {
    pub kind: DetectorKind,
    pub pauli: PauliType,
    /// Detector layer; for an imaginary detector, the layer of the real
    /// detector it is attached to.
    pub layer: usize,
    /// Check index for real detectors, serial number for imaginary ones.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: DetectorId,
    /// Real detector that some single fault can flip alone.
    pub open: bool,
    /// For imaginary detectors, the real detector it hangs off and which
    /// boundary it stands for.
    pub attached: Option<(usize, BoundaryKind)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Endpoints with `a < b`; `a` is always real.
    pub a: usize,
    pub b: usize,
    pub probability: f64,
    pub weight: f64,
    pub logical: bool,
    /// Lowest detector layer touched.
    pub layer: usize,
    /// All real endpoints lie in one layer.
    pub horizontal: bool,
    /// Human-readable description of the merged faults.
    pub fault_class: String,
}

impl Edge {
    pub fn endpoints(&self) -> [usize; 2] {
        [self.a, self.b]
    }
}

/// A group of faults from one origin that flip the same edge. Sampling
/// mechanisms instead of edges lets shots be shared between graphs built
/// for different cycle counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mechanism {
    pub origin: FaultOrigin,
    pub edge: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryState {
    Open,
    Closed,
}

impl std::str::FromStr for BoundaryState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "open" => Ok(BoundaryState::Open),
            "closed" => Ok(BoundaryState::Closed),
            other => Err(format!("unknown boundary state '{other}' (expected open or closed)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryMetadata {
    pub top: BoundaryState,
    pub bottom: BoundaryState,
    pub left: BoundaryState,
    pub right: BoundaryState,
    pub past: BoundaryState,
    pub future: BoundaryState,
}

impl BoundaryMetadata {
    fn for_memory(pauli: PauliType) -> Self {
        use BoundaryState::*;
        match pauli {
            PauliType::Z => BoundaryMetadata {
                top: Open,
                bottom: Open,
                left: Closed,
                right: Closed,
                past: Closed,
                future: Closed,
            },
            PauliType::X => BoundaryMetadata {
                top: Closed,
                bottom: Closed,
                left: Open,
                right: Open,
                past: Open,
                future: Open,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderGraph {
    pub schema_version: u32,
    pub pauli: PauliType,
    pub d: usize,
    pub rounds: usize,
    pub p: f64,
    pub observable_row: usize,
    pub first_layer: usize,
    pub num_layers: usize,
    pub checks_per_layer: usize,
    /// Plaquette coordinate of each check.
    pub check_plaquettes: Vec<(usize, usize)>,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// Sorted by origin, then edge.
    pub mechanisms: Vec<Mechanism>,
    pub boundary: BoundaryMetadata,
    /// `layer_edge_start[k]..layer_edge_start[k + 1]` are the edges whose
    /// lowest layer is `first_layer + k`.
    pub layer_edge_start: Vec<usize>,
}

impl DecoderGraph {
    pub fn num_real(&self) -> usize {
        self.num_layers * self.checks_per_layer
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_real(&self, v: usize) -> bool {
        v < self.num_real()
    }

    /// Last real detector layer.
    pub fn last_layer(&self) -> usize {
        self.first_layer + self.num_layers - 1
    }

    pub fn real_vertex(&self, layer: usize, check: usize) -> usize {
        debug_assert!(layer >= self.first_layer && layer <= self.last_layer());
        (layer - self.first_layer) * self.checks_per_layer + check
    }

    pub fn layer_of(&self, v: usize) -> usize {
        self.vertices[v].id.layer
    }

    /// Real vertex ids of one layer.
    pub fn layer_vertices(&self, layer: usize) -> Range<usize> {
        let start = self.real_vertex(layer, 0);
        start..start + self.checks_per_layer
    }

    /// Edges whose lowest layer is `layer`.
    pub fn edges_at_layer(&self, layer: usize) -> Range<usize> {
        if layer < self.first_layer || layer > self.last_layer() {
            return 0..0;
        }
        let k = layer - self.first_layer;
        self.layer_edge_start[k]..self.layer_edge_start[k + 1]
    }

    /// Edge ids incident to each vertex.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices()];
        for (e, edge) in self.edges.iter().enumerate() {
            adj[edge.a].push(e);
            adj[edge.b].push(e);
        }
        adj
    }

    pub fn find_edge(&self, a: usize, b: usize, logical: bool) -> Option<usize> {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let range = self.edges_at_layer(self.layer_of(a));
        let slice = &self.edges[range.clone()];
        slice
            .binary_search_by(|e| (e.a, e.b, e.logical).cmp(&(a, b, logical)))
            .ok()
            .map(|i| range.start + i)
    }

    /// Real detectors with odd parity under the given edge set.
    pub fn boundary_of(&self, edges: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut parity = vec![false; self.num_real()];
        for e in edges {
            let edge = &self.edges[e];
            parity[edge.a] ^= true;
            if self.is_real(edge.b) {
                parity[edge.b] ^= true;
            }
        }
        parity
            .iter()
            .enumerate()
            .filter_map(|(v, &odd)| odd.then_some(v))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let graph: DecoderGraph = serde_json::from_str(text)?;
        if graph.schema_version != GRAPH_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "decoder graph schema version {} is not supported (expected {})",
                graph.schema_version, GRAPH_SCHEMA_VERSION
            )));
        }
        Ok(graph)
    }
}

pub fn edge_weight(probability: f64) -> f64 {
    let p = probability.max(MIN_EDGE_PROBABILITY);
    ((1.0 - p) / p).ln()
}

/// XOR of two independent Bernoulli variables.
pub fn merge_probability(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

/// Builds the `pauli`-type decoder graph with the logical observable taken
/// on data row 0.
pub fn build_decoder_graph(circuit: &Circuit, p: f64, pauli: PauliType) -> Result<DecoderGraph> {
    build_decoder_graph_with_row(circuit, p, pauli, 0)
}

pub fn build_decoder_graph_with_row(
    circuit: &Circuit,
    p: f64,
    pauli: PauliType,
    observable_row: usize,
) -> Result<DecoderGraph> {
    let faults = enumerate_fault_classes(circuit, p, observable_row)?;
    Ok(graph_from_faults(circuit, p, pauli, observable_row, &faults))
}

struct EdgeAcc {
    probability: f64,
    first: FaultLocation,
    merged: usize,
}

/// Groups fault classes into edges. Only the Z-type graph carries logical
/// bits, since the memory experiment measures a Z observable.
pub fn graph_from_faults(
    circuit: &Circuit,
    p: f64,
    pauli: PauliType,
    observable_row: usize,
    faults: &[FaultClass],
) -> DecoderGraph {
    let layout = &circuit.layout;
    let n = circuit.rounds;
    let checks = layout.checks(pauli);
    let nc = checks.len();
    let (first_layer, num_layers) = match pauli {
        PauliType::Z => (1, n + 1),
        PauliType::X => (2, n.saturating_sub(1)),
    };
    let num_real = nc * num_layers;

    let mut open: BTreeSet<(usize, BoundaryKind)> = BTreeSet::new();
    for fault in faults {
        if let [v] = fault.detectors(pauli) {
            let kind = match pauli {
                PauliType::Z => BoundaryKind::Space,
                PauliType::X => fault.kind(pauli),
            };
            open.insert((*v, kind));
        }
    }
    let imaginary: HashMap<(usize, BoundaryKind), usize> = open
        .iter()
        .enumerate()
        .map(|(i, &key)| (key, num_real + i))
        .collect();

    let mut vertices: Vec<Vertex> = (0..num_real)
        .map(|v| Vertex {
            id: DetectorId {
                kind: DetectorKind::Real,
                pauli,
                layer: first_layer + v / nc,
                index: v % nc,
            },
            open: false,
            attached: None,
        })
        .collect();
    for (i, &(v, kind)) in open.iter().enumerate() {
        vertices[v].open = true;
        vertices.push(Vertex {
            id: DetectorId {
                kind: DetectorKind::Imaginary,
                pauli,
                layer: first_layer + v / nc,
                index: i,
            },
            open: false,
            attached: Some((v, kind)),
        });
    }

    let mut edge_acc: HashMap<(usize, usize, bool), EdgeAcc> = HashMap::new();
    let mut mech_acc: HashMap<(FaultOrigin, usize, usize, bool), f64> = HashMap::new();
    for fault in faults {
        let dets = fault.detectors(pauli);
        let (a, b) = match *dets {
            [] => continue,
            [v] => {
                let kind = match pauli {
                    PauliType::Z => BoundaryKind::Space,
                    PauliType::X => fault.kind(pauli),
                };
                (v, imaginary[&(v, kind)])
            }
            [u, v] => (u.min(v), u.max(v)),
            _ => unreachable!("fault enumeration rejects wider faults"),
        };
        let logical = pauli == PauliType::Z && fault.logical_flip;
        edge_acc
            .entry((a, b, logical))
            .and_modify(|acc| {
                acc.probability = merge_probability(acc.probability, fault.probability);
                acc.merged += 1;
            })
            .or_insert(EdgeAcc {
                probability: fault.probability,
                first: fault.location,
                merged: 1,
            });
        mech_acc
            .entry((fault.origin, a, b, logical))
            .and_modify(|q| *q = merge_probability(*q, fault.probability))
            .or_insert(fault.probability);
    }

    let mut keys: Vec<(usize, usize, bool)> = edge_acc.keys().copied().collect();
    keys.sort_unstable();
    let layer_of = |v: usize| first_layer + v / nc;
    let mut edges = Vec::with_capacity(keys.len());
    let mut index = HashMap::with_capacity(keys.len());
    for (e, key) in keys.iter().enumerate() {
        let (a, b, logical) = *key;
        let acc = &edge_acc[key];
        let fault_class = if acc.merged > 1 {
            format!("{} (+{} merged)", acc.first, acc.merged - 1)
        } else {
            acc.first.to_string()
        };
        edges.push(Edge {
            a,
            b,
            probability: acc.probability,
            weight: edge_weight(acc.probability),
            logical,
            layer: layer_of(a),
            horizontal: b >= num_real || layer_of(a) == layer_of(b),
            fault_class,
        });
        index.insert(*key, e);
    }

    let mut layer_edge_start = vec![0; num_layers + 1];
    for edge in &edges {
        layer_edge_start[edge.layer - first_layer + 1] += 1;
    }
    for k in 0..num_layers {
        layer_edge_start[k + 1] += layer_edge_start[k];
    }

    let mut mechanisms: Vec<Mechanism> = mech_acc
        .into_iter()
        .map(|((origin, a, b, logical), probability)| Mechanism {
            origin,
            edge: index[&(a, b, logical)],
            probability,
        })
        .collect();
    mechanisms.sort_by_key(|m| (m.origin, m.edge));

    DecoderGraph {
        schema_version: GRAPH_SCHEMA_VERSION,
        pauli,
        d: layout.d,
        rounds: n,
        p,
        observable_row,
        first_layer,
        num_layers,
        checks_per_layer: nc,
        check_plaquettes: checks.iter().map(|c| c.plaquette).collect(),
        vertices,
        edges,
        mechanisms,
        boundary: BoundaryMetadata::for_memory(pauli),
        layer_edge_start,
    }
}
