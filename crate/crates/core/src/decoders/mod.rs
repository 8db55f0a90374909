//! Inner decoders acting on a single window graph.
//!
//! Both decoders work on integer edge lengths derived from the
//! log-likelihood weights, so they agree exactly on what "minimum weight"
//! means.

pub mod blossom;
pub mod matching;
pub mod peel;
pub mod union_find;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::DecodeError;
use crate::surface_code::DecoderGraph;

pub use matching::MwpmDecoder;
pub use peel::peel;
pub use union_find::UnionFindDecoder;

/// Scale applied to floating-point weights before rounding to lengths.
pub const LENGTH_SCALE: f64 = 1e4;

pub fn length_of(weight: f64) -> i64 {
    ((weight * LENGTH_SCALE).round() as i64).max(1)
}

/// Shortest distance from every vertex to the nearest boundary vertex and
/// the first edge on such a path.
#[derive(Debug, Clone)]
pub struct BoundaryDistances {
    pub dist: Vec<i64>,
    pub via: Vec<Option<u32>>,
}

/// A compact undirected multigraph with boundary (imaginary) vertices.
#[derive(Debug, Clone)]
pub struct DecodingGraph {
    boundary: Vec<bool>,
    edges: Vec<[u32; 2]>,
    lengths: Vec<i64>,
    logical: Vec<bool>,
    adj_start: Vec<u32>,
    /// `(edge, other endpoint)` pairs, grouped by vertex.
    adj: Vec<(u32, u32)>,
    boundary_cache: OnceLock<BoundaryDistances>,
}

pub const UNREACHABLE: i64 = i64::MAX / 4;

impl DecodingGraph {
    /// `edges` are `(u, v, length, logical)`.
    pub fn new(boundary: Vec<bool>, edges: &[(usize, usize, i64, bool)]) -> Self {
        let n = boundary.len();
        let mut degree = vec![0u32; n + 1];
        for &(u, v, _, _) in edges {
            assert!(u < n && v < n && u != v, "edge ({u}, {v}) out of range");
            degree[u + 1] += 1;
            degree[v + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let adj_start = degree.clone();
        let mut fill = degree;
        let mut adj = vec![(0u32, 0u32); 2 * edges.len()];
        for (e, &(u, v, _, _)) in edges.iter().enumerate() {
            adj[fill[u] as usize] = (e as u32, v as u32);
            fill[u] += 1;
            adj[fill[v] as usize] = (e as u32, u as u32);
            fill[v] += 1;
        }
        DecodingGraph {
            boundary,
            edges: edges.iter().map(|&(u, v, _, _)| [u as u32, v as u32]).collect(),
            lengths: edges.iter().map(|e| e.2).collect(),
            logical: edges.iter().map(|e| e.3).collect(),
            adj_start,
            adj,
            boundary_cache: OnceLock::new(),
        }
    }

    /// The whole decoder graph as one decoding instance.
    pub fn from_decoder_graph(graph: &DecoderGraph) -> Self {
        let boundary = (0..graph.num_vertices()).map(|v| !graph.is_real(v)).collect();
        let edges: Vec<(usize, usize, i64, bool)> = graph
            .edges
            .iter()
            .map(|e| (e.a, e.b, length_of(e.weight), e.logical))
            .collect();
        Self::new(boundary, &edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.boundary.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary.iter().any(|&b| b)
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let [u, v] = self.edges[e];
        (u as usize, v as usize)
    }

    pub fn length(&self, e: usize) -> i64 {
        self.lengths[e]
    }

    pub fn logical(&self, e: usize) -> bool {
        self.logical[e]
    }

    pub fn neighbors(&self, v: usize) -> &[(u32, u32)] {
        &self.adj[self.adj_start[v] as usize..self.adj_start[v + 1] as usize]
    }

    pub fn total_length(&self, edges: &[usize]) -> i64 {
        edges.iter().map(|&e| self.lengths[e]).sum()
    }

    pub fn logical_parity(&self, edges: &[usize]) -> bool {
        edges.iter().fold(false, |acc, &e| acc ^ self.logical[e])
    }

    /// Non-boundary vertices with odd parity under `edges`, sorted.
    pub fn syndrome_of(&self, edges: &[usize]) -> Vec<usize> {
        let mut odd = std::collections::BTreeSet::new();
        for &e in edges {
            for v in [self.edges[e][0] as usize, self.edges[e][1] as usize] {
                if !self.boundary[v] && !odd.remove(&v) {
                    odd.insert(v);
                }
            }
        }
        odd.into_iter().collect()
    }

    /// Multi-source Dijkstra from all boundary vertices, computed once.
    pub fn boundary_distances(&self) -> &BoundaryDistances {
        self.boundary_cache.get_or_init(|| {
            let n = self.num_vertices();
            let mut dist = vec![UNREACHABLE; n];
            let mut via = vec![None; n];
            let mut heap = std::collections::BinaryHeap::new();
            for v in 0..n {
                if self.boundary[v] {
                    dist[v] = 0;
                    heap.push(std::cmp::Reverse((0i64, v as u32)));
                }
            }
            while let Some(std::cmp::Reverse((d, v))) = heap.pop() {
                let v = v as usize;
                if d > dist[v] {
                    continue;
                }
                for &(e, w) in self.neighbors(v) {
                    let w = w as usize;
                    let nd = d + self.lengths[e as usize];
                    if nd < dist[w] {
                        dist[w] = nd;
                        via[w] = Some(e);
                        heap.push(std::cmp::Reverse((nd, w as u32)));
                    }
                }
            }
            BoundaryDistances { dist, via }
        })
    }
}

/// A decoder for one window: given defects on non-boundary vertices,
/// returns a set of edge ids whose syndrome equals the defects.
pub trait InnerDecoder: Send {
    fn decode(&mut self, graph: &DecodingGraph, defects: &[usize]) -> Result<Vec<usize>, DecodeError>;
    fn kind(&self) -> InnerKind;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerKind {
    Uf,
    Mwpm,
}

impl InnerKind {
    pub fn build(self) -> Box<dyn InnerDecoder> {
        match self {
            InnerKind::Uf => Box::new(UnionFindDecoder::new()),
            InnerKind::Mwpm => Box::new(MwpmDecoder::new()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InnerKind::Uf => "uf",
            InnerKind::Mwpm => "mwpm",
        }
    }
}

impl fmt::Display for InnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InnerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uf" | "union-find" | "unionfind" => Ok(InnerKind::Uf),
            "mwpm" | "matching" => Ok(InnerKind::Mwpm),
            other => Err(format!("unknown inner decoder '{other}' (expected uf or mwpm)")),
        }
    }
}

pub(crate) fn check_defects(graph: &DecodingGraph, defects: &[usize]) -> Result<(), DecodeError> {
    for &v in defects {
        if v >= graph.num_vertices() || graph.is_boundary(v) {
            return Err(DecodeError::BadDefect(v));
        }
    }
    Ok(())
}
