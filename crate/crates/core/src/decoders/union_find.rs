//! Weighted-growth union-find decoder.
//!
//! Every odd cluster that has not reached a boundary vertex is active. The
//! active cluster with the smallest total boundary length (ties broken by
//! root index) grows all of its boundary edges by the largest amount that
//! completes at least one of them; completed edges merge clusters. When no
//! active cluster is left, a spanning forest of each cluster is peeled.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use super::peel::Peeler;
use super::{check_defects, DecodingGraph, InnerDecoder, InnerKind};
use crate::error::DecodeError;

#[derive(Debug, Default)]
pub struct UnionFindDecoder {
    parent: Vec<u32>,
    size: Vec<u32>,
    clustered: Vec<bool>,
    odd: Vec<bool>,
    at_boundary: Vec<bool>,
    version: Vec<u32>,
    boundary_edges: Vec<Vec<u32>>,
    growth: Vec<i64>,
    touched_vertices: Vec<u32>,
    touched_edges: Vec<u32>,
    heap: BinaryHeap<Reverse<(i64, u32, u32)>>,
    completed: Vec<u32>,
    visited: Vec<bool>,
    queue: VecDeque<u32>,
    forest: Vec<usize>,
    peeler: Peeler,
}

impl UnionFindDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, graph: &DecodingGraph) {
        let n = graph.num_vertices();
        if self.parent.len() < n {
            self.parent.resize(n, 0);
            self.size.resize(n, 0);
            self.clustered.resize(n, false);
            self.odd.resize(n, false);
            self.at_boundary.resize(n, false);
            self.version.resize(n, 0);
            self.boundary_edges.resize_with(n, Vec::new);
            self.visited.resize(n, false);
        }
        if self.growth.len() < graph.num_edges() {
            self.growth.resize(graph.num_edges(), 0);
        }
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let p = self.parent[v as usize];
            self.parent[v as usize] = self.parent[p as usize];
            v = p;
        }
        v
    }

    fn add_vertex(&mut self, graph: &DecodingGraph, v: usize) {
        if self.clustered[v] {
            return;
        }
        self.clustered[v] = true;
        self.parent[v] = v as u32;
        self.size[v] = 1;
        self.odd[v] = false;
        self.at_boundary[v] = graph.is_boundary(v);
        self.touched_vertices.push(v as u32);
        let list = &mut self.boundary_edges[v];
        list.clear();
        for &(e, _) in graph.neighbors(v) {
            if self.growth[e as usize] < graph.length(e as usize) {
                list.push(e);
            }
        }
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.odd[ra as usize] ^= self.odd[rb as usize];
        self.at_boundary[ra as usize] |= self.at_boundary[rb as usize];
        let moved = std::mem::take(&mut self.boundary_edges[rb as usize]);
        self.boundary_edges[ra as usize].extend_from_slice(&moved);
        self.boundary_edges[rb as usize] = moved;
        self.boundary_edges[rb as usize].clear();
        ra
    }

    fn is_active(&self, root: u32) -> bool {
        self.odd[root as usize] && !self.at_boundary[root as usize]
    }

    /// Drops completed and internal edges from a root's boundary list and
    /// returns the total length of the remaining ones.
    fn compact(&mut self, graph: &DecodingGraph, root: u32) -> i64 {
        let mut list = std::mem::take(&mut self.boundary_edges[root as usize]);
        let mut total = 0;
        let mut keep = 0;
        for i in 0..list.len() {
            let e = list[i];
            let len = graph.length(e as usize);
            if self.growth[e as usize] >= len {
                continue;
            }
            let (u, v) = graph.endpoints(e as usize);
            let internal = self.clustered[u]
                && self.clustered[v]
                && self.find(u as u32) == root
                && self.find(v as u32) == root;
            if internal {
                continue;
            }
            list[keep] = e;
            keep += 1;
            total += len;
        }
        list.truncate(keep);
        self.boundary_edges[root as usize] = list;
        total
    }

    fn push_if_active(&mut self, graph: &DecodingGraph, root: u32) {
        if self.is_active(root) {
            let key = self.compact(graph, root);
            self.version[root as usize] += 1;
            self.heap.push(Reverse((key, root, self.version[root as usize])));
        }
    }

    fn grow(&mut self, graph: &DecodingGraph, defects: &[usize]) -> Result<(), DecodeError> {
        for &d in defects {
            self.add_vertex(graph, d);
            self.odd[d] ^= true;
        }
        for &d in defects {
            if self.parent[d] == d as u32 {
                self.push_if_active(graph, d as u32);
            }
        }
        while let Some(Reverse((key, root, ver))) = self.heap.pop() {
            if self.parent[root as usize] != root
                || self.version[root as usize] != ver
                || !self.is_active(root)
            {
                continue;
            }
            let current = self.compact(graph, root);
            if current != key {
                self.version[root as usize] += 1;
                self.heap.push(Reverse((current, root, self.version[root as usize])));
                continue;
            }
            let list = std::mem::take(&mut self.boundary_edges[root as usize]);
            if list.is_empty() {
                self.boundary_edges[root as usize] = list;
                return Err(DecodeError::Unannihilable);
            }
            let delta = list
                .iter()
                .map(|&e| graph.length(e as usize) - self.growth[e as usize])
                .min()
                .expect("non-empty boundary");
            self.completed.clear();
            for &e in &list {
                let g = &mut self.growth[e as usize];
                if *g == 0 {
                    self.touched_edges.push(e);
                }
                *g += delta;
                if *g >= graph.length(e as usize) {
                    self.completed.push(e);
                }
            }
            self.boundary_edges[root as usize] = list;
            let completed = std::mem::take(&mut self.completed);
            for &e in &completed {
                let (u, v) = graph.endpoints(e as usize);
                self.add_vertex(graph, u);
                self.add_vertex(graph, v);
                self.union(u as u32, v as u32);
            }
            self.completed = completed;
            let new_root = self.find(root);
            self.push_if_active(graph, new_root);
        }
        Ok(())
    }

    /// Spanning forest over completed edges, rooted at boundary vertices
    /// where a cluster has one.
    fn build_forest(&mut self, graph: &DecodingGraph) {
        self.forest.clear();
        let mut roots: Vec<u32> = self.touched_vertices.clone();
        roots.sort_unstable_by_key(|&v| (!graph.is_boundary(v as usize), v));
        for root in roots {
            if self.visited[root as usize] {
                continue;
            }
            self.visited[root as usize] = true;
            self.queue.push_back(root);
            while let Some(v) = self.queue.pop_front() {
                for &(e, w) in graph.neighbors(v as usize) {
                    if self.growth[e as usize] >= graph.length(e as usize) && !self.visited[w as usize] {
                        self.visited[w as usize] = true;
                        self.forest.push(e as usize);
                        self.queue.push_back(w);
                    }
                }
            }
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched_vertices {
            let v = v as usize;
            self.clustered[v] = false;
            self.odd[v] = false;
            self.at_boundary[v] = false;
            self.visited[v] = false;
            self.boundary_edges[v].clear();
        }
        for &e in &self.touched_edges {
            self.growth[e as usize] = 0;
        }
        self.touched_vertices.clear();
        self.touched_edges.clear();
        self.heap.clear();
    }
}

impl InnerDecoder for UnionFindDecoder {
    fn decode(&mut self, graph: &DecodingGraph, defects: &[usize]) -> Result<Vec<usize>, DecodeError> {
        check_defects(graph, defects)?;
        if defects.is_empty() {
            return Ok(Vec::new());
        }
        self.prepare(graph);
        let grown = self.grow(graph, defects);
        let result = grown.and_then(|()| {
            self.build_forest(graph);
            let mut out = Vec::new();
            let forest = std::mem::take(&mut self.forest);
            let peeled = self.peeler.peel_into(graph, &forest, defects, &mut out);
            self.forest = forest;
            peeled.map(|()| out)
        });
        self.reset();
        let mut out = result?;
        out.sort_unstable();
        Ok(out)
    }

    fn kind(&self) -> InnerKind {
        InnerKind::Uf
    }
}
