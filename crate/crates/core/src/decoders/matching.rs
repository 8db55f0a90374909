//! Minimum-weight perfect matching decoder.
//!
//! Each defect gets a mirror node joined to it by its boundary distance.
//! Two defects are joined (and so are their mirrors, at zero cost) only
//! when pairing them beats sending both to the boundary, which never changes
//! the optimum. A pair with d(i, j) < dB(i) + dB(j) lies within 2·max(dB)
//! of one endpoint, so each search stops at twice its own boundary distance.
//! Matched pairs are expanded back into shortest paths and XOR-folded.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::blossom::min_weight_perfect_matching;
use super::{check_defects, DecodingGraph, InnerDecoder, InnerKind, UNREACHABLE};
use crate::error::DecodeError;

#[derive(Debug, Default)]
pub struct MwpmDecoder {
    dist: Vec<i64>,
    pred: Vec<u32>,
    seen: Vec<u32>,
    slot: Vec<u32>,
    heap: BinaryHeap<Reverse<(i64, u32)>>,
}

const NO_SLOT: u32 = u32::MAX;

impl MwpmDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, n: usize) {
        if self.dist.len() < n {
            self.dist.resize(n, UNREACHABLE);
            self.pred.resize(n, u32::MAX);
            self.slot.resize(n, NO_SLOT);
        }
    }

    fn clear_search(&mut self) {
        for &v in &self.seen {
            self.dist[v as usize] = UNREACHABLE;
            self.pred[v as usize] = u32::MAX;
        }
        self.seen.clear();
        self.heap.clear();
    }

    /// Dijkstra from `src` through non-boundary vertices. Calls `visit` on every settled vertex; stops when the
    /// radius is exceeded or `visit` returns false.
    fn search(
        &mut self,
        graph: &DecodingGraph,
        src: usize,
        radius: i64,
        mut visit: impl FnMut(usize, i64) -> bool,
    ) {
        self.clear_search();
        self.dist[src] = 0;
        self.seen.push(src as u32);
        self.heap.push(Reverse((0, src as u32)));
        while let Some(Reverse((d, v))) = self.heap.pop() {
            let v = v as usize;
            if d > self.dist[v] {
                continue;
            }
            if d > radius || !visit(v, d) {
                break;
            }
            for &(e, w) in graph.neighbors(v) {
                let w = w as usize;
                if graph.is_boundary(w) {
                    continue;
                }
                let nd = d + graph.length(e as usize);
                if nd < self.dist[w] {
                    if self.dist[w] == UNREACHABLE {
                        self.seen.push(w as u32);
                    }
                    self.dist[w] = nd;
                    self.pred[w] = e;
                    self.heap.push(Reverse((nd, w as u32)));
                }
            }
        }
    }

    fn path_edges(&self, graph: &DecodingGraph, src: usize, mut v: usize, out: &mut Vec<usize>) {
        while v != src {
            let e = self.pred[v] as usize;
            out.push(e);
            let (a, b) = graph.endpoints(e);
            v = if a == v { b } else { a };
        }
    }
}

impl InnerDecoder for MwpmDecoder {
    fn decode(&mut self, graph: &DecodingGraph, defects: &[usize]) -> Result<Vec<usize>, DecodeError> {
        check_defects(graph, defects)?;
        if defects.is_empty() {
            return Ok(Vec::new());
        }
        let mut defects = defects.to_vec();
        defects.sort_unstable();
        self.prepare(graph.num_vertices());
        let bd = graph.boundary_distances();
        let to_boundary: Vec<i64> = defects.iter().map(|&v| bd.dist[v]).collect();

        let mut slot = std::mem::take(&mut self.slot);
        for (i, &v) in defects.iter().enumerate() {
            slot[v] = i as u32;
        }
        let result = self.solve(graph, &slot, &defects, &to_boundary);
        for &v in &defects {
            slot[v] = NO_SLOT;
        }
        self.slot = slot;
        self.clear_search();
        result
    }

    fn kind(&self) -> InnerKind {
        InnerKind::Mwpm
    }
}

impl MwpmDecoder {
    fn solve(
        &mut self,
        graph: &DecodingGraph,
        slot: &[u32],
        defects: &[usize],
        to_boundary: &[i64],
    ) -> Result<Vec<usize>, DecodeError> {
        let k = defects.len();
        let bd = graph.boundary_distances();
        // A pair worth keeping is closer than twice the larger of its two
        // boundary distances, so it is found from at least one side.
        let mut pairs: Vec<(usize, usize, i64)> = Vec::new();
        for i in 0..k {
            let radius = if to_boundary[i] < UNREACHABLE {
                2 * to_boundary[i]
            } else {
                UNREACHABLE - 1
            };
            self.search(graph, defects[i], radius, |v, d| {
                let j = slot[v] as usize;
                if slot[v] != NO_SLOT && j != i && d < to_boundary[i].saturating_add(to_boundary[j]) {
                    pairs.push((i.min(j), i.max(j), d));
                }
                true
            });
        }
        pairs.sort_unstable();
        pairs.dedup();
        // Matching nodes: defects 0..k, mirrors k..2k.
        let mut edges: Vec<(usize, usize, i64)> = Vec::with_capacity(2 * pairs.len() + k);
        for (i, &d) in to_boundary.iter().enumerate() {
            if d < UNREACHABLE {
                edges.push((i, k + i, d));
            }
        }
        for &(i, j, d) in &pairs {
            edges.push((i, j, d));
            if to_boundary[i] < UNREACHABLE && to_boundary[j] < UNREACHABLE {
                edges.push((k + i, k + j, 0));
            }
        }
        let nodes = 2 * k;

        // Solve each connected component separately.
        let mut comp: Vec<usize> = (0..nodes).collect();
        fn root(comp: &mut [usize], mut v: usize) -> usize {
            while comp[v] != v {
                comp[v] = comp[comp[v]];
                v = comp[v];
            }
            v
        }
        for &(a, b, _) in &edges {
            let (ra, rb) = (root(&mut comp, a), root(&mut comp, b));
            if ra != rb {
                comp[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); nodes];
        let mut local = vec![0usize; nodes];
        for v in 0..nodes {
            let r = root(&mut comp, v);
            local[v] = members[r].len();
            members[r].push(v);
        }
        let mut comp_edges: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); nodes];
        for &(a, b, w) in &edges {
            let r = root(&mut comp, a);
            comp_edges[r].push((local[a], local[b], w));
        }
        let mut matched: Vec<(usize, usize)> = Vec::new();
        for r in 0..nodes {
            let size = members[r].len();
            if size == 0 {
                continue;
            }
            // an isolated mirror has nothing to do
            if size == 1 && members[r][0] >= k {
                continue;
            }
            let mate = min_weight_perfect_matching(size, &comp_edges[r]).ok_or(DecodeError::Unannihilable)?;
            for (a, &b) in mate.iter().enumerate() {
                let (ga, gb) = (members[r][a], members[r][b]);
                if ga < gb && ga < k {
                    matched.push((ga, gb));
                }
            }
        }

        let mut out = Vec::new();
        for (a, b) in matched {
            if b < k {
                let target = defects[b];
                self.search(graph, defects[a], UNREACHABLE - 1, |v, _| v != target);
                self.path_edges(graph, defects[a], target, &mut out);
            } else if b == k + a {
                let mut v = defects[a];
                while !graph.is_boundary(v) {
                    let e = bd.via[v].expect("finite boundary distance has a path") as usize;
                    out.push(e);
                    let (x, y) = graph.endpoints(e);
                    v = if x == v { y } else { x };
                }
            }
        }
        out.sort_unstable();
        let mut folded = Vec::with_capacity(out.len());
        let mut i = 0;
        while i < out.len() {
            let mut j = i;
            while j < out.len() && out[j] == out[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                folded.push(out[i]);
            }
            i = j;
        }
        Ok(folded)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoders::test_graphs::path;

    #[test]
    fn no_defects() {
        assert!(MwpmDecoder::new().decode(&path(3, 5), &[]).unwrap().is_empty());
    }

    #[test]
    fn single_defect_takes_shortest_boundary_path() {
        let g = path(5, 10);
        assert_eq!(MwpmDecoder::new().decode(&g, &[1]).unwrap(), vec![0, 1]);
        assert_eq!(MwpmDecoder::new().decode(&g, &[3]).unwrap(), vec![4, 5]);
    }

    #[test]
    fn pairs_beat_boundary_when_cheaper() {
        let g = path(6, 10);
        let out = MwpmDecoder::new().decode(&g, &[2, 3]).unwrap();
        assert_eq!(out, vec![3]);
    }

    #[test]
    fn no_boundary_graph_pairs_everything() {
        let g = DecodingGraph::new(
            vec![false; 4],
            &[(0, 1, 1, false), (1, 2, 5, false), (2, 3, 1, false), (3, 0, 5, false)],
        );
        let out = MwpmDecoder::new().decode(&g, &[0, 1, 2, 3]).unwrap();
        assert_eq!(out, vec![0, 2]);
        assert_eq!(MwpmDecoder::new().decode(&g, &[0]), Err(DecodeError::Unannihilable));
    }
}
