//! Peeling decoder: given a spanning forest of a cluster, pick the unique
//! subset of forest edges whose syndrome equals the defects.

use std::collections::VecDeque;

use super::DecodingGraph;
use crate::error::DecodeError;

/// Reusable scratch space for peeling.
#[derive(Debug, Default)]
pub struct Peeler {
    parity: Vec<bool>,
    visited: Vec<bool>,
    parent_edge: Vec<u32>,
    in_forest: Vec<bool>,
    dsu: Vec<u32>,
    order: Vec<u32>,
    queue: VecDeque<u32>,
}

const NO_EDGE: u32 = u32::MAX;

impl Peeler {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, graph: &DecodingGraph) {
        let n = graph.num_vertices();
        if self.parity.len() < n {
            self.parity.resize(n, false);
            self.visited.resize(n, false);
            self.parent_edge.resize(n, NO_EDGE);
            self.dsu = (0..n as u32).collect();
        }
        if self.in_forest.len() < graph.num_edges() {
            self.in_forest.resize(graph.num_edges(), false);
        }
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.dsu[v as usize] != v {
            let p = self.dsu[v as usize];
            self.dsu[v as usize] = self.dsu[p as usize];
            v = p;
        }
        v
    }

    /// Peels `forest` (edge ids) against `defects`, appending the selected
    /// edges to `out`. Trees containing a boundary vertex are rooted there
    /// and may carry odd parity; other trees must be even.
    pub fn peel_into(
        &mut self,
        graph: &DecodingGraph,
        forest: &[usize],
        defects: &[usize],
        out: &mut Vec<usize>,
    ) -> Result<(), DecodeError> {
        self.prepare(graph);
        let mut vertices: Vec<u32> = Vec::with_capacity(2 * forest.len() + defects.len());
        let mut result = Ok(());
        for &e in forest {
            let (u, v) = graph.endpoints(e);
            vertices.push(u as u32);
            vertices.push(v as u32);
            self.in_forest[e] = true;
            let (ru, rv) = (self.find(u as u32), self.find(v as u32));
            if ru == rv {
                result = Err(DecodeError::NotAForest(format!("edge {e} closes a cycle")));
            } else {
                self.dsu[ru as usize] = rv;
            }
        }
        for &d in defects {
            self.parity[d] ^= true;
            vertices.push(d as u32);
        }
        vertices.sort_unstable();
        vertices.dedup();
        // Roots: boundary vertices first, then the rest in index order.
        vertices.sort_by_key(|&v| !graph.is_boundary(v as usize));

        if result.is_ok() {
            self.order.clear();
            for &root in &vertices {
                if self.visited[root as usize] {
                    continue;
                }
                self.visited[root as usize] = true;
                self.queue.push_back(root);
                while let Some(v) = self.queue.pop_front() {
                    self.order.push(v);
                    for &(e, w) in graph.neighbors(v as usize) {
                        if self.in_forest[e as usize] && !self.visited[w as usize] {
                            self.visited[w as usize] = true;
                            self.parent_edge[w as usize] = e;
                            self.queue.push_back(w);
                        }
                    }
                }
            }
            for i in (0..self.order.len()).rev() {
                let v = self.order[i] as usize;
                if !self.parity[v] {
                    continue;
                }
                let e = self.parent_edge[v];
                if e == NO_EDGE {
                    if !graph.is_boundary(v) {
                        result = Err(DecodeError::Unannihilable);
                    }
                    continue;
                }
                out.push(e as usize);
                self.parity[v] = false;
                let (a, b) = graph.endpoints(e as usize);
                let up = if a == v { b } else { a };
                self.parity[up] ^= true;
            }
        }

        for &v in &vertices {
            let v = v as usize;
            self.parity[v] = false;
            self.visited[v] = false;
            self.parent_edge[v] = NO_EDGE;
            self.dsu[v] = v as u32;
        }
        for &e in forest {
            self.in_forest[e] = false;
        }
        result
    }
}

/// Peels a forest against a defect set.
pub fn peel(graph: &DecodingGraph, forest: &[usize], defects: &[usize]) -> Result<Vec<usize>, DecodeError> {
    let mut out = Vec::new();
    Peeler::new().peel_into(graph, forest, defects, &mut out)?;
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> DecodingGraph {
        let edges: Vec<(usize, usize, i64, bool)> = (0..n - 1).map(|v| (v, v + 1, 1, false)).collect();
        DecodingGraph::new(vec![false; n], &edges)
    }

    #[test]
    fn single_edge_tree() {
        let g = line(2);
        assert_eq!(peel(&g, &[0], &[0, 1]).unwrap(), vec![0]);
    }

    #[test]
    fn path_of_three_with_end_defects() {
        let g = line(3);
        assert_eq!(peel(&g, &[0, 1], &[0, 2]).unwrap(), vec![0, 1]);
    }

    #[test]
    fn star_with_center_and_one_leaf() {
        let g = DecodingGraph::new(
            vec![false; 4],
            &[(0, 1, 1, false), (0, 2, 1, false), (0, 3, 1, false)],
        );
        assert_eq!(peel(&g, &[0, 1, 2], &[0, 2]).unwrap(), vec![1]);
    }

    #[test]
    fn boundary_root_absorbs_odd_parity() {
        let g = DecodingGraph::new(vec![true, false, false], &[(0, 1, 1, true), (1, 2, 1, false)]);
        assert_eq!(peel(&g, &[0, 1], &[2]).unwrap(), vec![0, 1]);
    }

    #[test]
    fn odd_tree_without_boundary_fails() {
        let g = line(3);
        assert_eq!(peel(&g, &[0, 1], &[1]), Err(DecodeError::Unannihilable));
    }

    #[test]
    fn cycle_is_rejected() {
        let g = DecodingGraph::new(
            vec![false; 3],
            &[(0, 1, 1, false), (1, 2, 1, false), (2, 0, 1, false)],
        );
        assert!(matches!(peel(&g, &[0, 1, 2], &[0, 1]), Err(DecodeError::NotAForest(_))));
        // scratch is reset after the failure
        assert_eq!(peel(&g, &[0, 1], &[0, 1]).unwrap(), vec![0]);
    }
}
