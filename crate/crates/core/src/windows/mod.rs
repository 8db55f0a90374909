//! Sliding-window decoding: schedules, window graphs, syndrome propagation,
//! correction assembly and the generalized sandwich recursion.

pub mod generalized;
pub mod params;
pub mod schedule;
pub mod window_graph;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface_code::DecoderGraph;

pub use generalized::{generalized_sandwich, CoreRegion, GsInstance, Hypergraph, PartitionMethod, TimePartition};
pub use params::{CoreStyle, ScheduleParams, Scheme};
pub use schedule::{
    make_batch_schedule, make_forward_schedule, make_sandwich_schedule, CoreSpec, EdgeRule, Schedule, WindowSpec,
    WindowType,
};
pub use window_graph::{extract_window_graph, propagate_syndrome, PreparedSchedule, WindowGraph, WindowSummary};

/// A set of edges of the full decoder graph and the parity of the logical
/// observable it flips.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionSet {
    /// Sorted edge ids.
    pub edges: Vec<usize>,
    pub logical_parity: bool,
}

impl CorrectionSet {
    pub fn from_edges(graph: &DecoderGraph, mut edges: Vec<usize>) -> Self {
        edges.sort_unstable();
        let logical_parity = edges.iter().fold(false, |acc, &e| acc ^ graph.edges[e].logical);
        CorrectionSet { edges, logical_parity }
    }
}

/// Joins the retained corrections of all windows. The parts must be
/// disjoint and their union must annihilate `defects` exactly.
pub fn assemble(graph: &DecoderGraph, parts: &[Vec<usize>], defects: &[usize]) -> Result<CorrectionSet> {
    let mut edges: Vec<usize> = parts.iter().flatten().copied().collect();
    edges.sort_unstable();
    if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Invariant(format!("edge {} retained by two windows", w[0])));
    }
    let set = CorrectionSet::from_edges(graph, edges);
    let boundary = graph.boundary_of(set.edges.iter().copied());
    if boundary != defects {
        let residual = window_graph::odd_multiplicity(boundary.into_iter().chain(defects.iter().copied()).collect());
        return Err(Error::Invariant(format!(
            "assembled corrections leave {} unmatched detectors (first {:?})",
            residual.len(),
            &residual[..residual.len().min(8)]
        )));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_code::{build_decoder_graph, build_layout, build_memory_circuit, PauliType};

    #[test]
    fn assemble_checks_annihilation() {
        let circuit = build_memory_circuit(&build_layout(3).unwrap(), 2).unwrap();
        let graph = build_decoder_graph(&circuit, 0.001, PauliType::Z).unwrap();
        assert_eq!(assemble(&graph, &[], &[]).unwrap(), CorrectionSet::default());
        let defects = graph.boundary_of([3]);
        let set = assemble(&graph, &[vec![], vec![3]], &defects).unwrap();
        assert_eq!(set.edges, vec![3]);
        assert_eq!(set.logical_parity, graph.edges[3].logical);
        assert!(matches!(assemble(&graph, &[vec![3]], &[]), Err(Error::Invariant(_))));
        assert!(matches!(assemble(&graph, &[vec![3], vec![3]], &[]), Err(Error::Invariant(_))));
    }
}
