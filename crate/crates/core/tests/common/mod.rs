//! Exhaustive minimum-weight search shared by the decoder and acceptance
//! tests.
#![allow(dead_code)]

use sandwich_core::decoders::{DecodingGraph, InnerDecoder, MwpmDecoder, UnionFindDecoder};
use sandwich_core::error::DecodeError;
use sandwich_core::surface_code::{
    build_decoder_graph, build_layout, build_memory_circuit, BoundaryState, DecoderGraph, PauliType,
};
use sandwich_core::windows::{extract_window_graph, CoreSpec, EdgeRule, WindowSpec, WindowType};

pub const INF: i64 = i64::MAX / 4;

/// All-pairs shortest paths; boundary vertices may be passed through.
pub fn all_pairs(graph: &DecodingGraph) -> Vec<Vec<i64>> {
    let n = graph.num_vertices();
    let mut dist = vec![vec![INF; n]; n];
    for (v, row) in dist.iter_mut().enumerate() {
        row[v] = 0;
    }
    for e in 0..graph.num_edges() {
        let (u, v) = graph.endpoints(e);
        let w = graph.length(e);
        dist[u][v] = dist[u][v].min(w);
        dist[v][u] = dist[v][u].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k].saturating_add(dist[k][j]);
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    dist
}

/// Cheapest way to pair every defect with another defect or a boundary.
pub fn min_pairing(dist: &[Vec<i64>], to_boundary: &[i64], defects: &[usize]) -> i64 {
    fn go(dist: &[Vec<i64>], tb: &[i64], left: &[usize]) -> i64 {
        let Some((&first, rest)) = left.split_first() else {
            return 0;
        };
        let mut best = tb[first].saturating_add(go(dist, tb, rest));
        for (i, &other) in rest.iter().enumerate() {
            let mut remaining = rest.to_vec();
            remaining.remove(i);
            best = best.min(dist[first][other].saturating_add(go(dist, tb, &remaining)));
        }
        best.min(INF)
    }
    go(dist, to_boundary, defects)
}

pub fn oracle(graph: &DecodingGraph) -> impl Fn(&[usize]) -> i64 {
    let dist = all_pairs(graph);
    let to_boundary: Vec<i64> = (0..graph.num_vertices())
        .map(|v| {
            (0..graph.num_vertices())
                .filter(|&b| graph.is_boundary(b))
                .map(|b| dist[v][b])
                .min()
                .unwrap_or(INF)
        })
        .collect();
    move |defects: &[usize]| min_pairing(&dist, &to_boundary, defects)
}

pub fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize <= max)
        .map(|m| (0..n).filter(|&v| m >> v & 1 == 1).collect())
        .collect()
}

pub fn check_window(graph: &DecodingGraph, num_real: usize, label: &str) -> usize {
    let best = oracle(graph);
    let mut mwpm = MwpmDecoder::new();
    let mut uf = UnionFindDecoder::new();
    let mut checked = 0;
    for defects in subsets(num_real, 6) {
        let optimum = best(&defects);
        let m = mwpm.decode(graph, &defects);
        let u = uf.decode(graph, &defects);
        if optimum >= INF {
            assert_eq!(m, Err(DecodeError::Unannihilable), "{label} {defects:?}");
            assert_eq!(u, Err(DecodeError::Unannihilable), "{label} {defects:?}");
            continue;
        }
        let m = m.unwrap();
        assert_eq!(graph.syndrome_of(&m), defects, "{label}: mwpm leaves defects for {defects:?}");
        assert_eq!(graph.total_length(&m), optimum, "{label}: mwpm weight for {defects:?}");
        let u = u.unwrap();
        assert_eq!(graph.syndrome_of(&u), defects, "{label}: uf leaves defects for {defects:?}");
        assert!(graph.total_length(&u) >= optimum, "{label}: uf beats the optimum for {defects:?}");
        checked += 1;
    }
    checked
}

pub fn graph(d: usize, rounds: usize, pauli: PauliType) -> DecoderGraph {
    let circuit = build_memory_circuit(&build_layout(d).unwrap(), rounds).unwrap();
    build_decoder_graph(&circuit, 0.005, pauli).unwrap()
}

pub fn window(lo: usize, hi: usize, past: BoundaryState, future: BoundaryState) -> WindowSpec {
    WindowSpec {
        id: 0,
        window_type: WindowType::Type1,
        layers: (lo, hi),
        past_boundary: past,
        future_boundary: future,
        core: CoreSpec {
            lo,
            hi,
            lo_rule: EdgeRule::All,
            hi_rule: EdgeRule::All,
        },
        depends_on: vec![],
    }
}

/// Checks every single- and two-layer window of a d=3 graph, for both
/// Pauli types and every boundary combination. Returns the number of
/// annihilable defect sets compared against the oracle.
pub fn check_small_windows(rounds: usize) -> usize {
    use BoundaryState::{Closed, Open};
    let mut total = 0;
    for pauli in [PauliType::Z, PauliType::X] {
        let g = graph(3, rounds, pauli);
        let layers = g.num_layers;
        for width in [1, 2] {
            for lo in 1..=(layers + 1).saturating_sub(width) {
                for (past, future) in [(Closed, Closed), (Open, Open), (Closed, Open), (Open, Closed)] {
                    let spec = window(lo, lo + width - 1, past, future);
                    let wg = extract_window_graph(&g, &spec).unwrap();
                    let label = format!("{pauli:?} layers {:?} {past:?}/{future:?}", spec.layers);
                    total += check_window(&wg.decoding, wg.num_real, &label);
                }
            }
        }
    }
    total
}
