//! Fixtures shared by the integration tests.

#![allow(dead_code)]

use recsim::metrics::{modularity, Partition, UndirectedWeightedGraph};
use recsim::state::{IdeaVector, SimParams, SimulationState, Strategy, WeightMatrix};

/// Small stored graphs with known community structure, all with n <= 10.
pub fn stored_graphs() -> Vec<(&'static str, UndirectedWeightedGraph)> {
    let mut graphs = Vec::new();

    let mut cliques = Vec::new();
    for base in [0, 5] {
        for i in 0..5 {
            for j in i + 1..5 {
                cliques.push((base + i, base + j, 1.0));
            }
        }
    }
    graphs.push(("two disjoint 5-cliques", UndirectedWeightedGraph::from_edges(10, &cliques)));
    let mut bridged = cliques.clone();
    bridged.push((4, 5, 1.0));
    graphs.push(("two 5-cliques with a bridge", UndirectedWeightedGraph::from_edges(10, &bridged)));

    let ring: Vec<_> = (0..8).map(|i| (i, (i + 1) % 8, 1.0)).collect();
    graphs.push(("ring of 8", UndirectedWeightedGraph::from_edges(8, &ring)));

    let star: Vec<_> = (1..7).map(|i| (0, i, 1.0)).collect();
    graphs.push(("star of 7", UndirectedWeightedGraph::from_edges(7, &star)));

    let path: Vec<_> = (0..9).map(|i| (i, i + 1, 1.0)).collect();
    graphs.push(("path of 10", UndirectedWeightedGraph::from_edges(10, &path)));

    let bipartite: Vec<_> = (0..3).flat_map(|i| (3..7).map(move |j| (i, j, 1.0))).collect();
    graphs.push(("complete bipartite 3x4", UndirectedWeightedGraph::from_edges(7, &bipartite)));

    let triangles = [
        (0, 1, 0.9),
        (1, 2, 0.8),
        (0, 2, 0.7),
        (3, 4, 0.9),
        (4, 5, 0.6),
        (3, 5, 0.8),
        (2, 3, 0.1),
    ];
    graphs.push(("weighted triangles", UndirectedWeightedGraph::from_edges(6, &triangles)));

    let complete: Vec<_> = (0..6).flat_map(|i| (i + 1..6).map(move |j| (i, j, 1.0))).collect();
    graphs.push(("complete graph of 6", UndirectedWeightedGraph::from_edges(6, &complete)));

    // dense random weighted graphs from a fixed linear congruential sequence
    let mut x: u64 = 0x2545_f491_4f6c_dd1d;
    let mut next = move || {
        x = x.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
        (x >> 11) as f64 / (1u64 << 53) as f64
    };
    for (name, n) in [("random weighted 7", 7), ("random weighted 8", 8), ("random weighted 9", 9), ("random weighted 10", 10)] {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let w = next();
                if w > 0.4 {
                    edges.push((i, j, w * w));
                }
            }
        }
        graphs.push((name, UndirectedWeightedGraph::from_edges(n, &edges)));
    }
    graphs
}

/// Best modularity over every set partition of the nodes.
pub fn exhaustive_optimum(graph: &UndirectedWeightedGraph) -> f64 {
    let n = graph.node_count();
    let mut labels = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    // restricted growth strings enumerate each set partition once
    fn walk(i: usize, max: usize, labels: &mut [usize], graph: &UndirectedWeightedGraph, best: &mut f64) {
        if i == labels.len() {
            *best = best.max(modularity(graph, &Partition::from_labels(labels)));
            return;
        }
        for l in 0..=max + 1 {
            labels[i] = l;
            walk(i + 1, max.max(l), labels, graph, best);
        }
    }
    if n == 0 {
        return 0.0;
    }
    walk(1, 0, &mut labels, graph, &mut best);
    best
}

/// The n=4, k=2 fixture: explicit states and weights, a prior round of
/// opinions and a current pool of four opinions (ids 4..8).
pub fn equation_fixture(strategy: Strategy) -> SimulationState {
    let params = SimParams {
        n: 4,
        k: 2,
        c: 0.5,
        h: 0.3,
        a: 0.2,
        theta_h: 0.1,
        theta_a: 0.1,
        opinion_noise: 0.0,
        state_noise: 0.0,
        opinions_per_round: 4,
        total_opinions: 8,
        recommendation_size: 2,
        recent_window: 10,
        strategy,
        normalize_distance: true,
        ..SimParams::default()
    };
    let states = vec![
        IdeaVector::new(vec![0.0, 0.0]),
        IdeaVector::new(vec![1.0, 0.0]),
        IdeaVector::new(vec![0.0, 1.0]),
        IdeaVector::new(vec![0.4, 0.6]),
    ];
    let weights = WeightMatrix::from_rows(&[
        vec![0.0, 0.5, 0.2, 0.8],
        vec![0.1, 0.0, 0.9, 0.3],
        vec![0.4, 0.6, 0.0, 0.2],
        vec![0.7, 0.1, 0.5, 0.0],
    ]);
    let mut state = SimulationState::from_parts(params, states, weights).unwrap();
    for (author, content) in [(1, [1.0, 0.2]), (2, [0.2, 1.0]), (3, [0.4, 0.4]), (0, [0.0, 0.2])] {
        state.push_opinion(author, IdeaVector::new(content.to_vec()));
    }
    state.clear_pool();
    for (author, content) in [(1, [0.9, 0.1]), (2, [0.1, 0.8]), (3, [0.6, 0.4]), (0, [0.2, 0.1])] {
        state.push_opinion(author, IdeaVector::new(content.to_vec()));
    }
    state
}
