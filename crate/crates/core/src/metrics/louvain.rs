//! Weighted Louvain community detection and Newman modularity.

use super::graph::UndirectedWeightedGraph;
use crate::sampling::RngStream;

/// Minimum modularity improvement for another pass or level.
pub const MIN_GAIN: f64 = 1e-7;

/// Independent passes per call of [`louvain`].
pub const RESTARTS: usize = 4;

/// Community assignment with dense ids `0..m`, numbered by first appearance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    count: usize,
}

impl Partition {
    /// Renumbers arbitrary labels densely in node order.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|&l| {
                let next = remap.len();
                *remap.entry(l).or_insert(next)
            })
            .collect();
        Self { assignment, count: remap.len() }
    }

    pub fn singletons(n: usize) -> Self {
        Self { assignment: (0..n).collect(), count: n }
    }

    pub fn single(n: usize) -> Self {
        Self { assignment: vec![0; n], count: usize::from(n > 0) }
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_count(&self) -> usize {
        self.count
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (node, &c) in self.assignment.iter().enumerate() {
            out[c].push(node);
        }
        out
    }
}

/// Weighted Newman modularity. Zero for an edgeless graph.
pub fn modularity(graph: &UndirectedWeightedGraph, partition: &Partition) -> f64 {
    let two_m = graph.total_degree();
    if two_m <= 0.0 {
        return 0.0;
    }
    let m = partition.community_count();
    let mut internal = vec![0.0; m];
    let mut total = vec![0.0; m];
    for i in 0..graph.node_count() {
        let ci = partition.community_of(i);
        for &(j, w) in graph.neighbors(i) {
            total[ci] += w;
            if partition.community_of(j) == ci {
                internal[ci] += w;
            }
        }
    }
    internal.iter().zip(&total).map(|(&inn, &tot)| inn / two_m - (tot / two_m).powi(2)).sum()
}

/// One level of local moves. Returns the community label of every node.
fn local_moves(graph: &UndirectedWeightedGraph, rng: &mut RngStream) -> (Vec<usize>, bool) {
    let n = graph.node_count();
    let two_m = graph.total_degree();
    let degree: Vec<f64> = (0..n).map(|i| graph.degree(i)).collect();
    let mut community: Vec<usize> = (0..n).collect();
    let mut total = degree.clone();
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);

    // scratch for per-community link weight from the current node
    let mut link = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;
    let mut q = modularity(graph, &Partition::singletons(n));

    loop {
        let mut moves = 0usize;
        for &node in &order {
            let own = community[node];
            let k = degree[node];
            for &(nb, w) in graph.neighbors(node) {
                if nb == node {
                    continue;
                }
                let c = community[nb];
                if link[c] == 0.0 && !touched.contains(&c) {
                    touched.push(c);
                }
                link[c] += w;
            }
            total[own] -= k;
            let gain = |c: usize, link_c: f64| link_c - total[c] * k / two_m;
            let mut best = own;
            let mut best_gain = gain(own, link[own]);
            for &c in &touched {
                let g = gain(c, link[c]);
                if g > best_gain + 1e-12 {
                    best = c;
                    best_gain = g;
                }
            }
            total[best] += k;
            if best != own {
                community[node] = best;
                moves += 1;
            }
            for &c in &touched {
                link[c] = 0.0;
            }
            touched.clear();
        }
        if moves == 0 {
            break;
        }
        moved_any = true;
        let new_q = modularity(graph, &Partition::from_labels(&community));
        if new_q - q <= MIN_GAIN {
            break;
        }
        q = new_q;
    }
    (community, moved_any)
}

fn aggregate(graph: &UndirectedWeightedGraph, partition: &Partition) -> UndirectedWeightedGraph {
    let mut agg = UndirectedWeightedGraph::empty(partition.community_count());
    for i in 0..graph.node_count() {
        let ci = partition.community_of(i);
        for &(j, w) in graph.neighbors(i) {
            let cj = partition.community_of(j);
            if ci == cj {
                // every internal ordered pair lands on the self-loop
                agg.add_edge(ci, ci, w);
            } else if i < j {
                agg.add_edge(ci, cj, w);
            }
        }
    }
    agg
}

/// Best of [`RESTARTS`] Louvain passes, each with its own visiting order
/// drawn from `rng`. Ties keep the earliest pass.
pub fn louvain(graph: &UndirectedWeightedGraph, rng: &mut RngStream) -> Partition {
    let mut best = louvain_pass(graph, rng);
    if !graph.has_edges() {
        return best;
    }
    let mut best_q = modularity(graph, &best);
    for _ in 1..RESTARTS {
        let candidate = louvain_pass(graph, rng);
        let q = modularity(graph, &candidate);
        if q > best_q + MIN_GAIN {
            best = candidate;
            best_q = q;
        }
    }
    best
}

/// Two-phase Louvain: local moves, then aggregation, until the modularity
/// gain falls below [`MIN_GAIN`]. Node visiting order is shuffled by `rng`.
pub fn louvain_pass(graph: &UndirectedWeightedGraph, rng: &mut RngStream) -> Partition {
    let n = graph.node_count();
    if !graph.has_edges() {
        return Partition::singletons(n);
    }
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level = graph.clone();
    let mut best_q = modularity(graph, &Partition::singletons(n));
    loop {
        let (labels, moved) = local_moves(&level, rng);
        if !moved {
            break;
        }
        let level_partition = Partition::from_labels(&labels);
        let candidate: Vec<usize> = membership.iter().map(|&c| level_partition.community_of(c)).collect();
        let q = modularity(graph, &Partition::from_labels(&candidate));
        if q - best_q <= MIN_GAIN {
            break;
        }
        best_q = q;
        membership = candidate;
        if level_partition.community_count() == level.node_count() {
            break;
        }
        level = aggregate(&level, &level_partition);
    }
    Partition::from_labels(&membership)
}
