use crate::state::WeightMatrix;

/// Symmetric weights below this are dropped from the projection.
pub const EDGE_EPSILON: f64 = 1e-9;

/// Undirected weighted graph stored as adjacency lists.
///
/// Each undirected edge `{i, j}` appears in both lists; a self-loop appears
/// once in its own list. Weighted degree is the row sum.
#[derive(Clone, Debug, PartialEq)]
pub struct UndirectedWeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl UndirectedWeightedGraph {
    pub fn empty(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n] }
    }

    /// Builds from undirected edges; repeated edges accumulate.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut g = Self::empty(n);
        for &(i, j, w) in edges {
            g.add_edge(i, j, w);
        }
        g
    }

    /// Mean symmetrization `(w[i][j] + w[j][i]) / 2` of a directed matrix.
    pub fn from_directed(weights: &WeightMatrix) -> Self {
        let n = weights.n();
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (weights.get(i, j) + weights.get(j, i));
                if s >= EDGE_EPSILON {
                    g.adj[i].push((j, s));
                    g.adj[j].push((i, s));
                }
            }
        }
        g
    }

    pub fn add_edge(&mut self, i: usize, j: usize, w: f64) {
        if w <= 0.0 {
            return;
        }
        if i == j {
            Self::accumulate(&mut self.adj[i], i, w);
        } else {
            Self::accumulate(&mut self.adj[i], j, w);
            Self::accumulate(&mut self.adj[j], i, w);
        }
    }

    fn accumulate(list: &mut Vec<(usize, f64)>, to: usize, w: f64) {
        match list.iter_mut().find(|(t, _)| *t == to) {
            Some(entry) => entry.1 += w,
            None => list.push((to, w)),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, w)| w).sum()
    }

    /// Sum of weighted degrees, i.e. `2m`.
    pub fn total_degree(&self) -> f64 {
        (0..self.node_count()).map(|i| self.degree(i)).sum()
    }

    pub fn has_edges(&self) -> bool {
        self.adj.iter().any(|l| !l.is_empty())
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adj[i].iter().find(|(t, _)| *t == j).map_or(0.0, |&(_, w)| w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_is_symmetric_and_drops_tiny_edges() {
        let w = WeightMatrix::from_rows(&[
            vec![0.0, 0.2, 1e-12],
            vec![0.4, 0.0, 0.0],
            vec![1e-12, 0.0, 0.0],
        ]);
        let g = UndirectedWeightedGraph::from_directed(&w);
        assert!((g.weight(0, 1) - 0.3).abs() < 1e-15);
        assert_eq!(g.weight(1, 0), g.weight(0, 1));
        assert_eq!(g.weight(0, 2), 0.0);
        assert_eq!(g.weight(0, 0), 0.0);
        assert!((g.total_degree() - 0.6).abs() < 1e-15);
    }
}
