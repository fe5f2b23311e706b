//! Network and idea-space measurements taken during a run.

mod graph;
mod louvain;

pub use graph::{UndirectedWeightedGraph, EDGE_EPSILON};
pub use louvain::{louvain, louvain_pass, modularity, Partition, MIN_GAIN, RESTARTS};

use serde::{Deserialize, Serialize};

use crate::state::{distance, Agent, IdeaVector, SimulationState};

/// Stream key domain for per-round community detection.
const LOUVAIN_KEY: u64 = 1 << 63;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub round: usize,
    pub modularity: f64,
    pub community_count: usize,
    pub community_std: f64,
}

impl MetricsRecord {
    pub fn is_finite(&self) -> bool {
        self.modularity.is_finite() && self.community_std.is_finite()
    }
}

/// RMS distance of community mean idea states from their centroid.
pub fn community_state_std(partition: &Partition, agents: &[Agent], normalize: bool) -> f64 {
    let means: Vec<IdeaVector> = partition
        .members()
        .iter()
        .filter_map(|members| IdeaVector::mean(members.iter().map(|&i| &agents[i].idea_state[..])))
        .collect();
    let Some(centroid) = IdeaVector::mean(means.iter().map(|m| &m[..])) else {
        return 0.0;
    };
    let sq: f64 = means.iter().map(|m| distance(m, &centroid, normalize).powi(2)).sum();
    (sq / means.len() as f64).sqrt()
}

/// Center of an author's knowledgebase: the mean of every other agent's
/// recent average, weighted by the author's in-weights.
pub fn knowledge_center(author: usize, state: &SimulationState) -> IdeaVector {
    let row = state.weights.row(author);
    let recents: Vec<(IdeaVector, f64)> = state
        .agents
        .iter()
        .filter(|a| a.id != author)
        .map(|a| (a.recent_average(), row[a.id]))
        .collect();
    IdeaVector::weighted_mean(recents.iter().map(|(v, w)| (&v[..], *w)))
        .expect("a valid network has at least two agents")
}

/// Distance of fresh opinion content from its author's knowledgebase center.
pub fn eccentricity(content: &[f64], author: usize, state: &SimulationState) -> f64 {
    distance(content, &knowledge_center(author, state), state.params.normalize_distance)
}

/// Community structure of the current weights.
pub fn record_round_metrics(state: &SimulationState) -> MetricsRecord {
    let graph = UndirectedWeightedGraph::from_directed(&state.weights);
    let mut rng = state.rng.substream(LOUVAIN_KEY | state.round_counter as u64);
    let partition = louvain(&graph, &mut rng);
    MetricsRecord {
        round: state.round_counter,
        modularity: modularity(&graph, &partition),
        community_count: partition.community_count(),
        community_std: community_state_std(&partition, &state.agents, state.params.normalize_distance),
    }
}
