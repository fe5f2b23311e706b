//! Exposure strategies: which opinions each user sees and which incoming
//! edges get updated this round.

use std::cmp::Ordering;

use crate::state::{distance, SimulationState, Strategy};

/// What one user is exposed to in one round.
///
/// `opinions` holds opinion ids (indices into the opinion log) in selection
/// order; `edge_partners` is sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExposureSet {
    pub user: usize,
    pub opinions: Vec<usize>,
    pub edge_partners: Vec<usize>,
}

/// Dispatches to the configured strategy.
pub fn expose(state: &SimulationState, user: usize) -> ExposureSet {
    match state.params.strategy {
        Strategy::SC => strongest_connections(state, user),
        Strategy::NO => nearest_opinions(state, user),
        Strategy::FO => farthest_opinions(state, user),
        Strategy::NU => nearest_users(state, user),
        Strategy::FU => farthest_users(state, user),
        Strategy::NOU => nearest_opinions_and_users(state, user),
    }
}

/// Keeps the `limit` smallest `(key, id)` pairs, returned in ascending order.
///
/// Keys compare with `total_cmp`; equal keys fall back to the smaller id.
fn smallest(mut items: Vec<(f64, usize)>, limit: usize) -> Vec<(f64, usize)> {
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if items.len() > limit {
        items.select_nth_unstable_by(limit, cmp);
        items.truncate(limit);
    }
    items.sort_unstable_by(cmp);
    items
}

fn sorted_ids(mut ids: Vec<usize>) -> Vec<usize> {
    ids.sort_unstable();
    ids.dedup();
    ids
}

pub fn strongest_connections(state: &SimulationState, user: usize) -> ExposureSet {
    let row = state.weights.row(user);
    let candidates = (0..state.n()).filter(|&j| j != user).map(|j| (-row[j], j)).collect();
    let partners = sorted_ids(
        smallest(candidates, state.params.recommendation_size).into_iter().map(|(_, j)| j).collect(),
    );
    let opinions = state
        .round_pool()
        .iter()
        .filter(|o| partners.binary_search(&o.author).is_ok())
        .map(|o| o.id)
        .collect();
    ExposureSet { user, opinions, edge_partners: partners }
}

fn pick_opinions(state: &SimulationState, user: usize, order: Ordering) -> ExposureSet {
    let me = &state.agents[user].idea_state;
    let normalize = state.params.normalize_distance;
    let sign = if order == Ordering::Less { 1.0 } else { -1.0 };
    let candidates = state
        .round_pool()
        .iter()
        .filter(|o| o.author != user)
        .map(|o| (sign * distance(&o.content, me, normalize), o.id))
        .collect();
    let picked = smallest(candidates, state.params.recommendation_size);
    let opinions: Vec<usize> = picked.into_iter().map(|(_, id)| id).collect();
    let partners = sorted_ids(opinions.iter().map(|&id| state.opinion_log[id].author).collect());
    ExposureSet { user, opinions, edge_partners: partners }
}

pub fn nearest_opinions(state: &SimulationState, user: usize) -> ExposureSet {
    pick_opinions(state, user, Ordering::Less)
}

pub fn farthest_opinions(state: &SimulationState, user: usize) -> ExposureSet {
    pick_opinions(state, user, Ordering::Greater)
}

/// Distinct authors in the current pool, excluding `user`.
pub fn active_users(state: &SimulationState, user: usize) -> Vec<usize> {
    sorted_ids(state.round_pool().iter().map(|o| o.author).filter(|&a| a != user).collect())
}

fn pick_users(state: &SimulationState, user: usize, order: Ordering) -> ExposureSet {
    let me = &state.agents[user].idea_state;
    let normalize = state.params.normalize_distance;
    let sign = if order == Ordering::Less { 1.0 } else { -1.0 };
    let candidates = active_users(state, user)
        .into_iter()
        .map(|j| (sign * distance(&state.agents[j].idea_state, me, normalize), j))
        .collect();
    let picked = smallest(candidates, state.params.recommendation_size);
    ExposureSet {
        user,
        opinions: Vec::new(),
        edge_partners: sorted_ids(picked.into_iter().map(|(_, j)| j).collect()),
    }
}

pub fn nearest_users(state: &SimulationState, user: usize) -> ExposureSet {
    pick_users(state, user, Ordering::Less)
}

pub fn farthest_users(state: &SimulationState, user: usize) -> ExposureSet {
    pick_users(state, user, Ordering::Greater)
}

/// Nearest opinions for the idea-state update; edges to the union of their
/// authors and the nearest users.
pub fn nearest_opinions_and_users(state: &SimulationState, user: usize) -> ExposureSet {
    let by_opinion = nearest_opinions(state, user);
    let by_user = nearest_users(state, user);
    let mut partners = by_opinion.edge_partners;
    partners.extend(by_user.edge_partners);
    ExposureSet { user, opinions: by_opinion.opinions, edge_partners: sorted_ids(partners) }
}
