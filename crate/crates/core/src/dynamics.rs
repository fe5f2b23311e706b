//! Opinion generation and the synchronous per-round co-evolution of idea
//! states and edge weights.

use rayon::prelude::*;

use crate::metrics::eccentricity;
use crate::recommend::{expose, ExposureSet};
use crate::state::{distance, IdeaVector, Opinion, SimParams, SimulationState};

/// Everything a round changed, computed from the post-generation snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundUpdate {
    pub round: usize,
    /// Unclamped idea-state delta per agent.
    pub state_deltas: Vec<IdeaVector>,
    /// `(user, partner, delta)` for `w[user][partner]`, before clamping.
    pub weight_deltas: Vec<(usize, usize, f64)>,
    /// `(opinion id, eccentricity)` for each opinion generated this round, when tracked.
    pub eccentricities: Vec<(usize, f64)>,
}

/// Noise stream key for one agent's state update in one round.
fn noise_key(round: usize, agent: usize) -> u64 {
    ((round as u64) << 32) | agent as u64
}

/// Draws a fluctuated copy of the author's idea state and records it.
pub fn generate_opinion(state: &mut SimulationState, author: usize) -> Opinion {
    let content = draw_content(state, author);
    state.push_opinion(author, content).clone()
}

fn draw_content(state: &mut SimulationState, author: usize) -> IdeaVector {
    let noise = state.rng.fluctuation(state.params.k, state.params.opinion_noise);
    let mut content = state.agents[author].idea_state.clone();
    content.add_scaled(&noise, 1.0);
    content
}

/// Homophily and novelty terms of a weight change.
///
/// Returns `h * (theta_h - |x_i - recent_j|) + a * (|exposed_i - recent_j| - theta_a)`.
pub fn weight_change(params: &SimParams, idea_state: &[f64], exposed: &[f64], partner_recent: &[f64]) -> f64 {
    let norm = params.normalize_distance;
    let homophily = params.theta_h - distance(idea_state, partner_recent, norm);
    let novelty = distance(exposed, partner_recent, norm) - params.theta_a;
    params.h * homophily + params.a * novelty
}

/// The exposure average a user compares partners against.
///
/// With opinions exposed this is their weighted mean. User recommendations
/// expose no opinions, so the partners' recent averages stand in, weighted by
/// `w[user][partner]`.
pub fn effective_exposed(state: &SimulationState, exposure: &ExposureSet, recents: &[IdeaVector]) -> Option<IdeaVector> {
    if !exposure.opinions.is_empty() {
        return state.exposed_average(exposure.user, exposure.opinions.iter().map(|&id| &state.opinion_log[id]));
    }
    let row = state.weights.row(exposure.user);
    IdeaVector::weighted_mean(exposure.edge_partners.iter().map(|&j| (&recents[j][..], row[j])))
}

/// Idea-state change without the fluctuation term.
pub fn conformity_delta(state: &SimulationState, exposure: &ExposureSet) -> IdeaVector {
    let me = &state.agents[exposure.user].idea_state;
    let exposed = state.exposed_average(exposure.user, exposure.opinions.iter().map(|&id| &state.opinion_log[id]));
    match exposed {
        Some(avg) => {
            let c = state.params.c;
            IdeaVector::new(avg.iter().zip(me.iter()).map(|(e, x)| c * (e - x)).collect())
        }
        None => IdeaVector::zeros(me.dim()),
    }
}

/// `c (exposed - x) + noise`, or the noise alone when nothing was exposed.
pub fn idea_state_delta(state: &SimulationState, exposure: &ExposureSet, noise: &[f64]) -> IdeaVector {
    let mut delta = conformity_delta(state, exposure);
    delta.add_scaled(noise, 1.0);
    delta
}

/// Weight change for `w[user][partner]`, unclamped.
pub fn edge_weight_delta(state: &SimulationState, exposure: &ExposureSet, partner: usize) -> f64 {
    let recents: Vec<IdeaVector> = state.agents.iter().map(|a| a.recent_average()).collect();
    let exposed = effective_exposed(state, exposure, &recents)
        .expect("partner belongs to the exposure set, so it is non-empty");
    weight_change(&state.params, &state.agents[exposure.user].idea_state, &exposed, &recents[partner])
}

fn user_update(state: &SimulationState, user: usize, recents: &[IdeaVector]) -> (IdeaVector, Vec<(usize, usize, f64)>) {
    let exposure = expose(state, user);
    let mut noise_rng = state.rng.substream(noise_key(state.round_counter, user));
    let noise = noise_rng.fluctuation(state.params.k, state.params.state_noise);
    let dx = idea_state_delta(state, &exposure, &noise);
    let mut dw = Vec::with_capacity(exposure.edge_partners.len());
    if let Some(exposed) = effective_exposed(state, &exposure, recents) {
        let me = &state.agents[user].idea_state;
        for &j in &exposure.edge_partners {
            dw.push((user, j, weight_change(&state.params, me, &exposed, &recents[j])));
        }
    }
    (dx, dw)
}

/// Generates one round of opinions, then updates all states and weights at once.
pub fn run_round(state: &mut SimulationState, track_eccentricity: bool) -> RoundUpdate {
    let round = state.round_counter;
    let mut eccentricities = Vec::new();
    for _ in 0..state.params.opinions_per_round {
        let author = state.rng.index(state.n());
        if track_eccentricity {
            let content = draw_content(state, author);
            let ecc = eccentricity(&content, author, state);
            let id = state.push_opinion(author, content).id;
            eccentricities.push((id, ecc));
        } else {
            generate_opinion(state, author);
        }
    }

    let snapshot = &*state;
    let recents: Vec<IdeaVector> = snapshot.agents.iter().map(|a| a.recent_average()).collect();
    let updates: Vec<_> = (0..snapshot.n()).into_par_iter().map(|u| user_update(snapshot, u, &recents)).collect();

    let mut state_deltas = Vec::with_capacity(updates.len());
    let mut weight_deltas = Vec::new();
    for (dx, dw) in updates {
        state_deltas.push(dx);
        weight_deltas.extend(dw);
    }
    apply(state, &state_deltas, &weight_deltas);
    state.clear_pool();
    state.round_counter += 1;
    RoundUpdate { round, state_deltas, weight_deltas, eccentricities }
}

fn apply(state: &mut SimulationState, state_deltas: &[IdeaVector], weight_deltas: &[(usize, usize, f64)]) {
    for (agent, dx) in state.agents.iter_mut().zip(state_deltas) {
        agent.idea_state.add_scaled(dx, 1.0);
    }
    for &(i, j, dw) in weight_deltas {
        let w = state.weights.get(i, j) + dw;
        state.weights.set(i, j, w);
    }
    state.weights.clamp_unit();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{SimParams, Strategy, WeightInit, WeightMatrix};
    use approx::assert_relative_eq;

    fn params(strategy: Strategy) -> SimParams {
        SimParams { n: 20, total_opinions: 500, strategy, seed: 5, ..SimParams::default() }
    }

    #[test]
    fn zero_noise_opinion_matches_state() {
        let p = SimParams { opinion_noise: 0.0, ..params(Strategy::SC) };
        let mut s = SimulationState::init(p).unwrap();
        let o = generate_opinion(&mut s, 3);
        assert_eq!(o.content, s.agents[3].idea_state);
        assert_eq!(o.id, 0);
        assert_eq!(s.agents[3].recent_len(), 1);
    }

    #[test]
    fn opinion_within_noise_band() {
        let mut s = SimulationState::init(params(Strategy::SC)).unwrap();
        for _ in 0..50 {
            let o = generate_opinion(&mut s, 1);
            for (c, x) in o.content.iter().zip(s.agents[1].idea_state.iter()) {
                assert!((c - x).abs() <= 0.1 + 1e-15);
            }
        }
        assert_eq!(s.agents[1].recent_len(), 10);
    }

    #[test]
    fn null_dynamics_leave_state_unchanged() {
        let p = SimParams { c: 0.0, h: 0.0, a: 0.0, opinion_noise: 0.0, state_noise: 0.0, ..params(Strategy::NO) };
        let mut s = SimulationState::init(p).unwrap();
        let before = (s.agents.iter().map(|a| a.idea_state.clone()).collect::<Vec<_>>(), s.weights.clone());
        run_round(&mut s, false);
        assert_eq!(s.agents.iter().map(|a| a.idea_state.clone()).collect::<Vec<_>>(), before.0);
        assert_eq!(s.weights, before.1);
        assert_eq!(s.opinion_log.len(), 100);
        assert!(s.round_pool().is_empty());
    }

    #[test]
    fn weight_change_examples() {
        let p = SimParams { h: 0.3, a: 0.01, ..SimParams::default() };
        let x = vec![0.5; 15];
        assert_relative_eq!(weight_change(&p, &x, &x, &x), 0.029, epsilon = 1e-15);
        // homophily term alone at zero distance is theta_h
        let h_only = SimParams { h: 1.0, a: 0.0, ..p.clone() };
        assert_relative_eq!(weight_change(&h_only, &x, &x, &x), 0.1);
        // novelty term vanishes at distance theta_a (normalized: offset 0.1 on every axis)
        let a_only = SimParams { h: 0.0, a: 1.0, ..p };
        let shifted = vec![0.6; 15];
        assert_relative_eq!(weight_change(&a_only, &x, &x, &shifted), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn conformity_is_linear() {
        let p = SimParams { n: 2, k: 3, c: 0.01, ..SimParams::default() };
        let mut w = WeightMatrix::zeros(2);
        w.set(0, 1, 0.5);
        let mut s = SimulationState::from_parts(p, vec![IdeaVector::zeros(3), IdeaVector::zeros(3)], w).unwrap();
        s.push_opinion(1, IdeaVector::filled(3, 1.0));
        let e = ExposureSet { user: 0, opinions: vec![0], edge_partners: vec![1] };
        let d = idea_state_delta(&s, &e, &[0.0; 3]);
        for v in d.iter() {
            assert_relative_eq!(*v, 0.01, epsilon = 1e-15);
        }
        let same = ExposureSet { user: 1, opinions: vec![], edge_partners: vec![0] };
        assert_eq!(idea_state_delta(&s, &same, &[0.0; 3]), IdeaVector::zeros(3));
    }

    #[test]
    fn user_strategies_do_not_move_states_without_noise() {
        for strategy in [Strategy::NU, Strategy::FU] {
            let p = SimParams { state_noise: 0.0, ..params(strategy) };
            let mut s = SimulationState::init(p).unwrap();
            let before: Vec<_> = s.agents.iter().map(|a| a.idea_state.clone()).collect();
            let upd = run_round(&mut s, false);
            assert!(upd.state_deltas.iter().all(|d| d.iter().all(|&v| v == 0.0)));
            assert_eq!(s.agents.iter().map(|a| a.idea_state.clone()).collect::<Vec<_>>(), before);
            assert!(!upd.weight_deltas.is_empty());
        }
    }

    #[test]
    fn consensus_is_a_fixed_point() {
        for strategy in Strategy::ALL {
            let p = SimParams { opinion_noise: 0.0, state_noise: 0.0, weight_init: WeightInit::Uniform, ..params(strategy) };
            let n = p.n;
            let mut s = SimulationState::init(p.clone()).unwrap();
            for a in &mut s.agents {
                a.idea_state = IdeaVector::filled(p.k, 0.4);
            }
            let upd = run_round(&mut s, false);
            let step = p.h * p.theta_h - p.a * p.theta_a;
            assert!(upd.state_deltas.iter().all(|d| d.iter().all(|&v| v.abs() < 1e-15)));
            for &(_, _, dw) in &upd.weight_deltas {
                assert_relative_eq!(dw, step, epsilon = 1e-15);
            }
            assert_eq!(s.agents.len(), n);
        }
    }

    #[test]
    fn weights_stay_in_unit_interval() {
        for strategy in Strategy::ALL {
            let mut s = SimulationState::init(params(strategy)).unwrap();
            for _ in 0..5 {
                run_round(&mut s, false);
                for (i, j, w) in s.weights.iter() {
                    assert!((0.0..=1.0).contains(&w));
                    if i == j {
                        assert_eq!(w, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn eccentricity_tracking_does_not_change_trajectory() {
        let mut a = SimulationState::init(params(Strategy::FO)).unwrap();
        let mut b = SimulationState::init(params(Strategy::FO)).unwrap();
        for _ in 0..3 {
            let ua = run_round(&mut a, true);
            let ub = run_round(&mut b, false);
            assert_eq!(ua.eccentricities.len(), 100);
            assert_eq!(ua.state_deltas, ub.state_deltas);
        }
        assert_eq!(a.weights, b.weights);
    }
}
