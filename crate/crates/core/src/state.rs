//! Network state: agents, idea vectors, opinions, weights and parameters.

use std::collections::VecDeque;
use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{PowerLawSpec, RngStream};

/// A point in idea space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IdeaVector(Vec<f64>);

impl IdeaVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn filled(k: usize, value: f64) -> Self {
        Self(vec![value; k])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Adds `scale * other` in place.
    pub fn add_scaled(&mut self, other: &[f64], scale: f64) {
        debug_assert_eq!(self.0.len(), other.len());
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += scale * b;
        }
    }

    /// Unweighted component-wise mean. Returns `None` for an empty input.
    pub fn mean<'a, I>(vectors: I) -> Option<IdeaVector>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut acc: Option<Vec<f64>> = None;
        let mut count = 0usize;
        for v in vectors {
            let sum = acc.get_or_insert_with(|| vec![0.0; v.len()]);
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            count += 1;
        }
        acc.map(|mut sum| {
            let inv = 1.0 / count as f64;
            sum.iter_mut().for_each(|s| *s *= inv);
            IdeaVector(sum)
        })
    }

    /// Weighted mean. Falls back to the unweighted mean when the weights sum to zero.
    pub fn weighted_mean<'a, I>(items: I) -> Option<IdeaVector>
    where
        I: IntoIterator<Item = (&'a [f64], f64)>,
    {
        let items: Vec<(&[f64], f64)> = items.into_iter().collect();
        let total: f64 = items.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return Self::mean(items.iter().map(|(v, _)| *v));
        }
        let mut acc: Option<Vec<f64>> = None;
        for (v, w) in items {
            let sum = acc.get_or_insert_with(|| vec![0.0; v.len()]);
            for (s, x) in sum.iter_mut().zip(v) {
                *s += w * x;
            }
        }
        acc.map(|mut sum| {
            sum.iter_mut().for_each(|s| *s /= total);
            IdeaVector(sum)
        })
    }
}

impl Deref for IdeaVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for IdeaVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for IdeaVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Euclidean distance, divided by `sqrt(k)` when `normalize` is set.
pub fn distance(x: &[f64], y: &[f64], normalize: bool) -> f64 {
    assert_eq!(x.len(), y.len(), "distance: dimension mismatch");
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if normalize && !x.is_empty() {
        (sq / x.len() as f64).sqrt()
    } else {
        sq.sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Opinion {
    pub id: usize,
    pub author: usize,
    pub content: IdeaVector,
    pub round: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Agent {
    pub id: usize,
    pub idea_state: IdeaVector,
    recent: VecDeque<IdeaVector>,
    window: usize,
}

impl Agent {
    pub fn new(id: usize, idea_state: IdeaVector, window: usize) -> Self {
        Self { id, idea_state, recent: VecDeque::with_capacity(window), window }
    }

    /// Pushes an authored opinion, evicting the oldest beyond the window.
    pub fn remember(&mut self, content: IdeaVector) {
        if self.recent.len() == self.window {
            self.recent.pop_front();
        }
        self.recent.push_back(content);
    }

    pub fn recent_opinions(&self) -> impl ExactSizeIterator<Item = &IdeaVector> {
        self.recent.iter()
    }

    pub fn recent_len(&self) -> usize {
        self.recent.len()
    }

    /// Mean of the recent opinions, or the idea state while none exist.
    pub fn recent_average(&self) -> IdeaVector {
        IdeaVector::mean(self.recent.iter().map(|v| &v[..]))
            .unwrap_or_else(|| self.idea_state.clone())
    }
}

/// Dense directed weights; `get(i, j)` is the influence of `j` on `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    n: usize,
    w: Vec<f64>,
}

impl WeightMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, w: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "weight rows must be square");
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.w[i * self.n + j] = v;
    }

    /// In-weights of user `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.w.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn clamp_unit(&mut self) {
        for v in &mut self.w {
            *v = v.clamp(0.0, 1.0);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.w.iter().enumerate().map(move |(idx, &v)| (idx / self.n, idx % self.n, v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    SC,
    NO,
    FO,
    NU,
    FU,
    NOU,
}

impl Strategy {
    /// Category-axis order used in tables and plots.
    pub const ALL: [Strategy; 6] =
        [Strategy::SC, Strategy::NO, Strategy::NU, Strategy::FU, Strategy::NOU, Strategy::FO];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::SC => "SC",
            Strategy::NO => "NO",
            Strategy::FO => "FO",
            Strategy::NU => "NU",
            Strategy::FU => "FU",
            Strategy::NOU => "NOU",
        }
    }

    pub fn recommends_opinions(self) -> bool {
        matches!(self, Strategy::NO | Strategy::FO)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SC" => Ok(Strategy::SC),
            "NO" => Ok(Strategy::NO),
            "FO" => Ok(Strategy::FO),
            "NU" => Ok(Strategy::NU),
            "FU" => Ok(Strategy::FU),
            "NOU" => Ok(Strategy::NOU),
            other => Err(Error::UnknownStrategy(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightInit {
    Uniform,
    PowerLaw,
}

impl WeightInit {
    pub const ALL: [WeightInit; 2] = [WeightInit::Uniform, WeightInit::PowerLaw];

    pub fn as_str(self) -> &'static str {
        match self {
            WeightInit::Uniform => "uniform",
            WeightInit::PowerLaw => "power_law",
        }
    }
}

impl fmt::Display for WeightInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(WeightInit::Uniform),
            "power_law" | "power-law" => Ok(WeightInit::PowerLaw),
            other => Err(Error::UnknownWeightInit(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub n: usize,
    pub k: usize,
    /// Conformity strength.
    pub c: f64,
    /// Homophily strength.
    pub h: f64,
    /// Attention-to-novelty strength.
    pub a: f64,
    pub theta_h: f64,
    pub theta_a: f64,
    pub opinion_noise: f64,
    pub state_noise: f64,
    pub opinions_per_round: usize,
    pub total_opinions: usize,
    pub recommendation_size: usize,
    pub recent_window: usize,
    pub weight_init: WeightInit,
    pub power_law: PowerLawSpec,
    pub strategy: Strategy,
    pub normalize_distance: bool,
    pub seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            n: 100,
            k: 15,
            c: 0.01,
            h: 0.3,
            a: 0.01,
            theta_h: 0.1,
            theta_a: 0.1,
            opinion_noise: 0.1,
            state_noise: 0.01,
            opinions_per_round: 100,
            total_opinions: 3000,
            recommendation_size: 20,
            recent_window: 10,
            weight_init: WeightInit::Uniform,
            power_law: PowerLawSpec::default(),
            strategy: Strategy::SC,
            normalize_distance: true,
            seed: 0,
        }
    }
}

impl SimParams {
    pub fn rounds(&self) -> usize {
        self.total_opinions / self.opinions_per_round
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(name: &'static str, reason: impl Into<String>) -> Result<()> {
            Err(Error::InvalidParam { name, reason: reason.into() })
        }
        if self.n < 2 {
            return bad("n", format!("need at least 2 agents, got {}", self.n));
        }
        if self.k < 1 {
            return bad("k", "idea dimension must be at least 1");
        }
        if self.recommendation_size < 1 {
            return bad("recommendation_size", "must be at least 1");
        }
        if self.recent_window < 1 {
            return bad("recent_window", "must be at least 1");
        }
        if self.opinions_per_round < 1 {
            return bad("opinions_per_round", "must be at least 1");
        }
        if !self.total_opinions.is_multiple_of(self.opinions_per_round) {
            return bad(
                "total_opinions",
                format!(
                    "{} is not a multiple of opinions_per_round ({})",
                    self.total_opinions, self.opinions_per_round
                ),
            );
        }
        for (name, v) in [
            ("c", self.c),
            ("h", self.h),
            ("a", self.a),
            ("theta_h", self.theta_h),
            ("theta_a", self.theta_a),
            ("opinion_noise", self.opinion_noise),
            ("state_noise", self.state_noise),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(name, format!("must be finite and non-negative, got {v}"));
            }
        }
        if self.weight_init == WeightInit::PowerLaw {
            self.power_law.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SimulationState {
    pub params: SimParams,
    pub agents: Vec<Agent>,
    pub weights: WeightMatrix,
    pub opinion_log: Vec<Opinion>,
    pool_start: usize,
    pub rng: RngStream,
    pub round_counter: usize,
}

impl SimulationState {
    /// Fully connected network with random idea states and initial weights.
    pub fn init(params: SimParams) -> Result<Self> {
        params.validate()?;
        let mut rng = RngStream::new(params.seed);
        let agents = (0..params.n)
            .map(|id| {
                let x: Vec<f64> = (0..params.k).map(|_| rng.uniform(0.0, 1.0)).collect();
                Agent::new(id, x.into(), params.recent_window)
            })
            .collect();
        let mut weights = WeightMatrix::zeros(params.n);
        for i in 0..params.n {
            for j in 0..params.n {
                if i == j {
                    continue;
                }
                let w = match params.weight_init {
                    WeightInit::Uniform => rng.uniform(0.0, 1.0),
                    WeightInit::PowerLaw => rng.power_law_weight(&params.power_law),
                };
                weights.set(i, j, w);
            }
        }
        Ok(Self {
            params,
            agents,
            weights,
            opinion_log: Vec::new(),
            pool_start: 0,
            rng,
            round_counter: 0,
        })
    }

    /// Builds a state from explicit parts, for fixtures and replays.
    pub fn from_parts(params: SimParams, idea_states: Vec<IdeaVector>, weights: WeightMatrix) -> Result<Self> {
        params.validate()?;
        if idea_states.len() != params.n || weights.n() != params.n {
            return Err(Error::InvalidParam {
                name: "n",
                reason: "idea states and weights must match the agent count".into(),
            });
        }
        if let Some(bad) = idea_states.iter().find(|x| x.dim() != params.k) {
            return Err(Error::InvalidParam {
                name: "k",
                reason: format!("idea vector of dimension {} (expected {})", bad.dim(), params.k),
            });
        }
        let rng = RngStream::new(params.seed);
        let agents = idea_states
            .into_iter()
            .enumerate()
            .map(|(id, x)| Agent::new(id, x, params.recent_window))
            .collect();
        Ok(Self { params, agents, weights, opinion_log: Vec::new(), pool_start: 0, rng, round_counter: 0 })
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    /// Opinions generated since the last update.
    pub fn round_pool(&self) -> &[Opinion] {
        &self.opinion_log[self.pool_start..]
    }

    pub fn clear_pool(&mut self) {
        self.pool_start = self.opinion_log.len();
    }

    /// Appends an opinion to the log, the pool and its author's recent buffer.
    pub fn push_opinion(&mut self, author: usize, content: IdeaVector) -> &Opinion {
        let id = self.opinion_log.len();
        let round = id / self.params.opinions_per_round;
        self.agents[author].remember(content.clone());
        self.opinion_log.push(Opinion { id, author, content, round });
        self.opinion_log.last().expect("just pushed")
    }

    /// Weighted mean of exposed opinions, weight `w[user][author]`.
    ///
    /// `None` when nothing was exposed.
    pub fn exposed_average<'a, I>(&self, user: usize, exposure: I) -> Option<IdeaVector>
    where
        I: IntoIterator<Item = &'a Opinion>,
    {
        exposed_average(user, exposure, &self.weights)
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            params: self.params.clone(),
            round: self.round_counter,
            idea_states: self.agents.iter().map(|a| a.idea_state.to_vec()).collect(),
            weights: self.weights.to_rows(),
            opinion_log: self.opinion_log.clone(),
        }
    }
}

pub fn exposed_average<'a, I>(user: usize, exposure: I, weights: &WeightMatrix) -> Option<IdeaVector>
where
    I: IntoIterator<Item = &'a Opinion>,
{
    let row = weights.row(user);
    IdeaVector::weighted_mean(exposure.into_iter().map(|o| (&o.content[..], row[o.author])))
}

/// JSON layout used for golden-seed regression files.
///
/// `weights[i][j]` is the influence of agent `j` on agent `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub params: SimParams,
    pub round: usize,
    pub idea_states: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
    pub opinion_log: Vec<Opinion>,
}
