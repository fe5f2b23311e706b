use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, Parser, Subcommand};

use recsim::harness::{CellSummary, ExperimentConfig, Summary};
use recsim::sampling::PowerLawSpec;
use recsim::state::{SimParams, Strategy, WeightInit};

fn defaults() -> SimParams {
    SimParams::default()
}

#[derive(Debug, Parser)]
#[command(name = "recsim", version, about = "Opinion dynamics on an adaptive network under recommendation strategies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single simulation and write its per-round metrics.
    Run(RunArgs),
    /// Run a replicated grid of simulations and write results and summary.
    Sweep(SweepArgs),
    /// Recompute the summary from a results directory and print it.
    Summarize(SummarizeArgs),
    /// Check an experiment config file and report the grid size.
    ValidateConfig(ValidateArgs),
}

/// Model parameters shared by `run` and `sweep`.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Number of agents.
    #[arg(long, default_value_t = defaults().n)]
    pub n: usize,
    /// Idea-space dimension.
    #[arg(long, default_value_t = defaults().k)]
    pub k: usize,
    /// Conformity strength.
    #[arg(long, default_value_t = defaults().c, allow_negative_numbers = true)]
    pub c: f64,
    /// Homophily threshold.
    #[arg(long, default_value_t = defaults().theta_h, allow_negative_numbers = true)]
    pub theta_h: f64,
    /// Novelty threshold.
    #[arg(long, default_value_t = defaults().theta_a, allow_negative_numbers = true)]
    pub theta_a: f64,
    /// Half-width of the uniform noise added to each opinion.
    #[arg(long, default_value_t = defaults().opinion_noise, allow_negative_numbers = true)]
    pub opinion_noise: f64,
    /// Half-width of the uniform noise added to each idea-state update.
    #[arg(long, default_value_t = defaults().state_noise, allow_negative_numbers = true)]
    pub state_noise: f64,
    /// Opinions generated per round.
    #[arg(long, default_value_t = defaults().opinions_per_round)]
    pub opinions_per_round: usize,
    /// Opinions generated over the whole run.
    #[arg(long, default_value_t = defaults().total_opinions)]
    pub total_opinions: usize,
    /// Opinions or users recommended to each user per round.
    #[arg(long, default_value_t = defaults().recommendation_size)]
    pub recommendation_size: usize,
    /// Recent opinions remembered per user.
    #[arg(long, default_value_t = defaults().recent_window)]
    pub recent_window: usize,
    /// Exponent of the power-law weight initializer.
    #[arg(long, default_value_t = defaults().power_law.alpha, allow_negative_numbers = true)]
    pub power_law_alpha: f64,
    /// Lower bound of the power-law weight initializer.
    #[arg(long, default_value_t = defaults().power_law.x_min, allow_negative_numbers = true)]
    pub power_law_min: f64,
    /// Upper bound of the power-law weight initializer.
    #[arg(long, default_value_t = defaults().power_law.x_max, allow_negative_numbers = true)]
    pub power_law_max: f64,
    /// Divide Euclidean distances by the square root of the dimension.
    #[arg(long, default_value_t = defaults().normalize_distance, action = clap::ArgAction::Set)]
    pub normalize_distance: bool,
}

impl ModelArgs {
    /// Copies every field into `params`, or only those given on the command
    /// line when `matches` is provided.
    fn apply(&self, params: &mut SimParams, matches: Option<&ArgMatches>) {
        let given = |id: &str| matches.is_none_or(|m| m.value_source(id) == Some(ValueSource::CommandLine));
        macro_rules! set {
            ($($field:ident),*) => {$(
                if given(stringify!($field)) {
                    params.$field = self.$field;
                }
            )*};
        }
        set!(n, k, c, theta_h, theta_a, opinion_noise, state_noise, opinions_per_round, total_opinions);
        set!(recommendation_size, recent_window, normalize_distance);
        if given("power_law_alpha") {
            params.power_law.alpha = self.power_law_alpha;
        }
        if given("power_law_min") {
            params.power_law.x_min = self.power_law_min;
        }
        if given("power_law_max") {
            params.power_law.x_max = self.power_law_max;
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Recommendation strategy: SC, NO, FO, NU, FU or NOU.
    #[arg(long, short, default_value_t = defaults().strategy)]
    pub strategy: Strategy,
    /// Homophily strength.
    #[arg(long, default_value_t = defaults().h, allow_negative_numbers = true)]
    pub h: f64,
    /// Attention-to-novelty strength.
    #[arg(long, default_value_t = defaults().a, allow_negative_numbers = true)]
    pub a: f64,
    /// Initial weight distribution: uniform or power_law.
    #[arg(long, default_value_t = defaults().weight_init)]
    pub weight_init: WeightInit,
    /// Random seed.
    #[arg(long, default_value_t = defaults().seed)]
    pub seed: u64,
    /// Record the eccentricity of every opinion.
    #[arg(long)]
    pub eccentricity: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output directory.
    #[arg(long, short, env = "RECSIM_OUT", default_value = "recsim-out")]
    pub out: PathBuf,
}

impl RunArgs {
    pub fn params(&self) -> SimParams {
        let mut p = SimParams {
            strategy: self.strategy,
            h: self.h,
            a: self.a,
            weight_init: self.weight_init,
            seed: self.seed,
            power_law: PowerLawSpec::default(),
            ..SimParams::default()
        };
        self.model.apply(&mut p, None);
        p
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Built-in grid: desk, paper (alias paper-network) or paper-eccentricity.
    #[arg(long, default_value = "desk", conflicts_with = "config")]
    pub preset: String,
    /// JSON experiment config; replaces the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Replications per cell.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Master seed from which every run seed is derived.
    #[arg(long)]
    pub master_seed: Option<u64>,
    /// Record per-opinion eccentricities.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub eccentricity: Option<bool>,
    /// Worker threads (default: available cores).
    #[arg(long, short)]
    pub workers: Option<usize>,
    /// Model parameters; given flags override the preset or config.
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output directory (default: the config's `output_dir`, else recsim-out).
    #[arg(long, short, env = "RECSIM_OUT")]
    pub out: Option<PathBuf>,
}

impl SweepArgs {
    pub fn config(&self, matches: &ArgMatches) -> recsim::Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)?,
            None => ExperimentConfig::preset(&self.preset).ok_or_else(|| recsim::Error::InvalidParam {
                name: "preset",
                reason: format!("unknown preset `{}` (expected desk, paper, paper-network or paper-eccentricity)", self.preset),
            })?,
        };
        if let Some(r) = self.replications {
            config.replications = r;
        }
        if let Some(s) = self.master_seed {
            config.master_seed = s;
        }
        if let Some(e) = self.eccentricity {
            config.eccentricity = e;
        }
        self.model.apply(&mut config.params, Some(matches));
        Ok(config)
    }

    pub fn out_dir(&self, config: &ExperimentConfig) -> PathBuf {
        self.out.clone().or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("recsim-out"))
    }
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Results directory written by `sweep` or `run`.
    #[arg(long, short, env = "RECSIM_OUT", default_value = "recsim-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// JSON experiment config.
    pub config: PathBuf,
}

/// Command-line spelling of a parameter name.
pub fn flag_for(name: &str) -> String {
    match name {
        "power_law_bounds" => "--power-law-min/--power-law-max".into(),
        "grid" => "config grid".into(),
        other => format!("--{}", other.replace('_', "-")),
    }
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

fn table_row(cell: &CellSummary, pick: impl Fn(&recsim::harness::StrategySummary) -> f64) -> String {
    let mut row = format!("{:<34}", cell.cell.key());
    for s in Strategy::ALL {
        let v = cell.strategies.iter().find(|x| x.strategy == s).map(&pick);
        row.push_str(&format!(" {:>8}", fmt_cell(v)));
    }
    row
}

/// Plain-text table of per-cell medians of the maximum metrics.
pub fn render_summary(summary: &Summary) -> String {
    let mut out = String::new();
    let header = |title: &str| {
        let mut h = format!("{title:<34}");
        for s in Strategy::ALL {
            h.push_str(&format!(" {:>8}", s.as_str()));
        }
        h
    };
    out.push_str(&header("median max modularity"));
    out.push('\n');
    for cell in &summary.cells {
        out.push_str(&table_row(cell, |s| s.max_modularity.median));
        out.push('\n');
    }
    out.push('\n');
    out.push_str(&header("median max community std"));
    out.push('\n');
    for cell in &summary.cells {
        out.push_str(&table_row(cell, |s| s.max_community_std.median));
        out.push('\n');
    }
    let significant: Vec<String> = summary
        .cells
        .iter()
        .flat_map(|c| {
            let tests = [
                ("max_modularity", &c.max_modularity_tests),
                ("max_community_std", &c.max_community_std_tests),
                ("eccentricity", &c.eccentricity_tests),
            ];
            tests.into_iter().flat_map(move |(m, ts)| {
                ts.iter()
                    .filter(|t| t.significant())
                    .map(move |t| format!("  {} {m}: {} {} {} (p={:.3e})", c.cell.key(), t.opinion, t.alternative, t.baseline, t.p))
            })
        })
        .collect();
    out.push('\n');
    out.push_str(&format!("{} runs; {} significant one-sided comparisons\n", summary.runs, significant.len()));
    for line in significant {
        out.push_str(&line);
        out.push('\n');
    }
    out
}
