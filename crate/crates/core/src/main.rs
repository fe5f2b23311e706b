mod cli;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use log::{error, info};

use cli::{flag_for, render_summary, Cli, Command};
use recsim::harness::{self, RunSpec};
use recsim::Error;

fn report(err: &Error) -> ExitCode {
    match err {
        Error::InvalidParam { name, reason } => {
            eprintln!("error: invalid value for {}: {reason}", flag_for(name));
            ExitCode::from(2)
        }
        Error::UnknownStrategy(_) | Error::UnknownWeightInit(_) | Error::Json { .. } => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
        _ => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => {
            let sub = matches.subcommand_matches("sweep").expect("sweep subcommand");
            sweep(args, sub)
        }
        Command::Summarize(args) => summarize(args),
        Command::ValidateConfig(args) => validate(args),
    };
    result.unwrap_or_else(|e| report(&e))
}

fn run(args: &cli::RunArgs) -> recsim::Result<ExitCode> {
    let params = args.params();
    params.validate()?;
    let spec = RunSpec::single(params, args.eccentricity);
    info!("running {} for {} rounds", spec.cell.key(), spec.params.rounds());
    let result = harness::execute(&spec)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::Io { path: args.out.clone(), source: e })?;
    harness::write_rounds_csv(std::slice::from_ref(&result), &args.out.join("rounds.csv"))?;
    if result.eccentricities.is_some() {
        harness::write_eccentricity_csv(std::slice::from_ref(&result), &args.out.join("eccentricity.csv"))?;
    }
    println!("max_modularity\t{}", result.max_modularity);
    println!("max_community_std\t{}", result.max_community_std);
    info!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: &cli::SweepArgs, matches: &clap::ArgMatches) -> recsim::Result<ExitCode> {
    let config = args.config(matches)?;
    config.validate()?;
    let out = args.out_dir(&config);
    let specs = harness::expand_grid(&config);
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    info!("{} runs on {workers} worker(s), writing to {}", specs.len(), out.display());
    let outcome = harness::run_all(&specs, workers)?;
    let summary = harness::persist(&outcome.results, &outcome.failures, &out)?;
    print!("{}", render_summary(&summary));
    if outcome.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        error!("{} of {} runs failed; see failures.json", outcome.failures.len(), specs.len());
        Ok(ExitCode::from(1))
    }
}

fn summarize(args: &cli::SummarizeArgs) -> recsim::Result<ExitCode> {
    let results = harness::read_results(&args.out)?;
    let summary = harness::summarize(&results);
    harness::write_summary(&summary, &args.out.join("summary.json"))?;
    print!("{}", render_summary(&summary));
    Ok(ExitCode::SUCCESS)
}

fn validate(args: &cli::ValidateArgs) -> recsim::Result<ExitCode> {
    let config = harness::ExperimentConfig::from_path(&args.config)?;
    config.validate()?;
    let cells = config.run_cells().len();
    println!(
        "ok: {cells} cells x {} replications = {} runs, {} rounds each",
        config.replications,
        cells * config.replications,
        config.params.rounds()
    );
    Ok(ExitCode::SUCCESS)
}
