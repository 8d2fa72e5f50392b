use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grw_tails::io::{
    emit_results, parse_config, render_trial_events, wall_clock, write_output, Format,
    MonteCarloResults, Overrides, ResultDocument, RunConfig, RunManifest, TrialRow,
};
use grw_tails::scenarios::{
    anomaly_sweep, map_trials, run_counting_anomaly, run_lattice_demo, trial_rng, Aggregate,
    ChainOrder, CountingRow, Execution, Scenario, TrialDigest, RNG_ID,
};
use grw_tails::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "grw-tails",
    version,
    about = "GRW collapse and fuzzy-link counting experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// One marble in a superposition of in and out, hit until it settles.
    SingleMarble,
    /// The counting anomaly for n marbles at |a|² (no dynamics).
    Counting,
    /// The counting anomaly under marble hits.
    GbPersistence,
    /// Apparatuses, counter and optional observer measuring n marbles.
    MeasureChain,
    /// Two entangled particles, one of them then measured.
    Aaad,
    /// A two-bump lattice wavefunction, spread and hit.
    LatticeDemo,
    /// Anomaly thresholds over a grid of n, |a|² and p.
    Sweep,
}

#[derive(Args)]
struct Common {
    /// Sectioned configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "INT")]
    trials: Option<u64>,
    /// Number of marbles.
    #[arg(long, global = true, value_name = "INT")]
    n: Option<usize>,
    /// Fuzzy-link threshold.
    #[arg(long, global = true, value_name = "FLOAT")]
    p: Option<f64>,
    /// Initial squared amplitude for "in the box".
    #[arg(long, global = true, value_name = "FLOAT")]
    a2: Option<f64>,
    /// Tail leakage per hit.
    #[arg(long, global = true, value_name = "FLOAT")]
    epsilon: Option<f64>,
    /// Measurement-chain order: individual or collective.
    #[arg(long, global = true, value_parser = parse_order)]
    order: Option<ChainOrder>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_format, default_value = "json")]
    format: Format,
    /// Also write every hit as JSON lines to this file.
    #[arg(long, global = true, value_name = "PATH")]
    events: Option<PathBuf>,
    /// Add an observer to measurement chains.
    #[arg(long, global = true)]
    observer: bool,
}

fn parse_order(s: &str) -> Result<ChainOrder, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::SingleMarble => "single-marble",
            Command::Counting => "counting",
            Command::GbPersistence => "gb-persistence",
            Command::MeasureChain => "measure-chain",
            Command::Aaad => "aaad",
            Command::LatticeDemo => "lattice-demo",
            Command::Sweep => "sweep",
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Validation(_) | Error::Parse(_) => 2,
        Error::Capacity { .. } => 3,
        Error::Io { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> grw_tails::Result<()> {
    let c = &cli.common;
    let overrides = Overrides {
        seed: c.seed,
        trials: c.trials,
        n: c.n,
        p: c.p,
        a_sq: c.a2,
        epsilon: c.epsilon,
        order: c.order,
    };
    let mut cfg = parse_config(c.config.as_deref(), &overrides)?;
    if c.observer {
        cfg.scenario.with_observer = true;
    }
    match cli.command {
        Command::SingleMarble if c.n.is_none() => cfg.scenario.n_marbles = 1,
        Command::Aaad if c.n.is_none() => cfg.scenario.n_marbles = 2,
        _ => {}
    }
    let started = wall_clock();
    let out = c.out.as_deref();

    match cli.command {
        Command::Counting => {
            let report = run_counting_anomaly(&cfg.scenario)?;
            let s = &cfg.scenario;
            let row = CountingRow::from_report(s.n_marbles, s.a_sq, s.fuzzy.p, &report);
            #[derive(Serialize)]
            struct Counting {
                row: CountingRow,
                report: grw_tails::semantics::AnomalyReport,
            }
            let doc = document(cli.command, &cfg, "none", started, Counting { row, report });
            emit_results(&doc, &[row], c.format, out)
        }
        Command::Sweep => {
            let g = &cfg.sweep;
            let rows = anomaly_sweep(&cfg.scenario, &g.n, &g.a_sq, &g.p)?;
            let doc = document(cli.command, &cfg, "none", started, &rows);
            emit_results(&doc, &rows, c.format, out)
        }
        Command::LatticeDemo => {
            let mut rng = trial_rng(cfg.scenario.seed, 0);
            let result = run_lattice_demo(&cfg.lattice, &mut rng)?;
            let doc = document(cli.command, &cfg, RNG_ID, started, &result);
            emit_results(&doc, &result.snapshot, c.format, out)
        }
        Command::SingleMarble | Command::GbPersistence | Command::MeasureChain | Command::Aaad => {
            let scenario: Scenario = cli.command.name().parse()?;
            let want_events = c.events.is_some();
            cfg.scenario.keep_event_log &= want_events;
            let per_trial = map_trials(scenario, &cfg.scenario, Execution::Parallel, |r| {
                let events = if want_events {
                    render_trial_events(&r)
                } else {
                    Ok(Vec::new())
                };
                (TrialDigest::from(&r), events)
            })?;
            let mut digests = Vec::with_capacity(per_trial.len());
            let mut log = Vec::new();
            for (d, events) in per_trial {
                digests.push(d);
                log.extend(events?);
            }
            if let Some(path) = &c.events {
                write_output(Some(path), &log)?;
            }
            let results = MonteCarloResults {
                aggregate: Aggregate::from_digests(&digests),
                trials: digests,
            };
            let rows: Vec<TrialRow> = results.rows();
            let doc = document(cli.command, &cfg, RNG_ID, started, &results);
            emit_results(&doc, &rows, c.format, out)
        }
    }
}

fn document<T>(
    command: Command,
    cfg: &RunConfig,
    rng: &str,
    started: f64,
    results: T,
) -> ResultDocument<T> {
    let manifest = RunManifest::new(command.name(), cfg, rng, started).finish(wall_clock());
    ResultDocument::new(manifest, results)
}
