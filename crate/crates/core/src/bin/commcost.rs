use std::io;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commcost::campaign::{
    analytic_campaign, compare_mode, run_campaign, AnalyticConfig, CampaignConfig, CampaignError,
    CampaignResult, CompareConfig,
};
use commcost::noise::{q_from_reliability, ChannelKind, LocalModel, NoiseParams};
use commcost::strategy::{bepp_preset, intermediate_presets, mepp_preset, Family};

#[derive(Parser)]
#[command(
    name = "commcost",
    version,
    about = "Communication cost of purified GHZ and cluster states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo runs of strategy strings or presets.
    Simulate(SimulateArgs),
    /// Exact toy-model curves for GHZ states.
    Analytic(AnalyticArgs),
    /// Monte Carlo against the toy-model analytics; fails if any |z| > 4.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum State {
    Ghz,
    Cluster,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Preset {
    Extremal,
    Intermediate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Channel {
    Phase,
    Bit,
    Depol,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Local {
    Depol,
    Toy,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "ghz")]
    state: State,
    /// Number of qubits of the target state.
    #[arg(long)]
    n: usize,
    /// Strategy strings such as M5-S-P1-P2.
    #[arg(long, num_args = 1.., required_unless_present_any = ["preset", "iterated"])]
    strategy: Vec<String>,
    /// Strategies reported after the distribution and after every
    /// purification step.
    #[arg(long, num_args = 1..)]
    iterated: Vec<String>,
    #[arg(long, value_enum, num_args = 1..)]
    preset: Vec<Preset>,
    /// Purification steps of the iterated extremal presets; intermediate
    /// presets use at most 4.
    #[arg(long, default_value_t = 6)]
    steps: usize,
    #[arg(long, value_enum, default_value = "depol")]
    channel: Channel,
    /// Channel retention probability.
    #[arg(long, conflicts_with = "p")]
    q: Option<f64>,
    /// Channel reliability (depolarizing only).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, conflicts_with = "p_local")]
    q_local: Option<f64>,
    #[arg(long)]
    p_local: Option<f64>,
    #[arg(long, value_enum, default_value = "depol")]
    local_model: Local,
    /// Target copies per run.
    #[arg(long, default_value_t = 10_000)]
    ensemble: usize,
    #[arg(long, default_value_t = 4)]
    runs: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Estimate the local noise equivalent of every point.
    #[arg(long)]
    lne: bool,
    /// CSV output; a JSON sidecar is written next to it. Stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long, required_unless_present = "sweep_n")]
    n: Option<usize>,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    q_local: f64,
    #[arg(long, default_value_t = 10)]
    steps: u32,
    /// Range of party numbers, e.g. 5..70.
    #[arg(long, value_parser = parse_range)]
    sweep_n: Option<RangeInclusive<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    q_local: f64,
    #[arg(long, default_value_t = 4)]
    steps: u32,
    #[arg(long, default_value_t = 25_000)]
    ensemble: usize,
    #[arg(long, default_value_t = 4)]
    runs: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: usize = b.parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok(a..=b)
}

fn noise(args: &SimulateArgs) -> Result<NoiseParams, String> {
    let channel = match args.channel {
        Channel::Phase => ChannelKind::PhaseFlip,
        Channel::Bit => ChannelKind::BitFlip,
        Channel::Depol => ChannelKind::Depolarizing,
    };
    let to_q = |q: Option<f64>, p: Option<f64>| -> Result<f64, String> {
        match (q, p) {
            (Some(q), _) => Ok(q),
            (None, Some(p)) => q_from_reliability(p).map_err(|e| e.to_string()),
            (None, None) => Ok(1.0),
        }
    };
    if args.p.is_some() && !matches!(args.channel, Channel::Depol) {
        return Err("--p is the depolarizing reliability; use --q for other channels".into());
    }
    let local = match args.local_model {
        Local::Depol => LocalModel::Uniform(ChannelKind::Depolarizing),
        Local::Toy => LocalModel::Toy,
    };
    NoiseParams::new(
        to_q(args.q, args.p)?,
        channel,
        to_q(args.q_local, args.p_local)?,
        local,
    )
    .map_err(|e| e.to_string())
}

/// Plain and iterated strategy strings.
fn strategies(args: &SimulateArgs) -> (Vec<String>, Vec<String>) {
    let mut plain = args.strategy.clone();
    let mut iterated = args.iterated.clone();
    let toy = args.local_model == Local::Toy;
    for &p in &args.preset {
        match p {
            Preset::Extremal => {
                iterated.push(bepp_preset(args.n, args.steps).to_string());
                iterated.push(mepp_preset(args.n, args.steps, !toy).to_string());
            }
            Preset::Intermediate => plain.extend(
                intermediate_presets(args.n, 4)
                    .iter()
                    .map(|s| s.to_string()),
            ),
        }
    }
    (plain, iterated)
}

fn emit<C: serde::Serialize>(
    result: &CampaignResult<C>,
    out: &Option<PathBuf>,
) -> Result<(), CampaignError> {
    match out {
        Some(path) => result.write(path),
        None => result.write_csv(io::stdout().lock()),
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Simulate(args) => {
            let family = match args.state {
                State::Ghz => Family::Ghz,
                State::Cluster => Family::Cluster,
            };
            let (plain, iterated) = strategies(&args);
            let mut cfg = CampaignConfig::new(family, args.n, plain, noise(&args)?);
            cfg.iterated = iterated;
            cfg.ensemble = args.ensemble;
            cfg.runs = args.runs;
            cfg.seed = args.seed;
            cfg.lne = args.lne;
            let result = run_campaign(&cfg).map_err(|e| e.to_string())?;
            emit(&result, &args.out).map_err(|e| e.to_string())?;
            Ok(true)
        }
        Command::Analytic(args) => {
            let parties = match (&args.sweep_n, args.n) {
                (Some(r), _) => r.clone().collect(),
                (None, Some(n)) => vec![n],
                (None, None) => unreachable!("clap requires --n or --sweep-n"),
            };
            let cfg = AnalyticConfig {
                parties,
                q: args.q,
                q_local: args.q_local,
                steps: args.steps,
            };
            let result = analytic_campaign(&cfg).map_err(|e| e.to_string())?;
            emit(&result, &args.out).map_err(|e| e.to_string())?;
            Ok(true)
        }
        Command::Compare(args) => {
            let cfg = CompareConfig {
                n: args.n,
                q: args.q,
                q_local: args.q_local,
                steps: args.steps,
                ensemble: args.ensemble,
                runs: args.runs,
                seed: args.seed,
            };
            let report = compare_mode(&cfg).map_err(|e| e.to_string())?;
            let written = match &args.out {
                Some(path) => std::fs::File::create(path)
                    .map_err(|e| format!("{}: {e}", path.display()))
                    .and_then(|f| report.write_csv(f).map_err(|e| e.to_string())),
                None => report
                    .write_csv(io::stdout().lock())
                    .map_err(|e| e.to_string()),
            };
            written?;
            eprintln!("max |z| = {:.3}", report.max_abs_z());
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("Monte Carlo and analytic results disagree");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
