use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gaugecalc_core::checkers::{self, DEFAULT_BUDGET, DEFAULT_TRIALS, DEFAULT_VERIFY_TOL};
use gaugecalc_core::derivates::{four_derivates, lr_derivative, natural_side, DEFAULT_ALPHA_TOL};
use gaugecalc_core::funcmodel::cantor::DEFAULT_DEPTH_CAP;
use gaugecalc_core::gauges::{self, AttackConfig, DEFAULT_MAX_DEPTH};
use gaugecalc_core::{CheckReport, CheckVerdict, FunctionModel, HGrid, Interval, Verdict};

mod inputs;
mod output;

use output::{Format, Sink};

#[derive(Parser)]
#[command(name = "gaugecalc", version, about = "L^r derivates, gauge partitions and integrability checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// L^r derivative and the four one-sided derivates at each point.
    Derivate(DerivateArgs),
    /// Tables and the divergence sweep for the Cantor-type counterexample.
    #[command(subcommand)]
    Counterexample(CounterexampleCommand),
    /// Build or inspect tagged partitions.
    #[command(subcommand)]
    Partition(PartitionCommand),
    /// Attack the AC_r condition on a tag set.
    AcrCheck(AcrArgs),
    /// Attack classical absolute continuity on a point set.
    AcCheck(AcArgs),
    /// Sample Riemann-type L^r sums of a primitive against a derivative.
    HkrCheck(HkrArgs),
}

#[derive(Subcommand)]
enum CounterexampleCommand {
    /// Exact lengths of levels 0..count as p/q.
    Build(BuildArgs),
    /// Mean-deviation lower bounds at the plateau scales of levels 1..=count.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum PartitionCommand {
    /// A gauge-fine partition of the domain by bisection.
    Cousin(CousinArgs),
    /// Report nonoverlap, fineness, tiling and sums for a partition file.
    Check(CheckArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct DerivateArgs {
    /// Function spec: inline JSON, a file, or `-` for stdin.
    #[arg(long)]
    spec: String,
    /// Comma list, JSON array, `grid:K`, `level:N` or a file.
    #[arg(long)]
    points: String,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Largest scale; without it the grid adapts to each point.
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long, default_value_t = HGrid::DEFAULT_Q)]
    q: f64,
    #[arg(long, default_value_t = HGrid::DEFAULT_COUNT)]
    count: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct BuildArgs {
    /// Number of levels, starting at 0.
    #[arg(long, default_value_t = 6)]
    count: u32,
    #[arg(long, default_value_t = DEFAULT_DEPTH_CAP)]
    depth_cap: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Highest level checked; levels start at 1.
    #[arg(long, default_value_t = 10)]
    count: u32,
    /// Exponents as a comma list.
    #[arg(long, default_value = "1,2")]
    r: String,
    /// Relative slack allowed below the bound.
    #[arg(long, default_value_t = DEFAULT_VERIFY_TOL)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_DEPTH_CAP)]
    depth_cap: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CousinArgs {
    /// A constant, a JSON gauge spec, or a file holding one.
    #[arg(long)]
    gauge: String,
    /// Function spec whose domain is partitioned; [0, 1] without it.
    #[arg(long)]
    spec: Option<String>,
    /// Maximum bisection depth.
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    depth_cap: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CheckArgs {
    /// Partition JSON: inline, a file, or `-` for stdin.
    partition: String,
    #[arg(long)]
    gauge: Option<String>,
    /// Primitive F, then optionally the derivative f.
    #[arg(long, num_args = 1, action = clap::ArgAction::Append)]
    spec: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct AcrArgs {
    #[arg(long)]
    spec: String,
    /// Tag set.
    #[arg(long)]
    points: String,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value = "0.1,0.01,0.001")]
    eta: String,
    /// Gauge ladder; repeat or give a comma list of constants.
    #[arg(long, default_values_t = vec!["0.1,0.01,0.001,0.0001".to_string()])]
    gauge: Vec<String>,
    /// Candidate budget of the adversarial search.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    count: usize,
    #[arg(long, default_value_t = AttackConfig::default().seed)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct AcArgs {
    #[arg(long)]
    spec: String,
    #[arg(long)]
    points: String,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value = "0.1,0.01,0.001")]
    eta: String,
    /// Cap on candidate intervals.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    count: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct HkrArgs {
    /// Primitive F, then the derivative f.
    #[arg(long, num_args = 1, action = clap::ArgAction::Append, required = true)]
    spec: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_values_t = vec!["0.1,0.01,0.001,0.0001".to_string()])]
    gauge: Vec<String>,
    /// Random refinements sampled per gauge.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    count: usize,
    #[arg(long, default_value_t = AttackConfig::default().seed)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

/// Exit status of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Pass,
    Unresolved,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(cli.command));
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Unresolved) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("GAUGECALC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).with_context(|| {
        format!("GAUGECALC_THREADS must be a positive integer, got {raw:?}")
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Derivate(a) => derivate(a),
        Command::Counterexample(CounterexampleCommand::Build(a)) => build(a),
        Command::Counterexample(CounterexampleCommand::Verify(a)) => verify(a),
        Command::Partition(PartitionCommand::Cousin(a)) => cousin(a),
        Command::Partition(PartitionCommand::Check(a)) => check(a),
        Command::AcrCheck(a) => acr(a),
        Command::AcCheck(a) => ac(a),
        Command::HkrCheck(a) => hkr(a),
    }
}

fn derivate(a: DerivateArgs) -> Result<Outcome> {
    let f = inputs::function(&a.spec)?;
    let points = inputs::points(&a.points, &f)?;
    let fixed = a.h0.map(|h0| HGrid::geometric(h0, a.q, a.count)).transpose()?;
    let mut rows = Vec::with_capacity(points.len());
    for &x in &points {
        let grid = match &fixed {
            Some(g) => g.clone(),
            None => HGrid::default_for(&f, x, natural_side(&f, x))?,
        };
        let derivative = lr_derivative(&f, x, a.r, &grid)?;
        let derivates = four_derivates(&f, x, a.r, &grid, DEFAULT_ALPHA_TOL)?;
        rows.push(output::DerivateRow { x, r: a.r, derivative, derivates });
    }
    let all_inconclusive = rows.iter().all(|row| row.derivative.verdict == Verdict::Inconclusive);
    let sink = Sink::new(a.output.out, a.output.format.unwrap_or(Format::Json));
    sink.derivates(&rows)?;
    Ok(if all_inconclusive { Outcome::Unresolved } else { Outcome::Pass })
}

fn build(a: BuildArgs) -> Result<Outcome> {
    if a.count == 0 {
        bail!("--count must be at least 1");
    }
    if a.count - 1 > a.depth_cap {
        bail!("levels 0..{} exceed the depth cap {}", a.count, a.depth_cap);
    }
    let scheme = gaugecalc_core::CantorScheme::standard().with_depth_cap(a.depth_cap);
    let sink = Sink::new(a.output.out, a.output.format.unwrap_or(Format::Csv));
    sink.scheme_table(&scheme, 0..a.count)?;
    Ok(Outcome::Pass)
}

fn verify(a: VerifyArgs) -> Result<Outcome> {
    let rs = inputs::number_list(&a.r)?;
    let report = checkers::counterexample_verify(1..=a.count, &rs, a.epsilon, a.depth_cap)?;
    Sink::new(a.output.out, a.output.format.unwrap_or(Format::Csv)).report(&report)?;
    Ok(verdict_outcome(&report))
}

fn domain_of(spec: Option<&String>) -> Result<Interval> {
    Ok(match spec {
        Some(s) => inputs::function(s)?.domain(),
        None => Interval::new(0.0, 1.0)?,
    })
}

fn cousin(a: CousinArgs) -> Result<Outcome> {
    let gauge = single_gauge(&a.gauge)?;
    let domain = domain_of(a.spec.as_ref())?;
    let p = gauges::cousin_partition(domain, &gauge, a.depth_cap)?;
    Sink::new(a.output.out, a.output.format.unwrap_or(Format::Json)).partition(&p)?;
    Ok(Outcome::Pass)
}

fn single_gauge(arg: &str) -> Result<gaugecalc_core::Gauge> {
    let mut g = inputs::gauges(&[arg.to_string()])?;
    if g.len() != 1 {
        bail!("expected a single gauge, got {}", g.len());
    }
    Ok(g.remove(0))
}

fn check(a: CheckArgs) -> Result<Outcome> {
    if a.spec.len() > 2 {
        bail!("--spec takes F and optionally f");
    }
    let text = inputs::read_text(&a.partition)?;
    let items: Vec<gaugecalc_core::TaggedInterval> =
        serde_json::from_str(&text).context("partition JSON")?;
    let big_f = a.spec.first().map(|s| inputs::function(s)).transpose()?;
    let f = a.spec.get(1).map(|s| inputs::function(s)).transpose()?;
    let domain = match &big_f {
        Some(m) => m.domain(),
        None => Interval::new(0.0, 1.0)?,
    };
    let mut summary = output::PartitionSummary {
        items: items.len(),
        nonoverlap: gauges::items_nonoverlapping(&items),
        tiles: gauges::items_tile(&items, domain),
        domain: [domain.lo(), domain.hi()],
        fine: None,
        riemann_sum: None,
        ac_sum: None,
    };
    if let Some(g) = &a.gauge {
        let g = single_gauge(g)?;
        let mut fine = true;
        for item in &items {
            fine &= item.is_fine(&g)?;
        }
        summary.fine = Some(fine);
    }
    if summary.nonoverlap {
        let p = gaugecalc_core::TaggedPartition::new(items)?;
        if let Some(big_f) = &big_f {
            summary.ac_sum = Some(gauges::ac_sum(&p, big_f, a.r)?);
            if let Some(f) = &f {
                summary.riemann_sum = Some(gauges::riemann_lr_sum(&p, big_f, f, a.r)?);
            }
        }
    }
    let ok = summary.nonoverlap && summary.fine != Some(false);
    Sink::new(a.output.out, a.output.format.unwrap_or(Format::Json)).partition_summary(&summary)?;
    Ok(if ok { Outcome::Pass } else { Outcome::Unresolved })
}

fn acr(a: AcrArgs) -> Result<Outcome> {
    let f = inputs::function(&a.spec)?;
    let tags = inputs::points(&a.points, &f)?;
    let etas = inputs::number_list(&a.eta)?;
    let ladder = inputs::gauges(&a.gauge)?;
    let attack = AttackConfig { budget: a.count, seed: a.seed, ..AttackConfig::default() };
    let report = checkers::acr_check(&f, &tags, a.r, a.epsilon, &etas, &ladder, &attack)?;
    Sink::new(a.output.out, a.output.format.unwrap_or(Format::Json)).report(&report)?;
    Ok(verdict_outcome(&report))
}

fn ac(a: AcArgs) -> Result<Outcome> {
    let f = inputs::function(&a.spec)?;
    let points = inputs::points(&a.points, &f)?;
    let etas = inputs::number_list(&a.eta)?;
    let report = checkers::ac_check(&f, &points, a.epsilon, &etas, a.count)?;
    Sink::new(a.output.out, a.output.format.unwrap_or(Format::Json)).report(&report)?;
    Ok(verdict_outcome(&report))
}

fn hkr(a: HkrArgs) -> Result<Outcome> {
    let [big_f, f] = a.spec.as_slice() else {
        bail!("hkr-check needs --spec F --spec f");
    };
    let big_f: FunctionModel = inputs::function(big_f)?;
    let f = inputs::function(f)?;
    let ladder = inputs::gauges(&a.gauge)?;
    let report = checkers::hkr_check(&big_f, &f, a.r, a.epsilon, &ladder, a.count, a.seed)?;
    Sink::new(a.output.out, a.output.format.unwrap_or(Format::Json)).report(&report)?;
    Ok(verdict_outcome(&report))
}

fn verdict_outcome(report: &CheckReport) -> Outcome {
    match report.verdict {
        CheckVerdict::Certificate => Outcome::Pass,
        _ => Outcome::Unresolved,
    }
}
