//! Command implementations behind the `pinblock` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use pinblock::control::controllable_dim;
use pinblock::hatdecomp::hat_transform;
use pinblock::netmodel::{
    build_pair, fixture_fig2, fixture_fig5, gen_erdos_renyi, gen_static_scale_free,
    parse_edge_list, parse_pins, pick_pins, rng_from_seed, NetworkWithInputs,
};
use pinblock::report::{msf_csv, msf_max_csv, sim_csv, DecomposeReport, SimSummary, Verdict};
use pinblock::sbd::{finest_sbd, BlockClass};
use pinblock::stability::{
    find_gamma_stars, gamma_grid, gamma_sweep, simulate_network, sweep_blocks_hat,
    sweep_blocks_sbd, BlockFilter, Crossing, Direction, GammaStars, MleParams, MsfCurve,
    OscillatorSpec, SimParams, DEFAULT_X0,
};
use pinblock::{Error, ErrorClass, Result, Tolerance};

/// Size and pin count of the scale-free preset.
pub const SF_NODES: usize = 72;
pub const SF_MEAN_DEGREE: f64 = 2.8;
pub const SF_ALPHA: f64 = 2.11;
pub const SF_PINS: usize = 7;

#[derive(Debug, Parser)]
#[command(name = "pinblock", version, about = "Block decomposition and stability of pinning-controlled networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose a network with both routes and compare block sizes.
    Decompose(DecomposeArgs),
    /// Per-block maximum Lyapunov exponents over a coupling sweep.
    Msf(MsfArgs),
    /// Simulate the controlled network at one coupling.
    Simulate(SimulateArgs),
    /// Seeded batches: route agreement on random graphs, or critical
    /// couplings versus the number of pinned nodes.
    Batch(BatchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig2,
    Fig5,
    Sf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// Node coupling through x, pinning through y.
    X,
    /// Node coupling through x and y, pinning through y.
    Xy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Hat,
    Sbd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BlocksArg {
    All,
    DrivenOnly,
    UndrivenOnly,
}

impl From<BlocksArg> for BlockFilter {
    fn from(b: BlocksArg) -> Self {
        match b {
            BlocksArg::All => BlockFilter::All,
            BlocksArg::DrivenOnly => BlockFilter::DrivenOnly,
            BlocksArg::UndrivenOnly => BlockFilter::UndrivenOnly,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Edge list, lines `u v [w]` with 1-based nodes.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Pinned nodes: `1,2,6`, a JSON array, or a file holding either.
    #[arg(long)]
    pub pins: Option<String>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, env = "PINBLOCK_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value_t = Tolerance::default().rank_rel)]
    pub tol_rank: f64,
    #[arg(long, default_value_t = Tolerance::default().zero_abs)]
    pub tol_zero: f64,
    /// Output directory.
    #[arg(long, default_value = "pinblock-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    pub gamma_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub gamma_step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct MsfArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 0.005)]
    pub dt: f64,
    /// Measurement time of each exponent.
    #[arg(long, default_value_t = 2000.0)]
    pub t_span: f64,
    #[arg(long, default_value_t = 200.0)]
    pub t_transient: f64,
    #[arg(long, default_value_t = 20.0)]
    pub t_discard: f64,
    #[arg(long, default_value_t = 1.0)]
    pub renorm: f64,
    #[arg(long, value_enum, default_value_t = BlocksArg::All)]
    pub blocks: BlocksArg,
    #[arg(long, value_enum, default_value_t = Route::Hat)]
    pub route: Route,
    #[arg(long, value_enum)]
    pub coupling: Option<Coupling>,
    /// Also locate the simulated threshold and compare.
    #[arg(long)]
    pub gamma_stars: bool,
    /// Simulation length used for the simulated threshold.
    #[arg(long, default_value_t = SimParams::default().t_span)]
    pub sim_t_span: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.005)]
    pub dt: f64,
    #[arg(long, default_value_t = SimParams::default().t_span)]
    pub t_span: f64,
    #[arg(long, default_value_t = 200.0)]
    pub t_transient: f64,
    /// Half-width of the uniform initial offset from the target.
    #[arg(long, default_value_t = 1.0)]
    pub spread: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub threshold: f64,
    #[arg(long, default_value_t = 1.0)]
    pub record: f64,
    #[arg(long, value_enum)]
    pub coupling: Option<Coupling>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    Routes,
    GammaStars,
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = BatchMode::Routes)]
    pub mode: BatchMode,
    /// Random graphs to draw.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 0.15)]
    pub p: f64,
    /// Pin counts drawn per graph.
    #[arg(long, default_value_t = 5)]
    pub pins_per_graph: usize,
    /// Pin counts for the critical-coupling comparison, e.g. `3,5,7`.
    #[arg(long, default_value = "7")]
    pub s_list: String,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 0.005)]
    pub dt: f64,
    /// Measurement time of each exponent.
    #[arg(long, default_value_t = 2000.0)]
    pub t_span: f64,
    #[arg(long, default_value_t = SimParams::default().t_span)]
    pub sim_t_span: f64,
    #[arg(long, value_enum)]
    pub coupling: Option<Coupling>,
}

/// Fully resolved settings of a run, embedded in every summary. The output
/// directory is left out so that summaries of identical runs compare equal
/// wherever they are written.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "is_zero")]
    pub n: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pins: Vec<usize>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    pub tolerance: Tolerance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oscillator: Option<OscillatorSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gammas: Option<GridConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mle: Option<MleParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlockFilter>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<Route>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch: Option<BatchConfig>,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

#[derive(Debug, Clone, Serialize)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchConfig {
    pub mode: BatchMode,
    pub trials: usize,
    pub n: usize,
    pub p: f64,
    pub pins_per_graph: usize,
    pub s_list: Vec<usize>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Validation | ErrorClass::Io => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Invariant => 4,
    }
}

fn tolerance(c: &CommonArgs) -> Result<Tolerance> {
    let tol = Tolerance {
        rank_rel: c.tol_rank,
        zero_abs: c.tol_zero,
        ..Tolerance::default()
    };
    tol.validate()?;
    Ok(tol)
}

fn read_pins(spec: &str) -> Result<Vec<usize>> {
    let path = Path::new(spec);
    let text = if path.is_file() {
        fs::read_to_string(path)?
    } else {
        spec.to_string()
    };
    let pins = parse_pins(&text)?;
    if pins.is_empty() {
        return Err(Error::InvalidParameter("pin set is empty".into()));
    }
    Ok(pins)
}

/// Network named by `--edges`/`--pins` or by a preset. Explicit pins
/// override a preset's pins.
pub fn resolve_network(c: &CommonArgs) -> Result<NetworkWithInputs> {
    let net = match (&c.edges, c.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)?;
            let net = parse_edge_list(&text, None)?;
            let Some(pins) = &c.pins else {
                return Err(Error::InvalidParameter("--edges requires --pins".into()));
            };
            return net.with_pins(&read_pins(pins)?);
        }
        (None, Some(Preset::Fig2)) => fixture_fig2(),
        (None, Some(Preset::Fig5)) => fixture_fig5(),
        (None, Some(Preset::Sf)) => {
            let net = gen_static_scale_free(SF_NODES, SF_MEAN_DEGREE, SF_ALPHA, c.seed)?;
            pick_pins(&net, SF_PINS, c.seed)?
        }
        (None, None) => {
            return Err(Error::InvalidParameter("give --edges with --pins, or --preset".into()));
        }
    };
    match &c.pins {
        Some(p) => net.with_pins(&read_pins(p)?),
        None => Ok(net),
    }
}

fn oscillator(c: &CommonArgs, coupling: Option<Coupling>) -> OscillatorSpec {
    let coupling = coupling.unwrap_or(if c.preset == Some(Preset::Sf) { Coupling::Xy } else { Coupling::X });
    match coupling {
        Coupling::X => OscillatorSpec::rossler_x_coupling(),
        Coupling::Xy => OscillatorSpec::rossler_xy_coupling(),
    }
}

fn base_config(command: &str, c: &CommonArgs, net: Option<&NetworkWithInputs>, tol: Tolerance) -> RunConfig {
    RunConfig {
        command: command.into(),
        edges: c.edges.as_ref().map(|p| p.display().to_string()),
        preset: c.preset,
        n: net.map_or(0, |n| n.n),
        pins: net.map_or_else(Vec::new, |n| n.pinned.iter().map(|i| i + 1).collect()),
        seed: c.seed,
        jobs: c.jobs,
        tolerance: tol,
        oscillator: None,
        gammas: None,
        mle: None,
        sim: None,
        blocks: None,
        route: None,
        batch: None,
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(0) => Err(Error::InvalidParameter("--jobs must be at least 1".into())),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .install(f),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvariantViolation(e.to_string()))?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

#[derive(Clone, Serialize)]
struct Phase {
    name: &'static str,
    seconds: f64,
}

#[derive(Serialize)]
struct Timings<'a> {
    command: &'a str,
    phases: Vec<Phase>,
    total_seconds: f64,
}

struct Clock {
    start: Instant,
    last: Instant,
    phases: Vec<Phase>,
}

impl Clock {
    fn new() -> Self {
        let now = Instant::now();
        Self {
            start: now,
            last: now,
            phases: Vec::new(),
        }
    }

    fn lap(&mut self, name: &'static str) {
        let now = Instant::now();
        self.phases.push(Phase {
            name,
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }

    fn write(&self, out: &Path, command: &str) -> Result<()> {
        write_json(
            &out.join("timings.json"),
            &Timings {
                command,
                phases: self.phases.clone(),
                total_seconds: self.start.elapsed().as_secs_f64(),
            },
        )
    }
}

#[derive(Serialize)]
struct DecomposeSummary<'a> {
    config: &'a RunConfig,
    report: &'a DecomposeReport,
}

pub fn cmd_decompose(args: &DecomposeArgs) -> Result<()> {
    let c = &args.common;
    let tol = tolerance(c)?;
    let net = resolve_network(c)?;
    let config = base_config("decompose", c, Some(&net), tol);
    let mut clock = Clock::new();
    let report = with_pool(c.jobs, || {
        let pair = build_pair(&net)?;
        let dec = finest_sbd(&pair, c.seed, &tol)?;
        let rep = hat_transform(&pair, &tol)?;
        let cdim = controllable_dim(&pair.l, &pair.r, &tol)?;
        Ok(DecomposeReport::new(&net.pinned, cdim, &dec, &rep))
    })?;
    clock.lap("decompose");
    fs::create_dir_all(&c.out)?;
    write_json(&c.out.join("summary.json"), &DecomposeSummary { config: &config, report: &report })?;
    clock.write(&c.out, "decompose")?;
    if report.verdict == Verdict::Mismatch {
        return Err(Error::InvariantViolation(format!(
            "block sizes differ: sbd {:?}, hat {:?}",
            report.sbd.size_multiset, report.hat.size_multiset
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockSummary {
    pub block_id: usize,
    pub class: BlockClass,
    pub kind: pinblock::sbd::BlockKind,
    pub size: usize,
    pub crossings: Vec<Crossing>,
}

#[derive(Serialize)]
struct MsfSummary<'a> {
    config: &'a RunConfig,
    blocks: Vec<BlockSummary>,
    crossings: &'a [Crossing],
    lower_crossing: Option<f64>,
    upper_crossing: Option<f64>,
    gamma_star_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_stars: Option<&'a GammaStars>,
}

fn block_summaries(curve: &MsfCurve) -> Vec<BlockSummary> {
    curve
        .blocks
        .iter()
        .map(|b| BlockSummary {
            block_id: b.id + 1,
            class: b.class,
            kind: b.kind,
            size: b.size,
            crossings: b.crossings.clone(),
        })
        .collect()
}

/// Sweep blocks of the chosen route.
fn route_blocks(
    net: &NetworkWithInputs,
    route: Route,
    filter: BlockFilter,
    seed: u64,
    tol: &Tolerance,
) -> Result<Vec<pinblock::stability::SweepBlock>> {
    let pair = build_pair(net)?;
    Ok(match route {
        Route::Hat => sweep_blocks_hat(&hat_transform(&pair, tol)?, filter),
        Route::Sbd => sweep_blocks_sbd(&finest_sbd(&pair, seed, tol)?, filter),
    })
}

pub fn cmd_msf(args: &MsfArgs) -> Result<()> {
    let c = &args.common;
    let tol = tolerance(c)?;
    let net = resolve_network(c)?;
    let osc = oscillator(c, args.coupling);
    let gammas = gamma_grid(args.grid.gamma_min, args.grid.gamma_max, args.grid.gamma_step)?;
    let mle = MleParams {
        dt: args.dt,
        t_transient: args.t_transient,
        t_measure: args.t_span,
        renorm_interval: args.renorm,
        t_discard: args.t_discard,
        seed: c.seed,
    };
    mle.validate()?;
    let sim = SimParams {
        dt: args.dt,
        t_span: args.sim_t_span,
        seed: c.seed,
        ..SimParams::default()
    };
    let filter = BlockFilter::from(args.blocks);
    let mut config = base_config("msf", c, Some(&net), tol);
    config.oscillator = Some(osc.clone());
    config.gammas = Some(GridConfig {
        min: args.grid.gamma_min,
        max: args.grid.gamma_max,
        step: args.grid.gamma_step,
    });
    config.mle = Some(mle.clone());
    config.blocks = Some(filter);
    config.route = Some(args.route);
    if args.gamma_stars {
        sim.validate()?;
        config.sim = Some(sim.clone());
    }
    let mut clock = Clock::new();
    let (curve, stars) = with_pool(c.jobs, || {
        let blocks = route_blocks(&net, args.route, filter, c.seed, &tol)?;
        let traj = mle.target(&osc, &DEFAULT_X0)?;
        let curve = gamma_sweep(&blocks, &osc, &gammas, &traj, &mle)?;
        let stars = if args.gamma_stars {
            Some(find_gamma_stars(&net, &osc, &curve, &DEFAULT_X0, &sim)?)
        } else {
            None
        };
        Ok((curve, stars))
    })?;
    clock.lap("sweep");
    let first = |d: Direction| curve.crossings.iter().find(|x| x.direction == d).map(|x| x.gamma);
    let gamma_star_2 = curve
        .largest_driven()
        .and_then(|k| pinblock::stability::first_down(&curve.blocks[k].crossings));
    fs::create_dir_all(&c.out)?;
    fs::write(c.out.join("msf.csv"), msf_csv(&curve))?;
    fs::write(c.out.join("msf_max.csv"), msf_max_csv(&curve))?;
    write_json(
        &c.out.join("summary.json"),
        &MsfSummary {
            config: &config,
            blocks: block_summaries(&curve),
            crossings: &curve.crossings,
            lower_crossing: first(Direction::Down),
            upper_crossing: first(Direction::Up),
            gamma_star_2,
            gamma_stars: stars.as_ref(),
        },
    )?;
    clock.write(&c.out, "msf")?;
    Ok(())
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    config: &'a RunConfig,
    result: SimSummary,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let c = &args.common;
    let tol = tolerance(c)?;
    let net = resolve_network(c)?;
    let osc = oscillator(c, args.coupling);
    let sim = SimParams {
        dt: args.dt,
        t_span: args.t_span,
        t_transient: args.t_transient,
        spread: args.spread,
        threshold: args.threshold,
        record_interval: args.record,
        seed: c.seed,
    };
    sim.validate()?;
    let mut config = base_config("simulate", c, Some(&net), tol);
    config.oscillator = Some(osc.clone());
    config.sim = Some(sim.clone());
    let mut clock = Clock::new();
    let out = simulate_network(&net, &osc, args.gamma, &DEFAULT_X0, &sim)?;
    clock.lap("simulate");
    fs::create_dir_all(&c.out)?;
    fs::write(c.out.join("errors.csv"), sim_csv(&out))?;
    write_json(
        &c.out.join("summary.json"),
        &SimulateSummary {
            config: &config,
            result: SimSummary::new(&out),
        },
    )?;
    clock.write(&c.out, "simulate")?;
    Ok(())
}

/// Outcome of one random-graph trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub graph: usize,
    pub graph_seed: u64,
    pub s: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sbd_sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hat_sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controllable_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Pin counts for graph `graph`, drawn from `1..n`.
pub fn trial_pin_counts(graph_seed: u64, n: usize, count: usize) -> Vec<usize> {
    use rand::Rng;
    let mut rng = rng_from_seed(graph_seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..count).map(|_| rng.random_range(1..n.max(2))).collect()
}

/// Seeded ER graph with `s` pins used by one batch trial.
pub fn trial_network(graph_seed: u64, s: usize, n: usize, p: f64) -> Result<NetworkWithInputs> {
    let net = gen_erdos_renyi(n, p, graph_seed)?;
    pick_pins(&net, s, graph_seed.wrapping_mul(31).wrapping_add(s as u64))
}

/// Both routes on one seeded ER graph with `s` pins.
pub fn run_trial(graph: usize, graph_seed: u64, s: usize, n: usize, p: f64, tol: &Tolerance) -> TrialResult {
    let mut out = TrialResult {
        graph,
        graph_seed,
        s,
        n,
        sbd_sizes: None,
        hat_sizes: None,
        controllable_dim: None,
        verdict: None,
        error: None,
    };
    let body = || -> Result<(Vec<usize>, Vec<usize>, usize)> {
        let pair = build_pair(&trial_network(graph_seed, s, n, p)?)?;
        let dec = finest_sbd(&pair, graph_seed, tol)?;
        let rep = hat_transform(&pair, tol)?;
        let c = controllable_dim(&pair.l, &pair.r, tol)?;
        if dec.driven_size() != c {
            return Err(Error::RankMismatch {
                driven: dec.driven_size(),
                controllable: c,
            });
        }
        Ok((dec.size_multiset(), rep.size_multiset(), c))
    };
    match body() {
        Ok((a, b, c)) => {
            out.verdict = Some(if a == b { Verdict::Match } else { Verdict::Mismatch });
            out.sbd_sizes = Some(a);
            out.hat_sizes = Some(b);
            out.controllable_dim = Some(c);
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

#[derive(Serialize)]
struct RoutesSummary<'a> {
    config: &'a RunConfig,
    trials: usize,
    matched: usize,
    mismatched: usize,
    failed: usize,
    match_rate: Option<f64>,
    results: &'a [TrialResult],
}

#[derive(Debug, Clone, Serialize)]
pub struct StarRow {
    pub s: usize,
    pub gamma_star_1: Option<f64>,
    pub gamma_star_2: Option<f64>,
    pub difference: Option<f64>,
    pub largest_block_class: Option<BlockClass>,
    pub largest_block_size: usize,
    pub diagnostics: Vec<String>,
}

#[derive(Serialize)]
struct StarsSummary<'a> {
    config: &'a RunConfig,
    rows: &'a [StarRow],
}

fn parse_s_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .ok()
                .filter(|&s| s >= 1)
                .ok_or_else(|| Error::InvalidParameter(format!("bad pin count `{t}`")))
        })
        .collect()
}

pub fn cmd_batch(args: &BatchArgs) -> Result<()> {
    let c = &args.common;
    let tol = tolerance(c)?;
    let s_list = parse_s_list(&args.s_list)?;
    let mut config = base_config("batch", c, None, tol);
    config.batch = Some(BatchConfig {
        mode: args.mode,
        trials: args.trials,
        n: args.n,
        p: args.p,
        pins_per_graph: args.pins_per_graph,
        s_list: s_list.clone(),
    });
    let mut clock = Clock::new();
    match args.mode {
        BatchMode::Routes => {
            if args.n < 2 || !(0.0..=1.0).contains(&args.p) {
                return Err(Error::InvalidParameter("need n >= 2 and 0 <= p <= 1".into()));
            }
            let tasks: Vec<(usize, u64, usize)> = (0..args.trials)
                .flat_map(|g| {
                    let gs = c.seed.wrapping_add(g as u64);
                    trial_pin_counts(gs, args.n, args.pins_per_graph)
                        .into_iter()
                        .map(move |s| (g, gs, s))
                })
                .collect();
            let results: Vec<TrialResult> = with_pool(c.jobs, || {
                Ok(tasks
                    .par_iter()
                    .map(|&(g, gs, s)| run_trial(g, gs, s, args.n, args.p, &tol))
                    .collect())
            })?;
            clock.lap("trials");
            let matched = results.iter().filter(|r| r.verdict == Some(Verdict::Match)).count();
            let mismatched = results.iter().filter(|r| r.verdict == Some(Verdict::Mismatch)).count();
            let failed = results.iter().filter(|r| r.error.is_some()).count();
            let decided = matched + mismatched;
            fs::create_dir_all(&c.out)?;
            write_json(
                &c.out.join("summary.json"),
                &RoutesSummary {
                    config: &config,
                    trials: results.len(),
                    matched,
                    mismatched,
                    failed,
                    match_rate: (decided > 0).then(|| matched as f64 / decided as f64),
                    results: &results,
                },
            )?;
            clock.write(&c.out, "batch")?;
            if mismatched > 0 {
                return Err(Error::InvariantViolation(format!(
                    "{mismatched} of {decided} trials have different block sizes"
                )));
            }
        }
        BatchMode::GammaStars => {
            let base = resolve_network(&CommonArgs {
                preset: c.preset.or(Some(Preset::Sf)),
                pins: None,
                ..c.clone()
            })?;
            let osc = oscillator(
                &CommonArgs {
                    preset: c.preset.or(Some(Preset::Sf)),
                    ..c.clone()
                },
                args.coupling,
            );
            let gammas = gamma_grid(args.grid.gamma_min, args.grid.gamma_max, args.grid.gamma_step)?;
            let mle = MleParams {
                dt: args.dt,
                t_measure: args.t_span,
                seed: c.seed,
                ..MleParams::default()
            };
            mle.validate()?;
            let sim = SimParams {
                dt: args.dt,
                t_span: args.sim_t_span,
                seed: c.seed,
                ..SimParams::default()
            };
            sim.validate()?;
            config.n = base.n;
            config.oscillator = Some(osc.clone());
            config.gammas = Some(GridConfig {
                min: args.grid.gamma_min,
                max: args.grid.gamma_max,
                step: args.grid.gamma_step,
            });
            config.mle = Some(mle.clone());
            config.sim = Some(sim.clone());
            let rows = with_pool(c.jobs, || {
                let traj = mle.target(&osc, &DEFAULT_X0)?;
                s_list
                    .iter()
                    .map(|&s| {
                        let net = pick_pins(&base, s, c.seed)?;
                        let blocks = route_blocks(&net, Route::Hat, BlockFilter::All, c.seed, &tol)?;
                        let curve = gamma_sweep(&blocks, &osc, &gammas, &traj, &mle)?;
                        let st = find_gamma_stars(&net, &osc, &curve, &DEFAULT_X0, &sim)?;
                        Ok(StarRow {
                            s,
                            gamma_star_1: st.gamma_star_1,
                            gamma_star_2: st.gamma_star_2,
                            difference: st.gamma_star_1.zip(st.gamma_star_2).map(|(a, b)| a - b),
                            largest_block_class: st.largest_block_class,
                            largest_block_size: st.largest_block_size,
                            diagnostics: st.diagnostics,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            clock.lap("gamma-stars");
            fs::create_dir_all(&c.out)?;
            let mut csv = String::from("s,gamma_star_1,gamma_star_2\n");
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            for r in &rows {
                csv += &format!("{},{},{}\n", r.s, opt(r.gamma_star_1), opt(r.gamma_star_2));
            }
            fs::write(c.out.join("gamma_stars.csv"), csv)?;
            write_json(&c.out.join("summary.json"), &StarsSummary { config: &config, rows: &rows })?;
            clock.write(&c.out, "batch")?;
        }
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Msf(a) => cmd_msf(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Batch(a) => cmd_batch(a),
    }
}
