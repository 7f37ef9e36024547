//! Seeded Monte Carlo batches: game trials and the validators for the
//! geometric and occupancy claims, each summarized with pass/fail gates.
//!
//! Unit `k` of a batch (trial, run or outer sample) draws all its
//! randomness from `rng::substream(master_seed, k)`. Batches may run on a
//! worker pool, but results are collected in unit order, so the output
//! does not depend on the number of threads.

mod output;
pub mod stats;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{self, GameConfig, StrategyKind, TrialResult};
use crate::occupancy;
use crate::rng;
use crate::torus::{nearest_other_site_distance, GridIndex};
use crate::voronoi::{self, build_voronoi, largest_cell};

pub use output::{summary_json, write_records, write_report, write_sweep, OutputFormat};
pub use stats::{binomial_se, summarize, SummaryStats};

/// Threshold on `f(p)` in the center validator.
pub const CENTER_THRESHOLD: f64 = 1.0 / 15.0;
/// Exploratory threshold, reported without a gate.
pub const CENTER_EXPLORATORY_THRESHOLD: f64 = 1.0 / 6.0;
/// `γ` of the large-cell count, instantiated from `ξ ≥ log n / (120 n)`.
pub const LARGE_CELL_GAMMA: f64 = 1.0 / 120.0;
/// Window for `prophet_area · n / log n`.
pub const PROPHET_WINDOW: (f64, f64) = (1.0 / 120.0, 12.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Game,
    BiggestCell,
    ManyLarge,
    Center,
    BallsBins,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "game" => Ok(Self::Game),
            "biggest-cell" => Ok(Self::BiggestCell),
            "many-large" => Ok(Self::ManyLarge),
            "center" => Ok(Self::Center),
            "balls-bins" => Ok(Self::BallsBins),
            other => Err(Error::InvalidArgument(format!("unknown experiment kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    /// Trials, runs, or outer samples for `center`.
    pub trials: usize,
    pub c: f64,
    pub beta: f64,
    pub c_lemma: f64,
    pub master_seed: u64,
    pub inner_samples: u64,
    pub strategy: StrategyKind,
    pub output: OutputFormat,
    /// Worker count; 0 picks the pool default. Never affects results.
    #[serde(skip)]
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, n: usize, trials: usize) -> Self {
        Self {
            kind,
            n,
            trials,
            c: game::DEFAULT_SUFFIX_CONSTANT,
            beta: 4.0,
            c_lemma: 3.0,
            master_seed: 0,
            inner_samples: 10_000,
            strategy: StrategyKind::WaitThenTrigger,
            output: OutputFormat::Json,
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        let need_n = |min: usize| {
            if self.n < min {
                Err(Error::InvalidArgument(format!("n must be at least {min} for {:?}", self.kind)))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ExperimentKind::Game => {
                need_n(1)?;
                if !(self.c > 0.0) {
                    return Err(Error::InvalidArgument("c must be positive".into()));
                }
            }
            ExperimentKind::BiggestCell => need_n(2)?,
            ExperimentKind::ManyLarge => need_n(32)?,
            ExperimentKind::BallsBins => need_n(1)?,
            ExperimentKind::Center => {
                if self.inner_samples < 1 {
                    return Err(Error::InvalidArgument("inner samples must be at least 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// A named pass/fail check: `value` compared against `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Gate {
    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value >= threshold }
    }

    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiggestCellRecord {
    pub trial: usize,
    pub seed: u64,
    pub max_area: f64,
    pub normalized: f64,
    pub exceeds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManyLargeRecord {
    pub trial: usize,
    pub seed: u64,
    pub fat_sites: usize,
    pub large_cells: usize,
    pub fat_in_suffix: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterRecord {
    pub sample: usize,
    pub x: f64,
    pub y: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallsBinsRecord {
    pub run: usize,
    pub seed: u64,
    pub n: u64,
    pub m: u64,
    pub empty_bins: u64,
    pub singleton_bins: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Records {
    Game(Vec<TrialResult>),
    BiggestCell(Vec<BiggestCellRecord>),
    ManyLarge(Vec<ManyLargeRecord>),
    Center(Vec<CenterRecord>),
    BallsBins(Vec<BallsBinsRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Game(v) => v.len(),
            Records::BiggestCell(v) => v.len(),
            Records::ManyLarge(v) => v.len(),
            Records::Center(v) => v.len(),
            Records::BallsBins(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub stats: BTreeMap<String, SummaryStats>,
    pub metrics: BTreeMap<String, f64>,
    pub gates: Vec<Gate>,
    pub records: Records,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }
}

/// Runs `unit(k)` for `k = 0..count` on a pool of `threads` workers
/// (0 = default) and returns the results in index order.
pub fn run_indexed<T, F>(count: usize, threads: usize, unit: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&unit).collect())
}

fn unit_seed(master_seed: u64, k: usize) -> u64 {
    rng::substream_seed(master_seed, k as u64)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    match config.kind {
        ExperimentKind::Game => game_experiment(config),
        ExperimentKind::BiggestCell => biggest_cell_experiment(config),
        ExperimentKind::ManyLarge => many_large_experiment(config),
        ExperimentKind::Center => center_experiment(config),
        ExperimentKind::BallsBins => balls_bins_experiment(config),
    }
}

fn stat(stats: &mut BTreeMap<String, SummaryStats>, name: &str, values: impl Iterator<Item = f64>) -> Result<()> {
    let v: Vec<f64> = values.collect();
    stats.insert(name.into(), summarize(&v)?);
    Ok(())
}

fn fraction<T>(items: &[T], pred: impl Fn(&T) -> bool) -> f64 {
    if items.is_empty() {
        return f64::NAN;
    }
    items.iter().filter(|t| pred(t)).count() as f64 / items.len() as f64
}

pub fn run_game_batch(
    n: usize,
    trials: usize,
    c: f64,
    strategy: StrategyKind,
    master_seed: u64,
    threads: usize,
) -> Result<Vec<TrialResult>> {
    run_indexed(trials, threads, |k| {
        game::run_trial_with(&GameConfig { n, c, seed: unit_seed(master_seed, k) }, strategy)
    })
}

/// Failure threshold `½ log²n / √n` for the wait-then-trigger strategy.
pub fn failure_threshold(n: usize) -> f64 {
    let nf = n as f64;
    0.5 * nf.ln().powi(2) / nf.sqrt()
}

/// Statistics and gates over a finished batch of game trials.
pub fn summarize_game(
    n: usize,
    c: f64,
    strategy: StrategyKind,
    trials: &[TrialResult],
) -> Result<(BTreeMap<String, SummaryStats>, BTreeMap<String, f64>, Vec<Gate>)> {
    let mut stats = BTreeMap::new();
    stat(&mut stats, "player_area", trials.iter().map(|t| t.player_area))?;
    stat(&mut stats, "prophet_area", trials.iter().map(|t| t.prophet_area))?;
    stat(&mut stats, "ratio", trials.iter().map(TrialResult::ratio))?;
    stat(&mut stats, "chosen_index", trials.iter().map(|t| t.chosen_index as f64))?;
    stat(&mut stats, "disk_hits", trials.iter().map(|t| t.disk_hits as f64))?;
    if n >= 2 {
        stat(&mut stats, "normalized_prophet", trials.iter().map(TrialResult::normalized_prophet))?;
    }

    let mean_player = stats["player_area"].mean;
    let mean_prophet = stats["prophet_area"].mean;
    let mut metrics = BTreeMap::new();
    metrics.insert("suffix_length".into(), game::suffix_length(n, c) as f64);
    metrics.insert("trigger_radius".into(), trials[0].trigger_radius);
    metrics.insert("triggered_fraction".into(), fraction(trials, |t| t.triggered));
    metrics.insert("not_triggered_frequency".into(), fraction(trials, |t| !t.triggered));
    metrics.insert("disk_hit_frequency".into(), fraction(trials, |t| t.disk_hits > 0));
    metrics.insert("two_hit_frequency".into(), fraction(trials, |t| t.disk_hits >= 2));
    metrics.insert("failure_frequency".into(), fraction(trials, TrialResult::failed));
    metrics.insert("mean_prophet_over_mean_player".into(), mean_prophet / mean_player);
    metrics.insert("prophet_over_mean_area".into(), mean_prophet * n as f64);

    let mut gates = Vec::new();
    if strategy == StrategyKind::WaitThenTrigger {
        gates.push(Gate::at_least("triggered_fraction", metrics["triggered_fraction"], 0.99));
        let radius = trials[0].trigger_radius;
        let quarter = std::f64::consts::PI * (radius / 2.0).powi(2);
        let clean: Vec<&TrialResult> = trials.iter().filter(|t| t.triggered && t.disk_hits == 0).collect();
        if !clean.is_empty() {
            gates.push(Gate::at_least(
                "quarter_disk_payoff",
                fraction(&clean, |t| t.player_area >= quarter - 1e-9),
                1.0,
            ));
        }
        gates.push(Gate::at_most("failure_frequency", metrics["failure_frequency"], failure_threshold(n)));
    }
    gates.push(Gate::at_least("player_le_prophet", fraction(trials, |t| t.player_area <= t.prophet_area), 1.0));
    if n >= 2 {
        let (lo, hi) = PROPHET_WINDOW;
        gates.push(Gate::at_least(
            "prophet_window",
            fraction(trials, |t| (lo..=hi).contains(&t.normalized_prophet())),
            0.99,
        ));
    }
    gates.push(Gate::at_most("median_ratio", stats["ratio"].median, 50.0));
    Ok((stats, metrics, gates))
}

fn game_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let trials =
        run_game_batch(config.n, config.trials, config.c, config.strategy, config.master_seed, config.threads)?;
    let (stats, metrics, gates) = summarize_game(config.n, config.c, config.strategy, &trials)?;
    Ok(ExperimentReport { config: config.clone(), stats, metrics, gates, records: Records::Game(trials) })
}

/// Outcome of the largest-cell tail check.
#[derive(Debug, Clone)]
pub struct BiggestCellOutcome {
    pub records: Vec<BiggestCellRecord>,
    pub threshold_area: f64,
    pub tail_frequency: f64,
    pub exceedances: usize,
    /// `n^{4−2c}`; at least 1 when `c ≤ 2`, where the check is vacuous.
    pub bound: f64,
    pub allowed: f64,
}

impl BiggestCellOutcome {
    pub fn vacuous(&self) -> bool {
        self.bound >= 1.0
    }
}

pub fn validate_biggest_cell(n: usize, trials: usize, c_lemma: f64, master_seed: u64, threads: usize) -> Result<BiggestCellOutcome> {
    if n < 2 {
        return Err(Error::InvalidArgument("largest-cell check needs n ≥ 2".into()));
    }
    let ln = (n as f64).ln();
    let threshold_area = 4.0 * c_lemma * ln / n as f64;
    let records = run_indexed(trials, threads, |k| {
        let seed = unit_seed(master_seed, k);
        let mut r = rng::from_seed(seed);
        let points = game::generate_points(n, &mut r);
        let (_, max_area) = largest_cell(&build_voronoi(&points)?);
        Ok(BiggestCellRecord {
            trial: k,
            seed,
            max_area,
            normalized: max_area * n as f64 / ln,
            exceeds: max_area >= threshold_area,
        })
    })?;
    let exceedances = records.iter().filter(|r| r.exceeds).count();
    let bound = (n as f64).powf(4.0 - 2.0 * c_lemma);
    let t = trials as f64;
    let b = bound.min(1.0);
    let allowed = (t * b + 3.0 * (t * b * (1.0 - b)).sqrt()).max(1.0);
    Ok(BiggestCellOutcome { tail_frequency: exceedances as f64 / t, records, threshold_area, exceedances, bound, allowed })
}

fn biggest_cell_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let out = validate_biggest_cell(config.n, config.trials, config.c_lemma, config.master_seed, config.threads)?;
    let mut stats = BTreeMap::new();
    stat(&mut stats, "max_area", out.records.iter().map(|r| r.max_area))?;
    stat(&mut stats, "normalized", out.records.iter().map(|r| r.normalized))?;
    let mut metrics = BTreeMap::new();
    metrics.insert("threshold_area".into(), out.threshold_area);
    metrics.insert("tail_frequency".into(), out.tail_frequency);
    metrics.insert("bound".into(), out.bound);
    metrics.insert("vacuous".into(), if out.vacuous() { 1.0 } else { 0.0 });
    let mut gates = Vec::new();
    if out.vacuous() {
        log_warning(&format!("c_lemma = {} makes the tail bound vacuous; reporting frequency only", config.c_lemma));
    } else {
        gates.push(Gate::at_most("tail_exceedances", out.exceedances as f64, out.allowed));
    }
    Ok(ExperimentReport { config: config.clone(), stats, metrics, gates, records: Records::BiggestCell(out.records) })
}

fn log_warning(msg: &str) {
    eprintln!("warning: {msg}");
}

#[derive(Debug, Clone)]
pub struct ManyLargeOutcome {
    pub records: Vec<ManyLargeRecord>,
    pub radius: f64,
    pub area_threshold: f64,
    /// `⌈√n / 30⌉`.
    pub required: usize,
    pub suffix: usize,
}

pub fn validate_many_large(n: usize, trials: usize, c: f64, master_seed: u64, threads: usize) -> Result<ManyLargeOutcome> {
    if n < 32 {
        return Err(Error::NTooSmall(n as u64));
    }
    let radius = game::trigger_radius(n)?;
    let area_threshold = LARGE_CELL_GAMMA * (n as f64).ln() / n as f64;
    let suffix = game::suffix_length(n, c);
    let records = run_indexed(trials, threads, |k| {
        let seed = unit_seed(master_seed, k);
        let mut r = rng::from_seed(seed);
        let points = game::generate_points(n, &mut r);
        let index = GridIndex::with_default_resolution(&points);
        let mut fat_sites = 0;
        let mut fat_in_suffix = 0;
        for i in 0..n {
            if nearest_other_site_distance(i, &points, &index)? >= radius {
                fat_sites += 1;
                if i >= n - suffix {
                    fat_in_suffix += 1;
                }
            }
        }
        let diagram = build_voronoi(&points)?;
        let large_cells = diagram.cells.iter().filter(|c| c.area >= area_threshold).count();
        Ok(ManyLargeRecord { trial: k, seed, fat_sites, large_cells, fat_in_suffix })
    })?;
    let required = ((n as f64).sqrt() / 30.0).ceil() as usize;
    Ok(ManyLargeOutcome { records, radius, area_threshold, required, suffix })
}

fn many_large_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let out = validate_many_large(config.n, config.trials, config.c, config.master_seed, config.threads)?;
    let n = config.n as f64;
    let mut stats = BTreeMap::new();
    stat(&mut stats, "fat_sites", out.records.iter().map(|r| r.fat_sites as f64))?;
    stat(&mut stats, "large_cells", out.records.iter().map(|r| r.large_cells as f64))?;
    stat(&mut stats, "fat_in_suffix", out.records.iter().map(|r| r.fat_in_suffix as f64))?;
    // expected fat sites in the suffix, U·f/n
    stat(&mut stats, "expected_fat_in_suffix", out.records.iter().map(|r| r.fat_sites as f64 * out.suffix as f64 / n))?;
    let mut metrics = BTreeMap::new();
    metrics.insert("radius".into(), out.radius);
    metrics.insert("area_threshold".into(), out.area_threshold);
    metrics.insert("required".into(), out.required as f64);
    metrics.insert("suffix_length".into(), out.suffix as f64);
    metrics.insert("no_fat_in_suffix_frequency".into(), fraction(&out.records, |r| r.fat_in_suffix == 0));
    let gates = vec![
        Gate::at_least("fat_sites_fraction", fraction(&out.records, |r| r.fat_sites >= out.required), 0.95),
        Gate::at_least("large_cells_fraction", fraction(&out.records, |r| r.large_cells >= out.required), 0.95),
    ];
    Ok(ExperimentReport { config: config.clone(), stats, metrics, gates, records: Records::ManyLarge(out.records) })
}

#[derive(Debug, Clone)]
pub struct CenterOutcome {
    pub records: Vec<CenterRecord>,
    /// Fraction of outer samples with `f(p) ≥ 1/15`.
    pub estimate: f64,
    pub standard_error: f64,
    /// Fraction with `f(p) ≥ 1/6`; no gate.
    pub exploratory: f64,
}

impl CenterOutcome {
    pub fn fraction_at_least(&self, threshold: f64) -> f64 {
        fraction(&self.records, |r| r.fraction >= threshold)
    }
}

pub fn validate_center(samples: usize, inner_samples: u64, master_seed: u64, threads: usize) -> Result<CenterOutcome> {
    if samples < 1 || inner_samples < 1 {
        return Err(Error::InvalidArgument("center check needs at least one outer and one inner sample".into()));
    }
    let records = run_indexed(samples, threads, |k| {
        use rand::Rng;
        let mut r = rng::substream(master_seed, k as u64);
        let p = [r.gen::<f64>(), r.gen::<f64>()];
        let fraction = voronoi::point_vs_boundary_fraction_with(p, inner_samples, &mut r);
        Ok(CenterRecord { sample: k, x: p[0], y: p[1], fraction })
    })?;
    let estimate = fraction(&records, |r| r.fraction >= CENTER_THRESHOLD);
    let exploratory = fraction(&records, |r| r.fraction >= CENTER_EXPLORATORY_THRESHOLD);
    Ok(CenterOutcome { standard_error: binomial_se(estimate, samples), records, estimate, exploratory })
}

fn center_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let out = validate_center(config.trials, config.inner_samples, config.master_seed, config.threads)?;
    let mut stats = BTreeMap::new();
    stat(&mut stats, "fraction", out.records.iter().map(|r| r.fraction))?;
    let mut metrics = BTreeMap::new();
    metrics.insert("estimate".into(), out.estimate);
    metrics.insert("standard_error".into(), out.standard_error);
    metrics.insert("exploratory_one_sixth".into(), out.exploratory);
    metrics.insert("inner_square_probability".into(), voronoi::inner_square_side().powi(2));
    let gates = vec![Gate::at_least("center_probability", out.estimate, CENTER_THRESHOLD - 3.0 * out.standard_error)];
    Ok(ExperimentReport { config: config.clone(), stats, metrics, gates, records: Records::Center(out.records) })
}

#[derive(Debug, Clone)]
pub struct BallsBinsOutcome {
    pub records: Vec<BallsBinsRecord>,
    pub m: u64,
    pub mean_x0: f64,
    pub mean_x1: f64,
}

pub fn run_balls_bins(n: u64, beta: f64, runs: usize, master_seed: u64, threads: usize) -> Result<BallsBinsOutcome> {
    let m = occupancy::bins_for_beta(n, beta);
    let records = run_indexed(runs, threads, |k| {
        let seed = unit_seed(master_seed, k);
        let bins = occupancy::throw_balls(n, m, seed)?;
        Ok(BallsBinsRecord { run: k, seed, n, m, empty_bins: bins.empty_bins(), singleton_bins: bins.singleton_bins() })
    })?;
    let t = runs as f64;
    let mean_x0 = records.iter().map(|r| r.empty_bins as f64).sum::<f64>() / t;
    let mean_x1 = records.iter().map(|r| r.singleton_bins as f64).sum::<f64>() / t;
    Ok(BallsBinsOutcome { records, m, mean_x0, mean_x1 })
}

/// Fraction of runs whose empty-bin count strays more than `λ√n` from the
/// batch mean.
pub fn azuma_deviation_frequency(out: &BallsBinsOutcome, n: u64, lambda: f64) -> f64 {
    let dev = lambda * (n as f64).sqrt();
    fraction(&out.records, |r| (r.empty_bins as f64 - out.mean_x0).abs() > dev)
}

fn balls_bins_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = config.n as u64;
    let out = run_balls_bins(n, config.beta, config.trials, config.master_seed, config.threads)?;
    let mut stats = BTreeMap::new();
    stat(&mut stats, "empty_bins", out.records.iter().map(|r| r.empty_bins as f64))?;
    stat(&mut stats, "singleton_bins", out.records.iter().map(|r| r.singleton_bins as f64))?;
    let mut metrics = BTreeMap::new();
    metrics.insert("m".into(), out.m as f64);
    metrics.insert("mean_x0".into(), out.mean_x0);
    metrics.insert("mean_x1".into(), out.mean_x1);
    let mut gates = Vec::new();
    match (occupancy::expected_bounds_x0(n, config.beta), occupancy::expected_bounds_x1(n, config.beta)) {
        (Ok(b0), Ok(b1)) => {
            metrics.insert("x0_lower".into(), b0.lower);
            metrics.insert("x0_upper".into(), b0.upper);
            metrics.insert("x1_lower".into(), b1.lower);
            metrics.insert("x1_upper".into(), b1.upper);
            gates.push(Gate::at_least("mean_x0_ge_lower", out.mean_x0, b0.lower));
            gates.push(Gate::at_most("mean_x0_le_upper", out.mean_x0, b0.upper));
            gates.push(Gate::at_least("mean_x1_ge_lower", out.mean_x1, b1.lower));
            gates.push(Gate::at_most("mean_x1_le_upper", out.mean_x1, b1.upper));
            let floor = occupancy::singleton_floor(n, config.beta)?;
            let min_x1 = out.records.iter().map(|r| r.singleton_bins).min().unwrap_or(0) as f64;
            gates.push(Gate::at_least("min_x1_ge_floor", min_x1, floor));
            let increments = vec![2.0; n as usize];
            for lambda in [1.0, 2.0, 4.0] {
                let observed = azuma_deviation_frequency(&out, n, lambda);
                let bound = occupancy::azuma_tail(lambda, &increments)?;
                gates.push(Gate::at_most(&format!("azuma_lambda_{lambda}"), observed, bound));
            }
        }
        (Err(e), _) | (_, Err(e)) => {
            log_warning(&format!("analytic bounds unavailable ({e}); reporting counts only"));
        }
    }
    Ok(ExperimentReport { config: config.clone(), stats, metrics, gates, records: Records::BallsBins(out.records) })
}

/// One `n` of a game sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub n: usize,
    pub trials: usize,
    pub suffix_length: usize,
    pub trigger_radius: f64,
    pub triggered_fraction: f64,
    pub disk_hit_frequency: f64,
    pub failure_frequency: f64,
    pub failure_threshold: f64,
    pub median_ratio: f64,
    pub mean_normalized_prophet: f64,
}

/// One `β` of an occupancy sweep. No gates: the bounds need `β ≥ 4`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaSweepPoint {
    pub beta: f64,
    pub n: u64,
    pub m: u64,
    pub mean_x0: f64,
    pub mean_x1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SweepPoints {
    Game(Vec<SweepPoint>),
    Beta(Vec<BetaSweepPoint>),
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    pub betas: Vec<f64>,
    pub trials: usize,
    pub c: f64,
    pub master_seed: u64,
    pub output: OutputFormat,
    #[serde(skip)]
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub points: SweepPoints,
    pub gates: Vec<Gate>,
}

impl SweepReport {
    pub fn all_pass(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }
}

/// Game batches over several `n` (failure trend gate) or, when `betas` is
/// non-empty, balls-into-bins runs over several `β` at the first `n`.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.ns.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one n".into()));
    }
    if config.trials < 1 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if !config.betas.is_empty() {
        let n = config.ns[0] as u64;
        let points = config
            .betas
            .iter()
            .map(|&beta| {
                let out = run_balls_bins(n, beta, config.trials, config.master_seed, config.threads)?;
                Ok(BetaSweepPoint { beta, n, m: out.m, mean_x0: out.mean_x0, mean_x1: out.mean_x1 })
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(SweepReport { config: config.clone(), points: SweepPoints::Beta(points), gates: vec![] });
    }
    let mut points = Vec::with_capacity(config.ns.len());
    for &n in &config.ns {
        let trials = run_game_batch(n, config.trials, config.c, StrategyKind::WaitThenTrigger, config.master_seed, config.threads)?;
        let (stats, metrics, _) = summarize_game(n, config.c, StrategyKind::WaitThenTrigger, &trials)?;
        points.push(SweepPoint {
            n,
            trials: trials.len(),
            suffix_length: metrics["suffix_length"] as usize,
            trigger_radius: metrics["trigger_radius"],
            triggered_fraction: metrics["triggered_fraction"],
            disk_hit_frequency: metrics["disk_hit_frequency"],
            failure_frequency: metrics["failure_frequency"],
            failure_threshold: failure_threshold(n),
            median_ratio: stats["ratio"].median,
            mean_normalized_prophet: stats.get("normalized_prophet").map_or(f64::NAN, |s| s.mean),
        });
    }
    let mut gates = Vec::new();
    let mut sorted = points.clone();
    sorted.sort_by_key(|p| p.n);
    for w in sorted.windows(2) {
        if w[0].n == w[1].n {
            continue;
        }
        // value: decrease in failure frequency from the smaller to the larger n
        let drop = w[0].failure_frequency - w[1].failure_frequency;
        gates.push(Gate {
            name: format!("failure_decreases_{}_to_{}", w[0].n, w[1].n),
            value: drop,
            threshold: 0.0,
            pass: drop > 0.0,
        });
    }
    Ok(SweepReport { config: config.clone(), points: SweepPoints::Game(points), gates })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_game_has_unit_ratio() {
        let report = run_experiment(&ExperimentConfig::new(ExperimentKind::Game, 1, 1)).unwrap();
        let Records::Game(trials) = &report.records else { panic!() };
        assert_eq!(trials.len(), 1);
        assert_eq!(trials[0].ratio(), 1.0);
    }

    #[test]
    fn results_do_not_depend_on_threads() {
        let mut config = ExperimentConfig::new(ExperimentKind::Game, 300, 12);
        config.threads = 1;
        let a = run_experiment(&config).unwrap();
        config.threads = 3;
        let b = run_experiment(&config).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn biggest_cell_vacuous_below_two() {
        let out = validate_biggest_cell(500, 5, 2.0, 1, 1).unwrap();
        assert!(out.vacuous());
        let mut config = ExperimentConfig::new(ExperimentKind::BiggestCell, 500, 5);
        config.c_lemma = 2.0;
        assert!(run_experiment(&config).unwrap().gates.is_empty());
        let out = validate_biggest_cell(2500, 20, 3.0, 1, 1).unwrap();
        assert_eq!(out.exceedances, 0);
        assert_eq!(out.allowed, 1.0);
    }

    #[test]
    fn many_large_thresholds() {
        let out = validate_many_large(10_000, 1, 2.0, 0, 1).unwrap();
        assert_eq!(out.required, 4);
        assert!((out.area_threshold - 7.675e-6).abs() < 1e-9);
        let out = validate_many_large(2500, 3, 2.0, 0, 1).unwrap();
        assert_eq!(out.required, 2);
        assert!(out.records.iter().all(|r| r.fat_sites >= 2 && r.large_cells >= 2 && r.fat_in_suffix <= r.fat_sites));
        assert!(validate_many_large(31, 1, 2.0, 0, 1).is_err());
    }

    #[test]
    fn center_points_in_inner_square_succeed() {
        let side = voronoi::inner_square_side();
        let lo = 0.5 - side / 2.0;
        for (k, (u, v)) in [(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5), (0.99, 0.01)].into_iter().enumerate() {
            let p = [lo + u * side, lo + v * side];
            let f = voronoi::point_vs_boundary_fraction(p, 200_000, k as u64);
            assert!(f >= CENTER_THRESHOLD, "{p:?} {f}");
        }
        let out = validate_center(200, 2000, 3, 1).unwrap();
        assert_eq!(out.fraction_at_least(1.0), 0.0);
        assert!(out.estimate >= out.exploratory);
    }

    #[test]
    fn balls_bins_small_run() {
        let mut config = ExperimentConfig::new(ExperimentKind::BallsBins, 20_000, 5);
        config.beta = 4.0;
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.records.len(), 5);
        assert!(report.gate("min_x1_ge_floor").unwrap().pass);
        // β below 4: counts only
        config.beta = 1.0;
        assert!(run_experiment(&config).unwrap().gates.is_empty());
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(run_experiment(&ExperimentConfig::new(ExperimentKind::Game, 0, 1)).is_err());
        assert!(run_experiment(&ExperimentConfig::new(ExperimentKind::Game, 5, 0)).is_err());
        assert!(ExperimentKind::parse("nope").is_err());
        assert_eq!(ExperimentKind::parse("many-large").unwrap(), ExperimentKind::ManyLarge);
    }
}
