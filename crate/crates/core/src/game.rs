//! The online selection game.
//!
//! Points `p_1, …, p_n` arrive one at a time. A [`Strategy`] sees each new
//! point together with a read-only view of the points revealed before it
//! and either skips it or picks it, once and for good. After the stream
//! ends the full Voronoi diagram decides the payoff: the area of the picked
//! site's cell. The prophet gets the largest cell.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::torus::{default_resolution, torus_distance, GridIndex, TorusPoint};
use crate::voronoi::{build_voronoi, largest_cell, VoronoiDiagram};

/// Default suffix constant `c` in `f = c √n log n`.
pub const DEFAULT_SUFFIX_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Skip,
    Pick,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameConfig {
    pub n: usize,
    pub c: f64,
    pub seed: u64,
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidArgument(format!("c must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

/// Outcome of one playthrough. Indices are 1-based stream positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub n: usize,
    pub seed: u64,
    pub chosen_index: usize,
    pub triggered: bool,
    pub trigger_radius: f64,
    pub disk_hits: usize,
    pub player_area: f64,
    pub prophet_area: f64,
    pub prophet_index: usize,
    pub mean_area: f64,
}

impl TrialResult {
    pub fn ratio(&self) -> f64 {
        self.prophet_area / self.player_area
    }

    /// Prophet payoff in units of `log n / n`.
    pub fn normalized_prophet(&self) -> f64 {
        let ln = (self.n as f64).ln();
        if ln > 0.0 {
            self.prophet_area * self.n as f64 / ln
        } else {
            f64::NAN
        }
    }

    pub fn failed(&self) -> bool {
        !self.triggered || self.disk_hits > 0
    }
}

/// The points revealed so far, `P_{i−1}` while `p_i` is being decided.
pub struct PrefixView<'a> {
    points: &'a [TorusPoint],
    index: &'a GridIndex,
}

impl<'a> PrefixView<'a> {
    pub fn new(points: &'a [TorusPoint], index: &'a GridIndex) -> Self {
        debug_assert_eq!(points.len(), index.len());
        Self { points, index }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[TorusPoint] {
        self.points
    }

    /// Whether some revealed point lies strictly within `radius` of `p`.
    pub fn any_within(&self, p: &TorusPoint, radius: f64) -> bool {
        self.index.any_within(self.points, p, radius, None)
    }
}

pub trait Strategy {
    fn name(&self) -> &'static str;

    /// Radius of the trigger disk, if the strategy has one.
    fn trigger_radius(&self) -> Option<f64> {
        None
    }

    /// Called for `p_i` (1-based `i`) until the strategy picks.
    fn decide(&mut self, i: usize, point: &TorusPoint, prefix: &PrefixView<'_>) -> Decision;
}

/// `f = min(n, max(1, ⌈c √n ln n⌉))`.
pub fn suffix_length(n: usize, c: f64) -> usize {
    let nf = n as f64;
    let raw = (c * nf.sqrt() * nf.ln()).ceil();
    let f = if raw.is_finite() && raw > 1.0 { raw as usize } else { 1 };
    f.min(n).max(1)
}

/// Side count `t = ⌊√(8n / ln n)⌋` of the singleton grid, checked against
/// `t² ≥ 4n / ln n`.
pub fn singleton_grid_side(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::NTooSmall(n as u64));
    }
    let ratio = n as f64 / (n as f64).ln();
    let t = (8.0 * ratio).sqrt().floor() as usize;
    if t < 1 || ((t * t) as f64) < 4.0 * ratio {
        return Err(Error::NTooSmall(n as u64));
    }
    Ok(t)
}

/// Fatness radius `R = √2 ℓ / (1 + 2√2)` with `ℓ = 1/t`: a point in the
/// inner square of a singleton grid cell keeps every other point at least
/// `R` away.
pub fn trigger_radius(n: usize) -> Result<f64> {
    let t = singleton_grid_side(n)?;
    let side = 1.0 / t as f64;
    Ok(std::f64::consts::SQRT_2 * side / (1.0 + 2.0 * std::f64::consts::SQRT_2))
}

/// Wait out the first `n − f` points, then pick the first point whose open
/// disk of radius `radius` holds no earlier point.
pub fn paper_strategy_decide(
    i: usize,
    point: &TorusPoint,
    prefix: &PrefixView<'_>,
    n: usize,
    f: usize,
    radius: f64,
) -> Decision {
    if i + f <= n {
        return Decision::Skip;
    }
    if prefix.any_within(point, radius) {
        Decision::Skip
    } else {
        Decision::Pick
    }
}

/// Wait-then-trigger strategy. Inert (always skips) when `n` is too small
/// for the fatness radius to be defined.
#[derive(Debug, Clone)]
pub struct WaitThenTrigger {
    n: usize,
    f: usize,
    radius: Option<f64>,
}

impl WaitThenTrigger {
    pub fn new(n: usize, c: f64) -> Self {
        Self { n, f: suffix_length(n, c), radius: trigger_radius(n).ok() }
    }

    pub fn with_radius(n: usize, f: usize, radius: f64) -> Self {
        Self { n, f, radius: Some(radius) }
    }

    pub fn suffix(&self) -> usize {
        self.f
    }
}

impl Strategy for WaitThenTrigger {
    fn name(&self) -> &'static str {
        "wait-then-trigger"
    }

    fn trigger_radius(&self) -> Option<f64> {
        self.radius
    }

    fn decide(&mut self, i: usize, point: &TorusPoint, prefix: &PrefixView<'_>) -> Decision {
        match self.radius {
            Some(r) => paper_strategy_decide(i, point, prefix, self.n, self.f, r),
            None => Decision::Skip,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PickFirst;

impl Strategy for PickFirst {
    fn name(&self) -> &'static str {
        "pick-first"
    }

    fn decide(&mut self, _: usize, _: &TorusPoint, _: &PrefixView<'_>) -> Decision {
        Decision::Pick
    }
}

/// Picks the point at a 1-based index fixed before the stream starts.
#[derive(Debug, Clone)]
pub struct PickIndex {
    pub target: usize,
}

impl PickIndex {
    pub fn uniform(n: usize, rng: &mut impl Rng) -> Self {
        Self { target: rng.gen_range(1..=n.max(1)) }
    }
}

impl Strategy for PickIndex {
    fn name(&self) -> &'static str {
        "pick-uniform-index"
    }

    fn decide(&mut self, i: usize, _: &TorusPoint, _: &PrefixView<'_>) -> Decision {
        if i == self.target {
            Decision::Pick
        } else {
            Decision::Skip
        }
    }
}

/// Never picks, so the engine falls back to the last point.
#[derive(Debug, Clone, Default)]
pub struct PickLast;

impl Strategy for PickLast {
    fn name(&self) -> &'static str {
        "pick-last"
    }

    fn decide(&mut self, _: usize, _: &TorusPoint, _: &PrefixView<'_>) -> Decision {
        Decision::Skip
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    #[default]
    WaitThenTrigger,
    PickFirst,
    PickUniformIndex,
    PickLast,
}

impl StrategyKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "paper" | "wait-then-trigger" => Ok(Self::WaitThenTrigger),
            "pick-first" => Ok(Self::PickFirst),
            "pick-uniform-index" | "uniform" => Ok(Self::PickUniformIndex),
            "pick-last" => Ok(Self::PickLast),
            other => Err(Error::InvalidArgument(format!("unknown strategy {other:?}"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::WaitThenTrigger => "wait-then-trigger",
            Self::PickFirst => "pick-first",
            Self::PickUniformIndex => "pick-uniform-index",
            Self::PickLast => "pick-last",
        }
    }

    /// Fresh strategy for one trial. `rng` is consumed only by strategies
    /// that need randomness.
    pub fn instantiate(&self, n: usize, c: f64, rng: &mut impl Rng) -> Box<dyn Strategy + Send> {
        match self {
            Self::WaitThenTrigger => Box::new(WaitThenTrigger::new(n, c)),
            Self::PickFirst => Box::new(PickFirst),
            Self::PickUniformIndex => Box::new(PickIndex::uniform(n, rng)),
            Self::PickLast => Box::new(PickLast),
        }
    }
}

pub fn generate_points(n: usize, rng: &mut impl Rng) -> Vec<TorusPoint> {
    (0..n).map(|_| TorusPoint { x: rng.gen(), y: rng.gen() }).collect()
}

/// Largest cell as a 1-based index and its area.
pub fn prophet_payoff(diagram: &VoronoiDiagram) -> (usize, f64) {
    let (i, a) = largest_cell(diagram);
    (i + 1, a)
}

/// Streams `points` through `strategy`. Returns the 1-based pick and
/// whether the strategy made it (as opposed to the forced last pick).
pub fn stream_decisions(points: &[TorusPoint], strategy: &mut dyn Strategy) -> (usize, bool) {
    let n = points.len();
    let mut index = GridIndex::empty(default_resolution(n)).expect("positive resolution");
    for (k, p) in points.iter().enumerate() {
        let view = PrefixView::new(&points[..k], &index);
        if strategy.decide(k + 1, p, &view) == Decision::Pick {
            return (k + 1, true);
        }
        index.insert(k, p);
    }
    (n, false)
}

/// Plays one game on a fixed point sequence.
pub fn play(points: &[TorusPoint], seed: u64, strategy: &mut dyn Strategy, radius: f64) -> Result<TrialResult> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let (chosen_index, triggered) = stream_decisions(points, strategy);
    let chosen = points[chosen_index - 1];
    let disk_hits = points[chosen_index..].iter().filter(|q| torus_distance(&chosen, q) < radius).count();
    let diagram = build_voronoi(points)?;
    let (prophet_index, prophet_area) = prophet_payoff(&diagram);
    Ok(TrialResult {
        n,
        seed,
        chosen_index,
        triggered,
        trigger_radius: radius,
        disk_hits,
        player_area: diagram.area(chosen_index - 1),
        prophet_area,
        prophet_index,
        mean_area: 1.0 / n as f64,
    })
}

/// Generates `n` uniform points from `config.seed` and plays them.
///
/// The recorded radius (used for `disk_hits`) is the fatness radius for
/// `n`, or the strategy's own radius when it has one; `0` when neither is
/// defined.
pub fn run_trial(config: &GameConfig, strategy: &mut dyn Strategy) -> Result<TrialResult> {
    config.validate()?;
    let mut r = rng::from_seed(config.seed);
    let points = generate_points(config.n, &mut r);
    let radius = strategy.trigger_radius().or_else(|| trigger_radius(config.n).ok()).unwrap_or(0.0);
    play(&points, config.seed, strategy, radius)
}

/// Runs one trial of `kind`: points first, then any strategy randomness,
/// all from the trial's own stream.
pub fn run_trial_with(config: &GameConfig, kind: StrategyKind) -> Result<TrialResult> {
    config.validate()?;
    let mut r = rng::from_seed(config.seed);
    let points = generate_points(config.n, &mut r);
    let mut strategy = kind.instantiate(config.n, config.c, &mut r);
    let radius = strategy.trigger_radius().or_else(|| trigger_radius(config.n).ok()).unwrap_or(0.0);
    play(&points, config.seed, strategy.as_mut(), radius)
}
