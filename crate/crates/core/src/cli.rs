//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when `--enforce-gates` is set and a gate
//! fails (or on an I/O failure), 2 on a usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{
    self, run_experiment, ExperimentConfig, ExperimentKind, OutputFormat, SweepConfig,
};
use crate::game::{self, StrategyKind};
use crate::rng;
use crate::voronoi::build_voronoi;

#[derive(Debug, Parser)]
#[command(name = "prophet-voronoi", version, about = "Online selection on random toroidal Voronoi diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play seeded games and compare the player with the prophet
    Game(GameArgs),
    /// Dump the Voronoi diagram of uniform random sites
    Voronoi(VoronoiArgs),
    /// Tail frequency of the largest cell area
    LemmaBiggestCell(BiggestCellArgs),
    /// Counts of fat sites and large cells
    LemmaManyLarge(ManyLargeArgs),
    /// Probability that a random point owns a 1/15 share of its square
    LemmaCenter(CenterArgs),
    /// Empty and singleton bins against their analytic bounds
    BallsBins(BallsBinsArgs),
    /// Failure trend over several n, or empty bins over several β
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Jsonl,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Jsonl => OutputFormat::Jsonl,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Paper,
    PickFirst,
    PickUniformIndex,
    PickLast,
}

impl From<StrategyArg> for StrategyKind {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Paper => StrategyKind::WaitThenTrigger,
            StrategyArg::PickFirst => StrategyKind::PickFirst,
            StrategyArg::PickUniformIndex => StrategyKind::PickUniformIndex,
            StrategyArg::PickLast => StrategyKind::PickLast,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Master seed; every trial derives its own substream from it
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    /// Output file (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the summary JSON for jsonl/csv output (default: standard error)
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Exit with status 1 when any gate fails
    #[arg(long)]
    pub enforce_gates: bool,
    /// Worker threads (0 = all cores); output does not depend on it
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Suffix constant c in f = c·√n·ln n
    #[arg(long, default_value_t = game::DEFAULT_SUFFIX_CONSTANT)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Paper)]
    pub strategy: StrategyArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VoronoiArgs {
    #[arg(long)]
    pub n: usize,
    /// Number of diagrams; trial k uses substream k of the seed
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BiggestCellArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long = "c-lemma", default_value_t = 3.0)]
    pub c_lemma: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ManyLargeArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Suffix constant, used for the fat-sites-in-suffix statistic
    #[arg(long, default_value_t = game::DEFAULT_SUFFIX_CONSTANT)]
    pub c: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CenterArgs {
    /// Outer samples (points p in the square)
    #[arg(long = "samples", visible_alias = "trials", default_value_t = 10_000)]
    pub samples: usize,
    /// Inner samples per point, estimating f(p)
    #[arg(long = "inner", default_value_t = 10_000)]
    pub inner: u64,
    /// Accepted for uniformity with the other subcommands; unused
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BallsBinsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 4.0)]
    pub beta: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated list of n values
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = game::DEFAULT_SUFFIX_CONSTANT)]
    pub c: f64,
    /// Comma-separated β values: sweep empty bins at the first n instead
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
                _ => 2,
            }
        }
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn experiment_config(kind: ExperimentKind, n: usize, trials: usize, o: &OutputArgs) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(kind, n, trials);
    config.master_seed = o.seed;
    config.output = o.format.into();
    config.threads = o.threads;
    config
}

/// Runs the experiment, writes its output and returns whether the gates
/// allow a zero exit.
fn run_and_write(config: ExperimentConfig, o: &OutputArgs) -> Result<bool> {
    let report = run_experiment(&config)?;
    let format: OutputFormat = o.format.into();
    let mut out = open_out(&o.out)?;
    experiments::write_report(&report, format, &mut out)?;
    out.flush()?;
    if format != OutputFormat::Json {
        let summary = experiments::summary_json(&report)?;
        match &o.summary {
            Some(p) => std::fs::write(p, summary + "\n")?,
            None => eprintln!("{summary}"),
        }
    }
    for g in report.gates.iter().filter(|g| !g.pass) {
        eprintln!("gate failed: {} (value {}, threshold {})", g.name, g.value, g.threshold);
    }
    Ok(!o.enforce_gates || report.all_pass())
}

#[derive(Serialize)]
struct CellDump {
    site: usize,
    area: f64,
    polygon: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct DiagramDump {
    sites: Vec<[f64; 2]>,
    cells: Vec<CellDump>,
}

#[derive(Serialize)]
struct CellRow {
    trial: usize,
    site: usize,
    x: f64,
    y: f64,
    area: f64,
    vertices: usize,
}

fn diagram_dump(n: usize, seed: u64) -> Result<DiagramDump> {
    let mut r = rng::from_seed(seed);
    let points = game::generate_points(n, &mut r);
    let d = build_voronoi(&points)?;
    Ok(DiagramDump {
        sites: d.sites.iter().map(|p| [p.x, p.y]).collect(),
        cells: d
            .cells
            .into_iter()
            .map(|c| CellDump { site: c.site_index, area: c.area, polygon: c.polygon })
            .collect(),
    })
}

fn run_voronoi(args: VoronoiArgs) -> Result<bool> {
    if args.n < 1 || args.trials < 1 {
        return Err(Error::InvalidArgument("voronoi needs n ≥ 1 and trials ≥ 1".into()));
    }
    let o = &args.output;
    let dumps = experiments::run_indexed(args.trials, o.threads, |k| {
        diagram_dump(args.n, rng::substream_seed(o.seed, k as u64))
    })?;
    let mut out = open_out(&o.out)?;
    match o.format {
        FormatArg::Json if dumps.len() == 1 => {
            serde_json::to_writer_pretty(&mut out, &dumps[0])?;
            writeln!(out)?;
        }
        FormatArg::Json => {
            serde_json::to_writer_pretty(&mut out, &dumps)?;
            writeln!(out)?;
        }
        FormatArg::Jsonl => {
            for d in &dumps {
                serde_json::to_writer(&mut out, d)?;
                writeln!(out)?;
            }
        }
        FormatArg::Csv => {
            let mut csv = csv::Writer::from_writer(&mut out);
            for (trial, d) in dumps.iter().enumerate() {
                for (c, s) in d.cells.iter().zip(&d.sites) {
                    csv.serialize(CellRow { trial, site: c.site, x: s[0], y: s[1], area: c.area, vertices: c.polygon.len() })?;
                }
            }
            csv.flush()?;
        }
    }
    out.flush()?;
    Ok(true)
}

fn run_sweep(args: SweepArgs) -> Result<bool> {
    let o = &args.output;
    let config = SweepConfig {
        ns: args.n,
        betas: args.beta,
        trials: args.trials,
        c: args.c,
        master_seed: o.seed,
        output: o.format.into(),
        threads: o.threads,
    };
    let report = experiments::run_sweep(&config)?;
    let mut out = open_out(&o.out)?;
    experiments::write_sweep(&report, config.output, &mut out)?;
    out.flush()?;
    if config.output != OutputFormat::Json {
        let gates = serde_json::to_string_pretty(&report.gates)?;
        match &o.summary {
            Some(p) => std::fs::write(p, gates + "\n")?,
            None => eprintln!("{gates}"),
        }
    }
    for g in report.gates.iter().filter(|g| !g.pass) {
        eprintln!("gate failed: {} (value {}, threshold {})", g.name, g.value, g.threshold);
    }
    Ok(!o.enforce_gates || report.all_pass())
}

pub fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Game(a) => {
            let mut config = experiment_config(ExperimentKind::Game, a.n, a.trials, &a.output);
            config.c = a.c;
            config.strategy = a.strategy.into();
            run_and_write(config, &a.output)
        }
        Command::Voronoi(a) => run_voronoi(a),
        Command::LemmaBiggestCell(a) => {
            let mut config = experiment_config(ExperimentKind::BiggestCell, a.n, a.trials, &a.output);
            config.c_lemma = a.c_lemma;
            run_and_write(config, &a.output)
        }
        Command::LemmaManyLarge(a) => {
            let mut config = experiment_config(ExperimentKind::ManyLarge, a.n, a.trials, &a.output);
            config.c = a.c;
            run_and_write(config, &a.output)
        }
        Command::LemmaCenter(a) => {
            let mut config = experiment_config(ExperimentKind::Center, a.n.unwrap_or(0), a.samples, &a.output);
            config.inner_samples = a.inner;
            run_and_write(config, &a.output)
        }
        Command::BallsBins(a) => {
            let mut config = experiment_config(ExperimentKind::BallsBins, a.n, a.trials, &a.output);
            config.beta = a.beta;
            run_and_write(config, &a.output)
        }
        Command::Sweep(a) => run_sweep(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("prophet-voronoi").chain(args.iter().copied()))
    }

    #[test]
    fn parses_documented_invocations() {
        assert!(parse(&["game", "--n", "10000", "--trials", "500", "--c", "2", "--seed", "42", "--format", "jsonl", "--out", "t.jsonl"]).is_ok());
        assert!(parse(&["voronoi", "--n", "100", "--seed", "7", "--out", "d.json"]).is_ok());
        assert!(parse(&["lemma-center", "--samples", "10000", "--inner", "10000", "--seed", "1"]).is_ok());
        assert!(parse(&["lemma-biggest-cell", "--n", "100", "--c-lemma", "3", "--threads", "4"]).is_ok());
        let sweep = parse(&["sweep", "--n", "2500,10000,40000", "--trials", "10"]).unwrap();
        let Command::Sweep(s) = sweep.command else { panic!() };
        assert_eq!(s.n, vec![2500, 10_000, 40_000]);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(main_with_args(["prophet-voronoi", "game"]), 2);
        assert_eq!(main_with_args(["prophet-voronoi", "game", "--n", "10", "--bogus"]), 2);
        assert_eq!(main_with_args(["prophet-voronoi", "frobnicate"]), 2);
        assert_eq!(main_with_args(["prophet-voronoi", "game", "--n", "x"]), 2);
        assert_eq!(main_with_args(["prophet-voronoi", "game", "--n", "0", "--out", "/dev/null"]), 2);
        assert_eq!(main_with_args(["prophet-voronoi", "game", "--n", "10", "--format", "xml"]), 2);
    }
}
