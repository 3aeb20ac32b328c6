//! Command-line experiment runner.
//!
//! Every run resolves to an [`ExperimentConfig`]: built-in defaults, then an optional
//! `key = value` file, then `GILBERT_OUTPUT_DIR`, then flags. Outputs are named
//! `<experiment>_seed<seed>[_<part>].<ext>` and a `.manifest` file echoing the resolved config
//! is written next to them; `gilbert run --config <manifest>` regenerates the same CSV/JSON.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::seq::index::sample;
use serde::Serialize;

use crate::engine::simulate;
use crate::error::{Error, Result};
use crate::experiments::{
    covariance_decay_sweep, escaping_expectation, estimate_covariance, euler_experiment, oracle_check,
    scaling_experiment, tail_experiment, PairConfig, SweepConfig,
};
use crate::geometry::{BoxDomain, Direction, Point2, Side};
use crate::graph::{euler_check, extract_graph};
use crate::lattice::{
    ca_run, compare_ca_with_rays, lattice_ray_simulate, Cell, IntBox, LatticeRayConfig, LatticeState,
    DEFAULT_CYCLE_WINDOW,
};
use crate::render::{lattice_svg, tessellation_svg, SvgStyle};
use crate::rng::stream_rng;
use crate::sampling::{sample_poisson, MarkDistribution, PositionPolicy, SeedSet};

pub const OUTPUT_DIR_ENV: &str = "GILBERT_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

pub const EXPERIMENTS: [&str; 10] =
    ["simulate", "oracle-check", "euler", "tail", "scaling", "cov", "cov-sweep", "escape", "ca", "lattice-rays"];

/// Resolved parameters of one run. Experiment-specific keys live in `params`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub intensity: f64,
    pub box_side: Option<f64>,
    pub horizon: Option<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub mark_p: f64,
    pub threads: Option<usize>,
    pub params: BTreeMap<String, String>,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Parse(format!("{key}: cannot parse {value:?}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse_num(key, v)).collect()
}

fn parse_point(key: &str, value: &str) -> Result<Point2> {
    match parse_list(key, value)?.as_slice() {
        &[x, y] => Ok(Point2::new(x, y)),
        _ => Err(Error::Parse(format!("{key}: expected x,y, got {value:?}"))),
    }
}

fn parse_side(key: &str, value: &str) -> Result<Side> {
    match value.trim() {
        "+" | "plus" => Ok(Side::Plus),
        "-" | "minus" => Ok(Side::Minus),
        other => Err(Error::Parse(format!("{key}: expected + or -, got {other:?}"))),
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn defaults(experiment: &str) -> Result<Self> {
        if !EXPERIMENTS.contains(&experiment) {
            return Err(Error::InvalidParameter(format!("unknown experiment {experiment:?}")));
        }
        let (box_side, horizon, replicates) = match experiment {
            "simulate" => (Some(20.0), None, 1),
            "oracle-check" => (Some(10.0), None, 100),
            "euler" => (Some(20.0), None, 1000),
            "tail" | "scaling" => (None, Some(10.0), 10_000),
            "cov" | "cov-sweep" => (None, Some(2.0), 10_000),
            "escape" => (None, None, 500),
            "ca" => (None, None, 1),
            _ => (Some(10.0), None, 1),
        };
        Ok(ExperimentConfig {
            experiment: experiment.to_string(),
            intensity: 1.0,
            box_side,
            horizon,
            replicates,
            master_seed: 0,
            output_dir: PathBuf::from("."),
            mark_p: 0.5,
            threads: None,
            params: BTreeMap::new(),
        })
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => {
                if value != self.experiment {
                    return Err(Error::InvalidParameter(format!("config is for {value:?}, not {:?}", self.experiment)));
                }
            }
            "intensity" => self.intensity = parse_num(key, value)?,
            "box_side" => self.box_side = Some(parse_num(key, value)?),
            "horizon" => self.horizon = Some(parse_num(key, value)?),
            "replicates" => self.replicates = parse_num(key, value)?,
            "master_seed" => self.master_seed = parse_num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "mark_p" => self.mark_p = parse_num(key, value)?,
            "threads" => self.threads = Some(parse_num(key, value)?),
            _ => {
                self.params.insert(key.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.intensity.is_finite() && self.intensity > 0.0) {
            return bad("intensity must be positive");
        }
        if self.box_side.is_some_and(|n| !(n.is_finite() && n > 0.0)) {
            return bad("box_side must be positive");
        }
        if self.horizon.is_some_and(|t| !(t.is_finite() && t >= 0.0)) {
            return bad("horizon must be non-negative");
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1");
        }
        if !(self.mark_p > 0.0 && self.mark_p < 1.0) {
            return bad("mark_p must lie in (0, 1)");
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1");
        }
        Ok(())
    }

    /// Config echo in `key = value` form; parses back to the same config.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment = {}", self.experiment);
        let _ = writeln!(out, "intensity = {}", self.intensity);
        if let Some(n) = self.box_side {
            let _ = writeln!(out, "box_side = {n}");
        }
        if let Some(t) = self.horizon {
            let _ = writeln!(out, "horizon = {t}");
        }
        let _ = writeln!(out, "replicates = {}", self.replicates);
        let _ = writeln!(out, "master_seed = {}", self.master_seed);
        let _ = writeln!(out, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(out, "mark_p = {}", self.mark_p);
        for (k, v) in &self.params {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn from_key_values(text: &str) -> Result<Self> {
        let pairs = parse_key_values(text)?;
        let experiment = pairs
            .iter()
            .find(|(k, _)| k == "experiment")
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::Parse("config has no experiment key".into()))?;
        let mut cfg = ExperimentConfig::defaults(&experiment)?;
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    fn param_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        self.param(key).map_or(Ok(default), |v| parse_num(key, v))
    }

    fn require_box(&self) -> Result<f64> {
        self.box_side.ok_or_else(|| Error::InvalidParameter("box_side is required".into()))
    }

    fn require_horizon(&self) -> Result<f64> {
        self.horizon.ok_or_else(|| Error::InvalidParameter("horizon is required".into()))
    }

    fn marks(&self) -> Result<MarkDistribution> {
        MarkDistribution::new(self.mark_p)
    }

    fn stem(&self) -> String {
        format!("{}_seed{}", self.experiment, self.master_seed)
    }

    fn output_path(&self, part: Option<&str>, ext: &str) -> PathBuf {
        let name = match part {
            Some(p) => format!("{}_{p}.{ext}", self.stem()),
            None => format!("{}.{ext}", self.stem()),
        };
        self.output_dir.join(name)
    }
}

#[derive(Parser, Debug)]
#[command(name = "gilbert", version, about = "Rectangular Gilbert tessellation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// key = value file applied before flags
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Probability of a vertical mark
    #[arg(long)]
    mark_p: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One tessellation in a box: CSV, SVG and planar-graph JSON
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long = "box")]
        box_side: Option<f64>,
        /// Defaults to the box side
        #[arg(long)]
        horizon: Option<f64>,
        /// Seed CSV (`id,x,y,mark,pinned`) instead of a Poisson sample
        #[arg(long)]
        seeds: Option<PathBuf>,
        /// Perturb coordinates by up to this much before simulating
        #[arg(long)]
        jitter: Option<f64>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare the engine with the time-stepping oracle
    OracleCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long = "box")]
        box_side: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Euler identities of the planar subdivision on Poisson instances
    Euler {
        #[command(flatten)]
        common: Common,
        #[arg(long = "box")]
        box_side: Option<f64>,
    },
    /// Survival curve and exponential tail fit of Palm segment lengths
    Tail {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tmax: Option<f64>,
        /// H or V
        #[arg(long)]
        mark: Option<String>,
        #[arg(long)]
        grid_points: Option<usize>,
    },
    /// Segment lengths at two intensities after rescaling
    Scaling {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        lambda_b: Option<f64>,
    },
    /// Covariance of two growth events for pinned seeds
    Cov {
        #[command(flatten)]
        common: Common,
        /// x,y
        #[arg(long, allow_hyphen_values = true)]
        u: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        v: Option<String>,
        #[arg(long)]
        du: Option<String>,
        #[arg(long)]
        dv: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        side_u: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        side_v: Option<String>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Covariance as a function of seed distance
    CovSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated increasing distances
        #[arg(long)]
        distances: Option<String>,
        /// Direction of v from u, as dx,dy
        #[arg(long, allow_hyphen_values = true)]
        heading: Option<String>,
        #[arg(long)]
        du: Option<String>,
        #[arg(long)]
        dv: Option<String>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Expected number of rays escaping the box
    Escape {
        #[command(flatten)]
        common: Common,
        /// Comma-separated box sides
        #[arg(long)]
        n_values: Option<String>,
    },
    /// Run the inhibitory cellular automaton
    Ca {
        #[command(flatten)]
        common: Common,
        /// Integer domain {0..box}²; unbounded when absent
        #[arg(long = "box")]
        box_side: Option<i64>,
        /// Active cells as x,y;x,y;…
        #[arg(long, allow_hyphen_values = true)]
        cells: Option<String>,
        /// Initial state as a text grid (`#` active)
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Discrete ray growth on the integer lattice
    LatticeRays {
        #[command(flatten)]
        common: Common,
        #[arg(long = "box")]
        box_side: Option<i64>,
        /// Seeds as x,y,H;x,y,V;…
        #[arg(long)]
        seeds: Option<String>,
        /// Number of random seeds when --seeds is absent
        #[arg(long)]
        random: Option<usize>,
        /// In whole time units; defaults to twice the box side
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Re-run an experiment from a manifest or config file
    Run {
        #[command(flatten)]
        common: Common,
    },
}

fn push<T: ToString>(pairs: &mut Vec<(String, String)>, key: &str, value: Option<T>) {
    if let Some(v) = value {
        pairs.push((key.to_string(), v.to_string()));
    }
}

fn resolve(experiment: Option<&str>, common: &Common, flags: Vec<(String, String)>) -> Result<ExperimentConfig> {
    let file = match &common.config {
        Some(path) => Some(std::fs::read_to_string(path)?),
        None => None,
    };
    let mut cfg = match (experiment, &file) {
        (Some(e), _) => ExperimentConfig::defaults(e)?,
        (None, Some(text)) => ExperimentConfig::from_key_values(text)?,
        (None, None) => return Err(Error::InvalidParameter("run needs --config".into())),
    };
    if let Some(text) = &file {
        for (k, v) in parse_key_values(text)? {
            cfg.set(&k, &v)?;
        }
    }
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        cfg.output_dir = PathBuf::from(dir);
    }
    let mut pairs = Vec::new();
    push(&mut pairs, "master_seed", common.seed);
    push(&mut pairs, "threads", common.threads);
    push(&mut pairs, "output_dir", common.output_dir.as_ref().map(|p| p.display().to_string()));
    push(&mut pairs, "intensity", common.lambda);
    push(&mut pairs, "replicates", common.replicates);
    push(&mut pairs, "mark_p", common.mark_p);
    pairs.extend(flags);
    for (k, v) in pairs {
        cfg.set(&k, &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn to_config(command: Command) -> Result<(ExperimentConfig, Extras)> {
    let mut flags = Vec::new();
    let mut extras = Extras::default();
    let (name, common) = match command {
        Command::Simulate { common, box_side, horizon, seeds, jitter, svg, csv } => {
            push(&mut flags, "box_side", box_side);
            push(&mut flags, "horizon", horizon);
            push(&mut flags, "seeds_file", seeds.map(|p| p.display().to_string()));
            push(&mut flags, "jitter", jitter);
            extras.svg = svg;
            extras.csv = csv;
            ("simulate", common)
        }
        Command::OracleCheck { common, box_side, dt } => {
            push(&mut flags, "box_side", box_side);
            push(&mut flags, "dt", dt);
            ("oracle-check", common)
        }
        Command::Euler { common, box_side } => {
            push(&mut flags, "box_side", box_side);
            ("euler", common)
        }
        Command::Tail { common, tmax, mark, grid_points } => {
            push(&mut flags, "horizon", tmax);
            push(&mut flags, "mark", mark);
            push(&mut flags, "grid_points", grid_points);
            ("tail", common)
        }
        Command::Scaling { common, tmax, lambda_b } => {
            push(&mut flags, "horizon", tmax);
            push(&mut flags, "intensity_b", lambda_b);
            ("scaling", common)
        }
        Command::Cov { common, u, v, du, dv, side_u, side_v, t } => {
            push(&mut flags, "u", u);
            push(&mut flags, "v", v);
            push(&mut flags, "du", du);
            push(&mut flags, "dv", dv);
            push(&mut flags, "side_u", side_u);
            push(&mut flags, "side_v", side_v);
            push(&mut flags, "horizon", t);
            ("cov", common)
        }
        Command::CovSweep { common, distances, heading, du, dv, t } => {
            push(&mut flags, "distances", distances);
            push(&mut flags, "heading", heading);
            push(&mut flags, "du", du);
            push(&mut flags, "dv", dv);
            push(&mut flags, "horizon", t);
            ("cov-sweep", common)
        }
        Command::Escape { common, n_values } => {
            push(&mut flags, "n_values", n_values);
            ("escape", common)
        }
        Command::Ca { common, box_side, cells, grid, steps } => {
            push(&mut flags, "box_side", box_side);
            push(&mut flags, "cells", cells);
            push(&mut flags, "grid_file", grid.map(|p| p.display().to_string()));
            push(&mut flags, "steps", steps);
            ("ca", common)
        }
        Command::LatticeRays { common, box_side, seeds, random, horizon, svg } => {
            push(&mut flags, "box_side", box_side);
            push(&mut flags, "seeds", seeds);
            push(&mut flags, "random", random);
            push(&mut flags, "horizon", horizon);
            extras.svg = svg;
            ("lattice-rays", common)
        }
        Command::Run { common } => return Ok((resolve(None, &common, flags)?, extras)),
    };
    Ok((resolve(Some(name), &common, flags)?, extras))
}

/// Output paths given explicitly on the command line; not part of the manifest.
#[derive(Debug, Default)]
struct Extras {
    svg: Option<PathBuf>,
    csv: Option<PathBuf>,
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
    /// `false` when an acceptance check (euler, oracle-check) failed.
    pub accepted: bool,
}

struct Writer {
    files: Vec<PathBuf>,
}

impl Writer {
    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, contents)?;
        self.files.push(path.to_path_buf());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(path, &text)
    }
}

fn parse_cells(text: &str) -> Result<Vec<Cell>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| match s.split(',').map(|v| parse_num::<i64>("cells", v)).collect::<Result<Vec<_>>>()?.as_slice() {
            &[x, y] => Ok((x, y)),
            _ => Err(Error::Parse(format!("cells: expected x,y, got {s:?}"))),
        })
        .collect()
}

fn parse_lattice_seeds(text: &str) -> Result<Vec<(Cell, Direction)>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let f: Vec<&str> = s.split(',').collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("seeds: expected x,y,H|V, got {s:?}")));
            }
            Ok(((parse_num("seeds", f[0])?, parse_num("seeds", f[1])?), Direction::from_code(f[2].trim())?))
        })
        .collect()
}

fn random_lattice_seeds(n: i64, count: usize, mark_p: f64, master_seed: u64) -> Result<Vec<(Cell, Direction)>> {
    let side = (n - 1) as usize;
    if count > side * side {
        return Err(Error::InvalidParameter(format!("{count} seeds do not fit in {{1..{}}}²", n - 1)));
    }
    let mut rng = stream_rng(master_seed, 0, "lattice-seeds");
    let marks = MarkDistribution::new(mark_p)?;
    let mut cells: Vec<usize> = sample(&mut rng, side * side, count).into_vec();
    cells.sort_unstable();
    Ok(cells.into_iter().map(|i| (((i % side) as i64 + 1, (i / side) as i64 + 1), marks.sample(&mut rng))).collect())
}

#[derive(Serialize)]
struct LatticeRayRow {
    seed: usize,
    x: i64,
    y: i64,
    mark: char,
    side: char,
    length: f64,
    stop: crate::lattice::LatticeStop,
}

fn execute(cfg: &ExperimentConfig, extras: &Extras) -> Result<(Vec<PathBuf>, bool)> {
    let mut w = Writer { files: Vec::new() };
    let mut accepted = true;
    match cfg.experiment.as_str() {
        "simulate" => {
            let n = cfg.require_box()?;
            let domain = BoxDomain::new(n)?;
            let seeds = match cfg.param("seeds_file") {
                Some(path) => SeedSet::from_csv(domain, &std::fs::read_to_string(path)?)?,
                None => sample_poisson(domain, cfg.intensity, cfg.marks()?, cfg.master_seed)?,
            };
            let seeds = match cfg.param("jitter") {
                Some(eps) => seeds.with_policy(PositionPolicy::Jitter {
                    epsilon: parse_num("jitter", eps)?,
                    rng_seed: cfg.master_seed,
                })?,
                None => seeds,
            };
            let t = simulate(&seeds, cfg.horizon.unwrap_or(n))?;
            let csv = extras.csv.clone().unwrap_or_else(|| cfg.output_path(None, "csv"));
            w.write(&csv, &t.to_csv())?;
            w.write(&cfg.output_path(Some("seeds"), "csv"), &seeds.to_csv())?;
            let svg = extras.svg.clone().unwrap_or_else(|| cfg.output_path(None, "svg"));
            w.write(&svg, &tessellation_svg(&t, &SvgStyle::default()))?;
            if t.horizon() >= n {
                let g = extract_graph(&t)?;
                w.write(&cfg.output_path(Some("graph"), "json"), &g.to_json()?)?;
                w.json(&cfg.output_path(Some("euler"), "json"), &euler_check(&g, seeds.len()))?;
            }
        }
        "oracle-check" => {
            let dt = cfg.param_or("dt", 1e-3)?;
            let s = oracle_check(cfg.intensity, cfg.require_box()?, cfg.replicates, cfg.master_seed, dt)?;
            accepted = s.pass;
            w.json(&cfg.output_path(None, "json"), &s)?;
        }
        "euler" => {
            let s = euler_experiment(cfg.intensity, cfg.require_box()?, cfg.replicates, cfg.master_seed)?;
            accepted = s.passes == s.instances;
            w.json(&cfg.output_path(None, "json"), &s)?;
        }
        "tail" => {
            let mark = Direction::from_code(cfg.param("mark").unwrap_or("H"))?;
            let grid = cfg.param_or("grid_points", 40usize)?;
            let s =
                tail_experiment(cfg.intensity, cfg.require_horizon()?, cfg.replicates, cfg.master_seed, mark, grid)?;
            w.write(&cfg.output_path(Some("survival"), "csv"), &s.curve.to_csv())?;
            w.json(&cfg.output_path(Some("fit"), "json"), &s)?;
        }
        "scaling" => {
            let b = cfg.param_or("intensity_b", 4.0)?;
            let grid = cfg.param_or("grid_points", 40usize)?;
            let s =
                scaling_experiment(cfg.intensity, b, cfg.require_horizon()?, cfg.replicates, cfg.master_seed, grid)?;
            w.json(&cfg.output_path(None, "json"), &s)?;
        }
        "cov" => {
            let pair = PairConfig {
                u: parse_point("u", cfg.param("u").unwrap_or("0,0"))?,
                d_u: Direction::from_code(cfg.param("du").unwrap_or("H"))?,
                side_u: parse_side("side_u", cfg.param("side_u").unwrap_or("+"))?,
                v: parse_point("v", cfg.param("v").unwrap_or("0.025,0.025"))?,
                d_v: Direction::from_code(cfg.param("dv").unwrap_or("H"))?,
                side_v: parse_side("side_v", cfg.param("side_v").unwrap_or("+"))?,
            };
            let est =
                estimate_covariance(pair, cfg.require_horizon()?, cfg.intensity, cfg.replicates, cfg.master_seed)?;
            w.json(&cfg.output_path(None, "json"), &est)?;
        }
        "cov-sweep" => {
            let heading = parse_point("heading", cfg.param("heading").unwrap_or("0.05,0.95"))?;
            let sweep = SweepConfig {
                d_u: Direction::from_code(cfg.param("du").unwrap_or("H"))?,
                side_u: Side::Plus,
                d_v: Direction::from_code(cfg.param("dv").unwrap_or("H"))?,
                side_v: Side::Plus,
                heading: (heading.x, heading.y),
            };
            let distances = parse_list("distances", cfg.param("distances").unwrap_or("1,2,4,8"))?;
            let rows = covariance_decay_sweep(
                sweep,
                &distances,
                cfg.require_horizon()?,
                cfg.intensity,
                cfg.replicates,
                cfg.master_seed,
            )?;
            let mut csv = String::from("distance,cov,std_error,independent_regime\n");
            for r in &rows {
                let _ = writeln!(csv, "{},{},{},{}", r.distance, r.value, r.std_error, r.independent_regime);
            }
            w.write(&cfg.output_path(None, "csv"), &csv)?;
        }
        "escape" => {
            let ns = parse_list("n_values", cfg.param("n_values").unwrap_or("20,40,80"))?;
            let rows = escaping_expectation(cfg.intensity, &ns, cfg.replicates, cfg.master_seed)?;
            let mut csv = String::from("n,intensity,replicates,mean,std_error,normalized\n");
            for r in &rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    r.n, r.intensity, r.replicates, r.mean, r.std_error, r.normalized
                );
            }
            w.write(&cfg.output_path(None, "csv"), &csv)?;
        }
        "ca" => {
            let domain = cfg.box_side.map(|n| IntBox::square(n as i64));
            let initial = match (cfg.param("grid_file"), cfg.param("cells")) {
                (Some(path), _) => LatticeState::from_grid_text(&std::fs::read_to_string(path)?, (0, 0))?,
                (None, Some(cells)) => {
                    let cells = parse_cells(cells)?;
                    match domain {
                        Some(d) => LatticeState::new(d, cells)?,
                        None => LatticeState::unbounded(cells),
                    }
                }
                (None, None) => return Err(Error::InvalidParameter("ca needs cells or grid_file".into())),
            };
            let traj = ca_run(&initial, cfg.param_or("steps", 20usize)?, DEFAULT_CYCLE_WINDOW);
            w.write(&cfg.output_path(Some("sizes"), "csv"), &traj.sizes_csv())?;
            let mut cells = String::from("x,y\n");
            for (x, y) in traj.states.last().unwrap().active() {
                let _ = writeln!(cells, "{x},{y}");
            }
            w.write(&cfg.output_path(Some("final"), "csv"), &cells)?;
            w.json(&cfg.output_path(Some("cycle"), "json"), &traj.cycle)?;
        }
        "lattice-rays" => {
            let n = cfg.require_box()? as i64;
            let seeds = match cfg.param("seeds") {
                Some(s) => parse_lattice_seeds(s)?,
                None => random_lattice_seeds(n, cfg.param_or("random", 5usize)?, cfg.mark_p, cfg.master_seed)?,
            };
            let config = LatticeRayConfig::new(n, seeds)?;
            let horizon = cfg.horizon.map_or(2 * n as u64, |t| t as u64);
            let rays = lattice_ray_simulate(&config, horizon);
            let rows: Vec<LatticeRayRow> = rays
                .rays
                .iter()
                .map(|r| {
                    let ((x, y), d) = config.seeds()[r.seed];
                    LatticeRayRow {
                        seed: r.seed,
                        x,
                        y,
                        mark: d.code(),
                        side: r.side.symbol(),
                        length: r.length(),
                        stop: r.stop,
                    }
                })
                .collect();
            w.json(&cfg.output_path(None, "json"), &rows)?;
            let mut csv = String::from("t,ca_active,ray_points,shared\n");
            for r in compare_ca_with_rays(&config, horizon) {
                let _ = writeln!(csv, "{},{},{},{}", r.t, r.ca_active, r.ray_points, r.shared);
            }
            w.write(&cfg.output_path(Some("ca_compare"), "csv"), &csv)?;
            let svg = extras.svg.clone().unwrap_or_else(|| cfg.output_path(None, "svg"));
            w.write(&svg, &lattice_svg(&rays, &SvgStyle::default()))?;
        }
        other => return Err(Error::InvalidParameter(format!("unknown experiment {other:?}"))),
    }
    Ok((w.files, accepted))
}

/// Runs a resolved config and writes its manifest.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    run_with(cfg, &Extras::default())
}

fn run_with(cfg: &ExperimentConfig, extras: &Extras) -> Result<RunOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let (files, accepted) = match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| execute(cfg, extras))?,
        None => execute(cfg, extras)?,
    };
    let manifest = cfg.output_path(None, "manifest");
    let mut text = format!("# gilbert v{}\n", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "# wall_time_s = {:.3}", start.elapsed().as_secs_f64());
    text.push_str(&cfg.to_key_values());
    Writer { files: Vec::new() }.write(&manifest, &text)?;
    Ok(RunOutcome { files, manifest, accepted })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Degenerate(_) | Error::CoincidentPoints(..) | Error::NonGeneralPosition(_) => EXIT_DEGENERATE,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (program name first), runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = to_config(cli.command).and_then(|(cfg, extras)| run_with(&cfg, &extras));
    match result {
        Ok(out) => {
            for f in &out.files {
                println!("{}", f.display());
            }
            println!("{}", out.manifest.display());
            if out.accepted {
                EXIT_OK
            } else {
                eprintln!("acceptance check failed");
                EXIT_ACCEPTANCE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// `count` distinct random seeds in `{1..n−1}²` with fair marks.
pub fn random_lattice_config(n: i64, count: usize, master_seed: u64) -> Result<LatticeRayConfig> {
    LatticeRayConfig::new(n, random_lattice_seeds(n, count, 0.5, master_seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_round_trip() {
        let mut cfg = ExperimentConfig::defaults("cov").unwrap();
        cfg.set("u", "1,2").unwrap();
        cfg.set("master_seed", "9").unwrap();
        let back = ExperimentConfig::from_key_values(&cfg.to_key_values()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let pairs = parse_key_values("# header\n\nintensity = 2 # trailing\n").unwrap();
        assert_eq!(pairs, vec![("intensity".to_string(), "2".to_string())]);
        assert!(parse_key_values("nonsense").is_err());
    }

    #[test]
    fn mismatched_experiment_is_rejected() {
        let mut cfg = ExperimentConfig::defaults("tail").unwrap();
        assert!(cfg.set("experiment", "euler").is_err());
        assert!(ExperimentConfig::defaults("nope").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::defaults("euler").unwrap();
        cfg.replicates = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::defaults("euler").unwrap();
        cfg.mark_p = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn lattice_seed_parsing() {
        assert_eq!(
            parse_lattice_seeds("1,2,H;3,4,V").unwrap(),
            vec![((1, 2), Direction::Horizontal), ((3, 4), Direction::Vertical)]
        );
        assert!(parse_lattice_seeds("1,2").is_err());
        assert_eq!(parse_cells("0,0;-1,2").unwrap(), vec![(0, 0), (-1, 2)]);
    }

    #[test]
    fn random_lattice_seeds_are_distinct_and_interior() {
        let s = random_lattice_seeds(8, 20, 0.5, 3).unwrap();
        assert_eq!(s.len(), 20);
        assert!(LatticeRayConfig::new(8, s).is_ok());
        assert!(random_lattice_seeds(3, 5, 0.5, 3).is_err());
    }
}
