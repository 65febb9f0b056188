use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "orbit",
    version,
    about = "Ordering-based correction and cross-scale transfer of water/land label stacks"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "ORBIT_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn an elevation ordering (ORBO) from a label stack.
    LearnOrder(LearnOrder),
    /// Convert an elevation grid (ORBE) into an ordering (ORBO).
    ImportDem(ImportDem),
    /// Correct every timestep of a stack; with --alpha, smooth levels over time.
    Correct(Correct),
    /// Transfer a coarse stack to fine resolution.
    Fuse(Fuse),
    /// Generate a synthetic lake and its ground-truth stack.
    Simulate(Simulate),
    /// Inject correlated label noise and missing entries.
    Perturb(Perturb),
    /// Aggregate a fine stack to coarse cells by water-count threshold.
    Aggregate(Aggregate),
    /// Score an estimate against ground truth.
    Eval(Eval),
    /// Mismatch and transition costs over a range of smoothing weights.
    AlphaSweep(AlphaSweepCmd),
    /// Closed-form probabilities of locating the boundary contours.
    Bound(Bound),
    /// Monte Carlo check of the boundary bounds on perfect inputs.
    McBound(McBound),
}

#[derive(Debug, Args)]
pub struct LearnOrder {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
}

#[derive(Debug, Args)]
pub struct ImportDem {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct Correct {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub ordering: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_parser = non_negative)]
    pub alpha: Option<f64>,
    /// Also write the chosen level per timestep as CSV.
    #[arg(long)]
    pub levels: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Policy {
    Keep,
    FillLand,
    FillMid,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("threshold").required(true).args(["wth", "auto_wth"])))]
#[command(group(ArgGroup::new("fine_source").required(true).args(["ordering", "training"])))]
pub struct Fuse {
    /// Coarse label stack.
    #[arg(long)]
    pub input: PathBuf,
    /// Fine ordering (ORBO).
    #[arg(long)]
    pub ordering: Option<PathBuf>,
    /// Fine training stack to learn the ordering from.
    #[arg(long)]
    pub training: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long)]
    pub factor: usize,
    /// Fine row,col of the first cell's top-left pixel.
    #[arg(long, value_parser = parse_offset, default_value = "0,0")]
    pub offset: (usize, usize),
    #[arg(long)]
    pub wth: Option<usize>,
    #[arg(long)]
    pub auto_wth: bool,
    /// Score threshold candidates on every n-th timestep.
    #[arg(long, default_value_t = 1)]
    pub wth_stride: usize,
    #[arg(long, value_parser = non_negative)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum, default_value_t = Policy::Keep)]
    pub unknown_policy: Policy,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BasinShape {
    Bowl,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Dynamics {
    Reservoir,
    Sinusoid,
    RandomWalk,
}

#[derive(Debug, Args)]
pub struct Simulate {
    #[arg(long, default_value_t = 120)]
    pub rows: usize,
    #[arg(long, default_value_t = 120)]
    pub cols: usize,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = BasinShape::Gaussian)]
    pub bathymetry: BasinShape,
    /// Gaussian components.
    #[arg(long, default_value_t = 4)]
    pub components: usize,
    #[arg(long, value_enum, default_value_t = Dynamics::Reservoir)]
    pub pattern: Dynamics,
    /// Low / high water as fractions of the pixel count.
    #[arg(long, default_value_t = 0.12)]
    pub low: f64,
    #[arg(long, default_value_t = 0.4)]
    pub high: f64,
    /// Flood peaks (reservoir) or period in timesteps (sinusoid).
    #[arg(long, default_value_t = 4)]
    pub peaks: usize,
    #[arg(long, default_value_t = 50.0)]
    pub period: f64,
    #[arg(long)]
    pub seed: u64,
    /// Ground-truth stack.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub elevation_out: Option<PathBuf>,
    #[arg(long)]
    pub ordering_out: Option<PathBuf>,
    #[arg(long)]
    pub levels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Perturb {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Fraction of pixel-timesteps to perturb.
    #[arg(long, value_parser = unit_interval)]
    pub noise: f64,
    #[arg(long, default_value_t = 12.0)]
    pub blob_size: f64,
    #[arg(long, default_value_t = 2.0)]
    pub run_length: f64,
    #[arg(long, value_parser = unit_interval, default_value_t = 0.3)]
    pub missing_share: f64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("threshold").required(true).args(["wth", "wth_fraction"])))]
pub struct Aggregate {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub factor: usize,
    #[arg(long, value_parser = parse_offset, default_value = "0,0")]
    pub offset: (usize, usize),
    #[arg(long)]
    pub wth: Option<usize>,
    /// Threshold as a fraction of the cell size.
    #[arg(long, value_parser = unit_interval)]
    pub wth_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Eval {
    #[arg(long)]
    pub estimate: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Report CSV (stdout if omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Per-timestep water / water+unknown counts of the estimate.
    #[arg(long)]
    pub area: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AlphaSweepCmd {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub ordering: PathBuf,
    /// Inclusive range `start:step:stop`.
    #[arg(long, value_parser = parse_range, default_value = "0:0.1:2")]
    pub alphas: AlphaRange,
    /// Sweep CSV (stdout if omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Bound {
    #[arg(long)]
    pub gr: usize,
    #[arg(long = "C", id = "C")]
    pub c: usize,
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct McBound {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub lakes: usize,
    #[arg(long, default_value_t = 120)]
    pub side: usize,
    #[arg(long, value_delimiter = ',', default_value = "10,20")]
    pub factors: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75")]
    pub wth_fractions: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.01,0.02,0.04,0.08,0.16,0.32"
    )]
    pub extents: Vec<f64>,
    /// Largest contour tolerance summarised.
    #[arg(long, default_value_t = 2)]
    pub max_k: usize,
    /// Per-trial CSV.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"))
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{s} is not a finite non-negative number"))
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{s} is outside [0, 1]"))
    }
}

fn parse_offset(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(',')
        .ok_or_else(|| format!("expected ROW,COL, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(r)?, p(c)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaRange(pub Vec<f64>);

/// `start:step:stop`, inclusive of `stop` up to rounding. Values are
/// computed as `start + i * step` and rounded to 12 decimals so that
/// `0:0.1:2` yields exactly `0.3` rather than `0.30000000000000004`.
pub fn parse_range(s: &str) -> Result<AlphaRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, step, stop] = parts[..] else {
        return Err(format!("expected start:step:stop, got {s:?}"));
    };
    let (start, step, stop) = (non_negative(start)?, parse_f64(step)?, non_negative(stop)?);
    if !(step.is_finite() && step > 0.0) || stop < start {
        return Err(format!("need step > 0 and stop >= start in {s:?}"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(format!("{s:?} expands to more than 100000 values"));
    }
    Ok(AlphaRange(
        (0..=n)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect(),
    ))
}
