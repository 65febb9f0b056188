//! Synthetic lakes: bathymetry, water-level dynamics, block aggregation and
//! spatio-temporally correlated label noise.
//!
//! Every generator is a pure function of its parameters and seed
//! (`ChaCha8` streams), so outputs are identical across runs and platforms.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{invalid, Result};
use crate::raster::{
    labels_at_level, ElevationGrid, ElevationOrdering, Label, LabelStack, LevelSeries,
};
use crate::scale::MappingGrid;

/// Shape of a synthetic basin.
#[derive(Debug, Clone, PartialEq)]
pub enum Bathymetry {
    /// Paraboloid `(r - cr)^2 + (anisotropy * (c - cc))^2`. The centre
    /// defaults to the grid centre.
    Bowl {
        center: Option<(f64, f64)>,
        anisotropy: f64,
    },
    /// Negated sum of random Gaussian depressions on a shallow bowl, shifted
    /// so the deepest point sits at zero.
    GaussianMix {
        components: usize,
        /// Bump widths, as fractions of the shorter grid side.
        sigma_range: (f64, f64),
        /// Weight of the background bowl that keeps the rim sloping outward.
        rim: f64,
    },
}

impl Bathymetry {
    pub fn bowl() -> Self {
        Bathymetry::Bowl {
            center: None,
            anisotropy: 1.0,
        }
    }

    pub fn gaussian_mix(components: usize) -> Self {
        Bathymetry::GaussianMix {
            components,
            sigma_range: (0.08, 0.2),
            rim: 0.05,
        }
    }
}

pub fn gen_bathymetry(
    kind: &Bathymetry,
    rows: usize,
    cols: usize,
    seed: u64,
) -> Result<ElevationGrid> {
    if rows < 4 || cols < 4 {
        return Err(invalid(format!(
            "bathymetry grid must be at least 4x4, got {rows}x{cols}"
        )));
    }
    let cr = (rows as f64 - 1.0) / 2.0;
    let cc = (cols as f64 - 1.0) / 2.0;
    let mut z = Vec::with_capacity(rows * cols);
    match *kind {
        Bathymetry::Bowl { center, anisotropy } => {
            if !(anisotropy.is_finite() && anisotropy > 0.0) {
                return Err(invalid("bowl anisotropy must be positive"));
            }
            let (cr, cc) = center.unwrap_or((cr, cc));
            if !(cr.is_finite() && cc.is_finite()) {
                return Err(invalid("bowl centre must be finite"));
            }
            for r in 0..rows {
                for c in 0..cols {
                    let dr = r as f64 - cr;
                    let dc = anisotropy * (c as f64 - cc);
                    z.push(dr * dr + dc * dc);
                }
            }
        }
        Bathymetry::GaussianMix {
            components,
            sigma_range: (lo, hi),
            rim,
        } => {
            if components == 0 {
                return Err(invalid("gaussian mix needs at least one component"));
            }
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) || !(rim.is_finite() && rim >= 0.0) {
                return Err(invalid("invalid gaussian mix parameters"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let side = rows.min(cols) as f64;
            let bumps: Vec<(f64, f64, f64, f64)> = (0..components)
                .map(|_| {
                    // keep centres away from the border so the basin closes
                    let r = rng.random_range(0.25..0.75) * rows as f64;
                    let c = rng.random_range(0.25..0.75) * cols as f64;
                    let sigma = side
                        * if hi > lo {
                            rng.random_range(lo..hi)
                        } else {
                            lo
                        };
                    let amp = rng.random_range(0.5..1.5);
                    (r, c, sigma, amp)
                })
                .collect();
            let norm = cr * cr + cc * cc;
            for r in 0..rows {
                for c in 0..cols {
                    let (rf, cf) = (r as f64, c as f64);
                    let depth: f64 = bumps
                        .iter()
                        .map(|&(br, bc, s, a)| {
                            let d2 = (rf - br).powi(2) + (cf - bc).powi(2);
                            a * (-d2 / (2.0 * s * s)).exp()
                        })
                        .sum();
                    let bowl = ((rf - cr).powi(2) + (cf - cc).powi(2)) / norm;
                    z.push(rim * bowl - depth);
                }
            }
            let min = z.iter().copied().fold(f64::INFINITY, f64::min);
            z.iter_mut().for_each(|v| *v -= min);
        }
    }
    ElevationGrid::new(rows, cols, z)
}

/// One rectangular excursion above the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pulse {
    pub start: usize,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LevelPattern {
    /// `base + amplitude * sin(2 pi t / period + phase)`, rounded.
    Sinusoid {
        base: f64,
        amplitude: f64,
        period: f64,
        phase: f64,
    },
    /// Symmetric steps whose magnitude is geometric with mean `step_scale`;
    /// reflected at `0` and `N`.
    RandomWalk { start: usize, step_scale: f64 },
    /// Constant baseline plus rectangular pulses (heights add where pulses
    /// overlap).
    Pulses { baseline: usize, pulses: Vec<Pulse> },
    /// Seasonal cycle between `low * N` and `high * N` with a few random
    /// flood peaks of different widths on top.
    Reservoir { low: f64, high: f64, peaks: usize },
}

pub fn simulate_level_series(
    steps: usize,
    n: usize,
    pattern: &LevelPattern,
    seed: u64,
) -> Result<LevelSeries> {
    if steps == 0 {
        return Err(invalid("level series needs at least one timestep"));
    }
    let clamp = |v: f64| v.round().clamp(0.0, n as f64) as usize;
    let levels: Vec<usize> = match pattern {
        &LevelPattern::Sinusoid {
            base,
            amplitude,
            period,
            phase,
        } => {
            if !(period.is_finite() && period > 0.0)
                || ![base, amplitude, phase].iter().all(|v| v.is_finite())
            {
                return Err(invalid(
                    "sinusoid needs a positive period and finite parameters",
                ));
            }
            (0..steps)
                .map(|t| clamp(base + amplitude * (2.0 * PI * t as f64 / period + phase).sin()))
                .collect()
        }
        &LevelPattern::RandomWalk { start, step_scale } => {
            if start > n || !(step_scale > 0.0 && step_scale.is_finite()) {
                return Err(invalid(
                    "random walk needs start <= N and a positive step scale",
                ));
            }
            let geom =
                Geometric::new(1.0 / (1.0 + step_scale)).map_err(|e| invalid(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut level = start as i64;
            let top = n as i64;
            let mut out = Vec::with_capacity(steps);
            out.push(start);
            for _ in 1..steps {
                let mag = geom.sample(&mut rng) as i64;
                let mut next = if rng.random_bool(0.5) {
                    level + mag
                } else {
                    level - mag
                };
                if top == 0 {
                    next = 0;
                } else {
                    // fold back into [0, top]
                    let period = 2 * top;
                    next = next.rem_euclid(period);
                    if next > top {
                        next = period - next;
                    }
                }
                level = next;
                out.push(level as usize);
            }
            out
        }
        LevelPattern::Pulses { baseline, pulses } => {
            let mut out = vec![*baseline; steps];
            for p in pulses {
                for level in out.iter_mut().skip(p.start).take(p.width) {
                    *level += p.height;
                }
            }
            out.into_iter().map(|l| l.min(n)).collect()
        }
        &LevelPattern::Reservoir { low, high, peaks } => {
            if !(0.0..=1.0).contains(&low) || !(low..=1.0).contains(&high) {
                return Err(invalid("reservoir needs 0 <= low <= high <= 1"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let span = high - low;
            let season = steps as f64 / 2.0;
            let mut frac: Vec<f64> = (0..steps)
                .map(|t| low + 0.6 * span * (0.5 - 0.5 * (2.0 * PI * t as f64 / season).cos()))
                .collect();
            for _ in 0..peaks {
                let width = rng.random_range(3..=(steps / 8).max(4));
                let centre = rng.random_range(0..steps);
                let height = rng.random_range(0.15..0.4) * span;
                for (t, f) in frac.iter_mut().enumerate() {
                    let d = (t as f64 - centre as f64) / width as f64;
                    *f += height * (-d * d).exp();
                }
            }
            frac.into_iter()
                .map(|f| clamp(f.min(high) * n as f64))
                .collect()
        }
    };
    LevelSeries::new(levels, n)
}

/// Consistent frames at the given levels.
pub fn render_stack(ordering: &ElevationOrdering, levels: &LevelSeries) -> Result<LabelStack> {
    if levels.is_empty() {
        return Err(invalid("cannot render an empty level series"));
    }
    let mut data = Vec::with_capacity(ordering.len() * levels.len());
    for &theta in levels.levels() {
        data.extend(labels_at_level(ordering, theta)?);
    }
    LabelStack::new(ordering.rows(), ordering.cols(), levels.len(), data)
}

/// Thresholded block aggregation: a cell is water iff at least `wth` of its
/// members are water.
pub fn aggregate_to_lsr(fine: &LabelStack, grid: &MappingGrid, wth: usize) -> Result<LabelStack> {
    grid.check_fine(fine.rows(), fine.cols())?;
    grid.check_wth(wth)?;
    fine.reject_incomplete()?;
    let mut data = Vec::with_capacity(grid.cells() * fine.timesteps());
    for frame in fine.frames() {
        for cell in 0..grid.cells() {
            let water = grid
                .members(cell)
                .filter(|&p| frame[p] == Label::Water)
                .count();
            data.push(if water >= wth {
                Label::Water
            } else {
                Label::Land
            });
        }
    }
    LabelStack::new(
        grid.coarse_rows(),
        grid.coarse_cols(),
        fine.timesteps(),
        data,
    )
}

/// Correlated noise model: contiguous pixel blobs perturbed over runs of
/// consecutive timesteps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Fraction of pixel-timesteps to perturb.
    pub target_fraction: f64,
    /// Mean blob size in pixels (geometric, >= 1).
    pub blob_mean_size: f64,
    /// Mean run length in timesteps (geometric, >= 1).
    pub run_mean_length: f64,
    /// Probability that a perturbed entry becomes missing rather than flipped.
    pub missing_share: f64,
}

impl NoiseParams {
    fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.target_fraction) || !unit(self.missing_share) {
            return Err(invalid("noise fractions must lie in [0, 1]"));
        }
        if !(self.blob_mean_size >= 1.0 && self.blob_mean_size.is_finite())
            || !(self.run_mean_length >= 1.0 && self.run_mean_length.is_finite())
        {
            return Err(invalid("blob size and run length means must be >= 1"));
        }
        Ok(())
    }
}

pub fn inject_noise(stack: &LabelStack, params: &NoiseParams, seed: u64) -> Result<LabelStack> {
    inject_noise_traced(stack, params, seed).map(|(s, _)| s)
}

/// [`inject_noise`], also returning which pixel-timesteps were perturbed.
///
/// Repeatedly grows a blob from a random seed pixel by randomised frontier
/// expansion, picks a random start time and run length, and perturbs every
/// not-yet-perturbed observed entry of the blob x run region: missing with
/// probability `missing_share`, flipped otherwise. Stops as soon as the
/// target count is reached. Entries that are already missing are never
/// touched.
pub fn inject_noise_traced(
    stack: &LabelStack,
    params: &NoiseParams,
    seed: u64,
) -> Result<(LabelStack, Vec<bool>)> {
    params.validate()?;
    stack.reject_unknown()?;
    let total = stack.data().len();
    let observable = total - stack.count(Label::Missing);
    let target = ((params.target_fraction * total as f64).ceil() as usize).min(observable);
    let mut out = stack.clone();
    let mut perturbed = vec![false; total];
    if target == 0 {
        return Ok((out, perturbed));
    }

    let blob_size =
        Geometric::new(1.0 / params.blob_mean_size).map_err(|e| invalid(e.to_string()))?;
    let run_length =
        Geometric::new(1.0 / params.run_mean_length).map_err(|e| invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, cols, steps) = (stack.rows(), stack.cols(), stack.timesteps());
    let n = rows * cols;

    let mut stamp = vec![0u32; n];
    let mut generation = 0u32;
    let mut blob = Vec::new();
    let mut frontier = Vec::new();
    let mut done = 0usize;

    while done < target {
        generation += 1;
        let size = 1 + blob_size.sample(&mut rng) as usize;
        let origin = rng.random_range(0..n);
        blob.clear();
        frontier.clear();
        frontier.push(origin);
        stamp[origin] = generation;
        while blob.len() < size && !frontier.is_empty() {
            let p = frontier.swap_remove(rng.random_range(0..frontier.len()));
            blob.push(p);
            let (r, c) = (p / cols, p % cols);
            let neighbours = [
                (r > 0).then(|| p - cols),
                (r + 1 < rows).then(|| p + cols),
                (c > 0).then(|| p - 1),
                (c + 1 < cols).then(|| p + 1),
            ];
            for q in neighbours.into_iter().flatten() {
                if stamp[q] != generation {
                    stamp[q] = generation;
                    frontier.push(q);
                }
            }
        }

        let start = rng.random_range(0..steps);
        let len = 1 + run_length.sample(&mut rng) as usize;
        'region: for t in start..(start + len).min(steps) {
            for &p in &blob {
                let idx = t * n + p;
                if perturbed[idx] || !stack.data()[idx].is_observed() {
                    continue;
                }
                perturbed[idx] = true;
                let slot = &mut out.frame_mut(t)[p];
                *slot = if rng.random_bool(params.missing_share) {
                    Label::Missing
                } else {
                    slot.inverted()
                };
                done += 1;
                if done == target {
                    break 'region;
                }
            }
        }
    }
    Ok((out, perturbed))
}
