//! Evaluation: accuracy metrics, perimeter-normalised unknown counts,
//! majority-filter baselines, the closed-form boundary-detection bounds, and
//! the seeded experiments that exercise them.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, mismatch, OrbitError, Result};
use crate::orbcor::stack_profiles;
use crate::raster::{
    labels_at_level, ordering_from_elevation, ElevationGrid, ElevationOrdering, Label, LabelStack,
};
use crate::scale::{fuse, FineOrdering, FusionConfig, MappingGrid, UnknownPolicy};
use crate::synth::{
    aggregate_to_lsr, gen_bathymetry, inject_noise, render_stack, simulate_level_series,
    Bathymetry, LevelPattern, NoiseParams,
};
use crate::temporal::{alpha_sweep, suggest_alpha};

/// Unknown / wrong / total percentages over all pixel-timesteps.
///
/// Missing labels in the estimate count as unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyReport {
    pub unknown_count: u64,
    pub error_count: u64,
    pub total_count: u64,
    pub pct_unknown: f64,
    pub pct_error: f64,
    pub pct_total: f64,
}

impl AccuracyReport {
    fn from_counts(unknown_count: u64, error_count: u64, total_count: u64) -> Self {
        let pct = |c: u64| 100.0 * c as f64 / total_count as f64;
        Self {
            unknown_count,
            error_count,
            total_count,
            pct_unknown: pct(unknown_count),
            pct_error: pct(error_count),
            pct_total: pct(unknown_count + error_count),
        }
    }
}

pub fn accuracy_report(est: &LabelStack, truth: &LabelStack) -> Result<AccuracyReport> {
    accuracy_report_masked(est, truth, None)
}

/// [`accuracy_report`] restricted to pixels where `basin` is true.
pub fn accuracy_report_masked(
    est: &LabelStack,
    truth: &LabelStack,
    basin: Option<&[bool]>,
) -> Result<AccuracyReport> {
    if !est.same_shape(truth) {
        return Err(mismatch(truth.shape_string(), est.shape_string()));
    }
    if let Some(mask) = basin {
        if mask.len() != truth.pixels() {
            return Err(mismatch(truth.pixels(), mask.len()));
        }
    }
    truth.reject_incomplete()?;
    let n = truth.pixels();
    let (mut unknown, mut wrong, mut total) = (0u64, 0u64, 0u64);
    for (i, (&e, &t)) in est.data().iter().zip(truth.data()).enumerate() {
        if basin.is_some_and(|m| !m[i % n]) {
            continue;
        }
        total += 1;
        match e {
            Label::Unknown | Label::Missing => unknown += 1,
            _ if e != t => wrong += 1,
            _ => {}
        }
    }
    if total == 0 {
        return Err(invalid("no pixels to evaluate"));
    }
    Ok(AccuracyReport::from_counts(unknown, wrong, total))
}

/// Water pixels with at least one non-water 4-neighbour; the grid border
/// counts as non-water.
pub fn perimeter(frame: &[Label], rows: usize, cols: usize) -> Result<usize> {
    boundary_pixels(frame, rows, cols).map(|b| b.len())
}

fn boundary_pixels(frame: &[Label], rows: usize, cols: usize) -> Result<Vec<usize>> {
    if frame.len() != rows * cols {
        return Err(mismatch(rows * cols, frame.len()));
    }
    if let Some(p) = frame.iter().position(|l| !l.is_observed()) {
        return Err(match frame[p] {
            Label::Missing => OrbitError::MissingLabel { pixel: p },
            _ => OrbitError::UnknownLabel { pixel: p },
        });
    }
    let water = |r: usize, c: usize| frame[r * cols + c] == Label::Water;
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if !water(r, c) {
                continue;
            }
            let edge = r == 0
                || c == 0
                || r + 1 == rows
                || c + 1 == cols
                || !water(r - 1, c)
                || !water(r + 1, c)
                || !water(r, c - 1)
                || !water(r, c + 1);
            if edge {
                out.push(r * cols + c);
            }
        }
    }
    Ok(out)
}

/// Coarse cells holding at least one boundary water pixel of `truth`.
pub fn coarse_perimeter(truth: &[Label], grid: &MappingGrid) -> Result<usize> {
    let boundary = boundary_pixels(truth, grid.fine_rows(), grid.fine_cols())?;
    let mut hit = vec![false; grid.cells()];
    for p in boundary {
        if let Some(c) = grid.cell_of(p) {
            hit[c] = true;
        }
    }
    Ok(hit.iter().filter(|&&h| h).count())
}

/// Unknown count of `est` divided by the perimeter of `truth`.
pub fn u_ratio(est: &[Label], truth: &[Label], rows: usize, cols: usize) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(mismatch(truth.len(), est.len()));
    }
    let unknown = est.iter().filter(|&&l| l == Label::Unknown).count();
    let perim = perimeter(truth, rows, cols)?;
    match (unknown, perim) {
        (0, _) => Ok(0.0),
        (_, 0) => Err(invalid(format!(
            "{unknown} unknown pixels but the true extent has zero perimeter"
        ))),
        (u, p) => Ok(u as f64 / p as f64),
    }
}

/// Per timestep `(water, water + unknown)` pixel counts.
pub fn area_series(stack: &LabelStack) -> Vec<(usize, usize)> {
    stack
        .frames()
        .map(|f| {
            let water = f.iter().filter(|&&l| l == Label::Water).count();
            let unknown = f.iter().filter(|&&l| l == Label::Unknown).count();
            (water, water + unknown)
        })
        .collect()
}

fn vote(original: Label, water: u32, land: u32) -> Label {
    use std::cmp::Ordering::*;
    match water.cmp(&land) {
        Greater => Label::Water,
        Less => Label::Land,
        Equal => original,
    }
}

/// Majority vote over the clipped `(2r+1) x (2r+1)` window of every frame,
/// ignoring missing entries. Ties keep the original label.
pub fn majority_spatial(stack: &LabelStack, radius: usize) -> Result<LabelStack> {
    stack.reject_unknown()?;
    let (rows, cols) = (stack.rows(), stack.cols());
    let w = cols + 1;
    let mut out = stack.clone();
    // integral images of water and land counts
    let mut water = vec![0u32; (rows + 1) * w];
    let mut land = vec![0u32; (rows + 1) * w];
    for t in 0..stack.timesteps() {
        let frame = stack.frame(t);
        for r in 0..rows {
            for c in 0..cols {
                let l = frame[r * cols + c];
                let i = (r + 1) * w + c + 1;
                water[i] =
                    water[i - 1] + water[i - w] - water[i - w - 1] + (l == Label::Water) as u32;
                land[i] = land[i - 1] + land[i - w] - land[i - w - 1] + (l == Label::Land) as u32;
            }
        }
        let sum = |table: &[u32], r0: usize, c0: usize, r1: usize, c1: usize| {
            table[r1 * w + c1] + table[r0 * w + c0] - table[r0 * w + c1] - table[r1 * w + c0]
        };
        let dst = out.frame_mut(t);
        for r in 0..rows {
            let (r0, r1) = (r.saturating_sub(radius), (r + radius + 1).min(rows));
            for c in 0..cols {
                let (c0, c1) = (c.saturating_sub(radius), (c + radius + 1).min(cols));
                let p = r * cols + c;
                dst[p] = vote(
                    frame[p],
                    sum(&water, r0, c0, r1, c1),
                    sum(&land, r0, c0, r1, c1),
                );
            }
        }
    }
    Ok(out)
}

/// Majority vote over the clipped window `t - w ..= t + w` of every pixel.
pub fn majority_temporal(stack: &LabelStack, half_window: usize) -> Result<LabelStack> {
    stack.reject_unknown()?;
    let (n, steps) = (stack.pixels(), stack.timesteps());
    let mut out = stack.clone();
    let mut water = vec![0u32; steps + 1];
    let mut land = vec![0u32; steps + 1];
    for p in 0..n {
        for t in 0..steps {
            let l = stack.frame(t)[p];
            water[t + 1] = water[t] + (l == Label::Water) as u32;
            land[t + 1] = land[t] + (l == Label::Land) as u32;
        }
        for t in 0..steps {
            let (t0, t1) = (
                t.saturating_sub(half_window),
                (t + half_window + 1).min(steps),
            );
            out.frame_mut(t)[p] = vote(
                stack.frame(t)[p],
                water[t1] - water[t0],
                land[t1] - land[t0],
            );
        }
    }
    Ok(out)
}

/// Inputs of the boundary-detection bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundQuery {
    /// Fine pixels per coarse cell.
    pub gr: usize,
    /// Coarse cells intersecting the last filled contour.
    pub c: usize,
    /// Contour tolerance.
    pub k: usize,
}

impl BoundQuery {
    fn validate(&self) -> Result<()> {
        if self.gr == 0 || self.c == 0 || self.k > self.gr {
            return Err(invalid(format!(
                "bound query needs gr >= 1, C >= 1 and k <= gr (got gr={}, C={}, k={})",
                self.gr, self.c, self.k
            )));
        }
        Ok(())
    }
}

/// Probability that the detected water contour lies within `k` contours of
/// the true one: `1 - (1 - (k+1)/(gr+1))^C`.
pub fn bound_within_k(q: &BoundQuery) -> Result<f64> {
    q.validate()?;
    let miss = 1.0 - (q.k as f64 + 1.0) / (q.gr as f64 + 1.0);
    let c = i32::try_from(q.c).map_err(|_| invalid("C too large"))?;
    Ok(1.0 - miss.powi(c))
}

/// Probability that both boundary contours are found within `k`: the square
/// of [`bound_within_k`].
pub fn bound_joint(q: &BoundQuery) -> Result<f64> {
    bound_within_k(q).map(|p| p * p)
}

/// Spearman rank correlation (average ranks for ties). `None` when either
/// side is constant or the inputs are shorter than two.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Linear-interpolation quantile of unsorted values, `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// splitmix64 finaliser, used to derive independent per-trial seeds.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Parameters of the perfect-input boundary experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    /// Side of the fine lattice; must be divisible by every factor.
    pub lattice_side: usize,
    /// Number of random lakes. Even lakes are anisotropic bowls with a
    /// jittered centre, odd lakes are Gaussian mixtures.
    pub lakes: usize,
    /// Filled area as fractions of `lattice_side^2`.
    pub extents: Vec<f64>,
    /// Block factors `s` (`gr = s^2`).
    pub factors: Vec<usize>,
    /// Thresholds as fractions of `gr`.
    pub wth_fractions: Vec<f64>,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            lattice_side: 120,
            lakes: 50,
            extents: vec![0.01, 0.02, 0.04, 0.08, 0.16, 0.32],
            factors: vec![10, 20],
            wth_fractions: vec![0.5, 0.75],
            seed: 0,
        }
    }
}

/// One lake x extent x grid configuration of [`mc_boundary_experiment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McRow {
    pub lake: usize,
    pub extent_fraction: f64,
    pub factor: usize,
    pub gr: usize,
    pub wth: usize,
    pub offset: (usize, usize),
    /// True water level (filled pixels).
    pub extent_size: usize,
    /// Fine perimeter of the true extent; also the contour width used for
    /// layer counting.
    pub perimeter: usize,
    /// Coarse cells intersecting the last filled contour.
    pub coarse_perimeter: usize,
    pub unknown_count: usize,
    pub u_ratio: f64,
    /// Smallest `k` such that every unknown lies within `k` contours beyond
    /// the two boundary contours.
    pub layers_to_containment: usize,
    pub pct_error: f64,
}

impl McRow {
    /// Unknowns confined to the boundary contours plus `k` more on each side.
    pub fn contained_within(&self, k: usize) -> bool {
        self.layers_to_containment <= k
    }
}

fn mc_bathymetry(lake: usize, side: usize, seed: u64) -> Result<ElevationGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = if lake.is_multiple_of(2) {
        let half = (side as f64 - 1.0) / 2.0;
        Bathymetry::Bowl {
            center: Some((
                half + rng.random_range(-0.1..0.1) * side as f64,
                half + rng.random_range(-0.1..0.1) * side as f64,
            )),
            anisotropy: rng.random_range(0.6..1.6),
        }
    } else {
        Bathymetry::GaussianMix {
            components: rng.random_range(2..=5),
            sigma_range: (0.08, 0.2),
            rim: 0.05,
        }
    };
    gen_bathymetry(&kind, side, side, rng.random())
}

fn crop(elev: &ElevationGrid, rows: usize, cols: usize) -> Result<ElevationGrid> {
    let v: Vec<f64> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| elev.get(r, c))
        .collect();
    ElevationGrid::new(rows, cols, v)
}

/// Perfect-input fusion over random lakes and random lattice offsets.
///
/// Each lake is drawn once on a canvas large enough for every offset; for
/// each factor a uniform offset in `[0, s)^2` is drawn and the canvas is
/// cropped to `(side + offset)` so the lattice starts at the offset while the
/// lake stays put. Rows are ordered by lake, factor, threshold, extent.
pub fn mc_boundary_experiment(config: &McConfig) -> Result<Vec<McRow>> {
    if config.lakes == 0
        || config.extents.is_empty()
        || config.factors.is_empty()
        || config.wth_fractions.is_empty()
    {
        return Err(invalid(
            "experiment needs at least one lake, extent, factor and threshold",
        ));
    }
    let side = config.lattice_side;
    let max_factor = *config.factors.iter().max().expect("non-empty");
    for &s in &config.factors {
        if s == 0 || !side.is_multiple_of(s) {
            return Err(invalid(format!(
                "lattice side {side} not divisible by factor {s}"
            )));
        }
    }
    if config.extents.iter().any(|e| !(0.0..=1.0).contains(e))
        || config
            .wth_fractions
            .iter()
            .any(|f| !(*f > 0.0 && *f <= 1.0))
    {
        return Err(invalid(
            "extents must lie in [0, 1] and threshold fractions in (0, 1]",
        ));
    }
    let canvas = side + max_factor - 1;

    let per_lake = (0..config.lakes)
        .into_par_iter()
        .map(|lake| -> Result<Vec<McRow>> {
            let lake_seed = derive_seed(config.seed, lake as u64);
            let elev = mc_bathymetry(lake, canvas, lake_seed)?;
            let mut rows = Vec::new();
            for (fi, &s) in config.factors.iter().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(lake_seed, 1 + fi as u64));
                let offset = (rng.random_range(0..s), rng.random_range(0..s));
                let (fr, fc) = (side + offset.0, side + offset.1);
                let pi_h = ordering_from_elevation(&crop(&elev, fr, fc)?)?;
                let grid = MappingGrid::new(fr, fc, s, offset)?;
                let gr = grid.gr();
                for &wf in &config.wth_fractions {
                    let wth = ((wf * gr as f64).round() as usize).clamp(1, gr);
                    for &ef in &config.extents {
                        let theta = (ef * (side * side) as f64).round() as usize;
                        rows.push(mc_trial(lake, ef, &pi_h, &grid, wth, theta)?);
                    }
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_lake.into_iter().flatten().collect())
}

fn mc_trial(
    lake: usize,
    extent_fraction: f64,
    pi_h: &ElevationOrdering,
    grid: &MappingGrid,
    wth: usize,
    theta: usize,
) -> Result<McRow> {
    let truth = LabelStack::new(pi_h.rows(), pi_h.cols(), 1, labels_at_level(pi_h, theta)?)?;
    let coarse = aggregate_to_lsr(&truth, grid, wth)?;
    let config = FusionConfig {
        wth: Some(wth),
        ..Default::default()
    };
    let out = fuse(
        &coarse,
        FineOrdering::Known(pi_h),
        grid.factor(),
        grid.offset(),
        &config,
    )?;
    let report = accuracy_report(&out.fine, &truth)?;
    let (rows, cols) = (pi_h.rows(), pi_h.cols());
    let perim = perimeter(truth.frame(0), rows, cols)?;
    let unknown = out.pivots[0].unknown_range(pi_h.len());
    let layers = if unknown.is_empty() || perim == 0 {
        0
    } else {
        let deeper = theta.saturating_sub(unknown.start).div_ceil(perim);
        let shallower = unknown.end.saturating_sub(theta).div_ceil(perim);
        deeper.max(shallower).saturating_sub(1)
    };
    let unknown_count = unknown.len();
    Ok(McRow {
        lake,
        extent_fraction,
        factor: grid.factor(),
        gr: grid.gr(),
        wth,
        offset: grid.offset(),
        extent_size: theta,
        perimeter: perim,
        coarse_perimeter: coarse_perimeter(truth.frame(0), grid)?,
        unknown_count,
        u_ratio: u_ratio(out.fine.frame(0), truth.frame(0), rows, cols)?,
        layers_to_containment: layers,
        pct_error: report.pct_error,
    })
}

/// Setup of the noise-robustness comparison on one synthetic reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStudy {
    pub side: usize,
    pub factor: usize,
    pub steps: usize,
    /// Seed of the lake shape and its dynamics.
    pub lake_seed: u64,
    pub noise_levels: Vec<f64>,
    pub seeds: usize,
    pub blob_mean_size: f64,
    pub run_mean_length: f64,
    pub missing_share: f64,
    pub true_wth_fraction: f64,
    /// Weights scanned to pick the smoothing weight per run.
    pub alphas: Vec<f64>,
    pub spatial_radius: usize,
    pub temporal_half_window: usize,
}

impl Default for NoiseStudy {
    fn default() -> Self {
        Self {
            side: 120,
            factor: 10,
            steps: 200,
            lake_seed: 7,
            noise_levels: vec![0.05, 0.1, 0.2, 0.3],
            seeds: 10,
            blob_mean_size: 12.0,
            run_mean_length: 2.0,
            missing_share: 0.3,
            true_wth_fraction: 0.5,
            alphas: (0..=20).map(|i| i as f64 / 10.0).collect(),
            spatial_radius: 1,
            temporal_half_window: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    OrbitS,
    OrbitSt,
    TemporalMajority,
    SpatialMajority,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::OrbitS => "orbit-s",
            Method::OrbitSt => "orbit-st",
            Method::TemporalMajority => "temporal-majority",
            Method::SpatialMajority => "spatial-majority",
        }
    }
}

/// One method on one noisy realisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRun {
    pub method: Method,
    pub noise: f64,
    pub seed: u64,
    pub report: AccuracyReport,
    /// Smoothing weight (ORBIT-ST only).
    pub alpha: Option<f64>,
    /// Threshold selected by the pipeline (fusion methods only).
    pub wth: Option<usize>,
}

/// The synthetic reservoir used by [`noise_study`]: fine ordering and fine
/// ground-truth stack.
pub fn reservoir(study: &NoiseStudy) -> Result<(ElevationOrdering, LabelStack)> {
    let elev = gen_bathymetry(
        &Bathymetry::gaussian_mix(4),
        study.side,
        study.side,
        study.lake_seed,
    )?;
    let pi_h = ordering_from_elevation(&elev)?;
    let pattern = LevelPattern::Reservoir {
        low: 0.12,
        high: 0.4,
        peaks: 4,
    };
    let levels = simulate_level_series(
        study.steps,
        pi_h.len(),
        &pattern,
        derive_seed(study.lake_seed, 1),
    )?;
    let truth = render_stack(&pi_h, &levels)?;
    Ok((pi_h, truth))
}

/// Fusion (per-timestep and temporally smoothed coarse correction) against
/// temporal and spatial majority filtering of the noisy coarse maps.
///
/// Fusion outputs are scored against the fine truth; the majority filters
/// produce coarse maps and are scored against the exact coarse truth, with
/// retained missing labels counted as unknown. ORBIT-ST picks its weight at
/// the elbow of the transition-cost curve of each noisy stack.
pub fn noise_study(study: &NoiseStudy) -> Result<Vec<NoiseRun>> {
    let (pi_h, truth) = reservoir(study)?;
    let grid = MappingGrid::new(study.side, study.side, study.factor, (0, 0))?;
    let true_wth =
        ((study.true_wth_fraction * grid.gr() as f64).round() as usize).clamp(1, grid.gr());
    let coarse_truth = aggregate_to_lsr(&truth, &grid, true_wth)?;

    let jobs: Vec<(f64, u64)> = study
        .noise_levels
        .iter()
        .flat_map(|&nl| (0..study.seeds as u64).map(move |s| (nl, s)))
        .collect();
    let runs = jobs
        .into_par_iter()
        .map(|(level, seed)| -> Result<Vec<NoiseRun>> {
            let params = NoiseParams {
                target_fraction: level,
                blob_mean_size: study.blob_mean_size,
                run_mean_length: study.run_mean_length,
                missing_share: study.missing_share,
            };
            let noise_seed = derive_seed(study.lake_seed ^ (level * 1e6) as u64, seed);
            let noisy = inject_noise(&coarse_truth, &params, noise_seed)?;

            let plain = fuse(
                &noisy,
                FineOrdering::Known(&pi_h),
                study.factor,
                (0, 0),
                &FusionConfig::default(),
            )?;
            let profiles = stack_profiles(&noisy, &plain.coarse_ordering)?;
            let alpha = suggest_alpha(&alpha_sweep(&profiles, &study.alphas)?)?;
            let config = FusionConfig {
                wth: Some(plain.wth),
                alpha: Some(alpha),
                unknown_policy: UnknownPolicy::Keep,
                wth_stride: 1,
            };
            let smooth = fuse(
                &noisy,
                FineOrdering::Known(&pi_h),
                study.factor,
                (0, 0),
                &config,
            )?;
            let temporal = majority_temporal(&noisy, study.temporal_half_window)?;
            let spatial = majority_spatial(&noisy, study.spatial_radius)?;

            let run = |method, report, alpha, wth| NoiseRun {
                method,
                noise: level,
                seed,
                report,
                alpha,
                wth,
            };
            Ok(vec![
                run(
                    Method::OrbitS,
                    accuracy_report(&plain.fine, &truth)?,
                    None,
                    Some(plain.wth),
                ),
                run(
                    Method::OrbitSt,
                    accuracy_report(&smooth.fine, &truth)?,
                    Some(alpha),
                    Some(smooth.wth),
                ),
                run(
                    Method::TemporalMajority,
                    accuracy_report(&temporal, &coarse_truth)?,
                    None,
                    None,
                ),
                run(
                    Method::SpatialMajority,
                    accuracy_report(&spatial, &coarse_truth)?,
                    None,
                    None,
                ),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(runs.into_iter().flatten().collect())
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
