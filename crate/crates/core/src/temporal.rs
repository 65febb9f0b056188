//! Temporally consistent water levels.
//!
//! Finds the level sequence minimising
//!
//! ```text
//! sum_t Err_t(theta_t) + alpha * sum_t |theta_t - theta_{t+1}|
//! ```
//!
//! exactly, by dynamic programming over backward cost-to-go tables. The
//! inner `min_theta' [B(theta') + alpha |theta - theta'|]` is an L1 distance
//! transform, evaluated with one forward and one backward sweep, so a full
//! solve costs `O(T * N)`.
//!
//! Costs are carried as `(mismatch, transition)` integer pairs and only
//! combined with `alpha` when two candidates are compared. Among all optimal
//! sequences the lexicographically smallest one is returned.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{invalid, mismatch, Result};
use crate::orbcor::{render_levels, stack_profiles};
use crate::raster::{ElevationOrdering, ErrProfile, LabelStack, LevelSeries};

/// Mismatch and transition cost of a level sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub mismatch_cost: u64,
    pub transition_cost: u64,
    /// `mismatch_cost + alpha * transition_cost`
    pub total_cost: f64,
    pub alpha: f64,
}

impl CostBreakdown {
    /// Recomputes the costs of `levels` against `profiles`.
    pub fn evaluate(profiles: &[ErrProfile], levels: &LevelSeries, alpha: f64) -> Result<Self> {
        if profiles.len() != levels.len() {
            return Err(mismatch(format!("{} levels", profiles.len()), levels.len()));
        }
        let mut mismatch_cost = 0;
        for (p, &theta) in profiles.iter().zip(levels.levels()) {
            if theta > p.capacity() {
                return Err(invalid(format!(
                    "level {theta} outside profile range 0..={}",
                    p.capacity()
                )));
            }
            mismatch_cost += p.cost(theta);
        }
        let transition_cost = levels.total_variation();
        Ok(Self {
            mismatch_cost,
            transition_cost,
            total_cost: mismatch_cost as f64 + alpha * transition_cost as f64,
            alpha,
        })
    }
}

/// One row of an [`AlphaSweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub mismatch_cost: u64,
    pub transition_cost: u64,
    pub total_cost: f64,
}

/// Optimal costs over an increasing grid of trade-off weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlphaSweep {
    rows: Vec<SweepRow>,
}

impl AlphaSweep {
    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// `(mismatch, transition)` accumulated along a partial level sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Cost {
    mismatch: u64,
    transition: u64,
}

impl Cost {
    fn plus(self, mismatch: u64, transition: u64) -> Cost {
        Cost {
            mismatch: self.mismatch + mismatch,
            transition: self.transition + transition,
        }
    }

    fn add(self, other: Cost) -> Cost {
        self.plus(other.mismatch, other.transition)
    }
}

/// Orders two costs by `mismatch + alpha * transition`.
///
/// Compares differences so the outcome depends only on the gap between the
/// two candidates. Gaps below a relative 1e-9 count as ties: `alpha` is
/// usually a decimal such as 0.1 whose binary value is off by an ulp, and the
/// intended ties must survive that.
#[derive(Debug, Clone, Copy)]
struct Weigher {
    alpha: f64,
}

impl Weigher {
    fn cmp(&self, a: Cost, b: Cost) -> Ordering {
        let dm = a.mismatch as f64 - b.mismatch as f64;
        let weighted = self.alpha * (b.transition as f64 - a.transition as f64);
        let scale = dm.abs().max(weighted.abs()).max(1.0);
        if (dm - weighted).abs() <= 1e-9 * scale {
            Ordering::Equal
        } else if dm < weighted {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    fn lt(&self, a: Cost, b: Cost) -> bool {
        self.cmp(a, b) == Ordering::Less
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(invalid(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    Ok(())
}

/// In place: `table[theta] = min_theta' table[theta'] + alpha |theta - theta'|`.
fn l1_envelope(table: &mut [Cost], w: &Weigher) {
    for theta in 1..table.len() {
        let cand = table[theta - 1].plus(0, 1);
        if w.lt(cand, table[theta]) {
            table[theta] = cand;
        }
    }
    for theta in (0..table.len().saturating_sub(1)).rev() {
        let cand = table[theta + 1].plus(0, 1);
        if w.lt(cand, table[theta]) {
            table[theta] = cand;
        }
    }
}

/// Globally optimal level sequence for the given per-timestep profiles.
pub fn smooth_levels(profiles: &[ErrProfile], alpha: f64) -> Result<(LevelSeries, CostBreakdown)> {
    check_alpha(alpha)?;
    let first = profiles
        .first()
        .ok_or_else(|| invalid("at least one timestep is required"))?;
    let width = first.costs().len();
    if let Some((t, p)) = profiles
        .iter()
        .enumerate()
        .find(|(_, p)| p.costs().len() != width)
    {
        return Err(mismatch(
            format!("{width} levels per profile"),
            format!("{} levels at timestep {t}", p.costs().len()),
        ));
    }
    let w = Weigher { alpha };
    let steps = profiles.len();

    // to_go[t][theta]: best cost of timesteps t+1.. given theta_t = theta
    let mut to_go = vec![vec![Cost::default(); width]; steps];
    for t in (0..steps - 1).rev() {
        let next = &to_go[t + 1];
        let mut table: Vec<Cost> = profiles[t + 1]
            .costs()
            .iter()
            .zip(next)
            .map(|(&e, c)| c.plus(e, 0))
            .collect();
        l1_envelope(&mut table, &w);
        to_go[t] = table;
    }

    // lexicographically smallest optimal path, front to back
    let through = |t: usize, theta: usize| to_go[t][theta].plus(profiles[t].cost(theta), 0);
    let mut best = through(0, 0);
    for theta in 1..width {
        let c = through(0, theta);
        if w.lt(c, best) {
            best = c;
        }
    }
    let mut levels = Vec::with_capacity(steps);
    let mut prev = (0..width)
        .find(|&theta| w.cmp(through(0, theta), best) != Ordering::Greater)
        .expect("minimum is attained");
    levels.push(prev);
    for t in 1..steps {
        let target = to_go[t - 1][prev];
        let theta = (0..width)
            .find(|&theta| {
                let cand = through(t, theta).add(Cost {
                    mismatch: 0,
                    transition: prev.abs_diff(theta) as u64,
                });
                w.cmp(cand, target) != Ordering::Greater
            })
            .expect("cost-to-go is attained");
        levels.push(theta);
        prev = theta;
    }

    let levels = LevelSeries::new(levels, width - 1)?;
    let breakdown = CostBreakdown::evaluate(profiles, &levels, alpha)?;
    Ok((levels, breakdown))
}

/// Temporally smoothed correction of a whole stack.
pub fn smooth_stack(
    stack: &LabelStack,
    ordering: &ElevationOrdering,
    alpha: f64,
) -> Result<(LevelSeries, LabelStack, CostBreakdown)> {
    let profiles = stack_profiles(stack, ordering)?;
    let (levels, breakdown) = smooth_levels(&profiles, alpha)?;
    let corrected = render_levels(ordering, &levels)?;
    Ok((levels, corrected, breakdown))
}

/// One [`smooth_levels`] solve per weight.
pub fn alpha_sweep(profiles: &[ErrProfile], alphas: &[f64]) -> Result<AlphaSweep> {
    if alphas.is_empty() {
        return Err(invalid("alpha sweep needs at least one value"));
    }
    for &a in alphas {
        check_alpha(a)?;
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("alphas must be strictly increasing"));
    }
    let rows = alphas
        .par_iter()
        .map(|&alpha| {
            smooth_levels(profiles, alpha).map(|(_, b)| SweepRow {
                alpha,
                mismatch_cost: b.mismatch_cost,
                transition_cost: b.transition_cost,
                total_cost: b.total_cost,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlphaSweep { rows })
}

/// Elbow of the transition-cost curve.
///
/// Returns the weight at the largest discrete second difference
/// `y[i-1] - 2 y[i] + y[i+1]` of the transition costs, smallest weight on
/// ties. Min-max normalisation is a positive rescaling and does not move the
/// maximum, so the integer costs are used directly.
pub fn suggest_alpha(sweep: &AlphaSweep) -> Result<f64> {
    let rows = sweep.rows();
    if rows.len() < 3 {
        return Err(invalid(format!(
            "need at least 3 sweep rows to locate an elbow, got {}",
            rows.len()
        )));
    }
    let y: Vec<i128> = rows.iter().map(|r| r.transition_cost as i128).collect();
    let mut best = (1, i128::MIN);
    for i in 1..rows.len() - 1 {
        let d2 = y[i - 1] - 2 * y[i] + y[i + 1];
        if d2 > best.1 {
            best = (i, d2);
        }
    }
    Ok(rows[best.0].alpha)
}
