//! Per-timestep physically consistent label correction and data-driven
//! learning of the elevation ordering.
//!
//! Correction picks, independently for every frame, the consistent
//! labelling that disagrees with the fewest observed labels. Missing
//! observations never count as disagreements, so correction also imputes
//! them.

use rayon::prelude::*;

use crate::error::{OrbitError, Result};
use crate::raster::{
    labels_at_level, ElevationOrdering, ErrProfile, Label, LabelStack, LevelSeries,
};

/// Mismatch count of `frame` against every consistent labelling.
///
/// One pass over the pixels in rank order: `costs[0]` is the number of
/// observed water pixels, and moving from level `theta` to `theta + 1`
/// turns the rank-`theta` pixel into water, which adds one mismatch if it
/// was observed as land and removes one if it was observed as water.
pub fn err_profile(frame: &[Label], ordering: &ElevationOrdering) -> Result<ErrProfile> {
    ordering.check_frame(frame)?;
    let mut water = 0u64;
    for (pixel, &l) in frame.iter().enumerate() {
        match l {
            Label::Water => water += 1,
            Label::Unknown => return Err(OrbitError::UnknownLabel { pixel }),
            _ => {}
        }
    }
    let mut costs = Vec::with_capacity(frame.len() + 1);
    let mut cost = water;
    costs.push(cost);
    for &p in ordering.pixels_by_rank() {
        match frame[p] {
            Label::Water => cost -= 1,
            Label::Land => cost += 1,
            _ => {}
        }
        costs.push(cost);
    }
    ErrProfile::from_costs(costs)
}

/// Corrects one frame to the best-matching consistent labelling.
///
/// Ties between levels resolve to the smallest level.
pub fn correct_timestep(
    frame: &[Label],
    ordering: &ElevationOrdering,
) -> Result<(usize, Vec<Label>)> {
    let (theta, _) = err_profile(frame, ordering)?.argmin();
    Ok((theta, labels_at_level(ordering, theta)?))
}

/// Error profiles for every frame of `stack`.
pub fn stack_profiles(stack: &LabelStack, ordering: &ElevationOrdering) -> Result<Vec<ErrProfile>> {
    ordering.check_stack(stack)?;
    stack
        .frames()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|f| err_profile(f, ordering))
        .collect()
}

/// Applies [`correct_timestep`] to every frame.
pub fn correct_stack(
    stack: &LabelStack,
    ordering: &ElevationOrdering,
) -> Result<(LevelSeries, LabelStack)> {
    let profiles = stack_profiles(stack, ordering)?;
    let levels: Vec<usize> = profiles.iter().map(|p| p.argmin().0).collect();
    let levels = LevelSeries::new(levels, ordering.len())?;
    let corrected = render_levels(ordering, &levels)?;
    Ok((levels, corrected))
}

pub(crate) fn render_levels(
    ordering: &ElevationOrdering,
    levels: &LevelSeries,
) -> Result<LabelStack> {
    let n = ordering.len();
    let mut data = Vec::with_capacity(n * levels.len());
    for &theta in levels.levels() {
        data.extend(labels_at_level(ordering, theta)?);
    }
    LabelStack::new(ordering.rows(), ordering.cols(), levels.len(), data)
}

/// `sum_t min_theta Err_t(theta)` under `ordering`.
pub fn total_mismatch(stack: &LabelStack, ordering: &ElevationOrdering) -> Result<u64> {
    Ok(stack_profiles(stack, ordering)?
        .iter()
        .map(|p| p.argmin().1)
        .sum())
}

/// Orders pixels by how often they are observed as water.
///
/// Sort keys: water frequency over non-missing observations (descending),
/// raw water count (descending), row-major index. Never-observed pixels
/// have frequency zero.
pub fn frequency_ordering(stack: &LabelStack) -> Result<ElevationOrdering> {
    stack.reject_unknown()?;
    let n = stack.pixels();
    let mut water = vec![0u64; n];
    let mut observed = vec![0u64; n];
    for frame in stack.frames() {
        for (p, &l) in frame.iter().enumerate() {
            match l {
                Label::Water => {
                    water[p] += 1;
                    observed[p] += 1;
                }
                Label::Land => observed[p] += 1,
                _ => {}
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        // w_a / o_a vs w_b / o_b by cross multiplication; o = 0 reads as 0/1
        let (wa, oa) = (water[a] as u128, observed[a].max(1) as u128);
        let (wb, ob) = (water[b] as u128, observed[b].max(1) as u128);
        (wb * oa)
            .cmp(&(wa * ob))
            .then(water[b].cmp(&water[a]))
            .then(a.cmp(&b))
    });
    ElevationOrdering::from_pixel_order(stack.rows(), stack.cols(), order)
}

/// Result of [`learn_ordering_traced`].
#[derive(Debug, Clone)]
pub struct OrderingFit {
    pub ordering: ElevationOrdering,
    /// Total mismatch of the frequency initialisation.
    pub initial_mismatch: u64,
    /// Total mismatch after initialisation and after each refinement pass
    /// that changed the ordering.
    pub history: Vec<u64>,
    /// Number of refinement passes run, including the final pass that found
    /// no improving swap.
    pub passes: usize,
}

/// Learns an elevation ordering from a multi-temporal label stack.
pub fn learn_ordering(stack: &LabelStack, max_refine_iters: usize) -> Result<ElevationOrdering> {
    learn_ordering_traced(stack, max_refine_iters).map(|fit| fit.ordering)
}

/// Frequency initialisation followed by adjacent-transposition
/// hill-climbing.
///
/// Each pass first corrects every frame under the current ordering, then
/// walks the rank boundaries `(r, r + 1)` once from deepest to shallowest
/// and swaps the two pixels whenever that strictly lowers the mismatch of
/// the frames whose corrected level is exactly `r + 1` (the only frames
/// where the two pixels receive different labels). Re-correcting afterwards
/// can only lower the objective further, so the recorded totals never
/// increase.
pub fn learn_ordering_traced(stack: &LabelStack, max_refine_iters: usize) -> Result<OrderingFit> {
    let mut ordering = frequency_ordering(stack)?;
    let initial_mismatch = total_mismatch(stack, &ordering)?;
    let mut history = vec![initial_mismatch];
    let n = stack.pixels();
    let mut passes = 0;

    while passes < max_refine_iters {
        passes += 1;
        let levels: Vec<usize> = stack_profiles(stack, &ordering)?
            .iter()
            .map(|p| p.argmin().0)
            .collect();
        let mut at_level: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for (t, &theta) in levels.iter().enumerate() {
            at_level[theta].push(t);
        }

        let mut order = ordering.pixels_by_rank().to_vec();
        let mut improved = false;
        for r in 0..n.saturating_sub(1) {
            let frames = &at_level[r + 1];
            if frames.is_empty() {
                continue;
            }
            let (p, q) = (order[r], order[r + 1]);
            let delta: i64 = frames
                .iter()
                .map(|&t| {
                    let f = stack.frame(t);
                    swap_delta(f[p], f[q])
                })
                .sum();
            if delta < 0 {
                order.swap(r, r + 1);
                improved = true;
            }
        }
        if !improved {
            break;
        }
        ordering = ElevationOrdering::from_pixel_order(stack.rows(), stack.cols(), order)?;
        history.push(total_mismatch(stack, &ordering)?);
    }

    Ok(OrderingFit {
        ordering,
        initial_mismatch,
        history,
        passes,
    })
}

/// Change in mismatch when the deeper pixel (expected water, observed `deep`)
/// and the shallower pixel (expected land, observed `shallow`) trade places.
fn swap_delta(deep: Label, shallow: Label) -> i64 {
    let miss = |observed: Label, expected: Label| -> i64 {
        (observed.is_observed() && observed != expected) as i64
    };
    let before = miss(deep, Label::Water) + miss(shallow, Label::Land);
    let after = miss(shallow, Label::Water) + miss(deep, Label::Land);
    after - before
}
