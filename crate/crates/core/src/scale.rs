//! Coarse-to-fine label transfer through a fine-resolution elevation
//! ordering.
//!
//! The pipeline runs in five steps:
//!
//! 1. obtain the fine ordering (given, or learned from a fine training stack);
//! 2. derive the coarse ordering and the per-cell water threshold `wth`;
//! 3. correct the coarse stack (per timestep, or temporally smoothed);
//! 4. label the fine pixels that the coarse label pins down;
//! 5. propagate water below the shallowest known water pixel and land above
//!    the deepest known land pixel.
//!
//! A coarse cell is water iff at least `wth` of its `gr = s * s` fine pixels
//! are water, so a land cell holds at least `gr - wth + 1` land pixels.
//!
//! The block lattice starts at `offset`; fine pixels in the leading offset
//! rows/columns belong to no cell. They take part in the ordering and in
//! step 5, but never in aggregation or step 4.

use rayon::prelude::*;

use crate::error::{invalid, mismatch, OrbitError, Result};
use crate::orbcor::{correct_stack, learn_ordering};
use crate::raster::{ElevationOrdering, Label, LabelStack, LevelSeries};
use crate::temporal::smooth_stack;

/// Uniform `s x s` block partition of a fine grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingGrid {
    fine_rows: usize,
    fine_cols: usize,
    factor: usize,
    offset: (usize, usize),
    coarse_rows: usize,
    coarse_cols: usize,
}

impl MappingGrid {
    pub fn new(
        fine_rows: usize,
        fine_cols: usize,
        factor: usize,
        offset: (usize, usize),
    ) -> Result<Self> {
        if factor == 0 {
            return Err(invalid("block factor must be at least 1"));
        }
        if offset.0 >= factor || offset.1 >= factor {
            return Err(invalid(format!(
                "offset ({}, {}) must lie in [0, {factor})",
                offset.0, offset.1
            )));
        }
        let span_rows = fine_rows.saturating_sub(offset.0);
        let span_cols = fine_cols.saturating_sub(offset.1);
        if span_rows == 0
            || span_cols == 0
            || !span_rows.is_multiple_of(factor)
            || !span_cols.is_multiple_of(factor)
        {
            return Err(invalid(format!(
                "fine grid {fine_rows}x{fine_cols} minus offset ({}, {}) is not divisible by block factor {factor}",
                offset.0, offset.1
            )));
        }
        Ok(Self {
            fine_rows,
            fine_cols,
            factor,
            offset,
            coarse_rows: span_rows / factor,
            coarse_cols: span_cols / factor,
        })
    }

    pub fn fine_rows(&self) -> usize {
        self.fine_rows
    }

    pub fn fine_cols(&self) -> usize {
        self.fine_cols
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn offset(&self) -> (usize, usize) {
        self.offset
    }

    pub fn coarse_rows(&self) -> usize {
        self.coarse_rows
    }

    pub fn coarse_cols(&self) -> usize {
        self.coarse_cols
    }

    pub fn cells(&self) -> usize {
        self.coarse_rows * self.coarse_cols
    }

    /// Fine pixels per cell.
    pub fn gr(&self) -> usize {
        self.factor * self.factor
    }

    /// Coarse cell holding a fine pixel, if it lies on the lattice.
    pub fn cell_of(&self, pixel: usize) -> Option<usize> {
        let (r, c) = (pixel / self.fine_cols, pixel % self.fine_cols);
        if r < self.offset.0 || c < self.offset.1 {
            return None;
        }
        let (cr, cc) = (
            (r - self.offset.0) / self.factor,
            (c - self.offset.1) / self.factor,
        );
        Some(cr * self.coarse_cols + cc)
    }

    /// Fine pixel indices of a cell, row-major.
    pub fn members(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        let (cr, cc) = (cell / self.coarse_cols, cell % self.coarse_cols);
        let r0 = self.offset.0 + cr * self.factor;
        let c0 = self.offset.1 + cc * self.factor;
        (0..self.factor).flat_map(move |dr| {
            (0..self.factor).map(move |dc| (r0 + dr) * self.fine_cols + c0 + dc)
        })
    }

    pub(crate) fn check_fine(&self, rows: usize, cols: usize) -> Result<()> {
        if rows != self.fine_rows || cols != self.fine_cols {
            return Err(mismatch(
                format!("{}x{} fine grid", self.fine_rows, self.fine_cols),
                format!("{rows}x{cols}"),
            ));
        }
        Ok(())
    }

    fn check_coarse(&self, rows: usize, cols: usize) -> Result<()> {
        if rows != self.coarse_rows || cols != self.coarse_cols {
            return Err(mismatch(
                format!("{}x{} coarse grid", self.coarse_rows, self.coarse_cols),
                format!("{rows}x{cols}"),
            ));
        }
        Ok(())
    }

    pub(crate) fn check_wth(&self, wth: usize) -> Result<()> {
        if wth == 0 || wth > self.gr() {
            return Err(invalid(format!("wth {wth} outside 1..={}", self.gr())));
        }
        Ok(())
    }
}

/// Builds the block mapping; see [`MappingGrid::new`].
pub fn build_mapping_grid(
    fine_rows: usize,
    fine_cols: usize,
    factor: usize,
    offset: (usize, usize),
) -> Result<MappingGrid> {
    MappingGrid::new(fine_rows, fine_cols, factor, offset)
}

/// What to do with fine pixels left unknown after propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownPolicy {
    #[default]
    Keep,
    FillLand,
    /// Deepest half (rounded down) of the unknown rank interval becomes
    /// water, the rest land.
    FillMid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    /// Fixed threshold; `None` estimates it from the coarse stack.
    pub wth: Option<usize>,
    /// Temporal smoothing weight for the coarse correction; `None` corrects
    /// each timestep independently.
    pub alpha: Option<f64>,
    pub unknown_policy: UnknownPolicy,
    /// Evaluate threshold candidates on every `wth_stride`-th timestep only.
    pub wth_stride: usize,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            wth: None,
            alpha: None,
            unknown_policy: UnknownPolicy::Keep,
            wth_stride: 1,
        }
    }
}

/// Shallowest confidently-water rank and deepest confidently-land rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PivotPair {
    pub pivot_w: Option<usize>,
    pub pivot_l: Option<usize>,
}

impl PivotPair {
    /// Ranks strictly between the pivots: `start..end`.
    pub fn unknown_range(&self, n: usize) -> std::ops::Range<usize> {
        let start = self.pivot_w.map_or(0, |w| w + 1);
        let end = self.pivot_l.unwrap_or(n);
        start..end.max(start)
    }

    pub fn gap(&self, n: usize) -> usize {
        self.unknown_range(n).len()
    }
}

/// Global ranks of each cell's members, sorted deepest first.
fn cell_ranks(pi_h: &ElevationOrdering, grid: &MappingGrid) -> Result<Vec<Vec<usize>>> {
    grid.check_fine(pi_h.rows(), pi_h.cols())?;
    Ok((0..grid.cells())
        .map(|cell| {
            let mut ranks: Vec<usize> = grid.members(cell).map(|p| pi_h.rank(p)).collect();
            ranks.sort_unstable();
            ranks
        })
        .collect())
}

fn ordering_from_representatives(grid: &MappingGrid, reps: &[usize]) -> Result<ElevationOrdering> {
    let mut cells: Vec<usize> = (0..reps.len()).collect();
    cells.sort_unstable_by_key(|&c| reps[c]);
    ElevationOrdering::from_pixel_order(grid.coarse_rows(), grid.coarse_cols(), cells)
}

/// Coarse ordering that ranks each cell by the global rank of its
/// `wth`-th deepest member.
pub fn candidate_lsr_ordering(
    pi_h: &ElevationOrdering,
    grid: &MappingGrid,
    wth: usize,
) -> Result<ElevationOrdering> {
    grid.check_wth(wth)?;
    let ranks = cell_ranks(pi_h, grid)?;
    let reps: Vec<usize> = ranks.iter().map(|r| r[wth - 1]).collect();
    ordering_from_representatives(grid, &reps)
}

/// Outcome of the threshold search.
#[derive(Debug, Clone, PartialEq)]
pub struct WthEstimate {
    pub wth: usize,
    pub ordering: ElevationOrdering,
    /// Total coarse mismatch for every candidate, indexed by `wth - 1`.
    pub mismatches: Vec<u64>,
}

/// Picks the threshold whose candidate coarse ordering needs the fewest
/// corrections of `coarse` (ties: smallest threshold).
pub fn estimate_wth(
    pi_h: &ElevationOrdering,
    grid: &MappingGrid,
    coarse: &LabelStack,
) -> Result<WthEstimate> {
    estimate_wth_strided(pi_h, grid, coarse, 1)
}

/// [`estimate_wth`] evaluated on timesteps `0, stride, 2 * stride, ...`.
pub fn estimate_wth_strided(
    pi_h: &ElevationOrdering,
    grid: &MappingGrid,
    coarse: &LabelStack,
    stride: usize,
) -> Result<WthEstimate> {
    if stride == 0 {
        return Err(invalid("timestep stride must be at least 1"));
    }
    grid.check_coarse(coarse.rows(), coarse.cols())?;
    coarse.reject_unknown()?;
    let ranks = cell_ranks(pi_h, grid)?;
    let frames: Vec<&[Label]> = coarse.frames().step_by(stride).collect();

    let mismatches = (1..=grid.gr())
        .into_par_iter()
        .map(|wth| {
            let reps: Vec<usize> = ranks.iter().map(|r| r[wth - 1]).collect();
            let ordering = ordering_from_representatives(grid, &reps)?;
            frames
                .iter()
                .map(|f| crate::orbcor::err_profile(f, &ordering).map(|p| p.argmin().1))
                .sum::<Result<u64>>()
        })
        .collect::<Result<Vec<u64>>>()?;

    let (best, _) =
        mismatches.iter().enumerate().fold(
            (0, u64::MAX),
            |acc, (i, &m)| if m < acc.1 { (i, m) } else { acc },
        );
    let wth = best + 1;
    let reps: Vec<usize> = ranks.iter().map(|r| r[wth - 1]).collect();
    Ok(WthEstimate {
        wth,
        ordering: ordering_from_representatives(grid, &reps)?,
        mismatches,
    })
}

/// Fine labels implied by one consistent coarse frame: the `wth` deepest
/// members of a water cell are water, the `gr - wth + 1` shallowest members
/// of a land cell are land, everything else is unknown.
pub fn confident_hsr_labels(
    coarse_frame: &[Label],
    grid: &MappingGrid,
    wth: usize,
    pi_h: &ElevationOrdering,
) -> Result<Vec<Label>> {
    grid.check_wth(wth)?;
    grid.check_fine(pi_h.rows(), pi_h.cols())?;
    if coarse_frame.len() != grid.cells() {
        return Err(mismatch(grid.cells(), coarse_frame.len()));
    }
    let mut out = vec![Label::Unknown; pi_h.len()];
    let mut members = Vec::with_capacity(grid.gr());
    for (cell, &label) in coarse_frame.iter().enumerate() {
        members.clear();
        members.extend(grid.members(cell));
        members.sort_unstable_by_key(|&p| pi_h.rank(p));
        match label {
            Label::Water => members[..wth].iter().for_each(|&p| out[p] = Label::Water),
            Label::Land => members[wth - 1..]
                .iter()
                .for_each(|&p| out[p] = Label::Land),
            Label::Missing => return Err(OrbitError::MissingLabel { pixel: cell }),
            Label::Unknown => return Err(OrbitError::UnknownLabel { pixel: cell }),
        }
    }
    Ok(out)
}

/// Extends known water to every deeper pixel and known land to every
/// shallower pixel.
///
/// Fails if some water pixel is shallower than some land pixel.
pub fn pivot_propagate(tri: &[Label], pi_h: &ElevationOrdering) -> Result<(Vec<Label>, PivotPair)> {
    if tri.len() != pi_h.len() {
        return Err(mismatch(pi_h.len(), tri.len()));
    }
    let mut pivots = PivotPair::default();
    for (r, &p) in pi_h.pixels_by_rank().iter().enumerate() {
        match tri[p] {
            Label::Water => pivots.pivot_w = Some(r),
            Label::Land => {
                if pivots.pivot_l.is_none() {
                    pivots.pivot_l = Some(r);
                }
            }
            Label::Missing => return Err(OrbitError::MissingLabel { pixel: p }),
            Label::Unknown => {}
        }
    }
    if let (Some(w), Some(l)) = (pivots.pivot_w, pivots.pivot_l) {
        if w > l {
            return Err(OrbitError::Inconsistent {
                water_rank: w,
                land_rank: l,
            });
        }
    }
    let unknown = pivots.unknown_range(pi_h.len());
    let out = pi_h
        .ranks()
        .iter()
        .map(|&r| {
            if r < unknown.start {
                Label::Water
            } else if r >= unknown.end {
                Label::Land
            } else {
                Label::Unknown
            }
        })
        .collect();
    Ok((out, pivots))
}

fn apply_policy(
    frame: &mut [Label],
    pivots: &PivotPair,
    pi_h: &ElevationOrdering,
    policy: UnknownPolicy,
) {
    let unknown = pivots.unknown_range(pi_h.len());
    let split = unknown.start + unknown.len() / 2;
    match policy {
        UnknownPolicy::Keep => {}
        UnknownPolicy::FillLand => {
            for r in unknown {
                frame[pi_h.pixel_at(r)] = Label::Land;
            }
        }
        UnknownPolicy::FillMid => {
            for r in unknown {
                frame[pi_h.pixel_at(r)] = if r < split { Label::Water } else { Label::Land };
            }
        }
    }
}

/// Where the fine ordering comes from.
#[derive(Debug, Clone, Copy)]
pub enum FineOrdering<'a> {
    Known(&'a ElevationOrdering),
    Learn {
        training: &'a LabelStack,
        max_refine_iters: usize,
    },
}

#[derive(Debug, Clone)]
pub struct FusionOutput {
    pub fine: LabelStack,
    pub fine_ordering: ElevationOrdering,
    pub coarse_ordering: ElevationOrdering,
    pub coarse_levels: LevelSeries,
    pub coarse_corrected: LabelStack,
    pub pivots: Vec<PivotPair>,
    pub wth: usize,
}

/// Runs the full coarse-to-fine pipeline.
pub fn fuse(
    coarse: &LabelStack,
    source: FineOrdering<'_>,
    factor: usize,
    offset: (usize, usize),
    config: &FusionConfig,
) -> Result<FusionOutput> {
    coarse.reject_unknown()?;
    let fine_ordering = match source {
        FineOrdering::Known(o) => o.clone(),
        FineOrdering::Learn {
            training,
            max_refine_iters,
        } => learn_ordering(training, max_refine_iters)?,
    };
    let grid = MappingGrid::new(fine_ordering.rows(), fine_ordering.cols(), factor, offset)?;
    grid.check_coarse(coarse.rows(), coarse.cols())?;

    let (wth, coarse_ordering) = match config.wth {
        Some(wth) => (wth, candidate_lsr_ordering(&fine_ordering, &grid, wth)?),
        None => {
            let est = estimate_wth_strided(&fine_ordering, &grid, coarse, config.wth_stride)?;
            (est.wth, est.ordering)
        }
    };

    let (coarse_levels, coarse_corrected) = match config.alpha {
        Some(alpha) => {
            let (levels, stack, _) = smooth_stack(coarse, &coarse_ordering, alpha)?;
            (levels, stack)
        }
        None => correct_stack(coarse, &coarse_ordering)?,
    };

    let frames = coarse_corrected
        .frames()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|f| {
            let tri = confident_hsr_labels(f, &grid, wth, &fine_ordering)?;
            let (mut out, pivots) = pivot_propagate(&tri, &fine_ordering)?;
            apply_policy(&mut out, &pivots, &fine_ordering, config.unknown_policy);
            Ok((out, pivots))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut data = Vec::with_capacity(fine_ordering.len() * frames.len());
    let mut pivots = Vec::with_capacity(frames.len());
    for (f, p) in frames {
        data.extend(f);
        pivots.push(p);
    }
    let fine = LabelStack::new(
        fine_ordering.rows(),
        fine_ordering.cols(),
        coarse.timesteps(),
        data,
    )?;
    Ok(FusionOutput {
        fine,
        fine_ordering,
        coarse_ordering,
        coarse_levels,
        coarse_corrected,
        pivots,
        wth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{labels_at_level, level_of_labels};
    use crate::synth::aggregate_to_lsr;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use Label::{Land as L, Unknown as U, Water as W};

    fn row_major_4x4() -> (ElevationOrdering, MappingGrid) {
        (
            ElevationOrdering::row_major(4, 4).unwrap(),
            MappingGrid::new(4, 4, 2, (0, 0)).unwrap(),
        )
    }

    fn random_ordering(rows: usize, cols: usize, seed: u64) -> ElevationOrdering {
        let mut ranks: Vec<usize> = (0..rows * cols).collect();
        ranks.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        ElevationOrdering::from_ranks(rows, cols, ranks).unwrap()
    }

    #[test]
    fn grid_shapes() {
        let g = MappingGrid::new(4, 4, 2, (0, 0)).unwrap();
        assert_eq!((g.cells(), g.gr()), (4, 4));
        assert_eq!(g.members(3).collect::<Vec<_>>(), vec![10, 11, 14, 15]);
        let id = MappingGrid::new(3, 5, 1, (0, 0)).unwrap();
        assert_eq!((id.cells(), id.gr()), (15, 1));
        assert!(MappingGrid::new(6, 6, 2, (1, 1)).is_err());
        assert!(MappingGrid::new(6, 6, 2, (2, 0)).is_err());
        let shifted = MappingGrid::new(5, 5, 2, (1, 1)).unwrap();
        assert_eq!(shifted.cell_of(0), None);
        assert_eq!(shifted.cell_of(6), Some(0));
        assert_eq!(shifted.members(0).collect::<Vec<_>>(), vec![6, 7, 11, 12]);
    }

    #[test]
    fn every_lattice_pixel_in_exactly_one_cell() {
        let g = MappingGrid::new(7, 9, 3, (1, 0)).unwrap();
        let mut seen = vec![0; 63];
        for cell in 0..g.cells() {
            for p in g.members(cell) {
                seen[p] += 1;
                assert_eq!(g.cell_of(p), Some(cell));
            }
        }
        for (p, &n) in seen.iter().enumerate() {
            assert_eq!(n, usize::from(p / 9 >= 1));
        }
    }

    #[test]
    fn candidate_orderings_on_row_major() {
        let (o, g) = row_major_4x4();
        let expected = ElevationOrdering::from_ranks(2, 2, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(candidate_lsr_ordering(&o, &g, 2).unwrap(), expected);
        assert_eq!(candidate_lsr_ordering(&o, &g, 4).unwrap(), expected);
        assert!(candidate_lsr_ordering(&o, &g, 5).is_err());
        assert!(candidate_lsr_ordering(&o, &g, 0).is_err());
    }

    #[test]
    fn unit_factor_candidate_is_identity() {
        let o = random_ordering(3, 4, 1);
        let g = MappingGrid::new(3, 4, 1, (0, 0)).unwrap();
        assert_eq!(candidate_lsr_ordering(&o, &g, 1).unwrap(), o);
    }

    #[test]
    fn confident_labels_example() {
        let (o, g) = row_major_4x4();
        let tri = confident_hsr_labels(&[W, L, L, L], &g, 2, &o).unwrap();
        #[rustfmt::skip]
        let expected = vec![
            W, W, U, L,
            U, U, L, L,
            U, L, U, L,
            L, L, L, L,
        ];
        assert_eq!(tri, expected);
        let (out, pivots) = pivot_propagate(&tri, &o).unwrap();
        assert_eq!(
            pivots,
            PivotPair {
                pivot_w: Some(1),
                pivot_l: Some(3)
            }
        );
        let unknown: Vec<usize> = (0..16).filter(|&p| out[p] == U).collect();
        assert_eq!(unknown, vec![2]);
        assert_eq!(pivots.gap(16), 1);
    }

    #[test]
    fn all_land_coarse_map() {
        let o = random_ordering(4, 4, 5);
        let g = MappingGrid::new(4, 4, 2, (0, 0)).unwrap();
        let tri = confident_hsr_labels(&[L; 4], &g, 2, &o).unwrap();
        for cell in 0..4 {
            let mut m: Vec<usize> = g.members(cell).collect();
            m.sort_by_key(|&p| o.rank(p));
            assert_eq!(tri[m[0]], U);
            assert!(m[1..].iter().all(|&p| tri[p] == L));
        }
        let (out, pivots) = pivot_propagate(&tri, &o).unwrap();
        assert_eq!(pivots.pivot_w, None);
        let pl = pivots.pivot_l.unwrap();
        for (p, &l) in out.iter().enumerate() {
            assert_eq!(l, if o.rank(p) >= pl { L } else { U });
        }
    }

    #[test]
    fn full_water_coarse_map_has_no_land() {
        let o = random_ordering(4, 6, 9);
        let g = MappingGrid::new(4, 6, 2, (0, 0)).unwrap();
        let tri = confident_hsr_labels(&[W; 6], &g, 3, &o).unwrap();
        assert!(!tri.contains(&L));
        assert_eq!(tri.iter().filter(|&&l| l == W).count(), 18);
    }

    #[test]
    fn inconsistent_tri_state_is_rejected() {
        let o = ElevationOrdering::row_major(1, 8).unwrap();
        let mut tri = vec![U; 8];
        tri[5] = W;
        tri[2] = L;
        assert_eq!(
            pivot_propagate(&tri, &o).unwrap_err(),
            OrbitError::Inconsistent {
                water_rank: 5,
                land_rank: 2
            }
        );
    }

    #[test]
    fn aggregation_thresholds() {
        let (o, g) = row_major_4x4();
        let fine = LabelStack::new(4, 4, 1, labels_at_level(&o, 3).unwrap()).unwrap();
        assert_eq!(
            aggregate_to_lsr(&fine, &g, 2).unwrap().data(),
            &[W, L, L, L]
        );
        assert_eq!(
            aggregate_to_lsr(&fine, &g, 1).unwrap().data(),
            &[W, W, L, L]
        );
        assert_eq!(
            aggregate_to_lsr(&fine, &g, 4).unwrap().data(),
            &[L, L, L, L]
        );
        let mut bad = fine.clone();
        bad.frame_mut(0)[0] = Label::Missing;
        assert!(aggregate_to_lsr(&bad, &g, 2).is_err());
    }

    fn swept_fine_stack(o: &ElevationOrdering, steps: usize) -> LabelStack {
        let n = o.len();
        let frames: Vec<Vec<Label>> = (0..steps)
            .map(|t| labels_at_level(o, (t * 7919) % (n + 1)).unwrap())
            .collect();
        LabelStack::from_frames(o.rows(), o.cols(), &frames).unwrap()
    }

    #[test]
    fn aggregated_frames_are_consistent_with_candidate() {
        for seed in 0..5 {
            let o = random_ordering(6, 6, seed);
            let g = MappingGrid::new(6, 6, 3, (0, 0)).unwrap();
            let fine = swept_fine_stack(&o, 37);
            for wth in 1..=9 {
                let coarse = aggregate_to_lsr(&fine, &g, wth).unwrap();
                let co = candidate_lsr_ordering(&o, &g, wth).unwrap();
                for f in coarse.frames() {
                    assert!(level_of_labels(f, &co).is_some());
                }
            }
        }
    }

    #[test]
    fn estimate_recovers_generating_threshold() {
        let o = random_ordering(8, 8, 42);
        let g = MappingGrid::new(8, 8, 2, (0, 0)).unwrap();
        let fine = swept_fine_stack(&o, 65);
        for true_wth in 1..=4 {
            let coarse = aggregate_to_lsr(&fine, &g, true_wth).unwrap();
            let est = estimate_wth(&o, &g, &coarse).unwrap();
            assert_eq!(est.mismatches[true_wth - 1], 0);
            assert_eq!(est.mismatches[est.wth - 1], 0);
            assert_eq!(
                est.ordering,
                candidate_lsr_ordering(&o, &g, est.wth).unwrap()
            );
        }
    }

    #[test]
    fn constant_land_coarse_ties_to_smallest_threshold() {
        let o = random_ordering(4, 4, 3);
        let g = MappingGrid::new(4, 4, 2, (0, 0)).unwrap();
        let coarse = LabelStack::filled(2, 2, 5, L).unwrap();
        let est = estimate_wth(&o, &g, &coarse).unwrap();
        assert_eq!(est.wth, 1);
        assert_eq!(est.mismatches, vec![0; 4]);
    }

    #[test]
    fn perfect_inputs_fuse_without_errors() {
        for seed in 0..5 {
            let o = random_ordering(9, 9, seed);
            let g = MappingGrid::new(9, 9, 3, (0, 0)).unwrap();
            let fine = swept_fine_stack(&o, 30);
            let wth = 1 + seed as usize;
            let coarse = aggregate_to_lsr(&fine, &g, wth).unwrap();
            let config = FusionConfig {
                wth: Some(wth),
                ..Default::default()
            };
            let out = fuse(&coarse, FineOrdering::Known(&o), 3, (0, 0), &config).unwrap();
            for t in 0..fine.timesteps() {
                let est = out.fine.frame(t);
                let truth = fine.frame(t);
                for p in 0..81 {
                    assert!(est[p] == U || est[p] == truth[p]);
                }
                let unknown = est.iter().filter(|&&l| l == U).count();
                assert_eq!(unknown, out.pivots[t].gap(81));
            }
        }
    }

    #[test]
    fn fill_mid_round_trips_coarse_stack() {
        let o = random_ordering(8, 8, 17);
        let g = MappingGrid::new(8, 8, 4, (0, 0)).unwrap();
        let fine = swept_fine_stack(&o, 40);
        let coarse = aggregate_to_lsr(&fine, &g, 6).unwrap();
        let config = FusionConfig {
            wth: Some(6),
            unknown_policy: UnknownPolicy::FillMid,
            ..Default::default()
        };
        let out = fuse(&coarse, FineOrdering::Known(&o), 4, (0, 0), &config).unwrap();
        assert!(!out.fine.contains(U));
        assert_eq!(aggregate_to_lsr(&out.fine, &g, 6).unwrap(), coarse);
        for f in out.fine.frames() {
            assert!(level_of_labels(f, &o).is_some());
        }
    }

    #[test]
    fn unit_factor_fuse_is_coarse_correction() {
        let o = random_ordering(5, 5, 8);
        let mut noisy = swept_fine_stack(&o, 12);
        for (i, l) in noisy.frame_mut(3).iter_mut().enumerate() {
            if i % 4 == 0 {
                *l = l.inverted();
            }
        }
        let out = fuse(
            &noisy,
            FineOrdering::Known(&o),
            1,
            (0, 0),
            &FusionConfig::default(),
        )
        .unwrap();
        let (levels, corrected) = correct_stack(&noisy, &o).unwrap();
        assert_eq!(out.wth, 1);
        assert_eq!(out.fine, corrected);
        assert_eq!(out.coarse_levels, levels);

        let config = FusionConfig {
            alpha: Some(0.7),
            ..Default::default()
        };
        let out = fuse(&noisy, FineOrdering::Known(&o), 1, (0, 0), &config).unwrap();
        let (_, smoothed, _) = smooth_stack(&noisy, &o, 0.7).unwrap();
        assert_eq!(out.fine, smoothed);
    }

    #[test]
    fn offset_margin_pixels_follow_the_pivots() {
        let o = random_ordering(7, 7, 23);
        let g = MappingGrid::new(7, 7, 2, (1, 1)).unwrap();
        let fine = swept_fine_stack(&o, 25);
        let coarse = aggregate_to_lsr(&fine, &g, 2).unwrap();
        let config = FusionConfig {
            wth: Some(2),
            ..Default::default()
        };
        let out = fuse(&coarse, FineOrdering::Known(&o), 2, (1, 1), &config).unwrap();
        for t in 0..25 {
            for (e, tr) in out.fine.frame(t).iter().zip(fine.frame(t)) {
                assert!(*e == U || e == tr);
            }
        }
    }
}
