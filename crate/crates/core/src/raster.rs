//! Raster, ordering and level types shared by every pipeline, plus the
//! conversions between an elevation ordering and physically consistent
//! label grids.
//!
//! Ranks follow one convention throughout the crate: rank 0 is the deepest
//! pixel and rank `N - 1` the shallowest. A water level `theta` in `0..=N`
//! therefore denotes the labelling in which exactly the pixels with
//! `rank < theta` are water.
//!
//! Single-timestep grids are passed around as row-major `&[Label]` slices
//! ("frames"); their dimensions are checked against the ordering they are
//! combined with.

use std::fmt;

use crate::error::{invalid, mismatch, Result};

/// Per pixel-timestep label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(u8)]
pub enum Label {
    #[default]
    Land = 0,
    Water = 1,
    Missing = 2,
    Unknown = 3,
}

impl Label {
    pub fn from_u8(value: u8) -> Option<Label> {
        match value {
            0 => Some(Label::Land),
            1 => Some(Label::Water),
            2 => Some(Label::Missing),
            3 => Some(Label::Unknown),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    /// Water <-> Land; Missing and Unknown are left alone.
    pub fn inverted(self) -> Label {
        match self {
            Label::Land => Label::Water,
            Label::Water => Label::Land,
            other => other,
        }
    }

    pub fn is_observed(self) -> bool {
        matches!(self, Label::Land | Label::Water)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Label::Land => "land",
            Label::Water => "water",
            Label::Missing => "missing",
            Label::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// A `timesteps x rows x cols` stack of labels stored time-major, then
/// row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelStack {
    rows: usize,
    cols: usize,
    timesteps: usize,
    data: Vec<Label>,
}

impl LabelStack {
    pub fn new(rows: usize, cols: usize, timesteps: usize, data: Vec<Label>) -> Result<Self> {
        if rows == 0 || cols == 0 || timesteps == 0 {
            return Err(invalid(format!(
                "label stack dimensions must be positive, got {timesteps}x{rows}x{cols}"
            )));
        }
        let expected = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(timesteps))
            .ok_or_else(|| invalid("label stack dimensions overflow"))?;
        if data.len() != expected {
            return Err(mismatch(
                format!("{expected} labels"),
                format!("{} labels", data.len()),
            ));
        }
        Ok(Self {
            rows,
            cols,
            timesteps,
            data,
        })
    }

    pub fn filled(rows: usize, cols: usize, timesteps: usize, label: Label) -> Result<Self> {
        Self::new(rows, cols, timesteps, vec![label; rows * cols * timesteps])
    }

    /// Builds a stack from per-timestep row-major frames.
    pub fn from_frames<F: AsRef<[Label]>>(rows: usize, cols: usize, frames: &[F]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols * frames.len());
        for (t, frame) in frames.iter().enumerate() {
            let frame = frame.as_ref();
            if frame.len() != rows * cols {
                return Err(mismatch(
                    format!("{} labels in frame {t}", rows * cols),
                    frame.len(),
                ));
            }
            data.extend_from_slice(frame);
        }
        Self::new(rows, cols, frames.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    /// Pixels per frame.
    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    pub fn data(&self) -> &[Label] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Label> {
        self.data
    }

    pub fn frame(&self, t: usize) -> &[Label] {
        let n = self.pixels();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [Label] {
        let n = self.pixels();
        &mut self.data[t * n..(t + 1) * n]
    }

    pub fn frames(&self) -> std::slice::ChunksExact<'_, Label> {
        self.data.chunks_exact(self.pixels())
    }

    pub fn get(&self, t: usize, row: usize, col: usize) -> Label {
        self.data[(t * self.rows + row) * self.cols + col]
    }

    pub fn count(&self, label: Label) -> usize {
        self.data.iter().filter(|&&l| l == label).count()
    }

    pub fn contains(&self, label: Label) -> bool {
        self.data.contains(&label)
    }

    pub fn same_shape(&self, other: &LabelStack) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.timesteps == other.timesteps
    }

    pub(crate) fn shape_string(&self) -> String {
        format!("{}x{}x{}", self.timesteps, self.rows, self.cols)
    }

    pub(crate) fn reject_unknown(&self) -> Result<()> {
        if let Some(i) = self.data.iter().position(|&l| l == Label::Unknown) {
            return Err(crate::OrbitError::UnknownLabel {
                pixel: i % self.pixels(),
            });
        }
        Ok(())
    }

    pub(crate) fn reject_incomplete(&self) -> Result<()> {
        for (i, &l) in self.data.iter().enumerate() {
            match l {
                Label::Unknown => {
                    return Err(crate::OrbitError::UnknownLabel {
                        pixel: i % self.pixels(),
                    })
                }
                Label::Missing => {
                    return Err(crate::OrbitError::MissingLabel {
                        pixel: i % self.pixels(),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Elevation values on a regular grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationGrid {
    rows: usize,
    cols: usize,
    elevation: Vec<f64>,
}

impl ElevationGrid {
    pub fn new(rows: usize, cols: usize, elevation: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("elevation grid dimensions must be positive"));
        }
        if elevation.len() != rows * cols {
            return Err(mismatch(rows * cols, elevation.len()));
        }
        if let Some(i) = elevation.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite elevation at pixel {i}")));
        }
        Ok(Self {
            rows,
            cols,
            elevation,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.elevation
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.elevation[row * self.cols + col]
    }
}

/// A bijective depth ranking of the pixels of a grid.
///
/// Keeps both directions of the permutation: `rank(pixel)` and
/// `pixel_at(rank)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElevationOrdering {
    rows: usize,
    cols: usize,
    rank: Vec<usize>,
    by_rank: Vec<usize>,
}

impl ElevationOrdering {
    /// Builds an ordering from per-pixel ranks, rejecting anything that is
    /// not a permutation of `0..rows*cols`.
    pub fn from_ranks(rows: usize, cols: usize, rank: Vec<usize>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("ordering dimensions must be positive"));
        }
        let n = rows * cols;
        if rank.len() != n {
            return Err(mismatch(n, rank.len()));
        }
        let mut by_rank = vec![usize::MAX; n];
        for (pixel, &r) in rank.iter().enumerate() {
            if r >= n {
                return Err(invalid(format!(
                    "rank bijection violated: pixel {pixel} has rank {r} outside 0..{n}"
                )));
            }
            if by_rank[r] != usize::MAX {
                return Err(invalid(format!(
                    "rank bijection violated: rank {r} assigned to pixels {} and {pixel}",
                    by_rank[r]
                )));
            }
            by_rank[r] = pixel;
        }
        Ok(Self {
            rows,
            cols,
            rank,
            by_rank,
        })
    }

    /// Builds an ordering from the list of pixels sorted deepest first.
    pub fn from_pixel_order(rows: usize, cols: usize, by_rank: Vec<usize>) -> Result<Self> {
        let n = rows * cols;
        if by_rank.len() != n {
            return Err(mismatch(n, by_rank.len()));
        }
        let mut rank = vec![usize::MAX; n];
        for (r, &p) in by_rank.iter().enumerate() {
            if p >= n || rank[p] != usize::MAX {
                return Err(invalid(format!(
                    "rank bijection violated: pixel {p} listed at rank {r}"
                )));
            }
            rank[p] = r;
        }
        Self::from_ranks(rows, cols, rank)
    }

    /// Row-major order: pixel `i` has rank `i`.
    pub fn row_major(rows: usize, cols: usize) -> Result<Self> {
        Self::from_ranks(rows, cols, (0..rows * cols).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of pixels, `N`.
    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    pub fn rank(&self, pixel: usize) -> usize {
        self.rank[pixel]
    }

    pub fn pixel_at(&self, rank: usize) -> usize {
        self.by_rank[rank]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.rank
    }

    /// Pixels listed deepest first.
    pub fn pixels_by_rank(&self) -> &[usize] {
        &self.by_rank
    }

    pub(crate) fn check_frame(&self, frame: &[Label]) -> Result<()> {
        if frame.len() != self.len() {
            return Err(mismatch(
                format!("{} pixels ({}x{})", self.len(), self.rows, self.cols),
                format!("{} pixels", frame.len()),
            ));
        }
        Ok(())
    }

    pub(crate) fn check_stack(&self, stack: &LabelStack) -> Result<()> {
        if stack.rows() != self.rows || stack.cols() != self.cols {
            return Err(mismatch(
                format!("{}x{} grid", self.rows, self.cols),
                format!("{}x{} grid", stack.rows(), stack.cols()),
            ));
        }
        Ok(())
    }
}

/// Water levels, one per timestep, each in `0..=capacity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSeries {
    levels: Vec<usize>,
    capacity: usize,
}

impl LevelSeries {
    pub fn new(levels: Vec<usize>, capacity: usize) -> Result<Self> {
        if let Some((t, &l)) = levels.iter().enumerate().find(|(_, &l)| l > capacity) {
            return Err(invalid(format!(
                "level {l} at timestep {t} exceeds capacity {capacity}"
            )));
        }
        Ok(Self { levels, capacity })
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `sum_t |theta_t - theta_{t+1}|`.
    pub fn total_variation(&self) -> u64 {
        self.levels
            .windows(2)
            .map(|w| w[0].abs_diff(w[1]) as u64)
            .sum()
    }
}

/// Mismatch counts between one observed frame and every consistent
/// labelling, indexed by level `0..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrProfile {
    costs: Vec<u64>,
}

impl ErrProfile {
    pub fn from_costs(costs: Vec<u64>) -> Result<Self> {
        if costs.is_empty() {
            return Err(invalid("an error profile needs at least one level"));
        }
        Ok(Self { costs })
    }

    pub fn costs(&self) -> &[u64] {
        &self.costs
    }

    pub fn cost(&self, theta: usize) -> u64 {
        self.costs[theta]
    }

    /// The largest level, `N`.
    pub fn capacity(&self) -> usize {
        self.costs.len() - 1
    }

    /// Smallest level attaining the minimum cost, with that cost.
    pub fn argmin(&self) -> (usize, u64) {
        let mut best = (0, self.costs[0]);
        for (theta, &c) in self.costs.iter().enumerate().skip(1) {
            if c < best.1 {
                best = (theta, c);
            }
        }
        best
    }
}

/// Ranks pixels by ascending elevation; equal elevations keep row-major
/// order.
pub fn ordering_from_elevation(elev: &ElevationGrid) -> Result<ElevationOrdering> {
    let values = elev.values();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(invalid(format!("non-finite elevation at pixel {i}")));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps the row-major tie-break
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite"));
    ElevationOrdering::from_pixel_order(elev.rows(), elev.cols(), order)
}

/// Like [`ordering_from_elevation`], but pixels outside `basin` are pushed
/// to the shallowest ranks (in row-major order) so they never fill before a
/// basin pixel.
pub fn ordering_from_elevation_masked(
    elev: &ElevationGrid,
    basin: &[bool],
) -> Result<ElevationOrdering> {
    if basin.len() != elev.values().len() {
        return Err(mismatch(elev.values().len(), basin.len()));
    }
    let base = ordering_from_elevation(elev)?;
    let mut order: Vec<usize> = base
        .pixels_by_rank()
        .iter()
        .copied()
        .filter(|&p| basin[p])
        .collect();
    order.extend((0..basin.len()).filter(|&p| !basin[p]));
    ElevationOrdering::from_pixel_order(elev.rows(), elev.cols(), order)
}

/// The consistent labelling at level `theta`: water iff `rank < theta`.
pub fn labels_at_level(ordering: &ElevationOrdering, theta: usize) -> Result<Vec<Label>> {
    if theta > ordering.len() {
        return Err(invalid(format!(
            "level {theta} outside 0..={}",
            ordering.len()
        )));
    }
    Ok(ordering
        .ranks()
        .iter()
        .map(|&r| if r < theta { Label::Water } else { Label::Land })
        .collect())
}

/// Inverse of [`labels_at_level`]: the level of a physically consistent
/// frame, or `None` if the frame is not consistent with `ordering` (or
/// contains missing/unknown labels).
pub fn level_of_labels(frame: &[Label], ordering: &ElevationOrdering) -> Option<usize> {
    if frame.len() != ordering.len() {
        return None;
    }
    let mut theta = 0;
    for &l in frame {
        match l {
            Label::Water => theta += 1,
            Label::Land => {}
            _ => return None,
        }
    }
    let consistent = ordering
        .pixels_by_rank()
        .iter()
        .enumerate()
        .all(|(r, &p)| (frame[p] == Label::Water) == (r < theta));
    consistent.then_some(theta)
}
