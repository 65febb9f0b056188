//! Water/land label correction for raster time series using a depth
//! ordering of the basin.
//!
//! A lake fills deepest-first, so at any timestep the physically plausible
//! labellings are the `N + 1` prefixes of an elevation ordering. This crate
//! provides:
//!
//! - [`orbcor`]: per-timestep projection onto the nearest prefix, and
//!   learning the ordering from a label stack;
//! - [`temporal`]: a dynamic program trading label mismatch against level
//!   changes between timesteps;
//! - [`scale`]: transfer of coarse labels to a finer grid through a coarse
//!   ordering derived from the fine one;
//! - [`synth`], [`analysis`], [`io`]: synthetic lakes and noise, evaluation
//!   and bounds, binary formats and CSV export.

pub mod analysis;
pub mod error;
pub mod io;
pub mod orbcor;
pub mod raster;
pub mod scale;
pub mod synth;
pub mod temporal;

pub use analysis::{accuracy_report, AccuracyReport, BoundQuery};
pub use error::{OrbitError, Result};
pub use orbcor::{correct_stack, correct_timestep, err_profile, learn_ordering};
pub use raster::{
    labels_at_level, level_of_labels, ordering_from_elevation, ordering_from_elevation_masked,
    ElevationGrid, ElevationOrdering, ErrProfile, Label, LabelStack, LevelSeries,
};
pub use scale::{
    fuse, FineOrdering, FusionConfig, FusionOutput, MappingGrid, PivotPair, UnknownPolicy,
};
pub use temporal::{
    alpha_sweep, smooth_levels, smooth_stack, suggest_alpha, AlphaSweep, CostBreakdown,
};
