//! Fixtures shared by the benchmarks.

use orbit_core::synth::{
    aggregate_to_lsr, gen_bathymetry, inject_noise, render_stack, simulate_level_series,
    Bathymetry, LevelPattern, NoiseParams,
};
use orbit_core::{ordering_from_elevation, ElevationOrdering, LabelStack, MappingGrid};

/// A noisy `side x side` lake over `steps` timesteps with its true ordering.
pub fn noisy_lake(side: usize, steps: usize, noise: f64) -> (ElevationOrdering, LabelStack) {
    let elev = gen_bathymetry(&Bathymetry::gaussian_mix(4), side, side, 7).expect("bathymetry");
    let pi = ordering_from_elevation(&elev).expect("ordering");
    let pattern = LevelPattern::Reservoir {
        low: 0.12,
        high: 0.4,
        peaks: 4,
    };
    let levels = simulate_level_series(steps, pi.len(), &pattern, 8).expect("levels");
    let truth = render_stack(&pi, &levels).expect("render");
    (pi, inject_noise(&truth, &params(noise), 9).expect("noise"))
}

/// Noisy coarse stack aggregated from a lake at block factor `factor`, plus
/// the fine ordering.
pub fn noisy_coarse(
    side: usize,
    steps: usize,
    factor: usize,
    noise: f64,
) -> (ElevationOrdering, LabelStack) {
    let (pi, truth) = noisy_lake(side, steps, 0.0);
    let grid = MappingGrid::new(side, side, factor, (0, 0)).expect("grid");
    let coarse = aggregate_to_lsr(&truth, &grid, grid.gr() / 2).expect("aggregate");
    (
        pi,
        inject_noise(&coarse, &params(noise), 10).expect("noise"),
    )
}

fn params(noise: f64) -> NoiseParams {
    NoiseParams {
        target_fraction: noise,
        blob_mean_size: 12.0,
        run_mean_length: 2.0,
        missing_share: 0.3,
    }
}
