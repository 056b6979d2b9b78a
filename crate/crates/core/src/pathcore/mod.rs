//! Time grids, discretized paths and exact samplers.

mod grid;
mod path;
mod rng;
mod sampler;

pub use grid::TimeGrid;
pub use path::{AProvenance, AugmentedPath, Path};
pub use rng::RngStream;
pub use sampler::{gaussian_at_random_time, sample_bm, sample_bridge};

/// Checks a grid can be built; convenience twin of [`TimeGrid::new`].
pub fn make_grid<T: crate::scalar::Real>(
    t_horizon: T,
    n_steps: usize,
) -> crate::error::Result<TimeGrid<T>> {
    TimeGrid::new(t_horizon, n_steps)
}
