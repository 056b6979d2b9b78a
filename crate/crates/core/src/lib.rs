//! Path transformations of Brownian motion preserving its law, with Monte Carlo checks.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod pathcore;
pub mod randvars;
pub mod scalar;
pub mod stattests;
pub mod transforms;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TimeGrid64 = pathcore::TimeGrid<f64>;
pub type Path64 = pathcore::Path<f64>;
pub type AugmentedPath64 = pathcore::AugmentedPath<f64>;
pub type TimeGrid32 = pathcore::TimeGrid<f32>;
pub type Path32 = pathcore::Path<f32>;
pub type AugmentedPath32 = pathcore::AugmentedPath<f32>;
