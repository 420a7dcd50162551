//! Parametric diffusion testbed, analytic benchmarks, and error
//! measurement.

mod benchmarks;
mod cache;
mod diffusion;
mod measure;

pub use benchmarks::Benchmark;
pub use cache::{config_hash, CachedTarget, DiskCache};
pub use diffusion::{
    apply_stiffness, solve_fd, zeta, CoefficientModel, DiffusionConfig, DiffusionProblem, Family, Output,
};
pub use measure::{measure_error, point_set, ErrorConfig, ErrorReport, Reference};
