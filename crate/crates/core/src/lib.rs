//! Sparse polynomial approximation of parametric maps `y ↦ u(y)` on
//! downward closed index sets.
//!
//! The crate covers
//!
//! - multi-indices, downward closed and anchored index sets, a-priori
//!   weight sequences and n-largest set selection ([`multiindex`]);
//! - Leja and ℜ-Leja point sequences, hierarchical Newton bases, Lebesgue
//!   constants and orthonormal families ([`univariate`]);
//! - hierarchical sparse interpolation ([`interpolation`]);
//! - standard and optimally weighted discrete least squares
//!   ([`leastsquares`]);
//! - greedy and bulk-chasing adaptive set selection ([`adaptive`]);
//! - a parametric diffusion testbed and analytic benchmarks ([`testbed`]);
//! - the hierarchical piecewise-linear analogue ([`pwlinear`]).
//!
//! Data-parallel loops (probe evaluation, sample assembly, Monte Carlo
//! trials) go through [`par`], which uses rayon when the `parallel` feature
//! is on and plain iterators otherwise.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod error;
pub mod interpolation;
pub mod leastsquares;
pub mod multiindex;
pub mod par;
pub mod pwlinear;
pub mod quadrature;
pub mod testbed;
pub mod univariate;
pub mod vnorm;

pub use error::{Error, Result};
pub use interpolation::{HierarchicalBasis, HierarchicalInterpolant, PolyBasis};
pub use multiindex::{IndexSet, Letter, Multi, MultiIndex};
pub use vnorm::VNorm;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A black-box map `U → V` with `V = ℝ^dim`.
///
/// Implementations must be safe to call from several threads at once; the
/// batch helpers evaluate targets concurrently when the `parallel` feature
/// is enabled.
pub trait Target: Sync {
    /// Dimension of the output space `V`.
    fn dim(&self) -> usize;

    fn eval(&self, y: &[f64]) -> std::result::Result<Vec<f64>, String>;

    /// Number of parameters the target reads, if finite. Interpolation
    /// points are padded with the anchor up to this length.
    fn param_dim(&self) -> Option<usize> {
        None
    }
}

/// Anything that can be evaluated pointwise into `V`, such as a fitted
/// model or an interpolant.
pub trait Evaluable: Sync {
    fn dim(&self) -> usize;

    fn evaluate(&self, y: &[f64]) -> Vec<f64>;
}

/// Wraps a closure as a [`Target`].
pub struct FnTarget<F> {
    dim: usize,
    params: Option<usize>,
    f: F,
}

impl<F> FnTarget<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, params: None, f }
    }

    /// Declares how many parameters the closure reads.
    pub fn with_params(mut self, params: usize) -> Self {
        self.params = Some(params);
        self
    }
}

impl<F> Target for FnTarget<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, y: &[f64]) -> std::result::Result<Vec<f64>, String> {
        Ok((self.f)(y))
    }

    fn param_dim(&self) -> Option<usize> {
        self.params
    }
}

/// Scalar closure target, `V = ℝ`.
pub fn scalar_target<F>(f: F) -> FnTarget<impl Fn(&[f64]) -> Vec<f64> + Sync>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    FnTarget::new(1, move |y: &[f64]| vec![f(y)])
}
