use rand::Rng;

use crate::error::{Error, Result};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::univariate::OrthoFamily;

/// Tensorized orthonormal basis `φ_ν(y) = ∏_j φ_{ν_j}(y_j)` over a list of
/// multi-indices.
#[derive(Debug, Clone)]
pub struct TensorBasis {
    family: OrthoFamily,
    indices: Vec<MultiIndex>,
    max_degree: Vec<u32>,
    terms: Vec<Vec<(usize, u32)>>,
}

impl TensorBasis {
    pub fn new(family: OrthoFamily, indices: Vec<MultiIndex>) -> Self {
        let dims = indices.iter().map(MultiIndex::active_dim).max().unwrap_or(0);
        let mut max_degree = vec![0; dims];
        for nu in &indices {
            for (j, k) in nu.support() {
                max_degree[j] = max_degree[j].max(k);
            }
        }
        let terms = indices.iter().map(|nu| nu.support().collect()).collect();
        Self { family, indices, max_degree, terms }
    }

    pub fn for_set(family: OrthoFamily, set: &IndexSet) -> Self {
        Self::new(family, set.members().to_vec())
    }

    pub fn family(&self) -> OrthoFamily {
        self.family
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of coordinates read from `y`.
    pub fn dims(&self) -> usize {
        self.max_degree.len()
    }

    /// Writes `φ_ν(y)` for every index into `out`.
    pub fn eval_into(&self, y: &[f64], out: &mut Vec<f64>) {
        assert!(y.len() >= self.dims(), "point has {} coordinates, basis uses {}", y.len(), self.dims());
        let mut tables = Vec::with_capacity(self.dims());
        let mut buf = Vec::new();
        for (j, &k) in self.max_degree.iter().enumerate() {
            self.family.eval_all(k, y[j], &mut buf);
            tables.push(buf.clone());
        }
        out.clear();
        out.extend(
            self.terms
                .iter()
                .map(|term| term.iter().map(|&(j, k)| tables[j][k as usize]).product::<f64>()),
        );
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.eval_into(y, &mut out);
        out
    }

    /// `k_n(y) = Σ_ν φ_ν(y)²`.
    pub fn kn(&self, y: &[f64]) -> f64 {
        self.eval(y).iter().map(|v| v * v).sum()
    }
}

/// `k_n(y) = Σ_{ν∈Λ} ∏_j φ_{ν_j}(y_j)²`.
pub fn kn(set: &IndexSet, family: OrthoFamily, y: &[f64]) -> f64 {
    TensorBasis::for_set(family, set).kn(y)
}

/// `K_n = sup_y k_n(y)`. On `[−1, 1]^d` every `|φ_k|` used here peaks at
/// `t = 1`, so the supremum is `k_n(1, …, 1)`. Unbounded families are
/// rejected.
#[allow(non_snake_case)]
pub fn Kn(set: &IndexSet, family: OrthoFamily) -> Result<f64> {
    if !family.measure().is_bounded() {
        return Err(Error::UnsupportedFamily(format!("K_n is infinite for {family:?}")));
    }
    let ones = vec![1.0; set.active_dim()];
    Ok(kn(set, family, &ones))
}

/// Search-based check of [`Kn`]: the maximum of `k_n` over all corners of
/// `[−1, 1]^d` (for `d ≤ 12`), `cloud` uniform random points, and the point
/// `(1, …, 1)`.
#[allow(non_snake_case)]
pub fn Kn_search<R: Rng + ?Sized>(set: &IndexSet, family: OrthoFamily, cloud: usize, rng: &mut R) -> Result<f64> {
    let closed = Kn(set, family)?;
    let basis = TensorBasis::for_set(family, set);
    let d = basis.dims();
    let mut best = closed;
    if d <= 12 {
        for mask in 0u32..(1 << d) {
            let y: Vec<f64> = (0..d).map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 }).collect();
            best = best.max(basis.kn(&y));
        }
    }
    for _ in 0..cloud {
        let y: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        best = best.max(basis.kn(&y));
    }
    Ok(best)
}
