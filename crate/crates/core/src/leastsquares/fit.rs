use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::basis::TensorBasis;
use super::sampling::SampleBatch;
use crate::error::{Error, Result};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::univariate::OrthoFamily;
use crate::vnorm::VNorm;
use crate::{par, Evaluable};

/// Rows per assembly chunk; partial Gram matrices are summed in chunk
/// order so the result does not depend on the thread count.
const ASSEMBLY_CHUNK: usize = 1024;

/// Relative pivot threshold below which `G` is treated as singular.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Variant {
    Plain,
    /// `T_τ(z) = z` if `‖z‖ ≤ τ`, else `τ z/‖z‖`, applied after evaluation.
    Truncated { tau: f64 },
    /// Zero model when `cond(G) > a`.
    Conditioned { a: f64 },
}

impl Variant {
    /// Conditioned variant with the default threshold `A = 3`.
    pub fn conditioned() -> Self {
        Variant::Conditioned { a: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `‖G − I‖₂`.
    pub gram_deviation: f64,
    /// `λ_max/λ_min`; infinite when `G` is singular.
    pub cond: f64,
    pub m: usize,
    pub n: usize,
    pub weighted: bool,
    /// The minimal-norm spectral solve was used.
    pub singular: bool,
    /// The conditioned variant replaced the fit by zero.
    pub zeroed: bool,
}

/// Least-squares approximation `Σ_ν c_ν φ_ν` with `c_ν ∈ V`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LsModel {
    set: IndexSet,
    family: OrthoFamily,
    dim: usize,
    coeffs: Vec<Vec<f64>>,
    diagnostics: Diagnostics,
    variant: Variant,
    #[serde(default)]
    norm: VNorm,
    #[serde(skip)]
    basis: Option<TensorBasis>,
}

/// Weighted normal equations `G`, `d` assembled from samples.
pub struct NormalEquations {
    pub gram: DMatrix<f64>,
    pub rhs: DMatrix<f64>,
}

/// `G_{jk} = (1/m) Σ w_i φ_j(y^i) φ_k(y^i)`, `d_j = (1/m) Σ w_i φ_j(y^i) u(y^i)`.
pub fn assemble(basis: &TensorBasis, batch: &SampleBatch, values: &[Vec<f64>], dim: usize) -> NormalEquations {
    let n = basis.len();
    let m = batch.len();
    let parts = par::map_chunks(m, ASSEMBLY_CHUNK, |range| {
        let mut g = DMatrix::<f64>::zeros(n, n);
        let mut d = DMatrix::<f64>::zeros(n, dim);
        let mut phi = Vec::with_capacity(n);
        for i in range {
            basis.eval_into(&batch.points[i], &mut phi);
            let w = batch.weights[i];
            for a in 0..n {
                let wa = w * phi[a];
                if wa == 0.0 {
                    continue;
                }
                for b in a..n {
                    g[(a, b)] += wa * phi[b];
                }
                for (c, v) in values[i].iter().enumerate() {
                    d[(a, c)] += wa * v;
                }
            }
        }
        (g, d)
    });
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DMatrix::<f64>::zeros(n, dim);
    for (g, d) in parts {
        gram += g;
        rhs += d;
    }
    let scale = 1.0 / m as f64;
    gram *= scale;
    rhs *= scale;
    for a in 0..n {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    NormalEquations { gram, rhs }
}

/// `‖G − I‖₂` by a symmetric eigensolve.
pub fn gram_deviation(gram: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(gram.clone());
    eig.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max((l - 1.0).abs()))
}

fn spectrum_diagnostics(gram: &DMatrix<f64>) -> (f64, f64, SymmetricEigen<f64, nalgebra::Dyn>) {
    let eig = SymmetricEigen::new(gram.clone());
    let dev = eig.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max((l - 1.0).abs()));
    let lmax = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lmin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let cond = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    (dev, cond, eig)
}

/// Solves `G c = d`: Cholesky when every pivot clears
/// `1e−12 · trace/n`, otherwise the minimal-norm solution from the
/// spectral decomposition.
fn solve(gram: &DMatrix<f64>, rhs: &DMatrix<f64>, eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> (DMatrix<f64>, bool) {
    let n = gram.nrows();
    let tol = SINGULAR_TOL * gram.trace() / n as f64;
    if let Some(chol) = gram.clone().cholesky() {
        let l = chol.l_dirty();
        let min_pivot = (0..n).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_pivot > tol {
            return (chol.solve(rhs), false);
        }
    }
    let v = &eig.eigenvectors;
    let mut proj = v.transpose() * rhs;
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        let scale = if lambda > tol { 1.0 / lambda } else { 0.0 };
        proj.row_mut(i).scale_mut(scale);
    }
    (v * proj, true)
}

/// Fits the least-squares model on `set` from samples `values[i] = u(y^i)`.
pub fn fit(
    values: &[Vec<f64>],
    batch: &SampleBatch,
    set: &IndexSet,
    family: OrthoFamily,
    variant: Variant,
) -> Result<LsModel> {
    let m = batch.len();
    if m == 0 {
        return Err(Error::InvalidArgument("least squares needs at least one sample".into()));
    }
    if values.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: values.len() });
    }
    let dim = values[0].len();
    if let Some(bad) = values.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
    }
    match variant {
        Variant::Truncated { tau } if !(tau > 0.0) => {
            return Err(Error::InvalidArgument(format!("truncation bound must be positive, got {tau}")))
        }
        Variant::Conditioned { a } if !(a >= 1.0) => {
            return Err(Error::InvalidArgument(format!("conditioning threshold must be >= 1, got {a}")))
        }
        _ => {}
    }
    let basis = TensorBasis::for_set(family, set);
    if let Some(y) = batch.points.iter().find(|y| y.len() < basis.dims()) {
        return Err(Error::DimensionMismatch { expected: basis.dims(), found: y.len() });
    }
    let NormalEquations { gram, rhs } = assemble(&basis, batch, values, dim);
    let (gram_deviation, cond, eig) = spectrum_diagnostics(&gram);
    let (c, singular) = solve(&gram, &rhs, &eig);
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("least-squares solve produced non-finite coefficients".into()));
    }
    let zeroed = matches!(variant, Variant::Conditioned { a } if cond > a);
    let coeffs = (0..set.len())
        .map(|i| if zeroed { vec![0.0; dim] } else { c.row(i).iter().copied().collect() })
        .collect();
    Ok(LsModel {
        set: set.clone(),
        family,
        dim,
        coeffs,
        diagnostics: Diagnostics {
            gram_deviation,
            cond,
            m,
            n: set.len(),
            weighted: batch.is_weighted(),
            singular,
            zeroed,
        },
        variant,
        norm: VNorm::Euclidean,
        basis: Some(basis),
    })
}

/// `T_τ(z)`.
pub fn truncate(z: &mut [f64], tau: f64, norm: &VNorm) {
    let r = norm.norm(z);
    if r > tau {
        let s = tau / r;
        z.iter_mut().for_each(|v| *v *= s);
    }
}

impl LsModel {
    /// Norm used by the truncated variant.
    pub fn with_norm(mut self, norm: VNorm) -> Self {
        self.norm = norm;
        self
    }

    pub fn set(&self) -> &IndexSet {
        &self.set
    }

    pub fn family(&self) -> OrthoFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn coefficient(&self, nu: &MultiIndex) -> Option<&[f64]> {
        self.set.position(nu).map(|i| self.coeffs[i].as_slice())
    }

    fn basis(&self) -> std::borrow::Cow<'_, TensorBasis> {
        match &self.basis {
            Some(b) => std::borrow::Cow::Borrowed(b),
            None => std::borrow::Cow::Owned(TensorBasis::for_set(self.family, &self.set)),
        }
    }

    /// Restores the cached basis after deserialization.
    pub fn rebuild(&mut self) {
        self.basis = Some(TensorBasis::for_set(self.family, &self.set));
    }

    /// Untruncated `Σ c_ν φ_ν(y)`.
    pub fn evaluate_raw(&self, y: &[f64]) -> Vec<f64> {
        let phi = self.basis().eval(y);
        let mut out = vec![0.0; self.dim];
        for (p, c) in phi.iter().zip(&self.coeffs) {
            for (o, ci) in out.iter_mut().zip(c) {
                *o += p * ci;
            }
        }
        out
    }

    /// Model value, with `T_τ` applied for the truncated variant.
    pub fn evaluate(&self, y: &[f64]) -> Vec<f64> {
        let mut v = self.evaluate_raw(y);
        if let Variant::Truncated { tau } = self.variant {
            truncate(&mut v, tau, &self.norm);
        }
        v
    }

    pub fn evaluate_batch(&self, ys: &[Vec<f64>]) -> Vec<Vec<f64>> {
        par::map_slice(ys, |y| self.evaluate(y))
    }

    /// The same coefficients restricted to a downward closed subset.
    pub fn restrict(&self, subset: &IndexSet) -> Result<LsModel> {
        let coeffs = subset
            .iter()
            .map(|nu| {
                self.coefficient(nu)
                    .map(<[f64]>::to_vec)
                    .ok_or_else(|| Error::InvalidIndexSet(format!("{nu:?} is not in the model set")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = self.clone();
        out.set = subset.clone();
        out.coeffs = coeffs;
        out.diagnostics.n = subset.len();
        out.rebuild();
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut m: LsModel = serde_json::from_str(text)?;
        m.rebuild();
        Ok(m)
    }

    /// CSV with one row per index: `nu,c1,…,c_dim`; `nu` is dense and
    /// space separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("nu");
        for c in 1..=self.dim {
            out.push_str(&format!(",c{c}"));
        }
        out.push('\n');
        for (nu, c) in self.set.iter().zip(&self.coeffs) {
            let dense: Vec<String> = nu.dense_prefix().iter().map(u32::to_string).collect();
            out.push_str(&dense.join(" "));
            for v in c {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

impl Evaluable for LsModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, y: &[f64]) -> Vec<f64> {
        LsModel::evaluate(self, y)
    }
}
