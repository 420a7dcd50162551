//! Analytic parametric functions with known polynomial coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::quadrature;
use crate::univariate::OrthoFamily;
use crate::Target;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Benchmark {
    /// `u(y) = 1/(a₀ + Σ b_j y_j)` with `a₀ > Σ|b_j|`.
    Rational { a0: f64, b: Vec<f64> },
    /// `u(y) = ∏_j exp(g_j y_j)`.
    TensorExponential { g: Vec<f64> },
}

impl Benchmark {
    pub fn rational(a0: f64, b: Vec<f64>) -> Result<Self> {
        let s: f64 = b.iter().map(|v| v.abs()).sum();
        if !(a0 > s) {
            return Err(Error::InvalidArgument(format!("rational benchmark needs a0 > Σ|b_j| ({a0} <= {s})")));
        }
        Ok(Benchmark::Rational { a0, b })
    }

    pub fn tensor_exponential(g: Vec<f64>) -> Self {
        Benchmark::TensorExponential { g }
    }

    pub fn validate(&self) -> Result<()> {
        if let Benchmark::Rational { a0, b } = self {
            Self::rational(*a0, b.clone())?;
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        match self {
            Benchmark::Rational { b, .. } => b.len(),
            Benchmark::TensorExponential { g } => g.len(),
        }
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        match self {
            Benchmark::Rational { a0, b } => 1.0 / (a0 + b.iter().zip(y).map(|(bj, yj)| bj * yj).sum::<f64>()),
            Benchmark::TensorExponential { g } => g.iter().zip(y).map(|(gj, yj)| gj * yj).sum::<f64>().exp(),
        }
    }

    /// Taylor coefficient `t_ν` at `y = 0`.
    pub fn taylor_coefficient(&self, nu: &MultiIndex) -> f64 {
        match self {
            Benchmark::Rational { a0, b } => {
                // (−1)^{|ν|} |ν|!/ν! b^ν / a₀^{|ν|+1}
                let k = nu.degree();
                let mut log_mag = ln_factorial(k) - (k as f64 + 1.0) * a0.ln();
                let mut negative = k % 2 == 1;
                for (j, nj) in nu.support() {
                    let bj = b.get(j).copied().unwrap_or(0.0);
                    if bj == 0.0 {
                        return 0.0;
                    }
                    log_mag += nj as f64 * bj.abs().ln() - ln_factorial(nj);
                    if bj < 0.0 && nj % 2 == 1 {
                        negative = !negative;
                    }
                }
                let v = log_mag.exp();
                if negative {
                    -v
                } else {
                    v
                }
            }
            Benchmark::TensorExponential { g } => nu
                .support()
                .map(|(j, k)| g.get(j).copied().unwrap_or(0.0).powi(k as i32) / ln_factorial(k).exp())
                .product(),
        }
    }

    /// `Σ_{ν∉Λ} |t_ν|`, from the closed form of the full sum.
    pub fn taylor_l1_tail(&self, set: &IndexSet) -> f64 {
        let total = match self {
            Benchmark::Rational { a0, b } => 1.0 / (a0 - b.iter().map(|v| v.abs()).sum::<f64>()),
            Benchmark::TensorExponential { g } => g.iter().map(|v| v.abs()).sum::<f64>().exp(),
        };
        let inside: f64 = set.iter().map(|nu| self.taylor_coefficient(nu).abs()).sum();
        (total - inside).max(0.0)
    }

    /// Coefficient `⟨u, L_ν⟩` in the orthonormal Legendre basis for the
    /// tensor exponential, by per-coordinate Gauss quadrature.
    pub fn legendre_coefficient(&self, nu: &MultiIndex) -> Result<f64> {
        let g = match self {
            Benchmark::TensorExponential { g } => g,
            Benchmark::Rational { .. } => {
                return Err(Error::InvalidArgument("Legendre coefficients are tabulated for the tensor exponential only".into()))
            }
        };
        let rule = quadrature::gauss_legendre(40);
        let mut out = 1.0;
        for (j, &gj) in g.iter().enumerate() {
            let k = nu.get(j);
            out *= rule.integrate(|t| (gj * t).exp() * OrthoFamily::Legendre.eval(k, t));
        }
        if nu.active_dim() > g.len() {
            return Ok(0.0);
        }
        Ok(out)
    }
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

impl Target for Benchmark {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, y: &[f64]) -> std::result::Result<Vec<f64>, String> {
        if y.len() < self.d() {
            return Err(format!("expected {} parameters, got {}", self.d(), y.len()));
        }
        Ok(vec![self.value(y)])
    }

    fn param_dim(&self) -> Option<usize> {
        Some(self.d())
    }
}
