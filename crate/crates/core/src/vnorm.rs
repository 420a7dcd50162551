//! Norms on the finite-dimensional output space `V = ℝ^dim`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum VNorm {
    #[default]
    Euclidean,
    Max,
    /// `sqrt(h Σ v_i²)`, the mesh L² norm of interior nodal values.
    DiscreteL2 { h: f64 },
    /// `sqrt(Σ (v_{i+1} − v_i)² / h)` with zero boundary values appended on
    /// both ends.
    DiscreteH1 { h: f64 },
    /// `sqrt(vᵀ M v)` for a symmetric positive definite `M`.
    #[serde(skip)]
    Gram(DMatrix<f64>),
}

impl VNorm {
    pub fn norm(&self, v: &[f64]) -> f64 {
        match self {
            VNorm::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            VNorm::Max => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
            VNorm::DiscreteL2 { h } => (h * v.iter().map(|x| x * x).sum::<f64>()).sqrt(),
            VNorm::DiscreteH1 { h } => {
                let n = v.len();
                if n == 0 {
                    return 0.0;
                }
                let mut s = v[0] * v[0] + v[n - 1] * v[n - 1];
                for w in v.windows(2) {
                    let d = w[1] - w[0];
                    s += d * d;
                }
                (s / h).sqrt()
            }
            VNorm::Gram(m) => {
                let x = nalgebra::DVectorView::from_slice(v, v.len());
                (x.dot(&(m * x))).max(0.0).sqrt()
            }
        }
    }

    /// Norm of `a − b`.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&diff)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_of_simple_vectors() {
        let v = [3.0, -4.0];
        assert_eq!(VNorm::Euclidean.norm(&v), 5.0);
        assert_eq!(VNorm::Max.norm(&v), 4.0);
        assert!((VNorm::DiscreteL2 { h: 0.25 }.norm(&v) - 2.5).abs() < 1e-15);
        let g = DMatrix::from_diagonal_element(2, 2, 4.0);
        assert!((VNorm::Gram(g).norm(&v) - 10.0).abs() < 1e-14);
    }

    #[test]
    fn discrete_h1_of_hat() {
        // interior values of the hat x ↦ min(x, 1-x) on h = 1/4
        let h = 0.25;
        let v = [0.25, 0.5, 0.25];
        // slopes ±1 on each of the 4 cells: Σ (Δv)²/h = 4 * h
        assert!((VNorm::DiscreteH1 { h }.norm(&v) - 1.0).abs() < 1e-14);
    }
}
