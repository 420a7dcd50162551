//! Grid estimates of the Lebesgue constants `𝕃_k` and `𝔻_k`.
//!
//! Both are maxima over a uniform grid on `[−1, 1]` and therefore lower
//! bounds of the true suprema; the grid size is reported alongside.

use serde::Serialize;

use crate::par;

/// Default grid: `10⁵ + 1` uniform points.
pub const DEFAULT_GRID: usize = 100_001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LebesgueEstimate {
    pub k: usize,
    /// `𝕃_k = sup ‖I_k f‖ / ‖f‖`.
    pub lambda: f64,
    /// `𝔻_k = sup ‖(I_k − I_{k−1}) f‖ / ‖f‖`, with `I_{−1} = 0`.
    pub delta: f64,
    pub grid: usize,
}

/// Lagrange basis `ℓ_i(t)` for nodes `x_0..x_k` via barycentric weights.
fn lagrange_values(nodes: &[f64], bary: &[f64], t: f64, out: &mut [f64]) {
    if let Some(i) = nodes.iter().position(|&x| x == t) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[i] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for (i, (&x, &w)) in nodes.iter().zip(bary).enumerate() {
        let q = w / (t - x);
        out[i] = q;
        denom += q;
    }
    out.iter_mut().for_each(|v| *v /= denom);
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            1.0 / nodes
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, &x)| nodes[i] - x)
                .product::<f64>()
        })
        .collect()
}

/// `(𝕃_k, 𝔻_k)` for `k = 0..=kmax`.
pub fn lebesgue_constants(points: &[f64], kmax: usize, grid: usize) -> Vec<LebesgueEstimate> {
    assert!(points.len() > kmax, "need {} points", kmax + 1);
    assert!(grid >= 2);
    let ts: Vec<f64> = (0..grid)
        .map(|i| if i + 1 == grid { 1.0 } else { -1.0 + 2.0 * i as f64 / (grid - 1) as f64 })
        .collect();
    let weights: Vec<Vec<f64>> = (0..=kmax).map(|k| barycentric_weights(&points[..=k])).collect();

    // per grid point: running maxima of both functions for every k
    let chunks = par::map_chunks(grid, 2048, |range| {
        let mut lam = vec![0.0_f64; kmax + 1];
        let mut del = vec![0.0_f64; kmax + 1];
        let mut prev = vec![0.0; kmax + 1];
        let mut cur = vec![0.0; kmax + 1];
        for &t in &ts[range] {
            for k in 0..=kmax {
                lagrange_values(&points[..=k], &weights[k], t, &mut cur[..=k]);
                let l: f64 = cur[..=k].iter().map(|v| v.abs()).sum();
                let d: f64 = if k == 0 {
                    cur[0].abs()
                } else {
                    cur[..k].iter().zip(&prev[..k]).map(|(a, b)| (a - b).abs()).sum::<f64>() + cur[k].abs()
                };
                lam[k] = lam[k].max(l);
                del[k] = del[k].max(d);
                std::mem::swap(&mut prev, &mut cur);
            }
        }
        (lam, del)
    });
    let mut lam = vec![0.0_f64; kmax + 1];
    let mut del = vec![0.0_f64; kmax + 1];
    for (l, d) in chunks {
        for k in 0..=kmax {
            lam[k] = lam[k].max(l[k]);
            del[k] = del[k].max(d[k]);
        }
    }
    (0..=kmax)
        .map(|k| LebesgueEstimate { k, lambda: lam[k], delta: del[k], grid })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::{PointSequence, SequenceKind};
    use super::*;

    #[test]
    fn lambda_zero_is_one() {
        let s = PointSequence::with_len(SequenceKind::Leja { anchor: 1.0 }, 3).unwrap();
        let est = lebesgue_constants(s.points(), 2, 1001);
        assert_eq!(est[0].lambda, 1.0);
        assert_eq!(est[0].delta, 1.0);
        // nodes {1, -1}: linear interpolation has Lebesgue constant 1
        assert!((est[1].lambda - 1.0).abs() < 1e-12);
        // Δ_1 f = (f(t1) - f(t0)) (1 - t)/2: worst case 2 at t = -1
        assert!((est[1].delta - 2.0).abs() < 1e-12);
    }

    #[test]
    fn delta_matches_newton_form() {
        // 𝔻_k = ‖B_k‖∞ (1 + Σ_{i<k} |ℓ_i^{(k-1)}(t_k)|)
        let s = PointSequence::with_len(SequenceKind::Leja { anchor: 1.0 }, 9).unwrap();
        let p = s.points();
        let grid = 20_001;
        let est = lebesgue_constants(p, 8, grid);
        for k in 1..=8 {
            let w = barycentric_weights(&p[..k]);
            let mut l = vec![0.0; k];
            lagrange_values(&p[..k], &w, p[k], &mut l);
            let factor = 1.0 + l.iter().map(|v| v.abs()).sum::<f64>();
            let bmax = (0..grid)
                .map(|i| -1.0 + 2.0 * i as f64 / (grid - 1) as f64)
                .map(|t| super::super::hierarchical_basis_eval(p, k, t).abs())
                .fold(0.0, f64::max);
            assert!((est[k].delta - bmax * factor).abs() < 1e-9 * est[k].delta);
        }
    }
}
