//! Adaptive construction of anchored downward closed sets: greedy and
//! conservative interpolation, bulk chasing, and adaptive least squares.

mod interp;
mod ls;

pub use interp::{GreedyInterpolation, InterpRule, InterpStep, WeightNorm};
pub use ls::{AdaptiveLs, AdaptiveLsConfig, LsStep};

use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Smallest `F ⊆ R` of positive size with `Σ_F E ≥ α Σ_R E`, taking
/// entries in decreasing `E` with ties in the given (canonical) order.
/// Returns positions into `scores`.
pub fn bulk(scores: &[f64], alpha: f64) -> Vec<usize> {
    bulk_with_floor(scores, alpha, 0.0)
}

/// [`bulk`] where scores `≤ floor` count as zero. When every score is at
/// or below the floor the first entry alone is returned.
pub fn bulk_with_floor(scores: &[f64], alpha: f64, floor: f64) -> Vec<usize> {
    assert!(!scores.is_empty(), "bulk needs a nonempty candidate set");
    assert!(alpha > 0.0 && alpha <= 1.0, "bulk fraction must lie in (0, 1]");
    let eff: Vec<f64> = scores.iter().map(|&e| if e > floor { e } else { 0.0 }).collect();
    let mut order: Vec<usize> = (0..eff.len()).collect();
    // stable sort keeps canonical order among ties
    order.sort_by(|&a, &b| eff[b].total_cmp(&eff[a]));
    let total: f64 = eff.iter().sum();
    if total == 0.0 {
        return vec![0];
    }
    let threshold = alpha * total;
    let mut acc = 0.0;
    let mut out = Vec::new();
    for i in order {
        out.push(i);
        acc += eff[i];
        if acc >= threshold || eff[i] == 0.0 {
            break;
        }
    }
    // with alpha = 1 rounding can leave acc just short; zeros never count
    if eff[*out.last().expect("nonempty")] == 0.0 && out.len() > 1 {
        out.pop();
    }
    out
}

/// Budget guards for adaptive runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_iterations: usize,
    /// Maximum target evaluations.
    pub max_evaluations: usize,
    /// Maximum `#Λ`.
    pub max_set_size: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_iterations: 1000, max_evaluations: 10_000_000, max_set_size: 100_000 }
    }
}

pub(crate) struct Stopwatch(Instant);

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self(Instant::now())
    }

    pub(crate) fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bulk_examples() {
        assert_eq!(bulk(&[3.0, 2.0, 1.0], 0.5), vec![0]);
        let mut all = bulk(&[3.0, 2.0, 1.0], 1.0);
        all.sort();
        assert_eq!(all, vec![0, 1, 2]);
        assert_eq!(bulk(&[1.0, 1.0, 1.0, 1.0], 0.6), vec![0, 1, 2]);
        assert_eq!(bulk(&[0.0, 0.0], 0.5), vec![0]);
        assert_eq!(bulk(&[1.0, 3.0], 0.5), vec![1]);
    }

    #[test]
    fn bulk_floor_drops_noise() {
        let f = bulk_with_floor(&[1.0, 1e-17, 0.5], 1.0, 1e-12);
        assert_eq!(f, vec![0, 2]);
        assert_eq!(bulk_with_floor(&[1e-17, 1e-18], 1.0, 1e-12), vec![0]);
    }
}
