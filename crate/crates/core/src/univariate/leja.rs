//! Leja and ℜ-Leja point sequences.
//!
//! Both maximizations split the domain at the existing points. Between two
//! consecutive points `ln ∏|t − t_l|` is strictly concave (on the circle,
//! `Σ ln|2 sin((θ − φ_l)/2)|` is as well), so each gap holds exactly one
//! local maximum: the root of the derivative, found by bisection to machine
//! precision. Only the interval ends `±1` need separate treatment on the
//! line. The global maximum is the best gap maximum; values whose logs
//! agree within [`TIE_TOL`] count as ties and the smallest candidate wins
//! (smallest `t`, or smallest angle in `[0, 2π)`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TIE_TOL: f64 = 1e-12;

/// Real parts closer than this are treated as repetitions.
pub const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceKind {
    /// Real Leja points on `[−1, 1]` from the given anchor `t₀`.
    Leja { anchor: f64 },
    /// Real parts of complex Leja points on the unit disc, from `e₀ = 1`.
    RLeja,
}

impl Default for SequenceKind {
    fn default() -> Self {
        SequenceKind::Leja { anchor: 1.0 }
    }
}

/// Nested univariate point sequence, extended on demand.
#[derive(Debug, Clone)]
pub struct PointSequence {
    kind: SequenceKind,
    points: Vec<f64>,
    /// Complex Leja angles for the ℜ-Leja kind.
    angles: Vec<f64>,
}

impl PointSequence {
    pub fn leja(anchor: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&anchor) {
            return Err(Error::InvalidArgument(format!("Leja anchor {anchor} outside [-1, 1]")));
        }
        Ok(Self { kind: SequenceKind::Leja { anchor }, points: vec![anchor], angles: Vec::new() })
    }

    pub fn rleja() -> Self {
        Self { kind: SequenceKind::RLeja, points: vec![1.0], angles: vec![0.0] }
    }

    pub fn new(kind: SequenceKind) -> Result<Self> {
        match kind {
            SequenceKind::Leja { anchor } => Self::leja(anchor),
            SequenceKind::RLeja => Ok(Self::rleja()),
        }
    }

    /// Builds a sequence already extended to `len` points.
    pub fn with_len(kind: SequenceKind, len: usize) -> Result<Self> {
        let mut s = Self::new(kind)?;
        s.extend_to(len);
        Ok(s)
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn anchor(&self) -> f64 {
        self.points[0]
    }

    /// Extends the sequence to at least `len` points.
    pub fn extend_to(&mut self, len: usize) {
        while self.points.len() < len {
            match self.kind {
                SequenceKind::Leja { .. } => {
                    let t = next_leja(&self.points);
                    self.points.push(t);
                }
                SequenceKind::RLeja => {
                    let theta = next_circle_leja(&self.angles);
                    self.angles.push(theta);
                    let re = theta.cos();
                    if self.points.iter().all(|p| (p - re).abs() > DEDUP_TOL) {
                        self.points.push(re);
                    }
                }
            }
        }
    }

    /// CSV export `index,value` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for (k, t) in self.points.iter().enumerate() {
            out.push_str(&format!("{k},{t:.16e}\n"));
        }
        out
    }
}

fn log_product(t: f64, nodes: &[f64]) -> f64 {
    nodes.iter().map(|&s| (t - s).abs().ln()).sum()
}

/// Next real Leja point given the current (distinct) nodes.
fn next_leja(nodes: &[f64]) -> f64 {
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut candidates = Vec::with_capacity(sorted.len() + 1);
    if sorted[0] > -1.0 {
        candidates.push(-1.0);
    }
    for w in sorted.windows(2) {
        candidates.push(bisect_decreasing(w[0], w[1], |t| {
            nodes.iter().map(|&s| 1.0 / (t - s)).sum()
        }));
    }
    if *sorted.last().unwrap() < 1.0 {
        candidates.push(1.0);
    }
    pick_max(&candidates, |t| log_product(t, nodes))
}

/// Next angle of the complex Leja sequence on the unit circle.
fn next_circle_leja(angles: &[f64]) -> f64 {
    let log_value = |theta: f64| -> f64 {
        angles
            .iter()
            .map(|&phi| (2.0 * ((theta - phi) * 0.5).sin()).abs().ln())
            .sum()
    };
    let derivative = |theta: f64| -> f64 {
        angles.iter().map(|&phi| 0.5 / ((theta - phi) * 0.5).tan()).sum()
    };
    let mut sorted = angles.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut candidates = Vec::with_capacity(sorted.len());
    for i in 0..sorted.len() {
        let lo = sorted[i];
        let hi = if i + 1 < sorted.len() { sorted[i + 1] } else { sorted[0] + 2.0 * PI };
        let theta = bisect_decreasing(lo, hi, derivative);
        candidates.push(theta.rem_euclid(2.0 * PI));
    }
    pick_max(&candidates, log_value)
}

/// Root of a function decreasing from +∞ at `lo` to −∞ at `hi`.
fn bisect_decreasing<F: Fn(f64) -> f64>(lo: f64, hi: f64, f: F) -> f64 {
    let (mut a, mut b) = (lo, hi);
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            return mid;
        }
        let v = f(mid);
        if v > 0.0 {
            a = mid;
        } else if v < 0.0 {
            b = mid;
        } else {
            return mid;
        }
    }
}

fn pick_max<F: Fn(f64) -> f64>(candidates: &[f64], value: F) -> f64 {
    let scored: Vec<(f64, f64)> = candidates.iter().map(|&t| (t, value(t))).collect();
    let best = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    scored
        .iter()
        .filter(|s| s.1 >= best - TIE_TOL)
        .map(|s| s.0)
        .fold(f64::INFINITY, f64::min)
}

/// Newton-form hierarchical basis on a point sequence:
/// `B_k(t) = ∏_{l<k} (t − t_l) / (t_k − t_l)`, `B₀ ≡ 1`.
pub fn hierarchical_basis_eval(points: &[f64], k: usize, t: f64) -> f64 {
    assert!(k < points.len(), "need {} points for degree {k}", k + 1);
    let tk = points[k];
    points[..k].iter().map(|&tl| (t - tl) / (tk - tl)).product()
}

/// `B_0(t), …, B_kmax(t)` in one pass.
pub fn hierarchical_basis_all(points: &[f64], denominators: &[f64], kmax: usize, t: f64, out: &mut Vec<f64>) {
    out.clear();
    let mut numerator = 1.0;
    out.push(1.0);
    for k in 1..=kmax {
        numerator *= t - points[k - 1];
        out.push(numerator / denominators[k]);
    }
}

/// `∏_{l<k} (t_k − t_l)` for every `k` below `points.len()`.
pub fn newton_denominators(points: &[f64]) -> Vec<f64> {
    (0..points.len())
        .map(|k| points[..k].iter().map(|&tl| points[k] - tl).product())
        .collect()
}
