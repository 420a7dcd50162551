//! A-priori weight sequences `κ_ν` of product form `∏_j f(b_j, ν_j)`.
//!
//! All kinds are evaluated in log space. The Legendre and interpolation
//! kinds carry an algebraic factor and are not monotone on their own;
//! [`WeightSequence::log_majorant`] gives the exact monotone majorant
//! `κ̂_ν = max_{ν̃ ≥ ν} κ_ν̃`, which factorizes coordinatewise because each
//! factor `f(b, k)` is unimodal in `k` when `b < 1`.

use serde::{Deserialize, Serialize};

use super::MultiIndex;
use crate::error::{Error, Result};

/// Closed-form or explicit rule for the sequence `(b_j)_{j≥1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum BRule {
    /// `b_j = c · j^(−tau)`.
    Algebraic { c: f64, tau: f64 },
    /// `b_j = c · sigma^j`.
    Geometric { c: f64, sigma: f64 },
    /// Finite list; coordinates beyond its length are inactive (`b_j = 0`).
    Explicit { values: Vec<f64> },
}

impl BRule {
    /// `b_{j+1}` for the 0-based coordinate `j`.
    pub fn value(&self, j: usize) -> f64 {
        let jj = (j + 1) as f64;
        match self {
            BRule::Algebraic { c, tau } => c * jj.powf(-tau),
            BRule::Geometric { c, sigma } => c * sigma.powf(jj),
            BRule::Explicit { values } => values.get(j).copied().unwrap_or(0.0),
        }
    }

    /// Number of active coordinates, `None` when unbounded.
    pub fn len(&self) -> Option<usize> {
        match self {
            BRule::Explicit { values } => Some(values.len()),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidWeights(msg));
        match self {
            BRule::Algebraic { c, tau } => {
                if !(*c > 0.0) || !(*tau >= 0.0) {
                    return bad(format!("algebraic rule needs c > 0, tau >= 0 (c={c}, tau={tau})"));
                }
            }
            BRule::Geometric { c, sigma } => {
                if !(*c > 0.0) || !(*sigma > 0.0 && *sigma <= 1.0) {
                    return bad(format!("geometric rule needs c > 0, 0 < sigma <= 1 (c={c}, sigma={sigma})"));
                }
            }
            BRule::Explicit { values } => {
                if values.is_empty() {
                    return bad("explicit rule needs at least one value".into());
                }
                if values.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
                    return bad("explicit b values must be positive and finite".into());
                }
                if values.windows(2).any(|w| w[1] > w[0]) {
                    return bad("b must be monotone nonincreasing".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightKind {
    /// `b^ν` (Taylor).
    Geometric,
    /// `b^ν β(ν)` with `β(ν) = ∏ (1 + 2ν_j)^{1/2}` (Legendre, L²).
    LegendreL2,
    /// `b^ν β(ν)²` (Legendre, L∞).
    LegendreLinf,
    /// `π(ν) b^ν` with `π(ν) = ∏ (1 + ν_j)^{θ+1}`.
    InterpTaylor { theta: u32 },
    /// `π(ν) β(ν)² b^ν`.
    InterpLegendre { theta: u32 },
    /// `∏_j (Σ_{l=0}^r C(ν_j, l) b_j^{−2l})^{−1/2}` (Hermite).
    Hermite { r: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    #[serde(flatten)]
    kind: WeightKind,
    b: BRule,
}

impl WeightSequence {
    pub fn new(kind: WeightKind, b: BRule) -> Result<Self> {
        b.validate()?;
        let needs_contraction = !matches!(kind, WeightKind::Hermite { .. });
        if needs_contraction && b.value(0) >= 1.0 {
            return Err(Error::InvalidWeights(format!(
                "{kind:?} weights need b_j < 1 for all j (b_1 = {})",
                b.value(0)
            )));
        }
        if let WeightKind::Hermite { r } = kind {
            if r == 0 {
                return Err(Error::InvalidWeights("Hermite order r must be >= 1".into()));
            }
        }
        Ok(Self { kind, b })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn b(&self) -> &BRule {
        &self.b
    }

    /// Bound on usable coordinates: explicit rules stop at their length.
    pub fn max_dims(&self) -> Option<usize> {
        self.b.len()
    }

    /// `ln f(b_{j+1}, k)`; `−∞` for inactive coordinates with `k > 0`.
    pub fn log_factor(&self, j: usize, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let b = self.b.value(j);
        if !(b > 0.0) {
            return f64::NEG_INFINITY;
        }
        let kf = k as f64;
        let lb = b.ln();
        match self.kind {
            WeightKind::Geometric => kf * lb,
            WeightKind::LegendreL2 => kf * lb + 0.5 * (1.0 + 2.0 * kf).ln(),
            WeightKind::LegendreLinf => kf * lb + (1.0 + 2.0 * kf).ln(),
            WeightKind::InterpTaylor { theta } => kf * lb + (theta as f64 + 1.0) * (1.0 + kf).ln(),
            WeightKind::InterpLegendre { theta } => {
                kf * lb + (theta as f64 + 1.0) * (1.0 + kf).ln() + (1.0 + 2.0 * kf).ln()
            }
            WeightKind::Hermite { r } => -0.5 * log_hermite_sum(k, r, lb),
        }
    }

    /// `ln κ_ν`.
    pub fn log_evaluate(&self, nu: &MultiIndex) -> f64 {
        nu.support().map(|(j, k)| self.log_factor(j, k)).sum()
    }

    /// `κ_ν`; may underflow to zero for large indices, prefer the log form
    /// for comparisons.
    pub fn evaluate(&self, nu: &MultiIndex) -> f64 {
        self.log_evaluate(nu).exp()
    }

    /// `ln max_{k' ≥ k} f(b_{j+1}, k')`.
    pub fn log_factor_majorant(&self, j: usize, k: u32) -> f64 {
        let mut kk = k;
        let mut cur = self.log_factor(j, kk);
        if cur == f64::NEG_INFINITY {
            return cur;
        }
        // the ratio f(k+1)/f(k) is nonincreasing in k, so the first
        // descent marks the maximum over [k, ∞)
        loop {
            let next = self.log_factor(j, kk + 1);
            if next <= cur {
                return cur;
            }
            cur = next;
            kk += 1;
        }
    }

    /// `ln κ̂_ν`, the exact monotone majorant.
    pub fn log_majorant(&self, nu: &MultiIndex) -> f64 {
        let dims = nu.active_dim();
        let mut total = 0.0;
        // coordinates outside the support contribute max_{k≥0} f(b_j, k),
        // which is 1 exactly when the factor never rises above f(0) = 1
        for j in 0..dims {
            total += self.log_factor_majorant(j, nu.get(j));
        }
        total + self.log_tail_majorant(dims)
    }

    /// Σ_{j ≥ from} ln max_k f(b_j, k): the contribution of inactive
    /// coordinates. Zero for monotone kinds; for the others it is a
    /// constant over all ν supported below `from`, summed until the factors
    /// stop rising (at most a few hundred coordinates for decaying b).
    fn log_tail_majorant(&self, from: usize) -> f64 {
        let mut total = 0.0;
        let limit = self.b.len().unwrap_or(usize::MAX);
        let mut j = from;
        while j < limit {
            let m = self.log_factor_majorant(j, 0);
            if m <= 0.0 {
                break;
            }
            total += m;
            j += 1;
            if j - from > 100_000 {
                break;
            }
        }
        total
    }

    /// `κ̂_ν`.
    pub fn majorant(&self, nu: &MultiIndex) -> f64 {
        self.log_majorant(nu).exp()
    }

    /// Whether `κ = κ̂` holds, i.e. every factor is nonincreasing from 0.
    pub fn is_monotone(&self) -> bool {
        match self.kind {
            WeightKind::Geometric | WeightKind::Hermite { .. } => true,
            _ => self.log_factor(0, 1) <= 0.0 && {
                let limit = self.b.len().unwrap_or(1);
                (0..limit.max(1)).all(|j| self.log_factor_majorant(j, 0) <= 0.0)
            },
        }
    }
}

/// `ln Σ_{l=0}^{r} C(k, l) b^{−2l}` with `lb = ln b`, via log-sum-exp.
fn log_hermite_sum(k: u32, r: u32, lb: f64) -> f64 {
    let top = r.min(k);
    let terms: Vec<f64> = (0..=top)
        .map(|l| ln_binomial(k, l) - 2.0 * l as f64 * lb)
        .collect();
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::from_dense(v)
    }

    fn alg(c: f64, tau: f64) -> BRule {
        BRule::Algebraic { c, tau }
    }

    #[test]
    fn root_weight_is_one() {
        let kinds = [
            WeightKind::Geometric,
            WeightKind::LegendreL2,
            WeightKind::LegendreLinf,
            WeightKind::InterpTaylor { theta: 1 },
            WeightKind::InterpLegendre { theta: 2 },
            WeightKind::Hermite { r: 2 },
        ];
        for kind in kinds {
            let w = WeightSequence::new(kind, alg(0.5, 2.0)).unwrap();
            assert_eq!(w.evaluate(&MultiIndex::zero()), 1.0);
        }
    }

    #[test]
    fn closed_forms() {
        let b = BRule::Explicit { values: vec![0.5, 0.25] };
        let geo = WeightSequence::new(WeightKind::Geometric, b.clone()).unwrap();
        assert!((geo.evaluate(&mi(&[2, 1])) - 0.0625).abs() < 1e-15);

        let leg = WeightSequence::new(WeightKind::LegendreL2, b.clone()).unwrap();
        let expect = 0.25 * 0.25 * (5.0f64 * 3.0).sqrt();
        assert!((leg.evaluate(&mi(&[2, 1])) - expect).abs() < 1e-14);

        let it = WeightSequence::new(WeightKind::InterpTaylor { theta: 1 }, b.clone()).unwrap();
        assert!((it.evaluate(&mi(&[1])) - 4.0 * 0.5).abs() < 1e-14);

        // Hermite r=2, b=0.5: k=3 → 1 + 3·4 + 3·16 = 61
        let h = WeightSequence::new(WeightKind::Hermite { r: 2 }, b).unwrap();
        assert!((h.evaluate(&mi(&[3])) - 61f64.powf(-0.5)).abs() < 1e-14);
    }

    #[test]
    fn hermite_is_log_stable() {
        let h = WeightSequence::new(WeightKind::Hermite { r: 3 }, alg(1e-3, 2.0)).unwrap();
        let l = h.log_evaluate(&mi(&[400, 0, 50]));
        // dominated by C(400,3) b1^-6 and C(50,3) b3^-6
        let expect = -0.5 * ((400.0 * 399.0 * 398.0 / 6.0) * 1e18f64).ln()
            - 0.5 * ((50.0 * 49.0 * 48.0 / 6.0) * 9e3f64.powi(6)).ln();
        assert!(l.is_finite() && (l - expect).abs() < 1e-3, "{l} vs {expect}");
    }

    #[test]
    fn rejects_invalid_b() {
        assert!(WeightSequence::new(WeightKind::Geometric, alg(1.0, 1.0)).is_err());
        assert!(WeightSequence::new(WeightKind::Hermite { r: 1 }, alg(2.0, 1.0)).is_ok());
        let up = BRule::Explicit { values: vec![0.2, 0.3] };
        assert!(WeightSequence::new(WeightKind::Geometric, up).is_err());
        assert!(WeightSequence::new(WeightKind::Hermite { r: 0 }, alg(0.5, 1.0)).is_err());
    }

    #[test]
    fn majorant_matches_scan() {
        let w = WeightSequence::new(WeightKind::InterpLegendre { theta: 1 }, alg(0.7, 1.0)).unwrap();
        for k in 0..30u32 {
            let scan = (k..400).map(|kk| w.log_factor(0, kk)).fold(f64::NEG_INFINITY, f64::max);
            assert!((w.log_factor_majorant(0, k) - scan).abs() < 1e-12);
        }
    }

    #[test]
    fn majorant_equals_weight_when_monotone() {
        let w = WeightSequence::new(WeightKind::Geometric, alg(0.5, 1.0)).unwrap();
        assert!(w.is_monotone());
        for nu in [mi(&[0]), mi(&[3, 1]), mi(&[0, 0, 2])] {
            assert!((w.log_majorant(&nu) - w.log_evaluate(&nu)).abs() < 1e-14);
        }
        let w = WeightSequence::new(WeightKind::LegendreL2, alg(0.9, 2.0)).unwrap();
        assert!(!w.is_monotone());
        assert!(w.log_majorant(&MultiIndex::zero()) > 0.0);
    }

    #[test]
    fn kinds_are_ordered_pointwise() {
        let b = alg(0.6, 1.5);
        let g = WeightSequence::new(WeightKind::Geometric, b.clone()).unwrap();
        let l2 = WeightSequence::new(WeightKind::LegendreL2, b.clone()).unwrap();
        let li = WeightSequence::new(WeightKind::LegendreLinf, b).unwrap();
        for nu in [mi(&[1]), mi(&[2, 3]), mi(&[0, 1, 4])] {
            assert!(g.log_evaluate(&nu) <= l2.log_evaluate(&nu));
            assert!(l2.log_evaluate(&nu) <= li.log_evaluate(&nu));
        }
    }
}
