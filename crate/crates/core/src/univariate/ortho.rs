//! Orthonormal polynomial families and sampling from `|φ_k|² dμ`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::quadrature;

/// Reference probability measure on one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// `dt/2` on `[−1, 1]`.
    Uniform,
    /// Arcsine law `dt / (π √(1 − t²))` on `[−1, 1]`.
    Chebyshev,
    /// Standard Gaussian on `ℝ`.
    Gaussian,
}

impl Measure {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Measure::Uniform => rng.random_range(-1.0..=1.0),
            Measure::Chebyshev => (std::f64::consts::PI * rng.random::<f64>()).cos(),
            Measure::Gaussian => StandardNormal.sample(rng),
        }
    }

    pub fn is_bounded(self) -> bool {
        !matches!(self, Measure::Gaussian)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrthoFamily {
    /// `L_k = √(2k+1) P_k`, orthonormal for `dt/2`.
    Legendre,
    /// `L̃_k = P_k` with `L̃_k(1) = 1`; orthogonal but not normalized.
    LegendreLinf,
    /// `√2 T_k` (and `T_0 = 1`), orthonormal for the arcsine law.
    Chebyshev,
    /// Probabilists' Hermite `He_k / √(k!)`, orthonormal for the Gaussian.
    Hermite,
}

impl OrthoFamily {
    pub fn measure(self) -> Measure {
        match self {
            OrthoFamily::Legendre | OrthoFamily::LegendreLinf => Measure::Uniform,
            OrthoFamily::Chebyshev => Measure::Chebyshev,
            OrthoFamily::Hermite => Measure::Gaussian,
        }
    }

    pub fn is_orthonormal(self) -> bool {
        !matches!(self, OrthoFamily::LegendreLinf)
    }

    /// `‖φ_k‖²_∞` on the support, `∞` for Hermite.
    pub fn sup_norm_sq(self, k: u32) -> f64 {
        match self {
            OrthoFamily::Legendre => 2.0 * k as f64 + 1.0,
            OrthoFamily::LegendreLinf => 1.0,
            OrthoFamily::Chebyshev => {
                if k == 0 {
                    1.0
                } else {
                    2.0
                }
            }
            OrthoFamily::Hermite => f64::INFINITY,
        }
    }

    /// `φ_0(t), …, φ_kmax(t)` by three-term recurrence.
    pub fn eval_all(self, kmax: u32, t: f64, out: &mut Vec<f64>) {
        out.clear();
        out.push(1.0);
        if kmax == 0 {
            return;
        }
        match self {
            OrthoFamily::Legendre | OrthoFamily::LegendreLinf => {
                let (mut p0, mut p1) = (1.0, t);
                out.push(p1);
                for k in 1..kmax {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
                    p0 = p1;
                    p1 = p2;
                    out.push(p1);
                }
                if self == OrthoFamily::Legendre {
                    for (k, v) in out.iter_mut().enumerate() {
                        *v *= (2.0 * k as f64 + 1.0).sqrt();
                    }
                }
            }
            OrthoFamily::Chebyshev => {
                let (mut t0, mut t1) = (1.0, t);
                out.push(std::f64::consts::SQRT_2 * t1);
                for _ in 1..kmax {
                    let t2 = 2.0 * t * t1 - t0;
                    t0 = t1;
                    t1 = t2;
                    out.push(std::f64::consts::SQRT_2 * t1);
                }
            }
            OrthoFamily::Hermite => {
                let (mut h0, mut h1) = (1.0, t);
                out.push(h1);
                for k in 1..kmax {
                    let kf = k as f64;
                    let h2 = (t * h1 - kf.sqrt() * h0) / (kf + 1.0).sqrt();
                    h0 = h1;
                    h1 = h2;
                    out.push(h1);
                }
            }
        }
    }

    pub fn eval(self, k: u32, t: f64) -> f64 {
        let mut out = Vec::with_capacity(k as usize + 1);
        self.eval_all(k, t, &mut out);
        out[k as usize]
    }

    /// One draw from the probability density `|φ_k|² dμ / ∫|φ_k|² dμ`.
    pub fn sample<R: Rng + ?Sized>(self, k: u32, rng: &mut R) -> f64 {
        if k == 0 {
            return self.measure().sample(rng);
        }
        match self {
            OrthoFamily::Legendre | OrthoFamily::LegendreLinf => {
                let envelope = 2.0 * k as f64 + 1.0;
                loop {
                    let t = Measure::Uniform.sample(rng);
                    let v = OrthoFamily::Legendre.eval(k, t);
                    if rng.random::<f64>() * envelope <= v * v {
                        return t;
                    }
                }
            }
            OrthoFamily::Chebyshev => loop {
                let t = Measure::Chebyshev.sample(rng);
                let v = self.eval(k, t);
                if rng.random::<f64>() * 2.0 <= v * v {
                    return t;
                }
            },
            OrthoFamily::Hermite => hermite_table(k).sample(rng.random::<f64>()),
        }
    }
}

/// Number of tabulation nodes for the Hermite inverse CDF.
pub const HERMITE_TABLE_NODES: usize = 4096;

/// Truncation radius `4√(2k+1) + 8`; the Gaussian-weighted tail beyond it
/// is below 1e−12 for every `k`.
pub fn hermite_radius(k: u32) -> f64 {
    4.0 * (2.0 * k as f64 + 1.0).sqrt() + 8.0
}

/// Tabulated CDF of `h_k(t)² g(t)` with cubic Hermite interpolation (the
/// exact density supplies the slopes) and per-cell bisection for inversion.
#[derive(Debug)]
pub struct HermiteCdfTable {
    k: u32,
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    density: Vec<f64>,
}

impl HermiteCdfTable {
    pub fn new(k: u32) -> Self {
        let r = hermite_radius(k);
        let n = HERMITE_TABLE_NODES;
        let step = 2.0 * r / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| -r + step * i as f64).collect();
        let dens = |t: f64| {
            let h = OrthoFamily::Hermite.eval(k, t);
            h * h * (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
        };
        let gl = quadrature::gauss_legendre(8);
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            let (a, b) = (nodes[i - 1], nodes[i]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            // rule weights sum to 1 over dt/2, so the cell integral is 2·half·E[f]
            let cell = 2.0 * half * gl.integrate(|x| dens(mid + half * x));
            cdf[i] = cdf[i - 1] + cell;
        }
        let total = cdf[n - 1];
        let density: Vec<f64> = nodes.iter().map(|&t| dens(t) / total).collect();
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Self { k, nodes, cdf, density }
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    /// Interpolated CDF value.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= self.nodes[0] {
            return 0.0;
        }
        if t >= *self.nodes.last().unwrap() {
            return 1.0;
        }
        let i = self.cell(t);
        self.cubic(i, t)
    }

    fn cell(&self, t: f64) -> usize {
        let step = self.nodes[1] - self.nodes[0];
        (((t - self.nodes[0]) / step) as usize).min(self.nodes.len() - 2)
    }

    fn cubic(&self, i: usize, t: f64) -> f64 {
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let h = x1 - x0;
        let s = (t - x0) / h;
        let (h00, h10, h01, h11) = (
            2.0 * s * s * s - 3.0 * s * s + 1.0,
            s * s * s - 2.0 * s * s + s,
            -2.0 * s * s * s + 3.0 * s * s,
            s * s * s - s * s,
        );
        h00 * self.cdf[i] + h10 * h * self.density[i] + h01 * self.cdf[i + 1] + h11 * h * self.density[i + 1]
    }

    /// Inverse CDF at `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> f64 {
        let i = match self.cdf.binary_search_by(|c| c.total_cmp(&u)) {
            Ok(i) => return self.nodes[i],
            Err(i) => i.clamp(1, self.nodes.len() - 1) - 1,
        };
        let (mut a, mut b) = (self.nodes[i], self.nodes[i + 1]);
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if self.cubic(i, mid) < u {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }
}

fn hermite_table(k: u32) -> Arc<HermiteCdfTable> {
    static TABLES: OnceLock<Mutex<HashMap<u32, Arc<HermiteCdfTable>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = tables.lock().unwrap().get(&k) {
        return t.clone();
    }
    let built = Arc::new(HermiteCdfTable::new(k));
    tables.lock().unwrap().entry(k).or_insert(built).clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn low_degree_values() {
        let t = 0.3;
        assert_eq!(OrthoFamily::Legendre.eval(0, t), 1.0);
        assert!((OrthoFamily::Legendre.eval(1, t) - 3f64.sqrt() * t).abs() < 1e-15);
        assert!((OrthoFamily::Hermite.eval(1, t) - t).abs() < 1e-15);
        assert!((OrthoFamily::Hermite.eval(2, t) - (t * t - 1.0) / 2f64.sqrt()).abs() < 1e-15);
        assert!((OrthoFamily::Chebyshev.eval(2, t) - 2f64.sqrt() * (2.0 * t * t - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn linf_legendre_is_one_at_one() {
        for k in 0..=30 {
            assert!((OrthoFamily::LegendreLinf.eval(k, 1.0) - 1.0).abs() < 1e-13);
            let l = OrthoFamily::Legendre.eval(k, 0.42) / (2.0 * k as f64 + 1.0).sqrt();
            assert!((OrthoFamily::LegendreLinf.eval(k, 0.42) - l).abs() < 1e-13);
        }
    }

    #[test]
    fn gram_is_identity() {
        let cases = [
            (OrthoFamily::Legendre, quadrature::gauss_legendre(40)),
            (OrthoFamily::Chebyshev, quadrature::gauss_chebyshev(40)),
            (OrthoFamily::Hermite, quadrature::gauss_hermite(40)),
        ];
        for (fam, rule) in cases {
            let mut vals = Vec::new();
            let table: Vec<Vec<f64>> = rule
                .nodes
                .iter()
                .map(|&x| {
                    fam.eval_all(30, x, &mut vals);
                    vals.clone()
                })
                .collect();
            for j in 0..=30 {
                for k in 0..=j {
                    let g: f64 = table.iter().zip(&rule.weights).map(|(v, w)| w * v[j] * v[k]).sum();
                    let expect = if j == k { 1.0 } else { 0.0 };
                    let tol = if j <= 20 { 1e-10 } else { 1e-9 };
                    assert!((g - expect).abs() < tol, "{fam:?} ({j},{k}) = {g}");
                }
            }
        }
    }

    #[test]
    fn legendre_sample_second_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 100_000;
        let draws: Vec<f64> = (0..m).map(|_| OrthoFamily::Legendre.sample(1, &mut rng)).collect();
        let second = draws.iter().map(|t| t * t).sum::<f64>() / m as f64;
        // E[t²] = 3/5, E[t⁴] = 3/7
        let sd = ((3.0 / 7.0 - 0.36) / m as f64).sqrt();
        assert!((second - 0.6).abs() < 3.0 * sd, "{second}");
    }

    #[test]
    fn hermite_table_is_a_cdf() {
        let table = HermiteCdfTable::new(3);
        assert_eq!(table.cdf(-100.0), 0.0);
        assert_eq!(table.cdf(100.0), 1.0);
        // symmetric density
        assert!((table.cdf(0.0) - 0.5).abs() < 1e-12);
        for u in [0.01, 0.3, 0.77, 0.999] {
            assert!((table.cdf(table.sample(u)) - u).abs() < 1e-10);
        }
    }
}
