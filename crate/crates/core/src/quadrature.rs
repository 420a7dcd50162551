//! Gauss quadrature rules normalized to probability measures.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of a quadrature rule; the weights sum to 1.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre rule for `dt/2` on `[−1, 1]`, exact to degree `2n − 1`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 1.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Gauss–Hermite rule for the standard Gaussian density, via Golub–Welsch.
pub fn gauss_hermite(n: usize) -> Rule {
    assert!(n >= 1);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    // Newton polish on the orthonormal recurrence, then w = 1 / Σ p_k(x)²
    let weights = nodes
        .iter_mut()
        .map(|x| {
            for _ in 0..3 {
                let (p, d, _) = hermite_orthonormal(n, *x);
                if d != 0.0 {
                    *x -= p / d;
                }
            }
            1.0 / hermite_orthonormal(n, *x).2
        })
        .collect();
    Rule { nodes, weights }
}

/// `(p_n(x), p_n'(x), Σ_{k<n} p_k(x)²)` for orthonormal probabilists'
/// Hermite polynomials.
fn hermite_orthonormal(n: usize, x: f64) -> (f64, f64, f64) {
    let (mut p0, mut p1) = (0.0, 1.0);
    let mut sum = 0.0;
    for k in 0..n {
        sum += p1 * p1;
        let kf = k as f64;
        let p2 = (x * p1 - kf.sqrt() * p0) / (kf + 1.0).sqrt();
        p0 = p1;
        p1 = p2;
    }
    // p_n' = sqrt(n) p_{n-1}
    (p1, (n as f64).sqrt() * p0, sum)
}

/// Gauss–Chebyshev rule for the arcsine probability measure.
pub fn gauss_chebyshev(n: usize) -> Rule {
    assert!(n >= 1);
    let nodes = (0..n)
        .map(|i| -((2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect();
    Rule { nodes, weights: vec![1.0 / n as f64; n] }
}
