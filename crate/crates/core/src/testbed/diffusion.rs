//! `−(a(y) u′)′ = f` on `(0, 1)` with `u(0) = u(1) = 0`, by second-order
//! finite differences with the coefficient sampled at cell midpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vnorm::VNorm;
use crate::Target;

/// Shape of the fluctuations `ψ_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    /// `ψ_j = c j^{−τ} sin(jπx)`. For the affine model
    /// `c = scale · ā / ζ(τ)`, so `Σ_j ‖ψ_j‖∞ = scale · ā`; for the
    /// lognormal model `c = scale / ζ(τ)`.
    Sine { tau: f64, scale: f64 },
    /// `ψ_j = scale · ā · j^{−τ} · χ_{I_j}` with `I_j = [(j−1)/d, j/d)`
    /// (with `ā = 1` for the lognormal model).
    Inclusions { tau: f64, scale: f64 },
}

impl Family {
    pub fn sine(tau: f64) -> Self {
        Family::Sine { tau, scale: 0.9 }
    }

    pub fn tau(&self) -> f64 {
        match *self {
            Family::Sine { tau, .. } | Family::Inclusions { tau, .. } => tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoefficientModel {
    /// `a = ā + Σ_j y_j ψ_j`, `y ∈ [−1, 1]^d`.
    Affine { abar: f64, family: Family },
    /// `a = exp(Σ_j y_j ψ_j)`, `y ∈ ℝ^d` Gaussian.
    Lognormal { family: Family },
}

/// What the target returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Output {
    /// Interior nodal values, `V = ℝ^{N−1}`.
    #[default]
    Solution,
    /// Flux `a u′` at mesh node `node` (0..=N), `V = ℝ`.
    Flux { node: usize },
}

fn default_mesh() -> usize {
    200
}

fn default_rhs() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionConfig {
    /// Number of cells `N`, `h = 1/N`.
    #[serde(default = "default_mesh")]
    pub mesh: usize,
    /// Constant right-hand side `f`.
    #[serde(default = "default_rhs")]
    pub rhs: f64,
    pub model: CoefficientModel,
    /// Active parameter dimension.
    pub d: usize,
    #[serde(default)]
    pub output: Output,
}

impl DiffusionConfig {
    /// Affine sine model with `Σ‖ψ_j‖∞ = 0.9 ā`, `ā = 1`.
    pub fn affine(tau: f64, d: usize) -> Self {
        Self {
            mesh: default_mesh(),
            rhs: 1.0,
            model: CoefficientModel::Affine { abar: 1.0, family: Family::sine(tau) },
            d,
            output: Output::Solution,
        }
    }

    /// Lognormal sine model.
    pub fn lognormal(tau: f64, scale: f64, d: usize) -> Self {
        Self {
            mesh: default_mesh(),
            rhs: 1.0,
            model: CoefficientModel::Lognormal { family: Family::Sine { tau, scale } },
            d,
            output: Output::Solution,
        }
    }
}

/// `ζ(τ) = Σ_{j≥1} j^{−τ}` for `τ > 1`.
pub fn zeta(tau: f64) -> f64 {
    assert!(tau > 1.0, "zeta needs tau > 1");
    let n = 10_000usize;
    let partial: f64 = (1..=n).rev().map(|j| (j as f64).powf(-tau)).sum();
    let nf = n as f64;
    // Euler–Maclaurin tail
    partial + nf.powf(1.0 - tau) / (tau - 1.0) - 0.5 * nf.powf(-tau) + tau / 12.0 * nf.powf(-tau - 1.0)
}

#[derive(Debug, Clone)]
pub struct DiffusionProblem {
    config: DiffusionConfig,
    h: f64,
    abar: f64,
    /// `ψ_j` at the `N` midpoints, row per coordinate.
    psi_mid: Vec<Vec<f64>>,
    /// `ψ_j` at the `N + 1` nodes.
    psi_node: Vec<Vec<f64>>,
}

impl DiffusionProblem {
    pub fn new(config: DiffusionConfig) -> Result<Self> {
        if config.mesh < 2 {
            return Err(Error::InvalidArgument("mesh needs at least 2 cells".into()));
        }
        if config.d == 0 {
            return Err(Error::InvalidArgument("parameter dimension must be positive".into()));
        }
        let (abar, family) = match config.model {
            CoefficientModel::Affine { abar, family } => {
                if !(abar > 0.0) {
                    return Err(Error::InvalidArgument(format!("mean coefficient must be positive, got {abar}")));
                }
                (abar, family)
            }
            CoefficientModel::Lognormal { family } => (1.0, family),
        };
        let tau = family.tau();
        if let Family::Sine { .. } = family {
            if !(tau > 1.0) {
                return Err(Error::InvalidArgument(format!("sine family needs tau > 1, got {tau}")));
            }
        }
        if let Output::Flux { node } = config.output {
            if node > config.mesh {
                return Err(Error::InvalidArgument(format!("flux node {node} outside 0..={}", config.mesh)));
            }
        }
        let n = config.mesh;
        let h = 1.0 / n as f64;
        let d = config.d;
        let sine_c = match family {
            Family::Sine { tau, scale } => scale * abar / zeta(tau),
            Family::Inclusions { .. } => 0.0,
        };
        let psi = |j: usize, x: f64| -> f64 {
            let jf = (j + 1) as f64;
            match family {
                Family::Sine { tau, .. } => sine_c * jf.powf(-tau) * (jf * std::f64::consts::PI * x).sin(),
                Family::Inclusions { tau, scale } => {
                    let lo = j as f64 / d as f64;
                    let hi = (j + 1) as f64 / d as f64;
                    let inside = x >= lo && (x < hi || (j + 1 == d && x <= hi));
                    if inside {
                        scale * abar * jf.powf(-tau)
                    } else {
                        0.0
                    }
                }
            }
        };
        let psi_mid = (0..d).map(|j| (0..n).map(|i| psi(j, (i as f64 + 0.5) * h)).collect()).collect();
        let psi_node = (0..d).map(|j| (0..=n).map(|i| psi(j, i as f64 * h)).collect()).collect();
        Ok(Self { config, h, abar, psi_mid, psi_node })
    }

    pub fn config(&self) -> &DiffusionConfig {
        &self.config
    }

    pub fn mesh(&self) -> usize {
        self.config.mesh
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn d(&self) -> usize {
        self.config.d
    }

    pub fn is_lognormal(&self) -> bool {
        matches!(self.config.model, CoefficientModel::Lognormal { .. })
    }

    /// `ψ_j` at the midpoints (0-based `j`).
    pub fn psi_midpoints(&self, j: usize) -> &[f64] {
        &self.psi_mid[j]
    }

    /// Coefficient at the `N` midpoints. Coordinates beyond `y.len()` are 0.
    pub fn coefficient(&self, y: &[f64]) -> Vec<f64> {
        let n = self.mesh();
        let mut b = vec![0.0; n];
        for (j, &yj) in y.iter().take(self.d()).enumerate() {
            if yj != 0.0 {
                for (bi, p) in b.iter_mut().zip(&self.psi_mid[j]) {
                    *bi += yj * p;
                }
            }
        }
        if self.is_lognormal() {
            b.iter().map(|v| v.exp()).collect()
        } else {
            b.iter().map(|v| self.abar + v).collect()
        }
    }

    /// Nodal solution at the `N − 1` interior nodes.
    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        let a = self.coefficient(y);
        solve_fd(&a, &vec![self.config.rhs; self.mesh() - 1])
    }

    /// `a u′` at `node`: the mean of the two adjacent cell fluxes at
    /// interior nodes, the single adjacent cell flux at `x = 0` and `x = 1`.
    pub fn flux(&self, a: &[f64], u: &[f64], node: usize) -> f64 {
        let n = self.mesh();
        let value = |i: usize| if i == 0 || i == n { 0.0 } else { u[i - 1] };
        let cell = |c: usize| a[c] * (value(c + 1) - value(c)) / self.h;
        if node == 0 {
            cell(0)
        } else if node == n {
            cell(n - 1)
        } else {
            0.5 * (cell(node - 1) + cell(node))
        }
    }

    /// Flux QoI at `node` for the parameter `y`.
    pub fn qoi_flux(&self, y: &[f64], node: usize) -> Result<f64> {
        let a = self.coefficient(y);
        let u = solve_fd(&a, &vec![self.config.rhs; self.mesh() - 1])?;
        Ok(self.flux(&a, &u, node))
    }

    /// `∂u/∂y_j` at `y = 0`: solves `−(a₀ w′)′ = (ψ_j u₀′)′`.
    pub fn derivative_at_zero(&self, j: usize) -> Result<Vec<f64>> {
        let a0 = self.coefficient(&[]);
        let u0 = self.solve(&[])?;
        // lognormal: ∂a/∂y_j at 0 is ψ_j · exp(0)
        let rhs: Vec<f64> = apply_stiffness(&self.psi_mid[j], &u0, self.h).iter().map(|v| -v).collect();
        solve_fd(&a0, &rhs)
    }

    fn all_points(&self) -> impl Iterator<Item = usize> {
        0..(2 * self.mesh() + 1)
    }

    fn psi_at(&self, j: usize, p: usize) -> f64 {
        // even p: node p/2; odd p: midpoint (p-1)/2
        if p % 2 == 0 {
            self.psi_node[j][p / 2]
        } else {
            self.psi_mid[j][p / 2]
        }
    }

    /// `min_x (ā − Σ_{j≤d} ρ_j |ψ_j(x)|)` over nodes and midpoints.
    pub fn rho_margin(&self, rho: &[f64]) -> f64 {
        self.all_points()
            .map(|p| {
                let s: f64 = (0..self.d()).map(|j| rho.get(j).copied().unwrap_or(1.0) * self.psi_at(j, p).abs()).sum();
                self.abar - s
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Uniform ellipticity margin `r = min_x (ā − Σ_{j≤d} |ψ_j(x)|)`.
    pub fn ellipticity_margin(&self) -> f64 {
        self.rho_margin(&[])
    }

    /// `sup_x Σ_{j≤d} ρ_j |ψ_j(x)|` over nodes and midpoints.
    pub fn rho_sup(&self, rho: &[f64]) -> f64 {
        self.all_points()
            .map(|p| (0..self.d()).map(|j| rho.get(j).copied().unwrap_or(1.0) * self.psi_at(j, p).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest `s` such that `ρ_j = 1 + s g_j` keeps
    /// `Σ ρ_j |ψ_j| ≤ ā − r̃` on the mesh, with `g_j = j^{τ−1−ε}`
    /// (1-based `j`). Returns `ρ` and the achieved margin. Fails when even
    /// `ρ ≡ 1` violates the margin.
    pub fn rho_for_margin(&self, r_tilde: f64, eps: f64) -> Result<(Vec<f64>, f64)> {
        let tau = match self.config.model {
            CoefficientModel::Affine { family, .. } => family.tau(),
            CoefficientModel::Lognormal { .. } => {
                return Err(Error::InvalidArgument("ρ-ellipticity applies to the affine model".into()))
            }
        };
        let d = self.d();
        let g: Vec<f64> = (1..=d).map(|j| (j as f64).powf(tau - 1.0 - eps)).collect();
        let rho_of = |s: f64| -> Vec<f64> { g.iter().map(|gj| 1.0 + s * gj).collect() };
        if self.rho_margin(&rho_of(0.0)) < r_tilde {
            return Err(Error::InvalidArgument(format!(
                "margin {r_tilde} is not attainable: ellipticity margin is {}",
                self.ellipticity_margin()
            )));
        }
        let mut hi = 1.0;
        while self.rho_margin(&rho_of(hi)) >= r_tilde {
            hi *= 2.0;
            if hi > 1e12 {
                break;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.rho_margin(&rho_of(mid)) >= r_tilde {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let rho = rho_of(lo);
        let margin = self.rho_margin(&rho);
        Ok((rho, margin))
    }

    /// `ρ_j = c j^{τ−1−ε}` with `c` chosen so that
    /// `sup_x Σ_j ρ_j |ψ_j(x)| = ln 2/√r` on the mesh (lognormal model).
    pub fn lognormal_rho(&self, r: f64, eps: f64) -> Result<Vec<f64>> {
        let family = match self.config.model {
            CoefficientModel::Lognormal { family } => family,
            CoefficientModel::Affine { .. } => {
                return Err(Error::InvalidArgument("this ρ rule applies to the lognormal model".into()))
            }
        };
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("r must be positive, got {r}")));
        }
        let g: Vec<f64> = (1..=self.d()).map(|j| (j as f64).powf(family.tau() - 1.0 - eps)).collect();
        let sup = self.rho_sup(&g);
        if !(sup > 0.0) {
            return Err(Error::InvalidArgument("fluctuations vanish on the mesh".into()));
        }
        let c = std::f64::consts::LN_2 / r.sqrt() / sup;
        Ok(g.into_iter().map(|v| c * v).collect())
    }

    /// Norm on `V` matching the output: mesh L² for solutions,
    /// absolute value for the flux.
    pub fn v_norm(&self) -> VNorm {
        match self.config.output {
            Output::Solution => VNorm::DiscreteL2 { h: self.h },
            Output::Flux { .. } => VNorm::Euclidean,
        }
    }

    /// Discrete `H¹₀` norm on solution vectors.
    pub fn h1_norm(&self) -> VNorm {
        VNorm::DiscreteH1 { h: self.h }
    }
}

impl Target for DiffusionProblem {
    fn dim(&self) -> usize {
        match self.config.output {
            Output::Solution => self.mesh() - 1,
            Output::Flux { .. } => 1,
        }
    }

    fn eval(&self, y: &[f64]) -> std::result::Result<Vec<f64>, String> {
        let a = self.coefficient(y);
        let u = solve_fd(&a, &vec![self.config.rhs; self.mesh() - 1]).map_err(|e| e.to_string())?;
        Ok(match self.config.output {
            Output::Solution => u,
            Output::Flux { node } => vec![self.flux(&a, &u, node)],
        })
    }

    fn param_dim(&self) -> Option<usize> {
        Some(self.d())
    }
}

/// `(A_a u)_i = [a_{i−½}(u_i − u_{i−1}) − a_{i+½}(u_{i+1} − u_i)]/h²` on
/// interior nodes with zero boundary values.
pub fn apply_stiffness(a: &[f64], u: &[f64], h: f64) -> Vec<f64> {
    let n = a.len();
    let value = |i: usize| if i == 0 || i == n { 0.0 } else { u[i - 1] };
    (1..n)
        .map(|i| (a[i - 1] * (value(i) - value(i - 1)) - a[i] * (value(i + 1) - value(i))) / (h * h))
        .collect()
}

/// Solves `A_a u = f` for midpoint coefficients `a` (length `N`) and
/// interior right-hand side `f` (length `N − 1`) with the Thomas
/// algorithm.
pub fn solve_fd(a: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    if f.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n - 1, found: f.len() });
    }
    if let Some((node, &value)) = a.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveCoefficient { node, value });
    }
    let h2 = 1.0 / (n as f64 * n as f64);
    let m = n - 1;
    // diagonal, off-diagonals (symmetric)
    let diag: Vec<f64> = (0..m).map(|i| (a[i] + a[i + 1]) / h2).collect();
    let off: Vec<f64> = (0..m.saturating_sub(1)).map(|i| -a[i + 1] / h2).collect();
    let mut c = vec![0.0; m];
    let mut dprime = vec![0.0; m];
    let mut denom = diag[0];
    c[0] = if m > 1 { off[0] / denom } else { 0.0 };
    dprime[0] = f[0] / denom;
    for i in 1..m {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < m {
            c[i] = off[i] / denom;
        }
        dprime[i] = (f[i] - off[i - 1] * dprime[i - 1]) / denom;
    }
    let mut u = dprime;
    for i in (0..m.saturating_sub(1)).rev() {
        u[i] -= c[i] * u[i + 1];
    }
    Ok(u)
}
