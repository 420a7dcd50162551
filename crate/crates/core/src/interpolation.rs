//! Hierarchical sparse interpolation on downward closed sets.
//!
//! For a nested enumeration `ν¹ = 0, ν², …` of `Λ`, the interpolant is built
//! one index at a time: `α_ν = u(y_ν) − I_{Λ̃} u(y_ν)` and
//! `I_Λ u = I_{Λ̃} u + α_ν B_ν`, where `B_ν = ⊗_j B_{ν_j}` and
//! `y_ν = (t_{ν_j})_j`. The recursion is the solve; no collocation system is
//! ever formed.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{IndexSet, Letter, Multi, MultiIndex};
use crate::quadrature;
use crate::univariate::{hierarchical_basis_all, newton_denominators, PointSequence, SequenceKind};
use crate::{par, Evaluable, Target};

/// Univariate hierarchical basis over a letter alphabet: one interpolation
/// point per letter and a basis function `B_l` that is 1 at its own point
/// and 0 at the points of all smaller letters.
pub trait HierarchicalBasis: Clone + Send + Sync {
    type Letter: Letter;

    /// Makes `letter` (and everything below it) available.
    fn prepare(&mut self, letter: Self::Letter);

    fn point(&self, letter: Self::Letter) -> f64;

    fn eval(&self, letter: Self::Letter, t: f64) -> f64;

    /// `B_l(t)` for each letter in `letters`.
    fn eval_many(&self, letters: &[Self::Letter], t: f64, out: &mut Vec<f64>) {
        out.clear();
        out.extend(letters.iter().map(|&l| self.eval(l, t)));
    }

    /// `‖B_l‖_{L^p([−1,1], dt/2)}`.
    fn lp_norm(&self, letter: Self::Letter, p: f64) -> f64;

    /// JSON description of the point sequence.
    fn descriptor(&self) -> serde_json::Value;
}

/// Newton basis `B_k(t) = ∏_{l<k} (t − t_l)/(t_k − t_l)` on a Leja-type
/// sequence.
#[derive(Debug, Clone)]
pub struct PolyBasis {
    seq: PointSequence,
    denominators: Vec<f64>,
}

impl PolyBasis {
    pub fn new(seq: PointSequence) -> Self {
        let denominators = newton_denominators(seq.points());
        Self { seq, denominators }
    }

    pub fn from_kind(kind: SequenceKind) -> Result<Self> {
        Ok(Self::new(PointSequence::new(kind)?))
    }

    pub fn sequence(&self) -> &PointSequence {
        &self.seq
    }

    pub fn points(&self) -> &[f64] {
        self.seq.points()
    }
}

impl HierarchicalBasis for PolyBasis {
    type Letter = u32;

    fn prepare(&mut self, letter: u32) {
        let need = letter as usize + 1;
        if self.seq.len() < need {
            self.seq.extend_to(need);
            self.denominators = newton_denominators(self.seq.points());
        }
    }

    fn point(&self, letter: u32) -> f64 {
        self.seq.points()[letter as usize]
    }

    fn eval(&self, letter: u32, t: f64) -> f64 {
        let k = letter as usize;
        let p = self.seq.points();
        let mut num = 1.0;
        for &tl in &p[..k] {
            num *= t - tl;
        }
        num / self.denominators[k]
    }

    fn eval_many(&self, letters: &[u32], t: f64, out: &mut Vec<f64>) {
        let kmax = letters.iter().copied().max().unwrap_or(0) as usize;
        let mut all = Vec::with_capacity(kmax + 1);
        hierarchical_basis_all(self.seq.points(), &self.denominators, kmax, t, &mut all);
        out.clear();
        out.extend(letters.iter().map(|&l| all[l as usize]));
    }

    fn lp_norm(&self, letter: u32, p: f64) -> f64 {
        if letter == 0 {
            return 1.0;
        }
        if p.is_infinite() {
            let grid = 20_001;
            return (0..grid)
                .map(|i| self.eval(letter, -1.0 + 2.0 * i as f64 / (grid - 1) as f64).abs())
                .fold(0.0, f64::max);
        }
        // exact for even integer p; composite rule keeps other p accurate
        let nodes = ((p.ceil() as usize) * letter as usize) / 2 + 4;
        let rule = quadrature::gauss_legendre(nodes);
        let panels = 8;
        let mut total = 0.0;
        for s in 0..panels {
            let a = -1.0 + 2.0 * s as f64 / panels as f64;
            let h = 1.0 / panels as f64;
            total += rule.integrate(|x| self.eval(letter, a + h * (x + 1.0)).abs().powf(p)) / panels as f64;
        }
        total.powf(1.0 / p)
    }

    fn descriptor(&self) -> serde_json::Value {
        serde_json::to_value(self.seq.kind()).expect("sequence kind serializes")
    }
}

/// `y_ν`: coordinate `j` is `t_{ν_j}`; coordinates outside the support sit
/// at the anchor `t_root`. The result has `max(dims, ν.active_dim())`
/// entries.
pub fn grid_point<B: HierarchicalBasis>(basis: &B, nu: &Multi<B::Letter>, dims: usize) -> Vec<f64> {
    nu.to_dense(dims).into_iter().map(|l| basis.point(l)).collect()
}

/// `I_Λ u = Σ_{ν∈Λ} α_ν B_ν` with `α_ν ∈ V = ℝ^dim`.
#[derive(Debug, Clone)]
pub struct HierarchicalInterpolant<B: HierarchicalBasis> {
    basis: B,
    set: IndexSet<B::Letter>,
    dim: usize,
    coeffs: Vec<f64>,
    samples: Vec<f64>,
    letters: Vec<Vec<B::Letter>>,
    slots: Vec<HashMap<B::Letter, usize>>,
    terms: Vec<Vec<(usize, usize)>>,
    pad: usize,
}

impl<B: HierarchicalBasis> HierarchicalInterpolant<B> {
    /// Constant interpolant on `{0_F}` with the given sample at `y_0`.
    pub fn constant(basis: B, value: Vec<f64>) -> Self {
        let dim = value.len();
        Self {
            basis,
            set: IndexSet::root(),
            dim,
            coeffs: value.clone(),
            samples: value,
            letters: Vec::new(),
            slots: Vec::new(),
            terms: vec![Vec::new()],
            pad: 0,
        }
    }

    /// Builds `I_Λ u` with exactly `#Λ` evaluations of `u`. Evaluations run
    /// in parallel; the coefficient recursion follows the enumeration.
    pub fn interpolate<T: Target + ?Sized>(target: &T, set: &IndexSet<B::Letter>, mut basis: B) -> Result<Self> {
        for l in set.max_letters() {
            basis.prepare(l);
        }
        let dims = set.active_dim().max(target.param_dim().unwrap_or(0));
        let points: Vec<Vec<f64>> = set.iter().map(|nu| grid_point(&basis, nu, dims)).collect();
        let values = par::map_slice(&points, |y| target.eval(y));
        let mut checked = Vec::with_capacity(values.len());
        for (nu, v) in set.iter().zip(values) {
            let v = v.map_err(|message| Error::Evaluation { index: format!("{nu:?}"), message })?;
            if v.len() != target.dim() {
                return Err(Error::DimensionMismatch { expected: target.dim(), found: v.len() });
            }
            checked.push(v);
        }
        let mut out = Self::from_values(set, basis, checked)?;
        out.pad = dims;
        Ok(out)
    }

    /// Builds the interpolant from samples `u(y_ν)` listed in the
    /// enumeration order of `set`.
    pub fn from_values(set: &IndexSet<B::Letter>, basis: B, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != set.len() {
            return Err(Error::DimensionMismatch { expected: set.len(), found: values.len() });
        }
        let mut it = values.into_iter();
        let mut out = Self::constant(basis, it.next().expect("root sample"));
        for (nu, v) in set.iter().skip(1).zip(it) {
            out.extend_with_value(nu.clone(), v)?;
        }
        Ok(out)
    }

    /// Adds `ν` with one new evaluation of `u`; existing coefficients are
    /// unchanged.
    pub fn extend<T: Target + ?Sized>(&mut self, nu: Multi<B::Letter>, target: &T) -> Result<()> {
        self.check_addable(&nu)?;
        for (_, l) in nu.support() {
            self.basis.prepare(l);
        }
        self.pad = self.pad.max(target.param_dim().unwrap_or(0));
        let y = self.grid_point(&nu);
        let v = target
            .eval(&y)
            .map_err(|message| Error::Evaluation { index: format!("{nu:?}"), message })?;
        self.extend_with_value(nu, v)
    }

    /// Adds `ν` given the sample `u(y_ν)`.
    pub fn extend_with_value(&mut self, nu: Multi<B::Letter>, value: Vec<f64>) -> Result<()> {
        self.check_addable(&nu)?;
        if value.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: value.len() });
        }
        for (_, l) in nu.support() {
            self.basis.prepare(l);
        }
        let alpha = self.surplus(&nu, &value);
        let term = nu
            .support()
            .map(|(j, l)| (j, self.slot(j, l)))
            .collect();
        self.set.push(nu)?;
        self.terms.push(term);
        self.coeffs.extend_from_slice(&alpha);
        self.samples.extend_from_slice(&value);
        Ok(())
    }

    fn check_addable(&self, nu: &Multi<B::Letter>) -> Result<()> {
        if self.set.contains(nu) {
            return Err(Error::InvalidIndexSet(format!("{nu:?} is already in the set")));
        }
        if !self.set.can_add(nu) {
            return Err(Error::NotDownwardClosed(format!("cannot add {nu:?}")));
        }
        Ok(())
    }

    fn slot(&mut self, j: usize, l: B::Letter) -> usize {
        while self.letters.len() <= j {
            self.letters.push(Vec::new());
            self.slots.push(HashMap::new());
        }
        if let Some(&s) = self.slots[j].get(&l) {
            return s;
        }
        let s = self.letters[j].len();
        self.letters[j].push(l);
        self.slots[j].insert(l, s);
        s
    }

    /// `y_ν` padded to the interpolant's active dimension, or to the
    /// target's parameter count if that is larger.
    pub fn grid_point(&self, nu: &Multi<B::Letter>) -> Vec<f64> {
        grid_point(&self.basis, nu, self.set.active_dim().max(self.pad))
    }

    /// Sets the minimum length of interpolation points.
    pub fn set_padding(&mut self, dims: usize) {
        self.pad = dims;
    }

    /// `α_ν = value − I_Λ u(y_ν)` for a candidate `ν ∉ Λ`.
    pub fn surplus(&self, nu: &Multi<B::Letter>, value: &[f64]) -> Vec<f64> {
        let y = self.grid_point(nu);
        let current = self.evaluate(&y);
        value.iter().zip(current).map(|(v, c)| v - c).collect()
    }

    pub fn evaluate(&self, y: &[f64]) -> Vec<f64> {
        let dims = self.letters.len();
        assert!(y.len() >= dims, "point has {} coordinates, interpolant uses {dims}", y.len());
        let mut tables: Vec<Vec<f64>> = Vec::with_capacity(dims);
        let mut buf = Vec::new();
        for (j, letters) in self.letters.iter().enumerate() {
            self.basis.eval_many(letters, y[j], &mut buf);
            tables.push(buf.clone());
        }
        let mut out = vec![0.0; self.dim];
        for (i, term) in self.terms.iter().enumerate() {
            let b: f64 = term.iter().map(|&(j, s)| tables[j][s]).product();
            if b != 0.0 {
                let c = &self.coeffs[i * self.dim..(i + 1) * self.dim];
                for (o, ci) in out.iter_mut().zip(c) {
                    *o += b * ci;
                }
            }
        }
        out
    }

    /// Evaluates many points, in parallel when enabled.
    pub fn evaluate_batch(&self, ys: &[Vec<f64>]) -> Vec<Vec<f64>> {
        par::map_slice(ys, |y| self.evaluate(y))
    }

    pub fn set(&self) -> &IndexSet<B::Letter> {
        &self.set
    }

    pub fn basis(&self) -> &B {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of target evaluations consumed, `#Λ`.
    pub fn evaluations_used(&self) -> usize {
        self.set.len()
    }

    pub fn coefficient(&self, nu: &Multi<B::Letter>) -> Option<&[f64]> {
        self.set
            .position(nu)
            .map(|i| &self.coeffs[i * self.dim..(i + 1) * self.dim])
    }

    /// Recorded sample `u(y_ν)`.
    pub fn sample(&self, nu: &Multi<B::Letter>) -> Option<&[f64]> {
        self.set
            .position(nu)
            .map(|i| &self.samples[i * self.dim..(i + 1) * self.dim])
    }

    /// Coefficients as rows in enumeration order.
    pub fn coefficient_rows(&self) -> Vec<Vec<f64>> {
        self.coeffs.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "set": serde_json::to_value(&self.set).expect("index sets serialize"),
            "points": self.basis.descriptor(),
            "dim": self.dim,
            "coefficients": self.coefficient_rows(),
        })
    }
}

impl<B: HierarchicalBasis> Evaluable for HierarchicalInterpolant<B> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, y: &[f64]) -> Vec<f64> {
        HierarchicalInterpolant::evaluate(self, y)
    }
}

/// Serialized form of a polynomial interpolant.
#[derive(Debug, Serialize, Deserialize)]
pub struct InterpolantFile {
    pub set: IndexSet,
    pub points: SequenceKind,
    pub dim: usize,
    pub coefficients: Vec<Vec<f64>>,
}

impl HierarchicalInterpolant<PolyBasis> {
    pub fn to_file(&self) -> InterpolantFile {
        InterpolantFile {
            set: self.set.clone(),
            points: self.basis.sequence().kind(),
            dim: self.dim,
            coefficients: self.coefficient_rows(),
        }
    }

    /// Rebuilds an interpolant from stored coefficients. Recorded samples
    /// are recomputed from the coefficients.
    pub fn from_file(file: &InterpolantFile) -> Result<Self> {
        let mut basis = PolyBasis::from_kind(file.points)?;
        for l in file.set.max_letters() {
            basis.prepare(l);
        }
        if file.coefficients.len() != file.set.len() || file.coefficients.iter().any(|c| c.len() != file.dim) {
            return Err(Error::InvalidArgument("coefficient matrix does not match the set".into()));
        }
        let mut out = Self::constant(basis, file.coefficients[0].clone());
        for (nu, c) in file.set.iter().zip(&file.coefficients).skip(1) {
            let term = nu.support().map(|(j, l)| (j, out.slot(j, l))).collect();
            out.set.push(nu.clone())?;
            out.terms.push(term);
            out.coeffs.extend_from_slice(c);
            out.samples.extend(std::iter::repeat_n(0.0, out.dim));
        }
        let dims = out.set.active_dim();
        out.pad = dims;
        let samples: Vec<f64> = out
            .set
            .iter()
            .flat_map(|nu| out.evaluate(&grid_point(&out.basis, nu, dims)))
            .collect();
        out.samples = samples;
        Ok(out)
    }
}

/// `(#Λ)^{θ+1}`, valid for sequences with `𝔻_k ≤ (1+k)^θ`.
pub fn lebesgue_bound(set: &IndexSet, theta: u32) -> f64 {
    (set.len() as f64).powi(theta as i32 + 1)
}

/// `Σ_{ν∈Λ} ∏_j (1+ν_j)^θ`, the sharper bound from the `𝔻_k` product.
pub fn dproduct_bound(set: &IndexSet, theta: u32) -> f64 {
    set.iter()
        .map(|nu: &MultiIndex| nu.support().map(|(_, k)| (1.0 + k as f64).powi(theta as i32)).product::<f64>())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FnTarget;

    fn leja() -> PolyBasis {
        PolyBasis::from_kind(SequenceKind::Leja { anchor: 1.0 }).unwrap()
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::from_dense(v)
    }

    #[test]
    fn grid_points() {
        let mut b = leja();
        b.prepare(3);
        assert_eq!(grid_point(&b, &MultiIndex::zero(), 3), vec![1.0, 1.0, 1.0]);
        assert_eq!(grid_point(&b, &mi(&[0, 1]), 3), vec![1.0, -1.0, 1.0]);
        let y = grid_point(&b, &mi(&[2, 1]), 3);
        assert!(y[0].abs() < 1e-15 && y[1] == -1.0 && y[2] == 1.0);
    }

    #[test]
    fn constant_on_root() {
        let u = FnTarget::new(2, |y: &[f64]| vec![y[0] + 3.0, -1.0]).with_params(1);
        let set = IndexSet::root();
        let i = HierarchicalInterpolant::interpolate(&u, &set, leja()).unwrap();
        assert_eq!(i.evaluate(&[0.3]), vec![4.0, -1.0]);
        assert_eq!(i.evaluate(&[-0.9, 0.2]), vec![4.0, -1.0]);
    }

    #[test]
    fn bilinear_on_rectangle() {
        let u = FnTarget::new(1, |y: &[f64]| vec![y[0] * y[1]]);
        let set = IndexSet::rectangle(&mi(&[1, 1]));
        let i = HierarchicalInterpolant::interpolate(&u, &set, leja()).unwrap();
        // y1 y2 = (y1 - 1 + 1)(y2 - 1 + 1); B_1(t) = (t - 1)/(-2)
        // α_(1,1) = 4, α_(1,0) = α_(0,1) = -2, α_0 = 1
        assert!((i.coefficient(&mi(&[1, 1])).unwrap()[0] - 4.0).abs() < 1e-14);
        assert!((i.coefficient(&mi(&[1])).unwrap()[0] + 2.0).abs() < 1e-14);
        for y in [[0.3, -0.4], [-0.9, 0.99]] {
            assert!((i.evaluate(&y)[0] - y[0] * y[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn extend_reproduces_new_sample() {
        let u = FnTarget::new(1, |y: &[f64]| vec![(y[0] + 2.0 * y[1]).exp()]).with_params(2);
        let mut i = HierarchicalInterpolant::interpolate(&u, &IndexSet::rectangle(&mi(&[2])), leja()).unwrap();
        i.extend(mi(&[0, 1]), &u).unwrap();
        i.extend(mi(&[1, 1]), &u).unwrap();
        assert!(i.extend(mi(&[0, 3]), &u).is_err());
        for nu in i.set().clone().iter() {
            let y = i.grid_point(nu);
            assert!((i.evaluate(&y)[0] - u.eval(&y).unwrap()[0]).abs() < 1e-12);
        }
        assert_eq!(i.evaluations_used(), 5);
    }

    #[test]
    fn evaluation_failure_names_index() {
        struct Failing;
        impl Target for Failing {
            fn dim(&self) -> usize {
                1
            }
            fn eval(&self, y: &[f64]) -> std::result::Result<Vec<f64>, String> {
                if y[0] < 0.0 {
                    Err("negative".into())
                } else {
                    Ok(vec![1.0])
                }
            }
            fn param_dim(&self) -> Option<usize> {
                Some(1)
            }
        }
        let err = HierarchicalInterpolant::interpolate(&Failing, &IndexSet::rectangle(&mi(&[2])), leja()).unwrap_err();
        assert!(err.to_string().contains("(1)"), "{err}");
    }

    #[test]
    fn lebesgue_bounds() {
        assert_eq!(lebesgue_bound(&IndexSet::root(), 2), 1.0);
        let r = IndexSet::rectangle(&mi(&[2, 1]));
        assert_eq!(dproduct_bound(&r, 1), 3.0 * 6.0);
        let ten = IndexSet::total_degree(1, 9);
        assert_eq!(lebesgue_bound(&ten, 2), 1000.0);
    }

    #[test]
    fn json_round_trip() {
        let u = FnTarget::new(2, |y: &[f64]| vec![y[0].sin(), y[1] * y[0]]);
        let set = IndexSet::total_degree(2, 3);
        let i = HierarchicalInterpolant::interpolate(&u, &set, leja()).unwrap();
        let text = serde_json::to_string(&i.to_file()).unwrap();
        let back = HierarchicalInterpolant::from_file(&serde_json::from_str(&text).unwrap()).unwrap();
        for y in [[0.1, 0.2], [-0.7, 0.5]] {
            assert_eq!(i.evaluate(&y), back.evaluate(&y));
        }
    }
}
