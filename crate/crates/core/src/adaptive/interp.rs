use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{bulk, Budget, Stopwatch};
use crate::error::{Error, Result};
use crate::interpolation::{grid_point, HierarchicalBasis, HierarchicalInterpolant};
use crate::multiindex::{IndexSet, Multi};
use crate::testbed::ErrorReport;
use crate::vnorm::VNorm;
use crate::{par, Target};

/// Weight `w_ν` in the greedy score `w_ν ‖α_ν‖_V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightNorm {
    /// `w_ν = 1`.
    Linf,
    /// `w_ν = ‖B_ν‖_{L^p(dμ)} = ∏_j ‖B_{ν_j}‖_{L^p}`.
    Lp { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpRule {
    /// Always the largest weighted surplus.
    Greedy,
    /// Largest weighted surplus when the new set size `n` is even, earliest
    /// entry into the anchored neighborhood when `n` is odd.
    Conservative,
}

/// One iteration of the greedy driver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterpStep {
    pub k: usize,
    /// `#Λ` after the step.
    pub n: usize,
    pub evaluations: usize,
    pub selected: Vec<String>,
    /// `"greedy"` or `"earliest"`.
    pub rule: String,
    pub score: f64,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
}

struct Candidate {
    sample: Vec<f64>,
    alpha_norm: f64,
    weight: f64,
}

/// Adaptive hierarchical interpolation over any hierarchical basis.
///
/// The surplus `α_ν` of a neighbor does not depend on the current set, so
/// each neighbor costs exactly one evaluation of `u`, cached until the
/// neighbor is selected.
pub struct GreedyInterpolation<'t, B: HierarchicalBasis, T: Target + ?Sized> {
    target: &'t T,
    interp: HierarchicalInterpolant<B>,
    rule: InterpRule,
    weight: WeightNorm,
    norm: VNorm,
    max_dims: Option<usize>,
    bulk_fraction: Option<f64>,
    candidates: BTreeMap<Multi<B::Letter>, Candidate>,
    first_seen: HashMap<Multi<B::Letter>, usize>,
    iteration: usize,
    evaluations: usize,
    history: Vec<InterpStep>,
}

impl<'t, B: HierarchicalBasis, T: Target + ?Sized> GreedyInterpolation<'t, B, T> {
    /// Starts from `Λ₁ = {0}` with one evaluation of `u`.
    pub fn new(target: &'t T, basis: B, rule: InterpRule, weight: WeightNorm) -> Result<Self> {
        let interp = HierarchicalInterpolant::interpolate(target, &IndexSet::root(), basis)?;
        let mut out = Self {
            target,
            interp,
            rule,
            weight,
            norm: VNorm::Euclidean,
            max_dims: target.param_dim(),
            bulk_fraction: None,
            candidates: BTreeMap::new(),
            first_seen: HashMap::new(),
            iteration: 0,
            evaluations: 1,
            history: Vec::new(),
        };
        out.refresh()?;
        Ok(out)
    }

    pub fn with_norm(mut self, norm: VNorm) -> Self {
        self.norm = norm;
        self.rescore();
        self
    }

    /// Adds every neighbor in the bulk of the weighted surpluses at each
    /// step instead of a single index (greedy rule only).
    pub fn with_bulk(mut self, fraction: f64) -> Self {
        self.bulk_fraction = Some(fraction);
        self
    }

    pub fn interpolant(&self) -> &HierarchicalInterpolant<B> {
        &self.interp
    }

    pub fn set(&self) -> &IndexSet<B::Letter> {
        self.interp.set()
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn history(&self) -> &[InterpStep] {
        &self.history
    }

    pub fn history_mut(&mut self) -> &mut [InterpStep] {
        &mut self.history
    }

    /// `k(ν)` for every index that has entered the anchored neighborhood.
    pub fn first_seen(&self, nu: &Multi<B::Letter>) -> Option<usize> {
        self.first_seen.get(nu).copied()
    }

    /// Current anchored neighbors with their weighted surplus scores, in
    /// canonical order.
    pub fn neighbor_scores(&self) -> Vec<(Multi<B::Letter>, f64)> {
        self.candidates.iter().map(|(nu, c)| (nu.clone(), c.weight * c.alpha_norm)).collect()
    }

    fn weight_of(&self, basis: &B, nu: &Multi<B::Letter>) -> f64 {
        match self.weight {
            WeightNorm::Linf => 1.0,
            WeightNorm::Lp { p } => nu.support().map(|(_, l)| basis.lp_norm(l, p)).product(),
        }
    }

    fn rescore(&mut self) {
        let mut basis = self.interp.basis().clone();
        for nu in self.candidates.keys() {
            for (_, l) in nu.support() {
                basis.prepare(l);
            }
        }
        let pad = self.interp.set().active_dim().max(self.target.param_dim().unwrap_or(0));
        for (nu, c) in self.candidates.iter_mut() {
            let y = grid_point(&basis, nu, pad.max(nu.active_dim()));
            let alpha: Vec<f64> = c.sample.iter().zip(self.interp.evaluate(&y)).map(|(a, b)| a - b).collect();
            c.alpha_norm = self.norm.norm(&alpha);
        }
    }

    /// Evaluates `u` at anchored neighbors not seen before.
    fn refresh(&mut self) -> Result<()> {
        let mut dims = self.interp.set().active_dim() + 1;
        if let Some(cap) = self.max_dims {
            dims = dims.min(cap.max(1));
        }
        let fresh: Vec<Multi<B::Letter>> = self
            .interp
            .set()
            .neighbors(dims)
            .into_iter()
            .filter(|nu| !self.candidates.contains_key(nu))
            .collect();
        if fresh.is_empty() {
            return Ok(());
        }
        let mut basis = self.interp.basis().clone();
        for nu in &fresh {
            for (_, l) in nu.support() {
                basis.prepare(l);
            }
        }
        let pad = dims.max(self.target.param_dim().unwrap_or(0));
        let points: Vec<Vec<f64>> = fresh.iter().map(|nu| grid_point(&basis, nu, pad)).collect();
        let interp = &self.interp;
        let target = self.target;
        let values = par::map_slice(&points, |y| target.eval(y));
        self.evaluations += fresh.len();
        let alphas = par::map_range(fresh.len(), |i| match &values[i] {
            Ok(v) => Ok(v.iter().zip(interp.evaluate(&points[i])).map(|(a, b)| a - b).collect::<Vec<f64>>()),
            Err(message) => Err(Error::Evaluation { index: format!("{:?}", fresh[i]), message: message.clone() }),
        });
        for ((nu, value), alpha) in fresh.into_iter().zip(values).zip(alphas) {
            let alpha = alpha?;
            let sample = value.expect("checked above");
            if sample.len() != self.interp.dim() {
                return Err(Error::DimensionMismatch { expected: self.interp.dim(), found: sample.len() });
            }
            self.first_seen.entry(nu.clone()).or_insert(self.iteration);
            let weight = self.weight_of(&basis, &nu);
            self.candidates.insert(nu, Candidate { alpha_norm: self.norm.norm(&alpha), sample, weight });
        }
        Ok(())
    }

    /// Performs one step and returns its record.
    pub fn step(&mut self) -> Result<&InterpStep> {
        let watch = Stopwatch::start();
        if self.candidates.is_empty() {
            return Err(Error::BudgetExceeded("no anchored neighbors left".into()));
        }
        let n_new = self.interp.set().len() + 1;
        let earliest = self.rule == InterpRule::Conservative && n_new % 2 == 1;
        let scored = self.neighbor_scores();
        let (chosen, score) = if earliest {
            let best = scored
                .iter()
                .min_by_key(|(nu, _)| (self.first_seen[nu], (*nu).clone()))
                .expect("nonempty");
            (vec![best.0.clone()], best.1)
        } else if let Some(fraction) = self.bulk_fraction {
            let scores: Vec<f64> = scored.iter().map(|s| s.1).collect();
            let picks = bulk(&scores, fraction);
            let top = picks.iter().map(|&i| scores[i]).fold(0.0, f64::max);
            (picks.into_iter().map(|i| scored[i].0.clone()).collect(), top)
        } else {
            // strict improvement keeps the canonically smallest among ties
            let mut best = &scored[0];
            for s in &scored[1..] {
                if s.1 > best.1 {
                    best = s;
                }
            }
            (vec![best.0.clone()], best.1)
        };
        let mut selected = Vec::with_capacity(chosen.len());
        for nu in chosen {
            let c = self.candidates.remove(&nu).expect("chosen from candidates");
            selected.push(format!("{nu:?}"));
            self.interp.extend_with_value(nu, c.sample)?;
        }
        self.iteration += 1;
        self.refresh()?;
        self.history.push(InterpStep {
            k: self.iteration,
            n: self.interp.set().len(),
            evaluations: self.evaluations,
            selected,
            rule: if earliest { "earliest".into() } else { "greedy".into() },
            score,
            seconds: watch.seconds(),
            error: None,
        });
        Ok(self.history.last().expect("just pushed"))
    }

    /// Runs until `#Λ ≥ n` or a budget guard trips.
    pub fn run_to(&mut self, n: usize, budget: &Budget) -> Result<()> {
        while self.interp.set().len() < n {
            if self.iteration >= budget.max_iterations {
                return Err(Error::BudgetExceeded(format!("{} iterations", self.iteration)));
            }
            if self.interp.set().len() >= budget.max_set_size {
                return Err(Error::BudgetExceeded(format!("#Λ = {}", self.interp.set().len())));
            }
            self.step()?;
            if self.evaluations > budget.max_evaluations {
                return Err(Error::BudgetExceeded(format!("{} evaluations", self.evaluations)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpolation::PolyBasis;
    use crate::multiindex::MultiIndex;
    use crate::univariate::SequenceKind;
    use crate::FnTarget;

    fn leja() -> PolyBasis {
        PolyBasis::from_kind(SequenceKind::default()).unwrap()
    }

    fn mi(v: &[u32]) -> MultiIndex {
        Multi::from_dense(v)
    }

    #[test]
    fn root_picks_first_unit() {
        let u = FnTarget::new(1, |y: &[f64]| vec![y[0]]).with_params(3);
        let mut g = GreedyInterpolation::new(&u, leja(), InterpRule::Greedy, WeightNorm::Linf).unwrap();
        let names: Vec<_> = g.neighbor_scores().into_iter().map(|s| s.0).collect();
        assert_eq!(names, vec![mi(&[1])]);
        g.step().unwrap();
        assert!(g.set().contains(&mi(&[1])));
    }

    #[test]
    fn matches_brute_force_surpluses() {
        let u = FnTarget::new(1, |y: &[f64]| vec![y[0] + 0.1 * y[1] + 0.3 * y[0] * y[0]]).with_params(2);
        let mut g = GreedyInterpolation::new(&u, leja(), InterpRule::Greedy, WeightNorm::Linf).unwrap();
        g.run_to(3, &Budget::default()).unwrap();
        let interp = g.interpolant().clone();
        let mut best = (mi(&[0]), -1.0);
        for nu in g.set().anchored_neighbors() {
            let mut probe = interp.clone();
            probe.extend(nu.clone(), &u).unwrap();
            let a = probe.coefficient(&nu).unwrap()[0].abs();
            let cached = g.neighbor_scores().into_iter().find(|s| s.0 == nu).unwrap().1;
            assert!((a - cached).abs() < 1e-14);
            if a > best.1 {
                best = (nu, a);
            }
        }
        g.step().unwrap();
        assert!(g.set().contains(&best.0));
    }

    #[test]
    fn stagnation_and_conservative_escape() {
        // u2(t0) = u2(t1) at the first two Leja points ±1
        let u = FnTarget::new(1, |y: &[f64]| vec![y[0].exp() * y[1] * y[1]]).with_params(2);
        let mut g = GreedyInterpolation::new(&u, leja(), InterpRule::Greedy, WeightNorm::Linf).unwrap();
        for _ in 0..20 {
            g.step().unwrap();
        }
        assert!(g.set().iter().all(|nu| nu.get(1) == 0));

        let mut c = GreedyInterpolation::new(&u, leja(), InterpRule::Conservative, WeightNorm::Linf).unwrap();
        let e2 = mi(&[0, 1]);
        let mut steps = 0;
        while !c.set().contains(&e2) {
            c.step().unwrap();
            steps += 1;
            assert!(steps <= 20);
        }
        let seen = c.first_seen(&e2).unwrap();
        assert!(steps <= 2 * (seen + 2), "{steps} steps, first seen {seen}");
    }

    #[test]
    fn conservative_alternates() {
        let u = FnTarget::new(1, |y: &[f64]| vec![(y[0] + 0.5 * y[1] + 0.25 * y[2]).exp()]).with_params(3);
        let mut c = GreedyInterpolation::new(&u, leja(), InterpRule::Conservative, WeightNorm::Linf).unwrap();
        c.run_to(13, &Budget::default()).unwrap();
        let earliest = c.history().iter().filter(|h| h.rule == "earliest").count();
        assert_eq!(earliest, 6);
        for h in c.history() {
            assert_eq!(h.rule == "earliest", h.n % 2 == 1);
        }
    }

    #[test]
    fn conservative_equals_greedy_on_geometric_surpluses() {
        // one coordinate, surpluses shrink geometrically, so the oldest
        // neighbor is also the largest
        let u = FnTarget::new(1, |y: &[f64]| vec![1.0 / (3.0 - y[0])]).with_params(1);
        let mut g = GreedyInterpolation::new(&u, leja(), InterpRule::Greedy, WeightNorm::Linf).unwrap();
        let mut c = GreedyInterpolation::new(&u, leja(), InterpRule::Conservative, WeightNorm::Linf).unwrap();
        g.run_to(10, &Budget::default()).unwrap();
        c.run_to(10, &Budget::default()).unwrap();
        assert_eq!(g.set().members(), c.set().members());
    }

    #[test]
    fn evaluation_accounting() {
        let u = FnTarget::new(1, |y: &[f64]| vec![(y[0] * y[1] + y[2]).sin()]).with_params(3);
        let mut g = GreedyInterpolation::new(&u, leja(), InterpRule::Greedy, WeightNorm::Lp { p: 2.0 }).unwrap();
        g.run_to(15, &Budget::default()).unwrap();
        assert_eq!(g.evaluations(), g.set().len() + g.neighbor_scores().len());
        assert!(g.set().is_anchored());
        let fresh = HierarchicalInterpolant::interpolate(&u, g.set(), leja()).unwrap();
        for nu in g.set().iter() {
            let a = fresh.coefficient(nu).unwrap()[0];
            let b = g.interpolant().coefficient(nu).unwrap()[0];
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn budget_trips() {
        let u = FnTarget::new(1, |y: &[f64]| vec![y[0].exp()]).with_params(2);
        let mut g = GreedyInterpolation::new(&u, leja(), InterpRule::Greedy, WeightNorm::Linf).unwrap();
        let budget = Budget { max_evaluations: 5, ..Budget::default() };
        assert!(matches!(g.run_to(50, &budget), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn bulk_mode_adds_several() {
        let u = FnTarget::new(1, |y: &[f64]| vec![(y[0] + y[1] + y[2]).cos()]).with_params(3);
        let mut g = GreedyInterpolation::new(&u, leja(), InterpRule::Greedy, WeightNorm::Linf)
            .unwrap()
            .with_bulk(0.9);
        g.run_to(20, &Budget::default()).unwrap();
        assert!(g.history().iter().any(|h| h.selected.len() > 1));
        assert!(g.set().is_anchored());
    }

    #[test]
    fn changing_the_norm_rescores_unprepared_neighbors() {
        let u = FnTarget::new(2, |y: &[f64]| vec![(y[0] - y[1]).exp(), 3.0 * y[1] * y[1]]).with_params(2);
        let norm = VNorm::DiscreteL2 { h: 0.25 };
        let g = GreedyInterpolation::new(&u, leja(), InterpRule::Greedy, WeightNorm::Linf).unwrap().with_norm(norm.clone());
        for (nu, score) in g.neighbor_scores() {
            let mut probe = g.interpolant().clone();
            probe.extend(nu.clone(), &u).unwrap();
            assert!((norm.norm(probe.coefficient(&nu).unwrap()) - score).abs() < 1e-14);
        }
    }
}
