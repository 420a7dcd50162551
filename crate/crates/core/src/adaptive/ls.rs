use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{bulk_with_floor, Budget, Stopwatch};
use crate::error::{Error, Result};
use crate::leastsquares::{draw_standard, fit, kappa, min_samples, SampleBatch, SampleScheme, TensorBasis, Variant};
use crate::leastsquares::LsModel;
use crate::multiindex::{IndexSet, MultiIndex};
use crate::testbed::ErrorReport;
use crate::univariate::OrthoFamily;
use crate::vnorm::VNorm;
use crate::{par, Target};

/// Scores at or below `FLOOR · scale` (`scale²` for squared scores) are
/// treated as zero by bulk chasing; `scale` is the RMS norm of the samples.
const FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveLsConfig {
    pub family: OrthoFamily,
    /// Confidence exponent in `κ = (1 − ln 2)/(2 + 2r)`.
    pub r: f64,
    /// Exponent in `m/ln m ≥ n^s/κ`; defaults by family when absent.
    pub s: Option<f64>,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Factor applied to `m` while the sample condition fails.
    pub growth: f64,
    pub seed: u64,
    pub budget: Budget,
}

impl AdaptiveLsConfig {
    pub fn new(family: OrthoFamily, alpha1: f64, alpha2: f64, seed: u64) -> Self {
        Self { family, r: 1.0, s: None, alpha1, alpha2, growth: 2.0, seed, budget: Budget::default() }
    }

    /// `s = 2` for Legendre, `ln 3/ln 2` for Chebyshev.
    pub fn exponent(&self) -> Result<f64> {
        if let Some(s) = self.s {
            return Ok(s);
        }
        match self.family {
            OrthoFamily::Legendre => Ok(2.0),
            OrthoFamily::Chebyshev => Ok(3f64.ln() / 2f64.ln()),
            f => Err(Error::UnsupportedFamily(format!("{f:?} has no default sample exponent"))),
        }
    }
}

/// One iteration of adaptive least squares.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LsStep {
    pub k: usize,
    /// `#Λ_k`.
    pub n: usize,
    /// `#(Λ_{k−1} ∪ F₁)`, the size of the fitted space.
    pub n_fit: usize,
    pub m: usize,
    pub evaluations: usize,
    pub selected: Vec<String>,
    /// `(m/ln m) κ / n_fit^s`; at least 1 after every step.
    pub condition_ratio: f64,
    pub cond: f64,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
}

/// Bulk-chasing adaptive least squares with recycled standard samples.
pub struct AdaptiveLs<'t, T: Target + ?Sized> {
    target: &'t T,
    config: AdaptiveLsConfig,
    s: f64,
    d: usize,
    rng: ChaCha8Rng,
    set: IndexSet,
    model: LsModel,
    batch: SampleBatch,
    values: Vec<Vec<f64>>,
    norm: VNorm,
    iteration: usize,
    history: Vec<LsStep>,
}

impl<'t, T: Target + ?Sized> AdaptiveLs<'t, T> {
    /// Starts from `Λ₀ = {0}` with the smallest admissible `m₀`.
    pub fn new(target: &'t T, config: AdaptiveLsConfig) -> Result<Self> {
        if !config.family.measure().is_bounded() || !config.family.is_orthonormal() {
            return Err(Error::UnsupportedFamily(format!("{:?}", config.family)));
        }
        if !(config.alpha1 > 0.0 && config.alpha1 <= 1.0 && config.alpha2 > 0.0 && config.alpha2 <= 1.0) {
            return Err(Error::InvalidArgument("bulk fractions must lie in (0, 1]".into()));
        }
        if !(config.growth >= 1.1) {
            return Err(Error::InvalidArgument(format!("growth factor {} is below 1.1", config.growth)));
        }
        let s = config.exponent()?;
        let d = target
            .param_dim()
            .ok_or_else(|| Error::InvalidArgument("adaptive least squares needs a target with a parameter count".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let m0 = min_samples(1, config.r, SampleScheme::WeightedOptimal).max(2);
        if m0 > config.budget.max_evaluations {
            return Err(Error::BudgetExceeded(format!("initial m = {m0}")));
        }
        let batch = draw_standard(m0, config.family.measure(), d, &mut rng).with_seed(config.seed);
        let values = evaluate(target, &batch.points, 0)?;
        let set = IndexSet::root();
        let model = fit(&values, &batch, &set, config.family, Variant::Plain)?;
        Ok(Self {
            target,
            config,
            s,
            d,
            rng,
            set,
            model,
            batch,
            values,
            norm: VNorm::Euclidean,
            iteration: 0,
            history: Vec::new(),
        })
    }

    pub fn with_norm(mut self, norm: VNorm) -> Self {
        self.model = self.model.with_norm(norm.clone());
        self.norm = norm;
        self
    }

    pub fn set(&self) -> &IndexSet {
        &self.set
    }

    /// The latest fit, on `Λ_{k−1} ∪ F₁`.
    pub fn model(&self) -> &LsModel {
        &self.model
    }

    /// The latest fit restricted to `Λ_k`.
    pub fn current(&self) -> Result<LsModel> {
        self.model.restrict(&self.set)
    }

    pub fn samples(&self) -> &SampleBatch {
        &self.batch
    }

    pub fn m(&self) -> usize {
        self.batch.len()
    }

    /// Distinct sample points at which `u` has been evaluated.
    pub fn evaluations(&self) -> usize {
        self.values.len()
    }

    pub fn history(&self) -> &[LsStep] {
        &self.history
    }

    pub fn history_mut(&mut self) -> &mut [LsStep] {
        &mut self.history
    }

    fn scale(&self) -> f64 {
        let m = self.values.len().max(1) as f64;
        (self.values.iter().map(|v| self.norm.norm(v).powi(2)).sum::<f64>() / m).sqrt()
    }

    /// `‖⟨φ_ν, u − ũ_L⟩_m‖_V` for each anchored neighbor of `Λ_k`, with
    /// `ũ_L` the current fit restricted to `Λ_k`.
    pub fn em_scores(&self) -> Result<Vec<(MultiIndex, f64)>> {
        let dims = (self.set.active_dim() + 1).min(self.d.max(1));
        let candidates = self.set.neighbors(dims);
        if candidates.is_empty() {
            return Ok(Vec::new());
        }
        let reduced = self.model.restrict(&self.set)?;
        let dim = self.model.dim();
        let basis = TensorBasis::new(self.config.family, candidates.clone());
        let m = self.batch.len();
        let batch = &self.batch;
        let values = &self.values;
        let parts = par::map_chunks(m, 1024, |range| {
            let mut acc = vec![0.0; candidates.len() * dim];
            let mut phi = Vec::new();
            for i in range {
                let y = &batch.points[i];
                let fitted = reduced.evaluate_raw(y);
                basis.eval_into(y, &mut phi);
                let w = batch.weights[i];
                for (a, p) in phi.iter().enumerate() {
                    for c in 0..dim {
                        acc[a * dim + c] += w * p * (values[i][c] - fitted[c]);
                    }
                }
            }
            acc
        });
        let mut total = vec![0.0; candidates.len() * dim];
        for part in parts {
            for (t, v) in total.iter_mut().zip(part) {
                *t += v;
            }
        }
        let inv = 1.0 / m as f64;
        Ok(candidates
            .into_iter()
            .enumerate()
            .map(|(a, nu)| {
                let v: Vec<f64> = total[a * dim..(a + 1) * dim].iter().map(|x| x * inv).collect();
                (nu, self.norm.norm(&v))
            })
            .collect())
    }

    fn grow_samples(&mut self, n_fit: usize) -> Result<()> {
        let kappa = kappa(self.config.r);
        let needed = (n_fit as f64).powf(self.s) / kappa;
        let mut m = self.batch.len();
        while (m as f64) / (m as f64).ln() < needed {
            m = ((m as f64) * self.config.growth).ceil() as usize;
            if m > self.config.budget.max_evaluations {
                return Err(Error::BudgetExceeded(format!("m = {m} samples")));
            }
        }
        let extra = m - self.batch.len();
        if extra == 0 {
            return Ok(());
        }
        let new = draw_standard(extra, self.config.family.measure(), self.d, &mut self.rng);
        let values = evaluate(self.target, &new.points, self.values.len())?;
        self.batch.append(new)?;
        self.values.extend(values);
        Ok(())
    }

    /// One bulk-chasing iteration.
    pub fn step(&mut self) -> Result<&LsStep> {
        let watch = Stopwatch::start();
        let scale = self.scale();
        let scored = self.em_scores()?;
        if scored.is_empty() {
            return Err(Error::BudgetExceeded("no anchored neighbors left".into()));
        }
        let e_m: Vec<f64> = scored.iter().map(|s| s.1).collect();
        let f1: Vec<MultiIndex> = bulk_with_floor(&e_m, self.config.alpha1, FLOOR * scale)
            .into_iter()
            .map(|i| scored[i].0.clone())
            .collect();
        let fit_set = IndexSet::from_unordered(self.set.iter().cloned().chain(f1.iter().cloned()))?;
        if fit_set.len() > self.config.budget.max_set_size {
            return Err(Error::BudgetExceeded(format!("#Λ = {}", fit_set.len())));
        }
        self.grow_samples(fit_set.len())?;
        self.model = fit(&self.values, &self.batch, &fit_set, self.config.family, Variant::Plain)?
            .with_norm(self.norm.clone());
        let e_l: Vec<f64> = f1
            .iter()
            .map(|nu| self.norm.norm(self.model.coefficient(nu).expect("F1 is in the fitted set")).powi(2))
            .collect();
        let f2: Vec<MultiIndex> = bulk_with_floor(&e_l, self.config.alpha2, FLOOR * FLOOR * scale * scale)
            .into_iter()
            .map(|i| f1[i].clone())
            .collect();
        self.set = IndexSet::from_unordered(self.set.iter().cloned().chain(f2.iter().cloned()))?;
        self.iteration += 1;
        let m = self.batch.len();
        let ratio = (m as f64 / (m as f64).ln()) * kappa(self.config.r) / (fit_set.len() as f64).powf(self.s);
        self.history.push(LsStep {
            k: self.iteration,
            n: self.set.len(),
            n_fit: fit_set.len(),
            m,
            evaluations: self.values.len(),
            selected: f2.iter().map(|nu| format!("{nu:?}")).collect(),
            condition_ratio: ratio,
            cond: self.model.diagnostics().cond,
            seconds: watch.seconds(),
            error: None,
        });
        Ok(self.history.last().expect("just pushed"))
    }

    /// Runs until `#Λ_k ≥ n` or a budget guard trips.
    pub fn run_to(&mut self, n: usize) -> Result<()> {
        while self.set.len() < n {
            if self.iteration >= self.config.budget.max_iterations {
                return Err(Error::BudgetExceeded(format!("{} iterations", self.iteration)));
            }
            self.step()?;
        }
        Ok(())
    }

    /// Runs exactly `steps` iterations.
    pub fn run_steps(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            if self.iteration >= self.config.budget.max_iterations {
                return Err(Error::BudgetExceeded(format!("{} iterations", self.iteration)));
            }
            self.step()?;
        }
        Ok(())
    }
}

fn evaluate<T: Target + ?Sized>(target: &T, points: &[Vec<f64>], offset: usize) -> Result<Vec<Vec<f64>>> {
    let values = par::map_slice(points, |y| target.eval(y));
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let v = v.map_err(|message| Error::Evaluation { index: format!("sample {}", offset + i), message })?;
            if v.len() != target.dim() {
                return Err(Error::DimensionMismatch { expected: target.dim(), found: v.len() });
            }
            Ok(v)
        })
        .collect()
}
