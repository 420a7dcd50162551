//! Study configuration: parsed from TOML, overridden by flags, validated
//! before anything runs.

use serde::{Deserialize, Serialize};

use sparsepoly::adaptive::{InterpRule, WeightNorm};
use sparsepoly::leastsquares::Variant;
use sparsepoly::multiindex::{BRule, Selection, WeightSequence};
use sparsepoly::testbed::{Benchmark, DiffusionConfig, DiffusionProblem};
use sparsepoly::univariate::{Measure, OrthoFamily, SequenceKind};
use sparsepoly::{Target, VNorm};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemSpec,
    /// Target set sizes, strictly increasing.
    #[serde(default)]
    pub n: Vec<usize>,
    pub weights: Option<WeightSequence>,
    #[serde(default)]
    pub selection: SelectionSpec,
    #[serde(default)]
    pub interp: InterpSpec,
    #[serde(default)]
    pub lsq: LsqSpec,
    #[serde(default)]
    pub adapt: AdaptSpec,
    #[serde(default)]
    pub phase: PhaseSpec,
    #[serde(default)]
    pub pl: PlSpec,
    #[serde(default)]
    pub error: ErrorSpec,
    #[serde(default)]
    pub budget: BudgetSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemSpec {
    Diffusion(DiffusionConfig),
    Benchmark { benchmark: Benchmark },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SelectionSpec {
    #[default]
    Anchored,
    Dims { d: usize },
}

impl SelectionSpec {
    pub fn resolve(self) -> Selection {
        match self {
            SelectionSpec::Anchored => Selection::Anchored,
            SelectionSpec::Dims { d } => Selection::Dims(d),
        }
    }

    /// As [`resolve`](Self::resolve), with `Dims` capped at `d`.
    pub fn resolve_for(self, d: usize) -> Selection {
        match self.resolve() {
            Selection::Dims(k) => Selection::Dims(k.min(d)),
            s => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InterpSpec {
    #[serde(default)]
    pub points: SequenceKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    #[default]
    Standard,
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsqSpec {
    /// Defaults to the family matching the problem measure.
    pub family: Option<OrthoFamily>,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "plain")]
    pub variant: Variant,
    /// Fixed sample counts, one per entry of `n`. Computed from the
    /// stability condition when empty.
    #[serde(default)]
    pub m: Vec<usize>,
}

impl Default for LsqSpec {
    fn default() -> Self {
        Self { family: None, sampling: Sampling::Standard, r: 1.0, variant: Variant::Plain, m: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AdaptMethod {
    #[default]
    Interp,
    Ls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptSpec {
    #[serde(default)]
    pub method: AdaptMethod,
    #[serde(default = "greedy")]
    pub rule: InterpRule,
    #[serde(default = "linf")]
    pub weight_norm: WeightNorm,
    /// Bulk fraction for interpolation; single-index steps when absent.
    pub bulk: Option<f64>,
    #[serde(default = "half")]
    pub alpha1: f64,
    #[serde(default = "half")]
    pub alpha2: f64,
    #[serde(default = "one")]
    pub r: f64,
    pub s: Option<f64>,
    #[serde(default = "two")]
    pub growth: f64,
    pub family: Option<OrthoFamily>,
}

impl Default for AdaptSpec {
    fn default() -> Self {
        Self {
            method: AdaptMethod::Interp,
            rule: InterpRule::Greedy,
            weight_norm: WeightNorm::Linf,
            bulk: None,
            alpha1: 0.5,
            alpha2: 0.5,
            r: 1.0,
            s: None,
            growth: 2.0,
            family: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    #[serde(default = "legendre")]
    pub family: OrthoFamily,
    /// Rectangles `R_ν`, one per row group. When empty the sets are the
    /// a-priori sets for each entry of `n`.
    #[serde(default)]
    pub rectangles: Vec<Vec<u32>>,
    /// Sample counts to scan. When empty each arm uses its own
    /// stability-condition minimum.
    #[serde(default)]
    pub m: Vec<usize>,
    #[serde(default = "trials")]
    pub trials: usize,
    #[serde(default = "one")]
    pub r: f64,
}

impl Default for PhaseSpec {
    fn default() -> Self {
        Self { family: OrthoFamily::Legendre, rectangles: Vec::new(), m: Vec::new(), trials: trials(), r: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlSpec {
    #[serde(default = "pl_steps")]
    pub steps: usize,
    #[serde(default = "pl_checkpoint")]
    pub checkpoint: usize,
    #[serde(default = "greedy")]
    pub rule: InterpRule,
    #[serde(default = "linf")]
    pub weight_norm: WeightNorm,
}

impl Default for PlSpec {
    fn default() -> Self {
        Self { steps: pl_steps(), checkpoint: pl_checkpoint(), rule: InterpRule::Greedy, weight_norm: WeightNorm::Linf }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorSpec {
    #[serde(default = "probes")]
    pub probes: usize,
    #[serde(default = "mc")]
    pub mc: usize,
}

impl Default for ErrorSpec {
    fn default() -> Self {
        Self { probes: probes(), mc: mc() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    #[serde(default = "max_evals")]
    pub evaluations: usize,
    #[serde(default = "max_iters")]
    pub iterations: usize,
    #[serde(default = "max_set")]
    pub set_size: usize,
}

impl Default for BudgetSpec {
    fn default() -> Self {
        Self { evaluations: max_evals(), iterations: max_iters(), set_size: max_set() }
    }
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn half() -> f64 {
    0.5
}
fn plain() -> Variant {
    Variant::Plain
}
fn greedy() -> InterpRule {
    InterpRule::Greedy
}
fn linf() -> WeightNorm {
    WeightNorm::Linf
}
fn legendre() -> OrthoFamily {
    OrthoFamily::Legendre
}
fn trials() -> usize {
    200
}
fn pl_steps() -> usize {
    50
}
fn pl_checkpoint() -> usize {
    10
}
fn probes() -> usize {
    2000
}
fn mc() -> usize {
    10_000
}
fn max_evals() -> usize {
    10_000_000
}
fn max_iters() -> usize {
    1000
}
fn max_set() -> usize {
    100_000
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Checks shared by all subcommands.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n.iter().any(|&n| n == 0) {
            return Err(CliError::Config("set sizes in `n` must be positive".into()));
        }
        if self.n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config("`n` must be strictly increasing".into()));
        }
        if let Some(w) = &self.weights {
            // serde bypasses the constructor checks
            WeightSequence::new(w.kind(), w.b().clone())?;
        }
        if self.error.probes == 0 || self.error.mc == 0 {
            return Err(CliError::Config("error.probes and error.mc must be positive".into()));
        }
        if self.pl.checkpoint == 0 {
            return Err(CliError::Config("pl.checkpoint must be positive".into()));
        }
        if self.phase.trials == 0 {
            return Err(CliError::Config("phase.trials must be positive".into()));
        }
        Problem::new(&self.problem)?;
        Ok(())
    }

    pub fn weights(&self) -> Result<&WeightSequence, CliError> {
        self.weights.as_ref().ok_or_else(|| CliError::Config("this command needs a `weights` table".into()))
    }

    /// The weight sequence restricted to the first `d` coordinates, so
    /// selected sets never activate parameters the problem does not read.
    pub fn weights_for(&self, d: usize) -> Result<WeightSequence, CliError> {
        let w = self.weights()?;
        if w.max_dims().is_some_and(|m| m <= d) {
            return Ok(w.clone());
        }
        let values = (0..d).map(|j| w.b().value(j)).collect();
        Ok(WeightSequence::new(w.kind(), BRule::Explicit { values })?)
    }

    pub fn require_n(&self) -> Result<&[usize], CliError> {
        if self.n.is_empty() {
            return Err(CliError::Config("this command needs a non-empty `n` list".into()));
        }
        Ok(&self.n)
    }
}

/// A resolved problem, usable as a target.
pub enum Problem {
    Diffusion(DiffusionProblem),
    Benchmark(Benchmark),
}

impl Problem {
    pub fn new(problem: &ProblemSpec) -> Result<Self, CliError> {
        Ok(match problem {
            ProblemSpec::Diffusion(c) => Problem::Diffusion(DiffusionProblem::new(c.clone())?),
            ProblemSpec::Benchmark { benchmark } => {
                benchmark.validate()?;
                Problem::Benchmark(benchmark.clone())
            }
        })
    }

    pub fn d(&self) -> usize {
        match self {
            Problem::Diffusion(p) => p.d(),
            Problem::Benchmark(b) => b.d(),
        }
    }

    pub fn measure(&self) -> Measure {
        match self {
            Problem::Diffusion(p) if p.is_lognormal() => Measure::Gaussian,
            _ => Measure::Uniform,
        }
    }

    pub fn norm(&self) -> VNorm {
        match self {
            Problem::Diffusion(p) => p.v_norm(),
            Problem::Benchmark(_) => VNorm::Euclidean,
        }
    }

    pub fn default_family(&self) -> OrthoFamily {
        match self.measure() {
            Measure::Gaussian => OrthoFamily::Hermite,
            Measure::Chebyshev => OrthoFamily::Chebyshev,
            Measure::Uniform => OrthoFamily::Legendre,
        }
    }

    /// Interpolation and the hat basis need a bounded parameter domain.
    pub fn require_bounded(&self, what: &str) -> Result<(), CliError> {
        if self.measure().is_bounded() {
            Ok(())
        } else {
            Err(CliError::Config(format!("{what} needs parameters on [-1, 1]; the problem is Gaussian")))
        }
    }
}

impl Target for Problem {
    fn dim(&self) -> usize {
        match self {
            Problem::Diffusion(p) => p.dim(),
            Problem::Benchmark(b) => b.dim(),
        }
    }

    fn eval(&self, y: &[f64]) -> Result<Vec<f64>, String> {
        match self {
            Problem::Diffusion(p) => p.eval(y),
            Problem::Benchmark(b) => b.eval(y),
        }
    }

    fn param_dim(&self) -> Option<usize> {
        Some(self.d())
    }
}
