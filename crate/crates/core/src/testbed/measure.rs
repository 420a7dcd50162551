//! Probe-set `L∞` and Monte Carlo `L²` error estimates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::univariate::Measure;
use crate::vnorm::VNorm;
use crate::{par, Evaluable, Target};

/// Stream offset separating the Monte Carlo set from the probe set.
const MC_STREAM: u64 = 0x4d43;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorConfig {
    pub probes: usize,
    pub mc: usize,
    pub seed: u64,
    pub measure: Measure,
    pub d: usize,
}

impl ErrorConfig {
    /// 2000 probes, 10⁴ Monte Carlo points.
    pub fn new(d: usize, measure: Measure, seed: u64) -> Self {
        Self { probes: 2000, mc: 10_000, seed, measure, d }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub linf: f64,
    pub l2: f64,
    /// Standard error of the mean of squared errors, propagated to `l2`.
    pub l2_stderr: f64,
    pub probes: usize,
    pub mc: usize,
    pub seed: u64,
}

/// Seeded point set: `count` draws of `d` coordinates.
pub fn point_set(count: usize, d: usize, measure: Measure, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..d).map(|_| measure.sample(&mut rng)).collect()).collect()
}

/// Truth values at fixed points, so several approximations can be
/// compared against one set of solves.
#[derive(Debug, Clone)]
pub struct Reference {
    pub config: ErrorConfig,
    pub probe_points: Vec<Vec<f64>>,
    pub probe_values: Vec<Vec<f64>>,
    pub mc_points: Vec<Vec<f64>>,
    pub mc_values: Vec<Vec<f64>>,
}

impl Reference {
    pub fn new<T: Target + ?Sized>(truth: &T, config: ErrorConfig) -> Result<Self> {
        let probe_points = point_set(config.probes, config.d, config.measure, config.seed);
        let mc_points = point_set(config.mc, config.d, config.measure, config.seed ^ MC_STREAM.rotate_left(32));
        let eval = |ys: &Vec<Vec<f64>>| -> Result<Vec<Vec<f64>>> {
            par::try_map_slice(ys, |y| {
                truth.eval(y).map_err(|message| Error::Evaluation { index: format!("{y:?}"), message })
            })
        };
        let probe_values = eval(&probe_points)?;
        let mc_values = eval(&mc_points)?;
        Ok(Self { config, probe_points, probe_values, mc_points, mc_values })
    }

    pub fn measure<A: Evaluable + ?Sized>(&self, approx: &A, norm: &VNorm) -> ErrorReport {
        let probe = par::map_range(self.probe_points.len(), |i| {
            norm.distance(&self.probe_values[i], &approx.evaluate(&self.probe_points[i]))
        });
        let sq = par::map_range(self.mc_points.len(), |i| {
            norm.distance(&self.mc_values[i], &approx.evaluate(&self.mc_points[i])).powi(2)
        });
        let linf = probe.iter().copied().fold(0.0, f64::max);
        let m = sq.len() as f64;
        let mean = sq.iter().sum::<f64>() / m;
        let var = if sq.len() > 1 { sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0) } else { 0.0 };
        let l2 = mean.sqrt();
        // delta method: se(√X̄) ≈ se(X̄)/(2√X̄)
        let l2_stderr = if l2 > 0.0 { (var / m).sqrt() / (2.0 * l2) } else { 0.0 };
        ErrorReport {
            linf,
            l2,
            l2_stderr,
            probes: self.probe_points.len(),
            mc: self.mc_points.len(),
            seed: self.config.seed,
        }
    }
}

/// `L∞` over the seeded probe set and `L²` over the seeded Monte Carlo
/// set, in the norm of `V`.
pub fn measure_error<A, T>(approx: &A, truth: &T, norm: &VNorm, config: &ErrorConfig) -> Result<ErrorReport>
where
    A: Evaluable + ?Sized,
    T: Target + ?Sized,
{
    Ok(Reference::new(truth, config.clone())?.measure(approx, norm))
}
