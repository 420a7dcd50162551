#![allow(dead_code)]

use rand::Rng;
use sparsepoly::{IndexSet, MultiIndex};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Grows `{0}` by uniformly chosen addable neighbors in `d` variables.
pub fn random_dc_set<R: Rng>(rng: &mut R, d: usize, n: usize) -> IndexSet {
    let mut set = IndexSet::root();
    while set.len() < n {
        let cands = set.neighbors(d);
        let pick = cands[rng.random_range(0..cands.len())].clone();
        set.push(pick).unwrap();
    }
    set
}

pub fn monomial(y: &[f64], nu: &MultiIndex) -> f64 {
    nu.support().map(|(j, k)| y[j].powi(k as i32)).product()
}

/// Least-squares slope of `ln e` against `ln n` with a two-sided 95%
/// confidence interval.
pub fn loglog_slope(n: &[f64], e: &[f64]) -> (f64, f64, f64) {
    let x: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let sse: f64 = x.iter().zip(&y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let se = (sse / (k - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, k - 2.0).unwrap().inverse_cdf(0.975);
    (slope, slope - t * se, slope + t * se)
}
