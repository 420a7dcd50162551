use rand::Rng;
use serde::{Deserialize, Serialize};

use super::basis::TensorBasis;
use crate::error::{Error, Result};
use crate::multiindex::IndexSet;
use crate::univariate::{Measure, OrthoFamily};

/// Which distribution a batch was drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SamplingMeasure {
    /// Product of the reference measure `dμ`.
    Standard { measure: Measure },
    /// `dσ = k_n/n dμ` for the family and set size recorded here.
    Optimal { family: OrthoFamily, n: usize },
}

/// `m` sample points with their least-squares weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleBatch {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub measure: SamplingMeasure,
    pub seed: Option<u64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_weighted(&self) -> bool {
        matches!(self.measure, SamplingMeasure::Optimal { .. })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Appends draws from the same measure.
    pub fn append(&mut self, other: SampleBatch) -> Result<()> {
        if other.measure != self.measure || self.is_weighted() {
            return Err(Error::InvalidArgument("only standard batches from the same measure can be merged".into()));
        }
        self.points.extend(other.points);
        self.weights.extend(other.weights);
        Ok(())
    }

    /// CSV with columns `w,y1,…,yd`.
    pub fn to_csv(&self) -> String {
        let d = self.points.first().map_or(0, Vec::len);
        let mut out = String::from("w");
        for j in 1..=d {
            out.push_str(&format!(",y{j}"));
        }
        out.push('\n');
        for (y, w) in self.points.iter().zip(&self.weights) {
            out.push_str(&format!("{w:.16e}"));
            for v in y {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// `m` i.i.d. draws from the product measure on `d` coordinates, weights 1.
pub fn draw_standard<R: Rng + ?Sized>(m: usize, measure: Measure, d: usize, rng: &mut R) -> SampleBatch {
    let points = (0..m)
        .map(|_| (0..d).map(|_| measure.sample(rng)).collect())
        .collect();
    SampleBatch {
        points,
        weights: vec![1.0; m],
        measure: SamplingMeasure::Standard { measure },
        seed: None,
    }
}

/// `m` draws from `dσ = (k_n/n) dμ`, the uniform mixture over `ν ∈ Λ` of
/// `∏_j |φ_{ν_j}|² dμ`, with weights `w = n/k_n`. Points have
/// `max(d, j(Λ))` coordinates.
pub fn draw_optimal<R: Rng + ?Sized>(
    m: usize,
    set: &IndexSet,
    family: OrthoFamily,
    d: usize,
    rng: &mut R,
) -> Result<SampleBatch> {
    if !family.is_orthonormal() {
        return Err(Error::UnsupportedFamily(format!("{family:?} is not orthonormal")));
    }
    let n = set.len();
    let d = d.max(set.active_dim());
    let basis = TensorBasis::for_set(family, set);
    let mut points = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for _ in 0..m {
        let nu = &set.members()[rng.random_range(0..n)];
        let y: Vec<f64> = (0..d).map(|j| family.sample(nu.get(j), rng)).collect();
        weights.push(n as f64 / basis.kn(&y));
        points.push(y);
    }
    Ok(SampleBatch {
        points,
        weights,
        measure: SamplingMeasure::Optimal { family, n },
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::MultiIndex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn root_optimal_is_standard() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = draw_optimal(100, &IndexSet::root(), OrthoFamily::Legendre, 2, &mut rng).unwrap();
        assert!(b.weights.iter().all(|&w| w == 1.0));
        assert!(b.points.iter().all(|y| y.len() == 2 && y.iter().all(|t| t.abs() <= 1.0)));
    }

    #[test]
    fn weight_times_kn_is_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let set = IndexSet::rectangle(&MultiIndex::from_dense(&[3, 2]));
        let b = draw_optimal(2000, &set, OrthoFamily::Legendre, 2, &mut rng).unwrap();
        let basis = TensorBasis::for_set(OrthoFamily::Legendre, &set);
        for (y, w) in b.points.iter().zip(&b.weights) {
            assert!((w * basis.kn(y) - set.len() as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn append_requires_same_measure() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = draw_standard(5, Measure::Uniform, 2, &mut rng);
        let b = draw_standard(7, Measure::Uniform, 2, &mut rng);
        a.append(b).unwrap();
        assert_eq!(a.len(), 12);
        assert!(a.append(draw_standard(1, Measure::Gaussian, 2, &mut rng)).is_err());
    }
}
