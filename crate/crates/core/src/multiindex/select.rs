use std::collections::{BTreeSet, HashMap};

use super::{IndexSet, MultiIndex, WeightSequence};
use crate::error::{Error, Result};

/// Log-weights closer than this are treated as ties and broken by the
/// canonical multi-index order.
pub(crate) const LOG_TIE_TOL: f64 = 1e-12;

/// Which neighbors the greedy construction may choose from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Anchored neighbors: coordinates are activated one at a time.
    Anchored,
    /// All neighbors within the first `d` coordinates.
    Dims(usize),
}

/// Nested downward closed set of the `n` largest `κ̂_ν`.
///
/// Starts from `{0_F}` and repeatedly appends the candidate neighbor with
/// the largest majorant `κ̂_ν`; ties go to the canonically smallest index.
/// The returned enumeration is the insertion order, so the result for `n`
/// is a prefix of the result for `n + 1`.
pub fn select_largest_n(w: &WeightSequence, n: usize, selection: Selection) -> Result<IndexSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("select_largest_n needs n >= 1".into()));
    }
    let cap = w.max_dims();
    let allowed = |set: &IndexSet| -> usize {
        let d = match selection {
            Selection::Anchored => set.active_dim() + 1,
            Selection::Dims(d) => d,
        };
        cap.map_or(d, |c| d.min(c))
    };

    let mut set = IndexSet::root();
    let mut candidates: HashMap<MultiIndex, f64> = HashMap::new();
    let mut dims = 0;
    let refresh = |set: &IndexSet, from: &[MultiIndex], dims: usize, cands: &mut HashMap<MultiIndex, f64>| {
        for mu in from {
            for nu in mu.upper_neighbors(dims) {
                if !cands.contains_key(&nu) && set.can_add(&nu) {
                    let score = w.log_majorant(&nu);
                    cands.insert(nu, score);
                }
            }
        }
    };

    while set.len() < n {
        let new_dims = allowed(&set);
        if new_dims != dims {
            dims = new_dims;
            let all = set.members().to_vec();
            refresh(&set, &all, dims, &mut candidates);
        }
        let Some(best) = pick_best(&candidates) else {
            return Err(Error::InvalidArgument(format!(
                "only {} indices are reachable with positive weight",
                set.len()
            )));
        };
        candidates.remove(&best);
        set.push(best.clone())?;
        let new_dims = allowed(&set);
        if new_dims != dims {
            dims = new_dims;
            let all = set.members().to_vec();
            refresh(&set, &all, dims, &mut candidates);
        } else {
            refresh(&set, std::slice::from_ref(&best), dims, &mut candidates);
        }
    }
    Ok(set)
}

fn pick_best(candidates: &HashMap<MultiIndex, f64>) -> Option<MultiIndex> {
    let top = candidates.values().cloned().fold(f64::NEG_INFINITY, f64::max);
    if candidates.is_empty() || top == f64::NEG_INFINITY {
        return None;
    }
    candidates
        .iter()
        .filter(|(_, &s)| s >= top - LOG_TIE_TOL)
        .map(|(nu, _)| nu)
        .min()
        .cloned()
}

/// Monotone majorant of an arbitrary weight restricted to the box
/// `R_box`, computed by a reverse sweep. Test oracle only: the true
/// majorant over all of `F` is not computable for arbitrary weights.
pub struct BoxedMajorant {
    values: HashMap<MultiIndex, f64>,
}

impl BoxedMajorant {
    pub fn get(&self, nu: &MultiIndex) -> Option<f64> {
        self.values.get(nu).copied()
    }
}

pub fn monotone_majorant_boxed<F>(kappa: F, bounds: &MultiIndex) -> BoxedMajorant
where
    F: Fn(&MultiIndex) -> f64,
{
    let rect = IndexSet::rectangle(bounds);
    let dims = bounds.active_dim();
    let inside: BTreeSet<&MultiIndex> = rect.iter().collect();
    let mut values: HashMap<MultiIndex, f64> = HashMap::with_capacity(rect.len());
    // canonical order sorts by degree, so walking it backwards visits every
    // upper neighbor before the index itself
    for nu in rect.members().iter().rev() {
        let mut best = kappa(nu).abs();
        for up in nu.upper_neighbors(dims) {
            if inside.contains(&up) {
                best = best.max(values[&up]);
            }
        }
        values.insert(nu.clone(), best);
    }
    BoxedMajorant { values }
}

/// `(Σ_{ν ∉ Λ_n} c_ν^q)^{1/q}` where `Λ_n` holds the `n` largest entries.
pub fn stechkin_tail(c: &[f64], n: usize, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::InvalidArgument(format!("q must be positive, got {q}")));
    }
    if let Some(bad) = c.iter().find(|&&x| !(x >= 0.0)) {
        return Err(Error::InvalidArgument(format!("negative or NaN entry {bad}")));
    }
    let mut sorted = c.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let tail: f64 = sorted.iter().skip(n).map(|x| x.powf(q)).sum();
    Ok(tail.powf(1.0 / q))
}
