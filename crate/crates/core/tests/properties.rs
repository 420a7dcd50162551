mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparsepoly::adaptive::{bulk, GreedyInterpolation, InterpRule, WeightNorm};
use sparsepoly::leastsquares::{assemble, draw_optimal, draw_standard, gram_deviation, kn, truncate, TensorBasis};
use sparsepoly::multiindex::{is_downward_closed, select_largest_n, BRule, Selection, WeightKind, WeightSequence};
use sparsepoly::pwlinear::{PlBasis, TreeIndex};
use sparsepoly::univariate::{hierarchical_basis_eval, Measure, OrthoFamily, PointSequence, SequenceKind};
use sparsepoly::{FnTarget, HierarchicalInterpolant, IndexSet, Letter, MultiIndex, PolyBasis, VNorm};

use common::random_dc_set;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

/// A random enumeration of `set` in which every prefix is downward closed.
fn shuffled_enumeration(set: &IndexSet, rng: &mut ChaCha8Rng) -> IndexSet {
    let mut out = IndexSet::root();
    let mut left: Vec<MultiIndex> = set.iter().skip(1).cloned().collect();
    while !left.is_empty() {
        let ready: Vec<usize> = (0..left.len()).filter(|&i| out.can_add(&left[i])).collect();
        let pick = ready[rng.random_range(0..ready.len())];
        out.push(left.swap_remove(pick)).unwrap();
    }
    out
}

fn weight_strategy() -> impl Strategy<Value = WeightSequence> {
    (0.1f64..0.9, 0.5f64..3.0, 0usize..5).prop_map(|(c, tau, kind)| {
        let kind = match kind {
            0 => WeightKind::Geometric,
            1 => WeightKind::LegendreL2,
            2 => WeightKind::LegendreLinf,
            3 => WeightKind::InterpTaylor { theta: 1 },
            _ => WeightKind::Hermite { r: 2 },
        };
        WeightSequence::new(kind, BRule::Algebraic { c, tau }).unwrap()
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn random_sets_are_downward_closed_in_every_prefix(seed in any::<u64>(), d in 1usize..=4, n in 1usize..=40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = random_dc_set(&mut rng, d, n);
        for k in 1..=set.len() {
            prop_assert!(is_downward_closed(&set.members()[..k]));
        }
    }

    #[test]
    fn neighbors_are_new_and_addable(seed in any::<u64>(), d in 1usize..=4, n in 1usize..=30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = random_dc_set(&mut rng, d, n);
        let anchored: BTreeSet<MultiIndex> = set.anchored_neighbors().into_iter().collect();
        for extra in 0..3 {
            let dims = set.active_dim() + 1 + extra;
            let all: BTreeSet<MultiIndex> = set.neighbors(dims).into_iter().collect();
            prop_assert!(anchored.is_subset(&all));
            for nu in &all {
                prop_assert!(!set.contains(nu));
                let mut grown = set.members().to_vec();
                grown.push(nu.clone());
                prop_assert!(is_downward_closed(&grown));
            }
        }
    }

    #[test]
    fn selection_is_nested_and_anchored(w in weight_strategy(), n in 1usize..40) {
        let small = select_largest_n(&w, n, Selection::Anchored).unwrap();
        let big = select_largest_n(&w, n + 1, Selection::Anchored).unwrap();
        prop_assert_eq!(&big.members()[..n], small.members());
        prop_assert!(is_downward_closed(big.members()));
        prop_assert!(big.is_anchored());
    }

    #[test]
    fn weight_kinds_are_ordered(c in 0.05f64..0.95, tau in 0.0f64..3.0, dense in proptest::collection::vec(0u32..6, 1..5)) {
        let b = BRule::Algebraic { c, tau };
        let nu = MultiIndex::from_dense(&dense);
        let g = WeightSequence::new(WeightKind::Geometric, b.clone()).unwrap().log_evaluate(&nu);
        let l2 = WeightSequence::new(WeightKind::LegendreL2, b.clone()).unwrap().log_evaluate(&nu);
        let linf = WeightSequence::new(WeightKind::LegendreLinf, b).unwrap().log_evaluate(&nu);
        prop_assert!(g <= l2 + 1e-12 && l2 <= linf + 1e-12);
    }

    #[test]
    fn canonical_order_is_degree_first(a in proptest::collection::vec(0u32..5, 1..5), b in proptest::collection::vec(0u32..5, 1..5)) {
        let x = MultiIndex::from_dense(&a);
        let y = MultiIndex::from_dense(&b);
        if x.degree() < y.degree() {
            prop_assert!(x < y);
        }
        prop_assert_eq!(x == y, x.cmp(&y) == std::cmp::Ordering::Equal);
        prop_assert_eq!(x.cmp(&y), y.cmp(&x).reverse());
    }

    #[test]
    fn surpluses_ignore_enumeration_order(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = random_dc_set(&mut rng, d, n);
        let other = shuffled_enumeration(&set, &mut rng);
        let u = FnTarget::new(2, |y: &[f64]| vec![(y[0] - 0.3 * y[1]).sin(), 1.0 / (3.0 + y[2])]).with_params(3);
        let basis = PolyBasis::from_kind(SequenceKind::default()).unwrap();
        let a = HierarchicalInterpolant::interpolate(&u, &set, basis.clone()).unwrap();
        let b = HierarchicalInterpolant::interpolate(&u, &other, basis).unwrap();
        for nu in set.iter() {
            let (ca, cb) = (a.coefficient(nu).unwrap(), b.coefficient(nu).unwrap());
            for (x, y) in ca.iter().zip(cb) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
            let sample = a.sample(nu).unwrap();
            let at = a.evaluate(&a.grid_point(nu));
            for (s, v) in sample.iter().zip(&at) {
                prop_assert!((s - v).abs() <= 1e-9 * (1.0 + s.abs()));
            }
        }
    }

    #[test]
    fn reinterpolating_an_interpolant_is_the_identity(seed in any::<u64>(), n in 1usize..=30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = random_dc_set(&mut rng, 3, n);
        let u = FnTarget::new(1, |y: &[f64]| vec![(y[0] + 2.0 * y[1] * y[2]).exp()]).with_params(3);
        let basis = PolyBasis::from_kind(SequenceKind::RLeja).unwrap();
        let first = HierarchicalInterpolant::interpolate(&u, &set, basis.clone()).unwrap();
        let again = FnTarget::new(1, |y: &[f64]| first.evaluate(y)).with_params(3);
        let second = HierarchicalInterpolant::interpolate(&again, &set, basis).unwrap();
        for nu in set.iter() {
            let (x, y) = (first.coefficient(nu).unwrap()[0], second.coefficient(nu).unwrap()[0]);
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn bulk_is_minimal_and_sufficient(scores in proptest::collection::vec(0.0f64..10.0, 1..30), alpha in 0.01f64..=1.0) {
        let picked = bulk(&scores, alpha);
        let total: f64 = scores.iter().sum();
        prop_assert!(!picked.is_empty());
        let got: f64 = picked.iter().map(|&i| scores[i]).sum();
        if total > 0.0 {
            prop_assert!(got >= alpha * total * (1.0 - 1e-12));
            // no smaller set reaches the threshold: the best |F| − 1 entries fall short
            let mut sorted = scores.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let best_smaller: f64 = sorted[..picked.len() - 1].iter().sum();
            prop_assert!(best_smaller < alpha * total);
        } else {
            prop_assert_eq!(picked, vec![0]);
        }
    }

    #[test]
    fn sample_norm_matches_gram_form(seed in any::<u64>(), n in 1usize..=15, m in 20usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = random_dc_set(&mut rng, 3, n);
        let basis = TensorBasis::for_set(OrthoFamily::Legendre, &set);
        let batch = draw_standard(m, Measure::Uniform, 3, &mut rng);
        let gram = assemble(&basis, &batch, &vec![Vec::new(); m], 0).gram;
        let delta = gram_deviation(&gram);
        let c: Vec<f64> = (0..set.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sample_norm: f64 = batch
            .points
            .iter()
            .map(|y| basis.eval(y).iter().zip(&c).map(|(p, ci)| p * ci).sum::<f64>().powi(2))
            .sum::<f64>()
            / m as f64;
        let cv = nalgebra::DVector::from_column_slice(&c);
        let quad = (cv.transpose() * &gram * &cv)[(0, 0)];
        let exact: f64 = c.iter().map(|x| x * x).sum();
        prop_assert!((sample_norm - quad).abs() <= 1e-10 * (1.0 + quad));
        prop_assert!(quad >= (1.0 - delta) * exact - 1e-10);
        prop_assert!(quad <= (1.0 + delta) * exact + 1e-10);
    }

    #[test]
    fn optimal_weights_balance_kn(seed in any::<u64>(), n in 1usize..=20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = random_dc_set(&mut rng, 3, n);
        for family in [OrthoFamily::Legendre, OrthoFamily::Chebyshev, OrthoFamily::Hermite] {
            let batch = draw_optimal(50, &set, family, 3, &mut rng).unwrap();
            for (y, w) in batch.points.iter().zip(&batch.weights) {
                prop_assert!(*w > 0.0);
                prop_assert!((w * kn(&set, family, y) - set.len() as f64).abs() <= 1e-10 * set.len() as f64);
            }
        }
    }

    #[test]
    fn truncation_never_hurts_inside_the_ball(u in proptest::collection::vec(-1.0f64..1.0, 1..6), shift in proptest::collection::vec(-5.0f64..5.0, 6), tau in 0.1f64..3.0) {
        let norm = VNorm::Euclidean;
        let scale = tau / norm.norm(&u).max(1e-300);
        let u: Vec<f64> = u.iter().map(|x| x * scale.min(1.0)).collect();
        let z: Vec<f64> = u.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let mut t = z.clone();
        truncate(&mut t, tau, &norm);
        let before: Vec<f64> = u.iter().zip(&z).map(|(a, b)| a - b).collect();
        let after: Vec<f64> = u.iter().zip(&t).map(|(a, b)| a - b).collect();
        prop_assert!(norm.norm(&after) <= norm.norm(&before) + 1e-12);
    }

    #[test]
    fn leja_basis_is_cardinal(len in 2usize..=25, rleja in any::<bool>()) {
        let kind = if rleja { SequenceKind::RLeja } else { SequenceKind::default() };
        let seq = PointSequence::with_len(kind, len).unwrap();
        let pts = seq.points();
        for (a, x) in pts.iter().enumerate() {
            prop_assert!(x.abs() <= 1.0);
            for y in &pts[..a] {
                prop_assert!(x != y);
            }
        }
        for k in 0..len {
            for l in 0..=k {
                let v = hierarchical_basis_eval(pts, k, pts[l]);
                let expect = if k == l { 1.0 } else { 0.0 };
                prop_assert!((v - expect).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn adaptive_pl_sets_stay_downward_closed(steps in 1usize..30, freq in 0.5f64..3.0) {
        let u = FnTarget::new(1, move |y: &[f64]| vec![(freq * y[0]).sin() * (1.0 + y[1] * y[1])]).with_params(2);
        let mut g = GreedyInterpolation::new(&u, PlBasis, InterpRule::Conservative, WeightNorm::Lp { p: 2.0 }).unwrap();
        for _ in 0..steps {
            g.step().unwrap();
            prop_assert!(is_downward_closed(g.set().members()));
            prop_assert!(g.set().is_anchored());
        }
        for nu in g.set().iter() {
            for (_, l) in nu.support() {
                prop_assert!(l == TreeIndex::root() || l.parent().is_some());
            }
        }
    }
}
