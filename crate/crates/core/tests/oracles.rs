mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparsepoly::interpolation::lebesgue_bound;
use sparsepoly::leastsquares::{draw_standard, fit, Variant};
use sparsepoly::multiindex::{select_largest_n, BRule, Selection, WeightKind, WeightSequence};
use sparsepoly::quadrature::gauss_legendre;
use sparsepoly::testbed::{apply_stiffness, solve_fd, DiffusionConfig, DiffusionProblem};
use sparsepoly::univariate::{Measure, OrthoFamily, PointSequence, SequenceKind};
use sparsepoly::{FnTarget, HierarchicalInterpolant, IndexSet, MultiIndex, PolyBasis};

use common::random_dc_set;

fn lagrange(nodes: &[f64], i: usize, t: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &x)| (t - x) / (nodes[i] - x))
        .product()
}

/// Orthonormal Legendre on `dt/2` by the three-term recurrence.
fn legendre(k: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if k == 0 {
        return 1.0;
    }
    for j in 1..k {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * t * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1 * (2.0 * k as f64 + 1.0).sqrt()
}

#[test]
fn rectangle_interpolant_is_the_tensor_lagrange_interpolant() {
    let u = FnTarget::new(1, |y: &[f64]| vec![(1.5 * y[0] - y[1]).cos() / (2.0 + y[0] * y[1])]).with_params(2);
    for kind in [SequenceKind::default(), SequenceKind::RLeja] {
        let seq = PointSequence::with_len(kind, 8).unwrap();
        let x = seq.points().to_vec();
        let rect = IndexSet::rectangle(&MultiIndex::from_dense(&[5, 3]));
        let interp = HierarchicalInterpolant::interpolate(&u, &rect, PolyBasis::new(seq)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let y = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let mut want = 0.0;
            for i in 0..=5 {
                for j in 0..=3 {
                    want += (u.eval_point(&[x[i], x[j]]))[0] * lagrange(&x[..6], i, y[0]) * lagrange(&x[..4], j, y[1]);
                }
            }
            let got = interp.evaluate(&y)[0];
            assert!((got - want).abs() < 1e-10, "{kind:?} at {y:?}: {got} vs {want}");
        }
    }
}

trait EvalPoint {
    fn eval_point(&self, y: &[f64]) -> Vec<f64>;
}

impl<T: sparsepoly::Target> EvalPoint for T {
    fn eval_point(&self, y: &[f64]) -> Vec<f64> {
        self.eval(y).unwrap()
    }
}

#[test]
fn univariate_interpolation_is_exact_on_polynomials() {
    for kind in [SequenceKind::default(), SequenceKind::RLeja] {
        let seq = PointSequence::with_len(kind, 21).unwrap();
        for k in 0..=20u32 {
            let set = IndexSet::rectangle(&MultiIndex::from_dense(&[k]));
            let p = FnTarget::new(1, move |y: &[f64]| vec![(0..=k).map(|i| (-0.7f64).powi(i as i32) * y[0].powi(i as i32)).sum()])
                .with_params(1);
            let interp = HierarchicalInterpolant::interpolate(&p, &set, PolyBasis::new(seq.clone())).unwrap();
            for t in [-1.0, -0.37, 0.0, 0.5, 0.91, 1.0] {
                let (got, want) = (interp.evaluate(&[t])[0], p.eval_point(&[t])[0]);
                assert!((got - want).abs() < 1e-9, "{kind:?} k={k} t={t}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn empirical_lebesgue_constant_respects_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let basis = PolyBasis::from_kind(SequenceKind::RLeja).unwrap();
    for trial in 0..10 {
        let set = random_dc_set(&mut rng, 3, 5 + 3 * trial);
        let values: Vec<Vec<f64>> = (0..set.len()).map(|_| vec![if rng.random::<bool>() { 1.0 } else { -1.0 }]).collect();
        let interp = HierarchicalInterpolant::from_values(&set, basis.clone(), values).unwrap();
        let bound = lebesgue_bound(&set, 2);
        for _ in 0..2000 {
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(interp.evaluate(&y)[0].abs() <= bound);
        }
    }
}

#[test]
fn interpolation_error_is_bounded_by_the_taylor_tail() {
    // u(y) = exp(Σ g_j y_j), Taylor coefficients ∏ g_j^k / k!
    let g = [0.9, 0.5, 0.25];
    let u = FnTarget::new(1, move |y: &[f64]| vec![g.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().exp()]).with_params(3);
    let total: f64 = g.iter().map(|v: &f64| v.abs().exp()).product();
    let w = WeightSequence::new(WeightKind::Geometric, BRule::Explicit { values: g.to_vec() }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [5, 15, 40] {
        let set = select_largest_n(&w, n, Selection::Dims(3)).unwrap();
        let inside: f64 = set
            .iter()
            .map(|nu| nu.support().map(|(j, k)| g[j].powi(k as i32) / (1..=k).map(f64::from).product::<f64>()).product::<f64>())
            .sum();
        let tail = total - inside;
        let bound = (1.0 + lebesgue_bound(&set, 1)) * tail;
        let interp = HierarchicalInterpolant::interpolate(&u, &set, PolyBasis::from_kind(SequenceKind::default()).unwrap()).unwrap();
        for _ in 0..2000 {
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let err = (interp.evaluate(&y)[0] - u.eval_point(&y)[0]).abs();
            assert!(err <= bound, "n={n}: {err} > {bound}");
        }
    }
}

#[test]
fn sample_norm_is_unbiased() {
    let set = IndexSet::total_degree(2, 3);
    let c: Vec<f64> = (0..set.len()).map(|i| 1.0 / (1.0 + i as f64)).collect();
    let exact: f64 = c.iter().map(|v| v * v).sum();
    let f = |y: &[f64]| -> f64 {
        set.iter()
            .zip(&c)
            .map(|(nu, ci)| ci * nu.support().map(|(j, k)| legendre(k as usize, y[j])).product::<f64>())
            .sum()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trials = 4000;
    let m = 10;
    let norms: Vec<f64> = (0..trials)
        .map(|_| {
            let batch = draw_standard(m, Measure::Uniform, 2, &mut rng);
            batch.points.iter().map(|y| f(y).powi(2)).sum::<f64>() / m as f64
        })
        .collect();
    let mean = norms.iter().sum::<f64>() / trials as f64;
    let sd = (norms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt();
    let stderr = sd / (trials as f64).sqrt();
    assert!((mean - exact).abs() < 4.0 * stderr, "mean {mean}, exact {exact}, stderr {stderr}");
}

#[test]
fn least_squares_converges_to_the_orthogonal_projection() {
    let set = IndexSet::rectangle(&MultiIndex::from_dense(&[6]));
    let u = |t: f64| (1.3 * t).exp() / (1.5 - t);
    let rule = gauss_legendre(40);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let batch = draw_standard(50_000, Measure::Uniform, 1, &mut rng);
    let values: Vec<Vec<f64>> = batch.points.iter().map(|y| vec![u(y[0])]).collect();
    let model = fit(&values, &batch, &set, OrthoFamily::Legendre, Variant::Plain).unwrap();
    for k in 0..=6u32 {
        let proj = rule.integrate(|t| u(t) * legendre(k as usize, t));
        let got = model.coefficient(&MultiIndex::from_dense(&[k])).unwrap()[0];
        assert!((got - proj).abs() < 5e-3, "k={k}: {got} vs {proj}");
    }
}

#[test]
fn solver_matches_the_constant_coefficient_solution() {
    // −(a u′)′ = 1 with constant a has u = x(1−x)/(2a), reproduced exactly by
    // the three-point stencil
    for a in [0.3, 1.0, 4.0] {
        let n = 64;
        let u = solve_fd(&vec![a; n], &vec![1.0; n - 1]).unwrap();
        for (i, ui) in u.iter().enumerate() {
            let x = (i + 1) as f64 / n as f64;
            assert!((ui - x * (1.0 - x) / (2.0 * a)).abs() < 1e-12);
        }
    }
}

#[test]
fn solver_is_linear_in_the_load_and_solves_the_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 50;
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
    let f: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
    let g: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
    let uf = solve_fd(&a, &f).unwrap();
    let ug = solve_fd(&a, &g).unwrap();
    let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| 2.0 * x - 3.0 * y).collect();
    let umix = solve_fd(&a, &mix).unwrap();
    for i in 0..n - 1 {
        assert!((umix[i] - (2.0 * uf[i] - 3.0 * ug[i])).abs() < 1e-10);
    }
    let back = apply_stiffness(&a, &uf, 1.0 / n as f64);
    for (x, y) in back.iter().zip(&f) {
        assert!((x - y).abs() < 1e-8);
    }
}

#[test]
fn compliance_decreases_as_the_coefficient_grows() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 40;
    let f = vec![1.0; n - 1];
    for _ in 0..50 {
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
        let bigger: Vec<f64> = a.iter().map(|v| v + rng.random_range(0.0..1.0)).collect();
        let c = |coef: &[f64]| solve_fd(coef, &f).unwrap().iter().sum::<f64>();
        assert!(c(&bigger) <= c(&a) + 1e-14);
    }
}

#[test]
fn affine_coefficient_stays_elliptic() {
    let problem = DiffusionProblem::new(DiffusionConfig::affine(2.0, 16)).unwrap();
    let margin = problem.ellipticity_margin();
    assert!(margin > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10_000 {
        let y: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let low = problem.coefficient(&y).into_iter().fold(f64::INFINITY, f64::min);
        assert!(low >= margin - 1e-12, "{low} < {margin}");
    }
}

#[test]
fn readme_example() -> sparsepoly::Result<()> {
    let u = FnTarget::new(1, |y: &[f64]| vec![1.0 / (3.0 + y[0] + 0.5 * y[1])]).with_params(2);
    let w = WeightSequence::new(WeightKind::Geometric, BRule::Explicit { values: vec![0.4, 0.2] })?;
    let set = select_largest_n(&w, 40, Selection::Anchored)?;
    let interp = HierarchicalInterpolant::interpolate(&u, &set, PolyBasis::from_kind(SequenceKind::default())?)?;
    let value = interp.evaluate(&[0.3, -0.7]);
    assert!((value[0] - 1.0 / 2.95).abs() < 1e-5);
    Ok(())
}

