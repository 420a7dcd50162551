//! The subcommands. Each returns its outputs as named text files; `main`
//! decides where they go.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use sparsepoly::adaptive::{AdaptiveLs, AdaptiveLsConfig, Budget, GreedyInterpolation};
use sparsepoly::leastsquares::{
    assemble, draw_optimal, draw_standard, fit, gram_deviation, min_samples, Kn, SampleBatch, SampleScheme,
    TensorBasis,
};
use sparsepoly::multiindex::{is_downward_closed, select_largest_n, Selection};
use sparsepoly::pwlinear::PlBasis;
use sparsepoly::testbed::{ErrorConfig, ErrorReport, Reference};
use sparsepoly::univariate::OrthoFamily;
use sparsepoly::{par, HierarchicalInterpolant, IndexSet, MultiIndex, PolyBasis, Target};

use crate::config::{AdaptMethod, Problem, Sampling, StudyConfig};
use crate::error::CliError;
use crate::output::{jsonl, Cell, RunInfo, Table};

pub struct Outputs {
    pub files: Vec<(String, String)>,
    /// Short human-readable lines for stderr.
    pub summary: Vec<String>,
}

const CONVERGENCE: [&str; 5] = ["n", "m", "evaluations", "error_linf", "error_l2"];

/// Stream id of the error-estimation points, away from sample streams.
const ERROR_SEED_SALT: u64 = 0x5eed_e770;

fn budget(config: &StudyConfig) -> Budget {
    Budget {
        max_iterations: config.budget.iterations,
        max_evaluations: config.budget.evaluations,
        max_set_size: config.budget.set_size,
    }
}

fn reference(config: &StudyConfig, problem: &Problem) -> Result<Reference, CliError> {
    let ec = ErrorConfig {
        probes: config.error.probes,
        mc: config.error.mc,
        seed: config.seed ^ ERROR_SEED_SALT,
        measure: problem.measure(),
        d: problem.d(),
    };
    Ok(Reference::new(problem, ec)?)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn convergence_table(timings: bool) -> Table {
    let mut cols = CONVERGENCE.to_vec();
    if timings {
        cols.push("seconds");
    }
    Table::new(&cols)
}

fn convergence_row(table: &mut Table, n: usize, m: usize, evaluations: usize, e: &ErrorReport, seconds: Option<f64>) {
    let mut row = vec![Cell::Int(n), Cell::Int(m), Cell::Int(evaluations), Cell::Float(e.linf), Cell::Float(e.l2)];
    if table.columns.contains(&"seconds") {
        row.push(Cell::Float(seconds.unwrap_or(0.0)));
    }
    table.push(row);
}

fn finish_convergence(info: &RunInfo, mut table: Table, summary: &mut Vec<String>) -> Result<String, CliError> {
    table.add_slopes(&["error_linf", "error_l2"]);
    summary.extend(table.footer.iter().cloned());
    Ok(table.render(&info.csv_preamble()?))
}

fn check_set(set: &IndexSet, selection: Selection) -> Result<(), CliError> {
    if !is_downward_closed(set.members()) {
        return Err(CliError::Numerical("selected set is not downward closed".into()));
    }
    if selection == Selection::Anchored && !set.is_anchored() {
        return Err(CliError::Numerical("selected set is not anchored".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct SetRecord<'a> {
    n: usize,
    cardinality: usize,
    active_dim: usize,
    set: &'a IndexSet,
}

pub fn build_set(config: &StudyConfig) -> Result<Outputs, CliError> {
    let info = RunInfo::new("build-set", config)?;
    let problem = Problem::new(&config.problem)?;
    let w = &config.weights_for(problem.d())?;
    let selection = config.selection.resolve_for(problem.d());
    let ns = config.require_n()?;
    let largest = select_largest_n(w, *ns.last().unwrap(), selection)?;
    check_set(&largest, selection)?;
    let sets: Vec<IndexSet> = ns.iter().map(|&n| largest.prefix(n)).collect();
    let records: Vec<SetRecord> = ns
        .iter()
        .zip(&sets)
        .map(|(&n, s)| SetRecord { n, cardinality: s.len(), active_dim: s.active_dim(), set: s })
        .collect();
    let summary = records.iter().map(|r| format!("n={} #set={} j={}", r.n, r.cardinality, r.active_dim)).collect();
    let body = serde_json::to_string_pretty(&serde_json::json!({ "run": info, "sets": records }))?;
    Ok(Outputs { files: vec![("sets.json".into(), body + "\n")], summary })
}

pub fn interpolate(config: &StudyConfig, timings: bool) -> Result<Outputs, CliError> {
    let info = RunInfo::new("interpolate", config)?;
    let problem = Problem::new(&config.problem)?;
    problem.require_bounded("interpolation")?;
    let w = &config.weights_for(problem.d())?;
    let selection = config.selection.resolve_for(problem.d());
    let ns = config.require_n()?;
    let nmax = *ns.last().unwrap();
    if nmax > config.budget.evaluations {
        return Err(CliError::Budget(format!("{nmax} evaluations needed, budget {}", config.budget.evaluations)));
    }
    let set = select_largest_n(w, nmax, selection)?;
    check_set(&set, selection)?;
    let basis = PolyBasis::from_kind(config.interp.points)?;
    let start = Instant::now();
    let full = HierarchicalInterpolant::interpolate(&problem, &set, basis.clone())?;
    let build = start.elapsed().as_secs_f64();
    let truth = reference(config, &problem)?;
    let norm = problem.norm();
    let mut table = convergence_table(timings);
    for &n in ns {
        let start = Instant::now();
        let prefix = set.prefix(n);
        let values = prefix.iter().map(|nu| full.sample(nu).unwrap().to_vec()).collect();
        let interp = HierarchicalInterpolant::from_values(&prefix, basis.clone(), values)?;
        let seconds = start.elapsed().as_secs_f64() + build * n as f64 / nmax as f64;
        convergence_row(&mut table, n, n, n, &truth.measure(&interp, &norm), Some(seconds));
    }
    let mut summary = Vec::new();
    let csv = finish_convergence(&info, table, &mut summary)?;
    Ok(Outputs { files: vec![("convergence.csv".into(), csv)], summary })
}

fn resolve_family(problem: &Problem, family: Option<OrthoFamily>) -> Result<OrthoFamily, CliError> {
    let family = family.unwrap_or_else(|| problem.default_family());
    if family.measure() != problem.measure() {
        return Err(CliError::Config(format!(
            "family {family:?} is orthogonal for {:?} but the problem draws from {:?}",
            family.measure(),
            problem.measure()
        )));
    }
    Ok(family)
}

fn evaluate_batch(problem: &Problem, batch: &SampleBatch) -> Result<Vec<Vec<f64>>, CliError> {
    par::try_map_slice(&batch.points, |y| problem.eval(y)).map_err(CliError::Numerical)
}

pub fn lsq(config: &StudyConfig, timings: bool) -> Result<Outputs, CliError> {
    let info = RunInfo::new("lsq", config)?;
    let problem = Problem::new(&config.problem)?;
    let opts = &config.lsq;
    let family = resolve_family(&problem, opts.family)?;
    let w = &config.weights_for(problem.d())?;
    let selection = config.selection.resolve_for(problem.d());
    let ns = config.require_n()?;
    if !opts.m.is_empty() && opts.m.len() != ns.len() {
        return Err(CliError::Config(format!("lsq.m has {} entries for {} set sizes", opts.m.len(), ns.len())));
    }
    if !(opts.r > 0.0) {
        return Err(CliError::Config("lsq.r must be positive".into()));
    }
    let largest = select_largest_n(w, *ns.last().unwrap(), selection)?;
    check_set(&largest, selection)?;
    let sets: Vec<IndexSet> = ns.iter().map(|&n| largest.prefix(n)).collect();
    let ms = sets
        .iter()
        .enumerate()
        .map(|(i, set)| match opts.m.get(i) {
            Some(&m) => Ok(m),
            None => Ok(match opts.sampling {
                Sampling::Weighted => min_samples(set.len(), opts.r, SampleScheme::WeightedOptimal),
                Sampling::Standard => {
                    let kn = Kn(set, family).map_err(|e| {
                        CliError::Config(format!("{e}; give lsq.m explicitly for this family"))
                    })?;
                    min_samples(set.len(), opts.r, SampleScheme::Standard { kn })
                }
            }),
        })
        .collect::<Result<Vec<usize>, CliError>>()?;
    let total: usize = ms.iter().sum();
    if total > config.budget.evaluations {
        return Err(CliError::Budget(format!("{total} evaluations needed, budget {}", config.budget.evaluations)));
    }
    let truth = reference(config, &problem)?;
    let norm = problem.norm();
    let d = problem.d();
    let mut table = convergence_table(timings);
    let mut spent = 0;
    for (i, (set, &m)) in sets.iter().zip(&ms).enumerate() {
        let start = Instant::now();
        let mut rng = rng_for(config.seed, i as u64 + 1);
        let batch = match opts.sampling {
            Sampling::Standard => draw_standard(m, family.measure(), d, &mut rng),
            Sampling::Weighted => draw_optimal(m, set, family, d, &mut rng)?,
        };
        let values = evaluate_batch(&problem, &batch)?;
        spent += m;
        let model = fit(&values, &batch, set, family, opts.variant)?.with_norm(norm.clone());
        let seconds = start.elapsed().as_secs_f64();
        convergence_row(&mut table, set.len(), m, spent, &truth.measure(&model, &norm), Some(seconds));
    }
    let mut summary = Vec::new();
    let csv = finish_convergence(&info, table, &mut summary)?;
    Ok(Outputs { files: vec![("convergence.csv".into(), csv)], summary })
}

pub fn adapt(config: &StudyConfig, timings: bool) -> Result<Outputs, CliError> {
    let info = RunInfo::new("adapt", config)?;
    let problem = Problem::new(&config.problem)?;
    let opts = &config.adapt;
    let ns = config.require_n()?;
    let truth = reference(config, &problem)?;
    let norm = problem.norm();
    let mut table = convergence_table(timings);
    let mut last = 0;
    let start = Instant::now();
    let log = match opts.method {
        AdaptMethod::Interp => {
            problem.require_bounded("adaptive interpolation")?;
            let basis = PolyBasis::from_kind(config.interp.points)?;
            let mut g =
                GreedyInterpolation::new(&problem, basis, opts.rule, opts.weight_norm)?.with_norm(norm.clone());
            if let Some(f) = opts.bulk {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(CliError::Config("adapt.bulk must lie in (0, 1]".into()));
                }
                g = g.with_bulk(f);
            }
            let budget = budget(config);
            for &n in ns {
                g.run_to(n, &budget)?;
                let size = g.set().len();
                if size > last {
                    let e = truth.measure(g.interpolant(), &norm);
                    convergence_row(&mut table, size, g.evaluations(), g.evaluations(), &e, Some(start.elapsed().as_secs_f64()));
                    last = size;
                }
            }
            jsonl(&info, g.history())?
        }
        AdaptMethod::Ls => {
            let family = resolve_family(&problem, opts.family)?;
            let mut lc = AdaptiveLsConfig::new(family, opts.alpha1, opts.alpha2, config.seed);
            lc.r = opts.r;
            lc.s = opts.s;
            lc.growth = opts.growth;
            lc.budget = budget(config);
            let mut a = AdaptiveLs::new(&problem, lc)?.with_norm(norm.clone());
            for &n in ns {
                a.run_to(n)?;
                let size = a.set().len();
                if size > last {
                    let e = truth.measure(&a.current()?, &norm);
                    convergence_row(&mut table, size, a.m(), a.evaluations(), &e, Some(start.elapsed().as_secs_f64()));
                    last = size;
                }
            }
            jsonl(&info, a.history())?
        }
    };
    let mut summary = Vec::new();
    let csv = finish_convergence(&info, table, &mut summary)?;
    Ok(Outputs { files: vec![("convergence.csv".into(), csv), ("log.jsonl".into(), log)], summary })
}

pub fn pl(config: &StudyConfig, timings: bool) -> Result<Outputs, CliError> {
    let info = RunInfo::new("pl", config)?;
    let problem = Problem::new(&config.problem)?;
    problem.require_bounded("piecewise-linear interpolation")?;
    let opts = &config.pl;
    let truth = reference(config, &problem)?;
    let norm = problem.norm();
    let mut g = GreedyInterpolation::new(&problem, PlBasis, opts.rule, opts.weight_norm)?.with_norm(norm.clone());
    let budget = budget(config);
    let mut table = convergence_table(timings);
    let start = Instant::now();
    let e = truth.measure(g.interpolant(), &norm);
    convergence_row(&mut table, 1, g.evaluations(), g.evaluations(), &e, Some(0.0));
    let mut k = 0;
    while k < opts.steps {
        k = (k + opts.checkpoint).min(opts.steps);
        g.run_to(1 + k, &budget)?;
        let e = truth.measure(g.interpolant(), &norm);
        convergence_row(&mut table, g.set().len(), g.evaluations(), g.evaluations(), &e, Some(start.elapsed().as_secs_f64()));
    }
    let log = jsonl(&info, g.history())?;
    let mut summary = Vec::new();
    let csv = finish_convergence(&info, table, &mut summary)?;
    Ok(Outputs { files: vec![("convergence.csv".into(), csv), ("log.jsonl".into(), log)], summary })
}

/// Number of `trials` independent Gram matrices with `‖G − I‖₂ > 1/2`.
#[allow(clippy::too_many_arguments)]
fn gram_failures(set: &IndexSet, family: OrthoFamily, weighted: bool, m: usize, d: usize, seed: u64, stream: u64, trials: usize) -> Result<usize, CliError> {
    let basis = TensorBasis::for_set(family, set);
    let empty = vec![Vec::new(); m];
    let outcomes = par::map_range(trials, |t| -> Result<bool, sparsepoly::Error> {
        let mut rng = rng_for(seed, (stream << 24) | t as u64);
        let batch = if weighted {
            draw_optimal(m, set, family, d, &mut rng)?
        } else {
            draw_standard(m, family.measure(), d, &mut rng)
        };
        Ok(gram_deviation(&assemble(&basis, &batch, &empty, 0).gram) > 0.5)
    });
    let mut failures = 0;
    for o in outcomes {
        failures += o? as usize;
    }
    Ok(failures)
}

pub fn phase(config: &StudyConfig) -> Result<Outputs, CliError> {
    let info = RunInfo::new("phase", config)?;
    let opts = &config.phase;
    if !(opts.r > 0.0) {
        return Err(CliError::Config("phase.r must be positive".into()));
    }
    if opts.trials >= 1 << 24 {
        return Err(CliError::Config("phase.trials must be below 2^24".into()));
    }
    let family = opts.family;
    let sets: Vec<IndexSet> = if opts.rectangles.is_empty() {
        let w = config.weights()?;
        let selection = config.selection.resolve();
        let ns = config.require_n()?;
        let largest = select_largest_n(w, *ns.last().unwrap(), selection)?;
        ns.iter().map(|&n| largest.prefix(n)).collect()
    } else {
        opts.rectangles.iter().map(|nu| IndexSet::rectangle(&MultiIndex::from_dense(nu))).collect()
    };
    let mut arms = vec![("standard", false)];
    if family.is_orthonormal() {
        arms.push(("weighted", true));
    }
    let mut table = Table::new(&["n", "m", "sampling", "trials", "failures", "probability", "bound"]);
    let mut stream = 0u64;
    for set in &sets {
        let n = set.len();
        let d = set.active_dim().max(1);
        for &(label, weighted) in &arms {
            let ms = if opts.m.is_empty() {
                let scheme = if weighted {
                    SampleScheme::WeightedOptimal
                } else {
                    SampleScheme::Standard {
                        kn: Kn(set, family).map_err(|e| CliError::Config(format!("{e}; give phase.m explicitly")))?,
                    }
                };
                vec![min_samples(n, opts.r, scheme)]
            } else {
                opts.m.clone()
            };
            for m in ms {
                stream += 1;
                let failures = gram_failures(set, family, weighted, m, d, config.seed, stream, opts.trials)?;
                table.push(vec![
                    Cell::Int(n),
                    Cell::Int(m),
                    Cell::Text(label.into()),
                    Cell::Int(opts.trials),
                    Cell::Int(failures),
                    Cell::Float(failures as f64 / opts.trials as f64),
                    Cell::Float((2.0 * (m as f64).powf(-opts.r)).min(1.0)),
                ]);
            }
        }
    }
    let summary = vec![format!("{} rows", table.rows.len())];
    Ok(Outputs { files: vec![("phase.csv".into(), table.render(&info.csv_preamble()?))], summary })
}
