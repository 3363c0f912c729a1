//! Marginal probabilities, quality measures P0/P1/P2, the contour map
//! function and selection of the number of levels.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cholesky::CholeskyFactor;
use crate::error::{Error, Result};
use crate::gmrf::{marginal_variances, PrecisionModel};
use crate::levels::{assign_level_sets, pretty_levels, standard_levels, ContourLevelSet, LevelAssignment, LevelStrategy};
use crate::normal::standard_interval;
use crate::prob::{rectangle_probability, sweep, IntervalBox, ProbEstimate, SweepOptions};

/// Which quality measure drives a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    P0,
    P1,
    P2,
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p0" => Ok(Self::P0),
            "p1" => Ok(Self::P1),
            "p2" => Ok(Self::P2),
            other => Err(Error::InvalidParameter(format!("unknown measure `{other}`"))),
        }
    }
}

fn check_sizes(model: &PrecisionModel, assignment: &LevelAssignment) -> Result<()> {
    if assignment.sets.len() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: assignment.sets.len() });
    }
    Ok(())
}

fn std_devs(model: &PrecisionModel) -> Result<Vec<f64>> {
    Ok(marginal_variances(model)?.std_devs())
}

fn interval_probs(mean: &[f64], sd: &[f64], bounds: &IntervalBox) -> Vec<f64> {
    (0..mean.len())
        .map(|i| {
            let a = (bounds.lower[i] - mean[i]) / sd[i];
            let b = (bounds.upper[i] - mean[i]) / sd[i];
            standard_interval(a, b)
        })
        .collect()
}

/// Box of each node's own band `(u_k, u_{k+1})`.
pub fn own_box(assignment: &LevelAssignment, levels: &ContourLevelSet) -> IntervalBox {
    let lower = assignment.sets.iter().map(|&k| levels.level(k as isize)).collect();
    let upper = assignment.sets.iter().map(|&k| levels.level(k as isize + 1)).collect();
    IntervalBox { lower, upper }
}

/// Box `(u_{k-1}, u_{k+2})` of the P1 measure.
pub fn p1_box(assignment: &LevelAssignment, levels: &ContourLevelSet) -> IntervalBox {
    let lower = assignment.sets.iter().map(|&k| levels.level(k as isize - 1)).collect();
    let upper = assignment.sets.iter().map(|&k| levels.level(k as isize + 2)).collect();
    IntervalBox { lower, upper }
}

/// Box `(u^e_{k-1}, u^e_{k+1})` of the P2 measure.
pub fn p2_box(assignment: &LevelAssignment, levels: &ContourLevelSet) -> IntervalBox {
    let lower = assignment.sets.iter().map(|&k| levels.midpoint(k as isize - 1)).collect();
    let upper = assignment.sets.iter().map(|&k| levels.midpoint(k as isize + 1)).collect();
    IntervalBox { lower, upper }
}

/// Marginal probability that each node stays in its own band.
pub fn marginal_p(model: &PrecisionModel, assignment: &LevelAssignment, levels: &ContourLevelSet) -> Result<Vec<f64>> {
    check_sizes(model, assignment)?;
    Ok(interval_probs(model.mean(), &std_devs(model)?, &own_box(assignment, levels)))
}

/// Per-node bounds `rho1` and `rho2`; their minima bound P1 and P2.
pub fn marginal_bounds(model: &PrecisionModel, assignment: &LevelAssignment, levels: &ContourLevelSet) -> Result<(Vec<f64>, Vec<f64>)> {
    check_sizes(model, assignment)?;
    let sd = std_devs(model)?;
    Ok((interval_probs(model.mean(), &sd, &p1_box(assignment, levels)), interval_probs(model.mean(), &sd, &p2_box(assignment, levels))))
}

pub fn measure_p1(model: &PrecisionModel, assignment: &LevelAssignment, levels: &ContourLevelSet, samples: usize, seed: u64) -> Result<ProbEstimate> {
    check_sizes(model, assignment)?;
    rectangle_probability(model, &p1_box(assignment, levels), samples, seed)
}

pub fn measure_p2(model: &PrecisionModel, assignment: &LevelAssignment, levels: &ContourLevelSet, samples: usize, seed: u64) -> Result<ProbEstimate> {
    check_sizes(model, assignment)?;
    rectangle_probability(model, &p2_box(assignment, levels), samples, seed)
}

/// Node order by marginal probability, descending; ties by node index.
pub fn probability_order(p: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    order
}

/// Factorization whose sequential integration visits nodes in `order`.
/// The sampler works from the last factor position to the first, so the
/// permutation is `order` reversed.
pub fn probability_ordered_factor(model: &PrecisionModel, order: &[usize]) -> Result<CholeskyFactor> {
    CholeskyFactor::with_permutation(model.precision(), order.iter().rev().copied().collect())
}

/// Per-node values of the contour map function.
#[derive(Debug, Clone, Serialize)]
pub struct ContourFunction {
    /// `F_i`.
    pub values: Vec<f64>,
    /// Monte Carlo standard error of each `F_i`.
    pub std_errors: Vec<f64>,
    /// Marginal probabilities `p_i` that define the nesting order.
    pub marginal: Vec<f64>,
    /// Nodes in construction order (decreasing `p`).
    pub order: Vec<usize>,
    pub levels: ContourLevelSet,
    pub assignment: LevelAssignment,
    pub samples: usize,
    pub seed: u64,
}

impl ContourFunction {
    /// Nodes of the discrete contour-avoiding set at credibility `1 - alpha`,
    /// `{i : F_i >= 1 - alpha}`, ascending.
    pub fn avoiding_set(&self, alpha: f64) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] >= 1.0 - alpha).collect()
    }
}

/// Contour map function with P0 by node-area quadrature.
#[derive(Debug, Clone)]
pub struct WeightedContourFunction {
    pub function: ContourFunction,
    pub p0: ProbEstimate,
}

/// `F_i` for every node: nodes enter the active set in decreasing order of
/// `p_i`, and `F` at a node is the joint probability that every active node
/// stays in its own band. One sequential sweep in that order estimates all
/// nested probabilities at once.
pub fn contour_function(model: &PrecisionModel, assignment: &LevelAssignment, levels: &ContourLevelSet, samples: usize, seed: u64) -> Result<ContourFunction> {
    Ok(contour_function_inner(model, assignment, levels, samples, seed, None)?.function)
}

/// As [`contour_function`], also estimating P0 with its standard error
/// from the same samples.
pub fn contour_function_weighted(
    model: &PrecisionModel,
    assignment: &LevelAssignment,
    levels: &ContourLevelSet,
    samples: usize,
    seed: u64,
    weights: &[f64],
) -> Result<WeightedContourFunction> {
    if weights.len() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: weights.len() });
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidParameter("P0 weights must be positive".into()));
    }
    contour_function_inner(model, assignment, levels, samples, seed, Some(weights))
}

fn contour_function_inner(
    model: &PrecisionModel,
    assignment: &LevelAssignment,
    levels: &ContourLevelSet,
    samples: usize,
    seed: u64,
    weights: Option<&[f64]>,
) -> Result<WeightedContourFunction> {
    check_sizes(model, assignment)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let n = model.n();
    let own = own_box(assignment, levels);
    let marginal = interval_probs(model.mean(), &std_devs(model)?, &own);
    let order = probability_order(&marginal);
    let factor = probability_ordered_factor(model, &order)?;
    let total_weight: f64 = weights.map(|w| w.iter().sum()).unwrap_or(1.0);
    let step_weights: Option<Vec<f64>> = weights.map(|w| order.iter().map(|&i| w[i] / total_weight).collect());
    let opts = SweepOptions { track_prefix: true, step_weights: step_weights.as_deref() };
    let out = sweep(&factor, model.mean(), &own, samples, seed, &opts);

    let m = samples as f64;
    let mut values = vec![0.0; n];
    let mut std_errors = vec![0.0; n];
    let mut running = 1.0f64;
    for (t, &node) in order.iter().enumerate() {
        let mean = out.prefix_sum[t] / m;
        running = running.min(mean).clamp(0.0, 1.0);
        values[node] = running;
        let var = if samples > 1 { ((out.prefix_sumsq[t] - m * mean * mean) / (m - 1.0)).max(0.0) } else { 0.0 };
        std_errors[node] = (var / m).sqrt();
    }
    let p0 = match weights {
        Some(w) => {
            let est = measure_p0_values(&values, w);
            let se = ProbEstimate::from_sums(out.weighted_sum, out.weighted_sumsq, samples, seed).std_error;
            ProbEstimate { estimate: est, std_error: se, samples, seed, empty: est == 0.0 }
        }
        None => ProbEstimate { estimate: f64::NAN, std_error: f64::NAN, samples, seed, empty: false },
    };
    let function = ContourFunction { values, std_errors, marginal, order, levels: levels.clone(), assignment: assignment.clone(), samples, seed };
    Ok(WeightedContourFunction { function, p0 })
}

fn measure_p0_values(values: &[f64], weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    values.iter().zip(weights).map(|(f, w)| f * w).sum::<f64>() / total
}

/// `P0 = sum_i w_i F_i / sum_i w_i`.
pub fn measure_p0(function: &ContourFunction, weights: &[f64]) -> Result<f64> {
    if weights.len() != function.values.len() {
        return Err(Error::DimensionMismatch { expected: function.values.len(), found: weights.len() });
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidParameter("P0 weights must be positive".into()));
    }
    Ok(measure_p0_values(&function.values, weights))
}

/// Quality of one contour map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    #[serde(rename = "K")]
    pub k: usize,
    pub spacing: f64,
    pub levels: Vec<f64>,
    #[serde(rename = "P0")]
    pub p0: f64,
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    #[serde(rename = "se_P0")]
    pub se_p0: f64,
    #[serde(rename = "se_P1")]
    pub se_p1: f64,
    #[serde(rename = "se_P2")]
    pub se_p2: f64,
    pub bound_rho1: f64,
    pub bound_rho2: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl QualityReport {
    pub fn measure(&self, m: Measure) -> (f64, f64) {
        match m {
            Measure::P0 => (self.p0, self.se_p0),
            Measure::P1 => (self.p1, self.se_p1),
            Measure::P2 => (self.p2, self.se_p2),
        }
    }
}

/// All three measures and both bounds for the map of `f` at `levels`.
pub fn quality_report(model: &PrecisionModel, f: &[f64], levels: &ContourLevelSet, weights: &[f64], samples: usize, seed: u64) -> Result<QualityReport> {
    let start = Instant::now();
    let assignment = assign_level_sets(f, levels);
    let (rho1, rho2) = marginal_bounds(model, &assignment, levels)?;
    let p1 = measure_p1(model, &assignment, levels, samples, seed)?;
    let p2 = measure_p2(model, &assignment, levels, samples, seed)?;
    let cf = contour_function_weighted(model, &assignment, levels, samples, seed, weights)?;
    Ok(QualityReport {
        k: levels.k(),
        spacing: levels.spacing(),
        levels: levels.levels().to_vec(),
        p0: cf.p0.estimate,
        p1: p1.estimate,
        p2: p2.estimate,
        se_p0: cf.p0.std_error,
        se_p1: p1.std_error,
        se_p2: p2.std_error,
        bound_rho1: min(&rho1),
        bound_rho2: min(&rho2),
        samples,
        seed,
        wall_time: start.elapsed(),
    })
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(1.0, f64::min)
}

/// Levels for `K` under a placement strategy.
pub fn levels_for(f: &[f64], k: usize, strategy: LevelStrategy) -> Result<ContourLevelSet> {
    match strategy {
        LevelStrategy::Standard => standard_levels(f, k),
        LevelStrategy::Pretty => pretty_levels(f, k),
        LevelStrategy::Explicit => Err(Error::InvalidParameter("explicit levels cannot be generated from K".into())),
    }
}

/// One K examined by [`select_k`].
#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    #[serde(rename = "K")]
    pub k: usize,
    pub levels: Vec<f64>,
    /// Marginal upper bound on the measure.
    pub bound: f64,
    pub rejected_by_bound: bool,
    /// Full estimate; present unless rejected by the bound outside audit mode.
    pub estimate: Option<ProbEstimate>,
}

/// Outcome of [`select_k`].
#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    /// Largest K whose measure estimate reaches the target, or 0.
    #[serde(rename = "selected_K")]
    pub k: usize,
    pub measure: Measure,
    pub target: f64,
    /// Full report for the selected map; `None` when `k == 0`.
    pub report: Option<QualityReport>,
    pub levels: Option<ContourLevelSet>,
    /// The selected estimate exceeds the target by at least two standard errors.
    pub conservative: bool,
    pub candidates: Vec<Candidate>,
}

/// Settings for [`select_k`].
#[derive(Debug, Clone)]
pub struct SelectionSettings {
    pub target: f64,
    pub measure: Measure,
    pub strategy: LevelStrategy,
    pub k_max: usize,
    pub samples: usize,
    pub seed: u64,
    /// Compute full estimates even for candidates the bound already rejects.
    pub audit: bool,
}

/// Scans `K = k_max, ..., 1` and returns the largest `K` whose measure
/// estimate is at least `target`. The marginal bound is checked first, and
/// candidates it rules out skip the full integration unless auditing.
pub fn select_k(model: &PrecisionModel, f: &[f64], weights: &[f64], settings: &SelectionSettings) -> Result<Selection> {
    if settings.k_max == 0 {
        return Err(Error::InvalidParameter("K_max must be at least 1".into()));
    }
    if f.len() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: f.len() });
    }
    let sd = std_devs(model)?;
    let mut candidates = Vec::new();
    for k in (1..=settings.k_max).rev() {
        let levels = levels_for(f, k, settings.strategy)?;
        let assignment = assign_level_sets(f, &levels);
        let bound = match settings.measure {
            Measure::P0 => {
                let p = interval_probs(model.mean(), &sd, &own_box(&assignment, &levels));
                measure_p0_values(&p, weights)
            }
            Measure::P1 => min(&interval_probs(model.mean(), &sd, &p1_box(&assignment, &levels))),
            Measure::P2 => min(&interval_probs(model.mean(), &sd, &p2_box(&assignment, &levels))),
        };
        let rejected_by_bound = bound < settings.target;
        let estimate = if rejected_by_bound && !settings.audit {
            None
        } else {
            Some(match settings.measure {
                Measure::P0 => contour_function_weighted(model, &assignment, &levels, settings.samples, settings.seed, weights)?.p0,
                Measure::P1 => measure_p1(model, &assignment, &levels, settings.samples, settings.seed)?,
                Measure::P2 => measure_p2(model, &assignment, &levels, settings.samples, settings.seed)?,
            })
        };
        let accepted = !rejected_by_bound && estimate.is_some_and(|e| e.estimate >= settings.target);
        candidates.push(Candidate { k, levels: levels.levels().to_vec(), bound, rejected_by_bound, estimate });
        if accepted {
            let est = estimate.expect("accepted candidates have an estimate");
            let report = quality_report(model, f, &levels, weights, settings.samples, settings.seed)?;
            return Ok(Selection {
                k,
                measure: settings.measure,
                target: settings.target,
                report: Some(report),
                levels: Some(levels),
                conservative: est.estimate - 2.0 * est.std_error >= settings.target,
                candidates,
            });
        }
    }
    Ok(Selection { k: 0, measure: settings.measure, target: settings.target, report: None, levels: None, conservative: false, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmrf::build_matern_precision;
    use crate::matern::MaternSpec;
    use crate::mesh::Triangulation;
    use crate::normal::cdf;
    use crate::sparse::SparseSymMatrix;

    fn diag(mean: Vec<f64>, q: &[f64]) -> PrecisionModel {
        PrecisionModel::new(mean, SparseSymMatrix::diagonal_matrix(q)).unwrap()
    }

    #[test]
    fn marginal_p_examples() {
        // node on a contour with spacing / sigma = 2
        let levels = ContourLevelSet::new(vec![0.0, 2.0], 4.0).unwrap();
        let m = diag(vec![0.0], &[1.0]);
        let a = LevelAssignment { sets: vec![1], values: vec![0.5], ties: vec![] };
        let p = marginal_p(&m, &a, &levels).unwrap();
        assert!((p[0] - 0.477_249_868_051_820_8).abs() < 1e-15);
        // boundary set k = 0 with mean three sd below u_1
        let m = diag(vec![-3.0], &[1.0]);
        let a = LevelAssignment { sets: vec![0], values: vec![-3.0], ties: vec![] };
        let p = marginal_p(&m, &a, &levels).unwrap();
        assert!((p[0] - cdf(3.0)).abs() < 1e-15);
    }

    #[test]
    fn bounds_ordering_and_k1() {
        let mesh = Triangulation::square_lattice(8, 5.0).unwrap();
        let prior = build_matern_precision(&mesh, &MaternSpec::from_range(1, 2.0, 1.0).unwrap()).unwrap();
        let mean: Vec<f64> = mesh.vertices().iter().map(|v| (v[0] - 2.5) * 0.6 + (v[1] * 0.8).sin()).collect();
        let model = prior.with_mean(mean.clone()).unwrap();
        let l1 = standard_levels(&mean, 1).unwrap();
        let a1 = assign_level_sets(&mean, &l1);
        let (rho1, _) = marginal_bounds(&model, &a1, &l1).unwrap();
        assert!(rho1.iter().all(|&r| r == 1.0));
        let p1 = measure_p1(&model, &a1, &l1, 100, 1).unwrap();
        assert_eq!((p1.estimate, p1.std_error), (1.0, 0.0));

        let l3 = standard_levels(&mean, 3).unwrap();
        let a3 = assign_level_sets(&mean, &l3);
        let (rho1, rho2) = marginal_bounds(&model, &a3, &l3).unwrap();
        let p = marginal_p(&model, &a3, &l3).unwrap();
        for i in 0..mean.len() {
            assert!(rho1[i] >= rho2[i]);
            if a3.sets[i] > 0 && a3.sets[i] < 3 {
                assert!(rho2[i] >= p[i]);
            }
        }
    }

    #[test]
    fn independent_nodes_product_rules() {
        let levels = ContourLevelSet::new(vec![0.0], 2.0).unwrap();
        let a = LevelAssignment { sets: vec![1, 1], values: vec![1.0, 1.0], ties: vec![] };
        // p = (0.9, 0.8): choose means so that P(x > 0) hits those values
        let m = diag(vec![crate::normal::inv_cdf(0.9), crate::normal::inv_cdf(0.8)], &[1.0, 1.0]);
        let cf = contour_function(&m, &a, &levels, 1000, 4).unwrap();
        assert!((cf.values[0] - 0.9).abs() < 1e-12);
        assert!((cf.values[1] - 0.72).abs() < 1e-12);
        assert_eq!(cf.order, vec![0, 1]);
        // P2 for independent nodes is the product of midpoint intervals
        let p2 = measure_p2(&m, &a, &levels, 500, 2).unwrap();
        let box2 = p2_box(&a, &levels);
        let want: f64 = (0..2).map(|i| standard_interval(box2.lower[i] - m.mean()[i], box2.upper[i] - m.mean()[i])).product();
        assert!((p2.estimate - want).abs() < 1e-12);
    }

    #[test]
    fn single_node_function_equals_marginal() {
        let levels = ContourLevelSet::new(vec![0.0], 1.0).unwrap();
        let a = LevelAssignment { sets: vec![1], values: vec![1.0], ties: vec![] };
        let m = diag(vec![crate::normal::inv_cdf(0.8)], &[1.0]);
        let cf = contour_function(&m, &a, &levels, 10, 1).unwrap();
        assert!((cf.values[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn p0_examples() {
        let levels = ContourLevelSet::new(vec![0.0], 1.0).unwrap();
        let mk = |values: Vec<f64>| ContourFunction {
            std_errors: vec![0.0; values.len()],
            marginal: values.clone(),
            order: (0..values.len()).collect(),
            levels: levels.clone(),
            assignment: LevelAssignment { sets: vec![0; values.len()], values: vec![0.0; values.len()], ties: vec![] },
            samples: 1,
            seed: 0,
            values,
        };
        assert_eq!(measure_p0(&mk(vec![1.0; 4]), &[1.0, 2.0, 3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(measure_p0(&mk(vec![0.5; 3]), &[0.1, 7.0, 2.0]).unwrap(), 0.5);
        assert_eq!(measure_p0(&mk(vec![1.0, 0.0]), &[3.0, 1.0]).unwrap(), 0.75);
    }

    fn smooth_model(nodes: usize, seed: u64) -> (Triangulation, PrecisionModel) {
        let mesh = Triangulation::square_lattice(nodes, 5.0).unwrap();
        let prior = build_matern_precision(&mesh, &MaternSpec::from_range(1, 2.5, 0.04).unwrap()).unwrap();
        let phase = seed as f64;
        let mean = mesh.vertices().iter().map(|v| (0.7 * v[0] + phase).sin() + 0.5 * (0.9 * v[1]).cos()).collect();
        (mesh.clone(), prior.with_mean(mean).unwrap())
    }

    #[test]
    fn function_invariants() {
        let (mesh, model) = smooth_model(10, 1);
        let f = model.mean().to_vec();
        let levels = standard_levels(&f, 2).unwrap();
        let a = assign_level_sets(&f, &levels);
        let w = contour_function_weighted(&model, &a, &levels, 2000, 3, mesh.vertex_areas()).unwrap();
        let cf = &w.function;
        for t in 1..cf.order.len() {
            assert!(cf.values[cf.order[t]] <= cf.values[cf.order[t - 1]]);
        }
        for i in 0..f.len() {
            assert!(cf.values[i] <= cf.marginal[i] + 3.0 * cf.std_errors[i] + 1e-12);
            assert!((0.0..=1.0).contains(&cf.values[i]));
        }
        assert_eq!(w.p0.estimate, measure_p0(cf, mesh.vertex_areas()).unwrap());
        assert!(w.p0.std_error > 0.0);
    }

    #[test]
    fn refinement_does_not_increase_p2() {
        let (_, model) = smooth_model(9, 2);
        let f = model.mean().to_vec();
        let base = standard_levels(&f, 3).unwrap();
        let u = base.levels().to_vec();
        let refined = ContourLevelSet::new(vec![u[0], 0.5 * (u[0] + u[1]), u[1], u[2]], 1.0).unwrap();
        let coarse = ContourLevelSet::new(u, 1.0).unwrap();
        let pa = measure_p2(&model, &assign_level_sets(&f, &coarse), &coarse, 4000, 1).unwrap();
        let pb = measure_p2(&model, &assign_level_sets(&f, &refined), &refined, 4000, 1).unwrap();
        assert!(pb.estimate <= pa.estimate + 3.0 * (pa.std_error.powi(2) + pb.std_error.powi(2)).sqrt());
    }

    #[test]
    fn select_k_contracts() {
        let (mesh, model) = smooth_model(8, 3);
        let f = model.mean().to_vec();
        let settings = SelectionSettings { target: 0.0, measure: Measure::P2, strategy: LevelStrategy::Standard, k_max: 4, samples: 500, seed: 1, audit: false };
        let s = select_k(&model, &f, mesh.vertex_areas(), &settings).unwrap();
        assert_eq!(s.k, 4);
        let strict = SelectionSettings { target: 0.999_999, audit: true, ..settings.clone() };
        let s = select_k(&model, &f, mesh.vertex_areas(), &strict).unwrap();
        for c in &s.candidates {
            if c.rejected_by_bound {
                assert!(c.estimate.unwrap().estimate < strict.target);
            }
        }
        if s.k == 0 {
            assert!(s.report.is_none());
        }
    }
}
