//! Simulation studies: quality measures for one simulated field and the
//! coverage of credible contour regions.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmrf::{build_matern_precision, condition_on_observations, sample_field, ObservationSet, PrecisionModel};
use crate::interp::{InterpMethod, InterpolatedField};
use crate::levels::{assign_level_sets, pretty_levels_with_spacing, standard_levels, ContourLevelSet};
use crate::matern::MaternSpec;
use crate::measures::{contour_function, quality_report, QualityReport};
use crate::mesh::Triangulation;
use crate::rng::{derive_seed, stream_rng};

/// Linear interpolation of vertex values at `p`.
pub fn field_at(mesh: &Triangulation, values: &[f64], p: [f64; 2]) -> Result<f64> {
    let (t, w) = mesh.locate(p).ok_or(Error::OutsideMesh { x: p[0], y: p[1] })?;
    let tri = mesh.triangles()[t];
    Ok(w[0] * values[tri[0]] + w[1] * values[tri[1]] + w[2] * values[tri[2]])
}

/// `count` uniform locations in `[0, side]^2` observing `truth` with noise.
pub fn observe(mesh: &Triangulation, truth: &[f64], side: f64, count: usize, noise_variance: f64, seed: u64) -> Result<ObservationSet> {
    let mut rng = stream_rng(seed, 0);
    let sd = noise_variance.sqrt();
    let mut locations = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let p = [rng.random::<f64>() * side, rng.random::<f64>() * side];
        let e: f64 = StandardNormal.sample(&mut rng);
        values.push(field_at(mesh, truth, p)? + sd * e);
        locations.push(p);
    }
    ObservationSet::new(locations, values, noise_variance)
}

/// Outcome of the mesh resolution rule of thumb.
#[derive(Debug, Clone, Serialize)]
pub struct ResolutionAdvice {
    pub longest_edge: f64,
    pub range: f64,
    pub ratio: f64,
    /// Largest acceptable edge/range ratio: 1/10 for nu = 1, 1/2 for nu = 2.
    pub limit: f64,
    pub adequate: bool,
}

pub fn resolution_advice(spec: &MaternSpec, longest_edge: f64) -> ResolutionAdvice {
    let range = spec.range();
    let limit = if spec.nu == 1 { 0.1 } else { 0.5 };
    let ratio = longest_edge / range;
    ResolutionAdvice { longest_edge, range, ratio, limit, adequate: ratio <= limit }
}

pub fn check_mesh_resolution(spec: &MaternSpec, mesh: &Triangulation) -> ResolutionAdvice {
    resolution_advice(spec, mesh.longest_edge())
}

/// Settings for [`run_measure_table`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureTableConfig {
    /// Lattice nodes per side.
    pub nodes: usize,
    pub side: f64,
    pub spec: MaternSpec,
    pub noise_variance: f64,
    pub observations: usize,
    pub standard_k: Vec<usize>,
    pub pretty_spacings: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for MeasureTableConfig {
    fn default() -> Self {
        Self {
            nodes: 30,
            side: 10.0,
            spec: MaternSpec { nu: 1, kappa: 1.0, phi2: 1.0 },
            noise_variance: 1e-6,
            observations: 500,
            standard_k: vec![1, 2, 3, 4],
            pretty_spacings: vec![2.0, 1.0, 0.5, 0.2],
            samples: crate::prob::DEFAULT_SAMPLES,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureRow {
    pub strategy: String,
    pub report: QualityReport,
}

/// One simulated field, its posterior and the quality of each contour map.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureTable {
    pub config: MeasureTableConfig,
    pub rows: Vec<MeasureRow>,
    #[serde(skip)]
    pub mesh: Triangulation,
    #[serde(skip)]
    pub truth: Vec<f64>,
    #[serde(skip)]
    pub posterior: PrecisionModel,
}

impl MeasureTable {
    /// Plain-text table: one row per map with K, spacing and the measures.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<10}{:>4}{:>10}{:>9}{:>9}{:>9}\n", "strategy", "K", "spacing", "P0", "P1", "P2");
        for row in &self.rows {
            let r = &row.report;
            out.push_str(&format!("{:<10}{:>4}{:>10.3}{:>9.3}{:>9.3}{:>9.3}\n", row.strategy, r.k, r.spacing, r.p0, r.p1, r.p2));
        }
        out
    }
}

/// Simulates a field on a lattice, observes it at random locations,
/// conditions, and reports all measures for Standard maps with each `K` and
/// Pretty maps with each spacing.
pub fn run_measure_table(config: &MeasureTableConfig) -> Result<MeasureTable> {
    let mesh = Triangulation::square_lattice(config.nodes, config.side)?;
    let prior = build_matern_precision(&mesh, &config.spec)?;
    let truth = sample_field(&prior, derive_seed(config.seed, 1), 1).pop().expect("one realization");
    let obs = observe(&mesh, &truth, config.side, config.observations, config.noise_variance, derive_seed(config.seed, 2))?;
    let posterior = condition_on_observations(&prior, &obs, &mesh)?;
    let f = posterior.mean().to_vec();
    let weights = mesh.vertex_areas().to_vec();
    let mut rows = Vec::new();
    for &k in &config.standard_k {
        let levels = standard_levels(&f, k)?;
        rows.push(MeasureRow { strategy: "standard".into(), report: quality_report(&posterior, &f, &levels, &weights, config.samples, config.seed)? });
    }
    for &h in &config.pretty_spacings {
        let levels = pretty_levels_with_spacing(&f, h)?;
        rows.push(MeasureRow { strategy: "pretty".into(), report: quality_report(&posterior, &f, &levels, &weights, config.samples, config.seed)? });
    }
    Ok(MeasureTable { config: config.clone(), rows, mesh, truth, posterior })
}

/// Settings for [`run_coverage_study`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageConfig {
    pub side: f64,
    /// Model lattice nodes per side.
    pub model_nodes: usize,
    /// Truth lattice nodes per side; equal to `model_nodes` for matching
    /// resolution.
    pub truth_nodes: usize,
    pub nu: u32,
    pub range: f64,
    pub observations: usize,
    /// Field variance divided by noise variance.
    pub variance_ratio: f64,
    pub fields: usize,
    pub repeats: usize,
    pub target: f64,
    pub methods: Vec<InterpMethod>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            side: 10.0,
            model_nodes: 20,
            truth_nodes: 20,
            nu: 1,
            range: 3.0,
            observations: 500,
            variance_ratio: 9.0,
            fields: 5,
            repeats: 10,
            target: 0.9,
            methods: InterpMethod::ALL.to_vec(),
            samples: crate::prob::DEFAULT_SAMPLES,
            seed: 1,
        }
    }
}

impl CoverageConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.model_nodes < 2 || self.truth_nodes < 2 {
            return bad("lattices need at least 2 nodes per side");
        }
        if self.fields == 0 || self.repeats == 0 || self.samples == 0 {
            return bad("field, repeat and sample counts must be positive");
        }
        if !(self.side > 0.0 && self.range > 0.0 && self.range < self.side) {
            return bad("need 0 < range < side");
        }
        if !(self.variance_ratio > 0.0) {
            return bad("variance ratio must be positive");
        }
        if !(self.target > 0.0 && self.target <= 1.0) {
            return bad("target must lie in (0, 1]");
        }
        MaternSpec::from_range(self.nu, self.range, 1.0)?;
        Ok(())
    }

    pub fn replicates(&self) -> usize {
        self.fields * self.repeats
    }
}

/// Coverage of one scoring method.
#[derive(Debug, Clone, Serialize)]
pub struct MethodCoverage {
    /// `step`, `linear`, `log` or `pointwise`.
    pub method: String,
    pub successes: usize,
    pub coverage: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicateOutcome {
    pub field: usize,
    pub repeat: usize,
    pub crossings: usize,
    /// Success flags in the order of `CoverageResult::methods`.
    pub success: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageResult {
    pub config: CoverageConfig,
    pub replicates: usize,
    pub noise_variance: f64,
    pub methods: Vec<MethodCoverage>,
    pub scoring: String,
    pub outcomes: Vec<ReplicateOutcome>,
}

impl CoverageResult {
    pub fn coverage(&self, method: &str) -> Option<&MethodCoverage> {
        self.methods.iter().find(|m| m.method == method)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:<10}{:>10}{:>10}\n", "method", "coverage", "s.e.");
        for m in &self.methods {
            out.push_str(&format!("{:<10}{:>10.3}{:>10.3}\n", m.method, m.coverage, m.std_error));
        }
        out
    }
}

const SCORING: &str = "continuous methods: a replicate fails if any exact zero crossing of the piecewise-linear truth on a truth-mesh edge lies in the closed contour-avoiding set of an unpruned model triangle; pointwise: fails if any model node in the discrete avoiding set has truth (interpolated at the node) on the other side of the level";

/// Zero crossings of a piecewise-linear field along mesh edges.
pub fn level_crossings(mesh: &Triangulation, values: &[f64], level: f64) -> Vec<[f64; 2]> {
    mesh.edges()
        .into_iter()
        .filter_map(|(a, b)| {
            let (va, vb) = (values[a] - level, values[b] - level);
            if (va > 0.0) == (vb > 0.0) {
                return None;
            }
            let s = va / (va - vb);
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            Some([pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])])
        })
        .collect()
}

/// Coverage of the credible contour regions for the single level 0:
/// simulate a truth, observe it, condition the model lattice, compute the
/// contour map function and check that the true contour avoids the
/// contour-avoiding set at the target probability.
pub fn run_coverage_study(config: &CoverageConfig) -> Result<CoverageResult> {
    config.validate()?;
    let spec = MaternSpec::from_range(config.nu, config.range, 1.0)?;
    let noise_variance = spec.marginal_variance() / config.variance_ratio;
    let model_mesh = Triangulation::square_lattice(config.model_nodes, config.side)?;
    let prior = build_matern_precision(&model_mesh, &spec)?;
    let truth_mesh = if config.truth_nodes == config.model_nodes { model_mesh.clone() } else { Triangulation::square_lattice(config.truth_nodes, config.side)? };
    let truth_prior = if config.truth_nodes == config.model_nodes { prior.clone() } else { build_matern_precision(&truth_mesh, &spec)? };

    let mut outcomes = Vec::with_capacity(config.replicates());
    for field in 0..config.fields {
        let field_seed = derive_seed(config.seed, field as u64);
        let truth = sample_field(&truth_prior, field_seed, 1).pop().expect("one realization");
        let crossings = level_crossings(&truth_mesh, &truth, 0.0);
        let truth_at_nodes: Vec<f64> = if config.truth_nodes == config.model_nodes {
            truth.clone()
        } else {
            model_mesh.vertices().iter().map(|&p| field_at(&truth_mesh, &truth, p)).collect::<Result<_>>()?
        };
        let per_repeat: Vec<ReplicateOutcome> = (0..config.repeats)
            .into_par_iter()
            .map(|repeat| {
                let rep_seed = derive_seed(field_seed, 1000 + repeat as u64);
                let obs = observe(&truth_mesh, &truth, config.side, config.observations, noise_variance, rep_seed)?;
                let posterior = condition_on_observations(&prior, &obs, &model_mesh)?;
                let success = score_replicate(config, &model_mesh, &posterior, &crossings, &truth_at_nodes, rep_seed)?;
                Ok(ReplicateOutcome { field, repeat, crossings: crossings.len(), success })
            })
            .collect::<Result<_>>()?;
        outcomes.extend(per_repeat);
    }

    let mut names: Vec<String> = config.methods.iter().map(|m| m.name().to_string()).collect();
    names.push("pointwise".into());
    let r = outcomes.len() as f64;
    let methods = names
        .into_iter()
        .enumerate()
        .map(|(j, method)| {
            let successes = outcomes.iter().filter(|o| o.success[j]).count();
            let coverage = successes as f64 / r;
            MethodCoverage { method, successes, coverage, std_error: (coverage * (1.0 - coverage) / r).sqrt() }
        })
        .collect();
    Ok(CoverageResult { config: config.clone(), replicates: outcomes.len(), noise_variance, methods, scoring: SCORING.into(), outcomes })
}

fn score_replicate(
    config: &CoverageConfig,
    mesh: &Triangulation,
    posterior: &PrecisionModel,
    crossings: &[[f64; 2]],
    truth_at_nodes: &[f64],
    seed: u64,
) -> Result<Vec<bool>> {
    let f = posterior.mean();
    let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let levels = ContourLevelSet::new(vec![0.0], (hi - lo).max(f64::MIN_POSITIVE))?;
    let assignment = assign_level_sets(f, &levels);
    let cf = contour_function(posterior, &assignment, &levels, config.samples, seed)?;
    let mut success = Vec::with_capacity(config.methods.len() + 1);
    for &method in &config.methods {
        let field = InterpolatedField::new(mesh.clone(), cf.values.clone(), method, &assignment)?;
        success.push(!crossings.iter().any(|&p| field.in_excursion(p, config.target)));
    }
    let pointwise_ok = (0..f.len()).all(|i| cf.values[i] < config.target || (truth_at_nodes[i] > 0.0) == (assignment.sets[i] == 1));
    success.push(pointwise_ok);
    Ok(success)
}
