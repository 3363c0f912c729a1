//! Command-line front end. Every subcommand writes into `--out` and embeds a
//! [`RunManifest`] in each JSON (and SVG) file it produces.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::export::{contour_map_svg, credible_sets_geojson, field_svg};
use crate::gmrf::{build_matern_precision, condition_on_observations, fmt17, marginal_variances, sample_field, ObservationSet, PrecisionModel};
use crate::interp::{extract_credible_set, InterpMethod, InterpolatedField};
use crate::levels::{assign_level_sets, pretty_levels, standard_levels, ContourLevelSet, LevelStrategy};
use crate::matern::MaternSpec;
use crate::measures::{contour_function_weighted, quality_report, select_k, Measure, SelectionSettings};
use crate::mesh::Triangulation;
use crate::prob::DEFAULT_SAMPLES;
use crate::sim::{check_mesh_resolution, observe, run_coverage_study, CoverageConfig};
use crate::twopoint::{compare_to_oracle, reference_cases, unit_grid};

#[derive(Debug, Parser)]
#[command(name = "contourmap", version, about = "Contour maps, quality measures and credible regions for Gaussian fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a Matérn field on a mesh and write it with its prior model.
    Simulate(SimulateArgs),
    /// Condition a model on observations (kriging).
    Krige(KrigeArgs),
    /// Compute contour levels and level-set membership for a point estimate.
    Levels(LevelsArgs),
    /// Quality measures P0/P1/P2 for a contour map, or selection of K.
    Measures(MeasuresArgs),
    /// Contour map function and credible contour-avoiding sets.
    Cmfunction(CmfunctionArgs),
    /// Coverage study of credible contour regions.
    Coverage(CoverageArgs),
    /// Compare interpolations with the exact two-point contour map function.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Standard,
    Pretty,
}

impl From<StrategyArg> for LevelStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Standard => LevelStrategy::Standard,
            StrategyArg::Pretty => LevelStrategy::Pretty,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureArg {
    P0,
    P1,
    P2,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::P0 => Measure::P0,
            MeasureArg::P1 => Measure::P1,
            MeasureArg::P2 => Measure::P2,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Step,
    Linear,
    Log,
}

impl From<MethodArg> for InterpMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Step => InterpMethod::Step,
            MethodArg::Linear => InterpMethod::Linear,
            MethodArg::Log => InterpMethod::Log,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Mesh JSON. Required unless --lattice is given.
    #[arg(long, required_unless_present = "lattice")]
    pub mesh: Option<PathBuf>,
    /// Build an N x N lattice mesh instead of reading one.
    #[arg(long, conflicts_with = "mesh")]
    pub lattice: Option<usize>,
    /// Side length of the --lattice square.
    #[arg(long, default_value_t = 10.0)]
    pub side: f64,
    #[arg(long, default_value_t = 1)]
    pub nu: u32,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
    /// Practical range; with --variance replaces --kappa/--phi.
    #[arg(long, requires = "variance")]
    pub range: Option<f64>,
    #[arg(long, requires = "range")]
    pub variance: Option<f64>,
    /// Also write this many noisy observations at uniform locations.
    #[arg(long, default_value_t = 0)]
    pub obs_count: usize,
    /// Observation noise variance.
    #[arg(long, default_value_t = 1e-6)]
    pub noise: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct KrigeArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    /// Prior model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Observation CSV with columns x,y,value and optional covariates.
    #[arg(long)]
    pub obs: PathBuf,
    /// Observation noise variance.
    #[arg(long)]
    pub noise: f64,
    /// Covariate coefficients, subtracted from the observations in column order.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct LevelArgs {
    /// Number of levels (the largest K considered when --target is set).
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Standard)]
    pub strategy: StrategyArg,
    /// Explicit comma-separated levels; overrides --K.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct LevelsArgs {
    /// Model JSON whose mean is the point estimate.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub level: LevelArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct MeasuresArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub level: LevelArgs,
    /// Select the largest K whose measure reaches this credibility.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, value_enum, default_value_t = MeasureArg::P2)]
    pub measure: MeasureArg,
    /// With --target, also estimate candidates rejected by the marginal bound.
    #[arg(long)]
    pub audit: bool,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CmfunctionArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub level: LevelArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Linear)]
    pub method: MethodArg,
    /// Comma-separated alpha values for the credible sets.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub alpha: Vec<f64>,
    /// Subdivision depth of the exported field.
    #[arg(long, default_value_t = 0)]
    pub depth: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CoverageArgs {
    /// Study configuration JSON; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseArg {
    A,
    B,
    C,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long = "case", value_enum, default_value_t = CaseArg::All)]
    pub case: CaseArg,
    /// Interpolation method; all three when omitted.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Number of evenly spaced positions on [0, 1].
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.9)]
    pub target: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Provenance of one run, embedded in its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub inputs: BTreeMap<String, String>,
    pub parameters: Value,
    pub outputs: Vec<String>,
}

impl RunManifest {
    fn new(subcommand: &str, args: &impl Serialize, inputs: &[(&str, Option<&Path>)], outputs: &[&str]) -> Self {
        Self {
            subcommand: subcommand.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: inputs.iter().filter_map(|(k, p)| p.map(|p| (k.to_string(), p.display().to_string()))).collect(),
            parameters: serde_json::to_value(args).expect("arguments serialize"),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn value(&self) -> Value {
        serde_json::to_value(self).expect("manifest serializes")
    }
}

/// Messages for the user that do not stop the run.
pub type Warnings = Vec<String>;

/// Parses `std::env::args` and runs, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                2
            } else {
                1
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<Warnings> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Krige(a) => cmd_krige(&a),
        Command::Levels(a) => cmd_levels(&a),
        Command::Measures(a) => cmd_measures(&a),
        Command::Cmfunction(a) => cmd_cmfunction(&a),
        Command::Coverage(a) => cmd_coverage(&a),
        Command::Oracle(a) => cmd_oracle(&a),
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value).expect("json serializes") + "\n"))
}

fn with_manifest(manifest: &RunManifest, body: Value) -> Value {
    let mut obj = Map::new();
    obj.insert("manifest".into(), manifest.value());
    match body {
        Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("result".into(), other);
        }
    }
    Value::Object(obj)
}

fn svg_with_manifest(svg: &str, manifest: &RunManifest) -> String {
    let meta = serde_json::to_string(&manifest.value()).expect("manifest serializes").replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    match svg.find('\n') {
        Some(i) => format!("{}\n<metadata>{meta}</metadata>{}", &svg[..i], &svg[i..]),
        None => svg.to_string(),
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    w.write_record(header).map_err(|e| Error::parse(path, e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| Error::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_model_for_mesh(model: &Path, mesh: &Triangulation) -> Result<PrecisionModel> {
    let m = PrecisionModel::read(model)?;
    if m.n() != mesh.n_vertices() {
        return Err(Error::parse(model, format!("model has {} nodes but the mesh has {}", m.n(), mesh.n_vertices())));
    }
    Ok(m)
}

fn build_levels(f: &[f64], args: &LevelArgs) -> Result<ContourLevelSet> {
    if !args.levels.is_empty() {
        let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        return ContourLevelSet::new(args.levels.clone(), hi - lo);
    }
    let k = args.k.ok_or_else(|| Error::InvalidParameter("give --K or --levels".into()))?;
    match args.strategy {
        StrategyArg::Standard => standard_levels(f, k),
        StrategyArg::Pretty => pretty_levels(f, k),
    }
}

fn level_summary(levels: &ContourLevelSet, f: &[f64]) -> Value {
    let a = assign_level_sets(f, levels);
    let mut counts = vec![0usize; levels.k() + 1];
    for &k in &a.sets {
        counts[k] += 1;
    }
    json!({"levels": levels, "set_sizes": counts, "ties": a.ties})
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<Warnings> {
    let mut warnings = Vec::new();
    let spec = match (a.range, a.variance) {
        (Some(r), Some(v)) => MaternSpec::from_range(a.nu, r, v)?,
        _ => MaternSpec::new(a.nu, a.kappa, a.phi * a.phi)?,
    };
    let mesh = match (&a.mesh, a.lattice) {
        (Some(p), _) => Triangulation::read_json(p)?,
        (None, Some(n)) => Triangulation::square_lattice(n, a.side)?,
        (None, None) => return Err(Error::InvalidParameter("give --mesh or --lattice".into())),
    };
    let advice = check_mesh_resolution(&spec, &mesh);
    if !advice.adequate {
        warnings.push(format!("longest edge / range = {:.3} exceeds the recommended {} for nu = {}", advice.ratio, advice.limit, spec.nu));
    }
    prepare_out(&a.out)?;
    let mut outputs = vec!["simulate.json", "realization.csv", "prior.json", "prior.precision.txt"];
    if a.lattice.is_some() {
        outputs.push("mesh.json");
    }
    if a.obs_count > 0 {
        outputs.push("observations.csv");
    }
    let manifest = RunManifest::new("simulate", a, &[("mesh", a.mesh.as_deref())], &outputs);
    let prior = build_matern_precision(&mesh, &spec)?;
    let x = sample_field(&prior, a.seed, 1).pop().expect("one realization");
    if a.lattice.is_some() {
        mesh.write_json(&a.out.join("mesh.json"))?;
    }
    write_csv(
        &a.out.join("realization.csv"),
        &["x", "y", "value"],
        mesh.vertices().iter().zip(&x).map(|(p, v)| vec![fmt17(p[0]), fmt17(p[1]), fmt17(*v)]),
    )?;
    let mut extra = Map::new();
    extra.insert("matern".into(), serde_json::to_value(spec).expect("spec serializes"));
    extra.insert("manifest".into(), manifest.value());
    prior.write(&a.out.join("prior.json"), extra)?;
    if a.obs_count > 0 {
        let side = mesh.vertices().iter().fold(0.0f64, |m, v| m.max(v[0]).max(v[1]));
        let obs = observe(&mesh, &x, side, a.obs_count, a.noise, crate::rng::derive_seed(a.seed, 2))?;
        obs.write_csv(&a.out.join("observations.csv"))?;
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    write_json(
        &a.out.join("simulate.json"),
        &with_manifest(&manifest, json!({"matern": spec, "nodes": mesh.n_vertices(), "min": lo, "max": hi, "resolution": advice})),
    )?;
    Ok(warnings)
}

pub fn cmd_krige(a: &KrigeArgs) -> Result<Warnings> {
    let mesh = Triangulation::read_json(&a.mesh)?;
    let prior = read_model_for_mesh(&a.model, &mesh)?;
    let mut obs = ObservationSet::read_csv(&a.obs, a.noise)?;
    if !a.beta.is_empty() {
        obs = obs.remove_covariate_effect(&a.beta)?;
    }
    prepare_out(&a.out)?;
    let outputs = ["krige.json", "posterior.json", "posterior.precision.txt", "kriging.csv"];
    let manifest = RunManifest::new("krige", a, &[("mesh", Some(&a.mesh)), ("model", Some(&a.model)), ("obs", Some(&a.obs))], &outputs);
    let post = condition_on_observations(&prior, &obs, &mesh)?;
    let var = marginal_variances(&post)?;
    let sd = var.std_devs();
    let mut extra = Map::new();
    extra.insert("manifest".into(), manifest.value());
    post.write(&a.out.join("posterior.json"), extra)?;
    write_csv(
        &a.out.join("kriging.csv"),
        &["x", "y", "mean", "sd"],
        mesh.vertices().iter().enumerate().map(|(i, p)| vec![fmt17(p[0]), fmt17(p[1]), fmt17(post.mean()[i]), fmt17(sd[i])]),
    )?;
    write_json(
        &a.out.join("krige.json"),
        &with_manifest(&manifest, json!({"nodes": post.n(), "observations": obs.len(), "noise_variance": a.noise, "variance_method": var.method})),
    )?;
    Ok(Vec::new())
}

pub fn cmd_levels(a: &LevelsArgs) -> Result<Warnings> {
    let model = PrecisionModel::read(&a.model)?;
    let levels = build_levels(model.mean(), &a.level)?;
    prepare_out(&a.out)?;
    let manifest = RunManifest::new("levels", a, &[("model", Some(&a.model))], &["levels.json"]);
    write_json(&a.out.join("levels.json"), &with_manifest(&manifest, level_summary(&levels, model.mean())))?;
    Ok(Vec::new())
}

pub fn cmd_measures(a: &MeasuresArgs) -> Result<Warnings> {
    let mut warnings = Vec::new();
    let mesh = Triangulation::read_json(&a.mesh)?;
    let model = read_model_for_mesh(&a.model, &mesh)?;
    let f = model.mean().to_vec();
    prepare_out(&a.out)?;
    let inputs = [("mesh", Some(a.mesh.as_path())), ("model", Some(a.model.as_path()))];
    let weights = mesh.vertex_areas();
    let (body, levels) = if let Some(target) = a.target {
        let settings = SelectionSettings {
            target,
            measure: a.measure.into(),
            strategy: a.level.strategy.into(),
            k_max: a.level.k.unwrap_or(10),
            samples: a.samples,
            seed: a.seed,
            audit: a.audit,
        };
        let sel = select_k(&model, &f, weights, &settings)?;
        if sel.k == 0 {
            warnings.push(format!("no K in 1..={} reaches {:?} >= {target}; reporting K = 0", settings.k_max, settings.measure));
        }
        let levels = sel.levels.clone();
        (json!({"selection": sel, "report": sel.report}), levels)
    } else {
        let levels = build_levels(&f, &a.level)?;
        let report = quality_report(&model, &f, &levels, weights, a.samples, a.seed)?;
        (json!({"report": report}), Some(levels))
    };
    let outputs: Vec<&str> = if levels.is_some() { vec!["report.json", "contour_map.svg"] } else { vec!["report.json"] };
    let manifest = RunManifest::new("measures", a, &inputs, &outputs);
    write_json(&a.out.join("report.json"), &with_manifest(&manifest, body))?;
    if let Some(levels) = levels {
        write_text(&a.out.join("contour_map.svg"), &svg_with_manifest(&contour_map_svg(&mesh, &f, &levels), &manifest))?;
    }
    Ok(warnings)
}

pub fn cmd_cmfunction(a: &CmfunctionArgs) -> Result<Warnings> {
    let mut warnings = Vec::new();
    let mesh = Triangulation::read_json(&a.mesh)?;
    let model = read_model_for_mesh(&a.model, &mesh)?;
    let f = model.mean().to_vec();
    let levels = build_levels(&f, &a.level)?;
    let assignment = assign_level_sets(&f, &levels);
    if !assignment.ties.is_empty() {
        warnings.push(format!("{} nodes lie exactly on a level and were assigned to the set below", assignment.ties.len()));
    }
    prepare_out(&a.out)?;
    let outputs = ["cmfunction.json", "F.csv", "credible_sets.geojson", "subdivision.json", "field.svg"];
    let manifest = RunManifest::new("cmfunction", a, &[("mesh", Some(&a.mesh)), ("model", Some(&a.model))], &outputs);

    let cf = contour_function_weighted(&model, &assignment, &levels, a.samples, a.seed, mesh.vertex_areas())?;
    let func = &cf.function;
    write_csv(
        &a.out.join("F.csv"),
        &["x", "y", "estimate", "set", "marginal", "F", "se"],
        (0..mesh.n_vertices()).map(|i| {
            let p = mesh.vertices()[i];
            vec![fmt17(p[0]), fmt17(p[1]), fmt17(f[i]), assignment.sets[i].to_string(), fmt17(func.marginal[i]), fmt17(func.values[i]), fmt17(func.std_errors[i])]
        }),
    )?;
    let method: InterpMethod = a.method.into();
    let field = InterpolatedField::new(mesh.clone(), func.values.clone(), method, &assignment)?;
    let mut alphas = a.alpha.clone();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let sets = alphas.iter().map(|&al| extract_credible_set(&field, al)).collect::<Result<Vec<_>>>()?;
    let mut props = Map::new();
    props.insert("manifest".into(), manifest.value());
    write_json(&a.out.join("credible_sets.geojson"), &credible_sets_geojson(&sets, &props))?;

    let fine = field.subdivide(a.depth)?;
    write_json(
        &a.out.join("subdivision.json"),
        &with_manifest(
            &manifest,
            json!({"depth": a.depth, "method": fine.method(), "vertices": fine.mesh().vertices(), "triangles": fine.mesh().triangles(), "values": fine.values(), "pruned": fine.pruned()}),
        ),
    )?;
    let overlays: Vec<Vec<[f64; 2]>> = sets.iter().flat_map(|s| s.polylines.iter().cloned()).collect();
    write_text(&a.out.join("field.svg"), &svg_with_manifest(&field_svg(&fine, &overlays), &manifest))?;
    let summaries: Vec<Value> = sets
        .iter()
        .map(|s| json!({"alpha": s.alpha, "area": s.area, "inside_triangles": s.n_inside(), "interior_segments": s.interior_segments.len(), "boundary_segments": s.boundary_segments.len()}))
        .collect();
    let pruned = field.pruned().iter().filter(|p| **p).count();
    write_json(
        &a.out.join("cmfunction.json"),
        &with_manifest(
            &manifest,
            json!({"levels": levels, "P0": cf.p0.estimate, "se_P0": cf.p0.std_error, "method": method, "pruned_triangles": pruned, "credible_sets": summaries, "ties": assignment.ties}),
        ),
    )?;
    Ok(warnings)
}

pub fn cmd_coverage(a: &CoverageArgs) -> Result<Warnings> {
    let mut warnings = Vec::new();
    let config: CoverageConfig = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::parse(p, e.to_string()))?
        }
        None => CoverageConfig::default(),
    };
    config.validate()?;
    prepare_out(&a.out)?;
    let manifest = RunManifest::new("coverage", a, &[("config", a.config.as_deref())], &["coverage.json", "coverage.txt"]);
    let result = run_coverage_study(&config)?;
    if result.replicates == 1 {
        warnings.push("a single replicate gives a degenerate standard error of 0".into());
    }
    write_json(&a.out.join("coverage.json"), &with_manifest(&manifest, serde_json::to_value(&result).expect("result serializes")))?;
    write_text(&a.out.join("coverage.txt"), &result.to_text())?;
    Ok(warnings)
}

pub fn cmd_oracle(a: &OracleArgs) -> Result<Warnings> {
    if a.grid < 2 {
        return Err(Error::InvalidParameter("--grid needs at least 2 points".into()));
    }
    let grid = unit_grid(a.grid);
    let methods: Vec<InterpMethod> = match a.method {
        Some(m) => vec![m.into()],
        None => InterpMethod::ALL.to_vec(),
    };
    let wanted = |label: &str| match a.case {
        CaseArg::All => true,
        CaseArg::A => label == "a",
        CaseArg::B => label == "b",
        CaseArg::C => label == "c",
    };
    let mut reports = Vec::new();
    for (label, model, u) in reference_cases() {
        if !wanted(label) {
            continue;
        }
        for &m in &methods {
            let r = compare_to_oracle(&model, u, m, &grid, a.target)?;
            reports.push(json!({"case": label, "conservative": r.conservative(1e-8), "report": r}));
        }
    }
    prepare_out(&a.out)?;
    let manifest = RunManifest::new("oracle", a, &[], &["oracle.json"]);
    write_json(&a.out.join("oracle.json"), &with_manifest(&manifest, json!({"comparisons": reports})))?;
    Ok(Vec::new())
}
