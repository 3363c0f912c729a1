//! Gaussian Markov random fields: precision models, SPDE construction,
//! conditioning on observations and simulation.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cholesky::CholeskyFactor;
use crate::error::{Error, Result};
use crate::matern::MaternSpec;
use crate::mesh::Triangulation;
use crate::rng::stream_rng;
use crate::sparse::SparseSymMatrix;

/// A Gaussian vector with mean `mean` and sparse precision `precision`.
///
/// The precision is factorized on construction, so every model in
/// existence is positive definite.
#[derive(Debug, Clone)]
pub struct PrecisionModel {
    mean: Vec<f64>,
    precision: SparseSymMatrix,
    factor: Arc<CholeskyFactor>,
}

impl PrecisionModel {
    pub fn new(mean: Vec<f64>, precision: SparseSymMatrix) -> Result<Self> {
        if mean.len() != precision.n() {
            return Err(Error::DimensionMismatch { expected: precision.n(), found: mean.len() });
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter("mean contains non-finite values".into()));
        }
        let factor = Arc::new(CholeskyFactor::new(&precision)?);
        Ok(Self { mean, precision, factor })
    }

    pub fn zero_mean(precision: SparseSymMatrix) -> Result<Self> {
        Self::new(vec![0.0; precision.n()], precision)
    }

    /// Same precision (and factorization) with a different mean.
    pub fn with_mean(&self, mean: Vec<f64>) -> Result<Self> {
        if mean.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: mean.len() });
        }
        Ok(Self { mean, precision: self.precision.clone(), factor: Arc::clone(&self.factor) })
    }

    pub fn n(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn precision(&self) -> &SparseSymMatrix {
        &self.precision
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// Writes `<path>` (JSON with the mean) and `<stem>.precision.txt` next to it.
    /// `extra` fields are merged into the JSON object.
    pub fn write(&self, path: &Path, extra: serde_json::Map<String, serde_json::Value>) -> Result<()> {
        let prec_path = precision_path(path);
        self.precision.write_triplets(&prec_path)?;
        let mut obj = serde_json::Map::new();
        obj.insert("n".into(), self.n().into());
        obj.insert("mean".into(), serde_json::to_value(&self.mean).expect("finite mean"));
        let name = prec_path.file_name().expect("file name").to_string_lossy().into_owned();
        obj.insert("precision".into(), name.into());
        obj.extend(extra);
        let text = serde_json::to_string_pretty(&serde_json::Value::Object(obj)).expect("model serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct ModelFile {
            mean: Vec<f64>,
            precision: String,
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        let prec_path = path.parent().unwrap_or(Path::new(".")).join(&file.precision);
        let q = SparseSymMatrix::read_triplets(&prec_path)?;
        Self::new(file.mean, q).map_err(|e| match e {
            Error::DimensionMismatch { .. } => Error::parse(path, e.to_string()),
            other => other,
        })
    }
}

fn precision_path(model_path: &Path) -> PathBuf {
    let stem = model_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into());
    model_path.with_file_name(format!("{stem}.precision.txt"))
}

/// How marginal variances were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    SelectedInverse,
    NodeSolves,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalVariances {
    pub values: Vec<f64>,
    pub method: VarianceMethod,
}

impl MarginalVariances {
    pub fn std_devs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.sqrt()).collect()
    }
}

/// Diagonal of `Q^{-1}` by the selected-inverse recursion, falling back to
/// per-node solves if roundoff produced a non-positive value.
pub fn marginal_variances(model: &PrecisionModel) -> Result<MarginalVariances> {
    let values = model.factor().inverse_diagonal();
    if values.iter().all(|v| *v > 0.0 && v.is_finite()) {
        return Ok(MarginalVariances { values, method: VarianceMethod::SelectedInverse });
    }
    let values = model.factor().inverse_diagonal_by_solves();
    if let Some(i) = values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::NotPositiveDefinite { pivot: i, value: values[i] });
    }
    Ok(MarginalVariances { values, method: VarianceMethod::NodeSolves })
}

/// Finite-element precision for a Matérn field on `mesh`.
///
/// With lumped mass `C` and stiffness `G`, `K = kappa^2 C + G` and the
/// precision is `K C^-1 K / phi2` for `nu = 1` and `K C^-1 K C^-1 K / phi2`
/// for `nu = 2`.
pub fn build_matern_precision(mesh: &Triangulation, spec: &MaternSpec) -> Result<PrecisionModel> {
    spec.validate()?;
    let n = mesh.n_vertices();
    if mesh.n_triangles() == 0 {
        return Err(Error::DegenerateMesh(format!("{n} vertices and no triangles")));
    }
    let mass = mesh.vertex_areas();
    if let Some(v) = mass.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::DegenerateMesh(format!("vertex {v} belongs to no triangle")));
    }
    let k2 = spec.kappa * spec.kappa;
    let mut entries = Vec::with_capacity(6 * mesh.n_triangles() + n);
    for (i, &m) in mass.iter().enumerate() {
        entries.push((i, i, k2 * m));
    }
    let verts = mesh.vertices();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        // edge opposite vertex a
        let edge = |a: usize| {
            let p = verts[tri[(a + 1) % 3]];
            let q = verts[tri[(a + 2) % 3]];
            [q[0] - p[0], q[1] - p[1]]
        };
        let e = [edge(0), edge(1), edge(2)];
        for a in 0..3 {
            for b in 0..=a {
                let g = (e[a][0] * e[b][0] + e[a][1] * e[b][1]) / (4.0 * area);
                entries.push((tri[a], tri[b], g));
            }
        }
    }
    let k = SparseSymMatrix::from_lower_summed(n, entries);
    let inv_mass: Vec<f64> = mass.iter().map(|a| 1.0 / a).collect();
    let mut q = SparseSymMatrix::sym_product(&k, &inv_mass, &k);
    if spec.nu == 2 {
        q = SparseSymMatrix::sym_product(&q, &inv_mass, &k);
    }
    let tau = 1.0 / spec.phi2;
    let q = SparseSymMatrix::from_lower_summed(n, q.lower_triplets().map(|(i, j, v)| (i, j, tau * v)));
    PrecisionModel::zero_mean(q).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Error::DegenerateMesh(format!("assembled precision is singular: {e}")),
        other => other,
    })
}

/// Noisy point observations of the field.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub locations: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    pub noise_variance: f64,
    /// Optional named covariate columns, one value per observation.
    pub covariates: Vec<(String, Vec<f64>)>,
}

impl ObservationSet {
    pub fn new(locations: Vec<[f64; 2]>, values: Vec<f64>, noise_variance: f64) -> Result<Self> {
        if locations.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: locations.len(), found: values.len() });
        }
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise variance must be positive, got {noise_variance}")));
        }
        Ok(Self { locations, values, noise_variance, covariates: Vec::new() })
    }

    pub fn empty(noise_variance: f64) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), noise_variance)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Subtracts a known linear covariate effect `sum_j beta_j z_j` from the values.
    pub fn remove_covariate_effect(&self, beta: &[f64]) -> Result<Self> {
        if beta.len() != self.covariates.len() {
            return Err(Error::DimensionMismatch { expected: self.covariates.len(), found: beta.len() });
        }
        let mut out = self.clone();
        for (b, (_, col)) in beta.iter().zip(&self.covariates) {
            for (v, z) in out.values.iter_mut().zip(col) {
                *v -= b * z;
            }
        }
        Ok(out)
    }

    /// Reads CSV with header `x,y,value` followed by optional covariate columns.
    pub fn read_csv(path: &Path, noise_variance: f64) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if names.len() < 3 || names[..3] != ["x", "y", "value"] {
            return Err(Error::parse(path, "expected header starting with `x,y,value`"));
        }
        let mut locations = Vec::new();
        let mut values = Vec::new();
        let mut covariates: Vec<(String, Vec<f64>)> = names[3..].iter().map(|n| (n.to_string(), Vec::new())).collect();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_error(path, e))?;
            let num = |k: usize| -> Result<f64> {
                let field = record.get(k).unwrap_or("").trim();
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(path, format!("row {}: cannot parse `{field}` in column {}", row + 2, names[k])))
            };
            locations.push([num(0)?, num(1)?]);
            values.push(num(2)?);
            for (c, (_, col)) in covariates.iter_mut().enumerate() {
                col.push(num(3 + c)?);
            }
        }
        let mut obs = Self::new(locations, values, noise_variance)?;
        obs.covariates = covariates;
        Ok(obs)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut header = vec!["x".to_string(), "y".into(), "value".into()];
        header.extend(self.covariates.iter().map(|c| c.0.clone()));
        w.write_record(&header).map_err(|e| csv_error(path, e))?;
        for i in 0..self.len() {
            let mut rec = vec![fmt17(self.locations[i][0]), fmt17(self.locations[i][1]), fmt17(self.values[i])];
            rec.extend(self.covariates.iter().map(|c| fmt17(c.1[i])));
            w.write_record(&rec).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if let csv::ErrorKind::Io(_) = e.kind() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return Error::io(path, io);
        }
        unreachable!()
    }
    Error::parse(path, e.to_string())
}

/// Barycentric observation matrix rows: for each observation, its three
/// vertices and weights.
pub fn observation_weights(obs: &ObservationSet, mesh: &Triangulation) -> Result<Vec<([usize; 3], [f64; 3])>> {
    obs.locations
        .iter()
        .map(|&p| {
            let (t, w) = mesh.locate(p).ok_or(Error::OutsideMesh { x: p[0], y: p[1] })?;
            Ok((mesh.triangles()[t], w))
        })
        .collect()
}

/// Posterior of the field given noisy observations: precision
/// `Q + A^T A / s2` and mean solving `Q_post m = A^T y / s2 + Q mu`.
pub fn condition_on_observations(prior: &PrecisionModel, obs: &ObservationSet, mesh: &Triangulation) -> Result<PrecisionModel> {
    if mesh.n_vertices() != prior.n() {
        return Err(Error::DimensionMismatch { expected: prior.n(), found: mesh.n_vertices() });
    }
    if obs.is_empty() {
        return Ok(prior.clone());
    }
    let rows = observation_weights(obs, mesh)?;
    let s2 = obs.noise_variance;
    let n = prior.n();
    let mut entries: Vec<(usize, usize, f64)> = prior.precision().lower_triplets().collect();
    let mut rhs = prior.precision().mul_vec(prior.mean());
    for ((verts, w), &y) in rows.iter().zip(&obs.values) {
        for a in 0..3 {
            rhs[verts[a]] += w[a] * y / s2;
            for b in 0..3 {
                if verts[a] >= verts[b] {
                    entries.push((verts[a], verts[b], w[a] * w[b] / s2));
                }
            }
        }
    }
    let q = SparseSymMatrix::from_lower_summed(n, entries);
    let factor = Arc::new(CholeskyFactor::new(&q)?);
    let mean = factor.solve(&rhs);
    Ok(PrecisionModel { mean, precision: q, factor })
}

/// `count` realizations `x = mu + P^T L^-T z`; realization `i` uses its own
/// random stream, so results do not depend on how work is split.
pub fn sample_field(model: &PrecisionModel, seed: u64, count: usize) -> Vec<Vec<f64>> {
    (0..count).into_par_iter().map(|i| sample_one(model, seed, i as u64)).collect()
}

fn sample_one(model: &PrecisionModel, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    let f = model.factor();
    let mut y: Vec<f64> = (0..model.n()).map(|_| StandardNormal.sample(&mut rng)).collect();
    f.solve_lt_in_place(&mut y);
    let mut x = model.mean().to_vec();
    for (k, &p) in f.perm().iter().enumerate() {
        x[p] += y[k];
    }
    x
}
