//! Gaussian rectangle probabilities by sequential conditioning on the
//! precision factor (separation of variables).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cholesky::CholeskyFactor;
use crate::error::{Error, Result};
use crate::gmrf::PrecisionModel;
use crate::normal::truncated_standard;
use crate::rng::stream_rng;

/// Default Monte Carlo sample count.
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Samples per random stream. Changing it changes the draws.
const CHUNK: usize = 64;
/// Chunks evaluated per parallel batch before folding into the totals.
const BATCH: usize = 32;

/// Per-node intervals `(lower[i], upper[i])`; infinite ends are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl IntervalBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        for (i, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if !(a < b) || a.is_nan() || b.is_nan() || *a == f64::INFINITY || *b == f64::NEG_INFINITY {
                return Err(Error::InvalidParameter(format!("interval {i} = ({a}, {b}) is empty")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The whole space.
    pub fn unbounded(n: usize) -> Self {
        Self { lower: vec![f64::NEG_INFINITY; n], upper: vec![f64::INFINITY; n] }
    }

    pub fn n(&self) -> usize {
        self.lower.len()
    }
}

/// A Monte Carlo probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    /// Every sample hit a numerically empty conditional interval.
    pub empty: bool,
}

impl ProbEstimate {
    pub(crate) fn from_sums(sum: f64, sumsq: f64, samples: usize, seed: u64) -> Self {
        let m = samples as f64;
        let mean = sum / m;
        let var = if samples > 1 { ((sumsq - m * mean * mean) / (m - 1.0)).max(0.0) } else { 0.0 };
        Self { estimate: mean.clamp(0.0, 1.0), std_error: (var / m).sqrt(), samples, seed, empty: sum == 0.0 }
    }
}

/// `P(lower < x < upper)` for `x ~ N(mu, Q^-1)`.
///
/// Variables are integrated in reverse order of the model's factor: each
/// step samples the variable from its conditional law truncated to its
/// interval and multiplies the sample weight by the interval mass.
pub fn rectangle_probability(model: &PrecisionModel, bounds: &IntervalBox, samples: usize, seed: u64) -> Result<ProbEstimate> {
    if bounds.n() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: bounds.n() });
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let out = sweep(model.factor(), model.mean(), bounds, samples, seed, &SweepOptions::default());
    Ok(ProbEstimate::from_sums(out.final_sum, out.final_sumsq, samples, seed))
}

/// As [`rectangle_probability`] with an explicit factorization of the
/// precision; the factor's ordering fixes the integration order.
pub fn rectangle_probability_with_factor(factor: &CholeskyFactor, mean: &[f64], bounds: &IntervalBox, samples: usize, seed: u64) -> Result<ProbEstimate> {
    if bounds.n() != factor.n() || mean.len() != factor.n() {
        return Err(Error::DimensionMismatch { expected: factor.n(), found: bounds.n().min(mean.len()) });
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let out = sweep(factor, mean, bounds, samples, seed, &SweepOptions::default());
    Ok(ProbEstimate::from_sums(out.final_sum, out.final_sumsq, samples, seed))
}

#[derive(Default)]
pub(crate) struct SweepOptions<'a> {
    /// Record the running mean weight after every step.
    pub track_prefix: bool,
    /// Per-step coefficients `c_t`; accumulates `sum_t c_t W_t` per sample.
    pub step_weights: Option<&'a [f64]>,
}

pub(crate) struct SweepOutput {
    pub final_sum: f64,
    pub final_sumsq: f64,
    /// Sum and sum of squares of the running weight after step `t`
    /// (step `t` integrates factor position `n - 1 - t`).
    pub prefix_sum: Vec<f64>,
    pub prefix_sumsq: Vec<f64>,
    /// Sum and sum of squares over samples of `sum_t c_t W_t`.
    pub weighted_sum: f64,
    pub weighted_sumsq: f64,
}

struct ChunkResult {
    final_sum: f64,
    final_sumsq: f64,
    prefix_sum: Vec<f64>,
    prefix_sumsq: Vec<f64>,
    weighted_sum: f64,
    weighted_sumsq: f64,
}

/// Runs the sequential sampler for `samples` draws in factor order.
pub(crate) fn sweep(factor: &CholeskyFactor, mean: &[f64], bounds: &IntervalBox, samples: usize, seed: u64, opts: &SweepOptions) -> SweepOutput {
    let n = factor.n();
    let perm = factor.perm();
    let lower: Vec<f64> = perm.iter().map(|&p| bounds.lower[p] - mean[p]).collect();
    let upper: Vec<f64> = perm.iter().map(|&p| bounds.upper[p] - mean[p]).collect();
    let track = opts.track_prefix;
    let mut out = SweepOutput {
        final_sum: 0.0,
        final_sumsq: 0.0,
        prefix_sum: if track { vec![0.0; n] } else { Vec::new() },
        prefix_sumsq: if track { vec![0.0; n] } else { Vec::new() },
        weighted_sum: 0.0,
        weighted_sumsq: 0.0,
    };
    let chunks = samples.div_ceil(CHUNK);
    let mut start = 0;
    while start < chunks {
        let end = (start + BATCH).min(chunks);
        let parts: Vec<ChunkResult> = (start..end)
            .into_par_iter()
            .map(|c| {
                let size = CHUNK.min(samples - c * CHUNK);
                run_chunk(factor, &lower, &upper, size, seed, c as u64, opts)
            })
            .collect();
        for part in parts {
            out.final_sum += part.final_sum;
            out.final_sumsq += part.final_sumsq;
            out.weighted_sum += part.weighted_sum;
            out.weighted_sumsq += part.weighted_sumsq;
            if track {
                for t in 0..n {
                    out.prefix_sum[t] += part.prefix_sum[t];
                    out.prefix_sumsq[t] += part.prefix_sumsq[t];
                }
            }
        }
        start = end;
    }
    out
}

fn run_chunk(factor: &CholeskyFactor, lower: &[f64], upper: &[f64], size: usize, seed: u64, stream: u64, opts: &SweepOptions) -> ChunkResult {
    let n = factor.n();
    let mut rng = stream_rng(seed, stream);
    // centered values, variable-major: y[k * size + s]
    let mut y = vec![0.0; n * size];
    let mut weight = vec![1.0; size];
    let mut acc = vec![0.0; size];
    let mut weighted = vec![0.0; size];
    let track = opts.track_prefix;
    let mut prefix_sum = if track { vec![0.0; n] } else { Vec::new() };
    let mut prefix_sumsq = if track { vec![0.0; n] } else { Vec::new() };
    for step in 0..n {
        let k = n - 1 - step;
        let (rows, vals) = factor.l_col(k);
        let lkk = vals[0];
        acc.iter_mut().for_each(|a| *a = 0.0);
        for (&j, &ljk) in rows[1..].iter().zip(&vals[1..]) {
            let yj = &y[j * size..(j + 1) * size];
            for (a, &v) in acc.iter_mut().zip(yj) {
                *a += ljk * v;
            }
        }
        let (lo, hi) = (lower[k], upper[k]);
        let unbounded = lo == f64::NEG_INFINITY && hi == f64::INFINITY;
        let yk = &mut y[k * size..(k + 1) * size];
        for s in 0..size {
            let m = -acc[s] / lkk;
            let u: f64 = rng.random();
            let (t, mass) = if unbounded {
                (crate::normal::inv_cdf(u.max(1e-300)), 1.0)
            } else {
                truncated_standard((lo - m) * lkk, (hi - m) * lkk, u)
            };
            yk[s] = m + t / lkk;
            weight[s] *= mass;
        }
        if track {
            let (sum, sumsq) = weight.iter().fold((0.0, 0.0), |(a, b), &w| (a + w, b + w * w));
            prefix_sum[step] = sum;
            prefix_sumsq[step] = sumsq;
        }
        if let Some(c) = opts.step_weights {
            for (acc_w, &w) in weighted.iter_mut().zip(&weight) {
                *acc_w += c[step] * w;
            }
        }
        if weight.iter().all(|&w| w == 0.0) {
            // later steps contribute nothing
            break;
        }
    }
    let (final_sum, final_sumsq) = weight.iter().fold((0.0, 0.0), |(a, b), &w| (a + w, b + w * w));
    let (weighted_sum, weighted_sumsq) = weighted.iter().fold((0.0, 0.0), |(a, b), &w| (a + w, b + w * w));
    ChunkResult { final_sum, final_sumsq, prefix_sum, prefix_sumsq, weighted_sum, weighted_sumsq }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cholesky::tests::random_spd;
    use crate::normal::{cdf, univariate_interval};
    use crate::sparse::SparseSymMatrix;

    fn diag_model(d: &[f64]) -> PrecisionModel {
        PrecisionModel::zero_mean(SparseSymMatrix::diagonal_matrix(d)).unwrap()
    }

    #[test]
    fn half_line() {
        let m = diag_model(&[1.0]);
        let b = IntervalBox::new(vec![f64::NEG_INFINITY], vec![0.0]).unwrap();
        let p = rectangle_probability(&m, &b, 1000, 1).unwrap();
        assert!((p.estimate - 0.5).abs() < 1e-15);
        assert_eq!(p.std_error, 0.0);
    }

    #[test]
    fn diagonal_product() {
        let m = diag_model(&[1.0, 4.0, 9.0]);
        let b = IntervalBox::new(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let p = rectangle_probability(&m, &b, 2000, 3).unwrap();
        let exact = (2.0 * cdf(1.0) - 1.0) * (2.0 * cdf(2.0) - 1.0) * (2.0 * cdf(3.0) - 1.0);
        assert!((exact - 0.6497).abs() < 5e-4);
        assert!((p.estimate - exact).abs() <= 3.0 * p.std_error + 1e-13);
    }

    #[test]
    fn unbounded_box_is_exactly_one() {
        let m = PrecisionModel::zero_mean(random_spd(30, 0.2, 2)).unwrap();
        let p = rectangle_probability(&m, &IntervalBox::unbounded(30), 500, 9).unwrap();
        assert_eq!(p.estimate, 1.0);
        assert_eq!(p.std_error, 0.0);
    }

    #[test]
    fn deterministic_and_sample_count_prefix_stable() {
        let q = random_spd(12, 0.3, 4);
        let m = PrecisionModel::new((0..12).map(|i| 0.1 * i as f64).collect(), q).unwrap();
        let b = IntervalBox::new(vec![-1.0; 12], vec![2.0; 12]).unwrap();
        let a = rectangle_probability(&m, &b, 1000, 5).unwrap();
        let c = rectangle_probability(&m, &b, 1000, 5).unwrap();
        assert_eq!(a, c);
        let d = rectangle_probability(&m, &b, 1000, 6).unwrap();
        assert_ne!(a.estimate, d.estimate);
    }

    #[test]
    fn two_dimensional_matches_bivariate() {
        let q = SparseSymMatrix::from_triplets(2, &[(0, 0, 2.0), (1, 0, -1.2), (1, 1, 1.5)]).unwrap();
        let m = PrecisionModel::new(vec![0.3, -0.2], q.clone()).unwrap();
        let det = 2.0 * 1.5 - 1.44;
        let cov = [[1.5 / det, 1.2 / det], [1.2 / det, 2.0 / det]];
        let (lo, hi) = ([-0.5, f64::NEG_INFINITY], [1.0, 0.4]);
        let exact = crate::normal::bivariate_interval([0.3, -0.2], cov, lo, hi).unwrap();
        let b = IntervalBox::new(lo.to_vec(), hi.to_vec()).unwrap();
        let p = rectangle_probability(&m, &b, 20_000, 8).unwrap();
        assert!((p.estimate - exact).abs() < 3.0 * p.std_error, "{} vs {exact}", p.estimate);
    }

    #[test]
    fn monotone_in_box_size() {
        let m = PrecisionModel::zero_mean(random_spd(6, 0.5, 12)).unwrap();
        let small = IntervalBox::new(vec![-0.3; 6], vec![0.5; 6]).unwrap();
        let mut big_upper = vec![0.5; 6];
        big_upper[2] = 1.5;
        let big = IntervalBox::new(vec![-0.3; 6], big_upper).unwrap();
        let a = rectangle_probability(&m, &small, 5000, 1).unwrap();
        let b = rectangle_probability(&m, &big, 5000, 1).unwrap();
        assert!(b.estimate >= a.estimate - 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt());
    }

    #[test]
    fn permutation_invariance() {
        let q = random_spd(5, 0.6, 21);
        let m = PrecisionModel::zero_mean(q.clone()).unwrap();
        let b = IntervalBox::new(vec![-0.4, -1.0, f64::NEG_INFINITY, -0.2, -2.0], vec![1.0, 0.3, 0.5, f64::INFINITY, 0.1]).unwrap();
        let perm = [3, 0, 4, 1, 2];
        let qp = q.permuted(&perm);
        let mp = PrecisionModel::zero_mean(qp).unwrap();
        let bp = IntervalBox::new(perm.iter().map(|&p| b.lower[p]).collect(), perm.iter().map(|&p| b.upper[p]).collect()).unwrap();
        let x = rectangle_probability(&m, &b, 20_000, 2).unwrap();
        let y = rectangle_probability(&mp, &bp, 20_000, 3).unwrap();
        assert!((x.estimate - y.estimate).abs() < 3.0 * (x.std_error.powi(2) + y.std_error.powi(2)).sqrt());
    }

    #[test]
    fn empty_effective_box_flagged() {
        let m = diag_model(&[1e6]);
        let b = IntervalBox::new(vec![50.0], vec![51.0]).unwrap();
        let p = rectangle_probability(&m, &b, 100, 1).unwrap();
        assert_eq!(p.estimate, 0.0);
        assert!(p.empty);
        assert!(IntervalBox::new(vec![1.0], vec![1.0]).is_err());
        assert!(rectangle_probability(&m, &IntervalBox::unbounded(2), 10, 1).is_err());
    }

    #[test]
    fn large_diagonal_matches_product() {
        let n = 2000;
        let d: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64).collect();
        let m = diag_model(&d);
        let lower: Vec<f64> = (0..n).map(|i| -3.0 - (i % 3) as f64 * 0.5).collect();
        let upper: Vec<f64> = (0..n).map(|i| 2.5 + (i % 5) as f64 * 0.3).collect();
        let exact: f64 = (0..n).map(|i| univariate_interval(0.0, 1.0 / d[i].sqrt(), lower[i], upper[i]).unwrap()).product();
        let p = rectangle_probability(&m, &IntervalBox::new(lower, upper).unwrap(), 200, 1).unwrap();
        assert!((p.estimate - exact).abs() <= 3.0 * p.std_error + 1e-12 * exact);
    }
}
