//! Exact contour map function for a field on a segment that is linear
//! between two jointly Gaussian end values, and comparison with the
//! Step/Linear/Log interpolations of the two-node discrete function.
//!
//! With `x(s) = (1 - s) x(0) + s x(1)` and one level `u`, the candidate set
//! through `s` is `{t : p(t) >= p(s)}`. Because `x` is linear in `t`, staying
//! on the right side of `u` over that set only depends on two of its points,
//! so the joint probability is a bivariate normal probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{interpolate, InterpMethod};
use crate::normal::{bvn_upper, cdf};

/// Gaussian law of `(x(0), x(1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointModel {
    pub mean: [f64; 2],
    pub sd: [f64; 2],
    pub rho: f64,
}

impl TwoPointModel {
    pub fn new(mean: [f64; 2], sd: [f64; 2], rho: f64) -> Result<Self> {
        if !(sd[0] > 0.0 && sd[1] > 0.0) || !(rho.abs() < 1.0) || !mean.iter().all(|m| m.is_finite()) {
            return Err(Error::InvalidParameter(format!("two-point model needs positive sds and |rho| < 1, got sd {sd:?}, rho {rho}")));
        }
        Ok(Self { mean, sd, rho })
    }

    fn mean_at(&self, t: f64) -> f64 {
        (1.0 - t) * self.mean[0] + t * self.mean[1]
    }

    fn cov_at(&self, a: f64, b: f64) -> f64 {
        let c01 = self.rho * self.sd[0] * self.sd[1];
        (1.0 - a) * (1.0 - b) * self.sd[0] * self.sd[0] + a * b * self.sd[1] * self.sd[1] + ((1.0 - a) * b + a * (1.0 - b)) * c01
    }

    fn sd_at(&self, t: f64) -> f64 {
        self.cov_at(t, t).max(0.0).sqrt()
    }
}

/// The three configurations used to contrast the interpolation methods,
/// as `(label, model, level)`.
pub fn reference_cases() -> [(&'static str, TwoPointModel, f64); 3] {
    [
        ("a", TwoPointModel { mean: [0.0, 1.0], sd: [1.0, 1.0], rho: 0.9 }, -0.5),
        ("b", TwoPointModel { mean: [0.0, 2.0], sd: [4.0, 1.0], rho: 0.9 }, -0.1),
        ("c", TwoPointModel { mean: [0.0, 2.0], sd: [4.0, 1.0], rho: 0.0 }, -0.1),
    ]
}

/// Upper set (`x > u`) or lower set (`x <= u`, which takes ties).
fn upper_side(model: &TwoPointModel, u: f64, t: f64) -> bool {
    model.mean_at(t) > u
}

/// `P(x(a) and x(b) each on their own side of u)`.
fn pair_probability(model: &TwoPointModel, u: f64, (a, side_a): (f64, bool), (b, side_b): (f64, bool)) -> f64 {
    let sign = |up: bool| if up { 1.0 } else { -1.0 };
    let (sa, sb) = (sign(side_a), sign(side_b));
    let (sda, sdb) = (model.sd_at(a), model.sd_at(b));
    let ha = (u - model.mean_at(a)) / sda;
    let hb = (u - model.mean_at(b)) / sdb;
    if a == b {
        return if side_a == side_b { cdf(-sa * ha) } else { 0.0 };
    }
    let r = (model.cov_at(a, b) / (sda * sdb)).clamp(-1.0, 1.0);
    bvn_upper(sa * ha, sb * hb, sa * sb * r)
}

/// Marginal probability that `x(t)` is on the side of `u` its mean is on.
pub fn marginal_probability(model: &TwoPointModel, u: f64, t: f64) -> f64 {
    let z = (model.mean_at(t) - u) / model.sd_at(t);
    if upper_side(model, u, t) {
        cdf(z)
    } else {
        cdf(-z)
    }
}

/// Roots of `c2 t^2 + c1 t + c0` in the open unit interval.
fn unit_roots(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let scale = c2.abs().max(c1.abs()).max(c0.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let mut roots = Vec::new();
    if c2.abs() <= 1e-14 * scale {
        if c1 != 0.0 {
            roots.push(-c0 / c1);
        }
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            // cancellation-free form
            let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
            if q != 0.0 {
                roots.push(q / c2);
                roots.push(c0 / q);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots.retain(|r| *r > 0.0 && *r < 1.0);
    roots
}

/// Exact `F(s)` for the continuous two-point field and level `u`.
pub fn two_point_f(model: &TwoPointModel, u: f64, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("position must lie in [0, 1], got {s}")));
    }
    let d0 = model.mean[0] - u;
    let delta = model.mean[1] - model.mean[0];
    let z2 = {
        let z = (model.mean_at(s) - u) / model.sd_at(s);
        z * z
    };
    let (v0, v1) = (model.sd[0] * model.sd[0], model.sd[1] * model.sd[1]);
    let c01 = model.rho * model.sd[0] * model.sd[1];
    // q(t) = (mu(t) - u)^2 - z^2 sigma(t)^2 >= 0 describes {t : p(t) >= p(s)}
    let q2 = delta * delta - z2 * (v0 + v1 - 2.0 * c01);
    let q1 = 2.0 * (d0 * delta - z2 * (c01 - v0));
    let q0 = d0 * d0 - z2 * v0;
    let q = |t: f64| (q2 * t + q1) * t + q0;

    let mut cuts = vec![0.0, 1.0, s];
    cuts.extend(unit_roots(q2, q1, q0));
    if delta != 0.0 {
        let crossing = -d0 / delta;
        if crossing > 0.0 && crossing < 1.0 {
            cuts.push(crossing);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    // extremes of the candidate set on each side: [lower side, upper side]
    let mut extent: [Option<(f64, f64)>; 2] = [None, None];
    let mut include = |side: bool, a: f64, b: f64| {
        let e = &mut extent[side as usize];
        *e = Some(match *e {
            None => (a, b),
            Some((lo, hi)) => (lo.min(a), hi.max(b)),
        });
    };
    include(upper_side(model, u, s), s, s);
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if q(mid) >= 0.0 {
            include(upper_side(model, u, mid), w[0], w[1]);
        }
    }
    let p = match extent {
        [Some(lower), Some(upper)] => {
            // only the points closest to the crossing matter
            if delta > 0.0 {
                pair_probability(model, u, (lower.1, false), (upper.0, true))
            } else {
                pair_probability(model, u, (upper.1, true), (lower.0, false))
            }
        }
        [Some((a, b)), None] => pair_probability(model, u, (a, false), (b, false)),
        [None, Some((a, b))] => pair_probability(model, u, (a, true), (b, true)),
        [None, None] => unreachable!("s belongs to its own candidate set"),
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Discrete contour map function at the two nodes: the node with the larger
/// marginal probability gets its marginal, the other the joint probability.
pub fn two_point_discrete(model: &TwoPointModel, u: f64) -> [f64; 2] {
    let p = [marginal_probability(model, u, 0.0), marginal_probability(model, u, 1.0)];
    let joint = pair_probability(model, u, (0.0, upper_side(model, u, 0.0)), (1.0, upper_side(model, u, 1.0)));
    if p[0] >= p[1] {
        [p[0], joint.min(p[0])]
    } else {
        [joint.min(p[1]), p[1]]
    }
}

/// Interpolated discrete function at `s`. Interior points of a segment whose
/// ends are in different level sets, or (Step/Log) that has a zero end value,
/// are eliminated and reported as 0.
pub fn two_point_interpolated(model: &TwoPointModel, u: f64, method: InterpMethod, s: f64) -> Result<f64> {
    let f = two_point_discrete(model, u);
    let mixed = upper_side(model, u, 0.0) != upper_side(model, u, 1.0);
    let needle = method != InterpMethod::Linear && (f[0] == 0.0 || f[1] == 0.0);
    if mixed || needle {
        return Ok(if s == 0.0 {
            f[0]
        } else if s == 1.0 {
            f[1]
        } else {
            0.0
        });
    }
    interpolate([f[0], f[1], f[1]], method, [1.0 - s, s, 0.0])
}

/// Interpolated versus exact `F` on a grid of positions.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub model: TwoPointModel,
    pub level: f64,
    pub method: InterpMethod,
    pub node_values: [f64; 2],
    pub grid: Vec<f64>,
    pub exact: Vec<f64>,
    pub interpolated: Vec<f64>,
    /// `interpolated - exact`.
    pub deviation: Vec<f64>,
    pub max_deviation: f64,
    pub target: f64,
    /// Grid points where the interpolation reaches the target but the exact
    /// function does not.
    pub false_inclusions: usize,
    /// Grid points where the exact function reaches the target but the
    /// interpolation does not.
    pub missed_inclusions: usize,
}

impl OracleReport {
    pub fn conservative(&self, tol: f64) -> bool {
        self.deviation.iter().all(|&d| d <= tol)
    }
}

/// Evenly spaced positions `0, 1/(n-1), ..., 1`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn compare_to_oracle(model: &TwoPointModel, u: f64, method: InterpMethod, grid: &[f64], target: f64) -> Result<OracleReport> {
    let exact = grid.iter().map(|&s| two_point_f(model, u, s)).collect::<Result<Vec<_>>>()?;
    let interpolated = grid.iter().map(|&s| two_point_interpolated(model, u, method, s)).collect::<Result<Vec<_>>>()?;
    let deviation: Vec<f64> = interpolated.iter().zip(&exact).map(|(i, e)| i - e).collect();
    let max_deviation = deviation.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let false_inclusions = interpolated.iter().zip(&exact).filter(|(i, e)| **i >= target && **e < target).count();
    let missed_inclusions = interpolated.iter().zip(&exact).filter(|(i, e)| **i < target && **e >= target).count();
    Ok(OracleReport {
        model: *model,
        level: u,
        method,
        node_values: two_point_discrete(model, u),
        grid: grid.to_vec(),
        exact,
        interpolated,
        deviation,
        max_deviation,
        target,
        false_inclusions,
        missed_inclusions,
    })
}
