//! Contour levels, midpoint levels and level-set assignment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a level set was placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelStrategy {
    Standard,
    Pretty,
    Explicit,
}

impl std::str::FromStr for LevelStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(Self::Standard),
            "pretty" => Ok(Self::Pretty),
            "explicit" => Ok(Self::Explicit),
            other => Err(Error::InvalidParameter(format!("unknown level strategy `{other}`"))),
        }
    }
}

/// Ordered contour levels `u_1 < ... < u_K` with their midpoint levels.
///
/// The extension levels `u_0` and `u_{K+1}` only enter the midpoints
/// `u^e_0` and `u^e_K`; for `K > 1` they continue the outer spacings and for
/// `K = 1` they sit one field range away from the single level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourLevelSet {
    levels: Vec<f64>,
    extension: [f64; 2],
    midpoints: Vec<f64>,
    spacing: f64,
    strategy: LevelStrategy,
    /// Pretty levels before trimming to the field range.
    #[serde(skip_serializing_if = "Option::is_none")]
    untrimmed: Option<Vec<f64>>,
}

impl ContourLevelSet {
    /// Explicit levels. `field_range` is `sup f - inf f`, used when `K = 1`.
    pub fn new(levels: Vec<f64>, field_range: f64) -> Result<Self> {
        let spacing = match levels.len() {
            0 | 1 => field_range / 2.0,
            k => (levels[k - 1] - levels[0]) / (k - 1) as f64,
        };
        Self::build(levels, field_range, spacing, LevelStrategy::Explicit, None)
    }

    fn build(levels: Vec<f64>, field_range: f64, spacing: f64, strategy: LevelStrategy, untrimmed: Option<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter("a contour map needs at least one level".into()));
        }
        if levels.iter().any(|u| !u.is_finite()) || levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("levels must be finite and strictly increasing".into()));
        }
        let k = levels.len();
        let extension = if k == 1 {
            if !(field_range > 0.0 && field_range.is_finite()) {
                return Err(Error::InvalidParameter(format!("a single level needs a positive field range, got {field_range}")));
            }
            [levels[0] - field_range, levels[0] + field_range]
        } else {
            [2.0 * levels[0] - levels[1], 2.0 * levels[k - 1] - levels[k - 2]]
        };
        let mut full = Vec::with_capacity(k + 2);
        full.push(extension[0]);
        full.extend_from_slice(&levels);
        full.push(extension[1]);
        let midpoints = full.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Self { levels, extension, midpoints, spacing, strategy, untrimmed })
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `u^e_0, ..., u^e_K`.
    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    /// `[u_0, u_{K+1}]` used for the outer midpoints.
    pub fn extension(&self) -> [f64; 2] {
        self.extension
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn strategy(&self) -> LevelStrategy {
        self.strategy
    }

    pub fn untrimmed(&self) -> Option<&[f64]> {
        self.untrimmed.as_deref()
    }

    /// `u_j` with `u_j = -inf` for `j <= 0` and `+inf` for `j > K`.
    pub fn level(&self, j: isize) -> f64 {
        if j <= 0 {
            f64::NEG_INFINITY
        } else if j as usize > self.k() {
            f64::INFINITY
        } else {
            self.levels[j as usize - 1]
        }
    }

    /// `u^e_j` with `-inf` for `j < 0` and `+inf` for `j > K`.
    pub fn midpoint(&self, j: isize) -> f64 {
        if j < 0 {
            f64::NEG_INFINITY
        } else if j as usize > self.k() {
            f64::INFINITY
        } else {
            self.midpoints[j as usize]
        }
    }
}

fn finite_range(f: &[f64]) -> Result<(f64, f64)> {
    if f.is_empty() {
        return Err(Error::InvalidParameter("empty field".into()));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("field contains non-finite values".into()));
    }
    let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Err(Error::ConstantField(lo));
    }
    Ok((lo, hi))
}

/// `K` evenly spaced levels strictly inside `[min f, max f]`.
pub fn standard_levels(f: &[f64], k: usize) -> Result<ContourLevelSet> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    let (lo, hi) = finite_range(f)?;
    let step = (hi - lo) / (k + 1) as f64;
    let levels = (1..=k).map(|j| lo + j as f64 * step).collect();
    ContourLevelSet::build(levels, hi - lo, step, LevelStrategy::Standard, None)
}

/// A spacing `c * 10^m` with `c` in {1, 2, 5}, kept symbolic so that level
/// values are correctly rounded decimals.
#[derive(Debug, Clone, Copy, PartialEq)]
struct NiceStep {
    c: i64,
    m: i32,
}

impl NiceStep {
    fn value(self) -> f64 {
        self.multiple(1)
    }

    /// `j * c * 10^m`.
    fn multiple(self, j: i64) -> f64 {
        let n = (j * self.c) as f64;
        if self.m >= 0 {
            n * 10f64.powi(self.m)
        } else {
            n / 10f64.powi(-self.m)
        }
    }

    /// Integer range of multiples inside `[lo, hi]`.
    fn span(self, lo: f64, hi: f64) -> (i64, i64) {
        let h = self.value();
        let mut first = (lo / h).ceil() as i64;
        let mut last = (hi / h).floor() as i64;
        // guard against rounding in the division
        while self.multiple(first) < lo {
            first += 1;
        }
        while self.multiple(first - 1) >= lo {
            first -= 1;
        }
        while self.multiple(last) > hi {
            last -= 1;
        }
        while self.multiple(last + 1) <= hi {
            last += 1;
        }
        (first, last)
    }

    fn from_value(h: f64) -> Option<Self> {
        let m0 = h.log10().floor() as i32;
        for m in [m0 - 1, m0, m0 + 1] {
            for c in [1, 2, 5] {
                let s = NiceStep { c, m };
                if (s.value() - h).abs() <= 1e-12 * h {
                    return Some(s);
                }
            }
        }
        None
    }
}

fn pretty_from_step(lo: f64, hi: f64, step: NiceStep) -> Result<ContourLevelSet> {
    let (first, last) = step.span(lo, hi);
    if first > last {
        return Err(Error::InvalidParameter(format!("no multiple of {} lies in [{lo}, {hi}]", step.value())));
    }
    let levels = (first..=last).map(|j| step.multiple(j)).collect();
    let cover_lo = (lo / step.value()).floor() as i64;
    let cover_hi = (hi / step.value()).ceil() as i64;
    let untrimmed = (cover_lo.min(first)..=cover_hi.max(last)).map(|j| step.multiple(j)).collect();
    ContourLevelSet::build(levels, hi - lo, step.value(), LevelStrategy::Pretty, Some(untrimmed))
}

/// Equally spaced levels at multiples of `c * 10^m`, `c` in {1, 2, 5}, with
/// the spacing chosen so that the number of levels inside the field range
/// is closest to `K + 1`. Ties go to the smaller spacing. Levels outside the
/// range are trimmed; the covering set is kept in [`ContourLevelSet::untrimmed`].
pub fn pretty_levels(f: &[f64], k: usize) -> Result<ContourLevelSet> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    let (lo, hi) = finite_range(f)?;
    let target = (k + 1) as i64;
    let m_center = ((hi - lo) / (k + 1) as f64).log10().floor() as i32;
    let mut best: Option<(i64, NiceStep)> = None;
    for m in m_center - 2..=m_center + 2 {
        for c in [1, 2, 5] {
            let step = NiceStep { c, m };
            let (first, last) = step.span(lo, hi);
            let count = last - first + 1;
            if count < 1 {
                continue;
            }
            let miss = (count - target).abs();
            // candidates are visited in increasing spacing, so strict
            // improvement keeps the smaller spacing on ties
            if best.is_none_or(|(b, _)| miss < b) {
                best = Some((miss, step));
            }
        }
    }
    let (_, step) = best.ok_or_else(|| Error::InvalidParameter("no pretty spacing covers the field range".into()))?;
    pretty_from_step(lo, hi, step)
}

/// Levels at every multiple of `spacing` inside the field range.
pub fn pretty_levels_with_spacing(f: &[f64], spacing: f64) -> Result<ContourLevelSet> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidParameter(format!("spacing must be positive, got {spacing}")));
    }
    let (lo, hi) = finite_range(f)?;
    match NiceStep::from_value(spacing) {
        Some(step) => pretty_from_step(lo, hi, step),
        None => {
            let first = (lo / spacing).ceil() as i64;
            let last = (hi / spacing).floor() as i64;
            if first > last {
                return Err(Error::InvalidParameter(format!("no multiple of {spacing} lies in [{lo}, {hi}]")));
            }
            let levels = (first..=last).map(|j| j as f64 * spacing).collect();
            ContourLevelSet::build(levels, hi - lo, spacing, LevelStrategy::Pretty, None)
        }
    }
}

/// Node-wise level-set membership: node `i` belongs to `G_{sets[i]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelAssignment {
    pub sets: Vec<usize>,
    pub values: Vec<f64>,
    /// Nodes whose value equals a level exactly (assigned to the set below).
    pub ties: Vec<usize>,
}

/// `k_i = #{k : u_k < f_i}`, so values equal to a level join the lower set.
pub fn assign_level_sets(f: &[f64], levels: &ContourLevelSet) -> LevelAssignment {
    let u = levels.levels();
    let mut ties = Vec::new();
    let sets = f
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let k = u.partition_point(|&l| l < v);
            if k < u.len() && u[k] == v {
                ties.push(i);
            }
            k
        })
        .collect();
    LevelAssignment { sets, values: f.to_vec(), ties }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_examples() {
        let l = standard_levels(&[0.0, 4.0, 1.3], 3).unwrap();
        assert_eq!(l.levels(), &[1.0, 2.0, 3.0]);
        assert_eq!(l.extension(), [0.0, 4.0]);
        assert_eq!(l.midpoints(), &[0.5, 1.5, 2.5, 3.5]);
        let l1 = standard_levels(&[0.0, 4.0], 1).unwrap();
        assert_eq!(l1.levels(), &[2.0]);
        assert_eq!(l1.spacing(), 2.0);
        assert_eq!(l1.extension(), [-2.0, 6.0]);
        assert_eq!(l1.midpoints(), &[0.0, 4.0]);
        assert!(matches!(standard_levels(&[1.0, 1.0], 2), Err(Error::ConstantField(_))));
    }

    #[test]
    fn pretty_examples() {
        let l = pretty_levels(&[0.1, 9.7], 5).unwrap();
        assert_eq!(l.spacing(), 2.0);
        assert_eq!(l.levels(), &[2.0, 4.0, 6.0, 8.0]);
        assert_eq!(l.untrimmed().unwrap(), &[0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        let m = pretty_levels(&[-1.2, 1.3], 3).unwrap();
        assert_eq!(m.spacing(), 0.5);
        assert_eq!(m.levels(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn pretty_scale_equivariance() {
        let a = pretty_levels(&[0.0, 10.0], 4).unwrap();
        let b = pretty_levels(&[0.0, 100.0], 4).unwrap();
        assert_eq!(a.k(), b.k());
        for (x, y) in a.levels().iter().zip(b.levels()) {
            assert!((10.0 * x - y).abs() < 1e-12);
        }
        assert_eq!(b.spacing(), 10.0 * a.spacing());
    }

    #[test]
    fn pretty_with_spacing_is_exact_decimal() {
        let l = pretty_levels_with_spacing(&[-0.93, 1.07], 0.2).unwrap();
        assert_eq!(l.levels(), &[-0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        assert!(pretty_levels_with_spacing(&[0.1, 0.2], 2.0).is_err());
    }

    #[test]
    fn assignment_rules() {
        let l = ContourLevelSet::new(vec![1.0, 2.0], 3.0).unwrap();
        let a = assign_level_sets(&[0.5, 1.5, 3.0, 2.0, -7.0], &l);
        assert_eq!(a.sets, vec![0, 1, 2, 1, 0]);
        assert_eq!(a.ties, vec![3]);
    }

    #[test]
    fn boundary_conventions() {
        let l = ContourLevelSet::new(vec![1.0, 2.0, 4.0], 5.0).unwrap();
        assert_eq!(l.level(0), f64::NEG_INFINITY);
        assert_eq!(l.level(1), 1.0);
        assert_eq!(l.level(4), f64::INFINITY);
        assert_eq!(l.extension(), [0.0, 6.0]);
        assert_eq!(l.midpoint(-1), f64::NEG_INFINITY);
        assert_eq!(l.midpoint(0), 0.5);
        assert_eq!(l.midpoint(3), 5.0);
        assert_eq!(l.midpoint(4), f64::INFINITY);
        assert!(ContourLevelSet::new(vec![2.0, 1.0], 1.0).is_err());
    }
}
