//! Univariate and bivariate normal probabilities.

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function.
pub fn cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
    }
}

/// Probability that a standard normal falls in `(a, b)`.
///
/// Works in the tail nearest to the interval so that narrow intervals far
/// from zero keep their relative accuracy.
pub fn standard_interval(a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    if a > 0.0 {
        (cdf(-a) - cdf(-b)).max(0.0)
    } else if b < 0.0 {
        (cdf(b) - cdf(a)).max(0.0)
    } else {
        (1.0 - cdf(a) - cdf(-b)).clamp(0.0, 1.0)
    }
}

/// `P(a < X < b)` for `X ~ N(mu, sigma^2)`.
pub fn univariate_interval(mu: f64, sigma: f64, a: f64, b: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("standard deviation must be positive, got {sigma}")));
    }
    if !(a < b) {
        return Err(Error::InvalidParameter(format!("interval ({a}, {b}) is empty")));
    }
    Ok(standard_interval((a - mu) / sigma, (b - mu) / sigma))
}

/// Inverse of the standard normal distribution function (Wichura, AS 241).
pub fn inv_cdf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&AS241_A, r) / poly(&AS241_B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        poly(&AS241_C, r) / poly(&AS241_D, r)
    } else {
        let r = r - 5.0;
        poly(&AS241_E, r) / poly(&AS241_F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

fn poly(c: &[f64; 8], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

const AS241_A: [f64; 8] = [
    3.387_132_872_796_366_608,
    133.141_667_891_784_377_45,
    1_971.590_950_306_551_442_7,
    13_731.693_765_509_461_125,
    45_921.953_931_549_871_457,
    67_265.770_927_008_700_853,
    33_430.575_583_588_128_105,
    2_509.080_928_730_122_672_7,
];
const AS241_B: [f64; 8] = [
    1.0,
    42.313_330_701_600_911_252,
    687.187_007_492_057_908_3,
    5_394.196_021_424_751_107_7,
    21_213.794_301_586_595_867,
    39_307.895_800_092_710_61,
    28_729.085_735_721_942_674,
    5_226.495_278_852_545_925,
];
const AS241_C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    0.241_780_725_177_450_611_77,
    0.022_723_844_989_269_184_583_3,
    7.745_450_142_783_414_076_4e-4,
];
const AS241_D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    0.689_767_334_985_100_004_55,
    0.148_103_976_427_480_074_59,
    0.015_198_666_563_616_457_196_6,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const AS241_E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    0.296_560_571_828_504_891_23,
    0.026_532_189_526_576_123_093,
    0.001_242_660_947_388_078_438_6,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const AS241_F: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_937_69,
    0.136_929_880_922_735_805_31,
    0.014_875_361_290_850_614_852_5,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

const CDF_FLOOR: f64 = 1e-300;
const CDF_CEIL: f64 = 1.0 - 1e-16;

/// Draws a standard normal truncated to `(lo, hi)` from one uniform `u`.
///
/// Returns the draw and the probability mass of the interval. Intervals on
/// the positive side are reflected so the inverse CDF always works in the
/// lower tail, where it is accurate. A zero-mass interval yields the nearest
/// bound to zero and probability 0.
pub(crate) fn truncated_standard(lo: f64, hi: f64, u: f64) -> (f64, f64) {
    if lo > 0.0 {
        let (v, p) = truncated_standard(-hi, -lo, u);
        return (-v, p);
    }
    let pl = cdf(lo);
    let ph = cdf(hi);
    let mass = ph - pl;
    if !(mass > 0.0) {
        return (0.0f64.clamp(lo, hi), 0.0);
    }
    let c = (pl + u * (ph - pl)).clamp(CDF_FLOOR, CDF_CEIL);
    (inv_cdf(c).clamp(lo, hi), mass)
}

/// Upper orthant probability `P(X > h, Y > k)` for a standard bivariate
/// normal with correlation `r` (Genz's BVNU).
pub fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return if k == f64::NEG_INFINITY { 1.0 } else { cdf(-k) };
    }
    if k == f64::NEG_INFINITY {
        return cdf(-h);
    }
    if r == 0.0 {
        return cdf(-h) * cdf(-k);
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let (w, x): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&GL6_W, &GL6_X)
    } else if r.abs() < 0.75 {
        (&GL12_W, &GL12_X)
    } else {
        (&GL20_W, &GL20_X)
    };
    let mut k = k;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin() / 2.0;
        for (&wi, &xi) in w.iter().zip(x) {
            for t in [1.0 - xi, 1.0 + xi] {
                let sn = (asr * t).sin();
                bvn += wi * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        bvn = bvn * asr / two_pi + cdf(-h) * cdf(-k);
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let as_ = 1.0 - r * r;
            let mut a = as_.sqrt();
            let bs = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 80.0;
            let asr = -(bs / as_ + hk) / 2.0;
            if asr > -100.0 {
                bvn = a * asr.exp() * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0 + c * d * as_ * as_);
            }
            if hk > -100.0 {
                let b = bs.sqrt();
                let sp = two_pi.sqrt() * cdf(-b / a);
                bvn -= (-hk / 2.0).exp() * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
            }
            a /= 2.0;
            let mut sum = 0.0;
            for (&wi, &xi) in w.iter().zip(x) {
                for t in [1.0 - xi, 1.0 + xi] {
                    let xs = (a * t) * (a * t);
                    let asr = -(bs / xs + hk) / 2.0;
                    if asr > -100.0 {
                        let sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                        let rs = (1.0 - xs).sqrt();
                        let ep = (-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))).exp() / rs;
                        sum += wi * asr.exp() * (sp - ep);
                    }
                }
            }
            bvn = (a * sum - bvn) / two_pi;
        }
        if r > 0.0 {
            bvn += cdf(-h.max(k));
        } else if h >= k {
            bvn = -bvn;
        } else {
            let l = if h < 0.0 { cdf(k) - cdf(h) } else { cdf(-h) - cdf(-k) };
            bvn = l - bvn;
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// Rectangle probability `P(lower < Z < upper)` for a bivariate normal.
pub fn bivariate_interval(mean: [f64; 2], cov: [[f64; 2]; 2], lower: [f64; 2], upper: [f64; 2]) -> Result<f64> {
    let (s0, s1) = (cov[0][0], cov[1][1]);
    if !(s0 > 0.0 && s1 > 0.0) || (cov[0][1] - cov[1][0]).abs() > 1e-12 * (s0 * s1).sqrt() {
        return Err(Error::InvalidParameter("bivariate covariance must be symmetric with positive variances".into()));
    }
    let det = s0 * s1 - cov[0][1] * cov[1][0];
    if !(det > 0.0) {
        return Err(Error::NotPositiveDefinite { pivot: 1, value: det });
    }
    for i in 0..2 {
        if !(lower[i] < upper[i]) {
            return Err(Error::InvalidParameter(format!("interval ({}, {}) is empty", lower[i], upper[i])));
        }
    }
    let sd = [s0.sqrt(), s1.sqrt()];
    let r = (cov[0][1] / (sd[0] * sd[1])).clamp(-1.0, 1.0);
    let std = |v: f64, i: usize| if v.is_infinite() { v } else { (v - mean[i]) / sd[i] };
    let (a0, a1) = (std(lower[0], 0), std(lower[1], 1));
    let (b0, b1) = (std(upper[0], 0), std(upper[1], 1));
    let p = bvn_upper(a0, a1, r) - bvn_upper(b0, a1, r) - bvn_upper(a0, b1, r) + bvn_upper(b0, b1, r);
    Ok(p.clamp(0.0, 1.0))
}

const GL6_W: [f64; 3] = [0.171_324_492_379_170_5, 0.360_761_573_048_138_4, 0.467_913_934_572_690_4];
const GL6_X: [f64; 3] = [0.932_469_514_203_152_2, 0.661_209_386_466_264_7, 0.238_619_186_083_197_0];
const GL12_W: [f64; 6] = [
    0.047_175_336_386_511_77,
    0.106_939_325_995_318_3,
    0.160_078_328_543_346_4,
    0.203_167_426_723_065_9,
    0.233_492_536_538_354_7,
    0.249_147_045_813_402_9,
];
const GL12_X: [f64; 6] = [
    0.981_560_634_246_719_1,
    0.904_117_256_370_475_0,
    0.769_902_674_194_305_0,
    0.587_317_954_286_617_1,
    0.367_831_498_998_180_2,
    0.125_233_408_511_469_2,
];
const GL20_W: [f64; 10] = [
    0.017_614_007_139_152_12,
    0.040_601_429_800_386_94,
    0.062_672_048_334_109_06,
    0.083_276_741_576_704_75,
    0.101_930_119_817_240_4,
    0.118_194_531_961_518_4,
    0.131_688_638_449_176_6,
    0.142_096_109_318_382_1,
    0.149_172_986_472_603_7,
    0.152_753_387_130_725_9,
];
const GL20_X: [f64; 10] = [
    0.993_128_599_185_094_9,
    0.963_971_927_277_913_8,
    0.912_234_428_251_325_9,
    0.839_116_971_822_218_8,
    0.746_331_906_460_150_8,
    0.636_053_680_726_515_0,
    0.510_867_001_950_827_1,
    0.373_706_088_715_419_6,
    0.227_785_851_141_645_1,
    0.076_526_521_133_497_33,
];
