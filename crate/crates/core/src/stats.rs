//! Distribution oracles and test statistics used to verify the samplers.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const MAX_ITER: usize = 500;

/// Finite nonempty collection of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    seed_range: String,
}

impl EmpiricalSample {
    pub fn new(values: Vec<f64>, seed_range: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("sample must be nonempty".into()));
        }
        if let Some(&v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("sample value {v} is not finite")));
        }
        Ok(Self {
            values,
            seed_range: seed_range.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed_range(&self) -> &str {
        &self.seed_range
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Unbiased sample variance (0 for a single observation).
    pub fn variance(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
    }
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_lower_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) || x.is_nan() || x < 0.0 {
        return Err(Error::InvalidArgument(format!("P({a}, {x}) is undefined")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        // P = e^{-x} x^a / Γ(a+1) · Σ x^n / ((a+1)…(a+n))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denom = a;
        for _ in 0..MAX_ITER {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        Ok((sum.ln() + log_prefactor).exp().min(1.0))
    } else {
        // Q via modified Lentz continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let q = (log_prefactor.exp() * h).clamp(0.0, 1.0);
        Ok(1.0 - q)
    }
}

/// CDF of the Gamma law with the given shape and scale.
pub fn gamma_cdf(shape: f64, scale: f64, x: f64) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidArgument(format!("x must be >= 0, got {x}")));
    }
    regularized_lower_gamma(shape, x / scale)
}

/// Exponential integral `E₁(s) = ∫_s^∞ t⁻¹ e⁻ᵗ dt` for `s > 0`.
///
/// Power series below 1, continued fraction from 1 upward.
pub fn exp_integral_e1(s: f64) -> Result<f64> {
    if !(s > 0.0) || s.is_nan() {
        return Err(Error::InvalidArgument(format!("E1 needs s > 0, got {s}")));
    }
    Ok(e1_unchecked(s))
}

pub(crate) fn e1_unchecked(s: f64) -> f64 {
    if s.is_infinite() {
        return 0.0;
    }
    if s < 1.0 {
        // E₁(s) = −γ − ln s − Σ_{k≥1} (−s)^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..=MAX_ITER {
            let k = k as f64;
            term *= -s / k;
            let contrib = term / k;
            sum += contrib;
            if contrib.abs() < 1e-18 {
                break;
            }
        }
        -EULER_GAMMA - s.ln() - sum
    } else {
        // E₁(s) = e^{-s} / (s + 1 − 1²/(s + 3 − 2²/(s + 5 − …)))
        let tiny = 1e-300;
        let mut b = s + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let delta = c * d;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-s).exp()
    }
}

/// Kolmogorov–Smirnov distance `sup |F_n − F|` between the empirical CDF
/// of `sample` and `cdf`, checked on both sides of each jump.
pub fn ks_statistic<F>(sample: &EmpiricalSample, cdf: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut xs = sample.values.clone();
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        acc.max(above).max(below)
    })
}

/// Pearson chi-square statistic of a two-way table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
}

impl ChiSquare {
    /// `dof + 4·√(2·dof)`: roughly four standard deviations above the mean
    /// of the reference law.
    pub fn four_sigma_threshold(&self) -> f64 {
        let k = self.dof as f64;
        k + 4.0 * (2.0 * k).sqrt()
    }
}

/// Pearson test of independence on an `r × c` table of counts.
pub fn chi_square_independence(counts: &[Vec<u64>]) -> Result<ChiSquare> {
    let rows = counts.len();
    let cols = counts.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 {
        return Err(Error::DegenerateTable(format!(
            "need at least 2×2, got {rows}×{cols}"
        )));
    }
    if counts.iter().any(|r| r.len() != cols) {
        return Err(Error::DegenerateTable("rows have unequal lengths".into()));
    }
    let row_sums: Vec<f64> = counts.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| counts.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    if let Some(i) = row_sums.iter().position(|&s| s == 0.0) {
        return Err(Error::DegenerateTable(format!("row {i} sums to zero")));
    }
    if let Some(j) = col_sums.iter().position(|&s| s == 0.0) {
        return Err(Error::DegenerateTable(format!("column {j} sums to zero")));
    }
    let total: f64 = row_sums.iter().sum();
    let mut statistic = 0.0;
    for (i, row) in counts.iter().enumerate() {
        for (j, &observed) in row.iter().enumerate() {
            let expected = row_sums[i] * col_sums[j] / total;
            let diff = observed as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    Ok(ChiSquare {
        statistic,
        dof: (rows - 1) * (cols - 1),
    })
}

/// Whether `mean` lies within `k` standard errors `√(variance/n)` of `target`.
pub fn within_sigma(mean: f64, target: f64, variance: f64, n: usize, k: f64) -> bool {
    (mean - target).abs() <= k * (variance / n as f64).sqrt()
}
