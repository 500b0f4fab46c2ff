//! Numerical building blocks: compensated summation and log-binomials.

use std::f64::consts::PI;
use std::ops::AddAssign;

use rayon::prelude::*;

/// Neumaier's variant of Kahan summation.
///
/// The running compensation also captures the error when an addend is larger
/// in magnitude than the partial sum, which plain Kahan summation loses.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum into this one, keeping both compensations.
    pub fn merge(&mut self, other: CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, x: f64) {
        self.add(x);
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        s.extend(iter);
        s
    }
}

/// Chunk length for parallel reductions. Chunk boundaries depend only on the
/// input length, so the result is identical for any thread count.
const REDUCE_CHUNK: usize = 1 << 15;

/// Compensated sum of `f(x)` over `values`, reduced in parallel over fixed
/// chunks and combined in order.
pub fn par_compensated_sum<F>(values: &[f64], f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    if values.len() <= REDUCE_CHUNK {
        return values.iter().map(|&x| f(x)).collect::<CompensatedSum>().value();
    }
    let partials: Vec<CompensatedSum> = values
        .par_chunks(REDUCE_CHUNK)
        .map(|chunk| chunk.iter().map(|&x| f(x)).collect())
        .collect();
    let mut total = CompensatedSum::new();
    for p in partials {
        total.merge(p);
    }
    total.value()
}

/// Largest `n` for which binomials are evaluated in exact integer arithmetic.
/// `C(120, 60) * 120` still fits in a `u128`.
const EXACT_BINOMIAL_MAX_N: u64 = 120;

/// Natural log of the binomial coefficient `C(n, k)`.
///
/// Returns `-inf` for `k < 0` or `k > n` (zero weight). For `n ≤ 120` the
/// coefficient is formed exactly in integer arithmetic and rounded once; above
/// that the Stirling-series form with `ln1p` is used, in which every large
/// term is positive so no cancellation occurs.
pub fn log_binomial(n: u64, k: i64) -> f64 {
    if k < 0 || k as u64 > n {
        return f64::NEG_INFINITY;
    }
    let k = k as u64;
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if n <= EXACT_BINOMIAL_MAX_N {
        let mut c: u128 = 1;
        for i in 0..k {
            c = c * (n - i) as u128 / (i + 1) as u128;
        }
        return (c as f64).ln();
    }
    let (nf, kf) = (n as f64, k as f64);
    let rest = nf - kf;
    // ln C(n,k) = k ln(n/k) + (n-k) ln(n/(n-k)) - ½ ln(2π k (n-k)/n)
    //             + δ(n) - δ(k) - δ(n-k),  δ = Stirling remainder.
    kf * (nf / kf).ln() - rest * (-kf / nf).ln_1p() - 0.5 * (2.0 * PI * kf * (rest / nf)).ln()
        + stirling_remainder(nf)
        - stirling_remainder(kf)
        - stirling_remainder(rest)
}

/// `ln Γ(x+1) - [(x+½) ln x - x + ½ ln 2π]` for `x ≥ 1`.
fn stirling_remainder(x: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if x <= 15.0 {
        return libm::lgamma(x + 1.0) - (x + 0.5) * x.ln() + x - 0.5 * (2.0 * PI).ln();
    }
    let x2 = x * x;
    (S0 - (S1 - (S2 - (S3 - S4 / x2) / x2) / x2) / x2) / x
}

/// `ln(x!)` for integer `x`, via the log-gamma function.
pub fn log_factorial(x: u64) -> f64 {
    libm::lgamma(x as f64 + 1.0)
}
