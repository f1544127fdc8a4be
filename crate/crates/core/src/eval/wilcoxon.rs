use alloc::vec::Vec;

use crate::error::invalid;
use crate::{Error, Result};

/// Largest effective sample size for which the exact null distribution is enumerated.
pub const EXACT_LIMIT: usize = 20;

/// Outcome of a paired two-sided Wilcoxon signed-rank test of `a` against `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WilcoxonResult {
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    /// Sum of (mid-)ranks of the positive differences `a - b`.
    pub w_plus: f64,
    pub p_value: f64,
    /// `+1` when `a` is significantly smaller, `-1` when significantly larger, else `0`.
    pub code: i8,
    pub alpha: f64,
    pub exact: bool,
}

/// Doubled mid-ranks of `|d|` (integers, so ties stay exact).
fn doubled_ranks(abs: &[f64]) -> (Vec<u64>, f64) {
    let n = abs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| abs[i].total_cmp(&abs[j]));
    let mut ranks = alloc::vec![0u64; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && abs[order[j + 1]] == abs[order[i]] {
            j += 1;
        }
        // positions i..=j share rank ((i+1) + (j+1)) / 2
        let r2 = (i + j + 2) as u64;
        for &o in &order[i..=j] {
            ranks[o] = r2;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    (ranks, tie_term)
}

/// Two-sided exact p-value: walks all `2^n` sign patterns in Gray-code order.
fn exact_p(ranks2: &[u64], observed2: u64) -> f64 {
    let n = ranks2.len();
    let total: u64 = 1 << n;
    let (mut below, mut above) = (0u64, 0u64);
    let mut sum = 0u64;
    let mut signs = 0u64;
    for step in 0..total {
        if step > 0 {
            let bit = step.trailing_zeros() as usize;
            signs ^= 1 << bit;
            if signs & (1 << bit) != 0 {
                sum += ranks2[bit];
            } else {
                sum -= ranks2[bit];
            }
        }
        if sum <= observed2 {
            below += 1;
        }
        if sum >= observed2 {
            above += 1;
        }
    }
    let p = 2.0 * below.min(above) as f64 / total as f64;
    p.min(1.0)
}

/// Normal approximation with tie and continuity corrections.
fn normal_p(n: usize, w_plus: f64, tie_term: f64) -> f64 {
    let nf = n as f64;
    let mu = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let diff = w_plus - mu;
    let correction = if diff > 0.0 {
        0.5
    } else if diff < 0.0 {
        -0.5
    } else {
        0.0
    };
    let z = (diff - correction) / libm::sqrt(var);
    libm::erfc(libm::fabs(z) / core::f64::consts::SQRT_2).min(1.0)
}

/// Paired two-sided Wilcoxon signed-rank test on `d_i = a_i - b_i`.
///
/// Zero differences are dropped and tied `|d|` get mid-ranks. The p-value is
/// exact for up to [`EXACT_LIMIT`] non-zero pairs, otherwise from the normal
/// approximation.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alpha: f64) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::Shape {
            context: "paired samples",
            expected: a.len(),
            found: b.len(),
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha must lie in (0, 1)"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|&d| d != 0.0).collect();
    if diffs.iter().any(|d| d.is_nan()) {
        return Err(invalid("paired samples must not contain NaN"));
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            n_effective: 0,
            w_plus: 0.0,
            p_value: 1.0,
            code: 0,
            alpha,
            exact: true,
        });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| libm::fabs(*d)).collect();
    let (ranks2, tie_term) = doubled_ranks(&abs);
    let w2: u64 = diffs
        .iter()
        .zip(&ranks2)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let w_plus = w2 as f64 / 2.0;
    let exact = n <= EXACT_LIMIT;
    let p_value = if exact {
        exact_p(&ranks2, w2)
    } else {
        normal_p(n, w_plus, tie_term)
    };
    // sum of doubled ranks is n(n+1); W+ < n(n+1)/4 means the negatives dominate
    let total2 = (n * (n + 1)) as u64;
    let code = if p_value < alpha {
        match (2 * w2).cmp(&total2) {
            core::cmp::Ordering::Less => 1,
            core::cmp::Ordering::Greater => -1,
            core::cmp::Ordering::Equal => 0,
        }
    } else {
        0
    };
    Ok(WilcoxonResult {
        n_effective: n,
        w_plus,
        p_value,
        code,
        alpha,
        exact,
    })
}
