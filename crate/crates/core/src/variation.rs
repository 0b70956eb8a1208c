//! Truncated total `N`-variation `V_N(x) = sum_n ||x_{n+N} - x_n||`.
//!
//! Finitely many terms never prove `V_N < ∞`. The verdict compares the
//! increments of the partial sums over the last two decades of indices: a sum
//! whose last-decade increment is negligible, or shrinks geometrically from one
//! decade to the next, is reported as apparently finite; one whose increments
//! do not shrink is reported as apparently divergent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::Mat2;
use crate::sequences::JacobiCoefficients;
use crate::sum::NeumaierSum;
use crate::tolerance::Tolerances;
use crate::{Error, Result};

/// Distance used inside the variation sum.
pub trait VariationNorm {
    fn distance(&self, other: &Self) -> f64;
}

impl VariationNorm for f64 {
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl VariationNorm for Mat2 {
    fn distance(&self, other: &Self) -> f64 {
        (*self - *other).frobenius()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationVerdict {
    ApparentlyFinite,
    ApparentlyDivergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub name: String,
    #[serde(rename = "N")]
    pub period: usize,
    pub n_max: usize,
    pub total: f64,
    /// Increment of the partial sums over the last decade `(n_max/10, n_max]`.
    pub tail_slope: f64,
    /// Last-decade increment divided by the previous decade's increment.
    pub decade_ratio: Option<f64>,
    pub verdict: VariationVerdict,
    /// `(n, sum_{m <= n} ||x_{m+N} - x_m||)` on a sparse schedule ending at `n_max`.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub partial_sums: Vec<(usize, f64)>,
}

fn record_index(n: usize, n_max: usize) -> bool {
    if n <= 100 || n == n_max {
        return true;
    }
    // roughly ten points per decade
    let mut p = 100usize;
    while p * 10 <= n {
        p *= 10;
    }
    n % (p / 10) == 0
}

fn verdict(
    total: f64,
    last_decade: f64,
    prev_decade: f64,
    tol: &Tolerances,
) -> (VariationVerdict, Option<f64>) {
    if total == 0.0 || last_decade <= tol.variation * total {
        let ratio = (prev_decade > 0.0).then(|| last_decade / prev_decade);
        return (VariationVerdict::ApparentlyFinite, ratio);
    }
    if prev_decade <= 0.0 {
        return (VariationVerdict::Inconclusive, None);
    }
    let r = last_decade / prev_decade;
    let v = if r <= tol.variation_settling_ratio {
        VariationVerdict::ApparentlyFinite
    } else if r >= tol.variation_divergence_ratio {
        VariationVerdict::ApparentlyDivergent
    } else {
        VariationVerdict::Inconclusive
    };
    (v, Some(r))
}

/// Partial sums of `||x_{n+N} - x_n||` for `n = 0..=n_max`, with a verdict.
pub fn n_variation_partial<T, F>(
    name: &str,
    x: F,
    period: usize,
    n_max: usize,
    tol: &Tolerances,
) -> Result<VariationReport>
where
    T: VariationNorm,
    F: Fn(usize) -> Result<T>,
{
    if period == 0 {
        return Err(Error::InvalidArgument("variation period must be positive".into()));
    }
    if n_max < period {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} must be at least N = {period}"
        )));
    }
    let mark_prev = n_max / 100;
    let mark_last = n_max / 10;
    let (mut at_prev, mut at_last) = (0.0, 0.0);

    // ring buffer of the last N + 1 values
    let mut window: std::collections::VecDeque<T> = (0..period).map(&x).collect::<Result<_>>()?;
    let mut acc = NeumaierSum::new();
    let mut partial_sums = Vec::new();
    for n in 0..=n_max {
        let ahead = x(n + period)?;
        let here = window.pop_front().expect("window holds N values");
        let d = ahead.distance(&here);
        if !d.is_finite() {
            return Err(Error::NonFinite {
                what: "variation term",
                index: n,
            });
        }
        acc += d;
        window.push_back(ahead);
        let s = acc.value();
        if n == mark_prev {
            at_prev = s;
        }
        if n == mark_last {
            at_last = s;
        }
        if record_index(n, n_max) {
            partial_sums.push((n, s));
        }
    }
    let total = acc.value();
    let last_decade = total - at_last;
    let prev_decade = at_last - at_prev;
    let (verdict, decade_ratio) = verdict(total, last_decade, prev_decade, tol);
    Ok(VariationReport {
        name: name.to_string(),
        period,
        n_max,
        total,
        tail_slope: last_decade,
        decade_ratio,
        verdict,
        partial_sums,
    })
}

/// Total of `||x_{n+N} - x_n||` over `0..=n_max`, summed in parallel chunks.
pub fn n_variation_total_par<T, F>(x: F, period: usize, n_max: usize) -> Result<f64>
where
    T: VariationNorm,
    F: Fn(usize) -> Result<T> + Sync,
{
    const CHUNK: usize = 1 << 14;
    let chunks = n_max / CHUNK + 1;
    let sums = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n_max + 1);
            let mut acc = NeumaierSum::new();
            for n in lo..hi {
                acc += x(n + period)?.distance(&x(n)?);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sums
        .into_iter()
        .fold(NeumaierSum::new(), NeumaierSum::merge)
        .value())
}

/// Variation reports for the regular-regime hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularHypotheses {
    #[serde(rename = "N")]
    pub period: usize,
    pub inv_a: VariationReport,
    pub b_over_a: VariationReport,
    pub a_shift_ratio: VariationReport,
    /// `1 / a_{n_max}`, the tail estimate of `lim 1/a_n`.
    pub inv_a_last: f64,
    /// Whether `1/a_n` fell by the last decade, as a vanishing limit requires.
    pub inv_a_decreasing: bool,
}

pub fn hypothesis_report_regular(
    coeffs: &JacobiCoefficients,
    period: usize,
    n_max: usize,
    tol: &Tolerances,
) -> Result<RegularHypotheses> {
    let inv_a = n_variation_partial("1/a_n", |n| Ok(1.0 / coeffs.a(n)?), period, n_max, tol)?;
    let b_over_a = n_variation_partial(
        "b_n/a_n",
        |n| Ok(coeffs.b(n)? / coeffs.a(n)?),
        period,
        n_max,
        tol,
    )?;
    let a_shift_ratio = n_variation_partial(
        "a_{n+N}/a_n",
        |n| Ok(coeffs.a(n + period)? / coeffs.a(n)?),
        1,
        n_max,
        tol,
    )?;
    let inv_a_last = 1.0 / coeffs.a(n_max)?;
    let inv_a_decreasing = inv_a_last < 1.0 / coeffs.a(n_max / 10)?;
    Ok(RegularHypotheses {
        period,
        inv_a,
        b_over_a,
        a_shift_ratio,
        inv_a_last,
        inv_a_decreasing,
    })
}

/// Variation reports and tail limits for the critical-regime hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalHypotheses {
    #[serde(rename = "N")]
    pub period: usize,
    pub q: f64,
    pub a_diff: VariationReport,
    pub inv_a: VariationReport,
    pub b_minus_qa: VariationReport,
    /// `b_{n_max} - q a_{n_max}`.
    pub b_minus_qa_last: f64,
    /// `a_{kN+j} - a_{kN+j-1}` at the largest `k` with `kN + j <= n_max`.
    pub s: Vec<f64>,
    /// Largest deviation from `s_j` over the last decade of `k`.
    pub s_spread: Vec<f64>,
}

pub fn hypothesis_report_critical(
    coeffs: &JacobiCoefficients,
    period: usize,
    q: f64,
    n_max: usize,
    tol: &Tolerances,
) -> Result<CriticalHypotheses> {
    if !(q.abs() < 2.0) {
        return Err(Error::InvalidArgument(format!("|q| must be below 2, got {q}")));
    }
    // index shift by one: x_m = a_{m+1} - a_m
    let a_diff = n_variation_partial(
        "a_n - a_{n-1}",
        |m| Ok(coeffs.a(m + 1)? - coeffs.a(m)?),
        period,
        n_max,
        tol,
    )?;
    let inv_a = n_variation_partial("1/a_n", |n| Ok(1.0 / coeffs.a(n)?), period, n_max, tol)?;
    let b_minus_qa = n_variation_partial(
        "b_n - q a_n",
        |n| Ok(coeffs.b(n)? - q * coeffs.a(n)?),
        period,
        n_max,
        tol,
    )?;
    let b_minus_qa_last = coeffs.b(n_max)? - q * coeffs.a(n_max)?;

    let mut s = Vec::with_capacity(period);
    let mut s_spread = Vec::with_capacity(period);
    for j in 0..period {
        let k_last = (n_max - j) / period;
        let k_first = (k_last / 10).max(1);
        if k_last < 1 {
            return Err(Error::InvalidArgument(format!(
                "n_max = {n_max} too small to estimate s_{j}"
            )));
        }
        let diff = |k: usize| -> Result<f64> {
            let n = k * period + j;
            Ok(coeffs.a(n)? - coeffs.a(n - 1)?)
        };
        let last = diff(k_last)?;
        let mut spread = 0.0f64;
        for k in k_first..=k_last {
            spread = spread.max((diff(k)? - last).abs());
        }
        s.push(last);
        s_spread.push(spread);
    }
    Ok(CriticalHypotheses {
        period,
        q,
        a_diff,
        inv_a,
        b_minus_qa,
        b_minus_qa_last,
        s,
        s_spread,
    })
}
