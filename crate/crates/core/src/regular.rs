//! The regular regime: limits `q_j = lim b_{kN+j}/a_{kN+j}`,
//! `r_j = lim a_{kN+j-1}/a_{kN+j}`, the product `F = B_{N-1} ··· B_0` of the
//! limiting transfer matrices `B_j = [[0, 1], [-r_j, -q_j]]`, and the sign test
//! `det(sym(E F)) > 0`.

use serde::{Deserialize, Serialize};

use crate::chebyshev::critical_q;
use crate::linalg::{det_sym_e, Mat2};
use crate::sequences::JacobiCoefficients;
use crate::tolerance::Tolerances;
use crate::{Error, Result};

/// Default tail index for limit estimation. Ratios such as `(k/(k+1))^κ`
/// approach their limits like `1/k`, so critical detection at `1e-8` needs
/// `k` well beyond `1e8`.
pub const DEFAULT_K_MAX: usize = 1_000_000_000;

/// Samples per residue over the last decade of `k`.
const TAIL_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularLimits {
    #[serde(rename = "N")]
    pub period: usize,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    #[serde(rename = "F")]
    pub f: Mat2,
    #[serde(rename = "det_sym_EF")]
    pub det_sym_ef: f64,
    /// Largest tail deviation of each `q_j` subsequence from its estimate.
    pub residual_q: Vec<f64>,
    pub residual_r: Vec<f64>,
    /// Tail index the estimates were read at, when estimated.
    pub k_max: Option<usize>,
}

/// `[[0, 1], [-r, -q]]`.
pub fn limit_transfer(q: f64, r: f64) -> Mat2 {
    Mat2::new(0.0, 1.0, -r, -q)
}

/// `B_{j-1} ··· B_0 B_{N-1} ··· B_j`, the product started at residue `j`.
pub fn rotated_product(q: &[f64], r: &[f64], j: usize) -> Mat2 {
    let n = q.len();
    (0..n).fold(Mat2::IDENTITY, |acc, i| {
        let k = (j + i) % n;
        limit_transfer(q[k], r[k]) * acc
    })
}

impl RegularLimits {
    /// Build from exact limits.
    pub fn from_limits(q: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if q.is_empty() || q.len() != r.len() {
            return Err(Error::InvalidArgument(format!(
                "q and r must be non-empty and of equal length, got {} and {}",
                q.len(),
                r.len()
            )));
        }
        if let Some((residue, &value)) = r.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonPositiveRatioLimit { residue, value });
        }
        let f = rotated_product(&q, &r, 0);
        Ok(Self {
            period: q.len(),
            det_sym_ef: det_sym_e(&f),
            f,
            residual_q: vec![0.0; q.len()],
            residual_r: vec![0.0; q.len()],
            q,
            r,
            k_max: None,
        })
    }

    /// Whether every residual is below the acceptance tolerance.
    pub fn accepted(&self, tol: &Tolerances) -> bool {
        self.residual_q
            .iter()
            .chain(&self.residual_r)
            .all(|&e| e < tol.limit_acceptance)
    }
}

/// Value at `k_max` and the largest deviation from it over the last decade of `k`.
pub(crate) fn tail_limit<F>(x: F, k_max: usize) -> Result<(f64, f64)>
where
    F: Fn(usize) -> Result<f64>,
{
    let last = x(k_max)?;
    let k_lo = (k_max / 10).max(1);
    let ratio = k_max as f64 / k_lo as f64;
    let mut spread = 0.0f64;
    for i in 0..TAIL_SAMPLES {
        let k = (k_lo as f64 * ratio.powf(i as f64 / TAIL_SAMPLES as f64)).round() as usize;
        spread = spread.max((x(k.clamp(k_lo, k_max))? - last).abs());
    }
    Ok((last, spread))
}

/// Estimate `q_j` and `r_j` from the subsequences at `k` up to `k_max`.
///
/// The estimate is the subsequence value at `k_max`; the residual is the largest
/// deviation from it over the last decade of `k`.
pub fn estimate_regular_limits(
    coeffs: &JacobiCoefficients,
    period: usize,
    k_max: usize,
    tol: &Tolerances,
) -> Result<RegularLimits> {
    if period == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    if k_max < 10 {
        return Err(Error::InvalidArgument(format!("k_max = {k_max} must be at least 10")));
    }
    let mut q = Vec::with_capacity(period);
    let mut r = Vec::with_capacity(period);
    let mut residual_q = Vec::with_capacity(period);
    let mut residual_r = Vec::with_capacity(period);
    for j in 0..period {
        let (qj, eq) = tail_limit(
            |k| {
                let n = k * period + j;
                Ok(coeffs.b(n)? / coeffs.a(n)?)
            },
            k_max,
        )?;
        let (rj, er) = tail_limit(
            |k| {
                let n = k * period + j;
                Ok(coeffs.a(n - 1)? / coeffs.a(n)?)
            },
            k_max,
        )?;
        if rj <= tol.limit_acceptance {
            return Err(Error::NonPositiveRatioLimit {
                residue: j,
                value: rj,
            });
        }
        q.push(qj);
        r.push(rj);
        residual_q.push(eq);
        residual_r.push(er);
    }
    let mut limits = RegularLimits::from_limits(q, r)?;
    limits.residual_q = residual_q;
    limits.residual_r = residual_r;
    limits.k_max = Some(k_max);
    Ok(limits)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RegularVerdict {
    NonDegenerate { det_sym_ef: f64 },
    Degenerate { det_sym_ef: f64 },
    Critical { q: f64, k0: usize },
}

/// The `k0 ∈ 1..N` with `2cos(k0 π/N)` nearest to `q`, if within `tolerance`.
pub fn match_critical_q(period: usize, q: f64, tolerance: f64) -> Option<usize> {
    (1..period)
        .map(|k0| (k0, (q - critical_q(period, k0)).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .filter(|&(_, d)| d < tolerance)
        .map(|(k0, _)| k0)
}

/// Classify the limits: the critical pattern (`r_j = 1`, all `q_j` equal to a
/// zero of `w_{N-1}`) first, then the sign of `det(sym(E F))`.
pub fn nondegeneracy_regular(limits: &RegularLimits, tol: &Tolerances) -> RegularVerdict {
    let eps = tol.critical_detection;
    let q0 = limits.q[0];
    let unit_ratios = limits.r.iter().all(|r| (r - 1.0).abs() < eps);
    let equal_q = limits.q.iter().all(|q| (q - q0).abs() < eps);
    if unit_ratios && equal_q {
        if let Some(k0) = match_critical_q(limits.period, q0, eps) {
            return RegularVerdict::Critical {
                q: critical_q(limits.period, k0),
                k0,
            };
        }
    }
    if limits.det_sym_ef > tol.nondegeneracy {
        RegularVerdict::NonDegenerate {
            det_sym_ef: limits.det_sym_ef,
        }
    } else {
        RegularVerdict::Degenerate {
            det_sym_ef: limits.det_sym_ef,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShortcutVerdict {
    pub nondegenerate: bool,
    /// `-(tr F - 2)(tr F + 2) / 4`, equal to `det(sym(E F))` when `det F = 1`.
    pub value: f64,
}

/// For `det F = 1`, non-degeneracy is `|tr F| < 2`. `None` when `det F` is not 1.
pub fn shortcut_trace_test(f: &Mat2, tol: &Tolerances) -> Option<ShortcutVerdict> {
    if (f.det() - 1.0).abs() >= tol.unit_determinant {
        return None;
    }
    let t = f.trace();
    Some(ShortcutVerdict {
        nondegenerate: t.abs() < 2.0,
        value: -(t - 2.0) * (t + 2.0) / 4.0,
    })
}
