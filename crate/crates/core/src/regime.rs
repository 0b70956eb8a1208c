//! Regime classification: regular (non-degenerate), degenerate, or critical
//! with slope limits `s_j` ready for the gap computation.

use serde::{Deserialize, Serialize};

use crate::critical::{estimate_critical_limits, CriticalLimits};
use crate::regular::{estimate_regular_limits, nondegeneracy_regular, RegularLimits, RegularVerdict};
use crate::sequences::JacobiCoefficients;
use crate::tolerance::Tolerances;
use crate::Result;

/// Tail index for the slope limits `s_j`. Differences of `a_n` lose digits as
/// `a_n` grows, so this is kept well below the ratio tail index.
pub const DEFAULT_SLOPE_K_MAX: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    Regular {
        limits: RegularLimits,
        det_sym_ef: f64,
    },
    Degenerate {
        limits: RegularLimits,
        det_sym_ef: f64,
    },
    Critical {
        limits: RegularLimits,
        critical: CriticalLimits,
        slope_residual: Vec<f64>,
    },
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Regular { .. } => "regular",
            Regime::Degenerate { .. } => "degenerate",
            Regime::Critical { .. } => "critical",
        }
    }

    pub fn limits(&self) -> &RegularLimits {
        match self {
            Regime::Regular { limits, .. }
            | Regime::Degenerate { limits, .. }
            | Regime::Critical { limits, .. } => limits,
        }
    }
}

/// Estimate the limits at period `N` and classify.
pub fn classify_regime(
    coeffs: &JacobiCoefficients,
    period: usize,
    k_max: usize,
    slope_k_max: usize,
    tol: &Tolerances,
) -> Result<Regime> {
    let limits = estimate_regular_limits(coeffs, period, k_max, tol)?;
    Ok(match nondegeneracy_regular(&limits, tol) {
        RegularVerdict::NonDegenerate { det_sym_ef } => Regime::Regular { limits, det_sym_ef },
        RegularVerdict::Degenerate { det_sym_ef } => Regime::Degenerate { limits, det_sym_ef },
        RegularVerdict::Critical { k0, .. } => {
            let (critical, slope_residual) = estimate_critical_limits(coeffs, period, k0, slope_k_max)?;
            Regime::Critical {
                limits,
                critical,
                slope_residual,
            }
        }
    })
}
