//! Numerical tolerances shared by the analyses.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Every threshold a verdict depends on. Reports embed the profile they used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// A tail-estimated limit is accepted when its residual is below this.
    pub limit_acceptance: f64,
    /// `|q - 2cos(k0 π/N)|` and `|r_j - 1|` bound for the critical pattern.
    pub critical_detection: f64,
    /// `det(sym(E F))` must exceed this to count as non-degenerate.
    pub nondegeneracy: f64,
    /// `|det F - 1|` bound for the trace shortcut.
    pub unit_determinant: f64,
    /// Last-decade variation increment, relative to the total.
    pub variation: f64,
    /// Decade-over-decade increment ratio at or below which a variation sum counts as settling.
    pub variation_settling_ratio: f64,
    /// Decade-over-decade increment ratio at or above which a variation sum counts as divergent.
    pub variation_divergence_ratio: f64,
    /// Last-decade relative change of the Turán trace.
    pub trace_convergence: f64,
    /// Last-decade relative change of the Ignjatović ratio.
    pub ignjatovic: f64,
    /// Relative oscillation allowed in a per-residue limit profile.
    pub profile_oscillation: f64,
    /// Carleman partial sums above this count as divergent.
    pub divergence_threshold: f64,
    /// Per-step slope of `log ρ_n` that flags exponential growth.
    pub growth_rate: f64,
    /// Slope of `log ρ_n` against `log n` that flags power-law growth.
    pub growth_exponent: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            limit_acceptance: 1e-6,
            critical_detection: 1e-8,
            nondegeneracy: 1e-12,
            unit_determinant: 1e-10,
            variation: 1e-8,
            variation_settling_ratio: 0.5,
            variation_divergence_ratio: 0.8,
            trace_convergence: 1e-6,
            ignjatovic: 1e-2,
            profile_oscillation: 1e-2,
            divergence_threshold: 1e3,
            growth_rate: 1e-3,
            growth_exponent: 0.5,
        }
    }
}

impl Tolerances {
    /// Named profiles: `strict` tightens every tolerance tenfold, `loose`
    /// relaxes it tenfold. Thresholds that are not tolerances stay fixed.
    pub fn profile(name: &str) -> Result<Self> {
        let factor = match name {
            "default" => 1.0,
            "strict" => 0.1,
            "loose" => 10.0,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown tolerance profile {other:?} (expected strict, default or loose)"
                )))
            }
        };
        let d = Self::default();
        Ok(Self {
            limit_acceptance: d.limit_acceptance * factor,
            critical_detection: d.critical_detection * factor,
            nondegeneracy: d.nondegeneracy * factor,
            unit_determinant: d.unit_determinant * factor,
            variation: d.variation * factor,
            trace_convergence: d.trace_convergence * factor,
            ignjatovic: d.ignjatovic * factor,
            profile_oscillation: d.profile_oscillation * factor,
            ..d
        })
    }
}
