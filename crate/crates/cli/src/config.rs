//! Run configuration: the coefficient family plus analysis parameters.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use jacobi_core::tolerance::Tolerances;
use jacobi_core::FamilySpec;
use serde::{Deserialize, Serialize};

pub const MIN_N_MAX: usize = 1000;

/// `λ` values: an inclusive `start..=stop` grid or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl LambdaGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            LambdaGrid::List(v) => v.clone(),
            LambdaGrid::Range { start, stop, step } => {
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| start + i as f64 * step).collect()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            LambdaGrid::List(v) => {
                if v.is_empty() {
                    bail!("lambda list is empty");
                }
                if v.iter().any(|x| !x.is_finite()) {
                    bail!("lambda values must be finite");
                }
            }
            LambdaGrid::Range { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
                    bail!("lambda grid bounds must be finite");
                }
                if !(*step > 0.0) || stop < start {
                    bail!("lambda grid needs step > 0 and stop >= start");
                }
                if (stop - start) / step > 1e6 {
                    bail!("lambda grid has more than a million points");
                }
            }
        }
        Ok(())
    }
}

fn default_lambda() -> LambdaGrid {
    LambdaGrid::Range {
        start: -2.0,
        stop: 2.0,
        step: 0.5,
    }
}

fn default_alpha_grid() -> usize {
    16
}

fn default_n_max() -> usize {
    100_000
}

fn default_k_max() -> usize {
    jacobi_core::regular::DEFAULT_K_MAX
}

fn default_slope_k_max() -> usize {
    jacobi_core::regime::DEFAULT_SLOPE_K_MAX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilySpec,
    /// Period `N`; defaults to the family's natural period.
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(default = "default_lambda")]
    pub lambda: LambdaGrid,
    /// Number of initial directions on the unit circle.
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Tail index for the ratio limits `q_j`, `r_j`.
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Tail index for the slope limits `s_j`.
    #[serde(default = "default_slope_k_max")]
    pub slope_k_max: usize,
    /// Overrides; missing fields fall back to the default profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    /// Seed for the offset of the direction grid.
    #[serde(default)]
    pub seed: u64,
    /// Output directory used when `--out` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate().context("invalid family")?;
        if self.period == Some(0) {
            bail!("N must be positive");
        }
        self.lambda.validate()?;
        if self.alpha_grid < 2 {
            bail!("alpha_grid must be at least 2");
        }
        if self.n_max < MIN_N_MAX {
            bail!("n_max = {} must be at least {MIN_N_MAX}", self.n_max);
        }
        if self.k_max < 10 || self.slope_k_max < 10 {
            bail!("k_max and slope_k_max must be at least 10");
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.period.unwrap_or_else(|| self.family.period_hint())
    }

    /// Explicit tolerances win over the named profile.
    pub fn resolve_tolerances(&self, profile: &str) -> Result<Tolerances> {
        match self.tolerances {
            Some(t) => Ok(t),
            None => Tolerances::profile(profile).map_err(Into::into),
        }
    }

    /// `alpha_grid` equally spaced directions, rotated by a seeded offset.
    pub fn directions(&self) -> Vec<[f64; 2]> {
        use rand::{Rng, SeedableRng};
        let offset: f64 = rand::rngs::StdRng::seed_from_u64(self.seed).gen();
        (0..self.alpha_grid)
            .map(|k| {
                let t = std::f64::consts::TAU * (k as f64 + offset) / self.alpha_grid as f64;
                [t.cos(), t.sin()]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_grid() {
        let c: RunConfig =
            serde_json::from_str(r#"{"family": {"family": "power", "params": {"kappa": 0.7}}}"#).unwrap();
        c.validate().unwrap();
        assert_eq!(c.period(), 1);
        assert_eq!(c.lambda.values().len(), 9);
        assert_eq!(c.directions().len(), 16);
        let g = LambdaGrid::Range { start: 0.0, stop: 1.0, step: 0.1 };
        assert_eq!(g.values().len(), 11);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"family": {"family": "power", "params": {"kappa": 2.0}}}"#,
            r#"{"family": {"family": "power", "params": {"kappa": 0.5}}, "n_max": 10}"#,
            r#"{"family": {"family": "power", "params": {"kappa": 0.5}}, "lambda": []}"#,
            r#"{"family": {"family": "power", "params": {"kappa": 0.5}}, "bogus": 1}"#,
        ] {
            let parsed: Result<RunConfig, _> = serde_json::from_str(text);
            assert!(parsed.map_err(anyhow::Error::from).and_then(|c| c.validate()).is_err(), "{text}");
        }
    }
}
