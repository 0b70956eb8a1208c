//! Recurrence coefficient families `(a_n, b_n)`.
//!
//! A [`FamilySpec`] is the serializable description of a family; building a
//! [`JacobiCoefficients`] from it validates the parameters. The JSON form is
//! `{"family": "<name>", "params": {...}}` with snake_case names; families that
//! wrap another sequence (`multiple_weights`, `additive_periodic`, `modulated`)
//! take it as a nested `base` object of the same shape, whose `a_n` plays the
//! role of `ã_n` and whose `b_n` plays the role of `b̃_n`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::sum::NeumaierSum;
use crate::{Error, Result};

fn one() -> f64 {
    1.0
}

/// Serializable description of a coefficient family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `a_n = scale (n + 1)^kappa`, `b_n = q a_n`, `kappa ∈ (0, 1]`.
    Power {
        kappa: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        q: f64,
    },
    /// `a_{kN + j} = ã_k` for `j = 0..N-1`, `b_n = q a_n`.
    MultipleWeights {
        period: usize,
        base: Box<FamilySpec>,
        #[serde(default)]
        q: f64,
    },
    /// `a_n = ã_n + d_{n mod N}` with `N = d.len()`, `b_n = q a_n`.
    AdditivePeriodic {
        d: Vec<f64>,
        base: Box<FamilySpec>,
        #[serde(default)]
        q: f64,
    },
    /// `a_n = alpha_{n mod N} ã_n`, `b_n = beta_{n mod N} b̃_n`.
    Modulated {
        alpha: Vec<f64>,
        beta: Vec<f64>,
        base: Box<FamilySpec>,
    },
    /// Generalized Hermite: `a_n = sqrt((n + 1 + d_n) / 2)`, `d_{2k} = t`, `d_{2k+1} = 0`, `b_n = 0`.
    GenHermite { t: f64 },
    /// Meixner-Pollaczek: `a_n = sqrt((n + 1)(n + 2 lambda)) / (2 sin phi)`, `b_n = (n + lambda) / tan phi`.
    MeixnerPollaczek { lambda: f64, phi: f64 },
    /// Freud: `a_n = (c_prime + r_n)(n + 1)^(1/beta)`, `b_n = 0`, with `r_n = 0` past the table.
    Freud {
        beta: f64,
        c_prime: f64,
        #[serde(default)]
        r: Vec<f64>,
    },
    /// Finite tables continued by a tail rule.
    Explicit { a: Vec<f64>, b: Vec<f64>, tail: Tail },
}

/// Continuation of an explicit table past its last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    /// The last `period` entries repeat.
    Periodic { period: usize },
    /// `a_n = a_last + slope_a (n - n_last)`, `b_n = b_last + slope_b (n - n_last)`.
    Affine {
        slope_a: f64,
        #[serde(default)]
        slope_b: f64,
    },
}

fn invalid(family: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        family,
        reason: reason.into(),
    }
}

impl FamilySpec {
    pub fn tag(&self) -> &'static str {
        match self {
            FamilySpec::Power { .. } => "power",
            FamilySpec::MultipleWeights { .. } => "multiple_weights",
            FamilySpec::AdditivePeriodic { .. } => "additive_periodic",
            FamilySpec::Modulated { .. } => "modulated",
            FamilySpec::GenHermite { .. } => "gen_hermite",
            FamilySpec::MeixnerPollaczek { .. } => "meixner_pollaczek",
            FamilySpec::Freud { .. } => "freud",
            FamilySpec::Explicit { .. } => "explicit",
        }
    }

    /// Natural period of the family.
    pub fn period_hint(&self) -> usize {
        match self {
            FamilySpec::MultipleWeights { period, .. } => *period,
            FamilySpec::AdditivePeriodic { d, .. } => d.len(),
            FamilySpec::Modulated { alpha, .. } => alpha.len(),
            FamilySpec::GenHermite { .. } => 2,
            FamilySpec::Explicit {
                tail: Tail::Periodic { period },
                ..
            } => *period,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tag = self.tag();
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(invalid(tag, format!("{what} must be finite")))
            }
        };
        match self {
            FamilySpec::Power { kappa, scale, q } => {
                if !(*kappa > 0.0 && *kappa <= 1.0) {
                    return Err(invalid(tag, format!("kappa = {kappa} outside (0, 1]")));
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(invalid(tag, format!("scale = {scale} must be positive")));
                }
                finite(*q, "q")
            }
            FamilySpec::MultipleWeights { period, base, q } => {
                if *period == 0 {
                    return Err(invalid(tag, "period must be at least 1"));
                }
                finite(*q, "q")?;
                base.validate()
            }
            FamilySpec::AdditivePeriodic { d, base, q } => {
                if d.is_empty() {
                    return Err(invalid(tag, "d must be non-empty"));
                }
                for &x in d {
                    finite(x, "d")?;
                }
                finite(*q, "q")?;
                base.validate()
            }
            FamilySpec::Modulated { alpha, beta, base } => {
                if alpha.is_empty() || alpha.len() != beta.len() {
                    return Err(invalid(
                        tag,
                        format!(
                            "alpha and beta must have the same non-zero length (got {} and {})",
                            alpha.len(),
                            beta.len()
                        ),
                    ));
                }
                if let Some(x) = alpha.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                    return Err(invalid(tag, format!("alpha entries must be positive, got {x}")));
                }
                for &x in beta {
                    finite(x, "beta")?;
                }
                base.validate()
            }
            FamilySpec::GenHermite { t } => {
                if !(*t > -1.0 && t.is_finite()) {
                    return Err(invalid(tag, format!("t = {t} must exceed -1")));
                }
                Ok(())
            }
            FamilySpec::MeixnerPollaczek { lambda, phi } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(invalid(tag, format!("lambda = {lambda} must be positive")));
                }
                if !(*phi > 0.0 && *phi < std::f64::consts::PI) {
                    return Err(invalid(tag, format!("phi = {phi} outside (0, pi)")));
                }
                Ok(())
            }
            FamilySpec::Freud { beta, c_prime, r } => {
                if !(*beta > 0.0 && beta.is_finite()) {
                    return Err(invalid(tag, format!("beta = {beta} must be positive")));
                }
                if !(*c_prime > 0.0 && c_prime.is_finite()) {
                    return Err(invalid(tag, format!("c_prime = {c_prime} must be positive")));
                }
                for &x in r {
                    finite(x, "r")?;
                }
                Ok(())
            }
            FamilySpec::Explicit { a, b, tail } => {
                if a.is_empty() || a.len() != b.len() {
                    return Err(invalid(
                        tag,
                        "a and b tables must be non-empty and of equal length",
                    ));
                }
                for &x in a.iter().chain(b) {
                    finite(x, "table entries")?;
                }
                match tail {
                    Tail::Periodic { period } if *period == 0 || *period > a.len() => Err(invalid(
                        tag,
                        format!("periodic tail period {period} must be in 1..={}", a.len()),
                    )),
                    Tail::Affine { slope_a, slope_b } => {
                        finite(*slope_a, "slope_a")?;
                        finite(*slope_b, "slope_b")
                    }
                    _ => Ok(()),
                }
            }
        }
    }

    fn a_raw(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            FamilySpec::Power { kappa, scale, .. } => scale * (nf + 1.0).powf(*kappa),
            FamilySpec::MultipleWeights { period, base, .. } => base.a_raw(n / period),
            FamilySpec::AdditivePeriodic { d, base, .. } => base.a_raw(n) + d[n % d.len()],
            FamilySpec::Modulated { alpha, base, .. } => alpha[n % alpha.len()] * base.a_raw(n),
            FamilySpec::GenHermite { t } => {
                let d = if n % 2 == 0 { *t } else { 0.0 };
                ((nf + 1.0 + d) / 2.0).sqrt()
            }
            FamilySpec::MeixnerPollaczek { lambda, phi } => {
                ((nf + 1.0) * (nf + 2.0 * lambda)).sqrt() / (2.0 * phi.sin())
            }
            FamilySpec::Freud { beta, c_prime, r } => {
                let rn = r.get(n).copied().unwrap_or(0.0);
                (c_prime + rn) * (nf + 1.0).powf(1.0 / beta)
            }
            FamilySpec::Explicit { a, tail, .. } => table_value(a, tail, n, true),
        }
    }

    fn b_raw(&self, n: usize) -> f64 {
        match self {
            FamilySpec::Power { q, .. } => {
                if *q == 0.0 {
                    0.0
                } else {
                    q * self.a_raw(n)
                }
            }
            FamilySpec::MultipleWeights { q, .. } | FamilySpec::AdditivePeriodic { q, .. } => {
                if *q == 0.0 {
                    0.0
                } else {
                    q * self.a_raw(n)
                }
            }
            FamilySpec::Modulated { beta, base, .. } => beta[n % beta.len()] * base.b_raw(n),
            FamilySpec::GenHermite { .. } | FamilySpec::Freud { .. } => 0.0,
            FamilySpec::MeixnerPollaczek { lambda, phi } => {
                // cot(pi/2) is exactly zero; the floating-point value is not
                if (phi - FRAC_PI_2).abs() <= 4.0 * f64::EPSILON {
                    0.0
                } else {
                    (n as f64 + lambda) * phi.cos() / phi.sin()
                }
            }
            FamilySpec::Explicit { b, tail, .. } => table_value(b, tail, n, false),
        }
    }

    fn envelope(&self) -> Option<PowerEnvelope> {
        match self {
            FamilySpec::Power { kappa, scale, .. } => Some(PowerEnvelope {
                start: 0,
                exponent: *kappa,
                lower: Some(*scale),
                upper: Some(*scale),
            }),
            FamilySpec::MultipleWeights { period, base, .. } => {
                let e = base.envelope()?;
                let n = *period as f64;
                Some(PowerEnvelope {
                    start: e.start * period,
                    exponent: e.exponent,
                    lower: e.lower.map(|c| c * n.powf(-e.exponent)),
                    upper: e.upper,
                })
            }
            FamilySpec::AdditivePeriodic { d, base, .. } => {
                let e = base.envelope()?;
                let dmax = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
                let upper = e.upper.map(|c| c + dmax.max(0.0));
                let (lower, start) = match e.lower {
                    Some(c) if dmin >= 0.0 => (Some(c), e.start),
                    Some(c) if e.exponent > 0.0 => {
                        let from = (2.0 * dmin.abs() / c).powf(1.0 / e.exponent).ceil() as usize;
                        (Some(0.5 * c), e.start.max(from))
                    }
                    _ => (None, e.start),
                };
                Some(PowerEnvelope {
                    start,
                    exponent: e.exponent,
                    lower,
                    upper,
                })
            }
            FamilySpec::Modulated { alpha, base, .. } => {
                let e = base.envelope()?;
                let lo = alpha.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Some(PowerEnvelope {
                    lower: e.lower.map(|c| c * lo),
                    upper: e.upper.map(|c| c * hi),
                    ..e
                })
            }
            FamilySpec::GenHermite { t } => Some(PowerEnvelope {
                start: 0,
                exponent: 0.5,
                lower: Some((0.5 * (1.0 + t.min(0.0))).sqrt()),
                upper: Some((0.5 * (1.0 + t.max(0.0))).sqrt()),
            }),
            FamilySpec::MeixnerPollaczek { lambda, phi } => {
                let s = 2.0 * phi.sin();
                Some(PowerEnvelope {
                    start: 0,
                    exponent: 1.0,
                    lower: Some((2.0 * lambda).min(1.0).sqrt() / s),
                    upper: Some((2.0 * lambda).max(1.0).sqrt() / s),
                })
            }
            FamilySpec::Freud { beta, c_prime, r } => Some(PowerEnvelope {
                start: r.len(),
                exponent: 1.0 / beta,
                lower: Some(*c_prime),
                upper: Some(*c_prime),
            }),
            FamilySpec::Explicit { a, tail, .. } => match tail {
                Tail::Periodic { period } => {
                    let block = &a[a.len() - period..];
                    Some(PowerEnvelope {
                        start: a.len(),
                        exponent: 0.0,
                        lower: Some(block.iter().copied().fold(f64::INFINITY, f64::min)),
                        upper: Some(block.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                    })
                }
                Tail::Affine { slope_a, .. } if *slope_a > 0.0 => Some(PowerEnvelope {
                    start: a.len(),
                    exponent: 1.0,
                    lower: None,
                    upper: Some(a[a.len() - 1] + slope_a),
                }),
                Tail::Affine { slope_a, .. } if *slope_a == 0.0 => Some(PowerEnvelope {
                    start: a.len(),
                    exponent: 0.0,
                    lower: None,
                    upper: Some(a[a.len() - 1]),
                }),
                Tail::Affine { .. } => None,
            },
        }
    }
}

fn table_value(table: &[f64], tail: &Tail, n: usize, is_a: bool) -> f64 {
    let len = table.len();
    if n < len {
        return table[n];
    }
    match tail {
        Tail::Periodic { period } => table[len - period + (n - len) % period],
        Tail::Affine { slope_a, slope_b } => {
            let slope = if is_a { slope_a } else { slope_b };
            table[len - 1] + slope * (n - (len - 1)) as f64
        }
    }
}

/// Eventual bounds `lower (n+1)^exponent <= a_n <= upper (n+1)^exponent` for `n >= start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEnvelope {
    pub start: usize,
    pub exponent: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

type CoefFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    Family(FamilySpec),
    Custom { a: CoefFn, b: CoefFn },
    Prepended {
        a_head: Vec<f64>,
        b_head: Vec<f64>,
        base: Arc<JacobiCoefficients>,
    },
}

/// A validated coefficient generator with a period hint `N`.
///
/// Generators are stateless closed forms: queries are deterministic and the
/// type is safe to share across threads.
#[derive(Clone)]
pub struct JacobiCoefficients {
    source: Source,
    period_hint: usize,
    tag: String,
}

impl fmt::Debug for JacobiCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("JacobiCoefficients");
        d.field("tag", &self.tag).field("period_hint", &self.period_hint);
        if let Source::Family(spec) = &self.source {
            d.field("spec", spec);
        }
        d.finish()
    }
}

impl JacobiCoefficients {
    /// Validate a family and build its generator.
    pub fn new(spec: FamilySpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            period_hint: spec.period_hint(),
            tag: spec.tag().to_string(),
            source: Source::Family(spec),
        })
    }

    /// User-defined sequences given as closures.
    pub fn from_fns<A, B>(a: A, b: B, period_hint: usize) -> Self
    where
        A: Fn(usize) -> f64 + Send + Sync + 'static,
        B: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            source: Source::Custom {
                a: Arc::new(a),
                b: Arc::new(b),
            },
            period_hint: period_hint.max(1),
            tag: "custom".to_string(),
        }
    }

    /// Coefficients `ã, b̃` with the given head entries followed by `self`:
    /// `ã_{n + head.len()} = a_n`.
    pub fn prepend(&self, a_head: Vec<f64>, b_head: Vec<f64>) -> Result<Self> {
        if a_head.len() != b_head.len() {
            return Err(Error::InvalidArgument(
                "prepended a and b heads differ in length".into(),
            ));
        }
        if let Some((i, &v)) = a_head.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonPositiveCoefficient { index: i, value: v });
        }
        Ok(Self {
            source: Source::Prepended {
                a_head,
                b_head,
                base: Arc::new(self.clone()),
            },
            period_hint: self.period_hint,
            tag: format!("prepended({})", self.tag),
        })
    }

    pub fn with_period_hint(mut self, period: usize) -> Self {
        self.period_hint = period.max(1);
        self
    }

    pub fn period_hint(&self) -> usize {
        self.period_hint
    }

    pub fn family_tag(&self) -> &str {
        &self.tag
    }

    pub fn spec(&self) -> Option<&FamilySpec> {
        match &self.source {
            Source::Family(s) => Some(s),
            _ => None,
        }
    }

    fn a_raw(&self, n: usize) -> f64 {
        match &self.source {
            Source::Family(s) => s.a_raw(n),
            Source::Custom { a, .. } => a(n),
            Source::Prepended { a_head, base, .. } => {
                if n < a_head.len() {
                    a_head[n]
                } else {
                    base.a_raw(n - a_head.len())
                }
            }
        }
    }

    fn b_raw(&self, n: usize) -> f64 {
        match &self.source {
            Source::Family(s) => s.b_raw(n),
            Source::Custom { b, .. } => b(n),
            Source::Prepended { b_head, base, .. } => {
                if n < b_head.len() {
                    b_head[n]
                } else {
                    base.b_raw(n - b_head.len())
                }
            }
        }
    }

    /// Off-diagonal coefficient `a_n`; errors unless positive and finite.
    pub fn a(&self, n: usize) -> Result<f64> {
        let v = self.a_raw(n);
        if v.is_nan() || v.is_infinite() {
            return Err(Error::NonFinite {
                what: "a_n",
                index: n,
            });
        }
        if v <= 0.0 {
            return Err(Error::NonPositiveCoefficient { index: n, value: v });
        }
        Ok(v)
    }

    /// Diagonal coefficient `b_n`.
    pub fn b(&self, n: usize) -> Result<f64> {
        let v = self.b_raw(n);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: "b_n",
                index: n,
            });
        }
        Ok(v)
    }

    /// Eventual power-law bounds on `a_n`, when the family's form provides them.
    pub fn envelope(&self) -> Option<PowerEnvelope> {
        match &self.source {
            Source::Family(s) => s.envelope(),
            Source::Custom { .. } => None,
            Source::Prepended { a_head, base, .. } => {
                let e = base.envelope()?;
                let shift = a_head.len();
                // (m - shift + 1) lies in [(m + 1) / (shift + 1), m + 1] for m >= shift
                Some(PowerEnvelope {
                    start: e.start + shift,
                    exponent: e.exponent,
                    lower: e
                        .lower
                        .map(|c| c * ((shift + 1) as f64).powf(-e.exponent.max(0.0))),
                    upper: if e.exponent >= 0.0 { e.upper } else { None },
                })
            }
        }
    }
}

impl TryFrom<FamilySpec> for JacobiCoefficients {
    type Error = Error;

    fn try_from(spec: FamilySpec) -> Result<Self> {
        Self::new(spec)
    }
}

/// Build the generator for a family.
pub fn make_coefficients(spec: FamilySpec) -> Result<JacobiCoefficients> {
    JacobiCoefficients::new(spec)
}

/// `sum_{n=0}^{n_max} 1 / a_n` with compensated summation.
pub fn carleman_partial(coeffs: &JacobiCoefficients, n_max: usize) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    for n in 0..=n_max {
        acc += 1.0 / coeffs.a(n)?;
    }
    Ok(acc.value())
}

/// Outcome of the Carleman test `sum 1/a_n = ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SelfAdjointness {
    /// The series diverges: either the partial sum crossed the threshold or an
    /// upper envelope `a_n <= C (n+1)^p` with `p <= 1` certifies it.
    Divergent { partial_sum: f64 },
    /// A lower envelope with exponent above one bounds the full series.
    ConvergentBounded { bound: f64 },
    Inconclusive { partial_sum: f64 },
}

/// Classify `sum 1/a_n` as divergent (self-adjoint operator), convergent, or undecided.
///
/// Certification uses the integral test against the family's power envelope;
/// families without a known envelope are divergent only when the partial sum
/// exceeds `divergence_threshold`.
pub fn classify_selfadjoint(
    coeffs: &JacobiCoefficients,
    n_max: usize,
    divergence_threshold: f64,
) -> Result<SelfAdjointness> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let partial = carleman_partial(coeffs, n_max)?;
    if partial > divergence_threshold {
        return Ok(SelfAdjointness::Divergent {
            partial_sum: partial,
        });
    }
    if let Some(env) = coeffs.envelope() {
        if env.upper.is_some() && env.exponent <= 1.0 {
            return Ok(SelfAdjointness::Divergent {
                partial_sum: partial,
            });
        }
        if let Some(lower) = env.lower {
            if env.exponent > 1.0 && n_max >= env.start {
                // sum_{n > n_max} (n+1)^-p <= ∫_{n_max}^∞ (x+1)^-p dx
                let p = env.exponent;
                let tail = ((n_max + 1) as f64).powf(1.0 - p) / (lower * (p - 1.0));
                return Ok(SelfAdjointness::ConvergentBounded {
                    bound: partial + tail,
                });
            }
        }
    }
    Ok(SelfAdjointness::Inconclusive {
        partial_sum: partial,
    })
}
