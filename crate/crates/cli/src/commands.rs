//! The `analyze`, `trace` and `gap` pipelines.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use jacobi_core::critical::{discr_closed_form, gap_quadratic, sandwich_verify, CriticalLimits, GapEstimate};
use jacobi_core::eigensolve::{iterate_eigenvector, DEFAULT_RENORM_EVERY};
use jacobi_core::regime::{classify_regime, Regime};
use jacobi_core::sequences::{classify_selfadjoint, SelfAdjointness};
use jacobi_core::tolerance::Tolerances;
use jacobi_core::turan::{limit_profile, turan_trace, TraceMode};
use jacobi_core::variation::{hypothesis_report_critical, hypothesis_report_regular, CriticalHypotheses, RegularHypotheses};
use jacobi_core::{FamilySpec, JacobiCoefficients, VERSION};

use crate::config::RunConfig;
use crate::output::{config_hash, create_file, fmt_f64, write_json};

/// Process exit status of a finished command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Degenerate,
}

/// Everything a command needs, resolved before any file is written.
pub struct RunContext {
    pub config: RunConfig,
    pub tol: Tolerances,
    pub profile: String,
    pub coeffs: JacobiCoefficients,
    pub hash: String,
}

#[derive(Serialize)]
struct Provenance<'a> {
    version: &'a str,
    config_hash: &'a str,
    tolerance_profile: &'a str,
    tolerances: &'a Tolerances,
}

impl RunContext {
    pub fn new(config: RunConfig, profile: &str) -> Result<Self> {
        let tol = config.resolve_tolerances(profile)?;
        let coeffs = JacobiCoefficients::new(config.family.clone())?;
        let hash = config_hash(&config)?;
        Ok(Self {
            config,
            tol,
            profile: profile.to_string(),
            coeffs,
            hash,
        })
    }

    fn provenance(&self) -> Provenance<'_> {
        Provenance {
            version: VERSION,
            config_hash: &self.hash,
            tolerance_profile: if self.config.tolerances.is_some() { "config" } else { &self.profile },
            tolerances: &self.tol,
        }
    }

    fn regime(&self) -> Result<Regime> {
        classify_regime(
            &self.coeffs,
            self.config.period(),
            self.config.k_max,
            self.config.slope_k_max,
            &self.tol,
        )
        .context("regime classification failed")
    }

    fn pool(&self, jobs: Option<usize>) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = jobs {
            b = b.num_threads(j.max(1));
        }
        b.build().map_err(|e| anyhow!("cannot start worker pool: {e}"))
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum Hypotheses {
    Regular(RegularHypotheses),
    Critical(CriticalHypotheses),
}

#[derive(Serialize)]
struct SweepRow {
    lambda: f64,
    /// `discr(γ^{-1} C_0)` in the critical regime, `-4 det(sym(E F))` otherwise.
    discr: f64,
    inside_gap: bool,
    rho_min: f64,
    rho_max: f64,
    exponential_growth: bool,
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    family: &'a FamilySpec,
    #[serde(rename = "N")]
    period: usize,
    n_max: usize,
    regime: &'a Regime,
    hypotheses: Option<Hypotheses>,
    carleman: SelfAdjointness,
    gap: Option<GapEstimate>,
    sweep: Vec<SweepRow>,
}

pub fn analyze(ctx: &RunContext, out: &Path, jobs: Option<usize>) -> Result<Status> {
    let config = &ctx.config;
    let period = config.period();
    let regime = ctx.regime()?;
    let carleman = classify_selfadjoint(&ctx.coeffs, config.n_max, ctx.tol.divergence_threshold)?;

    let (hypotheses, gap) = match &regime {
        Regime::Regular { .. } => (
            Some(Hypotheses::Regular(hypothesis_report_regular(&ctx.coeffs, period, config.n_max, &ctx.tol)?)),
            None,
        ),
        Regime::Critical { critical, .. } => (
            Some(Hypotheses::Critical(hypothesis_report_critical(
                &ctx.coeffs,
                period,
                critical.q,
                config.n_max,
                &ctx.tol,
            )?)),
            Some(gap_quadratic(critical)?),
        ),
        Regime::Degenerate { .. } => (None, None),
    };

    let sweep = if matches!(regime, Regime::Degenerate { .. }) {
        Vec::new()
    } else {
        let directions = config.directions();
        let n_lo = (config.n_max / 100).max(1);
        let lambdas = config.lambda.values();
        ctx.pool(jobs)?.install(|| {
            lambdas
                .par_iter()
                .map(|&lambda| {
                    let s = sandwich_verify(&ctx.coeffs, lambda, &directions, n_lo, config.n_max, &ctx.tol)?;
                    let (discr, inside_gap) = match (&regime, &gap) {
                        (Regime::Critical { critical, .. }, Some(g)) => {
                            (discr_closed_form(critical, lambda), g.contains(lambda))
                        }
                        _ => (-4.0 * regime.limits().det_sym_ef, false),
                    };
                    Ok(SweepRow {
                        lambda,
                        discr,
                        inside_gap,
                        rho_min: s.c1_estimate,
                        rho_max: s.c2_estimate,
                        exponential_growth: s.exponential_growth,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?
    };

    ensure_dir(out)?;
    let mut csv = create_file(&out.join("sweep.csv"))?;
    writeln!(csv, "lambda,discr,inside_gap,rho_min,rho_max,exponential_growth")?;
    for r in &sweep {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_f64(r.lambda),
            fmt_f64(r.discr),
            r.inside_gap,
            fmt_f64(r.rho_min),
            fmt_f64(r.rho_max),
            r.exponential_growth
        )?;
    }
    csv.flush()?;
    let report = AnalyzeReport {
        provenance: ctx.provenance(),
        family: &config.family,
        period,
        n_max: config.n_max,
        regime: &regime,
        hypotheses,
        carleman,
        gap,
        sweep,
    };
    write_json(&out.join("report.json"), &report)?;
    Ok(match regime {
        Regime::Degenerate { .. } => Status::Degenerate,
        _ => Status::Ok,
    })
}

#[derive(Serialize)]
struct TraceSummary {
    lambda: f64,
    alpha: [f64; 2],
    inside_gap: Option<bool>,
    limit_estimate: Option<f64>,
    residue_limits: Option<Vec<f64>>,
    converged: Option<bool>,
    sign_constant: Option<bool>,
    telescoping_max_rel_error: Option<f64>,
    profile_settled: Option<bool>,
    rho_min: f64,
    rho_max: f64,
    exponential_growth: bool,
    error: Option<String>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct TraceReport<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    regime: &'static str,
    mode: TraceMode,
    n_max: usize,
    rows: Vec<TraceSummary>,
}

struct TraceRun {
    summary: TraceSummary,
    trajectory: Vec<u8>,
    trace: Option<Vec<u8>>,
    profile: Option<Vec<u8>>,
}

fn trace_one(ctx: &RunContext, mode: TraceMode, gap: Option<&GapEstimate>, lambda: f64, alpha: [f64; 2]) -> Result<TraceRun> {
    let n_max = ctx.config.n_max;
    let period = mode.period();
    let traj = iterate_eigenvector(&ctx.coeffs, lambda, alpha, n_max, DEFAULT_RENORM_EVERY)?;
    let mut trajectory = Vec::new();
    traj.write_csv(&mut trajectory)?;
    let sandwich = sandwich_verify(&ctx.coeffs, lambda, &[alpha], (n_max / 100).max(1), n_max, &ctx.tol)?;
    let mut summary = TraceSummary {
        lambda,
        alpha,
        inside_gap: gap.map(|g| g.contains(lambda)),
        limit_estimate: None,
        residue_limits: None,
        converged: None,
        sign_constant: None,
        telescoping_max_rel_error: None,
        profile_settled: None,
        rho_min: sandwich.c1_estimate,
        rho_max: sandwich.c2_estimate,
        exponential_growth: sandwich.exponential_growth,
        error: None,
        files: Vec::new(),
    };
    let mut errors = Vec::new();
    let trace = match turan_trace(&ctx.coeffs, lambda, alpha, n_max, mode, &ctx.tol) {
        Ok(t) => {
            summary.limit_estimate = Some(t.limit_estimate);
            summary.residue_limits = Some(t.residue_limits.clone());
            summary.converged = Some(t.converged);
            summary.sign_constant = Some(t.sign_constant);
            summary.telescoping_max_rel_error = Some(t.telescoping_max_rel_error);
            let mut buf = Vec::new();
            t.write_csv(&mut buf)?;
            Some(buf)
        }
        Err(e) => {
            errors.push(format!("trace: {e}"));
            None
        }
    };
    let profile = match limit_profile(&ctx.coeffs, period, lambda, alpha, n_max, &ctx.tol) {
        Ok(p) => {
            summary.profile_settled = Some(p.settled);
            let mut buf = Vec::new();
            writeln!(buf, "residue,limit,min,max,oscillation")?;
            for r in &p.residues {
                writeln!(
                    buf,
                    "{},{},{},{},{}",
                    r.residue,
                    fmt_f64(r.limit),
                    fmt_f64(r.min),
                    fmt_f64(r.max),
                    fmt_f64(r.oscillation)
                )?;
            }
            Some(buf)
        }
        Err(e) => {
            errors.push(format!("profile: {e}"));
            None
        }
    };
    if !errors.is_empty() {
        summary.error = Some(errors.join("; "));
    }
    Ok(TraceRun {
        summary,
        trajectory,
        trace,
        profile,
    })
}

pub fn trace(
    ctx: &RunContext,
    lambda: Option<f64>,
    theta: f64,
    out: &Path,
    jobs: Option<usize>,
) -> Result<Status> {
    let regime = ctx.regime()?;
    let period = ctx.config.period();
    let (mode, gap) = match &regime {
        Regime::Regular { .. } => (TraceMode::Regular { period }, None),
        Regime::Critical { critical, .. } => (
            TraceMode::Critical {
                period,
                gamma: critical.gamma,
            },
            gap_quadratic(critical).ok(),
        ),
        Regime::Degenerate { .. } => {
            ensure_dir(out)?;
            let report = TraceReport {
                provenance: ctx.provenance(),
                regime: regime.name(),
                mode: TraceMode::Regular { period },
                n_max: ctx.config.n_max,
                rows: Vec::new(),
            };
            write_json(&out.join("summary.json"), &report)?;
            return Ok(Status::Degenerate);
        }
    };
    let alpha = [theta.cos(), theta.sin()];
    let lambdas = match lambda {
        Some(l) => vec![l],
        None => ctx.config.lambda.values(),
    };
    let runs = ctx.pool(jobs)?.install(|| {
        lambdas
            .par_iter()
            .map(|&l| trace_one(ctx, mode, gap.as_ref(), l, alpha))
            .collect::<Result<Vec<_>>>()
    })?;

    ensure_dir(out)?;
    let mut rows = Vec::with_capacity(runs.len());
    for (i, mut run) in runs.into_iter().enumerate() {
        let write = |name: String, bytes: &[u8]| -> Result<String> {
            std::fs::write(out.join(&name), bytes).with_context(|| format!("cannot write {name}"))?;
            Ok(name)
        };
        run.summary.files.push(write(format!("trajectory_{i:03}.csv"), &run.trajectory)?);
        if let Some(t) = &run.trace {
            run.summary.files.push(write(format!("trace_{i:03}.csv"), t)?);
        }
        if let Some(p) = &run.profile {
            run.summary.files.push(write(format!("profile_{i:03}.csv"), p)?);
        }
        rows.push(run.summary);
    }
    let mut csv = create_file(&out.join("summary.csv"))?;
    writeln!(
        csv,
        "lambda,inside_gap,limit_estimate,converged,sign_constant,profile_settled,rho_min,rho_max,exponential_growth,error"
    )?;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let flag = |x: Option<bool>| x.map(|b| b.to_string()).unwrap_or_default();
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.lambda),
            flag(r.inside_gap),
            opt(r.limit_estimate),
            flag(r.converged),
            flag(r.sign_constant),
            flag(r.profile_settled),
            fmt_f64(r.rho_min),
            fmt_f64(r.rho_max),
            r.exponential_growth,
            r.error.as_deref().unwrap_or("").replace(',', ";")
        )?;
    }
    csv.flush()?;
    let report = TraceReport {
        provenance: ctx.provenance(),
        regime: regime.name(),
        mode,
        n_max: ctx.config.n_max,
        rows,
    };
    write_json(&out.join("summary.json"), &report)?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct CrossCheck {
    name: &'static str,
    lambda_minus: f64,
    lambda_plus: f64,
    max_abs_diff: f64,
}

#[derive(Serialize)]
struct GapReport<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    critical: &'a CriticalLimits,
    slope_residual: &'a [f64],
    gap: GapEstimate,
    cross_checks: Vec<CrossCheck>,
}

/// Closed forms for the slope patterns with known endpoints.
fn cross_checks(l: &CriticalLimits, g: &GapEstimate) -> Vec<CrossCheck> {
    let n = l.period as f64;
    let mut out = Vec::new();
    let mut push = |name, lo: f64, hi: f64| {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        out.push(CrossCheck {
            name,
            lambda_minus: lo,
            lambda_plus: hi,
            max_abs_diff: (lo - g.lambda_minus).abs().max((hi - g.lambda_plus).abs()),
        });
    };
    // only one non-zero slope: blocks of equal weights
    if let [&s] = l.s.iter().filter(|s| **s != 0.0).collect::<Vec<_>>()[..] {
        push("multiple_weights", s * (l.q - 2.0) / (2.0 * n), s * (l.q + 2.0) / (2.0 * n));
    }
    // even period with q = 0: additive periodic perturbations
    if l.period % 2 == 0 && 2 * l.k0 == l.period {
        let even: f64 = l.s.iter().step_by(2).sum();
        let odd: f64 = l.s.iter().skip(1).step_by(2).sum();
        let half = (even - odd).abs() / n;
        push("additive_perturbation", -half, half);
    }
    out
}

pub fn gap(ctx: &RunContext, out: &Path) -> Result<Status> {
    let regime = ctx.regime()?;
    let Regime::Critical {
        critical,
        slope_residual,
        ..
    } = &regime
    else {
        return Err(jacobi_core::Error::NotCritical(format!("regime is {}", regime.name())).into());
    };
    let g = gap_quadratic(critical)?;
    let report = GapReport {
        provenance: ctx.provenance(),
        critical,
        slope_residual,
        cross_checks: cross_checks(critical, &g),
        gap: g,
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write_json(out, &report)?;
    Ok(Status::Ok)
}

/// `--out` if given, else the config's `out_dir`.
pub fn out_path(flag: Option<PathBuf>, config: &RunConfig) -> Result<PathBuf> {
    flag.or_else(|| config.out_dir.clone())
        .ok_or_else(|| anyhow!("no output location: pass --out or set out_dir in the config"))
}
