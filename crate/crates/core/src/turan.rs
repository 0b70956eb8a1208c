//! The Turán-type trace `S_n = a_{n+N-1} <E X_n v, v>` along a generalized
//! eigenvector, with `v = (u_{n-1}, u_n)`. Since `X_n v = (u_{n+N-1}, u_{n+N})`,
//! the form reduces to the Turán determinant `u_{n+N-1} u_n - u_{n+N} u_{n-1}`.
//! In the critical regime the form carries one more factor `a_{n+N-1}`.
//!
//! Convergence of `S_n` to a function without zeros yields the two-sided
//! `1/a_n` bounds on `u_{n-1}² + u_n²`; this module measures it.

use std::collections::VecDeque;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{EigenvectorIter, DEFAULT_RENORM_EVERY};
use crate::sequences::JacobiCoefficients;
use crate::sum::NeumaierSum;
use crate::tolerance::Tolerances;
use crate::{Error, Result};

/// Indices sampled densely before switching to a block schedule.
const DENSE_SAMPLES: usize = 1000;
/// Target number of sampled blocks past the dense prefix.
const SAMPLE_BLOCKS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TraceMode {
    /// `S_n = a_{n+N-1} <E X_n v, v>`, increments over one step.
    Regular {
        #[serde(rename = "N")]
        period: usize,
    },
    /// `S_n = a_{n+N-1}² <E X_n v, v>`, increments over `N` steps.
    Critical {
        #[serde(rename = "N")]
        period: usize,
        gamma: f64,
    },
}

impl TraceMode {
    pub fn period(&self) -> usize {
        match *self {
            TraceMode::Regular { period } | TraceMode::Critical { period, .. } => period,
        }
    }

    /// Distance between the two traces in an increment `F_n`.
    pub fn step(&self) -> usize {
        match *self {
            TraceMode::Regular { .. } => 1,
            TraceMode::Critical { period, .. } => period,
        }
    }

    fn a_power(&self) -> i32 {
        match self {
            TraceMode::Regular { .. } => 1,
            TraceMode::Critical { .. } => 2,
        }
    }
}

/// `S_n = mantissa * exp(2 log_scale)`; `F_n` once `S_{n+step}` is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub n: usize,
    pub mantissa: f64,
    pub log_scale: f64,
    pub f: Option<f64>,
}

impl TraceSample {
    pub fn value(&self) -> f64 {
        self.mantissa * (2.0 * self.log_scale).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuranTrace {
    pub lambda: f64,
    pub alpha: [f64; 2],
    pub mode: TraceMode,
    pub n_max: usize,
    /// First index of the tail on which sign and telescoping are checked.
    pub tail_start: usize,
    pub samples: Vec<TraceSample>,
    /// `S_n` at the last index.
    pub limit_estimate: f64,
    /// Last value of `S_n` in each residue class modulo the increment step.
    pub residue_limits: Vec<f64>,
    /// Largest relative deviation from the residue's last value over the last decade.
    pub tail_rel_change: f64,
    pub converged: bool,
    /// Sign of `S_n` on the tail, or 0 when it changes there.
    pub sign: f64,
    pub sign_constant: bool,
    /// `sum |F_n|` over the whole run and over the last decade.
    pub abs_increment_total: f64,
    pub abs_increment_last_decade: f64,
    /// Largest `|prod_{j=M}^{n-1} (1 + F_j) / (S_n / S_M) - 1|` over the tail.
    pub telescoping_max_rel_error: f64,
    /// Range of `S_n / (a_{n+N-1} (u_{n-1}² + u_n²))` over the tail.
    pub sandwich_band: (f64, f64),
    /// `2 c²` with `c` the tail max/min ratio of `|S_n|`.
    pub beta_estimate: f64,
}

impl TuranTrace {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,S_mantissa,log_scale,F_n")?;
        for s in &self.samples {
            match s.f {
                Some(f) => writeln!(w, "{},{:.16e},{:.16e},{:.16e}", s.n, s.mantissa, s.log_scale, f)?,
                None => writeln!(w, "{},{:.16e},{:.16e},", s.n, s.mantissa, s.log_scale)?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct Scaled {
    mantissa: f64,
    log_scale: f64,
}

impl Scaled {
    /// `self / other` in true scale (traces carry `exp(2 log_scale)`).
    fn ratio(&self, other: &Scaled) -> f64 {
        self.mantissa / other.mantissa * (2.0 * (self.log_scale - other.log_scale)).exp()
    }
}

fn unit(alpha: [f64; 2]) -> Result<[f64; 2]> {
    let norm = alpha[0].hypot(alpha[1]);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "initial direction must be finite and nonzero, got {alpha:?}"
        )));
    }
    Ok([alpha[0] / norm, alpha[1] / norm])
}

/// Evaluate `S_n` for `1 <= n <= n_max` along the eigenvector with initial data
/// `(u_0, u_1) = α`. `α` is used as given, so scaling it by `c` scales `S_n` by `c²`.
pub fn turan_trace(
    coeffs: &JacobiCoefficients,
    lambda: f64,
    alpha: [f64; 2],
    n_max: usize,
    mode: TraceMode,
    tol: &Tolerances,
) -> Result<TuranTrace> {
    let period = mode.period();
    let step = mode.step();
    if period == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    if n_max < period + 1 {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} must exceed N = {period}"
        )));
    }
    unit(alpha)?;
    let tail_start = (n_max / 100).max(1);
    let last_decade = (n_max / 10).max(1);
    let block_stride = (n_max / (period * SAMPLE_BLOCKS)).max(1);
    let sampled = |n: usize| n <= DENSE_SAMPLES || ((n - DENSE_SAMPLES) / period) % block_stride == 0 || n == n_max;

    let mut it = EigenvectorIter::new(coeffs, lambda, alpha, DEFAULT_RENORM_EVERY)?;
    // u_m with its scale, for m = n-1 ..= n+N
    let mut u: VecDeque<(f64, f64)> = VecDeque::with_capacity(period + 3);
    let s0 = it.state();
    u.push_back((s0.prev, 0.0));
    u.push_back((s0.cur, 0.0));
    for _ in 0..period {
        let s = it.step()?;
        u.push_back((s.cur, s.log_scale));
    }

    let mut recent: VecDeque<Scaled> = VecDeque::with_capacity(step + 1);
    let mut pending: VecDeque<TraceSample> = VecDeque::new();
    let mut samples = Vec::new();
    let mut anchors: Vec<Option<(Scaled, f64)>> = vec![None; step];
    let mut sign = 0.0;
    let mut sign_constant = true;
    let mut abs_total = NeumaierSum::new();
    let mut abs_last = NeumaierSum::new();
    let mut tele_err = 0.0f64;
    let (mut band_lo, mut band_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut abs_lo, mut abs_hi) = (f64::INFINITY, 0.0f64);

    for n in 1..=n_max {
        // u holds u_{n-1}, ..., u_{n+N}
        let (x_prev, l_prev) = u[0];
        let (x_n, l_n) = u[1];
        let (x_a, l_a) = u[period];
        let (x_b, l_b) = u[period + 1];
        let big_l = l_b;
        let a = coeffs.a(n + period - 1)?;
        let det = x_a * x_n * (l_a + l_n - 2.0 * big_l).exp() - x_b * x_prev * (l_b + l_prev - 2.0 * big_l).exp();
        let cur = Scaled {
            mantissa: a.powi(mode.a_power()) * det,
            log_scale: big_l,
        };
        if !cur.mantissa.is_finite() {
            return Err(Error::NonFinite { what: "S_n", index: n });
        }

        if recent.len() == step {
            let old = recent.pop_front().expect("window is full");
            let f = cur.ratio(&old) - 1.0;
            let m = n - step;
            abs_total += f.abs();
            if m >= last_decade {
                abs_last += f.abs();
            }
            if let Some(p) = pending.front_mut() {
                if p.n == m {
                    p.f = Some(f);
                    samples.push(pending.pop_front().expect("front exists"));
                }
            }
            if m >= tail_start {
                let slot = &mut anchors[(m - tail_start) % step];
                let (anchor, prod) = slot.get_or_insert((old, 1.0));
                *prod *= 1.0 + f;
                let err = (*prod / cur.ratio(anchor) - 1.0).abs();
                tele_err = tele_err.max(err);
            }
        }

        if n >= tail_start {
            if cur.mantissa == 0.0 {
                return Err(Error::ZeroTrace { index: n });
            }
            if sign != 0.0 && cur.mantissa.signum() != sign {
                sign_constant = false;
            }
            sign = cur.mantissa.signum();
            let pair = x_prev * x_prev * (2.0 * (l_prev - big_l)).exp() + x_n * x_n * (2.0 * (l_n - big_l)).exp();
            let q = cur.mantissa / (a * pair);
            band_lo = band_lo.min(q);
            band_hi = band_hi.max(q);
            let abs = cur.mantissa.abs().ln() + 2.0 * big_l;
            abs_lo = abs_lo.min(abs);
            abs_hi = abs_hi.max(abs);
        }

        if sampled(n) {
            pending.push_back(TraceSample {
                n,
                mantissa: cur.mantissa,
                log_scale: cur.log_scale,
                f: None,
            });
        }
        recent.push_back(cur);

        if n < n_max {
            let s = it.step()?;
            u.pop_front();
            u.push_back((s.cur, s.log_scale));
        }
    }
    samples.extend(pending);

    let limit_estimate = samples.last().expect("n_max >= 1").value();
    let mut residue_limits = vec![f64::NAN; step];
    for s in samples.iter().rev() {
        let r = s.n % step;
        if residue_limits[r].is_nan() {
            residue_limits[r] = s.value();
        }
    }
    let tail_rel_change = samples
        .iter()
        .filter(|s| s.n >= last_decade)
        .map(|s| {
            let l = residue_limits[s.n % step];
            ((s.value() - l) / l).abs()
        })
        .fold(0.0, f64::max);
    let c = (abs_hi - abs_lo).exp();
    Ok(TuranTrace {
        lambda,
        alpha,
        mode,
        n_max,
        tail_start,
        limit_estimate,
        residue_limits,
        converged: tail_rel_change < tol.trace_convergence,
        tail_rel_change,
        sign: if sign_constant { sign } else { 0.0 },
        sign_constant,
        abs_increment_total: abs_total.value(),
        abs_increment_last_decade: abs_last.value(),
        telescoping_max_rel_error: tele_err,
        sandwich_band: (band_lo, band_hi),
        beta_estimate: 2.0 * c * c,
        samples,
    })
}

/// Per-residue tail of `a_{(k+1)N+j-1} (u_{kN+j-1}² + u_{kN+j}²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueProfile {
    pub residue: usize,
    /// Value at the last complete block.
    pub limit: f64,
    pub min: f64,
    pub max: f64,
    /// `(max - min) / limit` over the last decade of `k`.
    pub oscillation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitProfile {
    pub lambda: f64,
    pub alpha: [f64; 2],
    #[serde(rename = "N")]
    pub period: usize,
    pub n_max: usize,
    pub residues: Vec<ResidueProfile>,
    pub settled: bool,
}

/// Measure the per-residue profile without judging it.
pub fn limit_profile(
    coeffs: &JacobiCoefficients,
    period: usize,
    lambda: f64,
    alpha: [f64; 2],
    n_max: usize,
    tol: &Tolerances,
) -> Result<LimitProfile> {
    if period == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    if n_max < 10 * period + 1 {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} too small for N = {period}"
        )));
    }
    let alpha = unit(alpha)?;
    let k_last = (n_max - period) / period;
    let k_first = k_last / 10;
    let mut it = EigenvectorIter::new(coeffs, lambda, alpha, DEFAULT_RENORM_EVERY)?;
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY, f64::NAN); period];
    loop {
        let st = it.state();
        // n = kN + j with j >= 1; residue 0 uses n = kN with k >= 1
        let (k, j) = (st.n / period, st.n % period);
        if k >= k_first && k <= k_last {
            let a = coeffs.a((k + 1) * period + j - 1)?;
            let v = a * st.norm_sq() * (2.0 * st.log_scale).exp();
            let r = &mut ranges[j];
            r.0 = r.0.min(v);
            r.1 = r.1.max(v);
            if k == k_last {
                r.2 = v;
            }
        }
        if k > k_last || (k == k_last && j == period - 1) {
            break;
        }
        it.step()?;
    }
    let residues: Vec<ResidueProfile> = ranges
        .into_iter()
        .enumerate()
        .map(|(j, (min, max, limit))| ResidueProfile {
            residue: j,
            limit,
            min,
            max,
            oscillation: (max - min) / limit.abs(),
        })
        .collect();
    let settled = residues
        .iter()
        .all(|r| r.limit > 0.0 && r.oscillation < tol.profile_oscillation);
    Ok(LimitProfile {
        lambda,
        alpha,
        period,
        n_max,
        residues,
        settled,
    })
}

/// Per-residue limits of `a_{(k+1)N+j-1} (u_{kN+j-1}² + u_{kN+j}²)`; fails with
/// `NotSettled` when a residue still oscillates by more than the tolerance.
pub fn asymptotic_limit_profile(
    coeffs: &JacobiCoefficients,
    period: usize,
    lambda: f64,
    alpha: [f64; 2],
    n_max: usize,
    tol: &Tolerances,
) -> Result<LimitProfile> {
    let p = limit_profile(coeffs, period, lambda, alpha, n_max, tol)?;
    if let Some(r) = p
        .residues
        .iter()
        .find(|r| !(r.limit > 0.0 && r.oscillation < tol.profile_oscillation))
    {
        return Err(Error::NotSettled {
            residue: r.residue,
            oscillation: r.oscillation,
            tolerance: tol.profile_oscillation,
        });
    }
    Ok(p)
}

/// `n` equally spaced unit directions on the circle.
pub fn direction_grid(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonsubordinacyEstimate {
    pub lambda: f64,
    pub n_max: usize,
    pub directions: Vec<[f64; 2]>,
    /// `ln sum_{i <= n_max} u_i²` per direction.
    pub log_sums: Vec<f64>,
    /// Largest ratio of the sums over ordered pairs: a lower bound of the true `β`.
    pub beta: f64,
    /// `β` at the end of each decade, for judging stability.
    pub beta_by_decade: Vec<(usize, f64)>,
}

/// `ln sum_{i<=n} u_i²` at every checkpoint in `marks` (ascending, last = n_max).
fn log_square_sums(
    coeffs: &JacobiCoefficients,
    lambda: f64,
    alpha: [f64; 2],
    marks: &[usize],
) -> Result<Vec<f64>> {
    let mut it = EigenvectorIter::new(coeffs, lambda, alpha, DEFAULT_RENORM_EVERY)?;
    let s = it.state();
    // sum relative to the current scale: true = acc * exp(2 log_scale)
    let mut acc = s.prev * s.prev + s.cur * s.cur;
    let mut scale = s.log_scale;
    let mut out = Vec::with_capacity(marks.len());
    let mut next = 0;
    while next < marks.len() {
        let st = it.state();
        if st.n == marks[next] {
            out.push(acc.ln() + 2.0 * scale);
            next += 1;
            continue;
        }
        let st = it.step()?;
        if st.log_scale != scale {
            acc *= (2.0 * (scale - st.log_scale)).exp();
            scale = st.log_scale;
        }
        acc += st.cur * st.cur;
    }
    Ok(out)
}

/// Empirical non-subordinacy constant over a finite direction grid.
pub fn nonsubordinacy_ratio(
    coeffs: &JacobiCoefficients,
    lambda: f64,
    alphas: &[[f64; 2]],
    n_max: usize,
) -> Result<NonsubordinacyEstimate> {
    if alphas.len() < 2 {
        return Err(Error::InvalidArgument("at least two directions are required".into()));
    }
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let directions = alphas.iter().map(|&a| unit(a)).collect::<Result<Vec<_>>>()?;
    let mut marks = Vec::new();
    let mut m = 10;
    while m < n_max {
        marks.push(m);
        m *= 10;
    }
    marks.push(n_max);
    let sums = directions
        .par_iter()
        .map(|&a| log_square_sums(coeffs, lambda, a, &marks))
        .collect::<Result<Vec<_>>>()?;
    let beta_at = |i: usize| {
        let (lo, hi) = sums.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s[i]), hi.max(s[i]))
        });
        (hi - lo).exp()
    };
    let last = marks.len() - 1;
    Ok(NonsubordinacyEstimate {
        lambda,
        n_max,
        beta: beta_at(last),
        beta_by_decade: marks.iter().enumerate().map(|(i, &m)| (m, beta_at(i))).collect(),
        log_sums: sums.iter().map(|s| s[last]).collect(),
        directions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IgnjatovicPartial {
    pub n: usize,
    pub sum_p_sq: f64,
    pub sum_inv_a: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgnjatovicRatio {
    pub x: f64,
    pub partials: Vec<IgnjatovicPartial>,
    pub limit_estimate: f64,
    /// Relative change of the ratio between `n_max / 10` and `n_max`.
    pub last_decade_change: f64,
    pub converged: bool,
}

/// `sum_{k<=n} p_k(x)² / sum_{k<=n} 1/a_k` on a geometric schedule up to `n_max`.
pub fn ignjatovic_ratio(
    coeffs: &JacobiCoefficients,
    x: f64,
    n_max: usize,
    tol: &Tolerances,
) -> Result<IgnjatovicRatio> {
    if n_max < 10 {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} must be at least 10")));
    }
    let decade = n_max / 10;
    let mut partials = Vec::new();
    let mut at_decade = f64::NAN;
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    let mut a_prev = 0.0;
    let mut sum_p = NeumaierSum::new();
    let mut sum_a = NeumaierSum::new();
    let mut next_mark = 1usize;
    for n in 0..=n_max {
        let a = coeffs.a(n)?;
        sum_p += cur * cur;
        sum_a += 1.0 / a;
        if n == next_mark || n == n_max || n == decade {
            let ratio = sum_p.value() / sum_a.value();
            if n == decade {
                at_decade = ratio;
            }
            if n == next_mark || n == n_max {
                partials.push(IgnjatovicPartial {
                    n,
                    sum_p_sq: sum_p.value(),
                    sum_inv_a: sum_a.value(),
                    ratio,
                });
            }
            if n == next_mark {
                // about ten marks per decade
                next_mark = ((n as f64 * 10f64.powf(0.1)).ceil() as usize).max(n + 1);
            }
        }
        if n < n_max {
            let next = ((x - coeffs.b(n)?) * cur - a_prev * prev) / a;
            if !next.is_finite() {
                return Err(Error::NonFinite {
                    what: "p_n",
                    index: n + 1,
                });
            }
            (prev, cur, a_prev) = (cur, next, a);
        }
    }
    let limit_estimate = partials.last().expect("n_max >= 10").ratio;
    let last_decade_change = ((limit_estimate - at_decade) / limit_estimate).abs();
    Ok(IgnjatovicRatio {
        x,
        partials,
        limit_estimate,
        converged: last_decade_change < tol.ignjatovic,
        last_decade_change,
    })
}
