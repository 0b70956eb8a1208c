//! The critical regime: `r_j = 1` and `b_n / a_n → q = 2cos(k0 π/N)`, so the
//! limiting block transfer matrix is `B^N = γ Id`. Non-degeneracy then depends
//! on the first-order corrections `C_n = a_{n+N-1}(X_n - γ Id)`, whose limits
//! `C_j` have discriminants quadratic in `λ`. The two roots bound the interval
//! where the `1/a_n` sandwich may fail.

use serde::{Deserialize, Serialize};

use crate::chebyshev::{b_power, critical_q, w_derivative, w_poly};
use crate::eigensolve::{step_product, EigenvectorIter, DEFAULT_RENORM_EVERY};
use crate::linalg::{discr, Mat2};
use crate::regular::tail_limit;
use crate::sequences::JacobiCoefficients;
use crate::sum::NeumaierSum;
use crate::tolerance::Tolerances;
use crate::{Error, Result};

/// Discriminants this far below zero, relative to the terms, count as zero.
const DISCRIMINANT_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalLimits {
    #[serde(rename = "N")]
    pub period: usize,
    pub k0: usize,
    pub q: f64,
    /// `(-1)^{N + k0}`.
    pub gamma: f64,
    /// `s_j = lim (a_{kN+j} - a_{kN+j-1})`.
    pub s: Vec<f64>,
    #[serde(rename = "S")]
    pub big_s: f64,
    /// `w_j(q)` for `j = -1, ..., N`; index `j + 1`.
    pub v: Vec<f64>,
}

impl CriticalLimits {
    pub fn new(period: usize, k0: usize, s: Vec<f64>) -> Result<Self> {
        if period < 2 || k0 == 0 || k0 >= period {
            return Err(Error::InvalidArgument(format!(
                "critical regime needs 1 <= k0 < N, got N = {period}, k0 = {k0}"
            )));
        }
        if s.len() != period {
            return Err(Error::InvalidArgument(format!(
                "expected {period} slopes s_j, got {}",
                s.len()
            )));
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("slopes s_j must be finite".into()));
        }
        let q = critical_q(period, k0);
        let v = (-1..=period as i64).map(|j| w_poly(j, q)).collect();
        Ok(Self {
            period,
            k0,
            q,
            gamma: if (period + k0) % 2 == 0 { 1.0 } else { -1.0 },
            big_s: s.iter().sum(),
            s,
            v,
        })
    }

    /// `v_j = w_j(q)` for any integer `j`, negative indices included.
    pub fn v(&self, j: i64) -> f64 {
        if (-1..=self.period as i64).contains(&j) {
            self.v[(j + 1) as usize]
        } else {
            w_poly(j, self.q)
        }
    }

    /// The same limits with `s` rotated left by `shift`.
    pub fn rotated(&self, shift: usize) -> Self {
        let mut s = self.s.clone();
        s.rotate_left(shift % self.period);
        Self::new(self.period, self.k0, s).expect("rotation keeps the limits valid")
    }
}

/// `C_n = a_{n+N-1} (X_n - γ Id)`.
pub fn c_sequence(
    coeffs: &JacobiCoefficients,
    period: usize,
    gamma: f64,
    n: usize,
    lambda: f64,
) -> Result<Mat2> {
    let x = step_product(coeffs, n, period, lambda)?;
    Ok((x - Mat2::IDENTITY.scale(gamma)).scale(coeffs.a(n + period - 1)?))
}

/// `C̃_n = a_n (B̃_n^N - γ Id)` with `B̃_n = [[0, 1], [-1, λ/a_n - q]]`.
pub fn c_tilde_sequence(a_n: f64, period: usize, q: f64, gamma: f64, lambda: f64) -> Mat2 {
    // B̃_n = B(x_n) with x_n = q - λ/a_n
    let b = b_power(q - lambda / a_n, period as i64);
    (b - Mat2::IDENTITY.scale(gamma)).scale(a_n)
}

fn check_k0(period: usize, k0: usize) -> Result<()> {
    if period < 2 || k0 == 0 || k0 >= period {
        return Err(Error::InvalidArgument(format!(
            "critical regime needs 1 <= k0 < N, got N = {period}, k0 = {k0}"
        )));
    }
    Ok(())
}

/// `lim C̃_n = (-1)^{N-1} (λN/(4 - q²)) w_N(q) [[q, 2], [-2, -q]]`.
pub fn limit_c_tilde(period: usize, k0: usize, lambda: f64) -> Result<Mat2> {
    check_k0(period, k0)?;
    let q = critical_q(period, k0);
    let sign = if period % 2 == 1 { 1.0 } else { -1.0 };
    let c = sign * lambda * period as f64 / (4.0 - q * q) * w_poly(period as i64, q);
    Ok(Mat2::new(q, 2.0, -2.0, -q).scale(c))
}

/// The same limit written through derivatives:
/// `(-1)^N λ [[w'_{N-2}(q), w'_{N-1}(q)], [-w'_{N-1}(q), -w'_N(q)]]`.
pub fn limit_c_tilde_derivative_form(period: usize, k0: usize, lambda: f64) -> Result<Mat2> {
    check_k0(period, k0)?;
    let q = critical_q(period, k0);
    let n = period as i64;
    let sign = if period % 2 == 0 { 1.0 } else { -1.0 };
    let d1 = w_derivative(n - 1, q)?;
    Ok(Mat2::new(w_derivative(n - 2, q)?, d1, -d1, -w_derivative(n, q)?).scale(sign * lambda))
}

/// `C_j = sum_{i<N} B^{N-1-i} [[0, 0], [s_{(i+j) mod N}, 0]] B^i + lim C̃` for `j = 0..N`.
pub fn limit_c_matrices(limits: &CriticalLimits, lambda: f64) -> Vec<Mat2> {
    let n = limits.period;
    let q = limits.q;
    let c = limit_c_tilde(n, limits.k0, lambda).expect("limits carry a valid k0");
    let powers: Vec<Mat2> = (0..n as i64).map(|i| b_power(q, i)).collect();
    (0..n)
        .map(|j| {
            (0..n).fold(c, |acc, i| {
                let s = limits.s[(i + j) % n];
                acc + powers[n - 1 - i] * Mat2::new(0.0, 0.0, s, 0.0) * powers[i]
            })
        })
        .collect()
}

/// Roots of the gap quadratic `quad_a λ² + quad_b λ + quad_c = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub quad_a: f64,
    pub quad_b: f64,
    pub quad_c: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    /// Set when the roots coincide (the discriminant is zero, possibly after
    /// clamping a rounding-level negative value).
    pub degenerate_point: bool,
}

impl GapEstimate {
    pub fn eval(&self, lambda: f64) -> f64 {
        (self.quad_a * lambda + self.quad_b) * lambda + self.quad_c
    }

    pub fn contains(&self, lambda: f64) -> bool {
        (self.lambda_minus..=self.lambda_plus).contains(&lambda)
    }
}

/// `(sum_{j=1}^{N-1} s_j v_{j-1}^2, sum_{i,j=1}^{N-1} s_i s_j v_{i-1} v_{j-1} v_{i-j})`.
fn free_sums(limits: &CriticalLimits) -> (f64, f64) {
    let n = limits.period as i64;
    let s = |j: i64| limits.s[j as usize];
    let mut single = NeumaierSum::new();
    let mut double = NeumaierSum::new();
    for i in 1..n {
        let vi = limits.v(i - 1);
        single += s(i) * vi * vi;
        for j in 1..n {
            double += s(i) * s(j) * vi * limits.v(j - 1) * limits.v(i - j);
        }
    }
    (single.value(), double.value())
}

/// Coefficients and roots of the quadratic whose roots are the gap endpoints.
pub fn gap_quadratic(limits: &CriticalLimits) -> Result<GapEstimate> {
    let n = limits.period as f64;
    let q = limits.q;
    let s = limits.big_s;
    let denom = 4.0 - q * q;
    let (single, double) = free_sums(limits);
    let a = n * n / denom;
    let b = -n * q * s / denom;
    let c = s * single - double - s * s / 4.0;

    let mut disc = b * b - 4.0 * a * c;
    let mut degenerate_point = false;
    if disc < 0.0 {
        if -disc <= DISCRIMINANT_SLACK * (b * b + (4.0 * a * c).abs()) {
            disc = 0.0;
        } else {
            return Err(Error::NegativeQuadraticDiscriminant { discriminant: disc });
        }
    }
    if disc == 0.0 {
        degenerate_point = true;
    }
    // citardauq form: no cancellation between -b and the square root
    let t = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if t == 0.0 {
        (0.0, 0.0)
    } else {
        (t / a, c / t)
    };
    let (lambda_minus, lambda_plus) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    Ok(GapEstimate {
        quad_a: a,
        quad_b: b,
        quad_c: c,
        lambda_minus,
        lambda_plus,
        degenerate_point,
    })
}

/// `discr(γ^{-1} C_0)` in closed form.
pub fn discr_closed_form(limits: &CriticalLimits, lambda: f64) -> f64 {
    let n = limits.period as f64;
    let q = limits.q;
    let s = limits.big_s;
    let denom = 4.0 - q * q;
    let (single, double) = free_sums(limits);
    -lambda * lambda * 4.0 * n * n / denom + lambda * 4.0 * n * q * s / denom - 4.0 * s * single
        + 4.0 * double
        + s * s
}

/// Estimate `s_j` from `a_{kN+j} - a_{kN+j-1}` at `k` up to `k_max`; also returns
/// the per-residue tail residuals.
pub fn estimate_critical_limits(
    coeffs: &JacobiCoefficients,
    period: usize,
    k0: usize,
    k_max: usize,
) -> Result<(CriticalLimits, Vec<f64>)> {
    check_k0(period, k0)?;
    if k_max < 10 {
        return Err(Error::InvalidArgument(format!("k_max = {k_max} must be at least 10")));
    }
    let mut s = Vec::with_capacity(period);
    let mut residual = Vec::with_capacity(period);
    for j in 0..period {
        let (sj, e) = tail_limit(
            |k| {
                let n = k * period + j;
                Ok(coeffs.a(n)? - coeffs.a(n - 1)?)
            },
            k_max,
        )?;
        s.push(sj);
        residual.push(e);
    }
    Ok((CriticalLimits::new(period, k0, s)?, residual))
}

/// Tail behaviour of `ρ_n = a_n (u_{n-1}² + u_n²) / (u_0² + u_1²)` for one initial direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRun {
    pub alpha: [f64; 2],
    pub rho_min: f64,
    pub rho_max: f64,
    /// `rho_max / rho_min`.
    pub tail_ratio: f64,
    /// Least-squares slope of `ln ρ_n` against `n` over the last decade.
    pub slope_per_step: f64,
    /// Least-squares slope of `ln ρ_n` against `ln n` over the whole tail.
    pub slope_loglog: f64,
    pub exponential_growth: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichEstimate {
    pub lambda: f64,
    pub n_lo: usize,
    pub n_hi: usize,
    pub runs: Vec<SandwichRun>,
    /// Smallest `ρ_n` over all runs: an estimate of `c_1`.
    pub c1_estimate: f64,
    /// Largest `ρ_n` over all runs: an estimate of `c_2`.
    pub c2_estimate: f64,
    /// Largest per-run `rho_max / rho_min`.
    pub tail_ratio: f64,
    pub exponential_growth: bool,
}

/// Online least-squares slope.
#[derive(Default)]
struct Slope {
    n: f64,
    mean_x: f64,
    mean_y: f64,
    sxx: f64,
    sxy: f64,
}

impl Slope {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        let dx = x - self.mean_x;
        self.mean_x += dx / self.n;
        self.mean_y += (y - self.mean_y) / self.n;
        self.sxx += dx * (x - self.mean_x);
        self.sxy += dx * (y - self.mean_y);
    }

    fn value(&self) -> f64 {
        if self.sxx > 0.0 {
            self.sxy / self.sxx
        } else {
            0.0
        }
    }
}

fn sandwich_run(
    coeffs: &JacobiCoefficients,
    lambda: f64,
    alpha: [f64; 2],
    n_lo: usize,
    n_hi: usize,
    tol: &Tolerances,
) -> Result<SandwichRun> {
    let norm_sq = alpha[0] * alpha[0] + alpha[1] * alpha[1];
    let mut it = EigenvectorIter::new(coeffs, lambda, alpha, DEFAULT_RENORM_EVERY)?;
    let last_decade = (n_hi / 10).max(n_lo);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut per_step = Slope::default();
    let mut loglog = Slope::default();
    loop {
        let st = it.state();
        if st.n >= n_lo {
            let log_rho = coeffs.a(st.n)?.ln() + st.norm_sq().ln() + 2.0 * st.log_scale - norm_sq.ln();
            lo = lo.min(log_rho);
            hi = hi.max(log_rho);
            loglog.push((st.n as f64).ln(), log_rho);
            if st.n >= last_decade {
                per_step.push(st.n as f64, log_rho);
            }
        }
        if st.n >= n_hi {
            break;
        }
        it.step()?;
    }
    let slope_per_step = per_step.value();
    let slope_loglog = loglog.value();
    Ok(SandwichRun {
        alpha,
        rho_min: lo.exp(),
        rho_max: hi.exp(),
        tail_ratio: (hi - lo).exp(),
        slope_per_step,
        slope_loglog,
        exponential_growth: slope_per_step > tol.growth_rate || slope_loglog > tol.growth_exponent,
    })
}

/// Measure `ρ_n` over `n ∈ [n_lo, n_hi]` for each initial direction.
///
/// Growth is flagged when `ln ρ_n` rises faster than `growth_rate` per step over
/// the last decade, or faster than `n^growth_exponent` over the whole tail.
pub fn sandwich_verify(
    coeffs: &JacobiCoefficients,
    lambda: f64,
    alphas: &[[f64; 2]],
    n_lo: usize,
    n_hi: usize,
    tol: &Tolerances,
) -> Result<SandwichEstimate> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("at least one initial direction is required".into()));
    }
    if n_lo < 1 || n_hi <= n_lo {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= n_lo < n_hi, got [{n_lo}, {n_hi}]"
        )));
    }
    let runs = alphas
        .iter()
        .map(|&a| sandwich_run(coeffs, lambda, a, n_lo, n_hi, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(SandwichEstimate {
        lambda,
        n_lo,
        n_hi,
        c1_estimate: runs.iter().map(|r| r.rho_min).fold(f64::INFINITY, f64::min),
        c2_estimate: runs.iter().map(|r| r.rho_max).fold(f64::NEG_INFINITY, f64::max),
        tail_ratio: runs.iter().map(|r| r.tail_ratio).fold(f64::NEG_INFINITY, f64::max),
        exponential_growth: runs.iter().any(|r| r.exponential_growth),
        runs,
    })
}

/// `discr` of each limit matrix; all equal by conjugation invariance.
pub fn limit_discriminants(limits: &CriticalLimits, lambda: f64) -> Vec<f64> {
    limit_c_matrices(limits, lambda)
        .iter()
        .map(|c| discr(&c.scale(limits.gamma)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::b_matrix;
    use crate::sequences::FamilySpec;
    use proptest::prelude::*;

    fn moszynski() -> JacobiCoefficients {
        JacobiCoefficients::new(FamilySpec::MultipleWeights {
            period: 2,
            base: Box::new(FamilySpec::Power {
                kappa: 1.0,
                scale: 1.0,
                q: 0.0,
            }),
            q: 0.0,
        })
        .unwrap()
    }

    #[test]
    fn limits_bookkeeping() {
        for period in 2..9usize {
            for k0 in 1..period {
                let l = CriticalLimits::new(period, k0, vec![0.5; period]).unwrap();
                assert!(l.v(period as i64 - 1).abs() < 1e-10);
                let vn = if k0 % 2 == 0 { 1.0 } else { -1.0 };
                assert!((l.v(period as i64) - vn).abs() < 1e-10);
                assert_eq!(l.gamma * l.gamma, 1.0);
                assert!((l.gamma - (-1f64).powi(period as i32) * l.v(period as i64)).abs() < 1e-10);
                assert_eq!(l.big_s, 0.5 * period as f64);
            }
        }
        assert!(CriticalLimits::new(2, 2, vec![0.0; 2]).is_err());
        assert!(CriticalLimits::new(3, 1, vec![0.0; 2]).is_err());
    }

    #[test]
    fn c_sequence_cancels_exactly() {
        let c = JacobiCoefficients::from_fns(|_| 1.0, |_| 0.0, 2);
        assert_eq!(c_sequence(&c, 2, -1.0, 5, 0.0).unwrap(), Mat2::ZERO);
    }

    #[test]
    fn c_sequence_converges_to_limit_matrices() {
        let c = moszynski();
        let lambda = 1.0;
        let limits = CriticalLimits::new(2, 1, vec![1.0, 0.0]).unwrap();
        let expected = limit_c_matrices(&limits, lambda);
        for j in 0..2 {
            let near = c_sequence(&c, 2, limits.gamma, 2 * 9_000 + j, lambda).unwrap();
            let far = c_sequence(&c, 2, limits.gamma, 2 * 10_000 + j, lambda).unwrap();
            assert!(near.max_abs_diff(&far) < 1e-4);
            assert!(far.max_abs_diff(&expected[j]) < 1e-3, "{far:?} vs {:?}", expected[j]);
        }
    }

    #[test]
    fn c_tilde_examples() {
        assert_eq!(limit_c_tilde(3, 1, 0.0).unwrap().max_abs_diff(&Mat2::ZERO), 0.0);
        let m = limit_c_tilde(2, 1, 1.0).unwrap();
        assert!(m.max_abs_diff(&Mat2::new(0.0, 1.0, -1.0, 0.0)) < 1e-15);
        for (period, k0, lambda) in [(2, 1, 1.0), (3, 1, 0.7), (5, 2, -1.3), (6, 5, 2.0)] {
            let l = CriticalLimits::new(period, k0, vec![0.0; period]).unwrap();
            let closed = limit_c_tilde(period, k0, lambda).unwrap();
            // the error is O(1/a_n) with a constant growing with N
            let err = |a_n: f64| c_tilde_sequence(a_n, period, l.q, l.gamma, lambda).max_abs_diff(&closed);
            assert!(err(1e7 + 1.0) < 1e-4, "N={period} k0={k0}");
            assert!(err(1e7 + 1.0) < 0.02 * err(1e5 + 1.0), "N={period} k0={k0}");
            if period == 2 {
                assert!(err(1e5 + 1.0) < 1e-4);
            }
            let deriv = limit_c_tilde_derivative_form(period, k0, lambda).unwrap();
            assert!(deriv.max_abs_diff(&closed) < 1e-10, "N={period} k0={k0}");
        }
    }

    #[test]
    fn moszynski_gap() {
        let l = CriticalLimits::new(2, 1, vec![1.0, 0.0]).unwrap();
        let g = gap_quadratic(&l).unwrap();
        assert!((g.lambda_minus + 0.5).abs() < 1e-12 && (g.lambda_plus - 0.5).abs() < 1e-12);
        assert!(!g.degenerate_point);
        assert!(discr(&limit_c_matrices(&l, 1.0)[0]) < 0.0);
    }

    #[test]
    fn example_patterns() {
        // multiple weights: s_0 = s, others zero
        let l = CriticalLimits::new(3, 1, vec![1.0, 0.0, 0.0]).unwrap();
        let g = gap_quadratic(&l).unwrap();
        assert!((g.lambda_minus + 1.0 / 6.0).abs() < 1e-12 && (g.lambda_plus - 0.5).abs() < 1e-12);
        // additive periodic N = 2, d = (1, 0): s = (2, 0)
        let l = CriticalLimits::new(2, 1, vec![2.0, 0.0]).unwrap();
        let g = gap_quadratic(&l).unwrap();
        assert!((g.lambda_minus + 1.0).abs() < 1e-12 && (g.lambda_plus - 1.0).abs() < 1e-12);
        // all zero slopes: a single point
        let g = gap_quadratic(&CriticalLimits::new(4, 1, vec![0.0; 4]).unwrap()).unwrap();
        assert!(g.degenerate_point && g.lambda_minus == 0.0 && g.lambda_plus == 0.0);
    }

    #[test]
    fn estimated_slopes() {
        let (l, res) = estimate_critical_limits(&moszynski(), 2, 1, 1_000_000).unwrap();
        assert_eq!(l.s, vec![1.0, 0.0]);
        assert_eq!(res, vec![0.0, 0.0]);
    }

    #[test]
    fn trace_identity_and_zero_slopes() {
        let l = CriticalLimits::new(4, 3, vec![0.0; 4]).unwrap();
        let c = limit_c_tilde(4, 3, 0.8).unwrap();
        for m in limit_c_matrices(&l, 0.8) {
            assert_eq!(m, c);
        }
    }

    #[test]
    fn sandwich_moszynski() {
        let tol = Tolerances::default();
        let outside = sandwich_verify(&moszynski(), 1.0, &[[1.0, 0.0]], 10_000, 200_000, &tol).unwrap();
        assert!(!outside.exponential_growth);
        assert!(outside.tail_ratio < 3.1);
        let inside = sandwich_verify(&moszynski(), 0.0, &[[0.6, 0.8]], 10_000, 200_000, &tol).unwrap();
        assert!(inside.exponential_growth, "{inside:?}");
    }

    fn instance() -> impl Strategy<Value = (CriticalLimits, f64)> {
        (2usize..7)
            .prop_flat_map(|n| (Just(n), 1..n, proptest::collection::vec(-2.0..2.0f64, n), -3.0..3.0f64))
            .prop_map(|(n, k0, s, lambda)| (CriticalLimits::new(n, k0, s).unwrap(), lambda))
    }

    proptest! {
        #[test]
        fn conjugation_chain((l, lambda) in instance()) {
            let b = b_matrix(l.q);
            let b_inv = b.inverse().unwrap();
            let c = limit_c_matrices(&l, lambda);
            for j in 0..l.period {
                let next = b * c[j] * b_inv;
                prop_assert!(next.max_abs_diff(&c[(j + 1) % l.period]) < 1e-9);
            }
        }

        #[test]
        fn trace_identity((l, lambda) in instance()) {
            let c0 = limit_c_matrices(&l, lambda)[0].scale(l.gamma);
            prop_assert!((c0.trace() + l.big_s).abs() < 1e-10);
        }

        #[test]
        fn closed_form_matches_matrices((l, lambda) in instance()) {
            let closed = discr_closed_form(&l, lambda);
            for d in limit_discriminants(&l, lambda) {
                prop_assert!((d - closed).abs() < 1e-9 * (1.0 + closed.abs()));
            }
        }

        #[test]
        fn closed_form_is_quadratic_times_minus_four((l, lambda) in instance()) {
            if let Ok(g) = gap_quadratic(&l) {
                let closed = discr_closed_form(&l, lambda);
                prop_assert!((closed + 4.0 * g.eval(lambda)).abs() <= 1e-12 * (1.0 + closed.abs()));
            }
        }

        #[test]
        fn discriminant_sign_outside_roots((l, _lambda) in instance()) {
            if let Ok(g) = gap_quadratic(&l) {
                let width = (g.lambda_plus - g.lambda_minus).max(1.0);
                for i in 0..=40 {
                    let x = g.lambda_minus - width + 3.0 * width * i as f64 / 40.0;
                    let d = discr_closed_form(&l, x);
                    let margin = 1e-9 * width;
                    if x < g.lambda_minus - margin || x > g.lambda_plus + margin {
                        prop_assert!(d < 0.0, "x = {x}, d = {d}, {g:?}");
                    } else if x > g.lambda_minus + margin && x < g.lambda_plus - margin {
                        prop_assert!(d > 0.0, "x = {x}, d = {d}, {g:?}");
                    }
                }
            }
        }

        #[test]
        fn cyclic_shift_invariance((l, _lambda) in instance()) {
            if let Ok(g) = gap_quadratic(&l) {
                for shift in 1..l.period {
                    let h = gap_quadratic(&l.rotated(shift)).unwrap();
                    prop_assert!((h.lambda_minus - g.lambda_minus).abs() < 1e-10);
                    prop_assert!((h.lambda_plus - g.lambda_plus).abs() < 1e-10);
                }
            }
        }
    }
}
