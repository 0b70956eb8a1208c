//! Generalized eigenvectors, orthonormal polynomials and transfer matrices.
//!
//! A generalized eigenvector solves
//! `a_{n-1} u_{n-1} + b_n u_n + a_n u_{n+1} = λ u_n` for `n >= 1`. Long runs are
//! kept in range by rescaling the live pair `(u_{n-1}, u_n)` and carrying the
//! logarithm of the accumulated factor separately.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::linalg::Mat2;
use crate::sequences::JacobiCoefficients;
use crate::{Error, Result};

pub const DEFAULT_RENORM_EVERY: usize = 64;

/// Every index up to this one is sampled; past it only renormalization blocks are.
const DENSE_SAMPLES: usize = 1000;

// emergency rescaling bounds between scheduled renormalizations
const HUGE: f64 = 1e150;
const TINY: f64 = 1e-150;

/// `B_n^λ = [[0, 1], [-a_{n-1}/a_n, (λ - b_n)/a_n]]`, mapping `(u_{n-1}, u_n)` to `(u_n, u_{n+1})`.
pub fn transfer_matrix(coeffs: &JacobiCoefficients, n: usize, lambda: f64) -> Result<Mat2> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "transfer matrix needs n >= 1 (it uses a_{n-1})".into(),
        ));
    }
    let a_prev = coeffs.a(n - 1)?;
    let a = coeffs.a(n)?;
    let b = coeffs.b(n)?;
    Ok(Mat2::new(0.0, 1.0, -a_prev / a, (lambda - b) / a))
}

/// `X_n^λ = B_{n+N-1} ··· B_n`, mapping `(u_{n-1}, u_n)` to `(u_{n+N-1}, u_{n+N})`.
pub fn step_product(
    coeffs: &JacobiCoefficients,
    n: usize,
    period: usize,
    lambda: f64,
) -> Result<Mat2> {
    if period == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    let mut x = Mat2::IDENTITY;
    for j in n..n + period {
        x = transfer_matrix(coeffs, j, lambda)? * x;
    }
    Ok(x)
}

fn normalize(alpha: [f64; 2]) -> Result<[f64; 2]> {
    let norm = alpha[0].hypot(alpha[1]);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "initial direction must be finite and nonzero, got {alpha:?}"
        )));
    }
    Ok([alpha[0] / norm, alpha[1] / norm])
}

/// Live state of a rescaled recurrence: the true pair is `(prev, cur) * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub n: usize,
    pub prev: f64,
    pub cur: f64,
    pub log_scale: f64,
}

impl PairState {
    /// `(u_{n-1}, u_n)` in true scale; overflows to infinity or zero when the scale is extreme.
    pub fn true_pair(&self) -> [f64; 2] {
        let s = self.log_scale.exp();
        [self.prev * s, self.cur * s]
    }

    pub fn norm_sq(&self) -> f64 {
        self.prev * self.prev + self.cur * self.cur
    }
}

/// Step-by-step iteration of the eigenvector recurrence from `(u_0, u_1)`.
pub struct EigenvectorIter<'a> {
    coeffs: &'a JacobiCoefficients,
    lambda: f64,
    state: PairState,
    renorm_every: usize,
    since_renorm: usize,
    a_prev: f64,
}

impl<'a> EigenvectorIter<'a> {
    /// Start at `n = 1` with `(u_0, u_1) = init` (not normalized).
    pub fn new(
        coeffs: &'a JacobiCoefficients,
        lambda: f64,
        init: [f64; 2],
        renorm_every: usize,
    ) -> Result<Self> {
        if renorm_every == 0 {
            return Err(Error::InvalidArgument("renorm_every must be positive".into()));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("λ must be finite, got {lambda}")));
        }
        if !(init[0].is_finite() && init[1].is_finite()) || init == [0.0, 0.0] {
            return Err(Error::InvalidArgument(format!(
                "initial pair must be finite and nonzero, got {init:?}"
            )));
        }
        Ok(Self {
            coeffs,
            lambda,
            state: PairState {
                n: 1,
                prev: init[0],
                cur: init[1],
                log_scale: 0.0,
            },
            renorm_every,
            since_renorm: 0,
            a_prev: coeffs.a(0)?,
        })
    }

    pub fn state(&self) -> PairState {
        self.state
    }

    fn renormalize(&mut self) {
        let norm = self.state.norm_sq().sqrt();
        self.state.prev /= norm;
        self.state.cur /= norm;
        self.state.log_scale += norm.ln();
        self.since_renorm = 0;
    }

    /// Advance from `(u_{n-1}, u_n)` to `(u_n, u_{n+1})`.
    pub fn step(&mut self) -> Result<PairState> {
        let n = self.state.n;
        let a = self.coeffs.a(n)?;
        let b = self.coeffs.b(n)?;
        let next = ((self.lambda - b) * self.state.cur - self.a_prev * self.state.prev) / a;
        if !next.is_finite() {
            return Err(Error::NonFinite {
                what: "u_{n+1}",
                index: n + 1,
            });
        }
        self.a_prev = a;
        self.state.prev = self.state.cur;
        self.state.cur = next;
        self.state.n = n + 1;
        self.since_renorm += 1;
        let norm_sq = self.state.norm_sq();
        if norm_sq == 0.0 {
            // impossible in exact arithmetic; both entries underflowed
            return Err(Error::NonFinite {
                what: "(u_{n-1}, u_n) vanished",
                index: n + 1,
            });
        }
        if self.since_renorm >= self.renorm_every || !(TINY..=HUGE).contains(&norm_sq) {
            self.renormalize();
        }
        Ok(self.state)
    }

    pub fn renorm_due(&self) -> bool {
        self.since_renorm == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub n: usize,
    pub u_prev: f64,
    pub u_cur: f64,
    pub log_scale: f64,
}

impl TrajectorySample {
    pub fn true_pair(&self) -> [f64; 2] {
        let s = self.log_scale.exp();
        [self.u_prev * s, self.u_cur * s]
    }
}

/// A sampled generalized eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub lambda: f64,
    /// Unit initial data `(u_0, u_1)`.
    pub alpha: [f64; 2],
    /// Initial direction as supplied, before normalization.
    pub alpha_input: [f64; 2],
    pub renorm_every: usize,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,u_prev,u_cur,log_scale")?;
        for s in &self.samples {
            writeln!(w, "{},{:.16e},{:.16e},{:.16e}", s.n, s.u_prev, s.u_cur, s.log_scale)?;
        }
        Ok(())
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("a trajectory has at least one sample")
    }
}

/// Iterate the recurrence from unit initial data `α` up to `n_max`.
pub fn iterate_eigenvector(
    coeffs: &JacobiCoefficients,
    lambda: f64,
    alpha: [f64; 2],
    n_max: usize,
    renorm_every: usize,
) -> Result<Trajectory> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let unit = normalize(alpha)?;
    let mut it = EigenvectorIter::new(coeffs, lambda, unit, renorm_every)?;
    let sample = |s: PairState| TrajectorySample {
        n: s.n,
        u_prev: s.prev,
        u_cur: s.cur,
        log_scale: s.log_scale,
    };
    let mut samples = vec![sample(it.state())];
    while it.state().n < n_max {
        let s = it.step()?;
        if s.n <= DENSE_SAMPLES || it.renorm_due() || s.n == n_max {
            samples.push(sample(s));
        }
    }
    Ok(Trajectory {
        lambda,
        alpha: unit,
        alpha_input: alpha,
        renorm_every,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolySample {
    pub n: usize,
    pub p: f64,
    /// `sum_{k <= n} p_k^2`.
    pub partial_sum_sq: f64,
}

/// Orthonormal polynomials `p_0(λ), ..., p_{n_max}(λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTrajectory {
    pub lambda: f64,
    pub samples: Vec<PolySample>,
}

impl PolyTrajectory {
    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.p).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,p_n,partial_sum_sq")?;
        for s in &self.samples {
            writeln!(w, "{},{:.16e},{:.16e}", s.n, s.p, s.partial_sum_sq)?;
        }
        Ok(())
    }
}

/// `p_{-1} = 0`, `p_0 = 1`, `a_n p_{n+1} = (λ - b_n) p_n - a_{n-1} p_{n-1}`.
pub fn orthonormal_polys(
    coeffs: &JacobiCoefficients,
    lambda: f64,
    n_max: usize,
) -> Result<PolyTrajectory> {
    let mut samples = Vec::with_capacity(n_max + 1);
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut a_prev = 0.0;
    let mut sum = crate::sum::NeumaierSum::new();
    sum += 1.0;
    samples.push(PolySample {
        n: 0,
        p: 1.0,
        partial_sum_sq: 1.0,
    });
    for n in 0..n_max {
        let a = coeffs.a(n)?;
        let next = ((lambda - coeffs.b(n)?) * cur - a_prev * prev) / a;
        if !next.is_finite() {
            return Err(Error::NonFinite {
                what: "p_n",
                index: n + 1,
            });
        }
        (prev, cur, a_prev) = (cur, next, a);
        sum += next * next;
        samples.push(PolySample {
            n: n + 1,
            p: next,
            partial_sum_sq: sum.value(),
        });
    }
    Ok(PolyTrajectory { lambda, samples })
}

/// Two prepended coefficients turning a generalized eigenvector into polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionResult {
    pub lambda: f64,
    pub u0: f64,
    pub u1: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a_head: [f64; 2],
    pub b_head: [f64; 2],
    /// Index shift: `p̃_{n + shift}(λ) = u_n`.
    pub shift: usize,
    /// Residuals of the three defining equations at the returned parameters.
    pub residuals: [f64; 3],
}

impl ExtensionResult {
    /// The extended sequences `ã = (ã_0, ã_1, a_0, a_1, ...)`, `b̃` likewise.
    pub fn extended_coefficients(&self, coeffs: &JacobiCoefficients) -> Result<JacobiCoefficients> {
        coeffs.prepend(self.a_head.to_vec(), self.b_head.to_vec())
    }
}

/// Prepend `ã_0, ã_1, b̃_0, b̃_1` so that the new polynomials satisfy `p̃_{n+2}(λ) = u_n`.
///
/// `γ` is any value with `γ ≠ λ`, `γβ > 0` and `1 + (β/γ) u_0 > 0`; we start from
/// `sign(β) max(1, 2|β u_0|)` and double it until those hold.
pub fn extend_to_polynomials(
    coeffs: &JacobiCoefficients,
    lambda: f64,
    init: [f64; 2],
) -> Result<ExtensionResult> {
    let [u0, u1] = init;
    let a0 = coeffs.a(0)?;
    let b0 = coeffs.b(0)?;
    let beta = (lambda - b0) * u0 - a0 * u1;
    let scale = ((lambda - b0) * u0).abs().max((a0 * u1).abs()).max(f64::MIN_POSITIVE);
    if beta.abs() <= 1e-12 * scale || beta == 0.0 {
        return Err(Error::DegenerateDirection { beta });
    }
    let mut gamma = beta.signum() * 1f64.max(2.0 * (beta * u0).abs());
    while gamma == lambda || !(1.0 + beta / gamma * u0 > 0.0) {
        gamma *= 2.0;
        if !gamma.is_finite() {
            return Err(Error::NonFinite {
                what: "extension parameter γ",
                index: 0,
            });
        }
    }
    let a_t0 = gamma.abs() / (1.0 + beta / gamma * u0).sqrt();
    let a_t1 = beta / gamma * a_t0;
    let b_t = lambda - gamma;
    let p1 = gamma / a_t0;
    let residuals = [
        b_t + a_t0 * p1 - lambda,
        a_t0 + b_t * p1 + a_t1 * u0 - lambda * p1,
        a_t1 * p1 + b0 * u0 + a0 * u1 - lambda * u0,
    ];
    Ok(ExtensionResult {
        lambda,
        u0,
        u1,
        beta,
        gamma,
        a_head: [a_t0, a_t1],
        b_head: [b_t, b_t],
        shift: 2,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::w_poly;
    use crate::linalg::ordered_product;
    use crate::sequences::FamilySpec;
    use proptest::prelude::*;

    fn free() -> JacobiCoefficients {
        JacobiCoefficients::from_fns(|_| 1.0, |_| 0.0, 1)
    }

    fn power(kappa: f64) -> JacobiCoefficients {
        JacobiCoefficients::new(FamilySpec::Power {
            kappa,
            scale: 1.0,
            q: 0.0,
        })
        .unwrap()
    }

    #[test]
    fn transfer_matrix_examples() {
        assert_eq!(transfer_matrix(&free(), 3, 0.0).unwrap(), Mat2::new(0.0, 1.0, -1.0, 0.0));
        let m = transfer_matrix(&power(1.0), 2, 1.0).unwrap();
        assert!(m.max_abs_diff(&Mat2::new(0.0, 1.0, -2.0 / 3.0, 1.0 / 3.0)) < 1e-15);
        assert!(transfer_matrix(&free(), 0, 0.0).is_err());
        assert_eq!(step_product(&power(1.0), 4, 1, 0.3).unwrap(), transfer_matrix(&power(1.0), 4, 0.3).unwrap());
    }

    #[test]
    fn free_alternation() {
        let t = iterate_eigenvector(&free(), 0.0, [1.0, 0.0], 12, 64).unwrap();
        let u: Vec<f64> = t.samples.iter().map(|s| s.true_pair()[1]).collect();
        assert_eq!(&u[..6], &[0.0, -1.0, 0.0, 1.0, 0.0, -1.0]);
    }

    #[test]
    fn spectral_edge_constant_solution() {
        let t = iterate_eigenvector(&free(), 2.0, [1.0, 1.0], 500, 64).unwrap();
        for s in &t.samples {
            let [p, c] = s.true_pair();
            assert!((p - 0.5f64.sqrt()).abs() < 1e-12 && (c - 0.5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn renormalized_pairs_stay_bounded() {
        // inside-gap growth would overflow without rescaling
        let t = iterate_eigenvector(&free(), 5.0, [0.3, 0.7], 100_000, 64).unwrap();
        // past the dense prefix every sample but the last is taken right after a rescaling
        for s in t.samples.iter().filter(|s| s.n > DENSE_SAMPLES && s.n < 100_000) {
            let norm = s.u_prev.hypot(s.u_cur);
            assert!((1e-3..=1e3).contains(&norm), "n = {}: {norm}", s.n);
        }
        assert!(t.last().log_scale > 1e4);
        assert_eq!(t.last().n, 100_000);
    }

    #[test]
    fn polys_match_chebyshev() {
        for i in 0..40 {
            let x = -1.95 + 3.9 * i as f64 / 39.0;
            let p = orthonormal_polys(&free(), x, 50).unwrap();
            for s in &p.samples {
                assert!((s.p - w_poly(s.n as i64, x)).abs() < 1e-10);
            }
        }
        let c = power(0.6);
        let p = orthonormal_polys(&c, 0.4, 1).unwrap();
        assert_eq!(p.samples[1].p, (0.4 - c.b(0).unwrap()) / c.a(0).unwrap());
    }

    #[test]
    fn polys_are_formal_eigenvectors() {
        let c = power(0.8);
        let lambda = 0.9;
        let p = orthonormal_polys(&c, lambda, 200).unwrap().values();
        for n in 1..200 {
            let lhs = c.a(n - 1).unwrap() * p[n - 1] + c.b(n).unwrap() * p[n] + c.a(n).unwrap() * p[n + 1];
            assert!((lhs - lambda * p[n]).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn extension_hand_example() {
        let e = extend_to_polynomials(&free(), 0.0, [0.0, 1.0]).unwrap();
        assert_eq!(e.beta, -1.0);
        assert_eq!(e.gamma, -1.0);
        assert_eq!(e.a_head, [1.0, 1.0]);
        assert_eq!(e.b_head, [1.0, 1.0]);
        let ext = e.extended_coefficients(&free()).unwrap();
        let p = orthonormal_polys(&ext, 0.0, 3).unwrap().values();
        assert_eq!((p[2], p[3]), (0.0, 1.0));
    }

    #[test]
    fn extension_rejects_polynomial_direction() {
        let c = power(0.5);
        let p1 = orthonormal_polys(&c, 0.7, 1).unwrap().values()[1];
        let err = extend_to_polynomials(&c, 0.7, [2.5, 2.5 * p1]).unwrap_err();
        assert!(matches!(err, Error::DegenerateDirection { .. }));
    }

    proptest! {
        #[test]
        fn step_product_determinant_telescopes(kappa in 0.2..1.0f64, n in 1usize..500, period in 1usize..7, lambda in -3.0..3.0f64) {
            let c = power(kappa);
            let x = step_product(&c, n, period, lambda).unwrap();
            let ratio = x.det() * c.a(n + period - 1).unwrap() / c.a(n - 1).unwrap();
            prop_assert!((ratio - 1.0).abs() < 1e-12);
        }

        #[test]
        fn transfer_determinant(kappa in 0.2..1.0f64, n in 1usize..10_000, lambda in -3.0..3.0f64) {
            let c = power(kappa);
            let b = transfer_matrix(&c, n, lambda).unwrap();
            let expected = c.a(n - 1).unwrap() / c.a(n).unwrap();
            prop_assert!((b.det() - expected).abs() <= 1e-15 * expected.max(1.0));
        }

        #[test]
        fn block_products_follow_the_recurrence(kappa in 0.2..1.0f64, period in 1usize..5, lambda in -2.0..2.0f64, theta in 0.0..std::f64::consts::TAU) {
            let c = power(kappa);
            let alpha = [theta.cos(), theta.sin()];
            let blocks = 40;
            let t = iterate_eigenvector(&c, lambda, alpha, blocks * period + 1, 64).unwrap();
            for k in 1..=blocks {
                let x = ordered_product(|m| step_product(&c, 1 + m as usize * period, period, lambda).unwrap(), 0, k as i64 - 1);
                let v = x.apply(alpha);
                let s = t.samples.iter().find(|s| s.n == k * period + 1).unwrap().true_pair();
                let scale = v[0].hypot(v[1]);
                prop_assert!((v[0] - s[0]).abs() <= 1e-10 * scale && (v[1] - s[1]).abs() <= 1e-10 * scale);
            }
        }

        #[test]
        fn linearity(kappa in 0.2..1.0f64, lambda in -2.0..2.0f64, c1 in -2.0..2.0f64, c2 in -2.0..2.0f64) {
            prop_assume!(c1.abs() + c2.abs() > 0.1);
            let c = power(kappa);
            let run = |init: [f64; 2]| {
                let mut it = EigenvectorIter::new(&c, lambda, init, 64).unwrap();
                let mut out = vec![];
                for _ in 0..3000 { out.push(it.step().unwrap().true_pair()); }
                out
            };
            let (x, y) = (run([1.0, 0.0]), run([0.0, 1.0]));
            let z = run([c1, c2]);
            for i in 0..z.len() {
                for k in 0..2 {
                    let lin = c1 * x[i][k] + c2 * y[i][k];
                    let scale = (c1 * x[i][0]).hypot(c1 * x[i][1]) + (c2 * y[i][0]).hypot(c2 * y[i][1]);
                    prop_assert!((z[i][k] - lin).abs() <= 1e-10 * scale);
                }
            }
        }

        #[test]
        fn no_double_zero(kappa in 0.2..1.0f64, lambda in -3.0..3.0f64, theta in 0.0..std::f64::consts::TAU) {
            let t = iterate_eigenvector(&power(kappa), lambda, [theta.cos(), theta.sin()], 20_000, 64).unwrap();
            prop_assert!((theta.cos().hypot(theta.sin()) - 1.0).abs() < 1e-12);
            prop_assert!(t.samples.iter().all(|s| s.u_prev * s.u_prev + s.u_cur * s.u_cur > 0.0));
        }

        #[test]
        fn extension_exact(kappa in 0.2..1.0f64, lambda in -2.0..2.0f64, u0 in -3.0..3.0f64, u1 in -3.0..3.0f64) {
            let c = power(kappa);
            let e = match extend_to_polynomials(&c, lambda, [u0, u1]) {
                Ok(e) => e,
                Err(Error::DegenerateDirection { .. }) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            prop_assert!(e.gamma != lambda && e.gamma * e.beta > 0.0 && 1.0 + e.beta / e.gamma * u0 > 0.0);
            prop_assert!(e.a_head[0] > 0.0 && e.a_head[1] > 0.0);
            for r in e.residuals {
                prop_assert!(r.abs() < 1e-12 * (1.0 + e.gamma.abs()).powi(2));
            }
        }
    }
}
