//! Chebyshev polynomials of the second kind.
//!
//! `U_n` follows `U_{-1} = 0`, `U_0 = 1`, `U_{n+1}(x) = 2x U_n(x) - U_{n-1}(x)`,
//! and the rescaled `w_n(x) = U_n(x / 2)` follows `w_{n+1}(x) = x w_n(x) - w_{n-1}(x)`.
//! Negative degrees extend the recurrence backwards, which gives
//! `w_{-k}(x) = -w_{k-2}(x)`; in particular `w_{-2} = -1`.
//!
//! Values are computed by forward recurrence. On `[-2, 2]` the recurrence is
//! stable for the degrees used here and stays exact at the endpoints, where the
//! trigonometric closed form is singular.

use crate::linalg::Mat2;
use crate::{Error, Result};

/// `w_n(x)` for any integer degree.
pub fn w_poly(n: i64, x: f64) -> f64 {
    if n < -1 {
        return -w_poly(-n - 2, x);
    }
    if n == -1 {
        return 0.0;
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..n {
        let next = x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `U_n(x)` for any integer degree.
pub fn u_poly(n: i64, x: f64) -> f64 {
    w_poly(n, 2.0 * x)
}

/// `[w_{-1}(x), w_0(x), ..., w_{n_max}(x)]`; index `k + 1` holds `w_k`.
pub fn w_table(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 2);
    out.push(0.0);
    out.push(1.0);
    for k in 1..=n_max {
        let next = x * out[k] - out[k - 1];
        out.push(next);
    }
    out
}

/// `w_n'(x) = ((n + 2) w_{n-1}(x) - n w_{n+1}(x)) / (4 - x^2)` for `|x| < 2`.
pub fn w_derivative(n: i64, x: f64) -> Result<f64> {
    if !(x.abs() < 2.0) {
        return Err(Error::DerivativeDomain(x));
    }
    let nf = n as f64;
    Ok(((nf + 2.0) * w_poly(n - 1, x) - nf * w_poly(n + 1, x)) / (4.0 - x * x))
}

/// Both sides of `w_{i-1} w_{j-1} - w_i w_{j-2} = w_{i-j}` and their difference.
pub fn product_identity(i: i64, j: i64, x: f64) -> (f64, f64, f64) {
    let lhs = w_poly(i - 1, x) * w_poly(j - 1, x) - w_poly(i, x) * w_poly(j - 2, x);
    let rhs = w_poly(i - j, x);
    (lhs, rhs, lhs - rhs)
}

/// `B = [[0, 1], [-1, -q]]`, the common limit of the transfer matrices in the
/// critical regime.
pub fn b_matrix(q: f64) -> Mat2 {
    Mat2::new(0.0, 1.0, -1.0, -q)
}

/// `B^n = (-1)^n [[-w_{n-2}(q), -w_{n-1}(q)], [w_{n-1}(q), w_n(q)]]`.
///
/// Valid for negative `n` as well, where it yields the inverse powers.
pub fn b_power(q: f64, n: i64) -> Mat2 {
    let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Mat2::new(
        -w_poly(n - 2, q),
        -w_poly(n - 1, q),
        w_poly(n - 1, q),
        w_poly(n, q),
    )
    .scale(sign)
}

/// `2 cos(k0 π / N)`, a zero of `w_{N-1}`.
pub fn critical_q(period: usize, k0: usize) -> f64 {
    2.0 * (k0 as f64 * std::f64::consts::PI / period as f64).cos()
}
