//! 2×2 real matrices and binary quadratic forms.
//!
//! All products follow the descending-index convention: the product of
//! `C_{n0}, ..., C_{n1}` is `C_{n1} C_{n1 - 1} ... C_{n0}`, and the identity when
//! `n1 < n0`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A 2×2 real matrix `[[m11, m12], [m21, m22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

/// The rotation `E = [[0, -1], [1, 0]]`.
pub const E: Mat2 = Mat2::new(0.0, -1.0, 1.0, 0.0);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Self {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn to_rows(self) -> [[f64; 2]; 2] {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m11, self.m21, self.m12, self.m22)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(c * self.m11, c * self.m12, c * self.m21, c * self.m22)
    }

    /// Inverse via the adjugate; `None` for a singular matrix.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Self::new(self.m22, -self.m12, -self.m21, self.m11).scale(1.0 / d))
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    pub fn frobenius(&self) -> f64 {
        (self.m11 * self.m11 + self.m12 * self.m12 + self.m21 * self.m21 + self.m22 * self.m22)
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (self.m11 - other.m11)
            .abs()
            .max((self.m12 - other.m12).abs())
            .max((self.m21 - other.m21).abs())
            .max((self.m22 - other.m22).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * r.m11 + self.m12 * r.m21,
            self.m11 * r.m12 + self.m12 * r.m22,
            self.m21 * r.m11 + self.m22 * r.m21,
            self.m21 * r.m12 + self.m22 * r.m22,
        )
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;

    fn mul(self, c: f64) -> Mat2 {
        self.scale(c)
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.m11 + r.m11, self.m12 + r.m12, self.m21 + r.m21, self.m22 + r.m22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.m11 - r.m11, self.m12 - r.m12, self.m21 - r.m21, self.m22 - r.m22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;

    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

/// `(C + C^t) / 2`.
pub fn sym(c: &Mat2) -> Mat2 {
    let off = 0.5 * (c.m12 + c.m21);
    Mat2::new(c.m11, off, off, c.m22)
}

/// `(tr C)^2 - 4 det C`.
pub fn discr(c: &Mat2) -> f64 {
    let t = c.trace();
    t * t - 4.0 * c.det()
}

/// `det(sym(E C))`, which equals `-discr(C) / 4`.
pub fn det_sym_e(c: &Mat2) -> f64 {
    sym(&(E * *c)).det()
}

/// Descending product `C_{n1} C_{n1-1} ... C_{n0}`; identity when `n1 < n0`.
pub fn ordered_product<F>(factors: F, n0: i64, n1: i64) -> Mat2
where
    F: Fn(i64) -> Mat2,
{
    let mut acc = Mat2::IDENTITY;
    let mut k = n0;
    while k <= n1 {
        acc = factors(k) * acc;
        k += 1;
    }
    acc
}

/// Fallible variant of [`ordered_product`] for factors that can fail to evaluate.
pub fn try_ordered_product<F, E>(factors: F, n0: i64, n1: i64) -> Result<Mat2, E>
where
    F: Fn(i64) -> Result<Mat2, E>,
{
    let mut acc = Mat2::IDENTITY;
    let mut k = n0;
    while k <= n1 {
        acc = factors(k)? * acc;
        k += 1;
    }
    Ok(acc)
}

/// A binary quadratic form `Q(v) = <M v, v>` stored by its symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadForm {
    matrix: Mat2,
}

impl QuadForm {
    /// Form of an arbitrary matrix; only the symmetric part contributes.
    pub fn from_matrix(m: &Mat2) -> Self {
        Self { matrix: sym(m) }
    }

    pub fn matrix(&self) -> Mat2 {
        self.matrix
    }

    pub fn eval(&self, v: [f64; 2]) -> f64 {
        let mv = self.matrix.apply(v);
        mv[0] * v[0] + mv[1] * v[1]
    }

    pub fn det(&self) -> f64 {
        self.matrix.det()
    }

    /// Eigenvalues `(smaller, larger)` of the symmetric representative.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = &self.matrix;
        let mean = 0.5 * (m.m11 + m.m22);
        let half_gap = (0.25 * (m.m11 - m.m22).powi(2) + m.m12 * m.m12).sqrt();
        (mean - half_gap, mean + half_gap)
    }

    /// Definite forms satisfy `c^-1 |v|^2 <= |Q(v)| <= c |v|^2`; returns the
    /// ratio of extreme eigenvalue magnitudes, or `None` when indefinite.
    pub fn condition(&self) -> Option<f64> {
        let (lo, hi) = self.eigenvalues();
        if lo * hi <= 0.0 {
            return None;
        }
        Some(hi.abs().max(lo.abs()) / hi.abs().min(lo.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sym_examples() {
        assert_eq!(sym(&E), Mat2::ZERO);
        assert_eq!(
            sym(&Mat2::new(1.0, 2.0, 0.0, 1.0)),
            Mat2::new(1.0, 1.0, 1.0, 1.0)
        );
        let s = Mat2::new(3.0, -2.0, -2.0, 5.0);
        assert_eq!(sym(&s), s);
    }

    #[test]
    fn discr_examples() {
        assert_eq!(discr(&Mat2::IDENTITY), 0.0);
        assert_eq!(discr(&Mat2::new(0.0, 1.0, -1.0, 0.0)), -4.0);
    }

    #[test]
    fn ordered_product_conventions() {
        let f = |k: i64| Mat2::new(k as f64, 1.0, 0.0, 1.0);
        assert_eq!(ordered_product(f, 3, 2), Mat2::IDENTITY);
        assert_eq!(ordered_product(f, 4, 4), f(4));
        // [[1,1],[0,1]] then [[0,1],[1,0]]: hand product of the second times the first
        let g = |k: i64| {
            if k == 0 {
                Mat2::new(1.0, 1.0, 0.0, 1.0)
            } else {
                Mat2::new(0.0, 1.0, 1.0, 0.0)
            }
        };
        assert_eq!(ordered_product(g, 0, 1), Mat2::new(0.0, 1.0, 1.0, 1.0));
        assert_ne!(ordered_product(g, 0, 1), g(0) * g(1));
    }

    #[test]
    fn det_sym_e_examples() {
        // EF = [[1, q], [0, 1]] for F = [[0,1],[-1,-q]]
        let q = 0.7;
        let f = Mat2::new(0.0, 1.0, -1.0, -q);
        assert!((det_sym_e(&f) - (1.0 - q * q / 4.0)).abs() < 1e-15);
        let tr = f.trace();
        assert!((det_sym_e(&f) + 0.25 * (tr - 2.0) * (tr + 2.0)).abs() < 1e-15);
        assert_eq!(det_sym_e(&Mat2::IDENTITY), 0.0);
    }

    #[test]
    fn quad_form_uses_symmetric_part() {
        let m = Mat2::new(1.0, 4.0, -2.0, 3.0);
        let q = QuadForm::from_matrix(&m);
        let v = [0.3, -1.7];
        let direct = {
            let mv = m.apply(v);
            mv[0] * v[0] + mv[1] * v[1]
        };
        assert!((q.eval(v) - direct).abs() < 1e-14);
        let (lo, hi) = QuadForm::from_matrix(&Mat2::new(1.0, 0.5, 0.5, 1.0)).eigenvalues();
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 1.5).abs() < 1e-15);
    }

    fn mat() -> impl Strategy<Value = Mat2> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(|e| Mat2::new(e[0], e[1], e[2], e[3]))
    }

    proptest! {
        #[test]
        fn det_sym_e_is_minus_quarter_discr(c in mat()) {
            let lhs = det_sym_e(&c);
            let rhs = -discr(&c) / 4.0;
            let scale = c.frobenius().powi(2).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn discr_conjugation_invariant(c in mat(), p in mat()) {
            prop_assume!(p.det().abs() > 1.0);
            let pinv = p.inverse().unwrap();
            let conj = p * c * pinv;
            let d = discr(&c);
            let cond = p.frobenius() * pinv.frobenius();
            let scale = (c.frobenius().powi(2) * cond * cond).max(1.0);
            prop_assert!((discr(&conj) - d).abs() <= 1e-10 * scale);
        }

        #[test]
        fn ordered_product_splits(entries in prop::collection::vec(prop::array::uniform4(-2.0f64..2.0), 1..12), split in 0usize..12) {
            let fs: Vec<Mat2> = entries.iter().map(|e| Mat2::new(e[0], e[1], e[2], e[3])).collect();
            let n1 = fs.len() as i64 - 1;
            let m = (split as i64).min(n1);
            let f = |k: i64| fs[k as usize];
            let whole = ordered_product(f, 0, n1);
            let split_prod = ordered_product(f, m + 1, n1) * ordered_product(f, 0, m);
            let scale = fs.iter().map(|x| x.frobenius().max(1.0)).product::<f64>();
            prop_assert!(whole.max_abs_diff(&split_prod) <= 1e-12 * scale);
        }
    }
}
