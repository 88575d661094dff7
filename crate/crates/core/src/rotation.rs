//! The plane (Jacobi) rotation kernel shared by the treelet transform and the
//! cyclic Jacobi eigensolver.
//!
//! Convention: a rotation by `theta` on coordinates `(i, j)` maps
//!
//! ```text
//! y_i =  c * x_i + s * x_j
//! y_j = -s * x_i + c * x_j        c = cos(theta), s = sin(theta)
//! ```
//!
//! so for `x = (1, 1)` and `theta = pi/4`, `y = (sqrt 2, 0)`, and for
//! `x = (1, -1)`, `y = (0, -sqrt 2)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use ndarray::Array2;

use crate::error::{Error, Result};

/// Angle that decorrelates a pair with variances `a`, `b` and covariance
/// `c_ab`, folded into `[-pi/4, pi/4]`.
pub fn jacobi_angle(a: f64, b: f64, c_ab: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c_ab.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let mut theta = 0.5 * (2.0 * c_ab).atan2(a - b);
    if theta > FRAC_PI_4 {
        theta -= FRAC_PI_2;
    } else if theta < -FRAC_PI_4 {
        theta += FRAC_PI_2;
    }
    Ok(theta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneRotation {
    pub theta: f64,
    pub c: f64,
    pub s: f64,
}

impl PlaneRotation {
    pub fn new(theta: f64) -> Self {
        PlaneRotation {
            theta,
            c: theta.cos(),
            s: theta.sin(),
        }
    }

    /// Rotation zeroing the covariance of a `(a, c_ab; c_ab, b)` block.
    pub fn decorrelating(a: f64, b: f64, c_ab: f64) -> Result<Self> {
        jacobi_angle(a, b, c_ab).map(Self::new)
    }

    #[inline]
    pub fn apply(&self, xi: f64, xj: f64) -> (f64, f64) {
        (self.c * xi + self.s * xj, -self.s * xi + self.c * xj)
    }

    #[inline]
    pub fn apply_inverse(&self, yi: f64, yj: f64) -> (f64, f64) {
        (self.c * yi - self.s * yj, self.s * yi + self.c * yj)
    }

    /// Full rotated 2x2 block `(a', b', c')` computed by direct congruence.
    pub fn rotate_block(&self, a: f64, b: f64, c_ab: f64) -> (f64, f64, f64) {
        let (c, s) = (self.c, self.s);
        let a2 = c * c * a + 2.0 * c * s * c_ab + s * s * b;
        let b2 = s * s * a - 2.0 * c * s * c_ab + c * c * b;
        let c2 = c * s * (b - a) + (c * c - s * s) * c_ab;
        (a2, b2, c2)
    }

    /// Post-rotation variances for a rotation that decorrelates the block.
    /// Uses `a + t c_ab`, `b - t c_ab` (`t = tan theta`), which conserves the
    /// trace far better than the congruence form.
    pub fn decorrelated_variances(&self, a: f64, b: f64, c_ab: f64) -> (f64, f64) {
        let t = self.s / self.c;
        (a + t * c_ab, b - t * c_ab)
    }

    /// Applies `J^T M J` on rows/columns `i`, `j` of a symmetric matrix, in
    /// O(p). Assumes `self` decorrelates the `(i, j)` block, whose
    /// off-diagonal is set to exactly zero.
    pub fn rotate_symmetric(&self, m: &mut Array2<f64>, i: usize, j: usize) {
        let p = m.nrows();
        let (a, b, c_ab) = (m[[i, i]], m[[j, j]], m[[i, j]]);
        for k in 0..p {
            if k == i || k == j {
                continue;
            }
            let (ri, rj) = self.apply(m[[i, k]], m[[j, k]]);
            m[[i, k]] = ri;
            m[[k, i]] = ri;
            m[[j, k]] = rj;
            m[[k, j]] = rj;
        }
        let (a2, b2) = self.decorrelated_variances(a, b, c_ab);
        m[[i, i]] = a2;
        m[[j, j]] = b2;
        m[[i, j]] = 0.0;
        m[[j, i]] = 0.0;
    }

    /// Right-multiplies `basis` by the transpose of this rotation: columns
    /// `i`, `j` become the rotated basis vectors.
    pub fn rotate_columns(&self, basis: &mut Array2<f64>, i: usize, j: usize) {
        for r in 0..basis.nrows() {
            let (u, v) = self.apply(basis[[r, i]], basis[[r, j]]);
            basis[[r, i]] = u;
            basis[[r, j]] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Eigenvalues of a symmetric 2x2 block from its characteristic polynomial.
    fn eig2(a: f64, b: f64, c: f64) -> (f64, f64) {
        let mid = 0.5 * (a + b);
        let rad = (0.25 * (a - b) * (a - b) + c * c).sqrt();
        (mid + rad, mid - rad)
    }

    #[test]
    fn already_decorrelated() {
        assert_eq!(jacobi_angle(1.0, 2.0, 0.0).unwrap(), 0.0);
        assert_eq!(jacobi_angle(2.0, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(jacobi_angle(0.0, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn equal_variances_unit_covariance() {
        let theta = jacobi_angle(1.0, 1.0, 1.0).unwrap();
        assert!((theta - FRAC_PI_4).abs() < 1e-15);
        let r = PlaneRotation::new(theta);
        let (va, vb) = r.decorrelated_variances(1.0, 1.0, 1.0);
        assert!((va - 2.0).abs() < 1e-12);
        assert!(vb.abs() < 1e-12);
    }

    #[test]
    fn golden_ratio_block() {
        let theta = jacobi_angle(2.0, 1.0, 1.0).unwrap();
        assert!((theta - 0.5 * 2.0f64.atan()).abs() < 1e-15);
        assert!((theta - 0.553574).abs() < 1e-6);
        let (va, vb) = PlaneRotation::new(theta).decorrelated_variances(2.0, 1.0, 1.0);
        let s5 = 5.0f64.sqrt();
        assert!((va - (3.0 + s5) / 2.0).abs() < 1e-12);
        assert!((vb - (3.0 - s5) / 2.0).abs() < 1e-12);
        assert!((va - 2.618034).abs() < 1e-6);
    }

    #[test]
    fn non_finite_is_rejected() {
        assert_eq!(jacobi_angle(f64::NAN, 1.0, 0.0), Err(Error::NonFiniteInput));
        assert_eq!(
            jacobi_angle(1.0, f64::INFINITY, 0.0),
            Err(Error::NonFiniteInput)
        );
    }

    #[test]
    fn vector_sign_convention() {
        let r = PlaneRotation::new(FRAC_PI_4);
        let (y0, y1) = r.apply(1.0, 1.0);
        assert!((y0 - 2f64.sqrt()).abs() < 1e-15 && y1.abs() < 1e-15);
        let (y0, y1) = r.apply(1.0, -1.0);
        assert!(y0.abs() < 1e-15 && (y1 + 2f64.sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn zeroes_off_diagonal(a in 0.0..100.0f64, b in 0.0..100.0f64, c in -100.0..100.0f64) {
            let theta = jacobi_angle(a, b, c).unwrap();
            prop_assert!(theta.abs() <= FRAC_PI_4);
            let r = PlaneRotation::new(theta);
            prop_assert!((r.c * r.c + r.s * r.s - 1.0).abs() < 1e-12);
            let (_, _, off) = r.rotate_block(a, b, c);
            prop_assert!(off.abs() <= 1e-12 * a.max(b).max(1.0) * 10.0);
        }

        #[test]
        fn variances_are_eigenvalues(a in 0.0..10.0f64, b in 0.0..10.0f64, c in -10.0..10.0f64) {
            let r = PlaneRotation::decorrelating(a, b, c).unwrap();
            let (va, vb) = r.decorrelated_variances(a, b, c);
            let (hi, lo) = eig2(a, b, c);
            let (got_hi, got_lo) = if va >= vb { (va, vb) } else { (vb, va) };
            prop_assert!((got_hi - hi).abs() < 1e-12 * hi.abs().max(1.0));
            prop_assert!((got_lo - lo).abs() < 1e-12 * hi.abs().max(1.0));
        }

        #[test]
        fn inverse_undoes_apply(theta in -1.0..1.0f64, x in -1e3..1e3f64, y in -1e3..1e3f64) {
            let r = PlaneRotation::new(theta);
            let (u, v) = r.apply(x, y);
            let (x2, y2) = r.apply_inverse(u, v);
            prop_assert!((x2 - x).abs() < 1e-12 * (1.0 + x.abs() + y.abs()));
            prop_assert!((y2 - y).abs() < 1e-12 * (1.0 + x.abs() + y.abs()));
        }
    }
}
