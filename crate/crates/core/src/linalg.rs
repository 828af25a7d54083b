//! Closed-form 2×2 linear algebra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A real 2×2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Mat2 {
    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m11, self.m21, self.m12, self.m22)
    }

    /// Largest absolute entry; zero for the zero matrix.
    pub fn max_abs(&self) -> f64 {
        self.m11
            .abs()
            .max(self.m12.abs())
            .max(self.m21.abs())
            .max(self.m22.abs())
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    /// Roots of λ² − tr·λ + det = 0, ordered by descending real part
    /// (then descending imaginary part).
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        eigenvalues_from_trace_det(self.trace(), self.det())
    }

    /// Unit eigenvector for a real eigenvalue `lambda`.
    ///
    /// Picks the better conditioned of the two rows of `A − λI`.
    pub fn real_eigenvector(&self, lambda: f64) -> [f64; 2] {
        let a = self.m11 - lambda;
        let b = self.m12;
        let c = self.m21;
        let d = self.m22 - lambda;
        // row (a, b) is orthogonal to the eigenvector, so (−b, a) spans it.
        let r1 = [-b, a];
        let r2 = [-d, c];
        let n1 = (r1[0] * r1[0] + r1[1] * r1[1]).sqrt();
        let n2 = (r2[0] * r2[0] + r2[1] * r2[1]).sqrt();
        let (v, n) = if n1 >= n2 { (r1, n1) } else { (r2, n2) };
        if n == 0.0 {
            // A − λI vanishes: every direction is an eigenvector.
            return [1.0, 0.0];
        }
        [v[0] / n, v[1] / n]
    }
}

pub fn eigenvalues_from_trace_det(trace: f64, det: f64) -> [Complex64; 2] {
    let half = 0.5 * trace;
    let disc = half * half - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // avoid cancellation in the smaller-magnitude root
        let big = if half >= 0.0 { half + s } else { half - s };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (hi, lo) = if big >= small {
            (big, small)
        } else {
            (small, big)
        };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(half, s), Complex64::new(half, -s)]
    }
}

pub fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

pub fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sum_and_product() {
        let m = Mat2::new(0.3, -1.2, 0.7, -0.4);
        let [l1, l2] = m.eigenvalues();
        assert!(((l1 + l2).re - m.trace()).abs() < 1e-14);
        assert!(((l1 * l2).re - m.det()).abs() < 1e-14);
        assert!(l1.im > 0.0);
    }

    #[test]
    fn real_eigenvector_is_eigen() {
        let m = Mat2::new(2.0, 1.0, 0.5, -1.0);
        for l in m.eigenvalues() {
            let v = m.real_eigenvector(l.re);
            let av = m.apply(v);
            assert!((av[0] - l.re * v[0]).abs() < 1e-12);
            assert!((av[1] - l.re * v[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn small_root_accurate() {
        let [hi, lo] = eigenvalues_from_trace_det(1e8, 1.0);
        assert!((hi.re - 1e8).abs() < 1e-6);
        assert!((lo.re - 1e-8).abs() < 1e-20);
    }
}
