//! Two-component spinors and 2x2 complex matrices.
//!
//! Every Bloch Hamiltonian in this crate is a 2x2 Hermitian matrix, so a
//! fixed-size representation is used throughout instead of a general dense
//! matrix type. Hermitian matrices are most conveniently handled in the Pauli
//! basis, `H = h0 σ0 + h1 σ1 + h2 σ2 + h3 σ3`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// A 2x2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);

    pub fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn sigma1() -> Self {
        Mat2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn sigma2() -> Self {
        Mat2([[ZERO, -I], [I, ZERO]])
    }

    pub fn sigma3() -> Self {
        Mat2([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[row][col]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Elementwise complex conjugate (not the adjoint).
    pub fn conj(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flat_map(|row| row.iter()).map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (*self - self.adjoint()).frobenius_norm() <= tol
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        let m = &self.0;
        Spinor([m[0][0] * v.0[0] + m[0][1] * v.0[1], m[1][0] * v.0[0] + m[1][1] * v.0[1]])
    }

    /// Pauli coefficients `(h0, h1, h2, h3)`; exact for Hermitian input,
    /// the Hermitian part otherwise.
    pub fn to_pauli(&self) -> PauliVector {
        let m = &self.0;
        let off = (m[1][0] + m[0][1].conj()) * 0.5;
        PauliVector { h0: 0.5 * (m[0][0].re + m[1][1].re), h1: off.re, h2: off.im, h3: 0.5 * (m[0][0].re - m[1][1].re) }
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> (f64, f64) {
        let p = self.to_pauli();
        let r = p.magnitude();
        (p.h0 - r, p.h0 + r)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale_re(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

/// Coefficients of a Hermitian 2x2 matrix in the Pauli basis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PauliVector {
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

impl PauliVector {
    pub fn magnitude(&self) -> f64 {
        (self.h1 * self.h1 + self.h2 * self.h2 + self.h3 * self.h3).sqrt()
    }

    pub fn to_matrix(&self) -> Mat2 {
        let d = C64::new(self.h1, -self.h2);
        Mat2([[C64::new(self.h0 + self.h3, 0.0), d], [d.conj(), C64::new(self.h0 - self.h3, 0.0)]])
    }

    /// `H|v⟩` without materializing the matrix.
    #[inline]
    pub fn apply(&self, v: &Spinor) -> Spinor {
        let [a, b] = v.0;
        let d = C64::new(self.h1, -self.h2);
        Spinor([a * (self.h0 + self.h3) + d * b, d.conj() * a + b * (self.h0 - self.h3)])
    }

    /// `⟨v|H|v⟩` for a normalized or unnormalized spinor.
    #[inline]
    pub fn expectation(&self, v: &Spinor) -> f64 {
        let [a, b] = v.0;
        let cross = a.conj() * b;
        self.h0 * (a.norm_sqr() + b.norm_sqr())
            + self.h3 * (a.norm_sqr() - b.norm_sqr())
            + 2.0 * (self.h1 * cross.re + self.h2 * cross.im)
    }
}

impl Add for PauliVector {
    type Output = PauliVector;
    fn add(self, rhs: PauliVector) -> PauliVector {
        PauliVector { h0: self.h0 + rhs.h0, h1: self.h1 + rhs.h1, h2: self.h2 + rhs.h2, h3: self.h3 + rhs.h3 }
    }
}

/// A two-component spinor `(up, down)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor(pub [C64; 2]);

impl Spinor {
    pub fn new(up: C64, down: C64) -> Self {
        Spinor([up, down])
    }

    pub fn up() -> Self {
        Spinor([ONE, ZERO])
    }

    pub fn down() -> Self {
        Spinor([ZERO, ONE])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Spinor([self.0[0] / n, self.0[1] / n])
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Spinor) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn scale(&self, s: C64) -> Self {
        Spinor([self.0[0] * s, self.0[1] * s])
    }

    #[inline]
    pub fn axpy(&self, s: f64, other: &Spinor) -> Self {
        Spinor([self.0[0] + other.0[0] * s, self.0[1] + other.0[1] * s])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let (s1, s2, s3) = (Mat2::sigma1(), Mat2::sigma2(), Mat2::sigma3());
        assert_eq!(s1 * s1, Mat2::identity());
        assert_eq!(s1 * s2, s3.scale(I));
        assert_eq!(s2 * s3, s1.scale(I));
    }

    #[test]
    fn pauli_round_trip() {
        let p = PauliVector { h0: 0.3, h1: -1.2, h2: 0.7, h3: 0.05 };
        let m = p.to_matrix();
        assert!(m.is_hermitian(0.0));
        let q = m.to_pauli();
        assert!((q.h0 - p.h0).abs() < 1e-15);
        assert!((q.h1 - p.h1).abs() < 1e-15);
        assert!((q.h2 - p.h2).abs() < 1e-15);
        assert!((q.h3 - p.h3).abs() < 1e-15);
        let v = Spinor::new(C64::new(0.3, -0.1), C64::new(0.2, 0.9));
        let direct = m.apply(&v);
        let fast = p.apply(&v);
        assert!((direct.0[0] - fast.0[0]).norm() < 1e-15);
        assert!((direct.0[1] - fast.0[1]).norm() < 1e-15);
        assert!((v.inner(&direct).re - p.expectation(&v)).abs() < 1e-15);
    }
}
