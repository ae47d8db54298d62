//! Minimal 2×2 complex matrix used for per-tap / per-subcarrier link matrices.

use std::ops::{Add, AddAssign, Mul};

use num_complex::Complex64;

/// Row-major 2×2 complex matrix; entry `(n, m)` is RX PAA `n`, TX PAA `m`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[Complex64::new(0.0, 0.0); 2]; 2]);

    pub const IDENTITY: Mat2 = Mat2([
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn from_real(rows: [[f64; 2]; 2]) -> Self {
        Mat2([
            [rows[0][0].into(), rows[0][1].into()],
            [rows[1][0].into(), rows[1][1].into()],
        ])
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.0[n][m]
    }

    #[inline]
    pub fn set(&mut self, n: usize, m: usize, v: Complex64) {
        self.0[n][m] = v;
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|x| *x *= s);
        out
    }

    pub fn adjoint(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }

    #[inline]
    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Squared Frobenius norm.
    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(mut self, rhs: Mat2) -> Mat2 {
        self += rhs;
        self
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, rhs: Mat2) {
        for n in 0..2 {
            for m in 0..2 {
                self.0[n][m] += rhs.0[n][m];
            }
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = Mat2::ZERO;
        for n in 0..2 {
            for m in 0..2 {
                out.0[n][m] = a[n][0] * b[0][m] + a[n][1] * b[1][m];
            }
        }
        out
    }
}
