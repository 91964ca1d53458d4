//! Minimal 2×2 linear algebra used by the channel solver.
//!
//! Everything here is two-channel sized, so the types are plain stack
//! structs with hand-written arithmetic rather than a matrix library.

use num_complex::Complex64;

pub type C64 = Complex64;

/// 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C2(pub [[C64; 2]; 2]);

impl C2 {
    pub const fn zero() -> Self {
        C2([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub const fn identity() -> Self {
        C2([
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        ])
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        C2([
            [C64::new(m[0][0], 0.0), C64::new(m[0][1], 0.0)],
            [C64::new(m[1][0], 0.0), C64::new(m[1][1], 0.0)],
        ])
    }

    pub fn mul(&self, rhs: &C2) -> C2 {
        let a = &self.0;
        let b = &rhs.0;
        C2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn add(&self, rhs: &C2) -> C2 {
        let a = &self.0;
        let b = &rhs.0;
        C2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }

    pub fn sub(&self, rhs: &C2) -> C2 {
        let a = &self.0;
        let b = &rhs.0;
        C2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }

    pub fn scale(&self, s: C64) -> C2 {
        let a = &self.0;
        C2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Inverse via the adjugate. Returns `None` when the determinant is
    /// numerically zero; composition treats that as a degenerate solve.
    pub fn inverse(&self) -> Option<C2> {
        let d = self.det();
        if d.norm_sqr() == 0.0 || !d.is_finite() {
            return None;
        }
        let a = &self.0;
        Some(C2([
            [a[1][1] / d, -a[0][1] / d],
            [-a[1][0] / d, a[0][0] / d],
        ]))
    }

    pub fn transpose(&self) -> C2 {
        let a = &self.0;
        C2([[a[0][0], a[1][0]], [a[0][1], a[1][1]]])
    }

    pub fn adjoint(&self) -> C2 {
        let a = &self.0;
        C2([
            [a[0][0].conj(), a[1][0].conj()],
            [a[0][1].conj(), a[1][1].conj()],
        ])
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: [C64; 2]) -> [C64; 2] {
        let a = &self.0;
        [
            a[0][0] * v[0] + a[0][1] * v[1],
            a[1][0] * v[0] + a[1][1] * v[1],
        ]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &C2) -> f64 {
        self.sub(rhs).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }
}

/// Real symmetric 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

/// Eigen-decomposition of a [`SymMat2`], eigenvalues ordered `lo <= hi`.
#[derive(Clone, Copy, Debug)]
pub struct SymEigen {
    pub lo: f64,
    pub hi: f64,
    pub v_lo: [f64; 2],
    pub v_hi: [f64; 2],
}

impl SymMat2 {
    pub const fn zero() -> Self {
        SymMat2 {
            xx: 0.0,
            xy: 0.0,
            yy: 0.0,
        }
    }

    pub fn combine(a: f64, ma: &SymMat2, b: f64, mb: &SymMat2) -> SymMat2 {
        SymMat2 {
            xx: a * ma.xx + b * mb.xx,
            xy: a * ma.xy + b * mb.xy,
            yy: a * ma.yy + b * mb.yy,
        }
    }

    /// Stable closed-form eigensolve. The eigenvector pair is orthonormal
    /// with a rotation convention (`v_lo` is `v_hi` rotated by +90°).
    pub fn eigh(&self) -> SymEigen {
        let t = 0.5 * (self.xx + self.yy);
        let d = 0.5 * (self.xx - self.yy);
        let r = d.hypot(self.xy);
        if r == 0.0 {
            return SymEigen {
                lo: t,
                hi: t,
                v_lo: [0.0, 1.0],
                v_hi: [1.0, 0.0],
            };
        }
        let phi = 0.5 * f64::atan2(2.0 * self.xy, self.xx - self.yy);
        let (s, c) = phi.sin_cos();
        SymEigen {
            lo: t - r,
            hi: t + r,
            v_lo: [-s, c],
            v_hi: [c, s],
        }
    }
}

/// Complex `exp(w) - 1` without cancellation for small `|w|`.
pub fn cexpm1(w: C64) -> C64 {
    if w.norm() < 1e-4 {
        // 4-term series keeps the relative error below ~1e-17 here.
        w * (C64::new(1.0, 0.0)
            + w * (C64::new(0.5, 0.0)
                + w * (C64::new(1.0 / 6.0, 0.0) + w * C64::new(1.0 / 24.0, 0.0))))
    } else {
        w.exp() - C64::new(1.0, 0.0)
    }
}
