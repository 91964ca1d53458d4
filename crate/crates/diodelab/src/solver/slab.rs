//! Exact scattering matrices of constant-potential slabs.
//!
//! Each grid cell is handled as one or two slabs of constant 2×2 potential.
//! A slab's reflection/transmission matrices are evaluated against the free
//! reference basis `exp(±ikx)` (same asymptotic wavenumber in both
//! channels), with phases referenced at the slab faces. All exponentials
//! that enter are decaying or oscillatory, so tall evanescent barriers
//! cannot overflow: deep tunnelling underflows gracefully to zero.

use num_complex::Complex64 as C64;

use crate::linalg::{cexpm1, SymMat2, C2};

/// Fourth-order commutator-free collocation weights. A cell sampled at the
/// two Gauss points `x_c ∓ h/(2√3)` is propagated as two half-width slabs
/// whose effective potentials are affine combinations of the samples.
pub const CF4_ALPHA1: f64 = 0.25 + 0.288_675_134_594_812_87; // 1/4 + √3/6
pub const CF4_ALPHA2: f64 = 0.25 - 0.288_675_134_594_812_87; // 1/4 - √3/6

/// Offset of the Gauss nodes from the cell centre, in units of the cell
/// width.
pub const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_87; // 1/(2√3)

/// Reflection and transmission (2×2, channel basis) of one slab. The slab
/// is spatially symmetric against the common reference, so the
/// right-incidence blocks coincide with these.
#[derive(Clone, Copy, Debug)]
pub struct SlabS {
    pub r: C2,
    pub t: C2,
}

/// Per-mode slab amplitudes for inside-wavenumber `q` (possibly evanescent,
/// `Im q >= 0`), outside-wavenumber `k`, and width `s`.
#[inline]
pub fn mode_rt(q: C64, k: f64, s: f64) -> (C64, C64) {
    let one = C64::new(1.0, 0.0);
    let p = q / k;
    let z = C64::new(0.0, 1.0) * q * s; // i q s, Re(z) <= 0 for evanescent q
    let e2m1 = cexpm1(2.0 * z);
    let e2 = e2m1 + one;
    let pp = (p + one) * (p + one);
    let pm = (p - one) * (p - one);
    let den = pp - pm * e2;
    let r = (p * p - one) * e2m1 / den;
    let t = 4.0 * p * z.exp() / den;
    (r, t)
}

/// Scattering matrix of a slab of constant potential `m_eff` (J).
///
/// `k` is the reference wavenumber, `two_m_hbar2 = 2m/ħ²` converts energies
/// to inverse squared lengths, `s` is the slab width.
pub fn slab_s(m_eff: &SymMat2, k: f64, two_m_hbar2: f64, s: f64) -> SlabS {
    let eig = m_eff.eigh();
    let k2 = k * k;

    let q_of = |m_eigval: f64| -> C64 {
        let q2 = k2 - two_m_hbar2 * m_eigval;
        if q2 >= 0.0 {
            C64::new(q2.sqrt(), 0.0)
        } else {
            C64::new(0.0, (-q2).sqrt())
        }
    };

    let (r_lo, t_lo) = mode_rt(q_of(eig.lo), k, s);
    let (r_hi, t_hi) = mode_rt(q_of(eig.hi), k, s);

    // Rotate the diagonal mode amplitudes back to the channel basis:
    // X_ch = V diag(x_lo, x_hi) Vᵀ with V columns (v_lo, v_hi).
    let a = eig.v_lo;
    let b = eig.v_hi;
    let rot = |lo: C64, hi: C64| -> C2 {
        C2([
            [
                lo * (a[0] * a[0]) + hi * (b[0] * b[0]),
                lo * (a[0] * a[1]) + hi * (b[0] * b[1]),
            ],
            [
                lo * (a[0] * a[1]) + hi * (b[0] * b[1]),
                lo * (a[1] * a[1]) + hi * (b[1] * b[1]),
            ],
        ])
    };

    SlabS {
        r: rot(r_lo, r_hi),
        t: rot(t_lo, t_hi),
    }
}
