//! Independent oracles for the channel solver.
//!
//! The solver is validated against wavefunction-space references computed
//! here with completely different algebra: closed-form boundary matching
//! through a constant slab, and a brute-force RK4 fundamental-matrix solve
//! of the coupled system. Both references propagate wavefunction values,
//! so they are only usable where nothing overflows; the solver itself has
//! no such restriction.

use num_complex::Complex64 as C64;

use diodelab::constants::HBAR;
use diodelab::linalg::SymMat2;
use diodelab::potential::FnPotential;
use diodelab::solver::grid::CellGrid;
use diodelab::solver::{sweep, Channel, Side};
use diodelab::{solve_diode, DiodeConfig, SolveOptions};

const MASS: f64 = diodelab::constants::NEON_MASS;

fn csqrt_branch(q2: f64) -> C64 {
    if q2 >= 0.0 {
        C64::new(q2.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-q2).sqrt())
    }
}

/// Complex 4x4 Gaussian elimination (test-local helper).
fn solve4(mut a: [[C64; 4]; 4], mut b: [C64; 4]) -> [C64; 4] {
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&i, &j| a[i][col].norm().partial_cmp(&a[j][col].norm()).unwrap())
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..4 {
            let f = a[row][col] / a[col][col];
            let pivot_vals = a[col];
            for (dst, &src) in a[row][col..].iter_mut().zip(&pivot_vals[col..]) {
                *dst -= f * src;
            }
            let s = f * b[col];
            b[row] -= s;
        }
    }
    let mut x = [C64::new(0.0, 0.0); 4];
    for row in (0..4).rev() {
        let mut acc = b[row];
        for k in (row + 1)..4 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Closed-form scalar slab reference for a constant potential `v0` on
/// `[a, b]`, absolute phase convention. Derived by boundary matching:
///   t = e^{-ikL} / [cos qL - (i/2)(k/q + q/k) sin qL]
///   r = e^{2ika} (i/2)(q/k - k/q) sin qL / [same denominator]
/// The denominator never cancels, so this stays accurate deep into
/// tunnelling where a naive linear solve loses eps·e^{2 kappa L}.
fn scalar_slab_reference(v0: f64, a: f64, b: f64, k: f64) -> (C64, C64) {
    let len = b - a;
    let u = 2.0 * MASS * v0 / (HBAR * HBAR);
    let q = csqrt_branch(k * k - u);
    let (cos_ql, sin_ql) = ((q * len).cos(), (q * len).sin());
    let half_i = C64::new(0.0, 0.5);
    let denom = cos_ql - half_i * (k / q + q / k) * sin_ql;
    let t = C64::from_polar(1.0, -k * len) / denom;
    let r = C64::from_polar(1.0, 2.0 * k * a) * half_i * (q / k - k / q) * sin_ql / denom;
    (r, t)
}

/// The solver run against a piecewise-constant potential whose edges lie
/// exactly on cell boundaries, so the slab sweep is exact and any
/// discrepancy is an algebra bug, not discretisation error.
fn sweep_square(
    m_inside: SymMat2,
    a: f64,
    b: f64,
    v: f64,
    n_cells: usize,
) -> diodelab::solver::FullSolve {
    // domain [a - (b-a), b + (b-a)] split so that a and b are faces
    let len = b - a;
    let pot = FnPotential(move |x: f64| {
        if x > a && x < b {
            m_inside
        } else {
            SymMat2::zero()
        }
    });
    let grid = CellGrid {
        x_l: a - len,
        x_r: b + len,
        n_cells: 3 * n_cells,
        h: len / n_cells as f64,
    };
    sweep(&pot, MASS, v, grid).unwrap()
}

#[test]
fn scalar_barrier_above_and_below_threshold() {
    // thin slab: the wavefunction-space reference must not overflow, so
    // keep kappa * L modest (the solver itself has no such limit)
    let a = 0.10e-6;
    let b = 0.35e-6;
    for (v, v0_scale) in [
        (0.3, 0.5),   // travelling inside: E > V0
        (0.2, 2.0),   // tunnelling: E < V0
        (0.25, -1.5), // well
    ] {
        let e = 0.5 * MASS * v * v;
        let v0 = v0_scale * e;
        let k = MASS * v / HBAR;
        let m_inside = SymMat2 {
            xx: v0,
            xy: 0.0,
            yy: 0.0,
        };
        let solve = sweep_square(m_inside, a, b, v, 64);
        let got = solve.amplitudes(Side::Left, Channel::One);
        let (r_ref, t_ref) = scalar_slab_reference(v0, a, b, k);
        assert!(
            (got.r1 - r_ref).norm() < 1e-10,
            "R mismatch: {:?} vs {:?} (v={v}, scale={v0_scale})",
            got.r1,
            r_ref
        );
        assert!(
            (got.t1 - t_ref).norm() < 1e-10,
            "T mismatch: {:?} vs {:?} (v={v}, scale={v0_scale})",
            got.t1,
            t_ref
        );
        // channel 2 sees no potential at all
        assert!((got.t2.norm()) < 1e-14 && got.r2.norm() < 1e-14);
    }
}

#[test]
fn scalar_deep_tunnelling_matches_reference() {
    // kappa * L ~ 21: |T|^2 ~ 4e-19, still representable in the reference
    let a = 0.0;
    let b = 0.2e-6;
    let v = 0.1;
    let e = 0.5 * MASS * v * v;
    let v0 = 12.0 * e;
    let k = MASS * v / HBAR;
    let m_inside = SymMat2 {
        xx: v0,
        xy: 0.0,
        yy: 0.0,
    };
    let solve = sweep_square(m_inside, a, b, v, 80);
    let got = solve.amplitudes(Side::Left, Channel::One);
    let (r_ref, t_ref) = scalar_slab_reference(v0, a, b, k);
    assert!((got.r1 - r_ref).norm() < 1e-10);
    assert!(
        (got.t1 - t_ref).norm() / t_ref.norm() < 1e-8,
        "deep tunnelling T: {:?} vs {:?}",
        got.t1,
        t_ref
    );
}

/// Brute-force fundamental-matrix reference for a constant coupled block:
/// integrate psi'' = (2m/hbar^2)(M - E) psi with RK4 over [a, b] for four
/// independent initial conditions, then match plane waves at both faces.
fn coupled_block_reference(
    m: SymMat2,
    a: f64,
    b: f64,
    v: f64,
    channel: usize,
) -> ([C64; 2], [C64; 2]) {
    let k = MASS * v / HBAR;
    let e = 0.5 * MASS * v * v;
    let c = 2.0 * MASS / (HBAR * HBAR);
    let w = [
        [C64::new(c * (m.xx - e), 0.0), C64::new(c * m.xy, 0.0)],
        [C64::new(c * m.xy, 0.0), C64::new(c * (m.yy - e), 0.0)],
    ];
    // state (psi1, psi2, psi1', psi2'); y' = A y
    let deriv = |y: &[C64; 4]| -> [C64; 4] {
        [
            y[2],
            y[3],
            w[0][0] * y[0] + w[0][1] * y[1],
            w[1][0] * y[0] + w[1][1] * y[1],
        ]
    };
    let n_steps = 40_000usize;
    let h = (b - a) / n_steps as f64;
    let mut fundamental = [[C64::new(0.0, 0.0); 4]; 4];
    for col in 0..4 {
        let mut y = [C64::new(0.0, 0.0); 4];
        y[col] = C64::new(1.0, 0.0);
        for _ in 0..n_steps {
            let k1 = deriv(&y);
            let y2 = std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]);
            let k2 = deriv(&y2);
            let y3 = std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]);
            let k3 = deriv(&y3);
            let y4 = std::array::from_fn(|i| y[i] + h * k3[i]);
            let k4 = deriv(&y4);
            for i in 0..4 {
                y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        for row in 0..4 {
            fundamental[row][col] = y[row];
        }
    }
    // left incidence in `channel`:
    //   y(a) = [e^{ika} e_ch + e^{-ika} R ; ik(e^{ika} e_ch - e^{-ika} R)]
    //   y(b) = [e^{ikb} T ; ik e^{ikb} T]
    // unknowns (R1, R2, T1, T2)
    let ea = C64::from_polar(1.0, k * a);
    let eman = C64::from_polar(1.0, -k * a);
    let eb = C64::from_polar(1.0, k * b);
    let ik = C64::new(0.0, k);
    let mut sys = [[C64::new(0.0, 0.0); 4]; 4];
    let mut rhs = [C64::new(0.0, 0.0); 4];
    let mut inc = [C64::new(0.0, 0.0); 2];
    inc[channel] = ea;
    for row in 0..4 {
        // F * (R-part of y(a))
        for rcol in 0..2 {
            sys[row][rcol] = fundamental[row][rcol] * eman - fundamental[row][rcol + 2] * ik * eman;
        }
        // minus T-part of y(b)
        for tcol in 0..2 {
            let basis = if row == tcol {
                eb
            } else if row == tcol + 2 {
                ik * eb
            } else {
                C64::new(0.0, 0.0)
            };
            sys[row][tcol + 2] = -basis;
        }
        // rhs = -F * incident part
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..2 {
            acc += fundamental[row][j] * inc[j] + fundamental[row][j + 2] * ik * inc[j];
        }
        rhs[row] = -acc;
    }
    let sol = solve4(sys, rhs);
    ([sol[0], sol[1]], [sol[2], sol[3]])
}

#[test]
fn coupled_constant_block_matches_brute_force() {
    // kappa*L ~ 11 keeps the reference's boundary solve conditioned: its
    // error grows like eps * e^{kappa L}, the solver's does not
    let a = 0.2e-6;
    let b = 0.35e-6;
    let v = 0.22;
    let e = 0.5 * MASS * v * v;
    // mixed block: one mode travelling, one evanescent
    let m = SymMat2 {
        xx: 1.8 * e,
        xy: 0.9 * e,
        yy: -0.4 * e,
    };
    for channel in [0usize, 1usize] {
        let (r_ref, t_ref) = coupled_block_reference(m, a, b, v, channel);
        let solve = sweep_square(m, a, b, v, 64);
        let got = solve.amplitudes(Side::Left, Channel::from_index(channel));
        for (g, want) in [
            (got.r1, r_ref[0]),
            (got.r2, r_ref[1]),
            (got.t1, t_ref[0]),
            (got.t2, t_ref[1]),
        ] {
            assert!(
                (g - want).norm() < 1e-8,
                "channel {channel}: {g:?} vs {want:?}"
            );
        }
    }
}

#[test]
fn gaussian_solve_converges_under_halving_at_plateau() {
    let cfg = DiodeConfig::from_msi_um(1.0, 100.0, 100.0, 50.0, 0.0).unwrap();
    let mut opts = SolveOptions::fast();
    for v in [0.1, 0.2, 0.4] {
        let coarse = solve_diode(&cfg, v, &opts).unwrap().full.s_matrix();
        opts.grid = opts.grid.scaled(2.0);
        let fine = solve_diode(&cfg, v, &opts).unwrap().full.s_matrix();
        opts.grid = opts.grid.scaled(0.5);
        let delta = coarse.max_prob_delta(&fine);
        assert!(
            delta <= 1e-7,
            "halving moved probabilities by {delta:.3e} at v={v}"
        );
    }
}

#[test]
fn doubling_the_margin_changes_nothing() {
    let cfg = DiodeConfig::from_msi_um(1.0, 100.0, 100.0, 50.0, 0.0).unwrap();
    let base = SolveOptions::fast();
    let wide = SolveOptions {
        margin: 20.0,
        ..base
    };
    let s1 = solve_diode(&cfg, 0.2, &base).unwrap().full.s_matrix();
    let s2 = solve_diode(&cfg, 0.2, &wide).unwrap().full.s_matrix();
    assert!(s1.max_prob_delta(&s2) <= 1e-8);
}

#[test]
fn evanescent_giant_barrier_cannot_overflow() {
    // kappa * Delta x ~ 2.7e3 under the mirror: wavefunction methods
    // overflow here, the scattering sweep must not
    let cfg = DiodeConfig::from_msi_um(1.0, 100.0, 100.0, 50.0, 0.0).unwrap();
    let s = solve_diode(&cfg, 0.05, &SolveOptions::fast())
        .unwrap()
        .full
        .s_matrix();
    assert!(s.unitarity_defect() < 1e-6);
    for i in 0..4 {
        for j in 0..4 {
            assert!(s.0[i][j].is_finite());
        }
    }
}

#[test]
fn zero_potential_smatrix_is_transmission_identity() {
    let cfg = DiodeConfig::from_msi_um(0.0, 0.0, 0.0, 50.0, 0.0).unwrap();
    let s = solve_diode(&cfg, 0.3, &SolveOptions::fast())
        .unwrap()
        .full
        .s_matrix();
    for inc_side in [Side::Left, Side::Right] {
        for ch in [Channel::One, Channel::Two] {
            let out_side = match inc_side {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            };
            let t = s.amplitude((out_side, ch), (inc_side, ch));
            assert!((t - C64::new(1.0, 0.0)).norm() < 1e-10);
        }
    }
    assert!(s.unitarity_defect() < 1e-10);
}

#[test]
fn mirror_symmetric_device_has_exact_amplitude_mirrors() {
    let cfg = DiodeConfig::from_msi_um(1.0, 100.0, 100.0, 50.0, 0.0).unwrap();
    let opts = SolveOptions::fast();
    for i in 0..10 {
        let v = 0.08 + 0.04 * i as f64;
        let full = solve_diode(&cfg, v, &opts).unwrap().full;
        let l1 = full.amplitudes(Side::Left, Channel::One);
        let r2 = full.amplitudes(Side::Right, Channel::Two);
        assert!((l1.t2.norm() - r2.t1.norm()).abs() < 1e-8);
        assert!((l1.r1.norm() - r2.r2.norm()).abs() < 1e-8);
    }
}

#[test]
fn smatrix_moduli_invariant_under_parity_and_channel_swap() {
    let cfg = DiodeConfig::from_msi_um(0.7, 80.0, 80.0, 45.0, 0.0).unwrap();
    let s = solve_diode(&cfg, 0.15, &SolveOptions::fast())
        .unwrap()
        .full
        .s_matrix();
    let swap = |side: Side, ch: Channel| -> (Side, Channel) {
        let side = match side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        let ch = match ch {
            Channel::One => Channel::Two,
            Channel::Two => Channel::One,
        };
        (side, ch)
    };
    for inc_side in [Side::Left, Side::Right] {
        for inc_ch in [Channel::One, Channel::Two] {
            for out_side in [Side::Left, Side::Right] {
                for out_ch in [Channel::One, Channel::Two] {
                    let direct = s.amplitude((out_side, out_ch), (inc_side, inc_ch)).norm();
                    let mirrored = s
                        .amplitude(swap(out_side, out_ch), swap(inc_side, inc_ch))
                        .norm();
                    assert!((direct - mirrored).abs() < 1e-9);
                }
            }
        }
    }
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

        /// Unitarity and reciprocity over the full configuration space.
        #[test]
        fn random_configs_conserve_flux_and_reciprocity(
            omega in 0.0f64..1.0,
            w1 in 0.0f64..100.0,
            w2 in 0.0f64..100.0,
            d_um in 30.0f64..70.0,
            delta_um in -10.0f64..10.0,
            v in 0.02f64..0.8,
        ) {
            let cfg = DiodeConfig::from_msi_um(omega, w1, w2, d_um, delta_um).unwrap();
            let s = solve_diode(&cfg, v, &SolveOptions::fast()).unwrap().full.s_matrix();
            prop_assert!(s.unitarity_defect() < 1e-6);
            prop_assert!(s.symmetry_defect() < 1e-6);
        }
    }
}
