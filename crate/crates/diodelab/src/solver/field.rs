//! Interior wavefunction reconstruction (diagnostic).
//!
//! The sweep only needs scattering blocks, but inspecting the solution
//! requires the local right/left-going amplitudes at every slab face. A
//! backward pass stores the reflection (and, for right incidence, the
//! backward transmission) of the remainder structure at each face; the
//! forward pass then closes the internal multiple-scattering loop face by
//! face. The recorded residual is the worst violation of the slab
//! relations the solution must satisfy, so it directly measures how well
//! the reconstructed field solves the discretised problem.

use num_complex::Complex64 as C64;

use crate::adiabatic::eigensystem;
use crate::config::{simulation_domain, DiodeConfig};
use crate::constants::HBAR;
use crate::linalg::{SymMat2, C2};
use crate::potential::{GaussianDiodePotential, PotentialMatrix};
use crate::solver::compose::Composite;
use crate::solver::grid::CellGrid;
use crate::solver::slab::{slab_s, SlabS, CF4_ALPHA1, CF4_ALPHA2, GAUSS_OFFSET};
use crate::solver::{AmplitudeSet, Incidence, Side, SolveError, SolveOptions};

/// Sampled two-component solution on the slab-face grid.
#[derive(Clone, Debug)]
pub struct SolutionField {
    pub incidence: Incidence,
    pub xs: Vec<f64>,
    pub psi1: Vec<C64>,
    pub psi2: Vec<C64>,
    /// Adiabatic components Φ∓ = U(x)Ψ(x), when requested.
    pub phi_minus: Option<Vec<C64>>,
    pub phi_plus: Option<Vec<C64>>,
    /// Worst relative violation of the solver's own slab relations.
    pub residual_max: f64,
    /// Edge amplitudes of the same solve, for consistency checks.
    pub amplitudes: AmplitudeSet,
}

#[derive(Clone, Copy, Debug)]
pub struct FieldOptions {
    /// Upper bound on the number of stored sample points.
    pub max_samples: usize,
    /// Also transform the field into the adiabatic frame.
    pub with_adiabatic: bool,
}

impl Default for FieldOptions {
    fn default() -> Self {
        FieldOptions {
            max_samples: 4096,
            with_adiabatic: true,
        }
    }
}

struct SubSlabs {
    grid: CellGrid,
    k: f64,
    two_m_hbar2: f64,
}

impl SubSlabs {
    fn count(&self) -> usize {
        2 * self.grid.n_cells
    }

    /// Slab `j` of the doubled grid (two half-width slabs per cell).
    fn slab(&self, pot: &impl PotentialMatrix, j: usize) -> SlabS {
        let cell = j / 2;
        let centre = self.grid.x_l + (cell as f64 + 0.5) * self.grid.h;
        let m1 = pot.at(centre - GAUSS_OFFSET * self.grid.h);
        let m2 = pot.at(centre + GAUSS_OFFSET * self.grid.h);
        let eff = if j.is_multiple_of(2) {
            SymMat2::combine(2.0 * CF4_ALPHA1, &m1, 2.0 * CF4_ALPHA2, &m2)
        } else {
            SymMat2::combine(2.0 * CF4_ALPHA2, &m1, 2.0 * CF4_ALPHA1, &m2)
        };
        slab_s(&eff, self.k, self.two_m_hbar2, 0.5 * self.grid.h)
    }

    fn face_x(&self, j: usize) -> f64 {
        self.grid.x_l + 0.5 * j as f64 * self.grid.h
    }
}

/// Solve one incidence and reconstruct the interior field.
pub fn solution_field(
    cfg: &DiodeConfig,
    inc: &Incidence,
    opts: &SolveOptions,
    field_opts: &FieldOptions,
) -> Result<SolutionField, SolveError> {
    cfg.validate()?;
    let (x_l, x_r) = simulation_domain(cfg, opts.margin)?;
    let pot = GaussianDiodePotential { cfg };
    let k = cfg.mass * inc.v / HBAR;
    let grid = CellGrid::with_step(x_l, x_r, opts.grid.step(k, cfg.delta_x));
    let slabs = SubSlabs {
        grid,
        k,
        two_m_hbar2: 2.0 * cfg.mass / (HBAR * HBAR),
    };
    let n_slabs = slabs.count();
    let n_faces = n_slabs + 1;

    // Backward pass: remainder-structure blocks at every face.
    let store_tb = inc.side == Side::Right;
    let mut right_r = vec![C2::zero(); n_faces];
    let mut right_tb = if store_tb {
        vec![C2::identity(); n_faces]
    } else {
        Vec::new()
    };
    let mut comp_right = Composite::identity();
    for j in (0..n_slabs).rev() {
        comp_right = Composite::compose(&Composite::from_slab(&slabs.slab(&pot, j)), &comp_right)?;
        right_r[j] = comp_right.r;
        if store_tb {
            right_tb[j] = comp_right.tb;
        }
    }

    // Forward pass: close the internal loop at each face and check the
    // slab relations between consecutive faces.
    let ch = inc.channel.index();
    let mut unit = [C64::new(0.0, 0.0); 2];
    unit[ch] = C64::new(1.0, 0.0);
    let a_in = match inc.side {
        Side::Left => {
            let p = C64::from_polar(1.0, k * x_l);
            [unit[0] * p, unit[1] * p]
        }
        Side::Right => {
            let p = C64::from_polar(1.0, -k * x_r);
            [unit[0] * p, unit[1] * p]
        }
    };

    let stride = (n_faces / field_opts.max_samples.max(2)).max(1);
    let mut xs = Vec::new();
    let mut psi1 = Vec::new();
    let mut psi2 = Vec::new();
    let mut sampled_faces = Vec::new();

    let mut comp_left = Composite::identity();
    let mut residual_max = 0.0f64;
    let mut prev_uw: Option<([C64; 2], [C64; 2])> = None;
    let mut prev_slab: Option<SlabS> = None;

    for j in 0..n_faces {
        let (u, w) = face_amplitudes(
            &comp_left,
            &right_r[j],
            store_tb.then(|| &right_tb[j]),
            a_in,
            inc.side,
        )?;

        if let (Some((u_prev, w_prev)), Some(s)) = (&prev_uw, &prev_slab) {
            // slab relations: w₋ = r u₋ + t w₊ ; u₊ = t u₋ + r w₊
            let w_pred = add2(&s.r.mul_vec(*u_prev), &s.t.mul_vec(w));
            let u_pred = add2(&s.t.mul_vec(*u_prev), &s.r.mul_vec(w));
            let scale = norm2(u_prev)
                .max(norm2(w_prev))
                .max(norm2(&u))
                .max(norm2(&w))
                .max(1e-30);
            let res = (norm2(&sub2(&w_pred, w_prev)).max(norm2(&sub2(&u_pred, &u)))) / scale;
            residual_max = residual_max.max(res);
        }

        if j % stride == 0 || j == n_faces - 1 {
            xs.push(slabs.face_x(j));
            psi1.push(u[0] + w[0]);
            psi2.push(u[1] + w[1]);
            sampled_faces.push(j);
        }

        if j < n_slabs {
            let s = slabs.slab(&pot, j);
            comp_left = Composite::compose(&comp_left, &Composite::from_slab(&s))?;
            prev_slab = Some(s);
        }
        prev_uw = Some((u, w));
    }

    let full = crate::solver::FullSolve {
        comp: comp_left,
        k,
        x_l,
        x_r,
        n_cells: grid.n_cells,
        h: grid.h,
    };
    let amplitudes = full.amplitudes(inc.side, inc.channel);

    let (phi_minus, phi_plus) = if field_opts.with_adiabatic {
        let mut pm = Vec::with_capacity(xs.len());
        let mut pp = Vec::with_capacity(xs.len());
        for (i, &x) in xs.iter().enumerate() {
            let u = eigensystem(x, cfg).u;
            pm.push(psi1[i] * u[0][0] + psi2[i] * u[0][1]);
            pp.push(psi1[i] * u[1][0] + psi2[i] * u[1][1]);
        }
        (Some(pm), Some(pp))
    } else {
        (None, None)
    };

    Ok(SolutionField {
        incidence: *inc,
        xs,
        psi1,
        psi2,
        phi_minus,
        phi_plus,
        residual_max,
        amplitudes,
    })
}

/// Local right/left-going amplitudes at a face, given the composites on
/// either side.
fn face_amplitudes(
    comp_left: &Composite,
    right_r: &C2,
    right_tb: Option<&C2>,
    a_in: [C64; 2],
    side: Side,
) -> Result<([C64; 2], [C64; 2]), SolveError> {
    match side {
        Side::Left => {
            let loop_gain = comp_left.rb.mul(right_r);
            let d = C2::identity()
                .sub(&loop_gain)
                .inverse()
                .ok_or(SolveError::DegenerateComposition)?;
            let u = d.mul_vec(comp_left.t.mul_vec(a_in));
            let w = right_r.mul_vec(u);
            Ok((u, w))
        }
        Side::Right => {
            let tb = right_tb.expect("backward transmission stored for right incidence");
            let loop_gain = right_r.mul(&comp_left.rb);
            let d = C2::identity()
                .sub(&loop_gain)
                .inverse()
                .ok_or(SolveError::DegenerateComposition)?;
            let w = d.mul_vec(tb.mul_vec(a_in));
            let u = comp_left.rb.mul_vec(w);
            Ok((u, w))
        }
    }
}

fn add2(a: &[C64; 2], b: &[C64; 2]) -> [C64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub2(a: &[C64; 2], b: &[C64; 2]) -> [C64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm2(a: &[C64; 2]) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr()).sqrt()
}
