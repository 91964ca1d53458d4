//! Stable composition of scattering blocks (Redheffer star product).
//!
//! The running composite keeps the four blocks of the scattering relation
//! for the structure between the domain's left face and the current face:
//! `r` (left-incidence reflection), `t` (left-to-right transmission),
//! `rb` (right-incidence reflection), `tb` (right-to-left transmission),
//! all with phases referenced at the structure's own faces. Composing one
//! more slab involves only bounded quantities, which is what makes the
//! sweep immune to evanescent overflow.

use crate::linalg::C2;
use crate::solver::slab::SlabS;
use crate::solver::SolveError;

#[derive(Clone, Copy, Debug)]
pub struct Composite {
    pub r: C2,
    pub t: C2,
    pub rb: C2,
    pub tb: C2,
}

impl Composite {
    /// Empty structure: perfect transmission, no reflection.
    pub fn identity() -> Self {
        Composite {
            r: C2::zero(),
            t: C2::identity(),
            rb: C2::zero(),
            tb: C2::identity(),
        }
    }

    pub fn from_slab(s: &SlabS) -> Self {
        Composite {
            r: s.r,
            t: s.t,
            rb: s.r,
            tb: s.t,
        }
    }

    /// Star product `a ∘ b` with `a` on the left.
    pub fn compose(a: &Composite, b: &Composite) -> Result<Composite, SolveError> {
        let loop_gain = a.rb.mul(&b.r);
        let d = C2::identity()
            .sub(&loop_gain)
            .inverse()
            .ok_or(SolveError::DegenerateComposition)?;

        let d_at = d.mul(&a.t);
        let d_arb = d.mul(&a.rb);
        let d_arb_btb = d_arb.mul(&b.tb);

        Ok(Composite {
            t: b.t.mul(&d_at),
            r: a.r.add(&a.tb.mul(&b.r.mul(&d_at))),
            rb: b.rb.add(&b.t.mul(&d_arb_btb)),
            tb: a.tb.mul(&b.tb).add(&a.tb.mul(&b.r.mul(&d_arb_btb))),
        })
    }

    /// Append a slab on the right.
    pub fn push(&mut self, s: &SlabS) -> Result<(), SolveError> {
        *self = Composite::compose(self, &Composite::from_slab(s))?;
        Ok(())
    }

    /// Prepend a slab on the left (used by the backward field sweep).
    pub fn push_front(&mut self, s: &SlabS) -> Result<(), SolveError> {
        *self = Composite::compose(&Composite::from_slab(s), self)?;
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.t.is_finite() && self.rb.is_finite() && self.tb.is_finite()
    }
}
