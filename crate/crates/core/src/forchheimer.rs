//! The nonlinear drag N(u) = |u|^alpha u and its energy accounting.
//!
//! The velocity magnitude is collocated at each face by averaging the
//! transverse component, so N stays face-aligned with u and the pairing
//! (N(u), u) reproduces the discrete ||u||_{alpha+2}^{alpha+2} exactly
//! under the shared quadrature.

use crate::error::{Error, Result};
use crate::field::FaceField;
use crate::ops::DiscreteOps;

/// How the solver applies the drag within a time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// N evaluated at the argument itself.
    PointwiseExact,
    /// Coefficient |u*|^alpha frozen at the previous iterate, applied to
    /// the new velocity; keeps each step linear and the energy term
    /// nonnegative.
    LaggedCoefficient,
}

#[derive(Debug, Clone, Copy)]
pub struct NonlinearTerm {
    pub alpha: f64,
    pub mode: EvalMode,
}

impl NonlinearTerm {
    pub fn new(alpha: f64, mode: EvalMode) -> Result<Self> {
        if !(1.0..=2.0).contains(&alpha) {
            return Err(Error::InvalidParam {
                name: "alpha",
                reason: format!("must lie in [1, 2], got {alpha}"),
            });
        }
        Ok(Self { alpha, mode })
    }

    /// Pointwise N(u) = m^alpha u with the collocated magnitude m.
    pub fn eval_n(&self, ops: &DiscreteOps, f: &FaceField) -> FaceField {
        let (mu, mv) = ops.collocated_magnitudes(f);
        let mut out = f.clone();
        for (x, m) in out.u.iter_mut().zip(&mu) {
            *x *= m.powf(self.alpha);
        }
        for (x, m) in out.v.iter_mut().zip(&mv) {
            *x *= m.powf(self.alpha);
        }
        out
    }

    /// Per-face lagged coefficients m(u*)^alpha.
    pub fn lagged_coeffs(&self, ops: &DiscreteOps, f: &FaceField) -> (Vec<f64>, Vec<f64>) {
        let (mut mu, mut mv) = ops.collocated_magnitudes(f);
        for m in &mut mu {
            *m = m.powf(self.alpha);
        }
        for m in &mut mv {
            *m = m.powf(self.alpha);
        }
        (mu, mv)
    }

    /// ||u||_{alpha+2}^{alpha+2}; equals (N(u), u) under the matched
    /// quadrature.
    pub fn energy(&self, ops: &DiscreteOps, f: &FaceField) -> f64 {
        ops.norm_lp_pow(f, self.alpha + 2.0)
            .expect("alpha+2 is a supported exponent")
    }

    /// (N(u) - N(v), u - v); the caller asserts nonnegativity.
    pub fn monotonicity_check_n(&self, ops: &DiscreteOps, u: &FaceField, v: &FaceField) -> f64 {
        let mut dn = self.eval_n(ops, u);
        dn.axpy(-1.0, &self.eval_n(ops, v));
        let mut du = u.clone();
        du.axpy(-1.0, v);
        ops.inner(&dn, &du)
    }
}
