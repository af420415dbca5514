//! Physical coefficients of the momentum equation
//!     u_t - nu Lap(u) + a u + b |u|^alpha u + grad p = f
//! together with the slip-regularization parameter eps.

use crate::error::{Error, Result};

/// Coefficient tuple (nu, a, b, alpha, eps).
///
/// `nu` is the Brinkman (viscous) coefficient, `a` the Darcy drag,
/// `b` the Forchheimer drag with exponent `alpha in [1,2]`, and `eps`
/// the smoothing parameter of the friction functional. `b = 0` is
/// admitted as the drag-free degenerate case; it is what the eigenmode
/// decay oracle runs with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub nu: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub eps: f64,
}

impl PhysicalParams {
    pub fn new(nu: f64, a: f64, b: f64, alpha: f64, eps: f64) -> Result<Self> {
        fn positive(name: &'static str, v: f64) -> Result<f64> {
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(Error::InvalidParam {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                })
            }
        }
        let nu = positive("nu", nu)?;
        let a = positive("a", a)?;
        let eps = positive("eps", eps)?;
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidParam {
                name: "b",
                reason: format!("must be finite and >= 0, got {b}"),
            });
        }
        if !(1.0..=2.0).contains(&alpha) {
            return Err(Error::InvalidParam {
                name: "alpha",
                reason: format!("must lie in [1, 2], got {alpha}"),
            });
        }
        Ok(Self { nu, a, b, alpha, eps })
    }

    /// Same coefficients with a different regularization parameter.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.nu, self.a, self.b, self.alpha, eps)
    }
}
