//! The non-smooth wall functional J, its smoothing J_eps, the Gateaux
//! derivative K_eps, and the slip-trichotomy classifier.
//!
//! J(v) integrates g |v_tau| over S. Replacing |.| by sqrt(.^2 + eps^2)
//! gives a smooth convex functional whose derivative acts through the
//! per-face multiplier lambda = g t / sqrt(t^2 + eps^2); the multiplier
//! always stays strictly inside the friction bound g.

use crate::error::{Error, Result};
use crate::grid::BoundaryPartition;

/// Classification thresholds. A smoothed problem never sticks exactly,
/// so the stick test is eps-aware and tightens as eps shrinks.
pub const TOL_ACTIVE: f64 = 1e-3;
pub const TOL_DIR: f64 = 1e-6;

/// Boundary quadrature, barrier and smoothing parameter for S.
#[derive(Debug, Clone)]
pub struct FrictionAssembly {
    weights: Vec<f64>,
    g: Vec<f64>,
    eps: f64,
}

impl FrictionAssembly {
    pub fn new(part: &BoundaryPartition, eps: f64) -> Result<Self> {
        Self::from_parts(
            part.s_faces().iter().map(|f| f.weight).collect(),
            part.g().to_vec(),
            eps,
        )
    }

    /// Assemble from raw per-face data; weights must be positive.
    pub fn from_parts(weights: Vec<f64>, g: Vec<f64>, eps: f64) -> Result<Self> {
        if weights.len() != g.len() {
            return Err(Error::SizeMismatch {
                expected: weights.len(),
                got: g.len(),
            });
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Invalid("quadrature weights must be > 0".into()));
        }
        if g.iter().any(|&gv| !(gv >= 0.0)) {
            return Err(Error::Invalid("barrier g must be >= 0".into()));
        }
        check_eps(eps)?;
        Ok(Self { weights, g, eps })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }
    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    #[inline]
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Sum of weight * g; the J_eps regularization gap scale.
    pub fn weighted_g_sum(&self) -> f64 {
        self.weights.iter().zip(&self.g).map(|(w, g)| w * g).sum()
    }

    fn check_len(&self, u_tau: &[f64]) -> Result<()> {
        if u_tau.len() == self.len() {
            Ok(())
        } else {
            Err(Error::SizeMismatch {
                expected: self.len(),
                got: u_tau.len(),
            })
        }
    }

    /// J(u_tau) = sum w g |u_tau|.
    pub fn eval_j(&self, u_tau: &[f64]) -> Result<f64> {
        self.check_len(u_tau)?;
        Ok(self
            .weights
            .iter()
            .zip(&self.g)
            .zip(u_tau)
            .map(|((w, g), t)| w * g * t.abs())
            .sum())
    }

    /// J_eps(u_tau) = sum w g sqrt(u_tau^2 + eps^2).
    pub fn eval_j_eps(&self, u_tau: &[f64], eps: f64) -> Result<f64> {
        self.check_len(u_tau)?;
        check_eps(eps)?;
        Ok(self
            .weights
            .iter()
            .zip(&self.g)
            .zip(u_tau)
            .map(|((w, g), t)| w * g * t.hypot(eps))
            .sum())
    }

    /// Regularized traction multiplier per face:
    /// lambda = g u_tau / sqrt(u_tau^2 + eps^2), strictly below g.
    pub fn eval_k_eps(&self, u_tau: &[f64], eps: f64) -> Result<Vec<f64>> {
        self.check_len(u_tau)?;
        check_eps(eps)?;
        Ok(self
            .g
            .iter()
            .zip(u_tau)
            .map(|(g, t)| g * t / t.hypot(eps))
            .collect())
    }

    /// Lagged boundary coefficient g / sqrt(u_tau^2 + eps^2); multiplies
    /// the new trace in the semi-implicit operator.
    pub fn lagged_coeffs(&self, u_tau: &[f64], eps: f64) -> Result<Vec<f64>> {
        self.check_len(u_tau)?;
        check_eps(eps)?;
        Ok(self
            .g
            .iter()
            .zip(u_tau)
            .map(|(g, t)| g / t.hypot(eps))
            .collect())
    }

    /// Weighted boundary pairing <lambda, v_tau> over S.
    pub fn pairing(&self, lambda: &[f64], v_tau: &[f64]) -> Result<f64> {
        self.check_len(lambda)?;
        self.check_len(v_tau)?;
        Ok(self
            .weights
            .iter()
            .zip(lambda)
            .zip(v_tau)
            .map(|((w, l), v)| w * l * v)
            .sum())
    }

    /// <K_eps(u) - K_eps(v), u - v>; the caller asserts nonnegativity.
    pub fn monotonicity_check_k(&self, u_tau: &[f64], v_tau: &[f64], eps: f64) -> Result<f64> {
        let ku = self.eval_k_eps(u_tau, eps)?;
        let kv = self.eval_k_eps(v_tau, eps)?;
        let diff_k: Vec<f64> = ku.iter().zip(&kv).map(|(a, b)| a - b).collect();
        let diff_u: Vec<f64> = u_tau.iter().zip(v_tau).map(|(a, b)| a - b).collect();
        self.pairing(&diff_k, &diff_u)
    }

    /// Classify every S face against the threshold law and report the
    /// measured violations (report-only, never fails).
    pub fn slip_residual(&self, u_tau: &[f64], lambda: &[f64]) -> Result<SlipReport> {
        self.check_len(u_tau)?;
        self.check_len(lambda)?;
        let eps = self.eps;
        let mut faces = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let (t, l, g, w) = (u_tau[k], lambda[k], self.g[k], self.weights[k]);
            let tol_stick = 10.0 * eps * w.sqrt();
            let bound_excess = (l.abs() - g * (1.0 + 1e-12)).max(0.0);
            // consistency with the regularized direction law
            let dir_residual = (l - g * t / t.hypot(eps)).abs();
            let face = if l.abs() < g * (1.0 - TOL_ACTIVE) {
                FaceSlip {
                    class: SlipClass::Stick,
                    u_tau: t,
                    lambda: l,
                    g,
                    stick_violation: (t.abs() - tol_stick).max(0.0),
                    sign_violation: 0.0,
                    dir_residual,
                    bound_excess,
                }
            } else {
                FaceSlip {
                    class: SlipClass::Slip,
                    u_tau: t,
                    lambda: l,
                    g,
                    stick_violation: 0.0,
                    sign_violation: (-(l * t)).max(0.0),
                    dir_residual,
                    bound_excess,
                }
            };
            faces.push(face);
        }
        Ok(SlipReport::collect(faces))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            name: "eps",
            reason: format!("must be finite and > 0, got {eps}"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlipClass {
    Stick,
    Slip,
}

/// One face's trichotomy record.
#[derive(Debug, Clone, Copy)]
pub struct FaceSlip {
    pub class: SlipClass,
    pub u_tau: f64,
    pub lambda: f64,
    pub g: f64,
    /// max(0, |u_tau| - tol_stick), only for stick faces
    pub stick_violation: f64,
    /// max(0, -lambda u_tau), only for slip faces
    pub sign_violation: f64,
    /// |lambda - g u_tau / sqrt(u_tau^2 + eps^2)|
    pub dir_residual: f64,
    /// max(0, |lambda| - g (1 + 1e-12))
    pub bound_excess: f64,
}

/// Per-face classifications plus worst-case violations.
#[derive(Debug, Clone)]
pub struct SlipReport {
    pub faces: Vec<FaceSlip>,
    pub worst_bound_excess: f64,
    pub worst_dir_residual: f64,
    pub worst_stick_violation: f64,
    pub worst_sign_violation: f64,
}

impl SlipReport {
    fn collect(faces: Vec<FaceSlip>) -> Self {
        let fold = |sel: fn(&FaceSlip) -> f64| faces.iter().map(sel).fold(0.0f64, f64::max);
        Self {
            worst_bound_excess: fold(|f| f.bound_excess),
            worst_dir_residual: fold(|f| f.dir_residual),
            worst_stick_violation: fold(|f| f.stick_violation),
            worst_sign_violation: fold(|f| f.sign_violation),
            faces,
        }
    }

    /// True when every face respects |lambda| <= g (1 + 1e-12).
    pub fn within_bound(&self) -> bool {
        self.worst_bound_excess == 0.0
    }

    pub fn all_stick(&self) -> bool {
        self.faces.iter().all(|f| f.class == SlipClass::Stick)
    }
}
