//! Analytic presets for the body force f and the initial velocity u0.
//!
//! Every initial preset is pushed through the essential constraints and
//! the divergence projection at construction, so the produced state is
//! admissible in exactly the sense the solver and the ledger test.

use crate::error::{Error, Result};
use crate::field::FaceField;
use crate::ops::DiscreteOps;
use crate::State;

/// Initial-velocity presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    Zero,
    /// Counter-rotating vortex pair from the stream function
    /// A sin(pi x/lx) sin(pi y/ly); divergence-free by construction.
    TaylorVortex { amplitude: f64 },
    /// Horizontal shear u_x = A y (ly - y), u_y = 0.
    ShearProfile { amplitude: f64 },
}

impl InitSpec {
    pub fn parse(tag: &str, amplitude: f64) -> Result<Self> {
        match tag {
            "zero" => Ok(Self::Zero),
            "taylor-vortex" => Ok(Self::TaylorVortex { amplitude }),
            "shear-profile" => Ok(Self::ShearProfile { amplitude }),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::TaylorVortex { .. } => "taylor-vortex",
            Self::ShearProfile { .. } => "shear-profile",
        }
    }
}

/// Body-force presets; `eval` may depend on time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForcingSpec {
    Zero,
    /// Constant force (fx, fy) everywhere.
    Constant { fx: f64, fy: f64 },
    /// F0 e^{-t} in the x direction.
    DecayingX { amplitude: f64 },
    /// F0 sin(pi y / ly) in the x direction.
    SineY { amplitude: f64 },
}

impl ForcingSpec {
    pub fn parse(tag: &str, fx: f64, fy: f64) -> Result<Self> {
        match tag {
            "zero" => Ok(Self::Zero),
            "constant" => Ok(Self::Constant { fx, fy }),
            "decaying" => Ok(Self::DecayingX { amplitude: fx }),
            "sine-y" => Ok(Self::SineY { amplitude: fx }),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Constant { .. } => "constant",
            Self::DecayingX { .. } => "decaying",
            Self::SineY { .. } => "sine-y",
        }
    }

    pub fn is_time_independent(&self) -> bool {
        !matches!(self, Self::DecayingX { .. })
    }
}

/// Evaluate the forcing at time t as a face field.
pub fn eval_forcing(spec: &ForcingSpec, ops: &DiscreteOps, t: f64) -> Result<FaceField> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Invalid(format!("forcing time must be >= 0, got {t}")));
    }
    let grid = ops.grid();
    Ok(match *spec {
        ForcingSpec::Zero => FaceField::zeros(grid),
        ForcingSpec::Constant { fx, fy } => FaceField::from_fn(grid, |_, _| fx, |_, _| fy),
        ForcingSpec::DecayingX { amplitude } => {
            let a = amplitude * (-t).exp();
            FaceField::from_fn(grid, |_, _| a, |_, _| 0.0)
        }
        ForcingSpec::SineY { amplitude } => FaceField::from_fn(
            grid,
            |_, y| amplitude * (std::f64::consts::PI * y / grid.ly).sin(),
            |_, _| 0.0,
        ),
    })
}

/// Build an admissible, discretely divergence-free initial state.
pub fn make_initial(spec: &InitSpec, ops: &DiscreteOps) -> State {
    let grid = ops.grid();
    let mut u = match *spec {
        InitSpec::Zero => FaceField::zeros(grid),
        InitSpec::TaylorVortex { amplitude } => {
            let pi = std::f64::consts::PI;
            FaceField::from_fn(
                grid,
                |x, y| amplitude * pi / grid.ly * (pi * x / grid.lx).sin() * (pi * y / grid.ly).cos(),
                |x, y| -amplitude * pi / grid.lx * (pi * x / grid.lx).cos() * (pi * y / grid.ly).sin(),
            )
        }
        InitSpec::ShearProfile { amplitude } => {
            FaceField::from_fn(grid, |_, y| amplitude * y * (grid.ly - y), |_, _| 0.0)
        }
    };
    u.enforce_essential(grid);
    ops.project_divfree(&mut u);
    u.enforce_essential(grid);
    State {
        u,
        p: crate::CellField::zeros(grid),
        t: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryPartition, Grid2D};

    fn ops(n: usize) -> DiscreteOps {
        let g = Grid2D::build(n, n, 1.0, 1.0).unwrap();
        let p = BoundaryPartition::constant_g(&g, 1.0).unwrap();
        DiscreteOps::new(&g, &p)
    }

    #[test]
    fn zero_preset_is_all_zero() {
        let ops = ops(8);
        let s = make_initial(&InitSpec::Zero, &ops);
        assert_eq!(s.u.linf(), 0.0);
        assert_eq!(s.p.linf(), 0.0);
    }

    #[test]
    fn presets_are_divergence_free_and_admissible() {
        let ops = ops(12);
        for spec in [
            InitSpec::TaylorVortex { amplitude: 1.3 },
            InitSpec::ShearProfile { amplitude: 2.0 },
        ] {
            let s = make_initial(&spec, &ops);
            let d = ops.divergence(&s.u);
            assert!(
                d.linf() <= 1e-12 * s.u.linf().max(1e-300),
                "{spec:?}: div {}",
                d.linf()
            );
            assert_eq!(s.u.essential_violation(ops.grid()), 0.0, "{spec:?}");
        }
    }

    #[test]
    fn shear_profile_keeps_nontrivial_tangential_trace() {
        let ops = ops(12);
        let s = make_initial(&InitSpec::ShearProfile { amplitude: 1.0 }, &ops);
        let tr = ops.trace_tangential(&s.u);
        let worst = tr.iter().fold(0.0f64, |m, &t| m.max(t.abs()));
        assert!(worst > 0.0);
    }

    #[test]
    fn constant_forcing_fills_faces() {
        let ops = ops(6);
        let f = eval_forcing(&ForcingSpec::Constant { fx: 0.7, fy: 0.0 }, &ops, 3.0).unwrap();
        assert!(f.u.iter().all(|&x| x == 0.7));
        assert!(f.v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn decaying_forcing_amplitude() {
        let ops = ops(6);
        let f0 = eval_forcing(&ForcingSpec::DecayingX { amplitude: 2.0 }, &ops, 0.0).unwrap();
        assert!((f0.u[0] - 2.0).abs() < 1e-15);
        let flate = eval_forcing(&ForcingSpec::DecayingX { amplitude: 2.0 }, &ops, 80.0).unwrap();
        assert!(flate.linf() < 1e-30);
    }

    #[test]
    fn sine_forcing_matches_closed_form_at_face_centers() {
        let ops = ops(9);
        let g = ops.grid();
        let f = eval_forcing(&ForcingSpec::SineY { amplitude: 1.5 }, &ops, 1.0).unwrap();
        for j in 0..g.ny {
            for i in 0..=g.nx {
                let (_, y) = g.uface_center(i, j);
                let want = 1.5 * (std::f64::consts::PI * y / g.ly).sin();
                assert!((f.u[g.uidx(i, j)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn time_independent_presets_return_identical_fields() {
        let ops = ops(5);
        for spec in [
            ForcingSpec::Zero,
            ForcingSpec::Constant { fx: 1.0, fy: -2.0 },
            ForcingSpec::SineY { amplitude: 0.3 },
        ] {
            let a = eval_forcing(&spec, &ops, 0.0).unwrap();
            let b = eval_forcing(&spec, &ops, 17.5).unwrap();
            assert_eq!(a, b, "{spec:?}");
        }
    }

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(InitSpec::parse("vortex-sheet", 1.0).is_err());
        assert!(ForcingSpec::parse("gusts", 1.0, 0.0).is_err());
    }

    #[test]
    fn negative_time_rejected() {
        let ops = ops(4);
        assert!(eval_forcing(&ForcingSpec::Zero, &ops, -1.0).is_err());
    }
}
