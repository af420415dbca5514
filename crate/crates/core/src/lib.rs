//! Numerical solver and certification harness for unsteady
//! Brinkman-Forchheimer flow in a 2D rectangle with friction-type slip
//! walls.
//!
//! The boundary splits into Gamma (x-walls, no-slip) and S (y-walls,
//! impermeable with a threshold slip law controlled by a barrier g).
//! The non-smooth wall functional is smoothed with a parameter eps, the
//! regularized problem is integrated by a semi-implicit stepper with a
//! coupled velocity-pressure saddle solve, and the module `analysis`
//! turns the scheme's energy estimates, continuous-dependence bounds
//! and stationary-decay guarantees into executable checks.

// stencil kernels index by (i, j) throughout; negated comparisons are
// NaN guards
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod field;
pub mod forchheimer;
pub mod friction;
pub mod grid;
pub mod ops;
pub mod params;
pub mod poisson;
pub mod presets;
pub mod saddle;
pub mod steady;
pub mod transient;

pub use error::{Error, Result};
pub use field::{CellField, FaceField};
pub use grid::{BoundaryPartition, Grid2D, SFace, Wall};
pub use params::PhysicalParams;

/// Discrete state: face velocity, zero-mean cell pressure, time stamp.
#[derive(Debug, Clone)]
pub struct State {
    pub u: FaceField,
    pub p: CellField,
    pub t: f64,
}

impl State {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            u: FaceField::zeros(grid),
            p: CellField::zeros(grid),
            t: 0.0,
        }
    }
}
