//! Discrete fields on the staggered grid and compensated reductions.

use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// Neumaier compensated sum; keeps inner products accurate to O(eps)
/// so the 1e-13-scale operator identities hold on desk-scale grids.
pub fn ksum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Face-centered vector field: `u` on vertical faces, `v` on horizontal.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    pub nx: usize,
    pub ny: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FaceField {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            u: vec![0.0; grid.n_ufaces()],
            v: vec![0.0; grid.n_vfaces()],
        }
    }

    /// Sample analytic component functions at face centers.
    pub fn from_fn(
        grid: &Grid2D,
        fx: impl Fn(f64, f64) -> f64,
        fy: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut f = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                let (x, y) = grid.uface_center(i, j);
                f.u[grid.uidx(i, j)] = fx(x, y);
            }
        }
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.vface_center(i, j);
                f.v[grid.vidx(i, j)] = fy(x, y);
            }
        }
        f
    }

    pub fn conforms(&self, grid: &Grid2D) -> bool {
        self.nx == grid.nx
            && self.ny == grid.ny
            && self.u.len() == grid.n_ufaces()
            && self.v.len() == grid.n_vfaces()
    }

    pub fn check_layout(&self, grid: &Grid2D) -> Result<()> {
        if self.conforms(grid) {
            Ok(())
        } else {
            Err(Error::LayoutMismatch(format!(
                "field is {}x{}, grid is {}x{}",
                self.nx, self.ny, grid.nx, grid.ny
            )))
        }
    }

    /// Zero the essential-constraint faces: u on Gamma columns, v on the
    /// S-normal rows. Admissible fields are fixed points of this map.
    pub fn enforce_essential(&mut self, grid: &Grid2D) {
        for j in 0..grid.ny {
            self.u[grid.uidx(0, j)] = 0.0;
            self.u[grid.uidx(grid.nx, j)] = 0.0;
        }
        for i in 0..grid.nx {
            self.v[grid.vidx(i, 0)] = 0.0;
            self.v[grid.vidx(i, grid.ny)] = 0.0;
        }
    }

    /// Largest absolute value stored on a constrained face.
    pub fn essential_violation(&self, grid: &Grid2D) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..grid.ny {
            worst = worst.max(self.u[grid.uidx(0, j)].abs());
            worst = worst.max(self.u[grid.uidx(grid.nx, j)].abs());
        }
        for i in 0..grid.nx {
            worst = worst.max(self.v[grid.vidx(i, 0)].abs());
            worst = worst.max(self.v[grid.vidx(i, grid.ny)].abs());
        }
        worst
    }

    pub fn scale(&mut self, c: f64) {
        for x in &mut self.u {
            *x *= c;
        }
        for x in &mut self.v {
            *x *= c;
        }
    }

    /// self += c * other
    pub fn axpy(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.u.len(), other.u.len());
        for (a, b) in self.u.iter_mut().zip(&other.u) {
            *a += c * b;
        }
        for (a, b) in self.v.iter_mut().zip(&other.v) {
            *a += c * b;
        }
    }

    pub fn linf(&self) -> f64 {
        let mu = self.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mv = self.v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        mu.max(mv)
    }
}

/// Cell-centered scalar field (pressure and divergence live here).
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    pub nx: usize,
    pub ny: usize,
    pub q: Vec<f64>,
}

impl CellField {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            q: vec![0.0; grid.n_cells()],
        }
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut c = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.cell_center(i, j);
                c.q[grid.cidx(i, j)] = f(x, y);
            }
        }
        c
    }

    pub fn conforms(&self, grid: &Grid2D) -> bool {
        self.nx == grid.nx && self.ny == grid.ny && self.q.len() == grid.n_cells()
    }

    pub fn check_layout(&self, grid: &Grid2D) -> Result<()> {
        if self.conforms(grid) {
            Ok(())
        } else {
            Err(Error::LayoutMismatch(format!(
                "cell field is {}x{}, grid is {}x{}",
                self.nx, self.ny, grid.nx, grid.ny
            )))
        }
    }

    pub fn mean(&self) -> f64 {
        ksum(self.q.iter().copied()) / self.q.len() as f64
    }

    /// Subtract the mean (projection onto the zero-mean pressure space).
    pub fn remove_mean(&mut self) {
        let m = self.mean();
        for x in &mut self.q {
            *x -= m;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for x in &mut self.q {
            *x *= c;
        }
    }

    pub fn axpy(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.q.len(), other.q.len());
        for (a, b) in self.q.iter_mut().zip(&other.q) {
            *a += c * b;
        }
    }

    pub fn linf(&self) -> f64 {
        self.q.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}
