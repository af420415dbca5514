//! Staggered (MAC) rectangular grid and the Gamma/S boundary split.
//!
//! The domain is the rectangle [0,lx] x [0,ly] cut into nx x ny cells.
//! x-velocity lives on vertical faces ((nx+1) x ny), y-velocity on
//! horizontal faces (nx x (ny+1)), pressure at cell centers (nx x ny).
//!
//! Gamma is the pair of x-walls (homogeneous Dirichlet), S the pair of
//! y-walls (impermeable, tangential slip with friction). The u-faces at
//! i = 0 and i = nx lie on Gamma; the v-faces at j = 0 and j = ny lie on
//! S and carry the impermeability constraint.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Grid2D {
    /// Build a staggered grid; rejects fewer than 2 cells per direction
    /// and non-positive extents.
    pub fn build(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "need nx, ny >= 2, got {nx} x {ny}"
            )));
        }
        if !(lx.is_finite() && ly.is_finite() && lx > 0.0 && ly > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "need lx, ly > 0, got {lx} x {ly}"
            )));
        }
        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            dx: lx / nx as f64,
            dy: ly / ny as f64,
        })
    }

    #[inline]
    pub fn n_ufaces(&self) -> usize {
        (self.nx + 1) * self.ny
    }
    #[inline]
    pub fn n_vfaces(&self) -> usize {
        self.nx * (self.ny + 1)
    }
    #[inline]
    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Linear index of the u-face at column i (0..=nx), row j (0..ny).
    #[inline]
    pub fn uidx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx && j < self.ny);
        i + j * (self.nx + 1)
    }
    /// Linear index of the v-face at column i (0..nx), row j (0..=ny).
    #[inline]
    pub fn vidx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j <= self.ny);
        i + j * self.nx
    }
    /// Linear index of the cell (i, j).
    #[inline]
    pub fn cidx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        i + j * self.nx
    }

    /// Center of the u-face (i, j): (i dx, (j+1/2) dy).
    #[inline]
    pub fn uface_center(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.dx, (j as f64 + 0.5) * self.dy)
    }
    /// Center of the v-face (i, j): ((i+1/2) dx, j dy).
    #[inline]
    pub fn vface_center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx, j as f64 * self.dy)
    }
    /// Cell center ((i+1/2) dx, (j+1/2) dy).
    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy)
    }

    /// Quadrature weight of the u-face (i, _): boundary columns own half
    /// a cell so that the u-grid measures exactly lx*ly.
    #[inline]
    pub fn uweight(&self, i: usize) -> f64 {
        let w = self.dx * self.dy;
        if i == 0 || i == self.nx {
            0.5 * w
        } else {
            w
        }
    }
    /// Quadrature weight of the v-face (_, j); half at j = 0 and j = ny.
    #[inline]
    pub fn vweight(&self, j: usize) -> f64 {
        let w = self.dx * self.dy;
        if j == 0 || j == self.ny {
            0.5 * w
        } else {
            w
        }
    }
    /// Cell quadrature weight (uniform).
    #[inline]
    pub fn cweight(&self) -> f64 {
        self.dx * self.dy
    }

    /// True if the u-face lies on Gamma (x-walls): the Dirichlet set.
    #[inline]
    pub fn is_gamma_uface(&self, i: usize) -> bool {
        i == 0 || i == self.nx
    }
    /// True if the v-face lies on S (y-walls): the impermeability set.
    #[inline]
    pub fn is_normal_vface(&self, j: usize) -> bool {
        j == 0 || j == self.ny
    }
}

/// Which of the two S walls a friction face belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wall {
    Bottom,
    Top,
}

/// One tangential-trace sample on S: the u-face column `ix` on `wall`,
/// owning `weight` of the wall measure. Corner columns (ix = 0, nx) are
/// Gamma-pinned and always carry zero tangential velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SFace {
    pub wall: Wall,
    pub ix: usize,
    pub weight: f64,
}

/// The Gamma/S partition of the boundary with the barrier g on S.
///
/// Gamma (x = 0 and x = lx) carries u = 0; S (y = 0 and y = ly) carries
/// u.n = 0 plus the threshold slip law on the tangential component.
#[derive(Debug, Clone)]
pub struct BoundaryPartition {
    grid: Grid2D,
    s_faces: Vec<SFace>,
    g: Vec<f64>,
}

impl BoundaryPartition {
    /// Constant barrier g0 >= 0 on all of S (g = 0 is the frictionless
    /// degenerate case).
    pub fn constant_g(grid: &Grid2D, g0: f64) -> Result<Self> {
        Self::per_wall_g(grid, g0, g0)
    }

    /// Piecewise-constant barrier: one value per wall.
    pub fn per_wall_g(grid: &Grid2D, g_bottom: f64, g_top: f64) -> Result<Self> {
        for (name, v) in [("g_bottom", g_bottom), ("g_top", g_top)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParam {
                    name: if name == "g_bottom" { "g_bottom" } else { "g_top" },
                    reason: format!("barrier must be finite and >= 0, got {v}"),
                });
            }
        }
        let mut s_faces = Vec::with_capacity(2 * (grid.nx + 1));
        let mut g = Vec::with_capacity(2 * (grid.nx + 1));
        for (wall, gw) in [(Wall::Bottom, g_bottom), (Wall::Top, g_top)] {
            for ix in 0..=grid.nx {
                let weight = if ix == 0 || ix == grid.nx {
                    0.5 * grid.dx
                } else {
                    grid.dx
                };
                s_faces.push(SFace { wall, ix, weight });
                g.push(gw);
            }
        }
        Ok(Self {
            grid: *grid,
            s_faces,
            g,
        })
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    #[inline]
    pub fn s_faces(&self) -> &[SFace] {
        &self.s_faces
    }
    #[inline]
    pub fn n_s_faces(&self) -> usize {
        self.s_faces.len()
    }
    /// Barrier value per S face, aligned with `s_faces`.
    #[inline]
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Gamma face identifiers as (i, j) u-face coordinates.
    pub fn gamma_faces(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(2 * self.grid.ny);
        for j in 0..self.grid.ny {
            out.push((0, j));
            out.push((self.grid.nx, j));
        }
        out
    }

    /// Total measure of S (sum of face weights): 2*lx.
    pub fn s_measure(&self) -> f64 {
        self.s_faces.iter().map(|f| f.weight).sum()
    }
    /// Total measure of Gamma: 2*ly.
    pub fn gamma_measure(&self) -> f64 {
        2.0 * self.grid.ly
    }

    /// Sum of weight * g over S; the scale of the J_eps regularization gap.
    pub fn weighted_g_sum(&self) -> f64 {
        self.s_faces
            .iter()
            .zip(&self.g)
            .map(|(f, g)| f.weight * g)
            .sum()
    }

    /// Row index (j) of the u-faces whose values represent the tangential
    /// trace on `wall` under the zero-Neumann wall extension.
    #[inline]
    pub fn trace_row(&self, wall: Wall) -> usize {
        match wall {
            Wall::Bottom => 0,
            Wall::Top => self.grid.ny - 1,
        }
    }
}
