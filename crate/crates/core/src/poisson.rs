//! Exact solver for the cell-centered Neumann Laplacian on the MAC grid.
//!
//! The operator is L = -Div Grad with zero pressure flux through the
//! boundary; it separates into 1D tridiagonal pieces whose eigenpairs
//! are known in closed form (cosine modes), so L can be inverted by two
//! dense orthogonal transforms per direction. Used for the divergence
//! projection of preset fields and as the pressure-Schur preconditioner.

use crate::field::CellField;
use crate::grid::Grid2D;

#[derive(Debug, Clone)]
pub struct NeumannPoisson {
    nx: usize,
    ny: usize,
    /// qx[k][i] = orthonormal cosine mode k sampled at cell column i.
    qx: Vec<Vec<f64>>,
    qy: Vec<Vec<f64>>,
    lam_x: Vec<f64>,
    lam_y: Vec<f64>,
    dx: f64,
    dy: f64,
}

fn cosine_modes(n: usize, h: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut q = vec![vec![0.0; n]; n];
    let mut lam = vec![0.0; n];
    for k in 0..n {
        let norm = if k == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        let theta = k as f64 * std::f64::consts::PI / n as f64;
        lam[k] = 2.0 / (h * h) * (1.0 - theta.cos());
        for i in 0..n {
            q[k][i] = norm * (theta * (i as f64 + 0.5)).cos();
        }
    }
    (q, lam)
}

impl NeumannPoisson {
    pub fn new(grid: &Grid2D) -> Self {
        let (qx, lam_x) = cosine_modes(grid.nx, grid.dx);
        let (qy, lam_y) = cosine_modes(grid.ny, grid.dy);
        Self {
            nx: grid.nx,
            ny: grid.ny,
            qx,
            qy,
            lam_x,
            lam_y,
            dx: grid.dx,
            dy: grid.dy,
        }
    }

    /// Solve L phi = rhs for the zero-mean part of rhs; the returned
    /// field has zero coefficient on the constant mode.
    pub fn solve(&self, rhs: &CellField) -> CellField {
        let (nx, ny) = (self.nx, self.ny);
        // t[k][j] = sum_i qx[k][i] rhs(i,j)
        let mut t = vec![0.0; nx * ny];
        for k in 0..nx {
            let qk = &self.qx[k];
            for j in 0..ny {
                let mut s = 0.0;
                let row = &rhs.q[j * nx..(j + 1) * nx];
                for i in 0..nx {
                    s += qk[i] * row[i];
                }
                t[k * ny + j] = s;
            }
        }
        // c[k][l] = sum_j t[k][j] qy[l][j], scaled by 1/(lam_x+lam_y)
        let mut c = vec![0.0; nx * ny];
        for k in 0..nx {
            for l in 0..ny {
                if k == 0 && l == 0 {
                    continue;
                }
                let ql = &self.qy[l];
                let mut s = 0.0;
                for j in 0..ny {
                    s += t[k * ny + j] * ql[j];
                }
                c[k * ny + l] = s / (self.lam_x[k] + self.lam_y[l]);
            }
        }
        // back-transform: s2[k][j] = sum_l c[k][l] qy[l][j]
        let mut s2 = vec![0.0; nx * ny];
        for k in 0..nx {
            for l in 0..ny {
                let cv = c[k * ny + l];
                if cv == 0.0 {
                    continue;
                }
                let ql = &self.qy[l];
                for j in 0..ny {
                    s2[k * ny + j] += cv * ql[j];
                }
            }
        }
        let mut out = CellField {
            nx,
            ny,
            q: vec![0.0; nx * ny],
        };
        for k in 0..nx {
            let qk = &self.qx[k];
            for j in 0..ny {
                let sv = s2[k * ny + j];
                if sv == 0.0 {
                    continue;
                }
                let row = &mut out.q[j * nx..(j + 1) * nx];
                for i in 0..nx {
                    row[i] += qk[i] * sv;
                }
            }
        }
        out
    }

    /// Stencil application of L = -Div Grad (zero-flux boundary).
    pub fn apply(&self, q: &CellField) -> CellField {
        let (nx, ny) = (self.nx, self.ny);
        let ix2 = 1.0 / (self.dx * self.dx);
        let iy2 = 1.0 / (self.dy * self.dy);
        let mut out = CellField {
            nx,
            ny,
            q: vec![0.0; nx * ny],
        };
        for j in 0..ny {
            for i in 0..nx {
                let c = q.q[i + j * nx];
                let mut acc = 0.0;
                if i > 0 {
                    acc += (c - q.q[i - 1 + j * nx]) * ix2;
                }
                if i + 1 < nx {
                    acc += (c - q.q[i + 1 + j * nx]) * ix2;
                }
                if j > 0 {
                    acc += (c - q.q[i + (j - 1) * nx]) * iy2;
                }
                if j + 1 < ny {
                    acc += (c - q.q[i + (j + 1) * nx]) * iy2;
                }
                out.q[i + j * nx] = acc;
            }
        }
        out
    }

    /// Solve with one iterative-refinement pass; drives the residual to
    /// a few ulps, which the divergence-projection tolerance relies on.
    pub fn solve_refined(&self, rhs: &CellField) -> CellField {
        let mut phi = self.solve(rhs);
        let mut r = rhs.clone();
        let lphi = self.apply(&phi);
        for (rv, lv) in r.q.iter_mut().zip(&lphi.q) {
            *rv -= lv;
        }
        let corr = self.solve(&r);
        phi.axpy(1.0, &corr);
        phi
    }
}
