//! Discrete differential and integral operators on the staggered grid.
//!
//! The divergence and pressure gradient are exact negative adjoints in
//! the face inner product, so summation-by-parts identities hold at
//! machine precision; the energy ledger depends on that. The vector
//! Laplacian treats Gamma as Dirichlet data and uses a zero-Neumann
//! ghost for the tangential component on S, which keeps the friction
//! traction out of the stiffness operator entirely.

use crate::error::{Error, Result};
use crate::field::{ksum, CellField, FaceField};
use crate::grid::{BoundaryPartition, Grid2D};
use crate::poisson::NeumannPoisson;

/// Result of the constrained Stokes eigen-iteration.
#[derive(Debug, Clone)]
pub struct LambdaMin {
    pub lambda: f64,
    pub mode: FaceField,
    pub residual: f64,
    pub iters: usize,
}

/// Precomputed operator context: grid, partition, Poisson factorization.
#[derive(Debug, Clone)]
pub struct DiscreteOps {
    grid: Grid2D,
    part: BoundaryPartition,
    poisson: NeumannPoisson,
}

impl DiscreteOps {
    pub fn new(grid: &Grid2D, part: &BoundaryPartition) -> Self {
        Self {
            grid: *grid,
            part: part.clone(),
            poisson: NeumannPoisson::new(grid),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    #[inline]
    pub fn partition(&self) -> &BoundaryPartition {
        &self.part
    }
    #[inline]
    pub fn poisson(&self) -> &NeumannPoisson {
        &self.poisson
    }

    // ---- first-order operators -------------------------------------

    /// Two-point MAC divergence, one value per cell.
    pub fn divergence(&self, f: &FaceField) -> CellField {
        debug_assert!(f.conforms(&self.grid));
        let g = &self.grid;
        let mut out = CellField::zeros(g);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let du = (f.u[g.uidx(i + 1, j)] - f.u[g.uidx(i, j)]) / g.dx;
                let dv = (f.v[g.vidx(i, j + 1)] - f.v[g.vidx(i, j)]) / g.dy;
                out.q[g.cidx(i, j)] = du + dv;
            }
        }
        out
    }

    pub fn divergence_checked(&self, f: &FaceField) -> Result<CellField> {
        f.check_layout(&self.grid)?;
        Ok(self.divergence(f))
    }

    /// Pressure gradient on faces; zero through boundary-normal faces,
    /// which makes it the exact negative adjoint of the divergence.
    pub fn gradient(&self, q: &CellField) -> FaceField {
        debug_assert!(q.conforms(&self.grid));
        let g = &self.grid;
        let mut out = FaceField::zeros(g);
        for j in 0..g.ny {
            for i in 1..g.nx {
                out.u[g.uidx(i, j)] = (q.q[g.cidx(i, j)] - q.q[g.cidx(i - 1, j)]) / g.dx;
            }
        }
        for j in 1..g.ny {
            for i in 0..g.nx {
                out.v[g.vidx(i, j)] = (q.q[g.cidx(i, j)] - q.q[g.cidx(i, j - 1)]) / g.dy;
            }
        }
        out
    }

    pub fn gradient_checked(&self, q: &CellField) -> Result<FaceField> {
        q.check_layout(&self.grid)?;
        Ok(self.gradient(q))
    }

    // ---- Laplacian ---------------------------------------------------

    /// 5-point vector Laplacian on the constrained space. Input faces on
    /// Gamma / S-normal are read as the stored values (zero for
    /// admissible fields); output is zero there.
    pub fn laplacian_admissible(&self, f: &FaceField) -> FaceField {
        debug_assert!(f.conforms(&self.grid));
        let g = &self.grid;
        let ix2 = 1.0 / (g.dx * g.dx);
        let iy2 = 1.0 / (g.dy * g.dy);
        let mut out = FaceField::zeros(g);
        for j in 0..g.ny {
            for i in 1..g.nx {
                let c = f.u[g.uidx(i, j)];
                let mut acc = (f.u[g.uidx(i - 1, j)] - 2.0 * c + f.u[g.uidx(i + 1, j)]) * ix2;
                // zero-Neumann ghost on S for the tangential component
                if j > 0 {
                    acc += (f.u[g.uidx(i, j - 1)] - c) * iy2;
                }
                if j + 1 < g.ny {
                    acc += (f.u[g.uidx(i, j + 1)] - c) * iy2;
                }
                out.u[g.uidx(i, j)] = acc;
            }
        }
        for j in 1..g.ny {
            for i in 0..g.nx {
                let c = f.v[g.vidx(i, j)];
                let mut acc = (f.v[g.vidx(i, j - 1)] - 2.0 * c + f.v[g.vidx(i, j + 1)]) * iy2;
                // Dirichlet wall value 0 at half-cell distance on Gamma
                acc += if i > 0 {
                    (f.v[g.vidx(i - 1, j)] - c) * ix2
                } else {
                    -3.0 * c * ix2
                };
                acc += if i + 1 < g.nx {
                    (f.v[g.vidx(i + 1, j)] - c) * ix2
                } else {
                    -3.0 * c * ix2
                };
                out.v[g.vidx(i, j)] = acc;
            }
        }
        out
    }

    /// Checked Laplacian: rejects fields violating the essential
    /// constraints beyond 1e-10 (relative to the field magnitude).
    pub fn laplacian(&self, f: &FaceField) -> Result<FaceField> {
        f.check_layout(&self.grid)?;
        let viol = f.essential_violation(&self.grid);
        if viol > 1e-10 * f.linf().max(1.0) {
            return Err(Error::ConstraintViolation(format!(
                "boundary values up to {viol:.3e} on constrained faces"
            )));
        }
        Ok(self.laplacian_admissible(f))
    }

    // ---- inner products and norms -------------------------------------

    /// Face inner product with quadrature weights (half weight on the
    /// boundary-normal faces so each component integrates over lx*ly).
    pub fn inner(&self, a: &FaceField, b: &FaceField) -> f64 {
        let g = &self.grid;
        let su = ksum((0..g.ny).flat_map(|j| {
            (0..=g.nx).map(move |i| {
                let k = j * (g.nx + 1) + i;
                g.uweight(i) * a.u[k] * b.u[k]
            })
        }));
        let sv = ksum((0..=g.ny).flat_map(|j| {
            (0..g.nx).map(move |i| {
                let k = j * g.nx + i;
                g.vweight(j) * a.v[k] * b.v[k]
            })
        }));
        su + sv
    }

    pub fn inner_cells(&self, a: &CellField, b: &CellField) -> f64 {
        let w = self.grid.cweight();
        ksum(a.q.iter().zip(&b.q).map(|(x, y)| w * x * y))
    }

    pub fn norm_l2(&self, f: &FaceField) -> f64 {
        self.inner(f, f).max(0.0).sqrt()
    }

    pub fn norm_l2_cells(&self, q: &CellField) -> f64 {
        self.inner_cells(q, q).max(0.0).sqrt()
    }

    /// H1-seminorm squared via summation by parts: -(Lap f, f).
    pub fn grad_norm_sq(&self, f: &FaceField) -> f64 {
        let lap = self.laplacian_admissible(f);
        (-self.inner(&lap, f)).max(0.0)
    }

    /// Velocity magnitude collocated at every face: the transverse
    /// component is averaged from the surrounding faces (4-point in the
    /// interior, 2-point against a wall).
    pub fn collocated_magnitudes(&self, f: &FaceField) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let mut mu = vec![0.0; g.n_ufaces()];
        for j in 0..g.ny {
            for i in 0..=g.nx {
                let mut s = 0.0;
                let mut n = 0.0;
                if i > 0 {
                    s += f.v[g.vidx(i - 1, j)] + f.v[g.vidx(i - 1, j + 1)];
                    n += 2.0;
                }
                if i < g.nx {
                    s += f.v[g.vidx(i, j)] + f.v[g.vidx(i, j + 1)];
                    n += 2.0;
                }
                let vb = s / n;
                mu[g.uidx(i, j)] = f.u[g.uidx(i, j)].hypot(vb);
            }
        }
        let mut mv = vec![0.0; g.n_vfaces()];
        for j in 0..=g.ny {
            for i in 0..g.nx {
                let mut s = 0.0;
                let mut n = 0.0;
                if j > 0 {
                    s += f.u[g.uidx(i, j - 1)] + f.u[g.uidx(i + 1, j - 1)];
                    n += 2.0;
                }
                if j < g.ny {
                    s += f.u[g.uidx(i, j)] + f.u[g.uidx(i + 1, j)];
                    n += 2.0;
                }
                let ub = s / n;
                mv[g.vidx(i, j)] = f.v[g.vidx(i, j)].hypot(ub);
            }
        }
        (mu, mv)
    }

    /// ||f||_p^p for finite p >= 2, using the collocated magnitudes so
    /// that the p = alpha+2 value matches the Forchheimer pairing
    /// (N(u), u) under the same quadrature.
    pub fn norm_lp_pow(&self, f: &FaceField, p: f64) -> Result<f64> {
        if !(p.is_finite() && p >= 2.0) {
            return Err(Error::UnsupportedExponent(p));
        }
        let g = &self.grid;
        if p == 2.0 {
            return Ok(self.inner(f, f).max(0.0));
        }
        let (mu, mv) = self.collocated_magnitudes(f);
        let su = ksum((0..g.ny).flat_map(|j| {
            let mu = &mu;
            (0..=g.nx).map(move |i| {
                let k = j * (g.nx + 1) + i;
                g.uweight(i) * mu[k].powf(p - 2.0) * f.u[k] * f.u[k]
            })
        }));
        let sv = ksum((0..=g.ny).flat_map(|j| {
            let mv = &mv;
            (0..g.nx).map(move |i| {
                let k = j * g.nx + i;
                g.vweight(j) * mv[k].powf(p - 2.0) * f.v[k] * f.v[k]
            })
        }));
        Ok(su + sv)
    }

    /// Discrete L^p norm; supports finite p >= 2 and p = infinity.
    pub fn norm_lp(&self, f: &FaceField, p: f64) -> Result<f64> {
        if p == f64::INFINITY {
            let (mu, mv) = self.collocated_magnitudes(f);
            let m = mu
                .iter()
                .chain(mv.iter())
                .fold(0.0f64, |m, &x| m.max(x));
            return Ok(m);
        }
        Ok(self.norm_lp_pow(f, p)?.powf(1.0 / p))
    }

    // ---- boundary trace ---------------------------------------------

    /// Tangential velocity on S, one value per S face: the u-face row
    /// next to each wall, which is the wall value under the zero-Neumann
    /// extension used by the Laplacian. Corner columns are Gamma-pinned
    /// and read as stored (zero for admissible fields).
    pub fn trace_tangential(&self, f: &FaceField) -> Vec<f64> {
        let g = &self.grid;
        self.part
            .s_faces()
            .iter()
            .map(|s| {
                let j = self.part.trace_row(s.wall);
                f.u[g.uidx(s.ix, j)]
            })
            .collect()
    }

    /// Scatter per-S-face values back onto the trace rows of a face
    /// field (corner columns are skipped: they are Dirichlet-pinned).
    pub fn add_trace_load(&self, load: &[f64], out: &mut FaceField) {
        let g = &self.grid;
        for (s, &val) in self.part.s_faces().iter().zip(load) {
            if g.is_gamma_uface(s.ix) {
                continue;
            }
            let j = self.part.trace_row(s.wall);
            out.u[g.uidx(s.ix, j)] += val;
        }
    }

    // ---- divergence-free projection -----------------------------------

    /// Project onto the discretely divergence-free space; exact up to a
    /// few ulps thanks to the refined tensor Poisson solve.
    pub fn project_divfree(&self, f: &mut FaceField) {
        let mut d = self.divergence(f);
        d.remove_mean();
        let phi = self.poisson.solve_refined(&d);
        let corr = self.gradient(&phi);
        f.axpy(1.0, &corr);
    }

    // ---- constrained Stokes eigenvalue ---------------------------------

    /// Projected CG solve of -Lap y = rhs on the divergence-free
    /// admissible space. Returns (solution, iterations).
    fn stokes_cg(&self, rhs: &FaceField, tol_rel: f64, max_iters: usize) -> (FaceField, usize) {
        let g = &self.grid;
        let project = |f: &mut FaceField| {
            self.project_divfree(f);
            f.enforce_essential(g);
        };
        let mut b = rhs.clone();
        project(&mut b);
        let bnorm = self.norm_l2(&b).max(1e-300);
        let mut x = FaceField::zeros(g);
        let mut r = b.clone();
        let mut z = r.clone();
        let mut p = z.clone();
        let mut rz = self.inner(&r, &z);
        let mut iters = 0;
        for _ in 0..max_iters {
            if self.norm_l2(&r) <= tol_rel * bnorm {
                break;
            }
            iters += 1;
            let mut ap = self.laplacian_admissible(&p);
            ap.scale(-1.0);
            project(&mut ap);
            let pap = self.inner(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            x.axpy(alpha, &p);
            r.axpy(-alpha, &ap);
            z = r.clone();
            let rz_new = self.inner(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            let mut pnew = z.clone();
            pnew.axpy(beta, &p);
            p = pnew;
        }
        (x, iters)
    }

    /// Smallest eigenvalue of the constrained Stokes operator (vector
    /// Laplacian on the divergence-free admissible space) by inverse
    /// iteration; 1/sqrt(lambda) is the discrete Poincare constant.
    pub fn compute_lambda_min(&self, tol: f64, max_iters: usize) -> Result<LambdaMin> {
        let g = &self.grid;
        // low-mode stream function: admissible and divergence-free seed
        let psi = |x: f64, y: f64| {
            (std::f64::consts::PI * x / g.lx).sin() * (std::f64::consts::PI * y / g.ly).sin()
        };
        let mut x = stream_curl_fn(g, psi);
        let n = self.norm_l2(&x);
        if n == 0.0 {
            return Err(Error::Invalid("degenerate eigen seed".into()));
        }
        x.scale(1.0 / n);
        let mut residual = f64::INFINITY;
        for it in 1..=max_iters {
            let (y, _) = self.stokes_cg(&x, 1e-13, 8000);
            let yn = self.norm_l2(&y);
            if yn == 0.0 {
                return Err(Error::EigenNonConvergence {
                    residual,
                    iters: it,
                });
            }
            x = y;
            x.scale(1.0 / yn);
            let lambda = self.grad_norm_sq(&x);
            // residual of the projected eigenproblem
            let mut ax = self.laplacian_admissible(&x);
            ax.scale(-1.0);
            self.project_divfree(&mut ax);
            ax.enforce_essential(g);
            ax.axpy(-lambda, &x);
            residual = self.norm_l2(&ax);
            if residual <= tol * lambda.max(f64::MIN_POSITIVE) {
                return Ok(LambdaMin {
                    lambda,
                    mode: x,
                    residual,
                    iters: it,
                });
            }
        }
        Err(Error::EigenNonConvergence {
            residual,
            iters: max_iters,
        })
    }
}

/// Discrete curl of a vertex stream function: exactly divergence-free
/// and, when psi vanishes on the boundary vertices, admissible.
/// `psi` holds (nx+1) x (ny+1) vertex values, index i + j*(nx+1).
pub fn stream_curl(grid: &Grid2D, psi: &[f64]) -> FaceField {
    assert_eq!(psi.len(), (grid.nx + 1) * (grid.ny + 1));
    let vid = |i: usize, j: usize| i + j * (grid.nx + 1);
    let mut f = FaceField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..=grid.nx {
            f.u[grid.uidx(i, j)] = (psi[vid(i, j + 1)] - psi[vid(i, j)]) / grid.dy;
        }
    }
    for j in 0..=grid.ny {
        for i in 0..grid.nx {
            f.v[grid.vidx(i, j)] = -(psi[vid(i + 1, j)] - psi[vid(i, j)]) / grid.dx;
        }
    }
    f
}

/// Curl of an analytic stream function sampled at grid vertices, with
/// the boundary ring forced to zero so the result is admissible.
pub fn stream_curl_fn(grid: &Grid2D, psi: impl Fn(f64, f64) -> f64) -> FaceField {
    let mut vals = vec![0.0; (grid.nx + 1) * (grid.ny + 1)];
    for j in 1..grid.ny {
        for i in 1..grid.nx {
            vals[i + j * (grid.nx + 1)] = psi(i as f64 * grid.dx, j as f64 * grid.dy);
        }
    }
    stream_curl(grid, &vals)
}
