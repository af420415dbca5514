//! Coupled velocity-pressure saddle solve enforcing incompressibility.
//!
//! The velocity block `sigma I + a I + nu (-Lap) + b diag(|u*|^alpha) +
//! B_K(u*)` is symmetric positive definite on the constrained space, so
//! the pressure Schur complement is solved by preconditioned CG (Uzawa
//! with conjugate directions); every outer iteration performs one
//! Jacobi-PCG momentum solve. The pressure preconditioner combines the
//! identity and the inverse Neumann Laplacian, which keeps the outer
//! iteration count flat in both dt and h.

use crate::field::{CellField, FaceField};
use crate::friction::FrictionAssembly;
use crate::ops::DiscreteOps;

/// Per-step linear velocity operator with frozen nonlinear coefficients.
#[derive(Debug, Clone)]
pub struct VelocityBlock<'a> {
    ops: &'a DiscreteOps,
    /// Mass coefficient: 1/dt for a transient step, 0 for steady solves.
    pub sigma: f64,
    pub nu: f64,
    pub a: f64,
    pub b: f64,
    /// |u*|^alpha collocated per face (empty means no Forchheimer drag).
    forch_u: Vec<f64>,
    forch_v: Vec<f64>,
    /// g / sqrt(u*_tau^2 + eps^2) per S face (empty means no friction).
    fric: Vec<f64>,
    fric_assembly: Option<&'a FrictionAssembly>,
}

impl<'a> VelocityBlock<'a> {
    pub fn new(ops: &'a DiscreteOps, sigma: f64, nu: f64, a: f64) -> Self {
        Self {
            ops,
            sigma,
            nu,
            a,
            b: 0.0,
            forch_u: Vec::new(),
            forch_v: Vec::new(),
            fric: Vec::new(),
            fric_assembly: None,
        }
    }

    pub fn with_forchheimer(mut self, b: f64, coeff_u: Vec<f64>, coeff_v: Vec<f64>) -> Self {
        self.b = b;
        self.forch_u = coeff_u;
        self.forch_v = coeff_v;
        self
    }

    pub fn with_friction(mut self, assembly: &'a FrictionAssembly, coeffs: Vec<f64>) -> Self {
        self.fric_assembly = Some(assembly);
        self.fric = coeffs;
        self
    }

    /// Apply the operator to an admissible field.
    pub fn apply(&self, x: &FaceField) -> FaceField {
        let ops = self.ops;
        let g = ops.grid();
        let mut out = ops.laplacian_admissible(x);
        out.scale(-self.nu);
        let c0 = self.sigma + self.a;
        for j in 0..g.ny {
            for i in 1..g.nx {
                let k = g.uidx(i, j);
                out.u[k] += c0 * x.u[k];
            }
        }
        for j in 1..g.ny {
            for i in 0..g.nx {
                let k = g.vidx(i, j);
                out.v[k] += c0 * x.v[k];
            }
        }
        if self.b != 0.0 && !self.forch_u.is_empty() {
            for j in 0..g.ny {
                for i in 1..g.nx {
                    let k = g.uidx(i, j);
                    out.u[k] += self.b * self.forch_u[k] * x.u[k];
                }
            }
            for j in 1..g.ny {
                for i in 0..g.nx {
                    let k = g.vidx(i, j);
                    out.v[k] += self.b * self.forch_v[k] * x.v[k];
                }
            }
        }
        if self.fric_assembly.is_some() {
            // boundary pairing <kappa u_tau, v_tau>: weight kappa / (dx dy)
            // lands on the trace rows; Gamma-pinned corners are skipped
            let part = ops.partition();
            let wface = g.dx * g.dy;
            for (s, &kappa) in part.s_faces().iter().zip(&self.fric) {
                if g.is_gamma_uface(s.ix) {
                    continue;
                }
                let k = g.uidx(s.ix, part.trace_row(s.wall));
                out.u[k] += s.weight * kappa / wface * x.u[k];
            }
        }
        out
    }

    /// Diagonal of the operator, for Jacobi preconditioning.
    pub fn diagonal(&self) -> FaceField {
        let ops = self.ops;
        let g = ops.grid();
        let ix2 = 1.0 / (g.dx * g.dx);
        let iy2 = 1.0 / (g.dy * g.dy);
        let c0 = self.sigma + self.a;
        let mut d = FaceField::zeros(g);
        for j in 0..g.ny {
            for i in 1..g.nx {
                let lap_diag = 2.0 * ix2
                    + if j == 0 || j + 1 == g.ny { iy2 } else { 2.0 * iy2 };
                let k = g.uidx(i, j);
                d.u[k] = c0 + self.nu * lap_diag;
                if self.b != 0.0 && !self.forch_u.is_empty() {
                    d.u[k] += self.b * self.forch_u[k];
                }
            }
        }
        for j in 1..g.ny {
            for i in 0..g.nx {
                let left = if i == 0 { 3.0 } else { 1.0 };
                let right = if i + 1 == g.nx { 3.0 } else { 1.0 };
                let lap_diag = 2.0 * iy2 + (left + right) * ix2;
                let k = g.vidx(i, j);
                d.v[k] = c0 + self.nu * lap_diag;
                if self.b != 0.0 && !self.forch_v.is_empty() {
                    d.v[k] += self.b * self.forch_v[k];
                }
            }
        }
        if self.fric_assembly.is_some() {
            let part = ops.partition();
            let wface = g.dx * g.dy;
            for (s, &kappa) in part.s_faces().iter().zip(&self.fric) {
                if g.is_gamma_uface(s.ix) {
                    continue;
                }
                let k = g.uidx(s.ix, part.trace_row(s.wall));
                d.u[k] += s.weight * kappa / wface;
            }
        }
        d
    }

    /// Jacobi-preconditioned CG momentum solve, relative tolerance on
    /// the residual norm. Returns iterations taken.
    pub fn solve(
        &self,
        rhs: &FaceField,
        x0: Option<&FaceField>,
        tol_rel: f64,
        max_iters: usize,
    ) -> (FaceField, usize) {
        let ops = self.ops;
        let g = ops.grid();
        let diag = self.diagonal();
        let precond = |r: &FaceField| {
            let mut z = r.clone();
            for (zi, di) in z.u.iter_mut().zip(&diag.u) {
                if *di > 0.0 {
                    *zi /= di;
                }
            }
            for (zi, di) in z.v.iter_mut().zip(&diag.v) {
                if *di > 0.0 {
                    *zi /= di;
                }
            }
            z.enforce_essential(g);
            z
        };
        let bnorm = ops.norm_l2(rhs).max(1e-300);
        let mut x = match x0 {
            Some(f) => f.clone(),
            None => FaceField::zeros(g),
        };
        let mut r = rhs.clone();
        r.axpy(-1.0, &self.apply(&x));
        r.enforce_essential(g);
        let mut z = precond(&r);
        let mut p = z.clone();
        let mut rz = ops.inner(&r, &z);
        let mut iters = 0;
        while iters < max_iters && ops.norm_l2(&r) > tol_rel * bnorm {
            iters += 1;
            let ap = self.apply(&p);
            let pap = ops.inner(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rz / pap;
            x.axpy(alpha, &p);
            r.axpy(-alpha, &ap);
            z = precond(&r);
            let rz_new = ops.inner(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            let mut pn = z.clone();
            pn.axpy(beta, &p);
            p = pn;
        }
        (x, iters)
    }
}

/// Outcome of a saddle solve.
#[derive(Debug, Clone)]
pub struct SaddleResult {
    pub u: FaceField,
    pub p: CellField,
    pub converged: bool,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub max_div: f64,
}

/// Solve  M u + G p = rhs,  Div u = 0  by CG on the pressure Schur
/// complement; stops when max |div u| <= uzawa_tol.
pub fn solve_saddle(
    block: &VelocityBlock,
    ops: &DiscreteOps,
    rhs: &FaceField,
    p0: Option<&CellField>,
    uzawa_tol: f64,
    uzawa_max: usize,
) -> SaddleResult {
    let grid = ops.grid();
    let inner_tol = 1e-13;
    let inner_max = 4000;
    let mut inner_iters = 0;

    let mut p = match p0 {
        Some(q) => {
            let mut q = q.clone();
            q.remove_mean();
            q
        }
        None => CellField::zeros(grid),
    };

    // momentum solve for the current pressure
    let momentum = |p: &CellField, guess: Option<&FaceField>, inner: &mut usize| {
        let mut b = rhs.clone();
        b.axpy(-1.0, &ops.gradient(p));
        b.enforce_essential(grid);
        let (u, it) = block.solve(&b, guess, inner_tol, inner_max);
        *inner += it;
        u
    };

    let mut u = momentum(&p, None, &mut inner_iters);
    let mut r = ops.divergence(&u);
    r.scale(-1.0);
    r.remove_mean();

    // Cahouet-Chabard-type pressure preconditioner
    let cc = |r: &CellField| {
        let mut z = ops.poisson().solve(r);
        z.scale(block.sigma + block.a);
        z.axpy(block.nu, r);
        z.remove_mean();
        z
    };

    let mut outer_iters = 0;
    let mut max_div = ops.divergence(&u).linf();
    if max_div > uzawa_tol {
        let mut z = cc(&r);
        let mut d = z.clone();
        let mut rz = ops.inner_cells(&r, &z);
        while outer_iters < uzawa_max && max_div > uzawa_tol {
            outer_iters += 1;
            let gd = {
                let mut f = ops.gradient(&d);
                f.enforce_essential(grid);
                f.scale(-1.0);
                f
            };
            let (w, it) = block.solve(&gd, None, inner_tol, inner_max);
            inner_iters += it;
            // s = A d = -Div M^{-1} G d  (w solves M w = -G d)
            let mut s = ops.divergence(&w);
            s.remove_mean();
            let ds = ops.inner_cells(&d, &s);
            if !(ds > 0.0) {
                break;
            }
            let alpha = rz / ds;
            p.axpy(alpha, &d);
            u.axpy(alpha, &w);
            r.axpy(-alpha, &s);
            max_div = r.linf();
            if max_div <= uzawa_tol {
                break;
            }
            z = cc(&r);
            let rz_new = ops.inner_cells(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            let mut dn = z.clone();
            dn.axpy(beta, &d);
            d = dn;
        }
        // refresh the velocity against the final pressure to remove the
        // incremental drift of the CG updates
        u = momentum(&p, Some(&u), &mut inner_iters);
        max_div = ops.divergence(&u).linf();
    }
    p.remove_mean();
    SaddleResult {
        converged: max_div <= uzawa_tol,
        u,
        p,
        outer_iters,
        inner_iters,
        max_div,
    }
}
