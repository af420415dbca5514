//! Stationary regularized problem: Picard-lagged saddle iteration plus
//! an independent convex-minimization oracle on an explicit basis of
//! the discretely divergence-free admissible space.
//!
//! The oracle minimizes
//!   F(v) = nu/2 ||grad v||^2 + a/2 ||v||^2 + b/(alpha+2) ||v||_{a+2}^{a+2}
//!          + J_eps(v) - (f, v)
//! over basis coordinates by gradient descent with backtracking; its
//! minimizer satisfies the regularized variational inequality, so it
//! cross-checks the Picard fixed point without sharing any solver code.

use crate::error::{Error, Result};
use crate::field::{CellField, FaceField};
use crate::forchheimer::NonlinearTerm;
use crate::friction::FrictionAssembly;
use crate::grid::Grid2D;
use crate::ops::{stream_curl, DiscreteOps};
use crate::presets::{eval_forcing, ForcingSpec};
use crate::saddle::{solve_saddle, VelocityBlock};
use crate::transient::System;
use crate::State;

/// Cells above which the dense basis construction is refused.
pub const DENSE_CELL_CAP: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyConfig {
    pub picard_tol: f64,
    pub picard_max: usize,
    pub uzawa_tol: f64,
    pub uzawa_max: usize,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        Self {
            picard_tol: 1e-11,
            picard_max: 200,
            uzawa_tol: 1e-11,
            uzawa_max: 600,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyResult {
    /// Stationary state, stamped with t = infinity.
    pub state: State,
    pub converged: bool,
    pub picard_iters: usize,
    pub picard_resid: f64,
}

/// Picard iteration on the lagged stationary saddle system, starting
/// from `start` (zero when None).
pub fn solve_steady(
    system: &System,
    forcing: &ForcingSpec,
    cfg: &SteadyConfig,
    start: Option<&FaceField>,
) -> Result<SteadyResult> {
    if !forcing.is_time_independent() {
        return Err(Error::TimeDependentForcing);
    }
    let ops = system.ops();
    let p = system.params();
    let f_full = eval_forcing(forcing, ops, 0.0)?;
    let mut rhs = f_full;
    rhs.enforce_essential(ops.grid());

    let mut u_star = match start {
        Some(f) => {
            let mut f = f.clone();
            f.enforce_essential(ops.grid());
            f
        }
        None => FaceField::zeros(ops.grid()),
    };
    let mut p_guess = CellField::zeros(ops.grid());
    let mut resid = f64::INFINITY;
    let mut iters = 0;
    let mut converged = false;
    for k in 0..cfg.picard_max {
        let (cu, cv) = system.nonlinear().lagged_coeffs(ops, &u_star);
        let tau = ops.trace_tangential(&u_star);
        let kappa = system.friction().lagged_coeffs(&tau, p.eps)?;
        let block = VelocityBlock::new(ops, 0.0, p.nu, p.a)
            .with_forchheimer(p.b, cu, cv)
            .with_friction(system.friction(), kappa);
        let res = solve_saddle(&block, ops, &rhs, Some(&p_guess), cfg.uzawa_tol, cfg.uzawa_max);
        iters = k + 1;
        let mut delta = res.u.clone();
        delta.axpy(-1.0, &u_star);
        resid = ops.norm_l2(&delta);
        u_star = res.u;
        p_guess = res.p;
        if resid <= cfg.picard_tol && res.converged {
            converged = true;
            break;
        }
    }
    Ok(SteadyResult {
        state: State {
            u: u_star,
            p: p_guess,
            t: f64::INFINITY,
        },
        converged,
        picard_iters: iters,
        picard_resid: resid,
    })
}

/// Orthonormal basis of the divergence-free admissible space, built
/// from unit stream functions on interior vertices (dimension
/// (nx-1)(ny-1)) and orthonormalized in the discrete inner product.
#[derive(Debug, Clone)]
pub struct DivFreeBasis {
    pub columns: Vec<FaceField>,
}

pub fn divfree_basis(ops: &DiscreteOps) -> Result<DivFreeBasis> {
    let grid = ops.grid();
    if grid.n_cells() > DENSE_CELL_CAP {
        return Err(Error::DenseCapExceeded {
            cells: grid.n_cells(),
            cap: DENSE_CELL_CAP,
        });
    }
    let nvx = grid.nx + 1;
    let mut columns = Vec::with_capacity((grid.nx - 1) * (grid.ny - 1));
    for j in 1..grid.ny {
        for i in 1..grid.nx {
            let mut psi = vec![0.0; nvx * (grid.ny + 1)];
            psi[i + j * nvx] = 1.0;
            columns.push(stream_curl(grid, &psi));
        }
    }
    // modified Gram-Schmidt, twice for orthogonality at 1e-12 scale
    let mut ortho: Vec<FaceField> = Vec::with_capacity(columns.len());
    for mut w in columns {
        for _ in 0..2 {
            for q in &ortho {
                let c = ops.inner(&w, q);
                w.axpy(-c, q);
            }
        }
        let n = ops.norm_l2(&w);
        if n <= 1e-12 {
            return Err(Error::Invalid(
                "stream basis produced a dependent column".into(),
            ));
        }
        w.scale(1.0 / n);
        ortho.push(w);
    }
    Ok(DivFreeBasis { columns: ortho })
}

impl DivFreeBasis {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn assemble(&self, grid: &Grid2D, coords: &[f64]) -> FaceField {
        let mut f = FaceField::zeros(grid);
        for (c, w) in coords.iter().zip(&self.columns) {
            f.axpy(*c, w);
        }
        f
    }

    pub fn project(&self, ops: &DiscreteOps, f: &FaceField) -> Vec<f64> {
        self.columns.iter().map(|w| ops.inner(f, w)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub grad_tol: f64,
    pub max_iters: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            max_iters: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub u: FaceField,
    pub objective: f64,
    pub grad_norm: f64,
    pub iters: usize,
    /// Objective values along the iteration (monotone by construction).
    pub history: Vec<f64>,
}

struct EnergyParts<'a> {
    ops: &'a DiscreteOps,
    fric: &'a FrictionAssembly,
    nl: NonlinearTerm,
    nu: f64,
    a: f64,
    b: f64,
    eps: f64,
    f_adm: FaceField,
}

impl EnergyParts<'_> {
    fn objective(&self, u: &FaceField) -> f64 {
        let ops = self.ops;
        let quad = 0.5 * self.nu * ops.grad_norm_sq(u) + 0.5 * self.a * ops.inner(u, u);
        let forch = self.b / (self.nl.alpha + 2.0) * self.nl.energy(ops, u);
        let tau = ops.trace_tangential(u);
        let jeps = self
            .fric
            .eval_j_eps(&tau, self.eps)
            .expect("trace length matches assembly");
        quad + forch + jeps - ops.inner(&self.f_adm, u)
    }

    /// Exact gradient field of the discrete objective (the Forchheimer
    /// part differentiates the collocated magnitudes, including the
    /// transverse-average cross terms).
    fn gradient(&self, u: &FaceField) -> FaceField {
        let ops = self.ops;
        let grid = ops.grid();
        let mut g = ops.laplacian_admissible(u);
        g.scale(-self.nu);
        let mut au = u.clone();
        au.scale(self.a);
        g.axpy(1.0, &au);
        g.axpy(-1.0, &self.f_adm);
        if self.b != 0.0 {
            g.axpy(self.b, &forchheimer_gradient(ops, &self.nl, u));
        }
        let tau = ops.trace_tangential(u);
        let lam = self
            .fric
            .eval_k_eps(&tau, self.eps)
            .expect("trace length matches assembly");
        // scatter the boundary multiplier: (w_s lambda_s / w_face) on the
        // trace rows
        let wface = grid.dx * grid.dy;
        let load: Vec<f64> = self
            .fric
            .weights()
            .iter()
            .zip(&lam)
            .map(|(w, l)| w * l / wface)
            .collect();
        ops.add_trace_load(&load, &mut g);
        g.enforce_essential(grid);
        g
    }
}

/// Gradient of (1/(alpha+2)) ||u||_{alpha+2}^{alpha+2} in the weighted
/// inner product. The direct terms differentiate the collocated
/// integrand in its own face value; the cross terms propagate through
/// the transverse averages (d avg / d neighbor = 1/n). Euler's identity
/// (grad, u) = ||u||^{alpha+2} pins the normalization.
fn forchheimer_gradient(ops: &DiscreteOps, nl: &NonlinearTerm, f: &FaceField) -> FaceField {
    let grid = ops.grid();
    let alpha = nl.alpha;
    let (mu, mv) = ops.collocated_magnitudes(f);
    let inv = 1.0 / (alpha + 2.0);
    let mut out = FaceField::zeros(grid);

    let u_stencil = |i: usize, j: usize| {
        // v-faces entering the transverse average at u-face (i, j)
        let mut st: [usize; 4] = [0; 4];
        let mut n = 0usize;
        if i > 0 {
            st[n] = grid.vidx(i - 1, j);
            st[n + 1] = grid.vidx(i - 1, j + 1);
            n += 2;
        }
        if i < grid.nx {
            st[n] = grid.vidx(i, j);
            st[n + 1] = grid.vidx(i, j + 1);
            n += 2;
        }
        (st, n)
    };
    let v_stencil = |i: usize, j: usize| {
        let mut st: [usize; 4] = [0; 4];
        let mut n = 0usize;
        if j > 0 {
            st[n] = grid.uidx(i, j - 1);
            st[n + 1] = grid.uidx(i + 1, j - 1);
            n += 2;
        }
        if j < grid.ny {
            st[n] = grid.uidx(i, j);
            st[n + 1] = grid.uidx(i + 1, j);
            n += 2;
        }
        (st, n)
    };

    // direct terms: d/dc [ m^alpha c^2 ] = 2 m^alpha c + alpha m^{alpha-2} c^3
    for j in 0..grid.ny {
        for i in 1..grid.nx {
            let k = grid.uidx(i, j);
            let (m, c) = (mu[k], f.u[k]);
            if m > 0.0 {
                out.u[k] = inv * (2.0 * m.powf(alpha) * c + alpha * m.powf(alpha - 2.0) * c * c * c);
            }
        }
    }
    for j in 1..grid.ny {
        for i in 0..grid.nx {
            let k = grid.vidx(i, j);
            let (m, c) = (mv[k], f.v[k]);
            if m > 0.0 {
                out.v[k] = inv * (2.0 * m.powf(alpha) * c + alpha * m.powf(alpha - 2.0) * c * c * c);
            }
        }
    }

    // cross terms from u-face integrands into v-face gradient entries:
    // d/dv_k [ w_f m_f^alpha u_f^2 ] = w_f alpha m^{alpha-2} u^2 vbar / n
    for j in 0..grid.ny {
        for i in 0..=grid.nx {
            let k = grid.uidx(i, j);
            let (m, c) = (mu[k], f.u[k]);
            if m == 0.0 || c == 0.0 {
                continue;
            }
            let (st, n) = u_stencil(i, j);
            let vbar = st[..n].iter().map(|&kk| f.v[kk]).sum::<f64>() / n as f64;
            if vbar == 0.0 {
                continue;
            }
            let contrib =
                grid.uweight(i) * inv * alpha * m.powf(alpha - 2.0) * c * c * vbar / n as f64;
            for &kk in &st[..n] {
                let jv = kk / grid.nx;
                out.v[kk] += contrib / grid.vweight(jv);
            }
        }
    }
    // and from v-face integrands into u-face gradient entries
    for j in 0..=grid.ny {
        for i in 0..grid.nx {
            let k = grid.vidx(i, j);
            let (m, c) = (mv[k], f.v[k]);
            if m == 0.0 || c == 0.0 {
                continue;
            }
            let (st, n) = v_stencil(i, j);
            let ubar = st[..n].iter().map(|&kk| f.u[kk]).sum::<f64>() / n as f64;
            if ubar == 0.0 {
                continue;
            }
            let contrib =
                grid.vweight(j) * inv * alpha * m.powf(alpha - 2.0) * c * c * ubar / n as f64;
            for &kk in &st[..n] {
                let iu = kk % (grid.nx + 1);
                out.u[kk] += contrib / grid.uweight(iu);
            }
        }
    }
    out
}

/// Minimize the regularized steady energy over the divergence-free
/// basis coordinates; independent route to the stationary solution.
pub fn steady_oracle(
    system: &System,
    forcing: &ForcingSpec,
    basis: &DivFreeBasis,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    if !forcing.is_time_independent() {
        return Err(Error::TimeDependentForcing);
    }
    let ops = system.ops();
    let grid = ops.grid();
    let p = system.params();
    let mut f_adm = eval_forcing(forcing, ops, 0.0)?;
    f_adm.enforce_essential(grid);
    let parts = EnergyParts {
        ops,
        fric: system.friction(),
        nl: *system.nonlinear(),
        nu: p.nu,
        a: p.a,
        b: p.b,
        eps: p.eps,
        f_adm,
    };
    let dim = basis.dim();
    let mut coords = vec![0.0; dim];
    let mut u = basis.assemble(grid, &coords);
    let mut fval = parts.objective(&u);
    let mut history = vec![fval];
    let mut step = 1.0;
    let mut iters = 0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    loop {
        let gfield = parts.gradient(&u);
        let gcoords = basis.project(ops, &gfield);
        let gnorm = gcoords.iter().map(|x| x * x).sum::<f64>().sqrt();
        if gnorm <= cfg.grad_tol {
            return Ok(OracleResult {
                u,
                objective: fval,
                grad_norm: gnorm,
                iters,
                history,
            });
        }
        if iters >= cfg.max_iters {
            return Err(Error::Invalid(format!(
                "oracle did not reach gradient tolerance: |g| = {gnorm:.3e}"
            )));
        }
        iters += 1;
        // Barzilai-Borwein initial step when curvature information is
        // available, otherwise grow the last accepted step
        step = match &prev {
            Some((c_old, g_old)) => {
                let mut ss = 0.0;
                let mut sy = 0.0;
                for k in 0..dim {
                    let s = coords[k] - c_old[k];
                    let y = gcoords[k] - g_old[k];
                    ss += s * s;
                    sy += s * y;
                }
                if sy > 0.0 && ss > 0.0 {
                    (ss / sy).clamp(1e-12, 1e6)
                } else {
                    step * 2.0
                }
            }
            None => step,
        };
        prev = Some((coords.clone(), gcoords.clone()));
        // backtracking line search on the Armijo condition
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = coords
                .iter()
                .zip(&gcoords)
                .map(|(c, g)| c - step * g)
                .collect();
            let u_trial = basis.assemble(grid, &trial);
            let f_trial = parts.objective(&u_trial);
            if f_trial <= fval - 1e-4 * step * gnorm * gnorm {
                coords = trial;
                u = u_trial;
                fval = f_trial;
                history.push(fval);
                accepted = true;
                break;
            }
            step *= 0.5;
            if step < 1e-18 {
                return Err(Error::LineSearchFailure { iter: iters });
            }
        }
        if !accepted {
            return Err(Error::LineSearchFailure { iter: iters });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryPartition;
    use crate::params::PhysicalParams;

    fn system(n: usize, g0: f64, eps: f64) -> System {
        let g = Grid2D::build(n, n, 1.0, 1.0).unwrap();
        let part = BoundaryPartition::constant_g(&g, g0).unwrap();
        let params = PhysicalParams::new(0.1, 1.0, 1.0, 2.0, eps).unwrap();
        System::new(&g, &part, params).unwrap()
    }

    #[test]
    fn zero_forcing_gives_zero_steady_state() {
        let sys = system(8, 0.5, 1e-3);
        let res = solve_steady(&sys, &ForcingSpec::Zero, &SteadyConfig::default(), None).unwrap();
        assert!(res.converged);
        assert!(sys.ops().norm_l2(&res.state.u) < 1e-12);
        assert!(res.state.t.is_infinite());
    }

    #[test]
    fn basis_has_expected_dimension_and_identity_gram() {
        let sys = system(6, 0.0, 1e-3);
        let basis = divfree_basis(sys.ops()).unwrap();
        assert_eq!(basis.dim(), 5 * 5);
        for (i, a) in basis.columns.iter().enumerate() {
            assert!(sys.ops().divergence(a).linf() < 1e-12);
            for (j, b) in basis.columns.iter().enumerate() {
                let dot = sys.ops().inner(a, b);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12, "gram({i},{j}) = {dot}");
            }
        }
    }

    #[test]
    fn basis_rejects_large_grids() {
        let g = Grid2D::build(32, 32, 1.0, 1.0).unwrap();
        let part = BoundaryPartition::constant_g(&g, 0.0).unwrap();
        let ops = DiscreteOps::new(&g, &part);
        assert!(matches!(
            divfree_basis(&ops),
            Err(Error::DenseCapExceeded { .. })
        ));
    }

    #[test]
    fn oracle_with_zero_forcing_returns_zero_minimizer() {
        let sys = system(6, 0.4, 1e-2);
        let basis = divfree_basis(sys.ops()).unwrap();
        let res = steady_oracle(&sys, &ForcingSpec::Zero, &basis, &OracleConfig::default()).unwrap();
        assert!(sys.ops().norm_l2(&res.u) < 1e-9);
        // F(0) = J_eps(0) = eps * sum w g
        let want = 1e-2 * sys.friction().weighted_g_sum();
        assert!((res.objective - want).abs() < 1e-12);
        // objective history is monotone
        for w in res.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn oracle_gradient_matches_finite_differences() {
        let sys = system(5, 0.7, 1e-2);
        let basis = divfree_basis(sys.ops()).unwrap();
        let ops = sys.ops();
        let grid = ops.grid();
        let p = sys.params();
        let mut f_adm = eval_forcing(&ForcingSpec::Constant { fx: 0.4, fy: 0.2 }, ops, 0.0).unwrap();
        f_adm.enforce_essential(grid);
        let parts = EnergyParts {
            ops,
            fric: sys.friction(),
            nl: *sys.nonlinear(),
            nu: p.nu,
            a: p.a,
            b: p.b,
            eps: p.eps,
            f_adm,
        };
        // a generic point in the basis span, with both components active
        let mut coords = vec![0.0; basis.dim()];
        for (k, c) in coords.iter_mut().enumerate() {
            *c = 0.3 * ((k as f64 * 0.7).sin());
        }
        let u = basis.assemble(grid, &coords);
        let gfield = parts.gradient(&u);
        let gcoords = basis.project(ops, &gfield);
        let f0 = parts.objective(&u);
        let h = 1e-6;
        for k in (0..basis.dim()).step_by(7) {
            let mut cp = coords.clone();
            cp[k] += h;
            let fp = parts.objective(&basis.assemble(grid, &cp));
            let mut cm = coords.clone();
            cm[k] -= h;
            let fm = parts.objective(&basis.assemble(grid, &cm));
            let fd = (fp - fm) / (2.0 * h);
            assert!(
                (fd - gcoords[k]).abs() <= 2e-6 * (1.0 + fd.abs()),
                "coord {k}: fd {fd} vs grad {}",
                gcoords[k]
            );
        }
        let _ = f0;
    }

    #[test]
    fn steady_and_oracle_agree_on_shear_forcing() {
        let sys = system(8, 0.3, 1e-2);
        let cfg = SteadyConfig::default();
        let forcing = ForcingSpec::SineY { amplitude: 1.0 };
        let steady = solve_steady(&sys, &forcing, &cfg, None).unwrap();
        assert!(steady.converged);
        let basis = divfree_basis(sys.ops()).unwrap();
        let oracle = steady_oracle(
            &sys,
            &forcing,
            &basis,
            &OracleConfig {
                grad_tol: 1e-10,
                max_iters: 50_000,
            },
        )
        .unwrap();
        let mut diff = steady.state.u.clone();
        diff.axpy(-1.0, &oracle.u);
        let d = sys.ops().norm_l2(&diff);
        let tol = 10.0 * cfg.picard_tol.max(1e-10);
        // tolerance scale: oracle grad_tol bounds the coordinate error
        // through the strong convexity constant a = 1
        assert!(d <= tol.max(1e-8), "disagreement {d}");
    }

    #[test]
    fn uniqueness_probe_two_starts_converge_to_same_point() {
        let sys = system(8, 0.4, 1e-2);
        let cfg = SteadyConfig::default();
        let forcing = ForcingSpec::SineY { amplitude: 0.8 };
        let a = solve_steady(&sys, &forcing, &cfg, None).unwrap();
        let start = crate::ops::stream_curl_fn(sys.ops().grid(), |x, y| {
            (7.0 * x).sin() * (3.0 * y).cos() * 0.1
        });
        let b = solve_steady(&sys, &forcing, &cfg, Some(&start)).unwrap();
        assert!(a.converged && b.converged);
        let mut diff = a.state.u.clone();
        diff.axpy(-1.0, &b.state.u);
        assert!(sys.ops().norm_l2(&diff) <= 10.0 * cfg.picard_tol);
    }

    #[test]
    fn large_barrier_sticks_the_wall() {
        let sys = system(8, 50.0, 1e-3);
        let forcing = ForcingSpec::SineY { amplitude: 1.0 };
        let res = solve_steady(&sys, &forcing, &SteadyConfig::default(), None).unwrap();
        assert!(res.converged);
        let tau = sys.ops().trace_tangential(&res.state.u);
        let eps = sys.params().eps;
        for t in tau {
            assert!(t.abs() <= 100.0 * eps, "|u_tau| = {}", t.abs());
        }
        let lam = sys
            .friction()
            .eval_k_eps(&sys.ops().trace_tangential(&res.state.u), eps)
            .unwrap();
        let rep = sys
            .friction()
            .slip_residual(&sys.ops().trace_tangential(&res.state.u), &lam)
            .unwrap();
        assert!(rep.all_stick());
        assert!(rep.within_bound());
    }

    #[test]
    fn rejects_time_dependent_forcing() {
        let sys = system(6, 0.1, 1e-2);
        let f = ForcingSpec::DecayingX { amplitude: 1.0 };
        assert!(matches!(
            solve_steady(&sys, &f, &SteadyConfig::default(), None),
            Err(Error::TimeDependentForcing)
        ));
    }
}
