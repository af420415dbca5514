//! Semi-implicit time integration of the regularized problem.
//!
//! Each backward-Euler step solves the linear saddle system
//!
//!   (1/dt + a) u + nu (-Lap) u + b |u*|^alpha u + B_K(u*) u + G p = u^n/dt + f,
//!   Div u = 0,
//!
//! with the Forchheimer and friction coefficients frozen at the Picard
//! iterate u*. Lagging keeps the operator symmetric positive definite,
//! which is what makes the per-step energy inequality provable rather
//! than merely observed.

use crate::analysis::LedgerEntry;
use crate::error::{Error, Result};
use crate::field::FaceField;
use crate::forchheimer::{EvalMode, NonlinearTerm};
use crate::friction::FrictionAssembly;
use crate::grid::{BoundaryPartition, Grid2D};
use crate::ops::DiscreteOps;
use crate::params::PhysicalParams;
use crate::presets::{eval_forcing, ForcingSpec};
use crate::saddle::{solve_saddle, VelocityBlock};
use crate::State;

/// Stepping controls; iteration caps are >= 1 and tolerances positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub t_end: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub uzawa_tol: f64,
    pub uzawa_max: usize,
    /// Freeze the nonlinear coefficients at u^n instead of iterating.
    pub lag_mode: bool,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 0.1,
            picard_tol: 1e-10,
            picard_max: 200,
            uzawa_tol: 1e-10,
            uzawa_max: 500,
            lag_mode: true,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                })
            }
        };
        pos("dt", self.dt)?;
        pos("picard_tol", self.picard_tol)?;
        pos("uzawa_tol", self.uzawa_tol)?;
        if self.picard_max < 1 || self.uzawa_max < 1 {
            return Err(Error::InvalidParam {
                name: "iteration caps",
                reason: "must be >= 1".into(),
            });
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }
}

/// Per-step solver diagnostics.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepDiag {
    pub picard_iters: usize,
    pub picard_resid: f64,
    pub picard_converged: bool,
    pub uzawa_iters: usize,
    pub uzawa_converged: bool,
    pub max_div: f64,
}

impl StepDiag {
    pub fn flagged(&self) -> bool {
        !(self.picard_converged && self.uzawa_converged)
    }
}

/// A complete run: states at t = 0, dt, 2dt, ..., one ledger entry and
/// one diagnostics record per step. Append-only while running,
/// immutable afterwards.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub ledger: Vec<LedgerEntry>,
    pub diags: Vec<StepDiag>,
    pub grid: Grid2D,
    pub params: PhysicalParams,
    pub config: StepConfig,
    pub forcing: ForcingSpec,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn any_flagged(&self) -> bool {
        self.diags.iter().any(|d| d.flagged())
    }

    /// dt * sum over steps of ||p^n||^2 (the pressure time-sum monitor).
    pub fn pressure_time_sum(&self, ops: &DiscreteOps) -> f64 {
        self.config.dt
            * self.states[1..]
                .iter()
                .map(|s| {
                    let n = ops.norm_l2_cells(&s.p);
                    n * n
                })
                .sum::<f64>()
    }
}

/// Grid, partition, physics and friction bundled for a family of runs.
#[derive(Debug, Clone)]
pub struct System {
    ops: DiscreteOps,
    fric: FrictionAssembly,
    nl: NonlinearTerm,
    params: PhysicalParams,
}

impl System {
    pub fn new(grid: &Grid2D, part: &BoundaryPartition, params: PhysicalParams) -> Result<Self> {
        let ops = DiscreteOps::new(grid, part);
        let fric = FrictionAssembly::new(part, params.eps)?;
        let nl = NonlinearTerm::new(params.alpha, EvalMode::LaggedCoefficient)?;
        Ok(Self {
            ops,
            fric,
            nl,
            params,
        })
    }

    #[inline]
    pub fn ops(&self) -> &DiscreteOps {
        &self.ops
    }
    #[inline]
    pub fn friction(&self) -> &FrictionAssembly {
        &self.fric
    }
    #[inline]
    pub fn nonlinear(&self) -> &NonlinearTerm {
        &self.nl
    }
    #[inline]
    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    fn admissible(&self, f: &FaceField) -> FaceField {
        let mut g = f.clone();
        g.enforce_essential(self.ops.grid());
        g
    }

    /// One backward-Euler step from `state`. Boundary admissibility is
    /// enforced here; divergence-freedom of the input is the caller's
    /// contract (`run_transient` checks the initial state and keeps it
    /// within `uzawa_tol` afterwards, flagging capped solves).
    pub fn step(
        &self,
        state: &State,
        cfg: &StepConfig,
        forcing: &ForcingSpec,
    ) -> Result<(State, LedgerEntry, StepDiag)> {
        cfg.validate()?;
        state.u.check_layout(self.ops.grid())?;
        let viol = state.u.essential_violation(self.ops.grid());
        if viol > 1e-10 * state.u.linf().max(1.0) {
            return Err(Error::ConstraintViolation(format!(
                "step input violates boundary constraints by {viol:.3e}"
            )));
        }
        let p = &self.params;
        let t_new = state.t + cfg.dt;
        let f_full = eval_forcing(forcing, &self.ops, t_new)?;
        let f_adm = self.admissible(&f_full);

        // zero fixed point: nothing to solve
        if state.u.linf() == 0.0 && f_adm.linf() == 0.0 {
            let new = State {
                u: FaceField::zeros(self.ops.grid()),
                p: crate::CellField::zeros(self.ops.grid()),
                t: t_new,
            };
            let entry = self.ledger_entry(state, &new, &f_full, 0.0, 0.0, cfg.dt);
            return Ok((
                new,
                entry,
                StepDiag {
                    picard_converged: true,
                    uzawa_converged: true,
                    ..StepDiag::default()
                },
            ));
        }

        let mut rhs = state.u.clone();
        rhs.scale(1.0 / cfg.dt);
        rhs.axpy(1.0, &f_adm);
        rhs.enforce_essential(self.ops.grid());

        let mut u_star = state.u.clone();
        let mut p_guess = state.p.clone();
        let mut diag = StepDiag::default();
        let mut u_new = state.u.clone();
        let mut forch_pairing = 0.0;
        let mut fric_pairing = 0.0;
        let picard_rounds = if cfg.lag_mode { cfg.picard_max } else { 1 };
        for k in 0..picard_rounds {
            let (cu, cv) = self.nl.lagged_coeffs(&self.ops, &u_star);
            let tau_star = self.ops.trace_tangential(&u_star);
            let kappa = self.fric.lagged_coeffs(&tau_star, p.eps)?;
            let block = VelocityBlock::new(&self.ops, 1.0 / cfg.dt, p.nu, p.a)
                .with_forchheimer(p.b, cu.clone(), cv.clone())
                .with_friction(&self.fric, kappa.clone());
            let res = solve_saddle(&block, &self.ops, &rhs, Some(&p_guess), cfg.uzawa_tol, cfg.uzawa_max);
            diag.uzawa_iters += res.outer_iters;
            diag.uzawa_converged = res.converged;
            diag.max_div = res.max_div;
            u_new = res.u;
            p_guess = res.p;
            diag.picard_iters = k + 1;

            // ledger pairings with the coefficients actually used
            forch_pairing = pair_diag(&self.ops, &cu, &cv, &u_new);
            fric_pairing = {
                let tau_new = self.ops.trace_tangential(&u_new);
                self.fric
                    .weights()
                    .iter()
                    .zip(&kappa)
                    .zip(&tau_new)
                    .map(|((w, k), t)| w * k * t * t)
                    .sum()
            };

            let mut delta = u_new.clone();
            delta.axpy(-1.0, &u_star);
            diag.picard_resid = self.ops.norm_l2(&delta);
            u_star = u_new.clone();
            if !cfg.lag_mode {
                diag.picard_converged = true;
                break;
            }
            if diag.picard_resid <= cfg.picard_tol {
                diag.picard_converged = true;
                break;
            }
        }

        let new = State {
            u: u_new,
            p: p_guess,
            t: t_new,
        };
        let entry = self.ledger_entry(state, &new, &f_full, forch_pairing, fric_pairing, cfg.dt);
        Ok((new, entry, diag))
    }

    fn ledger_entry(
        &self,
        old: &State,
        new: &State,
        f_full: &FaceField,
        forch_pairing: f64,
        fric_pairing: f64,
        dt: f64,
    ) -> LedgerEntry {
        let p = &self.params;
        let k_new = self.ops.inner(&new.u, &new.u);
        let k_old = self.ops.inner(&old.u, &old.u);
        let grad_sq = self.ops.grad_norm_sq(&new.u);
        let f_sq = self.ops.inner(f_full, f_full);
        let mut du = new.u.clone();
        du.axpy(-1.0, &old.u);
        du.scale(1.0 / dt);
        let uprime_sq = self.ops.inner(&du, &du);
        let ddt_kinetic = (k_new - k_old) / dt;
        let grad = 2.0 * p.nu * grad_sq;
        let darcy = p.a * k_new;
        let forch = 2.0 * p.b * forch_pairing;
        let friction = 2.0 * fric_pairing;
        let source = f_sq / p.a;
        LedgerEntry {
            t: new.t,
            kinetic: k_new,
            ddt_kinetic,
            grad,
            darcy,
            forch,
            friction,
            source,
            slack: source - (ddt_kinetic + grad + darcy + forch + friction),
            grad_sq,
            uprime_sq,
            f_sq,
        }
    }

    /// Fixed-step march from `init` to t_end; deterministic for
    /// identical inputs. Solver-flag conditions are recorded in the
    /// diagnostics rather than aborting the run.
    pub fn run_transient(
        &self,
        init: &State,
        cfg: &StepConfig,
        forcing: &ForcingSpec,
    ) -> Result<Trajectory> {
        cfg.validate()?;
        if cfg.t_end < cfg.dt {
            return Err(Error::InvalidParam {
                name: "t_end",
                reason: format!("need t_end >= dt, got {} < {}", cfg.t_end, cfg.dt),
            });
        }
        // the march preserves divergence-freedom up to the configured
        // tolerance (or flags the step); the initial state is the
        // caller's responsibility, so it is what gets checked
        let div0 = self.ops.divergence(&init.u).linf();
        if div0 > 1e-8 * init.u.linf().max(1.0) {
            return Err(Error::ConstraintViolation(format!(
                "initial state is not divergence-free: max |div u| = {div0:.3e}"
            )));
        }
        let n = cfg.n_steps();
        let mut states = Vec::with_capacity(n + 1);
        let mut ledger = Vec::with_capacity(n);
        let mut diags = Vec::with_capacity(n);
        states.push(init.clone());
        let mut cur = init.clone();
        for k in 0..n {
            let (next, entry, diag) = self.step(&cur, cfg, forcing).map_err(|e| {
                Error::Invalid(format!("step {} failed: {e}", k + 1))
            })?;
            states.push(next.clone());
            ledger.push(entry);
            diags.push(diag);
            cur = next;
        }
        Ok(Trajectory {
            states,
            ledger,
            diags,
            grid: *self.ops.grid(),
            params: self.params,
            config: *cfg,
            forcing: *forcing,
        })
    }
}

fn pair_diag(ops: &DiscreteOps, cu: &[f64], cv: &[f64], f: &FaceField) -> f64 {
    let g = ops.grid();
    let mut s = 0.0;
    for j in 0..g.ny {
        for i in 0..=g.nx {
            let k = g.uidx(i, j);
            s += g.uweight(i) * cu[k] * f.u[k] * f.u[k];
        }
    }
    for j in 0..=g.ny {
        for i in 0..g.nx {
            let k = g.vidx(i, j);
            s += g.vweight(j) * cv[k] * f.v[k] * f.v[k];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryPartition;
    use crate::presets::{make_initial, InitSpec};

    fn system(n: usize, g0: f64) -> System {
        let g = Grid2D::build(n, n, 1.0, 1.0).unwrap();
        let part = BoundaryPartition::constant_g(&g, g0).unwrap();
        let params = PhysicalParams::new(0.1, 1.0, 1.0, 2.0, 1e-3).unwrap();
        System::new(&g, &part, params).unwrap()
    }

    #[test]
    fn zero_state_zero_forcing_is_a_fixed_point() {
        let sys = system(8, 0.5);
        let cfg = StepConfig::default();
        let s0 = State::zeros(sys.ops().grid());
        let (s1, entry, diag) = sys.step(&s0, &cfg, &ForcingSpec::Zero).unwrap();
        assert_eq!(s1.u.linf(), 0.0);
        assert_eq!(s1.p.linf(), 0.0);
        assert_eq!(entry.kinetic, 0.0);
        assert_eq!(entry.slack, 0.0);
        assert!(!diag.flagged());
    }

    #[test]
    fn constant_forcing_first_step_norm_bound() {
        // testing the step identity with v = u^1 and dropping nonnegative
        // terms gives ||u^1|| <= dt ||f|| / (1 + dt a)
        let sys = system(8, 0.5);
        let cfg = StepConfig {
            dt: 0.01,
            t_end: 0.01,
            ..StepConfig::default()
        };
        let s0 = State::zeros(sys.ops().grid());
        let forcing = ForcingSpec::Constant { fx: 2.0, fy: 0.0 };
        let (s1, _, diag) = sys.step(&s0, &cfg, &forcing).unwrap();
        assert!(!diag.flagged());
        let fnorm = {
            let f = eval_forcing(&forcing, sys.ops(), cfg.dt).unwrap();
            sys.ops().norm_l2(&f)
        };
        let bound = cfg.dt * fnorm / (1.0 + cfg.dt * 1.0);
        assert!(sys.ops().norm_l2(&s1.u) <= bound * (1.0 + 1e-10));
    }

    #[test]
    fn trajectory_is_deterministic_and_divergence_free() {
        let sys = system(8, 0.3);
        let cfg = StepConfig {
            dt: 5e-3,
            t_end: 0.05,
            ..StepConfig::default()
        };
        let init = make_initial(&InitSpec::ShearProfile { amplitude: 1.0 }, sys.ops());
        let forcing = ForcingSpec::Constant { fx: 0.5, fy: 0.1 };
        let t1 = sys.run_transient(&init, &cfg, &forcing).unwrap();
        let t2 = sys.run_transient(&init, &cfg, &forcing).unwrap();
        assert_eq!(t1.states.len(), 11);
        for (a, b) in t1.states.iter().zip(&t2.states) {
            assert_eq!(a.u.u, b.u.u);
            assert_eq!(a.u.v, b.u.v);
            assert_eq!(a.p.q, b.p.q);
        }
        for s in &t1.states {
            assert!(sys.ops().divergence(&s.u).linf() <= cfg.uzawa_tol);
            assert!(s.p.mean().abs() < 1e-12);
        }
        assert!(!t1.any_flagged());
    }

    #[test]
    fn dissipative_run_has_monotone_kinetic_energy() {
        let sys = system(10, 0.5);
        let cfg = StepConfig {
            dt: 2e-3,
            t_end: 0.04,
            ..StepConfig::default()
        };
        let init = make_initial(&InitSpec::TaylorVortex { amplitude: 1.0 }, sys.ops());
        let traj = sys.run_transient(&init, &cfg, &ForcingSpec::Zero).unwrap();
        for w in traj.ledger.windows(2) {
            assert!(w[1].kinetic <= w[0].kinetic * (1.0 + 1e-12));
        }
        // every nonnegative ledger column stays nonnegative
        for e in &traj.ledger {
            assert!(e.grad >= 0.0 && e.darcy >= 0.0 && e.forch >= 0.0);
            assert!(e.friction >= 0.0 && e.source >= 0.0);
            assert!(e.slack >= 0.0, "slack {}", e.slack);
        }
    }

    #[test]
    fn frozen_coefficient_mode_stays_close_and_keeps_the_ledger() {
        let sys = system(8, 0.5);
        let init = make_initial(&InitSpec::ShearProfile { amplitude: 1.0 }, sys.ops());
        let forcing = ForcingSpec::SineY { amplitude: 0.5 };
        let base = StepConfig {
            dt: 1e-3,
            t_end: 0.02,
            ..StepConfig::default()
        };
        let lagged = sys.run_transient(&init, &base, &forcing).unwrap();
        let frozen_cfg = StepConfig {
            lag_mode: false,
            ..base
        };
        let frozen = sys.run_transient(&init, &frozen_cfg, &forcing).unwrap();
        assert!(frozen.diags.iter().all(|d| d.picard_iters == 1));
        assert!(!frozen.any_flagged());
        // the coefficient freeze is an O(dt) perturbation of the step
        let mut d = frozen.final_state().u.clone();
        d.axpy(-1.0, &lagged.final_state().u);
        let dist = sys.ops().norm_l2(&d);
        let scale = sys.ops().norm_l2(&lagged.final_state().u);
        assert!(dist <= 0.05 * scale, "modes diverged: {dist:.3e} vs {scale:.3e}");
        // nonnegative channels survive without Picard iteration
        for e in &frozen.ledger {
            assert!(e.grad >= 0.0 && e.forch >= 0.0 && e.friction >= 0.0);
        }
    }

    #[test]
    fn rejects_inadmissible_step_input() {
        let sys = system(6, 0.0);
        let cfg = StepConfig::default();
        // violates the Gamma Dirichlet condition
        let mut bad = State::zeros(sys.ops().grid());
        bad.u.u[sys.ops().grid().uidx(0, 1)] = 1.0;
        assert!(sys.step(&bad, &cfg, &ForcingSpec::Zero).is_err());
        // admissible faces but not divergence-free: the march refuses
        let mut unprojected = State::zeros(sys.ops().grid());
        unprojected.u = crate::field::FaceField::from_fn(sys.ops().grid(), |x, _| x, |_, _| 0.0);
        unprojected.u.enforce_essential(sys.ops().grid());
        let cfg_run = StepConfig {
            dt: 1e-3,
            t_end: 2e-3,
            ..cfg
        };
        assert!(sys
            .run_transient(&unprojected, &cfg_run, &ForcingSpec::Zero)
            .is_err());
    }

    #[test]
    fn rejects_t_end_shorter_than_dt() {
        let sys = system(4, 0.0);
        let cfg = StepConfig {
            dt: 0.1,
            t_end: 0.01,
            ..StepConfig::default()
        };
        let s0 = State::zeros(sys.ops().grid());
        assert!(sys.run_transient(&s0, &cfg, &ForcingSpec::Zero).is_err());
    }
}
