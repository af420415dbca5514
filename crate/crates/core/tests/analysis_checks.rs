//! End-to-end certification checks on real runs: energy ledger audit
//! with a corruption negative control, the u' bound and its dt
//! tightening, Gronwall stability for perturbed data, coefficient
//! continuity, the eps-convergence study and the slip trichotomy.

use brinkfric_core::analysis::{
    check_energy_ledger, check_uprime_bound, energy_ledger_violations, eps_convergence_study,
    structural_stability, Varied,
};
use brinkfric_core::friction::SlipClass;
use brinkfric_core::grid::{BoundaryPartition, Grid2D};
use brinkfric_core::params::PhysicalParams;
use brinkfric_core::presets::{make_initial, ForcingSpec, InitSpec};
use brinkfric_core::steady::{solve_steady, SteadyConfig};
use brinkfric_core::transient::{StepConfig, System, Trajectory};
use brinkfric_core::State;

fn system(n: usize, g0: f64, eps: f64) -> System {
    let g = Grid2D::build(n, n, 1.0, 1.0).unwrap();
    let part = BoundaryPartition::constant_g(&g, g0).unwrap();
    let params = PhysicalParams::new(0.1, 1.0, 1.0, 2.0, eps).unwrap();
    System::new(&g, &part, params).unwrap()
}

fn shear_run(sys: &System, dt: f64, t_end: f64) -> Trajectory {
    let cfg = StepConfig {
        dt,
        t_end,
        ..StepConfig::default()
    };
    let init = make_initial(&InitSpec::ShearProfile { amplitude: 1.0 }, sys.ops());
    sys.run_transient(&init, &cfg, &ForcingSpec::SineY { amplitude: 0.5 })
        .unwrap()
}

#[test]
fn energy_ledger_passes_on_forced_and_dissipative_runs() {
    let sys = system(12, 0.5, 1e-3);
    let traj = shear_run(&sys, 2e-3, 0.04);
    let report = check_energy_ledger(&sys, &traj);
    assert!(report.all_pass(), "failed: {:?}", report.failed_names());

    let cfg = StepConfig {
        dt: 2e-3,
        t_end: 0.04,
        ..StepConfig::default()
    };
    let init = make_initial(&InitSpec::TaylorVortex { amplitude: 1.0 }, sys.ops());
    let decay = sys.run_transient(&init, &cfg, &ForcingSpec::Zero).unwrap();
    let report = check_energy_ledger(&sys, &decay);
    assert!(report.all_pass(), "failed: {:?}", report.failed_names());
    // dissipative run: per-step inequality strict at every step
    assert!(decay.ledger.iter().all(|e| e.slack > 0.0));
}

#[test]
fn zero_trajectory_ledger_is_identically_zero() {
    let sys = system(8, 0.5, 1e-3);
    let cfg = StepConfig {
        dt: 1e-2,
        t_end: 0.1,
        ..StepConfig::default()
    };
    let traj = sys
        .run_transient(&State::zeros(sys.ops().grid()), &cfg, &ForcingSpec::Zero)
        .unwrap();
    for e in &traj.ledger {
        assert_eq!(e.kinetic, 0.0);
        assert_eq!(e.slack, 0.0);
        assert_eq!(e.source, 0.0);
    }
    assert!(check_energy_ledger(&sys, &traj).all_pass());
}

#[test]
fn corrupting_one_state_flags_exactly_that_step() {
    let sys = system(10, 0.4, 1e-3);
    let mut traj = shear_run(&sys, 2e-3, 0.03);
    assert!(energy_ledger_violations(&sys, &traj).is_empty());
    let k = 7;
    traj.states[k].u.scale(2.0);
    let viols = energy_ledger_violations(&sys, &traj);
    assert_eq!(viols, vec![k], "violations {viols:?}");
    assert!(!check_energy_ledger(&sys, &traj).all_pass());
}

#[test]
fn uprime_bound_zero_run_has_matching_offsets() {
    // u0 = 0, f = 0: both sides reduce to the same eps-dependent
    // friction offset 2 J_eps(0)
    let sys = system(8, 0.7, 1e-2);
    let cfg = StepConfig {
        dt: 1e-2,
        t_end: 0.05,
        ..StepConfig::default()
    };
    let traj = sys
        .run_transient(&State::zeros(sys.ops().grid()), &cfg, &ForcingSpec::Zero)
        .unwrap();
    let report = check_uprime_bound(&sys, &traj);
    assert!(report.all_pass());
    let slack = report.checks[0].measured;
    assert!(slack.abs() < 1e-14, "slack {slack}");
}

#[test]
fn uprime_bound_strict_on_dissipative_shear_and_tightens_with_dt() {
    let sys = system(12, 0.5, 1e-3);
    let slack_for = |dt: f64| {
        let cfg = StepConfig {
            dt,
            t_end: 0.08,
            ..StepConfig::default()
        };
        let init = make_initial(&InitSpec::ShearProfile { amplitude: 1.0 }, sys.ops());
        let traj = sys.run_transient(&init, &cfg, &ForcingSpec::Zero).unwrap();
        let report = check_uprime_bound(&sys, &traj);
        assert!(report.all_pass());
        report.checks[0].measured
    };
    let s_coarse = slack_for(8e-3);
    let s_fine = slack_for(4e-3);
    assert!(s_coarse > 0.0 && s_fine > 0.0);
    // backward Euler over-dissipates; the gap shrinks as dt drops
    assert!(s_fine < s_coarse, "slack {s_fine} !< {s_coarse}");
}

#[test]
fn gronwall_certificate_for_perturbed_initial_velocity() {
    let sys = system(12, 0.3, 1e-3);
    let cfg = StepConfig {
        dt: 2e-3,
        t_end: 0.06,
        picard_tol: 1e-12,
        uzawa_tol: 1e-12,
        uzawa_max: 2000,
        ..StepConfig::default()
    };
    let forcing = ForcingSpec::SineY { amplitude: 0.5 };
    let init1 = make_initial(&InitSpec::ShearProfile { amplitude: 1.0 }, sys.ops());
    let lam = sys.ops().compute_lambda_min(1e-9, 200).unwrap();
    let mut u2 = init1.u.clone();
    u2.axpy(1e-3, &lam.mode);
    let init2 = State {
        u: u2,
        p: brinkfric_core::CellField::zeros(sys.ops().grid()),
        t: 0.0,
    };
    let r1 = sys.run_transient(&init1, &cfg, &forcing).unwrap();
    let r2 = sys.run_transient(&init2, &cfg, &forcing).unwrap();
    let report = structural_stability(sys.ops(), &[&r1, &r2], Varied::U0).unwrap();
    assert!(report.all_pass(), "{:?}", report.checks);

    // identical runs: the difference is identically zero
    let report = structural_stability(sys.ops(), &[&r1, &r1], Varied::U0).unwrap();
    assert!(report.all_pass());
}

#[test]
fn gronwall_certificate_for_perturbed_forcing() {
    let sys = system(12, 0.3, 1e-3);
    let cfg = StepConfig {
        dt: 2e-3,
        t_end: 0.06,
        picard_tol: 1e-12,
        uzawa_tol: 1e-12,
        uzawa_max: 2000,
        ..StepConfig::default()
    };
    let init = make_initial(&InitSpec::ShearProfile { amplitude: 1.0 }, sys.ops());
    let r1 = sys
        .run_transient(&init, &cfg, &ForcingSpec::SineY { amplitude: 0.5 })
        .unwrap();
    let r2 = sys
        .run_transient(&init, &cfg, &ForcingSpec::SineY { amplitude: 0.501 })
        .unwrap();
    let report = structural_stability(sys.ops(), &[&r1, &r2], Varied::F).unwrap();
    assert!(report.all_pass(), "{:?}", report.checks);
}

#[test]
fn mismatched_runs_are_rejected() {
    let sys = system(8, 0.3, 1e-3);
    let sys_other = system(8, 0.3, 1e-2);
    let cfg = StepConfig {
        dt: 2e-3,
        t_end: 0.02,
        ..StepConfig::default()
    };
    let init = make_initial(&InitSpec::ShearProfile { amplitude: 1.0 }, sys.ops());
    let f = ForcingSpec::Constant { fx: 0.5, fy: 0.0 };
    let r1 = sys.run_transient(&init, &cfg, &f).unwrap();
    let r2 = sys_other.run_transient(&init, &cfg, &f).unwrap();
    assert!(structural_stability(sys.ops(), &[&r1, &r2], Varied::U0).is_err());
}

#[test]
fn coefficient_continuity_is_first_order_in_b_and_nu() {
    let base = PhysicalParams::new(0.1, 1.0, 1.0, 2.0, 1e-3).unwrap();
    let g = Grid2D::build(12, 12, 1.0, 1.0).unwrap();
    let part = BoundaryPartition::constant_g(&g, 0.3).unwrap();
    let cfg = StepConfig {
        dt: 2e-3,
        t_end: 0.06,
        picard_tol: 1e-12,
        uzawa_tol: 1e-12,
        uzawa_max: 2000,
        ..StepConfig::default()
    };
    let forcing = ForcingSpec::SineY { amplitude: 0.5 };
    let run = |p: PhysicalParams| {
        let sys = System::new(&g, &part, p).unwrap();
        let init = make_initial(&InitSpec::ShearProfile { amplitude: 1.0 }, sys.ops());
        sys.run_transient(&init, &cfg, &forcing).unwrap()
    };
    let ops_sys = System::new(&g, &part, base).unwrap();

    let r1 = run(base);
    let rb2 = run(PhysicalParams::new(0.1, 1.0, 1.0 * 1.01, 2.0, 1e-3).unwrap());
    let rb3 = run(PhysicalParams::new(0.1, 1.0, 1.0 * 1.02, 2.0, 1e-3).unwrap());
    let report = structural_stability(ops_sys.ops(), &[&r1, &rb2, &rb3], Varied::B).unwrap();
    assert!(report.all_pass(), "{:?}", report.checks);

    let rn2 = run(PhysicalParams::new(0.1 * 1.01, 1.0, 1.0, 2.0, 1e-3).unwrap());
    let rn3 = run(PhysicalParams::new(0.1 * 1.02, 1.0, 1.0, 2.0, 1e-3).unwrap());
    let report = structural_stability(ops_sys.ops(), &[&r1, &rn2, &rn3], Varied::Nu).unwrap();
    assert!(report.all_pass(), "{:?}", report.checks);
}

#[test]
fn eps_study_certifies_gap_contraction_and_pressure() {
    let sys = system(12, 0.5, 1e-1);
    let cfg = StepConfig {
        dt: 2e-3,
        t_end: 0.06,
        ..StepConfig::default()
    };
    let init = make_initial(&InitSpec::ShearProfile { amplitude: 1.0 }, sys.ops());
    let forcing = ForcingSpec::SineY { amplitude: 1.0 };
    let report =
        eps_convergence_study(&sys, &init, &forcing, &cfg, &[1e-1, 1e-2, 1e-3]).unwrap();
    assert!(report.all_pass(), "{:?}", report.checks);
}

#[test]
fn eps_has_no_effect_when_frictionless() {
    let g = Grid2D::build(10, 10, 1.0, 1.0).unwrap();
    let part = BoundaryPartition::constant_g(&g, 0.0).unwrap();
    let cfg = StepConfig {
        dt: 2e-3,
        t_end: 0.02,
        ..StepConfig::default()
    };
    let forcing = ForcingSpec::Constant { fx: 0.5, fy: 0.2 };
    let mut finals = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3] {
        let params = PhysicalParams::new(0.1, 1.0, 1.0, 2.0, eps).unwrap();
        let sys = System::new(&g, &part, params).unwrap();
        let init = make_initial(&InitSpec::ShearProfile { amplitude: 1.0 }, sys.ops());
        let traj = sys.run_transient(&init, &cfg, &forcing).unwrap();
        finals.push((traj.final_state().u.clone(), sys));
    }
    for k in 1..finals.len() {
        let (u, sys) = (&finals[k].0, &finals[0].1);
        let mut d = u.clone();
        d.axpy(-1.0, &finals[0].0);
        assert!(
            sys.ops().norm_l2(&d) <= 1e-12,
            "eps changed a frictionless run by {}",
            sys.ops().norm_l2(&d)
        );
    }
}

#[test]
fn decay_fit_requires_a_sufficient_window() {
    // a three-step run cannot drop by e^2; the fit must refuse
    let sys = system(8, 0.3, 1e-3);
    let cfg = StepConfig {
        dt: 1e-3,
        t_end: 8e-3,
        ..StepConfig::default()
    };
    let init = make_initial(&InitSpec::ShearProfile { amplitude: 1.0 }, sys.ops());
    let traj = sys.run_transient(&init, &cfg, &ForcingSpec::Zero).unwrap();
    let steady = State::zeros(sys.ops().grid());
    assert!(matches!(
        brinkfric_core::analysis::fit_decay_rate(sys.ops(), &traj, &steady),
        Err(brinkfric_core::Error::InsufficientDecayWindow { .. })
    ));
}

#[test]
fn slip_trichotomy_on_slipping_steady_state() {
    // small barrier: the wall slips; the multiplier respects the bound
    // and the regularized direction law wherever the slip is resolved
    let sys = system(12, 0.05, 1e-4);
    let forcing = ForcingSpec::SineY { amplitude: 1.0 };
    let res = solve_steady(&sys, &forcing, &SteadyConfig::default(), None).unwrap();
    assert!(res.converged);
    let tau = sys.ops().trace_tangential(&res.state.u);
    let eps = sys.params().eps;
    let lam = sys.friction().eval_k_eps(&tau, eps).unwrap();
    let rep = sys.friction().slip_residual(&tau, &lam).unwrap();
    assert!(rep.within_bound());
    let mut resolved_slips = 0;
    for f in &rep.faces {
        if f.u_tau.abs() >= 100.0 * eps {
            assert_eq!(f.class, SlipClass::Slip);
            assert!(f.lambda.abs() <= f.g * (1.0 + 1e-12));
            assert!(f.dir_residual <= 1e-6, "dir residual {}", f.dir_residual);
            assert!(f.sign_violation == 0.0);
            resolved_slips += 1;
        }
    }
    assert!(resolved_slips > 0, "no face actually slipped");
}
