//! Certified checks: the per-step energy ledger, the time-derivative
//! bound, exponential decay to the stationary solution, structural
//! stability in the data and coefficients, and the eps-convergence
//! study. Checks recompute everything from the stored states, so a
//! corrupted trajectory cannot pass on stale ledger arithmetic.

use crate::error::{Error, Result};
use crate::ops::DiscreteOps;
use crate::presets::eval_forcing;
use crate::transient::{StepConfig, System, Trajectory};
use crate::State;

/// One step's energy accounting (all terms of the step inequality).
#[derive(Debug, Clone, Copy)]
pub struct LedgerEntry {
    pub t: f64,
    /// ||u||^2 at the end of the step
    pub kinetic: f64,
    /// (||u^{n+1}||^2 - ||u^n||^2) / dt
    pub ddt_kinetic: f64,
    /// 2 nu ||grad u||^2
    pub grad: f64,
    /// a ||u||^2
    pub darcy: f64,
    /// 2 b (N-pairing)
    pub forch: f64,
    /// 2 <K_eps u, u>
    pub friction: f64,
    /// ||f||^2 / a
    pub source: f64,
    /// source minus the left-hand side; nonnegative when the step
    /// inequality holds
    pub slack: f64,
    pub grad_sq: f64,
    pub uprime_sq: f64,
    pub f_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped(String),
}

impl CheckStatus {
    pub fn as_str(&self) -> &str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped(_) => "skipped",
        }
    }
}

/// A named inequality with its measured slack and tolerance.
#[derive(Debug, Clone)]
pub struct CertCheck {
    pub name: String,
    pub status: CheckStatus,
    pub measured: f64,
    pub tolerance: f64,
    pub details: String,
}

/// Pass/fail record of a check battery; every row carries the inputs
/// fingerprint of the run it certified.
#[derive(Debug, Clone)]
pub struct CertReport {
    pub inputs_hash: String,
    pub checks: Vec<CertCheck>,
}

impl CertReport {
    pub fn new(inputs_hash: impl Into<String>) -> Self {
        Self {
            inputs_hash: inputs_hash.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        name: &str,
        pass: bool,
        measured: f64,
        tolerance: f64,
        details: impl Into<String>,
    ) {
        self.checks.push(CertCheck {
            name: name.to_string(),
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            measured,
            tolerance,
            details: details.into(),
        });
    }

    pub fn push_skipped(&mut self, name: &str, reason: &str) {
        self.checks.push(CertCheck {
            name: name.to_string(),
            status: CheckStatus::Skipped(reason.to_string()),
            measured: 0.0,
            tolerance: 0.0,
            details: reason.to_string(),
        });
    }

    pub fn merge(&mut self, other: CertReport) {
        self.checks.extend(other.checks);
    }

    /// All checks pass (skipped degenerate checks count as passing).
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failed_names(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// FNV-1a fingerprint of a canonical input description.
pub fn inputs_hash(desc: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in desc.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Canonical descriptor of a run for fingerprinting.
pub fn run_descriptor(traj: &Trajectory) -> String {
    let p = traj.params;
    let c = traj.config;
    format!(
        "grid={}x{}:{}x{};nu={};a={};b={};alpha={};eps={};dt={};t_end={};forcing={:?};steps={}",
        traj.grid.nx,
        traj.grid.ny,
        traj.grid.lx,
        traj.grid.ly,
        p.nu,
        p.a,
        p.b,
        p.alpha,
        p.eps,
        c.dt,
        c.t_end,
        traj.forcing,
        traj.states.len() - 1
    )
}

/// Recompute one step's ledger terms from the stored states with the
/// exact (non-lagged) nonlinear pairings.
fn recompute_entry(system: &System, traj: &Trajectory, k: usize) -> LedgerEntry {
    let ops = system.ops();
    let p = system.params();
    let dt = traj.config.dt;
    let old = &traj.states[k - 1];
    let new = &traj.states[k];
    let f_full = eval_forcing(&traj.forcing, ops, new.t).expect("preset validated at run time");
    let k_new = ops.inner(&new.u, &new.u);
    let k_old = ops.inner(&old.u, &old.u);
    let grad_sq = ops.grad_norm_sq(&new.u);
    let f_sq = ops.inner(&f_full, &f_full);
    let mut du = new.u.clone();
    du.axpy(-1.0, &old.u);
    du.scale(1.0 / dt);
    let uprime_sq = ops.inner(&du, &du);
    let forch_pairing = system.nonlinear().energy(ops, &new.u);
    let tau = ops.trace_tangential(&new.u);
    let lam = system
        .friction()
        .eval_k_eps(&tau, p.eps)
        .expect("trace matches assembly");
    let fric_pairing = system
        .friction()
        .pairing(&lam, &tau)
        .expect("trace matches assembly");
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

/// Steps whose recomputed energy inequality is violated beyond the
/// solver allowance (1-based step indices).
pub fn energy_ledger_violations(system: &System, traj: &Trajectory) -> Vec<usize> {
    let mut out = Vec::new();
    for k in 1..traj.states.len() {
        let e = recompute_entry(system, traj, k);
        let scale = entry_scale(&e);
        let allowance =
            1e-8 * scale + 10.0 * traj.config.picard_tol * (1.0 + e.kinetic.sqrt());
        if e.slack < -allowance {
            out.push(k);
        }
    }
    out
}

fn entry_scale(e: &LedgerEntry) -> f64 {
    [
        1.0,
        e.ddt_kinetic.abs(),
        e.grad,
        e.darcy,
        e.forch,
        e.friction,
        e.source,
    ]
    .into_iter()
    .fold(0.0f64, f64::max)
}

/// Audit the per-step inequality, the cumulative bound and the state
/// admissibility (divergence and pressure mean) for a whole run.
pub fn check_energy_ledger(system: &System, traj: &Trajectory) -> CertReport {
    let ops = system.ops();
    let p = system.params();
    let dt = traj.config.dt;
    let mut report = CertReport::new(inputs_hash(&run_descriptor(traj)));
    if traj.states.len() < 2 {
        report.push_skipped("per_step_energy", "trajectory has fewer than 2 states");
        return report;
    }

    let mut worst_norm_slack = f64::INFINITY;
    let mut worst_step = 0usize;
    let mut violations = Vec::new();
    let mut lhs_cum = 0.0;
    let mut rhs_cum = 0.0;
    let mut slack_cum = 0.0;
    let mut worst_cum_excess = f64::NEG_INFINITY;
    let k0 = ops.inner(&traj.states[0].u, &traj.states[0].u);
    for k in 1..traj.states.len() {
        let e = recompute_entry(system, traj, k);
        let scale = entry_scale(&e);
        let allowance = 1e-8 * scale + 10.0 * traj.config.picard_tol * (1.0 + e.kinetic.sqrt());
        if e.slack < -allowance {
            violations.push(k);
        }
        let norm_slack = e.slack / scale;
        if norm_slack < worst_norm_slack {
            worst_norm_slack = norm_slack;
            worst_step = k;
        }
        // cumulative bound tracking
        lhs_cum += dt * (e.grad + e.darcy);
        rhs_cum += dt * e.f_sq / p.a;
        slack_cum += dt * (-e.slack).max(0.0) + dt * allowance;
        let lhs = e.kinetic + lhs_cum;
        let rhs = k0 + rhs_cum + slack_cum;
        let excess = (lhs - rhs) / rhs.max(1.0);
        if excess > worst_cum_excess {
            worst_cum_excess = excess;
        }
    }
    report.push(
        "per_step_energy",
        violations.is_empty(),
        worst_norm_slack,
        -1e-8,
        if violations.is_empty() {
            format!("worst normalized slack {worst_norm_slack:.3e} at step {worst_step}")
        } else {
            format!("violated at steps {violations:?}")
        },
    );
    report.push(
        "cumulative_energy",
        worst_cum_excess <= 1e-8,
        worst_cum_excess,
        1e-8,
        format!("worst normalized excess {worst_cum_excess:.3e}"),
    );

    let mut worst_div = 0.0f64;
    let mut worst_mean = 0.0f64;
    for s in &traj.states {
        worst_div = worst_div.max(ops.divergence(&s.u).linf());
        worst_mean = worst_mean.max(s.p.mean().abs());
    }
    report.push(
        "divergence_freedom",
        worst_div <= traj.config.uzawa_tol * (1.0 + 1e-9),
        worst_div,
        traj.config.uzawa_tol,
        format!("max |div u| over run {worst_div:.3e}"),
    );
    report.push(
        "pressure_zero_mean",
        worst_mean <= 1e-12,
        worst_mean,
        1e-12,
        format!("max |mean p| over run {worst_mean:.3e}"),
    );
    report
}

/// The integrated time-derivative bound: dt sum ||u'||^2 plus the final
/// energy must stay below the integrated source plus Phi(0).
pub fn check_uprime_bound(system: &System, traj: &Trajectory) -> CertReport {
    let ops = system.ops();
    let p = system.params();
    let dt = traj.config.dt;
    let mut report = CertReport::new(inputs_hash(&run_descriptor(traj)));
    if traj.states.len() < 2 {
        report.push_skipped("uprime_bound", "trajectory has fewer than 2 states");
        return report;
    }
    let phi = |s: &State| -> f64 {
        let tau = ops.trace_tangential(&s.u);
        let jeps = system
            .friction()
            .eval_j_eps(&tau, p.eps)
            .expect("trace matches assembly");
        p.nu * ops.grad_norm_sq(&s.u)
            + p.a * ops.inner(&s.u, &s.u)
            + 2.0 * p.b / (p.alpha + 2.0) * system.nonlinear().energy(ops, &s.u)
            + 2.0 * jeps
    };
    let mut uprime_sum = 0.0;
    let mut f_sum = 0.0;
    for k in 1..traj.states.len() {
        let e = recompute_entry(system, traj, k);
        uprime_sum += dt * e.uprime_sq;
        f_sum += dt * e.f_sq;
    }
    let lhs = uprime_sum + phi(traj.final_state());
    let phi0 = phi(&traj.states[0]);
    let rhs = f_sum + phi0;
    let slack = rhs - lhs;
    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    report.push(
        "uprime_bound",
        slack >= -1e-8 * scale,
        slack,
        1e-8 * scale,
        format!("lhs {lhs:.6e} <= rhs {rhs:.6e} (Phi(0) = {phi0:.6e})"),
    );
    report
}

/// Least-squares decay-rate fit of log ||u(t) - steady||^2.
#[derive(Debug, Clone)]
pub struct DecayFit {
    pub rate: f64,
    pub residual: f64,
    pub points: usize,
    /// Set when the fit was skipped (trajectory already at the fixed
    /// point).
    pub skipped: Option<String>,
}

pub fn fit_decay_rate(ops: &DiscreteOps, traj: &Trajectory, steady: &State) -> Result<DecayFit> {
    let dists: Vec<(f64, f64)> = traj
        .states
        .iter()
        .map(|s| {
            let mut d = s.u.clone();
            d.axpy(-1.0, &steady.u);
            (s.t, ops.norm_l2(&d))
        })
        .collect();
    let d0 = dists[0].1;
    let steady_scale = ops.norm_l2(&steady.u);
    if d0 <= 1e-10 * (1.0 + steady_scale) {
        return Ok(DecayFit {
            rate: 0.0,
            residual: 0.0,
            points: 0,
            skipped: Some("initial state already at the stationary solution".into()),
        });
    }
    let floor = 1e3 * f64::EPSILON * d0;
    let window: Vec<(f64, f64)> = dists
        .iter()
        .skip(5)
        .filter(|(_, d)| *d > floor)
        .map(|&(t, d)| (t, (d * d).ln()))
        .collect();
    if window.len() < 2 {
        return Err(Error::InsufficientDecayWindow { drop: 1.0 });
    }
    let dmax = window.iter().map(|&(_, y)| y).fold(f64::NEG_INFINITY, f64::max);
    let dmin = window.iter().map(|&(_, y)| y).fold(f64::INFINITY, f64::min);
    // drop in the squared norm by e^4 equals a drop in the norm by e^2
    let drop = ((dmax - dmin) / 2.0).exp();
    if drop < (2.0f64).exp() {
        return Err(Error::InsufficientDecayWindow { drop });
    }
    let n = window.len() as f64;
    let tm = window.iter().map(|&(t, _)| t).sum::<f64>() / n;
    let ym = window.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let sxy = window
        .iter()
        .map(|&(t, y)| (t - tm) * (y - ym))
        .sum::<f64>();
    let sxx = window.iter().map(|&(t, _)| (t - tm) * (t - tm)).sum::<f64>();
    let slope = sxy / sxx;
    let residual = (window
        .iter()
        .map(|&(t, y)| {
            let fit = ym + slope * (t - tm);
            (y - fit) * (y - fit)
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        rate: -slope,
        residual,
        points: window.len(),
        skipped: None,
    })
}

/// Which input a paired-run experiment varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Varied {
    U0,
    F,
    B,
    Nu,
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::RunMismatch(msg.to_string()))
    }
}

/// Certify continuous dependence. For U0/F pairs the discrete Gronwall
/// bound with the Young-derived constant C = a is asserted at every
/// step; for B/Nu triples a three-run Richardson fit certifies
/// first-order coefficient dependence.
pub fn structural_stability(
    ops: &DiscreteOps,
    runs: &[&Trajectory],
    which: Varied,
) -> Result<CertReport> {
    match which {
        Varied::U0 | Varied::F => gronwall_bound(ops, runs, which),
        Varied::B | Varied::Nu => coefficient_continuity(ops, runs, which),
    }
}

fn gronwall_bound(ops: &DiscreteOps, runs: &[&Trajectory], which: Varied) -> Result<CertReport> {
    require(runs.len() == 2, "U0/F stability takes exactly two runs")?;
    let (r1, r2) = (runs[0], runs[1]);
    require(r1.grid == r2.grid, "grids differ")?;
    require(r1.config.dt == r2.config.dt, "time steps differ")?;
    require(r1.params == r2.params, "physical parameters differ")?;
    require(r1.states.len() == r2.states.len(), "step counts differ")?;
    match which {
        Varied::U0 => require(r1.forcing == r2.forcing, "U0 variation requires equal forcing")?,
        Varied::F => {}
        _ => unreachable!(),
    }
    let dt = r1.config.dt;
    let a = r1.params.a;
    let n_states = r1.states.len();
    let decay = 1.0 / (1.0 + dt * a);

    let mut w0 = r1.states[0].u.clone();
    w0.axpy(-1.0, &r2.states[0].u);
    let w0_sq = ops.inner(&w0, &w0);

    let mut delta_f_sq = vec![0.0; n_states];
    if which == Varied::F {
        for (k, df) in delta_f_sq.iter_mut().enumerate().skip(1) {
            let t = r1.states[k].t;
            let mut f1 = eval_forcing(&r1.forcing, ops, t)?;
            let f2 = eval_forcing(&r2.forcing, ops, t)?;
            f1.axpy(-1.0, &f2);
            *df = ops.inner(&f1, &f1);
        }
    }

    let mut worst_slack = f64::INFINITY;
    let mut worst_step = 0usize;
    let mut scale: f64 = w0_sq.max(1e-300);
    let mut forced = 0.0;
    for n in 1..n_states {
        // bound_n = decay^n w0^2 + (dt/a) sum_k decay^{n-k} |df_k|^2
        forced = forced * decay + (dt / a) * delta_f_sq[n];
        let bound = decay.powi(n as i32) * w0_sq + forced;
        let mut w = r1.states[n].u.clone();
        w.axpy(-1.0, &r2.states[n].u);
        let w_sq = ops.inner(&w, &w);
        let slack = bound - w_sq;
        scale = scale.max(bound);
        if slack < worst_slack {
            worst_slack = slack;
            worst_step = n;
        }
    }
    let mut report = CertReport::new(inputs_hash(&format!(
        "{}|{}",
        run_descriptor(r1),
        run_descriptor(r2)
    )));
    let name = match which {
        Varied::U0 => "gronwall_u0",
        _ => "gronwall_f",
    };
    report.push(
        name,
        worst_slack >= -1e-10 * scale,
        worst_slack / scale,
        1e-10,
        format!(
            "worst slack {worst_slack:.3e} at step {worst_step} (scale {scale:.3e}, C = a = {a})"
        ),
    );
    Ok(report)
}

fn coefficient_continuity(
    ops: &DiscreteOps,
    runs: &[&Trajectory],
    which: Varied,
) -> Result<CertReport> {
    require(runs.len() == 3, "coefficient continuity takes three runs")?;
    let (r1, r2, r3) = (runs[0], runs[1], runs[2]);
    for r in [r2, r3] {
        require(r1.grid == r.grid, "grids differ")?;
        require(r1.config.dt == r.config.dt, "time steps differ")?;
        require(r1.forcing == r.forcing, "forcings differ")?;
        require(r1.states.len() == r.states.len(), "step counts differ")?;
    }
    let pick = |t: &Trajectory| match which {
        Varied::B => t.params.b,
        Varied::Nu => t.params.nu,
        _ => unreachable!(),
    };
    let same_rest = |x: &Trajectory, y: &Trajectory| match which {
        Varied::B => {
            x.params.nu == y.params.nu
                && x.params.a == y.params.a
                && x.params.alpha == y.params.alpha
                && x.params.eps == y.params.eps
        }
        Varied::Nu => {
            x.params.b == y.params.b
                && x.params.a == y.params.a
                && x.params.alpha == y.params.alpha
                && x.params.eps == y.params.eps
        }
        _ => unreachable!(),
    };
    require(same_rest(r1, r2) && same_rest(r1, r3), "runs vary more than one coefficient")?;
    let (p1, p2, p3) = (pick(r1), pick(r2), pick(r3));
    let d1 = (p2 - p1).abs();
    let d2 = (p3 - p1).abs();
    require(d1 > 0.0, "second run does not perturb the coefficient")?;
    require(
        (d2 / d1 - 2.0).abs() < 1e-9,
        "third run must double the perturbation",
    )?;
    let dist = |x: &Trajectory, y: &Trajectory| {
        let mut d = x.final_state().u.clone();
        d.axpy(-1.0, &y.final_state().u);
        ops.norm_l2(&d)
    };
    let e1 = dist(r1, r2);
    let e2 = dist(r1, r3);
    let mut report = CertReport::new(inputs_hash(&format!(
        "{}|{}|{}",
        run_descriptor(r1),
        run_descriptor(r2),
        run_descriptor(r3)
    )));
    let name = match which {
        Varied::B => "coefficient_order_b",
        _ => "coefficient_order_nu",
    };
    if e1 <= 1e-14 || e2 <= 1e-14 {
        report.push_skipped(name, "perturbed runs coincide; nothing to fit");
        return Ok(report);
    }
    let order = (e2 / e1).log2();
    let lipschitz = e1 / d1;
    report.push(
        name,
        (0.9..=1.1).contains(&order),
        order,
        0.1,
        format!("order {order:.4}, L = {lipschitz:.6e}, |d1| = {e1:.3e}, |d2| = {e2:.3e}"),
    );
    Ok(report)
}

/// Run the transient problem across an eps schedule and certify the
/// regularization-gap, Cauchy-contraction and pressure-boundedness
/// statements. Member runs execute concurrently.
pub fn eps_convergence_study(
    base: &System,
    init: &State,
    forcing: &crate::presets::ForcingSpec,
    cfg: &StepConfig,
    schedule: &[f64],
) -> Result<CertReport> {
    require(schedule.len() >= 2, "eps schedule needs at least two values")?;
    require(
        schedule.windows(2).all(|w| w[1] < w[0]),
        "eps schedule must decrease",
    )?;
    let grid = *base.ops().grid();
    let part = base.ops().partition().clone();
    let params = *base.params();

    let mut results: Vec<Option<Result<(Trajectory, System)>>> =
        (0..schedule.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for &eps in schedule {
            let part = &part;
            let grid = &grid;
            handles.push(scope.spawn(move || -> Result<(Trajectory, System)> {
                let p = params.with_eps(eps)?;
                let sys = System::new(grid, part, p)?;
                let traj = sys.run_transient(init, cfg, forcing)?;
                Ok((traj, sys))
            }));
        }
        for (slot, h) in results.iter_mut().zip(handles) {
            *slot = Some(h.join().expect("study worker panicked"));
        }
    });
    let mut runs = Vec::with_capacity(schedule.len());
    for r in results {
        runs.push(r.expect("slot filled")?);
    }

    let ops = base.ops();
    let mut report = CertReport::new(inputs_hash(&format!(
        "eps-study:{:?}|{}",
        schedule,
        run_descriptor(&runs[0].0)
    )));

    // (i) regularization gap of the computed solutions
    let mut worst_gap_low = f64::INFINITY;
    let mut worst_gap_frac = f64::NEG_INFINITY;
    for ((traj, sys), &eps) in runs.iter().zip(schedule) {
        let tau = ops.trace_tangential(&traj.final_state().u);
        let j = sys.friction().eval_j(&tau)?;
        let jeps = sys.friction().eval_j_eps(&tau, eps)?;
        let gap = jeps - j;
        let bound = eps * sys.friction().weighted_g_sum();
        worst_gap_low = worst_gap_low.min(gap);
        if bound > 0.0 {
            worst_gap_frac = worst_gap_frac.max(gap / bound);
        }
    }
    let gap_ok = worst_gap_low >= -1e-13 && (worst_gap_frac <= 1.0 + 1e-10);
    report.push(
        "jeps_gap",
        gap_ok,
        worst_gap_frac.max(0.0),
        1.0,
        format!("gap within [0, eps * sum w g]; min {worst_gap_low:.3e}, max fraction {worst_gap_frac:.3e}"),
    );

    // (ii) Cauchy contraction of successive solutions at T
    let mut diffs = Vec::new();
    for w in runs.windows(2) {
        let mut d = w[0].0.final_state().u.clone();
        d.axpy(-1.0, &w[1].0.final_state().u);
        diffs.push(ops.norm_l2(&d));
    }
    let u_scale = ops.norm_l2(&runs[0].0.final_state().u).max(1e-300);
    let mut cauchy_ok = true;
    for w in diffs.windows(2) {
        if w[1] > w[0] + 1e-12 * u_scale {
            cauchy_ok = false;
        }
    }
    report.push(
        "eps_cauchy_contraction",
        cauchy_ok,
        diffs.last().copied().unwrap_or(0.0),
        diffs.first().copied().unwrap_or(0.0),
        format!("successive differences {diffs:?}"),
    );

    // (iii) pressure time-sums stay bounded along the schedule
    let psums: Vec<f64> = runs.iter().map(|(t, _)| t.pressure_time_sum(ops)).collect();
    let pmax = psums.iter().fold(0.0f64, |m, &x| m.max(x));
    let floor = 1e-14 * pmax.max(1.0);
    let mut worst_ratio = 0.0f64;
    for w in psums.windows(2) {
        worst_ratio = worst_ratio.max((w[1] + floor) / (w[0] + floor));
    }
    report.push(
        "pressure_time_sum_bounded",
        worst_ratio <= 2.0,
        worst_ratio,
        2.0,
        format!("dt * sum ||p||^2 along schedule: {psums:?}"),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_input_sensitive() {
        let a = inputs_hash("config-a");
        assert_eq!(a, inputs_hash("config-a"));
        assert_ne!(a, inputs_hash("config-b"));
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn report_pass_fail_logic() {
        let mut r = CertReport::new("deadbeef");
        r.push("x", true, 0.0, 1.0, "ok");
        assert!(r.all_pass());
        r.push_skipped("y", "degenerate: frictionless");
        assert!(r.all_pass());
        r.push("z", false, 2.0, 1.0, "bad");
        assert!(!r.all_pass());
        assert_eq!(r.failed_names(), vec!["z"]);
    }
}
