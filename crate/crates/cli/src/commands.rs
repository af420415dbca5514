//! Subcommand implementations: run, steady, verify, sweep.
//!
//! Exit-code contract: 0 clean, 1 I/O or usage failure (reported via
//! Err), 2 solver flags or failed certification checks.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use brinkfric_core::friction::SlipClass;
use brinkfric_core::grid::{BoundaryPartition, Grid2D};
use brinkfric_core::presets::make_initial;
use brinkfric_core::steady::{solve_steady, SteadyConfig};
use brinkfric_core::transient::{System, Trajectory};
use brinkfric_core::State;

use crate::config::{CliError, FrictionCfg, RunConfig};
use crate::csvout::{fmt_float, write_csv, Table};
use crate::suite;
use crate::svg::{emit_svg, PlotOptions, Series};

pub fn build_system(cfg: &RunConfig) -> Result<(System, State), CliError> {
    let grid = Grid2D::build(cfg.grid.nx, cfg.grid.ny, cfg.grid.lx, cfg.grid.ly)?;
    let part = match cfg.friction {
        FrictionCfg::Constant(g) => BoundaryPartition::constant_g(&grid, g)?,
        FrictionCfg::PerWall { bottom, top } => BoundaryPartition::per_wall_g(&grid, bottom, top)?,
    };
    let system = System::new(&grid, &part, cfg.params)?;
    let init = make_initial(&cfg.init, system.ops());
    Ok((system, init))
}

fn trajectory_tables(system: &System, traj: &Trajectory, precision: usize) -> (Table, Table) {
    let ops = system.ops();
    let alpha = system.params().alpha;
    let mut t_traj = Table::new(&[
        "t",
        "l2_u",
        "h1_u",
        "lp_u_alpha2",
        "l2_p",
        "max_div",
        "picard_iters",
        "uzawa_iters",
    ]);
    let f = |x: f64| fmt_float(x, precision);
    for (k, s) in traj.states.iter().enumerate() {
        let l2 = ops.norm_l2(&s.u);
        let h1 = (l2 * l2 + ops.grad_norm_sq(&s.u)).sqrt();
        let lp = ops
            .norm_lp(&s.u, alpha + 2.0)
            .expect("alpha+2 is a valid exponent");
        let (picard, uzawa, max_div) = if k == 0 {
            (0usize, 0usize, ops.divergence(&s.u).linf())
        } else {
            let d = &traj.diags[k - 1];
            (d.picard_iters, d.uzawa_iters, d.max_div)
        };
        t_traj.push_row(vec![
            f(s.t),
            f(l2),
            f(h1),
            f(lp),
            f(ops.norm_l2_cells(&s.p)),
            f(max_div),
            picard.to_string(),
            uzawa.to_string(),
        ]);
    }
    let mut t_ledger = Table::new(&[
        "t", "ddt_kinetic", "grad", "darcy", "forch", "friction", "source", "slack",
    ]);
    for e in &traj.ledger {
        t_ledger.push_row(vec![
            f(e.t),
            f(e.ddt_kinetic),
            f(e.grad),
            f(e.darcy),
            f(e.forch),
            f(e.friction),
            f(e.source),
            f(e.slack),
        ]);
    }
    (t_traj, t_ledger)
}

fn energy_plot(traj: &Trajectory, out: &Path) -> Result<(), CliError> {
    type Sel = fn(&brinkfric_core::analysis::LedgerEntry) -> f64;
    let selectors: [(&str, Sel); 5] = [
        ("kinetic", |e| e.kinetic),
        ("grad", |e| e.grad),
        ("darcy", |e| e.darcy),
        ("forch", |e| e.forch),
        ("friction", |e| e.friction),
    ];
    let series: Vec<Series> = selectors
        .into_iter()
        .map(|(name, sel)| Series {
            name: name.to_string(),
            points: traj.ledger.iter().map(|e| (e.t, sel(e))).collect(),
        })
        .collect();
    let positive = series
        .iter()
        .all(|s| s.points.iter().all(|&(_, y)| y > 0.0));
    emit_svg(
        &series,
        &PlotOptions {
            title: "energy ledger".into(),
            x_label: "t".into(),
            y_label: "energy terms".into(),
            log_y: positive,
        },
        out,
    )
}

/// `run <config>`: march the transient problem, write trajectory.csv,
/// ledger.csv and optionally energy.svg.
pub fn cmd_run(cfg: &RunConfig) -> Result<i32, CliError> {
    let (system, init) = build_system(cfg)?;
    let traj = system.run_transient(&init, &cfg.stepping, &cfg.forcing)?;
    let out = PathBuf::from(&cfg.output.dir);
    let (t_traj, t_ledger) = trajectory_tables(&system, &traj, cfg.output.csv_precision);
    write_csv(&t_traj, &out.join("trajectory.csv"))?;
    write_csv(&t_ledger, &out.join("ledger.csv"))?;
    if cfg.output.emit_svg {
        energy_plot(&traj, &out.join("energy.svg"))?;
    }
    Ok(if traj.any_flagged() { 2 } else { 0 })
}

/// `steady <config>`: solve the stationary problem, write the summary
/// and the per-face slip classification.
pub fn cmd_steady(cfg: &RunConfig) -> Result<i32, CliError> {
    let (system, _) = build_system(cfg)?;
    let scfg = SteadyConfig {
        picard_tol: cfg.stepping.picard_tol,
        picard_max: cfg.stepping.picard_max.max(100),
        uzawa_tol: cfg.stepping.uzawa_tol,
        uzawa_max: cfg.stepping.uzawa_max,
    };
    let res = solve_steady(&system, &cfg.forcing, &scfg, None)?;
    let ops = system.ops();
    let prec = cfg.output.csv_precision;
    let f = |x: f64| fmt_float(x, prec);
    let out = PathBuf::from(&cfg.output.dir);

    let mut summary = Table::new(&[
        "converged",
        "picard_iters",
        "picard_resid",
        "l2_u",
        "h1_u",
        "l2_p",
        "max_div",
    ]);
    let l2 = ops.norm_l2(&res.state.u);
    summary.push_row(vec![
        res.converged.to_string(),
        res.picard_iters.to_string(),
        f(res.picard_resid),
        f(l2),
        f((l2 * l2 + ops.grad_norm_sq(&res.state.u)).sqrt()),
        f(ops.norm_l2_cells(&res.state.p)),
        f(ops.divergence(&res.state.u).linf()),
    ]);
    write_csv(&summary, &out.join("steady.csv"))?;

    let tau = ops.trace_tangential(&res.state.u);
    let lam = system.friction().eval_k_eps(&tau, system.params().eps)?;
    let rep = system.friction().slip_residual(&tau, &lam)?;
    let mut slip = Table::new(&[
        "face",
        "wall",
        "ix",
        "weight",
        "g",
        "u_tau",
        "lambda",
        "class",
        "dir_residual",
        "bound_excess",
    ]);
    for (k, (face, sf)) in rep
        .faces
        .iter()
        .zip(ops.partition().s_faces())
        .enumerate()
    {
        slip.push_row(vec![
            k.to_string(),
            format!("{:?}", sf.wall).to_lowercase(),
            sf.ix.to_string(),
            f(sf.weight),
            f(face.g),
            f(face.u_tau),
            f(face.lambda),
            match face.class {
                SlipClass::Stick => "stick".to_string(),
                SlipClass::Slip => "slip".to_string(),
            },
            f(face.dir_residual),
            f(face.bound_excess),
        ]);
    }
    write_csv(&slip, &out.join("slip.csv"))?;
    Ok(if res.converged { 0 } else { 2 })
}

/// `verify <config>`: run the certification suite, write
/// cert_report.csv, print one line per criterion, exit 0 iff all pass.
pub fn cmd_verify(cfg: &RunConfig) -> Result<i32, CliError> {
    let report = suite::run_verify(cfg)?;
    let out = PathBuf::from(&cfg.output.dir);
    let prec = cfg.output.csv_precision;
    let mut table = Table::new(&[
        "check",
        "status",
        "measured",
        "tolerance",
        "inputs_hash",
        "details",
    ]);
    for c in &report.checks {
        table.push_row(vec![
            c.name.clone(),
            c.status.as_str().to_string(),
            fmt_float(c.measured, prec),
            fmt_float(c.tolerance, prec),
            report.inputs_hash.clone(),
            c.details.clone(),
        ]);
    }
    write_csv(&table, &out.join("cert_report.csv"))?;

    for (num, label, ok, skipped) in suite::criterion_outcomes(&report) {
        let tag = if let Some(reason) = skipped {
            format!("SKIP ({reason})")
        } else if ok {
            "PASS".to_string()
        } else {
            "FAIL".to_string()
        };
        println!("criterion {num:>2} {label}: {tag}");
    }
    let failed = report.failed_names();
    if !failed.is_empty() {
        eprintln!("failed checks: {}", failed.join(", "));
        return Ok(2);
    }
    Ok(0)
}

/// Apply a dotted-key override (e.g. `params.eps`) to a config clone.
pub fn apply_override(cfg: &RunConfig, key: &str, value: &str) -> Result<RunConfig, CliError> {
    let mut c = cfg.clone();
    let parse = |v: &str| -> Result<f64, CliError> {
        v.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("`{key}` expects a number, got `{v}`")))
    };
    match key {
        "params.nu" | "params.a" | "params.b" | "params.alpha" | "params.eps" => {
            let v = parse(value)?;
            let p = c.params;
            c.params = match key {
                "params.nu" => brinkfric_core::PhysicalParams::new(v, p.a, p.b, p.alpha, p.eps)?,
                "params.a" => brinkfric_core::PhysicalParams::new(p.nu, v, p.b, p.alpha, p.eps)?,
                "params.b" => brinkfric_core::PhysicalParams::new(p.nu, p.a, v, p.alpha, p.eps)?,
                "params.alpha" => brinkfric_core::PhysicalParams::new(p.nu, p.a, p.b, v, p.eps)?,
                _ => brinkfric_core::PhysicalParams::new(p.nu, p.a, p.b, p.alpha, v)?,
            };
        }
        "friction.g" => c.friction = FrictionCfg::Constant(parse(value)?),
        "stepping.dt" => c.stepping.dt = parse(value)?,
        "stepping.t_end" => c.stepping.t_end = parse(value)?,
        "forcing.amplitude" => {
            use brinkfric_core::presets::ForcingSpec as F;
            c.forcing = match c.forcing {
                F::DecayingX { .. } => F::DecayingX { amplitude: parse(value)? },
                F::SineY { .. } => F::SineY { amplitude: parse(value)? },
                other => {
                    return Err(CliError::Usage(format!(
                        "forcing preset {:?} has no amplitude",
                        other.tag()
                    )))
                }
            };
        }
        "init.amplitude" => {
            use brinkfric_core::presets::InitSpec as I;
            c.init = match c.init {
                I::TaylorVortex { .. } => I::TaylorVortex { amplitude: parse(value)? },
                I::ShearProfile { .. } => I::ShearProfile { amplitude: parse(value)? },
                I::Zero => {
                    return Err(CliError::Usage("init preset zero has no amplitude".into()))
                }
            };
        }
        other => {
            return Err(CliError::Usage(format!(
                "unsupported sweep key `{other}`"
            )))
        }
    }
    c.stepping.validate()?;
    Ok(c)
}

/// `sweep <config> --vary key=v1,v2,...`: run each variant in its own
/// run-indexed subdirectory; concurrency capped by BRINKFRIC_THREADS.
pub fn cmd_sweep(cfg: &RunConfig, key: &str, values: &[String]) -> Result<i32, CliError> {
    if values.is_empty() {
        return Err(CliError::Usage("--vary needs at least one value".into()));
    }
    let mut variants = Vec::with_capacity(values.len());
    for (k, v) in values.iter().enumerate() {
        let mut c = apply_override(cfg, key, v)?;
        c.output.dir = format!("{}/run_{k:03}", cfg.output.dir);
        variants.push(c);
    }
    let cap = std::env::var("BRINKFRIC_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .min(variants.len());

    let next = AtomicUsize::new(0);
    let results: Vec<std::sync::Mutex<Option<Result<i32, CliError>>>> =
        variants.iter().map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..cap {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= variants.len() {
                    break;
                }
                let r = cmd_run(&variants[k]);
                *results[k].lock().expect("result slot") = Some(r);
            });
        }
    });

    let mut index = Table::new(&["run", "key", "value", "dir", "exit"]);
    let mut worst = 0i32;
    for (k, slot) in results.iter().enumerate() {
        let r = slot
            .lock()
            .expect("result slot")
            .take()
            .expect("worker filled slot");
        let code = r?;
        worst = worst.max(code);
        index.push_row(vec![
            k.to_string(),
            key.to_string(),
            values[k].clone(),
            variants[k].output.dir.clone(),
            code.to_string(),
        ]);
    }
    write_csv(&index, &PathBuf::from(&cfg.output.dir).join("sweep_index.csv"))?;
    Ok(worst)
}
