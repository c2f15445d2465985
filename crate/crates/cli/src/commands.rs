//! The five subcommands. Each takes a fully merged [`RunConfig`].

use std::path::{Path, PathBuf};

use log::{info, warn};
use ratetip::frozen::{equilibrium_eigenvalues, locate_hopf};
use ratetip::integrate::{solve, Control, Observation};
use ratetip::poincare::Section;
use ratetip::tracking::{critical_rates_from_scan, rate_grid, scan_final_crossings, sign_changes, ScanRow, ScanSample};
use ratetip::upo::find_period_one_orbit;
use ratetip::{
    CriticalRate, Error, GapMode, NonautonomousSpec, PeriodicOrbit, PullbackRunConfig, ScanStatus, UpoConfig,
};
use serde_json::{json, Map, Value};

use crate::config::{GapModeChoice, RunConfig};
use crate::error::CliError;
use crate::output::{emit, fmt15, json_text, opt_field, CsvWriter};

pub const SCAN_HEADER: &str = "r,eta,n_crossings,t_last,status";
pub const TRAJECTORY_HEADER: &str = "t,x,y,z";
pub const CROSSINGS_HEADER: &str = "n,t,x,z";

pub fn frozen(cfg: &RunConfig, hopf: Option<(f64, f64)>) -> Result<(), CliError> {
    let p = cfg.frozen_params(cfg.shift.lambda_minus);
    p.validate()?;
    let eq = p.equilibria()?;
    let residual = |s: [f64; 3]| p.vector_field(&s).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let ev = equilibrium_eigenvalues(&p)?;
    let mut out = json!({
        "params": {"a": p.a, "b": p.b, "c": p.c},
        "equilibria": {
            "inner": eq.inner.to_array(),
            "outer": eq.outer.map(|s| s.to_array()),
        },
        "residual": {
            "inner": residual(eq.inner.to_array()),
            "outer": eq.outer.map(|s| residual(s.to_array())),
        },
        "eigenvalues": ev.iter().map(|z| json!({"re": z.re, "im": z.im})).collect::<Vec<_>>(),
        "stable": ev.iter().all(|z| z.re < 0.0),
    });
    if let Some(range) = hopf {
        out["a_hb"] = json!(locate_hopf(p.b, p.c, range)?);
        out["hopf_range"] = json!([range.0, range.1]);
    }
    emit(None, &json_text(out))?;
    Ok(())
}

pub fn upo_find(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.frozen_params(cfg.shift.lambda_plus);
    p.validate()?;
    let orbit = find_period_one_orbit(&p, &upo_config(cfg))?;
    let mut out = orbit_json(&orbit);
    out["params"] = json!({"a": p.a, "b": p.b, "c": p.c});
    out["residual"] = json!(orbit.residual);
    out["det"] = json!(orbit.det);
    out["iterations"] = json!(orbit.iterations);
    out["saddle"] = json!(orbit.is_saddle());
    emit(None, &json_text(out))?;
    Ok(())
}

pub struct SimulateOptions {
    pub rate: f64,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub out_dir: PathBuf,
}

pub fn simulate(cfg: &RunConfig, opts: &SimulateOptions) -> Result<(), CliError> {
    let spec = cfg.spec(opts.rate);
    spec.validate()?;
    let run = cfg.pullback_run(&spec)?;
    let t_end = opts.t_end.unwrap_or(run.horizon);
    if !(t_end > run.t_start) {
        return Err(CliError::Config(format!("t_end = {t_end} must exceed t_start = {}", run.t_start)));
    }
    if let Some(dt) = opts.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CliError::Config(format!("dt must be positive (got {dt})")));
        }
    }
    std::fs::create_dir_all(&opts.out_dir)?;
    let traj_path = opts.out_dir.join("trajectory.csv");
    let cross_path = opts.out_dir.join("crossings.csv");
    let mut traj = CsvWriter::create(&traj_path, TRAJECTORY_HEADER)?;
    let mut cross = CsvWriter::create(&cross_path, CROSSINGS_HEADER)?;

    let x0 = run.z_init.to_array();
    let state_row = |t: f64, s: &[f64; 3]| vec![fmt15(t), fmt15(s[0]), fmt15(s[1]), fmt15(s[2])];
    traj.row(&state_row(run.t_start, &x0))?;

    let section = Section::default();
    let event = section.event();
    let mut io_error = None;
    let mut t_reached = run.t_start;
    let mut crossings: Vec<(f64, [f64; 3])> = Vec::new();
    let mut k = 1u64;
    let result = solve(&spec, run.t_start, t_end, x0, &run.integ, Some(&event), |obs| {
        let written = match obs {
            Observation::Step(step) => {
                t_reached = step.t1();
                match opts.dt {
                    Some(dt) => {
                        let mut res = Ok(());
                        while res.is_ok() {
                            let t = run.t_start + k as f64 * dt;
                            if t > step.t1() {
                                break;
                            }
                            res = traj.row(&state_row(t, &step.eval(t)));
                            k += 1;
                        }
                        res
                    }
                    None => traj.row(&state_row(step.t1(), &step.y1)),
                }
            }
            Observation::Event(hit) => {
                crossings.push((hit.t, hit.state));
                cross.row(&[crossings.len().to_string(), fmt15(hit.t), fmt15(hit.state[0]), fmt15(hit.state[2])])
            }
        };
        match written {
            Ok(()) => Control::Continue,
            Err(e) => {
                io_error = Some(e);
                Control::Stop
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e.into());
    }
    traj.finish()?;
    cross.finish()?;

    let (status, message) = match result {
        Ok(_) => ("ok", None),
        Err(e) if is_breakdown(&e) => {
            warn!("r = {}: {e}", opts.rate);
            ("blowup", Some(e.to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    let n_to_horizon = crossings.iter().filter(|(t, _)| *t <= run.horizon).count();
    let last = crossings[..n_to_horizon].last();
    let out = json!({
        "status": status,
        "message": message,
        "r": opts.rate,
        "t_start": run.t_start,
        "T": run.horizon,
        "t_end": t_end,
        "t_reached": t_reached,
        "z_init": run.z_init.to_array(),
        "z_init_source": cfg.run.z_init.source(),
        "n_crossings": crossings.len(),
        "n_crossings_to_T": n_to_horizon,
        "final_crossing": last.map(|(t, s)| json!({"n": n_to_horizon, "t": t, "x": s[0], "z": s[2]})),
        "files": {"trajectory": traj_path, "crossings": cross_path},
    });
    emit(None, &json_text(out))?;
    Ok(())
}

pub struct ScanOptions {
    pub out: Option<PathBuf>,
    pub meta: Option<PathBuf>,
}

pub fn eta_scan(cfg: &RunConfig, opts: &ScanOptions) -> Result<(), CliError> {
    let mode = match cfg.gap_mode.modes().as_slice() {
        [m] => *m,
        _ => return Err(CliError::Config("eta-scan writes one η column; choose a single gap_mode".into())),
    };
    let scan = cfg.rate.scan;
    rate_grid(scan.r_min, scan.r_max, scan.samples)?;
    let (spec, run, orbit) = tracking_setup(cfg)?;
    let samples = scan_final_crossings(&spec, &run, scan.r_min, scan.r_max, scan.samples)?;
    let rows = with_gaps(&samples, &orbit, mode);

    let mut csv = CsvWriter::new(Vec::new(), SCAN_HEADER)?;
    for (s, g) in &rows {
        csv.row(&[
            fmt15(s.r),
            opt_field(g.map(|g| g.eta)),
            match (s.status, s.crossing) {
                (_, Some(c)) => c.n_crossings.to_string(),
                (ScanStatus::NoCrossing, None) => "0".into(),
                _ => String::new(),
            },
            opt_field(s.crossing.map(|c| c.t_last)),
            s.status.name().into(),
        ])?;
    }
    let text = String::from_utf8(csv.finish()?).expect("CSV is ASCII");
    emit(opts.out.as_deref(), &text)?;

    let etas: Vec<Option<f64>> = rows.iter().map(|(_, g)| g.map(|g| g.eta)).collect();
    let changes = sign_changes(&etas);
    info!("{} rows, {changes} sign changes of η", rows.len());
    if let Some(path) = &opts.meta {
        let mut meta = metadata(cfg, &run, &orbit, mode.name());
        meta["sign_changes"] = json!(changes);
        emit(Some(path), &json_text(json!({ "metadata": meta })))?;
    }
    Ok(())
}

pub fn critical_rates(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let scan = cfg.rate.scan;
    rate_grid(scan.r_min, scan.r_max, scan.samples)?;
    let (spec, run, orbit) = tracking_setup(cfg)?;
    let samples = scan_final_crossings(&spec, &run, scan.r_min, scan.r_max, scan.samples)?;

    let mut per_mode = Map::new();
    let mut changes = Map::new();
    for mode in cfg.gap_mode.modes() {
        let rows = with_gaps(&samples, &orbit, mode);
        let etas: Vec<Option<f64>> = rows.iter().map(|(_, g)| g.map(|g| g.eta)).collect();
        changes.insert(mode.name().into(), json!(sign_changes(&etas)));
        let roots = critical_rates_from_scan(&spec, &run, &orbit, &rows, mode, &cfg.refine, &cfg.confirm)?;
        info!("{}: {} roots, {} confirmed", mode.name(), roots.len(), roots.iter().filter(|r| r.confirmed).count());
        per_mode.insert(mode.name().into(), Value::Array(roots.iter().map(root_json).collect()));
    }
    let roots = match cfg.gap_mode {
        GapModeChoice::Both => Value::Object(per_mode),
        single => per_mode.remove(single.name()).unwrap_or_else(|| json!([])),
    };
    let mut meta = metadata(cfg, &run, &orbit, cfg.gap_mode.name());
    meta["sign_changes"] = Value::Object(changes);
    emit(out, &json_text(json!({ "metadata": meta, "roots": roots })))?;
    Ok(())
}

fn upo_config(cfg: &RunConfig) -> UpoConfig {
    UpoConfig { integ: cfg.integrate, ..UpoConfig::default() }
}

fn tracking_setup(cfg: &RunConfig) -> Result<(NonautonomousSpec, PullbackRunConfig, PeriodicOrbit), CliError> {
    if cfg.system.a.is_some() {
        warn!("system.a is ignored by tracking commands; the shift sets a");
    }
    let spec = cfg.spec(cfg.rate.scan.r_min);
    spec.validate()?;
    let run = cfg.pullback_run(&spec)?;
    let orbit = find_period_one_orbit(&spec.future_params(), &upo_config(cfg))?;
    info!("γ = ({}, {}), λ_u = {}", orbit.gamma.u, orbit.gamma.v, orbit.lambda_u);
    Ok((spec, run, orbit))
}

fn with_gaps(samples: &[ScanSample<f64>], orbit: &PeriodicOrbit, mode: GapMode) -> Vec<ScanRow<f64>> {
    samples.iter().map(|s| (*s, s.gap(orbit, mode))).collect()
}

/// Integration breakdowns that a single run reports as `blowup`.
fn is_breakdown(e: &Error) -> bool {
    matches!(
        e,
        Error::Blowup { .. }
            | Error::NonFiniteState { .. }
            | Error::StepSizeUnderflow { .. }
            | Error::StepBudgetExceeded { .. }
    )
}

fn orbit_json(orbit: &PeriodicOrbit) -> Value {
    json!({
        "gamma": [orbit.gamma.u, orbit.gamma.v],
        "period": orbit.period,
        "lambda_s": orbit.lambda_s,
        "lambda_u": orbit.lambda_u,
        "v_s": orbit.v_s,
        "v_u": orbit.v_u,
    })
}

fn root_json(root: &CriticalRate) -> Value {
    json!({
        "r_c": root.r_c,
        "eta_at_root": root.eta_at_root,
        "n_crossings": root.n_crossings,
        "confirmed": root.confirmed,
        "shadow_periods": root.shadow_periods,
    })
}

fn metadata(cfg: &RunConfig, run: &PullbackRunConfig, orbit: &PeriodicOrbit, mode: &str) -> Value {
    let scan = cfg.rate.scan;
    json!({
        "params": {"b": cfg.system.b, "c": cfg.system.c},
        "shift": cfg.shift,
        "T": run.horizon,
        "t_start": run.t_start,
        "z_init": run.z_init.to_array(),
        "z_init_source": cfg.run.z_init.source(),
        "mode": mode,
        "tolerances": {
            "rtol": cfg.integrate.rtol,
            "atol": cfg.integrate.atol,
            "h_max": cfg.integrate.h_max,
            "max_steps": cfg.integrate.max_steps,
            "tol_r": cfg.refine.tol_r,
            "tol_eta": cfg.refine.tol_eta,
            "max_iter": cfg.refine.max_iter,
        },
        "scan": {"r_min": scan.r_min, "r_max": scan.r_max, "samples": scan.samples},
        "confirm": {
            "shadow_periods": cfg.confirm.shadow_periods,
            "tube_eps": cfg.confirm.tube_eps,
            "max_returns": cfg.confirm.max_returns,
        },
        "orbit": orbit_json(orbit),
    })
}
