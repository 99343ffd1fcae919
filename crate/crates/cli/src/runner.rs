//! Scenario execution: single trajectories, η sweeps, steady states, the
//! parameter table and the invariant checks.

use std::f64::consts::TAU;

use dqrm_core::bessel::jacobi_anger_truncation_error;
use dqrm_core::dynamics::{
    evolve, evolve_unitary, steady_state, EvolveOptions, Hamiltonian, LindbladProblem, Trajectory,
};
use dqrm_core::envelope::{envelope_extract, EnvelopeOptions};
use dqrm_core::hilbert::{expectation, number, on_field, on_qubit, quadrature_x, qubit_pauli, qubit_projector};
use dqrm_core::models::{
    build_interaction_picture, build_lab_frame, build_rabi, build_rotated_frame, QubitFrame, RabiModelSpec,
};
use dqrm_core::params::{critical_coupling, derive_effective, parameter_sweep, solve_constraint};
use dqrm_core::tomography::PhotonDistribution;
use dqrm_core::{DensityMatrix, FockBasis, Operator, Pauli, Qubit, StateVector};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{InitialState, Model, ParamBlock, ScenarioConfig};
use crate::error::{CliError, Context, Result};
use crate::output::Table;

/// η/(2π) in MHz for labels and tables, rounded to 1e-12 MHz so grid
/// values print as written.
pub fn eta_mhz(eta: f64) -> f64 {
    (eta / TAU * 1e12).round() / 1e12
}

pub fn observable_is_known(name: &str, n_max: usize) -> bool {
    match name {
        "p_e" | "p_g" | "n" | "sx" | "sy" | "sz" | "x" => true,
        _ => name.strip_prefix('p').and_then(|k| k.parse::<usize>().ok()).is_some_and(|k| k <= n_max),
    }
}

fn observable(name: &str, basis: FockBasis) -> Operator {
    match name {
        "p_e" => on_qubit(basis, &qubit_projector(Qubit::Excited)),
        "p_g" => on_qubit(basis, &qubit_projector(Qubit::Ground)),
        "n" => on_field(&number(basis)),
        "sx" => on_qubit(basis, &qubit_pauli(Pauli::X)),
        "sy" => on_qubit(basis, &qubit_pauli(Pauli::Y)),
        "sz" => on_qubit(basis, &qubit_pauli(Pauli::Z)),
        "x" => on_field(&quadrature_x(basis)),
        _ => {
            let k: usize = name[1..].parse().expect("validated observable");
            on_field(&Operator::projector(basis.dim(), k, k))
        }
    }
}

fn initial_density(state: &InitialState, basis: FockBasis) -> Result<DensityMatrix> {
    let psi = match state {
        InitialState::Ground => StateVector::basis(basis, Qubit::Ground, 0),
        InitialState::Excited => StateVector::basis(basis, Qubit::Excited, 0),
        InitialState::PlusVacuum => Ok(StateVector::plus_vacuum(basis)),
        InitialState::Custom(v) => StateVector::normalized(v.clone()),
    }
    .context(|| "scenario.initial_vector".into())?;
    Ok(psi.to_density())
}

/// Hamiltonian, κ and the effective η for one point.
fn hamiltonian(cfg: &ScenarioConfig, eta: Option<f64>, basis: FockBasis) -> Result<(Hamiltonian, f64, f64)> {
    let ctx = || format!("building the {} Hamiltonian", cfg.model.name());
    match (cfg.model, &cfg.params) {
        (Model::Rabi | Model::RabiUnitary, params) => {
            let (omega, delta, eta) = params.rabi_parameters(eta)?;
            let spec = RabiModelSpec { omega, delta, eta, n_max: cfg.n_max };
            let h = build_rabi(&spec, basis, QubitFrame::Literal).context(ctx)?;
            let kappa = if cfg.model == Model::RabiUnitary { 0.0 } else { params.kappa() };
            Ok((h.into(), kappa, eta))
        }
        (model, ParamBlock::Device(t)) => {
            let dev = t.resolve(eta)?;
            let eff = derive_effective(&dev).context(ctx)?;
            let h = match model {
                Model::LabFrame => build_lab_frame(&dev, basis),
                Model::Interaction => build_interaction_picture(&dev, basis),
                _ => build_rotated_frame(&dev, basis),
            }
            .context(ctx)?;
            Ok((h.into(), dev.kappa, eff.eta))
        }
        (model, ParamBlock::Effective(_)) => {
            Err(CliError::config("scenario.model", format!("{} needs a [device] section", model.name())))
        }
    }
}

/// `0, dt, 2dt, …, t_final` plus any extra times, sorted.
fn sample_grid(t_final: f64, dt: f64, extra: &[f64]) -> Vec<f64> {
    let n = (t_final / dt * (1.0 + 1e-12)).floor() as usize;
    let mut t: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    t.push(t_final);
    t.extend_from_slice(extra);
    t.sort_by(f64::total_cmp);
    t.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * dt);
    t.retain(|&x| x <= t_final * (1.0 + 1e-12));
    t
}

/// One evolved trajectory of a scenario.
#[derive(Debug, Clone)]
pub struct Run {
    /// Effective coupling in rad/μs.
    pub eta: f64,
    pub kappa: f64,
    pub trajectory: Trajectory,
}

pub fn run_point(cfg: &ScenarioConfig, eta: Option<f64>, times: Vec<f64>, opts: &EvolveOptions) -> Result<Run> {
    let basis = FockBasis::new(cfg.n_max).context(|| "scenario.n_max".into())?;
    let (h, kappa, eta_eff) = hamiltonian(cfg, eta, basis)?;
    let ctx = || format!("scenario {} at eta/2pi = {:.6} MHz", cfg.name, eta_mhz(eta_eff));
    let mut problem = LindbladProblem::new(h, kappa, basis, initial_density(&cfg.initial_state, basis)?, cfg.t_final)
        .context(ctx)?
        .with_sample_times(times)
        .context(ctx)?;
    for name in &cfg.observables {
        problem = problem.observe(name.clone(), observable(name, basis)).context(ctx)?;
    }
    let trajectory =
        if cfg.model == Model::RabiUnitary { evolve_unitary(&problem, opts) } else { evolve(&problem, opts) }
            .context(ctx)?;
    Ok(Run { eta: eta_eff, kappa, trajectory })
}

fn pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool")
}

/// Output of `simulate`.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub table: Table,
    pub runs: Vec<Run>,
    pub meta: Value,
}

pub fn simulate(cfg: &ScenarioConfig, jobs: usize) -> Result<Simulation> {
    let warnings = preflight(cfg)?;
    let opts = EvolveOptions::default();
    let times = sample_grid(cfg.t_final, cfg.sample_dt, &[]);
    let points = cfg.eta_points();
    let runs: Vec<Run> = pool(jobs).install(|| {
        points.par_iter().map(|&eta| run_point(cfg, eta, times.clone(), &opts)).collect::<Result<Vec<_>>>()
    })?;

    let mut table = Table::new();
    table.push("t", "us", times.clone());
    for run in &runs {
        for (label, values) in run.trajectory.labels.iter().zip(&run.trajectory.values) {
            let name = if cfg.sweep.is_some() { format!("{label}_eta{}", eta_mhz(run.eta)) } else { label.clone() };
            table.push(name, "1", values.clone());
        }
    }
    let mut extra = json!({});
    if cfg.envelopes {
        extra = add_envelopes(cfg, &runs[0], &mut table, &opts)?;
    }
    let meta = metadata(cfg, "simulate", &runs, &warnings, extra);
    Ok(Simulation { table, runs, meta })
}

/// Envelopes of the fast `P_e` oscillation and the effective-model
/// populations from `|e,0⟩` and `|g,0⟩` they should follow.
fn add_envelopes(cfg: &ScenarioConfig, run: &Run, table: &mut Table, opts: &EvolveOptions) -> Result<Value> {
    let eff = cfg.params.effective(None)?.expect("envelopes need a device block");
    let ParamBlock::Device(t) = &cfg.params else { unreachable!() };
    let dev = t.resolve(None)?;
    let fast_period = TAU / eff.k.abs();
    let env_opts = EnvelopeOptions { fast_period, ripple_period: Some(TAU / dev.nu1), phase_origin: 0.0 };
    let times = &run.trajectory.times;
    let p_e = run
        .trajectory
        .series("p_e")
        .map_err(|_| CliError::config("scenario.observables", "envelopes need the p_e observable"))?;
    let env = envelope_extract(times, p_e, &env_opts).context(|| "extracting envelopes".into())?;

    let basis = FockBasis::new(cfg.n_max).context(|| "scenario.n_max".into())?;
    let spec = RabiModelSpec::from_effective(&eff, cfg.n_max);
    let h = build_rabi(&spec, basis, QubitFrame::Literal).context(|| "effective reference model".into())?;
    let reference = |q: Qubit| -> Result<Vec<f64>> {
        let init = StateVector::basis(basis, q, 0).context(|| "reference state".into())?.to_density();
        let problem = LindbladProblem::new(h.clone(), dev.kappa, basis, init, cfg.t_final)
            .and_then(|p| p.with_sample_times(times.clone()))
            .and_then(|p| p.observe("p_e", observable("p_e", basis)))
            .context(|| "effective reference model".into())?;
        Ok(evolve(&problem, opts).context(|| "effective reference model".into())?.values[0].clone())
    };
    table.push("envelope_upper", "1", env.upper);
    table.push("envelope_lower", "1", env.lower);
    table.push("qrm_p_e_from_e", "1", reference(Qubit::Excited)?);
    table.push("qrm_p_e_from_g", "1", reference(Qubit::Ground)?);
    Ok(json!({
        "envelope": {
            "fast_period_us": fast_period,
            "ripple_period_us": TAU / dev.nu1,
            "upper_points": env.upper_points.len(),
            "lower_points": env.lower_points.len(),
        }
    }))
}

/// Least-squares slope of `y(t)` over `[t0, t1]`.
pub fn slope(times: &[f64], y: &[f64], (t0, t1): (f64, f64)) -> f64 {
    let tol = 1e-9 * t1.abs().max(1.0);
    let pts: Vec<(f64, f64)> =
        times.iter().zip(y).filter(|(t, _)| **t >= t0 - tol && **t <= t1 + tol).map(|(t, v)| (*t, *v)).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub eta: f64,
    pub n_probe: f64,
    pub slope: f64,
    pub n_steady: f64,
    pub steady_residual: f64,
    pub truncation_tail: f64,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub points: Vec<SweepPoint>,
    pub table: Table,
    pub meta: Value,
}

fn sweep_point(cfg: &ScenarioConfig, eta: f64, opts: &EvolveOptions) -> Result<SweepPoint> {
    let s = cfg.sweep.as_ref().expect("sweep section");
    let times = sample_grid(cfg.t_final, cfg.sample_dt, &[s.t_probe, s.slope_window.0, s.slope_window.1]);
    let mut point_cfg = cfg.clone();
    point_cfg.observables = vec!["n".into()];
    let run = run_point(&point_cfg, Some(eta), times, opts)?;
    let tr = &run.trajectory;
    let n = tr.series("n").expect("observed");
    let probe = tr.times.iter().position(|&t| (t - s.t_probe).abs() <= 1e-9 * cfg.sample_dt).expect("probe sampled");
    let (n_steady, steady_residual) = if run.kappa > 0.0 {
        let basis = FockBasis::new(cfg.n_max).context(|| "scenario.n_max".into())?;
        let (h, _, _) = hamiltonian(cfg, Some(eta), basis)?;
        let Hamiltonian::Static(h) = h else { unreachable!("Rabi models are static") };
        let ss =
            steady_state(&h, run.kappa, basis).context(|| format!("steady state at eta/2pi = {} MHz", eta_mhz(eta)))?;
        (expectation(&ss.state, &observable("n", basis)).context(|| "steady-state photon number".into())?, ss.residual)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(SweepPoint {
        eta: run.eta,
        n_probe: n[probe],
        slope: slope(&tr.times, n, s.slope_window),
        n_steady,
        steady_residual,
        truncation_tail: tr.truncation_tail,
        status: "ok".into(),
    })
}

/// Photon number at the probe time, late-time slope and steady state for
/// every η of the grid. A failing point is recorded and the sweep goes on.
pub fn run_sweep(cfg: &ScenarioConfig, jobs: usize) -> Result<Sweep> {
    let s = cfg.sweep.as_ref().ok_or_else(|| CliError::config("sweep", "section is missing"))?;
    if !cfg.model.is_rabi() {
        return Err(CliError::config("scenario.model", "sweeps need rabi or rabi_unitary"));
    }
    let warnings = preflight(cfg)?;
    let opts = EvolveOptions::default();
    let points: Vec<SweepPoint> = pool(jobs).install(|| {
        s.eta_grid
            .par_iter()
            .map(|&eta| {
                sweep_point(cfg, eta, &opts).unwrap_or_else(|e| {
                    log::warn!("sweep point eta/2pi = {} MHz failed: {e}", eta_mhz(eta));
                    SweepPoint {
                        eta,
                        n_probe: f64::NAN,
                        slope: f64::NAN,
                        n_steady: f64::NAN,
                        steady_residual: f64::NAN,
                        truncation_tail: f64::NAN,
                        status: e.to_string(),
                    }
                })
            })
            .collect()
    });
    let mut nondecreasing = Vec::with_capacity(points.len());
    let mut ok = true;
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            ok &= p.n_probe >= points[i - 1].n_probe;
        }
        nondecreasing.push(if ok { 1.0 } else { 0.0 });
    }
    let col = |f: fn(&SweepPoint) -> f64| points.iter().map(f).collect::<Vec<f64>>();
    let mut table = Table::new();
    table
        .push("eta", "MHz_over_2pi", col(|p| eta_mhz(p.eta)))
        .push("n_at_probe", "1", col(|p| p.n_probe))
        .push("slope", "per_us", col(|p| p.slope))
        .push("n_steady", "1", col(|p| p.n_steady))
        .push("steady_residual", "1", col(|p| p.steady_residual))
        .push("truncation_tail", "1", col(|p| p.truncation_tail))
        .push("n_nondecreasing", "bool", nondecreasing)
        .push_text("status", points.iter().map(|p| p.status.clone()).collect());
    let meta = metadata(
        cfg,
        "sweep",
        &[],
        &warnings,
        json!({
            "t_probe_us": s.t_probe,
            "slope_window_us": [s.slope_window.0, s.slope_window.1],
            "failed_points": points.iter().filter(|p| p.status != "ok").count(),
        }),
    );
    Ok(Sweep { points, table, meta })
}

#[derive(Debug, Clone)]
pub struct Steady {
    pub table: Table,
    pub distributions: Vec<PhotonDistribution>,
    pub meta: Value,
}

/// Null-space steady state for every η point.
pub fn run_steady(cfg: &ScenarioConfig, jobs: usize) -> Result<Steady> {
    if cfg.model != Model::Rabi || !(cfg.params.kappa() > 0.0) {
        return Err(CliError::config("scenario.model", "steady states need the dissipative rabi model with kappa > 0"));
    }
    let warnings = preflight(cfg)?;
    let basis = FockBasis::new(cfg.n_max).context(|| "scenario.n_max".into())?;
    let results: Vec<(f64, f64, f64, f64, PhotonDistribution)> = pool(jobs).install(|| {
        cfg.eta_points()
            .par_iter()
            .map(|&eta| {
                let (h, kappa, eta_eff) = hamiltonian(cfg, eta, basis)?;
                let Hamiltonian::Static(h) = h else { unreachable!("Rabi models are static") };
                let ctx = || format!("steady state at eta/2pi = {} MHz", eta_mhz(eta_eff));
                let ss = steady_state(&h, kappa, basis).context(ctx)?;
                let n = expectation(&ss.state, &observable("n", basis)).context(ctx)?;
                let p_e = expectation(&ss.state, &observable("p_e", basis)).context(ctx)?;
                let dist = PhotonDistribution::from_state(&ss.state, basis).context(ctx)?;
                Ok((eta_eff, n, p_e, ss.residual, dist))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut table = Table::new();
    table
        .push("eta", "MHz_over_2pi", results.iter().map(|r| eta_mhz(r.0)).collect())
        .push("n", "1", results.iter().map(|r| r.1).collect())
        .push("p_e", "1", results.iter().map(|r| r.2).collect())
        .push("residual", "1", results.iter().map(|r| r.3).collect())
        .push("top_level_population", "1", results.iter().map(|r| *r.4.probabilities().last().unwrap()).collect());
    let distributions: Vec<PhotonDistribution> = results.into_iter().map(|r| r.4).collect();
    let extra = json!({
        "distributions": distributions.iter().map(|d| d.probabilities().to_vec()).collect::<Vec<_>>(),
    });
    let meta = metadata(cfg, "steady", &[], &warnings, extra);
    Ok(Steady { table, distributions, meta })
}

/// Modulation settings versus η under the sweet-spot constraint, with the
/// residuals of both constraint identities and of the η round trip.
pub fn params_table(cfg: &ScenarioConfig) -> Result<(Table, Value)> {
    let ParamBlock::Device(t) = &cfg.params else {
        return Err(CliError::config("device", "the parameter table needs a [device] section"));
    };
    let grid: Vec<f64> = match &cfg.sweep {
        Some(s) => s.eta_grid.clone(),
        None => (1..=10).map(|k| TAU * 0.1 * k as f64).collect(),
    };
    let template = t.resolve(None)?;
    let rows = parameter_sweep(&grid, &template).context(|| "parameter sweep".into())?;
    let mut s14a = Vec::new();
    let mut s14b = Vec::new();
    let mut round_trip = Vec::new();
    for r in &rows {
        s14a.push(((r.omega_q + r.nu1) - template.omega_r).abs() / template.omega_r);
        s14b.push(((r.omega_q + r.epsilon) - template.omega_s).abs() / template.omega_s);
        let dev = solve_constraint(&template, r.eta).context(|| "parameter sweep".into())?;
        let eff = derive_effective(&dev).context(|| "parameter sweep".into())?;
        round_trip.push((eff.eta - r.eta).abs() / r.eta);
    }
    let mut table = Table::new();
    table
        .push("eta", "MHz_over_2pi", rows.iter().map(|r| eta_mhz(r.eta)).collect())
        .push("mu", "1", rows.iter().map(|r| r.mu).collect())
        .push("nu1", "MHz_over_2pi", rows.iter().map(|r| r.nu1 / TAU).collect())
        .push("omega_q", "MHz_over_2pi", rows.iter().map(|r| r.omega_q / TAU).collect())
        .push("epsilon", "MHz_over_2pi", rows.iter().map(|r| r.epsilon / TAU).collect())
        .push("constraint_a_residual", "1", s14a)
        .push("constraint_b_residual", "1", s14b)
        .push("eta_round_trip_residual", "1", round_trip);
    let meta = metadata(cfg, "params", &[], &[], json!({}));
    Ok((table, meta))
}

/// Cheap consistency checks run before any integration; returns warnings.
pub fn preflight(cfg: &ScenarioConfig) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    for eta in cfg.eta_points() {
        if let ParamBlock::Device(t) = &cfg.params {
            let dev = t.resolve(eta)?;
            warnings.extend(dev.validate().context(|| "device parameters".into())?);
            let target = eta.or(match t.modulation {
                crate::config::Modulation::TargetEta(e) => Some(e),
                crate::config::Modulation::Explicit { .. } => None,
            });
            if let Some(target) = target {
                let raw = solve_constraint(&dev, target).context(|| "constraint solve".into())?;
                let a = (raw.omega_q + raw.nu1 - raw.omega_r).abs() / raw.omega_r;
                let b = (raw.omega_q + raw.epsilon - raw.omega_s).abs() / raw.omega_s;
                if a > 1e-9 || b > 1e-9 {
                    return Err(CliError::config(
                        "device",
                        format!("constraint identities violated ({a:.2e}, {b:.2e})"),
                    ));
                }
            }
            let eff = derive_effective(&dev).context(|| "effective parameters".into())?;
            if (eff.delta_omega2 - eff.k).abs() > 1e-9 * eff.k.abs().max(1.0) {
                return Err(CliError::config("device", "second-drive detuning is not locked to K"));
            }
        } else {
            cfg.params.rabi_parameters(eta)?;
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(warnings)
}

#[derive(Debug, Clone)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Full invariant suite for a configuration, including a steady-state
/// truncation probe for dissipative Rabi scenarios.
pub fn run_check(cfg: &ScenarioConfig) -> Vec<CheckItem> {
    let mut items = Vec::new();
    let mut add =
        |name: &str, passed: bool, detail: String| items.push(CheckItem { name: name.into(), passed, detail });
    match preflight(cfg) {
        Ok(w) => add("parameters", true, if w.is_empty() { "consistent".into() } else { w.join("; ") }),
        Err(e) => add("parameters", false, e.to_string()),
    }
    let points = cfg.eta_points();
    if let Ok(Some(eff)) = cfg.params.effective(points[0]) {
        match jacobi_anger_truncation_error(eff.mu, 1) {
            Ok(err) => {
                add("sideband_truncation", err < 1e-2, format!("two-sided Bessel tail beyond |m| = 1 is {err:.3e}"))
            }
            Err(e) => add("sideband_truncation", false, e.to_string()),
        }
        if eff.delta != 0.0 {
            if let Ok(c) = critical_coupling(cfg.params.kappa(), eff.delta) {
                add("critical_coupling", true, format!("xi_c = {:.6}", c.xi_c));
            }
        }
    }
    if let ParamBlock::Effective(e) = &cfg.params {
        if e.delta != 0.0 {
            if let Ok(c) = critical_coupling(e.kappa, e.delta) {
                add("critical_coupling", true, format!("xi_c = {:.6}", c.xi_c));
            }
        }
    }
    let steps = (cfg.t_final / cfg.sample_dt).round();
    add("sample_grid", steps <= 1e7, format!("{steps} samples"));
    if cfg.model == Model::Rabi && cfg.params.kappa() > 0.0 {
        let basis = FockBasis::new(cfg.n_max).expect("validated n_max");
        let worst = points.last().copied().flatten();
        let probe = hamiltonian(cfg, worst, basis).and_then(|(h, kappa, eta)| {
            let Hamiltonian::Static(h) = h else { unreachable!("Rabi models are static") };
            let ss = steady_state(&h, kappa, basis).context(|| "steady state".into())?;
            let dist = PhotonDistribution::from_state(&ss.state, basis).context(|| "steady state".into())?;
            Ok((eta, dist))
        });
        match probe {
            Ok((eta, dist)) => {
                let top = *dist.probabilities().last().unwrap();
                let spec = RabiModelSpec { omega: 0.0, delta: 0.0, eta, n_max: cfg.n_max };
                let enough = spec.check_truncation(dist.mean()).is_ok();
                add(
                    "truncation",
                    top <= 1e-4 && enough,
                    format!(
                        "steady state at eta/2pi = {} MHz: <n> = {:.4}, top level {top:.2e}",
                        eta_mhz(eta),
                        dist.mean()
                    ),
                );
            }
            Err(e) => add("truncation", false, e.to_string()),
        }
    }
    items
}

/// Shared provenance block; `created_unix` is the only non-deterministic field.
pub fn metadata(cfg: &ScenarioConfig, command: &str, runs: &[Run], warnings: &[String], extra: Value) -> Value {
    let integrator: Vec<Value> = runs
        .iter()
        .map(|r| {
            let d = &r.trajectory.diagnostics;
            json!({
                "eta_MHz_over_2pi": eta_mhz(r.eta),
                "kappa_per_us": r.kappa,
                "method": "rk4",
                "steps": d.steps,
                "dt_max_us": d.dt_max,
                "max_trace_drift": d.max_trace_drift,
                "max_hermiticity_error": d.max_hermiticity_error,
                "renormalizations": d.renormalizations,
                "truncation_tail": r.trajectory.truncation_tail,
            })
        })
        .collect();
    let created = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "name": cfg.name,
        "command": command,
        "config": {
            "model": cfg.model.name(),
            "initial_state": cfg.initial_state.name(),
            "n_max": cfg.n_max,
            "t_final_us": cfg.t_final,
            "sample_dt_us": cfg.sample_dt,
            "seed": cfg.seed,
            "kappa_per_us": cfg.params.kappa(),
            "kappa_convention": cfg.kappa_convention.name(),
            "text": cfg.source,
        },
        "provenance": {
            "code_version": env!("CARGO_PKG_VERSION"),
            "integrator": integrator,
            "truncation_tail": runs.iter().map(|r| r.trajectory.truncation_tail).fold(0.0, f64::max),
            "warnings": warnings,
        },
        "result": extra,
        "created_unix": created,
    })
}
