//! Photon-number tomography from a recorded or synthesized Rabi signal.

use dqrm_core::dynamics::EvolveOptions;
use dqrm_core::tomography::{
    compute_basis_responses, fit_distribution, forward_signal_from_field_state, FitOptions, PhotonDistribution,
    RabiSignal, TomographyFit,
};
use dqrm_core::FockBasis;
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde_json::{json, Value};

use crate::config::{ScenarioConfig, TomographySection};
use crate::error::{CliError, Context, Result};
use crate::output::{read_signal, Table};
use crate::runner::{eta_mhz, metadata, preflight, run_point, Run};

#[derive(Debug, Clone)]
pub struct Tomography {
    pub fit: TomographyFit,
    /// Populations the signal was synthesized from, if any.
    pub truth: Option<PhotonDistribution>,
    /// The (possibly noisy) signal that was fitted.
    pub signal: RabiSignal,
    pub clean: Option<Vec<f64>>,
    pub fitted: Vec<f64>,
    pub g: f64,
    pub kappa: f64,
    pub table: Table,
    pub json: Value,
    pub meta: Value,
}

impl Tomography {
    /// `max_n |p_n − p*_n|` over the fitted support.
    pub fn sup_error(&self) -> Option<f64> {
        let truth = self.truth.as_ref()?;
        let t = truth.probabilities();
        Some(
            self.fit
                .distribution
                .probabilities()
                .iter()
                .enumerate()
                .map(|(n, p)| (p - t.get(n).copied().unwrap_or(0.0)).abs())
                .fold(0.0, f64::max),
        )
    }
}

fn uniform(t_final: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| t_final * k as f64 / (points - 1) as f64).collect()
}

fn distribution_json(d: &PhotonDistribution) -> Value {
    json!({ "p": d.probabilities(), "mean": d.mean(), "three_plus": d.tail_mass(3) })
}

pub fn run_tomography(cfg: &ScenarioConfig) -> Result<Tomography> {
    let sec: &TomographySection =
        cfg.tomography.as_ref().ok_or_else(|| CliError::config("tomography", "section is missing"))?;
    let warnings = preflight(cfg)?;
    let scenario_eta = if cfg.model.is_rabi() {
        Some(cfg.params.rabi_parameters(None)?.2)
    } else {
        cfg.params.effective(None)?.map(|e| e.eta)
    };
    let g = sec.g.or(scenario_eta).ok_or_else(|| CliError::config("tomography.g", "missing"))?;
    let kappa = sec.kappa.unwrap_or(cfg.params.kappa());
    let ctx = || format!("tomography for {}", cfg.name);

    let mut runs: Vec<Run> = Vec::new();
    let (signal, truth, clean) = if let Some(path) = &sec.signal_csv {
        let (t, p) = read_signal(path)?;
        let signal =
            RabiSignal::new(t, p).map_err(|e| CliError::Signal { path: path.clone(), message: e.to_string() })?;
        (signal, None, None)
    } else {
        let t_final = sec.t_final.unwrap_or(3.0 / g);
        let times = uniform(t_final, sec.points);
        let (clean, truth) = match &sec.truth {
            Some(p) => {
                let truth = PhotonDistribution::new(p.clone()).context(|| "tomography.truth".into())?;
                let responses = compute_basis_responses(g, kappa, &times, truth.n_max()).context(ctx)?;
                (responses.apply(&truth).context(ctx)?, truth)
            }
            None => {
                if !cfg.model.is_rabi() {
                    return Err(CliError::config("scenario.model", "synthesizing a signal needs rabi or rabi_unitary"));
                }
                let run = run_point(cfg, None, vec![0.0, cfg.t_final], &EvolveOptions::default())?;
                let basis = FockBasis::new(cfg.n_max).context(|| "scenario.n_max".into())?;
                let state = &run.trajectory.final_state;
                let field = state.field_reduced(basis).context(ctx)?;
                let truth = PhotonDistribution::from_state(state, basis).context(ctx)?;
                let signal = forward_signal_from_field_state(&field, g, kappa, &times).context(ctx)?;
                runs.push(run);
                (signal, truth)
            }
        };
        let noisy = if sec.noise > 0.0 {
            clean.with_noise(sec.noise, &mut StdRng::seed_from_u64(cfg.seed)).context(ctx)?
        } else {
            clean.clone()
        };
        (noisy, Some(truth), Some(clean.p_e))
    };

    let responses = compute_basis_responses(g, kappa, &signal.times, sec.n_fit).context(ctx)?;
    let fit = fit_distribution(&signal, &responses, &FitOptions { ridge: sec.ridge }).context(ctx)?;
    let fitted = responses.apply(&fit.distribution).context(ctx)?.p_e;

    let mut table = Table::new();
    table.push("t", "us", signal.times.clone()).push("p_e_data", "1", signal.p_e.clone()).push(
        "p_e_fit",
        "1",
        fitted.clone(),
    );
    if let Some(c) = &clean {
        table.push("p_e_clean", "1", c.clone());
    }

    let mut out =
        Tomography { fit, truth, signal, clean, fitted, g, kappa, table, json: Value::Null, meta: Value::Null };
    out.json = json!({
        "name": cfg.name,
        "g_MHz_over_2pi": eta_mhz(g),
        "kappa_per_us": kappa,
        "noise_sigma": sec.noise,
        "seed": cfg.seed,
        "fit": distribution_json(&out.fit.distribution),
        "residual_norm": out.fit.residual_norm,
        "condition_number": out.fit.condition_number,
        "iterations": out.fit.iterations,
        "truth": out.truth.as_ref().map(distribution_json),
        "sup_error": out.sup_error(),
    });
    out.meta =
        metadata(cfg, "tomography", &runs, &warnings, json!({ "points": out.signal.times.len(), "n_fit": sec.n_fit }));
    Ok(out)
}
