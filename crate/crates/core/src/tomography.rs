//! Photon-number tomography from the qubit's sideband Rabi signal.
//!
//! The readout evolves `|e⟩⟨e| ⊗ ρ_field` under the damped Jaynes–Cummings
//! master equation. Coherences between Fock states never feed back into
//! the qubit population, so `P_e(τ) = Σ_n p_n f_n(τ)` with basis responses
//! `f_n` started from `|e, n⟩`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::dynamics::{evolve, validate_grid, EvolveOptions, LindbladProblem};
use crate::error::{Error, Result};
use crate::hilbert::{on_qubit, qubit_projector, DensityMatrix, FockBasis, Qubit, StateVector};
use crate::models::build_readout_jc;
use crate::simplex::simplex_least_squares;

/// Normalized Fock-level populations `p_0 … p_{n_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    p: Vec<f64>,
}

impl PhotonDistribution {
    pub const SUM_TOL: f64 = 1e-8;

    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidState("empty photon distribution".into()));
        }
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidState("photon populations must be finite and non-negative".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::InvalidState(format!("photon populations sum to {s}, not 1")));
        }
        Ok(Self { p })
    }

    pub fn vacuum(n_max: usize) -> Self {
        Self::fock(0, n_max)
    }

    pub fn fock(n: usize, n_max: usize) -> Self {
        let mut p = vec![0.0; n_max.max(n) + 1];
        p[n] = 1.0;
        Self { p }
    }

    /// Field populations of a qubit ⊗ field state.
    pub fn from_state(rho: &DensityMatrix, basis: FockBasis) -> Result<Self> {
        let mut p = rho.field_populations(basis)?;
        // tiny negative populations are integration noise
        p.iter_mut().for_each(|v| *v = v.max(0.0));
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        Self::new(p)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn n_max(&self) -> usize {
        self.p.len() - 1
    }

    pub fn mean(&self) -> f64 {
        mean_photon(self)
    }

    /// Total population with at least `n` photons.
    pub fn tail_mass(&self, n: usize) -> f64 {
        self.p.iter().skip(n).sum()
    }

    /// Same distribution on a longer or shorter support; truncation must
    /// only drop (numerically) empty levels.
    pub fn resized(&self, n_max: usize) -> Result<Self> {
        let mut p = self.p.clone();
        if n_max + 1 < p.len() {
            let dropped: f64 = p[n_max + 1..].iter().sum();
            if dropped > Self::SUM_TOL {
                return Err(Error::Truncation { tail: dropped, limit: Self::SUM_TOL });
            }
        }
        p.resize(n_max + 1, 0.0);
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        Self::new(p)
    }
}

pub fn mean_photon(dist: &PhotonDistribution) -> f64 {
    dist.p.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
}

/// Excited-state population of the readout qubit versus interaction time.
#[derive(Debug, Clone, PartialEq)]
pub struct RabiSignal {
    pub times: Vec<f64>,
    pub p_e: Vec<f64>,
}

impl RabiSignal {
    /// Values outside `[0, 1]` are clipped (and counted in the log).
    pub fn new(times: Vec<f64>, mut p_e: Vec<f64>) -> Result<Self> {
        validate_grid(&times)?;
        if times.len() != p_e.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: p_e.len() });
        }
        if p_e.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntries);
        }
        let mut clipped = 0usize;
        for v in &mut p_e {
            let c = v.clamp(0.0, 1.0);
            if c != *v {
                clipped += 1;
                *v = c;
            }
        }
        if clipped > 0 {
            log::info!("clipped {clipped} of {} signal values to [0, 1]", p_e.len());
        }
        Ok(Self { times, p_e })
    }

    /// Adds independent Gaussian noise of width `sigma`, then clips.
    pub fn with_noise<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> Result<Self> {
        let normal =
            Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter { name: "sigma", reason: e.to_string() })?;
        let noisy = self.p_e.iter().map(|v| v + normal.sample(rng)).collect();
        Self::new(self.times.clone(), noisy)
    }
}

/// `f[(i, n)] = P_e(τ_i)` for the readout started from `|e, n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisResponses {
    pub g: f64,
    pub kappa: f64,
    pub times: Vec<f64>,
    f: DMatrix<f64>,
}

impl BasisResponses {
    pub fn n_max(&self) -> usize {
        self.f.ncols() - 1
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn column(&self, n: usize) -> Vec<f64> {
        self.f.column(n).iter().copied().collect()
    }

    /// `Σ_n p_n f_n`.
    pub fn apply(&self, dist: &PhotonDistribution) -> Result<RabiSignal> {
        let dist = dist.resized(self.n_max())?;
        let p = DVector::from_column_slice(dist.probabilities());
        let y = &self.f * p;
        RabiSignal::new(self.times.clone(), y.iter().copied().collect())
    }
}

/// Readout problem on a basis one level larger than `n_max`, so `|e, n_max⟩`
/// has its partner `|g, n_max + 1⟩`.
fn readout_problem(g: f64, kappa: f64, times: &[f64], n_max: usize, initial: DensityMatrix) -> Result<LindbladProblem> {
    let basis = FockBasis::new(n_max + 1)?;
    let h = build_readout_jc(g, basis)?;
    LindbladProblem::new(h, kappa, basis, initial, times[times.len() - 1])?
        .with_sample_times(times.to_vec())?
        .observe("P_e", on_qubit(basis, &qubit_projector(Qubit::Excited)))
}

fn readout_options() -> EvolveOptions {
    EvolveOptions {
        // the excitation number never exceeds its initial value, so the
        // enlarged basis is exact and the top level is legitimately occupied
        tail_limit: f64::INFINITY,
        ..Default::default()
    }
}

/// Largest sampling interval that resolves the fastest readout oscillation.
pub fn max_sample_interval(g: f64, n_max: usize) -> f64 {
    0.02 * TAU / (g * ((n_max + 1) as f64).sqrt())
}

fn check_readout_grid(g: f64, times: &[f64], n_max: usize) -> Result<()> {
    validate_grid(times)?;
    if times[times.len() - 1] <= 0.0 {
        return Err(Error::TimeGrid);
    }
    let limit = max_sample_interval(g, n_max);
    let widest = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if widest > limit * (1.0 + 1e-9) {
        return Err(Error::InvalidParameter {
            name: "times",
            reason: format!(
                "sampling interval {widest:.3e} us exceeds {limit:.3e} us needed to resolve the readout oscillation"
            ),
        });
    }
    Ok(())
}

/// Evolves every `|e, n⟩`, `n ≤ n_max`, in parallel.
pub fn compute_basis_responses(g: f64, kappa: f64, times: &[f64], n_max: usize) -> Result<BasisResponses> {
    check_readout_grid(g, times, n_max)?;
    let columns: Vec<Vec<f64>> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let basis = FockBasis::new(n_max + 1)?;
            let init = StateVector::basis(basis, Qubit::Excited, n)?.to_density();
            let tr = evolve(&readout_problem(g, kappa, times, n_max, init)?, &readout_options())?;
            Ok(tr.series("P_e")?.to_vec())
        })
        .collect::<Result<_>>()?;
    let mut f = DMatrix::zeros(times.len(), n_max + 1);
    for (n, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            f[(i, n)] = *v;
        }
    }
    Ok(BasisResponses { g, kappa, times: times.to_vec(), f })
}

/// `P_e(τ)` for a field distribution, via the basis responses.
pub fn forward_signal(dist: &PhotonDistribution, g: f64, kappa: f64, times: &[f64]) -> Result<RabiSignal> {
    compute_basis_responses(g, kappa, times, dist.n_max())?.apply(dist)
}

/// `P_e(τ)` by evolving `|e⟩⟨e| ⊗ ρ_field` directly, coherences included.
pub fn forward_signal_from_field_state(field: &DensityMatrix, g: f64, kappa: f64, times: &[f64]) -> Result<RabiSignal> {
    let n_max = field.dim() - 1;
    check_readout_grid(g, times, n_max)?;
    let basis = FockBasis::new(n_max + 1)?;
    let mut padded = DMatrix::zeros(basis.dim(), basis.dim());
    padded.view_mut((0, 0), (field.dim(), field.dim())).copy_from(field.matrix());
    let excited = DensityMatrix::new(qubit_projector(Qubit::Excited).into_matrix())?;
    let init = DensityMatrix::product(&excited, &DensityMatrix::new(padded)?)?;
    let tr = evolve(&readout_problem(g, kappa, times, n_max, init)?, &readout_options())?;
    RabiSignal::new(times.to_vec(), tr.series("P_e")?.to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    /// Weight of an optional `‖p‖²` penalty.
    pub ridge: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyFit {
    pub distribution: PhotonDistribution,
    /// `‖F p − P_e‖₂` without the ridge term.
    pub residual_norm: f64,
    pub condition_number: f64,
    pub iterations: usize,
}

pub const CONDITION_WARNING: f64 = 1e8;

/// `min ‖F p − P_e‖₂` over the probability simplex.
pub fn fit_distribution(signal: &RabiSignal, responses: &BasisResponses, opts: &FitOptions) -> Result<TomographyFit> {
    if signal.times.len() != responses.times.len()
        || signal.times.iter().zip(&responses.times).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
    {
        return Err(Error::InvalidParameter {
            name: "times",
            reason: "signal and basis responses must share the time grid".into(),
        });
    }
    let levels = responses.n_max() + 1;
    if signal.times.len() < 3 * levels {
        return Err(Error::InvalidParameter {
            name: "times",
            reason: format!(
                "{} samples cannot determine {levels} populations; need >= {}",
                signal.times.len(),
                3 * levels
            ),
        });
    }
    let f = responses.matrix();
    let sv = f.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition_number > CONDITION_WARNING {
        log::warn!("basis-response matrix is ill-conditioned (condition number {condition_number:.3e})");
    }
    let y = DVector::from_column_slice(&signal.p_e);
    let sol = match opts.ridge {
        Some(w) if w > 0.0 => {
            let rows = f.nrows();
            let mut aug = DMatrix::zeros(rows + levels, levels);
            aug.view_mut((0, 0), (rows, levels)).copy_from(f);
            aug.view_mut((rows, 0), (levels, levels)).fill_diagonal(w.sqrt());
            let mut yy = DVector::zeros(rows + levels);
            yy.rows_mut(0, rows).copy_from(&y);
            simplex_least_squares(&aug, &yy)?
        }
        _ => simplex_least_squares(f, &y)?,
    };
    let residual_norm = (f * &sol.x - &y).norm();
    Ok(TomographyFit {
        distribution: PhotonDistribution::new(sol.x.iter().copied().collect())?,
        residual_norm,
        condition_number,
        iterations: sol.iterations,
    })
}
