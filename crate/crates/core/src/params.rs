//! Device-level parameters, the sideband parameter map to the effective
//! Rabi-model couplings, and its inversion under the sweet-spot constraint.
//!
//! All angular frequencies are in rad/μs and rates in 1/μs. Use [`units`]
//! to convert from the `ω/(2π)` MHz/GHz figures quoted for the device.

use log::warn;

use crate::bessel::j;
use crate::error::{Error, Result};

pub mod units {
    use std::f64::consts::TAU;

    /// `f` in MHz meaning `ω/(2π)` → ω in rad/μs.
    pub fn mhz(f: f64) -> f64 {
        TAU * f
    }

    /// `f` in GHz meaning `ω/(2π)` → ω in rad/μs.
    pub fn ghz(f: f64) -> f64 {
        TAU * 1e3 * f
    }

    /// ω in rad/μs → `ω/(2π)` in MHz.
    pub fn to_mhz(omega: f64) -> f64 {
        omega / TAU
    }
}

/// First maximum of `J_1`; the coupling map is monotone on `[0, J1_FIRST_MAX)`.
pub const J1_FIRST_MAX: f64 = 1.841_183_781_340_659_3;

/// Upper end of the bisection bracket for inverting `η = λ J_1(μ)/2`.
pub const MU_BRACKET: f64 = 1.8;

const MAX_BISECTION: usize = 200;

/// Hardware-level parameters of the modulated qubit, the drives and the
/// lossy resonator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Resonator frequency ω_r.
    pub omega_r: f64,
    /// Qubit sweet-spot frequency ω_s.
    pub omega_s: f64,
    /// Mean qubit frequency ω_0 (also written ω_q).
    pub omega_q: f64,
    /// Bare qubit–resonator coupling λ.
    pub lambda: f64,
    /// Modulation amplitude ε.
    pub epsilon: f64,
    /// Modulation frequency ν_1.
    pub nu1: f64,
    /// First transverse drive amplitude Ω_1.
    pub drive1: f64,
    /// Second transverse drive amplitude Ω_2.
    pub drive2: f64,
    pub phi1: f64,
    pub phi2: f64,
    /// Sideband detuning δ; any sign.
    pub delta: f64,
    /// Photon decay rate κ.
    pub kappa: f64,
}

impl DeviceParams {
    /// Device values quoted for the η/(2π) = 0.8 MHz working point, with
    /// Ω_2 chosen so that Ω/(2π) = 1 MHz and κ = 5 μs⁻¹.
    pub fn reference() -> Self {
        let nu1 = units::mhz(708.7);
        let epsilon = units::mhz(56.7);
        let mu = epsilon / nu1;
        let omega_r = units::ghz(6.656);
        let delta = units::mhz(0.18);
        Self {
            omega_r,
            omega_s: units::ghz(6.004),
            omega_q: omega_r - delta - nu1,
            lambda: units::mhz(40.0),
            epsilon,
            nu1,
            drive1: units::mhz(20.0),
            drive2: units::mhz(1.0) / j(0, mu),
            phi1: 0.0,
            phi2: std::f64::consts::FRAC_PI_2,
            delta,
            kappa: 5.0,
        }
    }

    /// Validates signs and returns the soft-condition warnings (also logged).
    pub fn validate(&self) -> Result<Vec<String>> {
        let positive = [
            ("omega_r", self.omega_r),
            ("omega_s", self.omega_s),
            ("omega_q", self.omega_q),
            ("lambda", self.lambda),
            ("nu1", self.nu1),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: format!("must be positive and finite, got {v}") });
            }
        }
        let non_negative =
            [("epsilon", self.epsilon), ("drive1", self.drive1), ("drive2", self.drive2), ("kappa", self.kappa)];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be non-negative and finite, got {v}"),
                });
            }
        }
        for (name, v) in [("delta", self.delta), ("phi1", self.phi1), ("phi2", self.phi2)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "must be finite".into() });
            }
        }
        let mut warnings = Vec::new();
        for (name, v) in [("delta", self.delta.abs()), ("lambda", self.lambda)] {
            let ratio = v / self.nu1;
            if ratio > 0.1 {
                let msg = format!("{name}/nu1 = {ratio:.3} is not small; sideband RWA is questionable");
                warn!("{msg}");
                warnings.push(msg);
            }
        }
        Ok(warnings)
    }

    pub fn mu(&self) -> f64 {
        self.epsilon / self.nu1
    }

    /// Copy with ω_q set so that `ν_1 + ω_q = ω_r − δ` holds exactly.
    pub fn with_sideband_resonance(mut self) -> Self {
        self.omega_q = self.omega_r - self.delta - self.nu1;
        self
    }

    /// Copy with Ω_2 chosen so that the effective qubit frequency is `omega`.
    pub fn with_effective_omega(mut self, omega: f64) -> Self {
        self.drive2 = omega / j(0, self.mu());
        self
    }
}

/// Effective Rabi-model parameters produced by the sideband map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    /// Modulation index μ = ε/ν_1.
    pub mu: f64,
    /// K = 2 Ω_1 J_0(μ), the rotated-frame frequency.
    pub k: f64,
    /// Ω = Ω_2 J_0(μ).
    pub omega: f64,
    /// η = λ J_1(μ)/2.
    pub eta: f64,
    pub delta: f64,
    /// Δω_2 = ω_2 − ω_0, locked to K.
    pub delta_omega2: f64,
    /// Second-drive detuning ν_2 = 2 Ω_1 J_0(μ).
    pub nu2: f64,
}

pub fn derive_effective(dev: &DeviceParams) -> Result<EffectiveParams> {
    dev.validate()?;
    let mu = dev.mu();
    if !(0.0..J1_FIRST_MAX).contains(&mu) {
        return Err(Error::ModulationIndex { mu, limit: J1_FIRST_MAX });
    }
    let j0 = j(0, mu);
    let k = 2.0 * dev.drive1 * j0;
    Ok(EffectiveParams {
        mu,
        k,
        omega: dev.drive2 * j0,
        eta: dev.lambda * j(1, mu) / 2.0,
        delta: dev.delta,
        delta_omega2: k,
        nu2: k,
    })
}

fn coupling(lambda: f64, mu: f64) -> f64 {
    lambda * j(1, mu) / 2.0
}

/// Largest η reachable inside the bisection bracket.
pub fn max_reachable_eta(lambda: f64) -> f64 {
    coupling(lambda, MU_BRACKET)
}

/// Chooses μ, ν_1, ε and ω_q for a target η under the sweet-spot constraint
/// `ω_q = ω_r − ν_1 = ω_s − ε`, i.e. `ν_1 = (ω_r − ω_s)/(1 − μ)`.
///
/// Only `omega_r`, `omega_s` and `lambda` of `dev` are read; the drive,
/// phase, δ and κ fields are carried through unchanged.
pub fn solve_constraint(dev: &DeviceParams, eta_target: f64) -> Result<DeviceParams> {
    if !(dev.lambda > 0.0) {
        return Err(Error::InvalidParameter { name: "lambda", reason: "must be positive".into() });
    }
    if !(dev.omega_r > dev.omega_s) || !(dev.omega_s > 0.0) {
        return Err(Error::InvalidParameter {
            name: "omega_r",
            reason: format!("need omega_r > omega_s > 0, got {} and {}", dev.omega_r, dev.omega_s),
        });
    }
    let max = max_reachable_eta(dev.lambda);
    if !(eta_target > 0.0) || eta_target >= max {
        return Err(Error::Unreachable { target: eta_target, max });
    }

    let (mut lo, mut hi) = (0.0, MU_BRACKET);
    let mut converged = false;
    for _ in 0..MAX_BISECTION {
        let mid = 0.5 * (lo + hi);
        if coupling(dev.lambda, mid) < eta_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_BISECTION));
    }
    let mu = 0.5 * (lo + hi);
    let nu1 = (dev.omega_r - dev.omega_s) / (1.0 - mu);
    Ok(DeviceParams { omega_q: dev.omega_r - nu1, epsilon: mu * nu1, nu1, ..*dev })
}

/// One row of the parameter-versus-η table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eta: f64,
    pub mu: f64,
    pub nu1: f64,
    pub omega_q: f64,
    pub epsilon: f64,
}

pub fn parameter_sweep(eta_grid: &[f64], template: &DeviceParams) -> Result<Vec<SweepRow>> {
    eta_grid
        .iter()
        .map(|&eta| {
            let dev = solve_constraint(template, eta)?;
            Ok(SweepRow { eta, mu: dev.mu(), nu1: dev.nu1, omega_q: dev.omega_q, epsilon: dev.epsilon })
        })
        .collect()
}

/// Dissipative superradiant critical point ξ_c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub xi_c: f64,
}

/// `ξ_c = √(1 + κ²/(4δ²))`; κ and δ in the same units.
pub fn critical_coupling(kappa: f64, delta: f64) -> Result<CriticalPoint> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::InvalidParameter { name: "delta", reason: "must be finite and nonzero".into() });
    }
    if !kappa.is_finite() {
        return Err(Error::InvalidParameter { name: "kappa", reason: "must be finite".into() });
    }
    Ok(CriticalPoint { xi_c: (1.0 + kappa * kappa / (4.0 * delta * delta)).sqrt() })
}

/// Magnitudes of the residual longitudinal coupling `k a†a σz` after the
/// first drive (`k²n²/(2Ω_1)`) and after the second (`first²/Ω`).
pub fn residual_longitudinal_estimate(k: f64, n: u32, omega1: f64, omega: f64) -> (f64, f64) {
    let kn = k * n as f64;
    if kn.abs() > 0.1 * omega1.abs() {
        warn!("k*n = {kn:.4} is not small against Omega1 = {omega1:.4}; estimate is unreliable");
    }
    let first = kn * kn / (2.0 * omega1);
    if first.abs() > 0.1 * omega.abs() {
        warn!("first-stage residual {first:.4} is not small against Omega = {omega:.4}");
    }
    (first, first * first / omega)
}
