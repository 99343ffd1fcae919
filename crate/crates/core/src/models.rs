//! Hamiltonians for each level of the sideband construction: lab frame,
//! interaction picture, the frame rotating with the first drive, the
//! effective Rabi model, and the Jaynes–Cummings readout.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hilbert::{
    self, on_field, on_qubit, qubit_pauli, qubit_projector, FockBasis, Operator, Pauli, Qubit, C64, I,
};
use crate::params::{derive_effective, DeviceParams, EffectiveParams};

type EvalFn = dyn Fn(f64) -> Operator + Send + Sync;

/// Lazily evaluated Hermitian `H(t)`, `t` in μs.
#[derive(Clone)]
pub struct TimeDependentHamiltonian {
    dim: usize,
    description: String,
    fast_frequency: Option<f64>,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for TimeDependentHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentHamiltonian")
            .field("dim", &self.dim)
            .field("description", &self.description)
            .field("fast_frequency", &self.fast_frequency)
            .finish()
    }
}

impl TimeDependentHamiltonian {
    pub fn new(
        dim: usize,
        description: impl Into<String>,
        fast_frequency: Option<f64>,
        eval: impl Fn(f64) -> Operator + Send + Sync + 'static,
    ) -> Self {
        Self { dim, description: description.into(), fast_frequency, eval: Arc::new(eval) }
    }

    pub fn constant(op: Operator, description: impl Into<String>) -> Self {
        let dim = op.dim();
        Self::new(dim, description, None, move |_| op.clone())
    }

    pub fn eval(&self, t: f64) -> Operator {
        (self.eval)(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Fastest explicit time dependence in rad/μs, used to bound the step.
    pub fn fast_frequency(&self) -> Option<f64> {
        self.fast_frequency
    }
}

/// Parameters of the effective Rabi Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiModelSpec {
    pub omega: f64,
    pub delta: f64,
    pub eta: f64,
    pub n_max: usize,
}

impl RabiModelSpec {
    pub fn from_effective(eff: &EffectiveParams, n_max: usize) -> Self {
        Self { omega: eff.omega, delta: eff.delta, eta: eff.eta, n_max }
    }

    pub fn basis(&self) -> Result<FockBasis> {
        FockBasis::new(self.n_max)
    }

    /// Rejects truncations that leave less than four times the expected
    /// photon number (or 4, whichever is larger).
    pub fn check_truncation(&self, expected_mean: f64) -> Result<()> {
        let need = (4.0 * expected_mean.max(1.0)).ceil() as usize;
        if self.n_max < need {
            return Err(Error::InvalidParameter {
                name: "n_max",
                reason: format!(
                    "{} is too small for an expected mean photon number {expected_mean}; need >= {need}",
                    self.n_max
                ),
            });
        }
        Ok(())
    }
}

/// Which qubit representation the Rabi Hamiltonian is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QubitFrame {
    /// `(Ω/2)σy + δ a†a + η σx (a + a†)` as derived.
    #[default]
    Literal,
    /// Conjugated by `S`, so the qubit term reads `(Ω/2)σz`.
    Transformed,
}

/// Frequently used operators on qubit ⊗ field.
#[derive(Debug, Clone)]
pub(crate) struct CompositeOps {
    pub number: Operator,
    pub excited: Operator,
    pub sigma_minus: Operator,
    /// `σ− ⊗ a†`
    pub adag_sigma_minus: Operator,
    pub sx: Operator,
    pub sy: Operator,
    pub sz: Operator,
    /// `σx ⊗ X`
    pub x_sx: Operator,
    /// `σy ⊗ Y`
    pub y_sy: Operator,
    /// `σz ⊗ Y`
    pub y_sz: Operator,
}

impl CompositeOps {
    pub fn new(basis: FockBasis) -> Self {
        let a = hilbert::annihilation(basis);
        let x = hilbert::quadrature_x(basis);
        let y = hilbert::quadrature_y(basis);
        let t = |q: Pauli, f: &Operator| hilbert::tensor(&qubit_pauli(q), f).expect("small dims");
        Self {
            number: on_field(&hilbert::number(basis)),
            excited: on_qubit(basis, &qubit_projector(Qubit::Excited)),
            sigma_minus: on_qubit(basis, &qubit_pauli(Pauli::Minus)),
            adag_sigma_minus: t(Pauli::Minus, &a.adjoint()),
            sx: on_qubit(basis, &qubit_pauli(Pauli::X)),
            sy: on_qubit(basis, &qubit_pauli(Pauli::Y)),
            sz: on_qubit(basis, &qubit_pauli(Pauli::Z)),
            x_sx: t(Pauli::X, &x),
            y_sy: t(Pauli::Y, &y),
            y_sz: t(Pauli::Z, &y),
        }
    }
}

fn plus_hc(op: Operator) -> Operator {
    let adj = op.adjoint();
    op + adj
}

const PHASE_TOL: f64 = 1e-12;

fn check_drive_settings(dev: &DeviceParams) -> Result<EffectiveParams> {
    let eff = derive_effective(dev)?;
    if dev.phi1.abs() > PHASE_TOL {
        return Err(Error::InvalidParameter { name: "phi1", reason: format!("must be 0, got {}", dev.phi1) });
    }
    if (dev.phi2 - std::f64::consts::FRAC_PI_2).abs() > PHASE_TOL {
        return Err(Error::InvalidParameter { name: "phi2", reason: format!("must be pi/2, got {}", dev.phi2) });
    }
    let mismatch = dev.nu1 + dev.omega_q - (dev.omega_r - dev.delta);
    if mismatch.abs() > 1e-9 * dev.omega_r {
        return Err(Error::InvalidParameter {
            name: "omega_q",
            reason: format!("sideband condition nu1 + omega_q = omega_r - delta violated by {mismatch:.3e} rad/us"),
        });
    }
    Ok(eff)
}

/// Lab-frame `H(t) = H0(t) + H_I(t)` with the modulated qubit, both
/// transverse drives (ω_1 = ω_0, ω_2 = ω_0 + Δω_2 with Δω_2 = K) and the
/// detuning bookkeeping `(ω_r − δ)a†a` in `H0`, `δ a†a` in `H_I`.
pub fn build_lab_frame(dev: &DeviceParams, basis: FockBasis) -> Result<TimeDependentHamiltonian> {
    let eff = check_drive_settings(dev)?;
    let ops = CompositeOps::new(basis);
    let dev = *dev;
    let omega2 = dev.omega_q + eff.delta_omega2;
    // the diagonal part without the modulation
    let static_part = &(ops.number.scale_real(dev.omega_r)) + &ops.excited.scale_real(dev.omega_q);
    let fast = dev.omega_r.max(dev.omega_q + dev.epsilon).max(omega2);
    Ok(TimeDependentHamiltonian::new(basis.composite_dim(), "lab frame H0 + H_I", Some(fast), move |t| {
        let mut h = static_part.clone();
        h += &ops.excited.scale_real(dev.epsilon * (dev.nu1 * t).cos());
        let drives = C64::from_polar(dev.drive1, dev.omega_q * t + dev.phi1)
            + C64::from_polar(dev.drive2, omega2 * t + dev.phi2);
        let coupling = &ops.adag_sigma_minus.scale_real(dev.lambda) + &ops.sigma_minus.scale(drives);
        h += &plus_hc(coupling);
        h
    }))
}

/// Interaction picture with respect to `H0`:
/// `δ a†a + e^{−iμ sin ν₁t}[λ e^{iν₁t} a† + Ω₁ + iΩ₂ e^{iΔω₂t}]σ− + H.c.`
pub fn build_interaction_picture(dev: &DeviceParams, basis: FockBasis) -> Result<TimeDependentHamiltonian> {
    let eff = check_drive_settings(dev)?;
    let ops = CompositeOps::new(basis);
    let dev = *dev;
    let mu = eff.mu;
    let dw2 = eff.delta_omega2;
    let detuning = ops.number.scale_real(dev.delta);
    let fast = dev.nu1 + dw2;
    Ok(TimeDependentHamiltonian::new(basis.composite_dim(), "interaction picture", Some(fast), move |t| {
        let modulation = C64::from_polar(1.0, -mu * (dev.nu1 * t).sin());
        let lambda_coeff = modulation * C64::from_polar(dev.lambda, dev.nu1 * t);
        let drive_coeff =
            modulation * (C64::from_polar(dev.drive1, dev.phi1) + C64::from_polar(dev.drive2, dev.phi2 + dw2 * t));
        let coupling = &ops.adag_sigma_minus.scale(lambda_coeff) + &ops.sigma_minus.scale(drive_coeff);
        &detuning + &plus_hc(coupling)
    }))
}

/// Frame rotating with `exp(iKσx t/2)` after the sideband RWA.
pub fn build_rotated_frame(dev: &DeviceParams, basis: FockBasis) -> Result<TimeDependentHamiltonian> {
    let eff = derive_effective(dev)?;
    Ok(build_rotated_frame_effective(&eff, basis))
}

/// [`build_rotated_frame`] from effective parameters directly.
pub fn build_rotated_frame_effective(eff: &EffectiveParams, basis: FockBasis) -> TimeDependentHamiltonian {
    let ops = CompositeOps::new(basis);
    let eff = *eff;
    let detuning_and_xx = &ops.number.scale_real(eff.delta) + &ops.x_sx.scale_real(eff.eta);
    let fast = eff.k.abs() + eff.delta_omega2.abs();
    TimeDependentHamiltonian::new(basis.composite_dim(), "rotated frame", Some(fast), move |t| {
        let (sk, ck) = (eff.k * t).sin_cos();
        let (sd, cd) = (eff.delta_omega2 * t).sin_cos();
        // cos(Kt)σy − sin(Kt)σz, alone and dressed with Y
        let rotated_sy = &ops.sy.scale_real(ck) - &ops.sz.scale_real(sk);
        let rotated_y_sy = &ops.y_sy.scale_real(ck) - &ops.y_sz.scale_real(sk);
        let mut h = detuning_and_xx.clone();
        h += &(&rotated_sy.scale_real(eff.omega * cd) - &ops.sx.scale_real(eff.omega * sd));
        h += &rotated_y_sy.scale_real(-eff.eta);
        h
    })
}

/// `exp(i θ σx / 2) ⊗ I`.
pub fn qubit_x_rotation(basis: FockBasis, theta: f64) -> Operator {
    let (s, c) = (0.5 * theta).sin_cos();
    let id = Operator::identity(2);
    let rot = &id.scale_real(c) + &qubit_pauli(Pauli::X).scale(I * s);
    on_qubit(basis, &rot)
}

/// Interaction-picture Hamiltonian after the sideband RWA, obtained by
/// undoing the `exp(iKσx t/2)` rotation of [`build_rotated_frame`]:
/// `H'(t) = R(t)† H''(t) R(t) + (K/2)σx`.
pub fn build_rwa_interaction(dev: &DeviceParams, basis: FockBasis) -> Result<TimeDependentHamiltonian> {
    let eff = derive_effective(dev)?;
    let rotated = build_rotated_frame_effective(&eff, basis);
    let sx_half_k = on_qubit(basis, &qubit_pauli(Pauli::X)).scale_real(0.5 * eff.k);
    let k = eff.k;
    Ok(TimeDependentHamiltonian::new(
        basis.composite_dim(),
        "interaction picture after RWA",
        Some(eff.delta_omega2),
        move |t| {
            let r = qubit_x_rotation(basis, k * t);
            &(&(&r.adjoint() * &rotated.eval(t)) * &r) + &sx_half_k
        },
    ))
}

/// Effective Rabi Hamiltonian `(Ω/2)σy + δ a†a + η σx (a + a†)`.
pub fn build_rabi(spec: &RabiModelSpec, basis: FockBasis, frame: QubitFrame) -> Result<Operator> {
    if spec.n_max != basis.n_max() {
        return Err(Error::DimensionMismatch { expected: spec.n_max + 1, found: basis.dim() });
    }
    for (name, v) in [("omega", spec.omega), ("delta", spec.delta), ("eta", spec.eta)] {
        if !v.is_finite() {
            return Err(Error::InvalidParameter { name, reason: "must be finite".into() });
        }
    }
    let ops = CompositeOps::new(basis);
    let h =
        &(&ops.sy.scale_real(0.5 * spec.omega) + &ops.number.scale_real(spec.delta)) + &ops.x_sx.scale_real(spec.eta);
    match frame {
        QubitFrame::Literal => Ok(h),
        QubitFrame::Transformed => hilbert::basis_change_s(&h),
    }
}

/// Sideband readout `g(|g⟩⟨e| a† + H.c.)`.
pub fn build_readout_jc(g: f64, basis: FockBasis) -> Result<Operator> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::InvalidParameter { name: "g", reason: format!("must be non-negative and finite, got {g}") });
    }
    let ops = CompositeOps::new(basis);
    Ok(plus_hc(ops.adag_sigma_minus.scale_real(g)))
}

/// Excitation number `a†a + |e⟩⟨e|`, conserved by the readout Hamiltonian.
pub fn excitation_number(basis: FockBasis) -> Operator {
    let ops = CompositeOps::new(basis);
    &ops.number + &ops.excited
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::j;
    use crate::params::units::mhz;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn basis(n: usize) -> FockBasis {
        FockBasis::new(n).unwrap()
    }

    fn reference() -> DeviceParams {
        DeviceParams::reference()
    }

    fn sample_times(count: usize, span: f64) -> Vec<f64> {
        // deterministic quasi-random points in [0, span)
        (0..count).map(|i| span * ((i as f64 * 0.618_033_988_749_894_9) % 1.0)).collect()
    }

    #[test]
    fn lab_frame_without_couplings_is_diagonal() {
        let b = basis(3);
        let dev = DeviceParams { lambda: 1e-12, drive1: 0.0, drive2: 0.0, ..reference() };
        let h = build_lab_frame(&dev, b).unwrap();
        for &t in &[0.0, 0.013, 0.2] {
            let m = h.eval(t);
            for i in 0..b.composite_dim() {
                for k in 0..b.composite_dim() {
                    if i != k {
                        assert!(m.get(i, k).norm() < 1e-11);
                    }
                }
            }
            for n in 0..=b.n_max() {
                let g = m.get(b.index(Qubit::Ground, n), b.index(Qubit::Ground, n)).re;
                let e = m.get(b.index(Qubit::Excited, n), b.index(Qubit::Excited, n)).re;
                let field = (dev.omega_r - dev.delta) * n as f64 + dev.delta * n as f64;
                assert_abs_diff_eq!(g, field, epsilon = 1e-9);
                let qubit = dev.omega_q + dev.epsilon * (dev.nu1 * t).cos();
                assert_abs_diff_eq!(e, field + qubit, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn lab_frame_hermitian_and_constraints() {
        let b = basis(2);
        let h = build_lab_frame(&reference(), b).unwrap();
        for t in sample_times(100, 1.0) {
            assert!(h.eval(t).is_hermitian(1e-10 * 1e5));
            assert!(h.eval(t).hermiticity_error() == 0.0);
        }
        let bad = DeviceParams { phi2: 0.0, ..reference() };
        assert!(matches!(build_lab_frame(&bad, b), Err(Error::InvalidParameter { name: "phi2", .. })));
        let bad = DeviceParams { omega_q: reference().omega_q + 1.0, ..reference() };
        assert!(matches!(build_lab_frame(&bad, b), Err(Error::InvalidParameter { name: "omega_q", .. })));
    }

    #[test]
    fn lab_frame_static_limit_matches_hand_assembly() {
        let b = basis(2);
        let dev = DeviceParams { epsilon: 0.0, ..reference() };
        let h = build_lab_frame(&dev, b).unwrap();
        let m = h.eval(0.0);
        assert_eq!(m.matrix(), h.eval(0.0).matrix());

        // order: g0 g1 g2 e0 e1 e2; at t = 0 the drive phases are φ1 = 0, φ2 = π/2
        let eff = derive_effective(&dev).unwrap();
        assert_eq!(eff.k, 2.0 * dev.drive1);
        let c = C64::new(dev.drive1, 0.0) + C64::new(0.0, dev.drive2);
        let mut want = DMatrix::<C64>::zeros(6, 6);
        for n in 0..3 {
            let nf = n as f64;
            want[(n, n)] = C64::new(dev.omega_r * nf, 0.0);
            want[(3 + n, 3 + n)] = C64::new(dev.omega_r * nf + dev.omega_q, 0.0);
            // drive: c σ− + c* σ+, σ− = |g⟩⟨e|
            want[(n, 3 + n)] += c;
            want[(3 + n, n)] += c.conj();
        }
        // λ a†σ−: |e,n⟩ → |g,n+1⟩ with √(n+1)
        for n in 0..2 {
            let v = dev.lambda * ((n + 1) as f64).sqrt();
            want[(n + 1, 3 + n)] += C64::new(v, 0.0);
            want[(3 + n, n + 1)] += C64::new(v, 0.0);
        }
        let diff = (m.matrix() - &want).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-9, "diff {diff}");
    }

    #[test]
    fn interaction_picture_limits() {
        let b = basis(2);
        let dev = DeviceParams { epsilon: 0.0, lambda: 1e-9, drive2: 0.0, ..reference() };
        let h = build_interaction_picture(&dev, b).unwrap();
        let want = &on_qubit(b, &qubit_pauli(Pauli::X)).scale_real(dev.drive1)
            + &on_field(&hilbert::number(b)).scale_real(dev.delta);
        for t in sample_times(20, 1.0) {
            assert!((&h.eval(t) - &want).max_abs() < 1e-8);
        }
    }

    #[test]
    fn interaction_picture_average_reproduces_first_sideband() {
        // period average of the λ-term coefficient e^{−iμ sin ν1t} λ e^{iν1t} is λ J1(μ)
        let b = basis(1);
        let dev = reference();
        let h = build_interaction_picture(&dev, b).unwrap();
        let (row, col) = (b.index(Qubit::Ground, 1), b.index(Qubit::Excited, 0));
        let period = std::f64::consts::TAU / dev.nu1;
        let n = 512;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            acc += h.eval(period * i as f64 / n as f64).get(row, col);
        }
        acc /= n as f64;
        // the drive term does not touch this entry
        let want = dev.lambda * j(1, dev.mu());
        assert_abs_diff_eq!(acc.re, want, epsilon = 1e-10 * want);
        assert_abs_diff_eq!(acc.im, 0.0, epsilon = 1e-10 * want);
    }

    #[test]
    fn interaction_picture_hermitian() {
        let h = build_interaction_picture(&reference(), basis(3)).unwrap();
        for t in sample_times(100, 2.0) {
            assert!(h.eval(t).hermiticity_error() <= 1e-10);
        }
    }

    #[test]
    fn rotated_frame_at_time_zero() {
        let b = basis(1);
        let eff = EffectiveParams {
            mu: 0.08,
            k: mhz(40.0),
            omega: 1.3,
            eta: 0.7,
            delta: 0.4,
            delta_omega2: mhz(40.0),
            nu2: mhz(40.0),
        };
        let h = build_rotated_frame_effective(&eff, b).eval(0.0);
        // order g0 g1 e0 e1: δ a†a + Ω σy + η(Xσx − Yσy)
        let (om, eta, d) = (eff.omega, eff.eta, eff.delta);
        let mut want = DMatrix::<C64>::zeros(4, 4);
        want[(1, 1)] = C64::new(d, 0.0);
        want[(3, 3)] = C64::new(d, 0.0);
        want[(0, 2)] = C64::new(0.0, om);
        want[(1, 3)] = C64::new(0.0, om);
        want[(2, 0)] = C64::new(0.0, -om);
        want[(3, 1)] = C64::new(0.0, -om);
        want[(1, 2)] = C64::new(2.0 * eta, 0.0);
        want[(2, 1)] = C64::new(2.0 * eta, 0.0);
        let diff = (h.matrix() - &want).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-14, "diff {diff}\n{h:?}");
    }

    #[test]
    fn rotated_frame_trivial_and_hermitian() {
        let b = basis(3);
        let eff = derive_effective(&reference()).unwrap();
        let only_detuning = EffectiveParams { eta: 0.0, omega: 0.0, ..eff };
        let h = build_rotated_frame_effective(&only_detuning, b);
        let want = on_field(&hilbert::number(b)).scale_real(eff.delta);
        let full = build_rotated_frame(&reference(), b).unwrap();
        for t in sample_times(100, 1.0) {
            assert!((&h.eval(t) - &want).max_abs() < 1e-15);
            assert!(full.eval(t).hermiticity_error() <= 1e-10);
        }
    }

    #[test]
    fn rwa_interaction_has_expected_time_zero_form() {
        // at t = 0 the rotation is the identity: H'(0) = H''(0) + (K/2)σx
        let b = basis(2);
        let dev = reference();
        let eff = derive_effective(&dev).unwrap();
        let h1 = build_rwa_interaction(&dev, b).unwrap();
        let h2 = build_rotated_frame(&dev, b).unwrap();
        let sx = on_qubit(b, &qubit_pauli(Pauli::X)).scale_real(0.5 * eff.k);
        assert!((&h1.eval(0.0) - &(&h2.eval(0.0) + &sx)).max_abs() < 1e-12);
        // and is time-independent apart from the second drive:
        // ½{Kσx + 2η(Xσx − Yσy) + 2Ω[cos(Δω2 t)σy − sin(Δω2 t)σx]} + δ a†a
        let ops = CompositeOps::new(b);
        for t in sample_times(10, 0.3) {
            let want = &(&(&ops.sx.scale_real(0.5 * eff.k) + &(&ops.x_sx - &ops.y_sy).scale_real(eff.eta))
                + &(&ops.sy.scale_real(eff.omega * (eff.delta_omega2 * t).cos())
                    - &ops.sx.scale_real(eff.omega * (eff.delta_omega2 * t).sin())))
                + &ops.number.scale_real(eff.delta);
            let diff = (&h1.eval(t) - &want).max_abs();
            assert!(diff < 1e-9, "t = {t}, diff = {diff}");
        }
    }

    #[test]
    fn rabi_zero_and_decoupled_spectrum() {
        let b = basis(4);
        let zero = RabiModelSpec { omega: 0.0, delta: 0.0, eta: 0.0, n_max: 4 };
        assert_eq!(build_rabi(&zero, b, QubitFrame::Literal).unwrap().max_abs(), 0.0);

        let spec = RabiModelSpec { omega: 1.7, delta: 0.3, eta: 0.0, n_max: 4 };
        let ev = build_rabi(&spec, b, QubitFrame::Literal).unwrap().hermitian_eigenvalues();
        let mut want: Vec<f64> = (0..=4).flat_map(|n| [0.85 + 0.3 * n as f64, -0.85 + 0.3 * n as f64]).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&want) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn rabi_pure_coupling_spectrum() {
        // Ω = δ = 0: H = η σx ⊗ X; spectrum = η·(±1)·eig(X)
        let eta = 0.9;
        let b1 = basis(1);
        let h = build_rabi(&RabiModelSpec { omega: 0.0, delta: 0.0, eta, n_max: 1 }, b1, QubitFrame::Literal).unwrap();
        let ev = h.hermitian_eigenvalues();
        for (a, b) in ev.iter().zip(&[-eta, -eta, eta, eta]) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        // n_max = 2: X has eigenvalues {0, ±√3}
        let b2 = basis(2);
        let h = build_rabi(&RabiModelSpec { omega: 0.0, delta: 0.0, eta, n_max: 2 }, b2, QubitFrame::Literal).unwrap();
        let s = 3f64.sqrt() * eta;
        for (a, b) in h.hermitian_eigenvalues().iter().zip(&[-s, -s, 0.0, 0.0, s, s]) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn rabi_transformed_frame() {
        let b = basis(3);
        let spec = RabiModelSpec { omega: 1.1, delta: 0.2, eta: 0.5, n_max: 3 };
        let lit = build_rabi(&spec, b, QubitFrame::Literal).unwrap();
        let tr = build_rabi(&spec, b, QubitFrame::Transformed).unwrap();
        let ops = CompositeOps::new(b);
        let want = &(&ops.sz.scale_real(0.55) + &ops.number.scale_real(0.2)) + &ops.x_sx.scale_real(0.5);
        assert!((&tr - &want).max_abs() < 1e-14);
        for (x, y) in lit.hermitian_eigenvalues().iter().zip(&tr.hermitian_eigenvalues()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        assert!(build_rabi(&spec, basis(4), QubitFrame::Literal).is_err());
    }

    #[test]
    fn truncation_guard() {
        let spec = RabiModelSpec { omega: 1.0, delta: 1.0, eta: 1.0, n_max: 8 };
        assert!(spec.check_truncation(2.0).is_ok());
        assert!(spec.check_truncation(2.5).is_err());
        assert!(spec.check_truncation(0.1).is_ok());
    }

    #[test]
    fn readout_ladder() {
        let b = basis(5);
        let g = 0.37;
        let h = build_readout_jc(g, b).unwrap();
        for n in 0..b.n_max() {
            let v = h.get(b.index(Qubit::Ground, n + 1), b.index(Qubit::Excited, n));
            assert_abs_diff_eq!(v.re, g * ((n + 1) as f64).sqrt(), epsilon = 1e-15);
        }
        assert_eq!(h.commutator(&excitation_number(b)).max_abs(), 0.0);
        assert_eq!(build_readout_jc(0.0, b).unwrap().max_abs(), 0.0);
        assert!(build_readout_jc(-1.0, b).is_err());
    }

    #[test]
    fn qubit_rotation_is_unitary() {
        let b = basis(2);
        let r = qubit_x_rotation(b, 0.7);
        assert!((&(&r.adjoint() * &r) - &Operator::identity(6)).max_abs() < 1e-15);
    }
}
