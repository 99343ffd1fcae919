use dqrm_core::dynamics::steady_state;
use dqrm_core::models::{build_rabi, QubitFrame, RabiModelSpec};
use dqrm_core::params::units::mhz;
use dqrm_core::params::{derive_effective, solve_constraint, DeviceParams};
use dqrm_core::tomography::{
    compute_basis_responses, fit_distribution, forward_signal, forward_signal_from_field_state, FitOptions,
    PhotonDistribution,
};
use dqrm_core::FockBasis;

// compiled device → effective model → steady state → readout signal → fit
#[test]
fn steady_state_distribution_survives_readout_and_fit() {
    let dev = solve_constraint(&DeviceParams::reference(), mhz(0.3)).unwrap().with_sideband_resonance();
    let eff = derive_effective(&dev).unwrap();
    assert!((eff.eta - mhz(0.3)).abs() < 1e-10 * mhz(0.3));

    let basis = FockBasis::new(12).unwrap();
    let h = build_rabi(&RabiModelSpec::from_effective(&eff, 12), basis, QubitFrame::Literal).unwrap();
    let ss = steady_state(&h, dev.kappa, basis).unwrap();
    let truth = PhotonDistribution::from_state(&ss.state, basis).unwrap();
    assert!(truth.tail_mass(7) < 1e-6, "tail {}", truth.tail_mass(7));

    let g = eff.eta;
    let times: Vec<f64> = (0..200).map(|k| 3.0 / g * k as f64 / 199.0).collect();
    let field = ss.state.field_reduced(basis).unwrap();
    let direct = forward_signal_from_field_state(&field, g, dev.kappa, &times).unwrap();
    let via_populations = forward_signal(&truth, g, dev.kappa, &times).unwrap();
    for (a, b) in direct.p_e.iter().zip(&via_populations.p_e) {
        assert!((a - b).abs() < 1e-9);
    }

    let responses = compute_basis_responses(g, dev.kappa, &times, 6).unwrap();
    let fit = fit_distribution(&direct, &responses, &FitOptions { ridge: None }).unwrap();
    let p = fit.distribution.probabilities();
    for (n, want) in truth.probabilities().iter().take(7).enumerate() {
        assert!((p[n] - want).abs() < 1e-4, "P{n}: {} vs {want}", p[n]);
    }
    assert!((fit.distribution.mean() - truth.mean()).abs() < 1e-4);
}
