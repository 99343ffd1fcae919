//! Built-in scenarios, written in the same format as user configs.

const DEVICE: &str = "
[device]
omega_r = 6656 MHz_over_2pi
omega_s = 6004 MHz_over_2pi
lambda = 40 MHz_over_2pi
drive1 = 20 MHz_over_2pi
delta = 0.18 MHz_over_2pi
kappa = 5 MHz
";

const ETA_GRID_10: &str = "0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0 MHz_over_2pi";

pub const NAMES: [&str; 8] = ["fig2", "figS3a", "figS3b", "figS4a", "figS4b", "fig3a", "fig3b", "figS2"];

/// Config text of a preset.
pub fn preset(name: &str) -> Option<String> {
    let text = match name {
        "fig2" => format!(
            "[scenario]
name = fig2
model = interaction
initial_state = ground
t_final = 0.5 us
sample_dt = 0.0001 us
n_max = 10
observables = p_e, n
envelopes = true
{DEVICE}epsilon = 56.7 MHz_over_2pi
nu1 = 708.7 MHz_over_2pi
omega = 0.5 MHz_over_2pi
"
        ),
        "figS3a" | "figS3b" => format!(
            "[scenario]
name = {name}
model = rabi
initial_state = plus_vacuum
t_final = 3 us
sample_dt = 0.01 us
n_max = 20
observables = n
{DEVICE}eta = 0.8 MHz_over_2pi
omega = 1 MHz_over_2pi

[sweep]
eta_grid = {ETA_GRID_10}
t_probe = 3 us
slope_window = 2, 3 us
"
        ),
        "figS4a" | "figS4b" => format!(
            "[scenario]
name = {name}
model = rabi_unitary
initial_state = plus_vacuum
t_final = 3 us
sample_dt = 0.01 us
n_max = 160
observables = n
{DEVICE}eta = 0.8 MHz_over_2pi
omega = 1 MHz_over_2pi

[sweep]
eta_grid = {ETA_GRID_10}
t_probe = 3 us
slope_window = 2, 3 us
"
        ),
        "fig3a" | "fig3b" => format!(
            "[scenario]
name = {name}
model = rabi
initial_state = plus_vacuum
t_final = 3 us
sample_dt = 0.01 us
n_max = 20
observables = n
seed = 1
{DEVICE}eta = {eta} MHz_over_2pi
omega = 1 MHz_over_2pi

[tomography]
points = 200
n_fit = 8
noise = 0
",
            eta = if name == "fig3a" { "0.8" } else { "0.9" }
        ),
        "figS2" => format!(
            "[scenario]
name = figS2
model = rabi
t_final = 3 us
sample_dt = 0.01 us
{DEVICE}eta = 0.8 MHz_over_2pi
omega = 1 MHz_over_2pi

[sweep]
eta_grid = {ETA_GRID_10}
"
        ),
        _ => return None,
    };
    Some(text)
}
