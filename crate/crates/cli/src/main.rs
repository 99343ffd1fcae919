use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dqrm_cli::output::{write_csv, write_json, Table};
use dqrm_cli::{load_config, presets, runner, tomo, CliError, KappaConvention, Result, ScenarioConfig};

#[derive(Parser)]
#[command(name = "dqrm", version, about = "Dissipative quantum Rabi model simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario config file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario instead of a config file.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweep points (0 = all cores).
    #[arg(long, value_name = "N", default_value_t = 0)]
    jobs: usize,
    /// Overrides the config seed.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// How a decay rate tagged `MHz` is read.
    #[arg(long, value_enum, default_value_t = KappaConvention::Rate)]
    kappa_convention: KappaConvention,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the scenario and write the time series.
    Simulate(Common),
    /// Photon number at the probe time, late slope and steady state versus η.
    Sweep(Common),
    /// Null-space steady states.
    Steady(Common),
    /// Fit a photon-number distribution to a Rabi signal.
    Tomography(Common),
    /// Modulation parameters versus η.
    Params(Common),
    /// Run the invariant checks on a config.
    Check(Common),
    /// List the presets, or print one.
    Presets { name: Option<String> },
}

fn load(c: &Common) -> Result<ScenarioConfig> {
    let mut cfg = load_config(c.config.as_deref(), c.preset.as_deref(), c.kappa_convention)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn write(out: &Path, stem: &str, table: &Table, meta: &serde_json::Value) -> Result<()> {
    let csv = write_csv(out, stem, table)?;
    write_json(&out.join(format!("{stem}.meta.json")), meta)?;
    println!("wrote {}", csv.display());
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(c) => {
            let cfg = load(&c)?;
            let sim = runner::simulate(&cfg, c.jobs)?;
            write(&c.out, &cfg.name, &sim.table, &sim.meta)
        }
        Command::Sweep(c) => {
            let cfg = load(&c)?;
            let sweep = runner::run_sweep(&cfg, c.jobs)?;
            write(&c.out, &format!("{}_sweep", cfg.name), &sweep.table, &sweep.meta)
        }
        Command::Steady(c) => {
            let cfg = load(&c)?;
            let st = runner::run_steady(&cfg, c.jobs)?;
            write(&c.out, &format!("{}_steady", cfg.name), &st.table, &st.meta)
        }
        Command::Tomography(c) => {
            let cfg = load(&c)?;
            let t = tomo::run_tomography(&cfg)?;
            let stem = format!("{}_tomography", cfg.name);
            write_json(&c.out.join(format!("{stem}.json")), &t.json)?;
            write(&c.out, &stem, &t.table, &t.meta)
        }
        Command::Params(c) => {
            let cfg = load(&c)?;
            let (table, meta) = runner::params_table(&cfg)?;
            write(&c.out, &format!("{}_params", cfg.name), &table, &meta)
        }
        Command::Check(c) => {
            let cfg = load(&c)?;
            let items = runner::run_check(&cfg);
            for i in &items {
                println!("{} {}: {}", if i.passed { "PASS" } else { "FAIL" }, i.name, i.detail);
            }
            match items.iter().filter(|i| !i.passed).count() {
                0 => Ok(()),
                n => Err(CliError::ChecksFailed(n)),
            }
        }
        Command::Presets { name: None } => {
            presets::NAMES.iter().for_each(|n| println!("{n}"));
            Ok(())
        }
        Command::Presets { name: Some(n) } => {
            let text =
                presets::preset(&n).ok_or_else(|| CliError::config("preset", format!("unknown preset `{n}`")))?;
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
