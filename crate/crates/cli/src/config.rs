//! Scenario configuration files.
//!
//! ```text
//! # comment
//! [section]
//! key = value [unit]
//! key = v1, v2, v3 [unit]
//! ```
//!
//! Sections are `scenario`, `device` or `effective` (exactly one), and the
//! optional `sweep` and `tomography`. Every frequency, rate and time needs a
//! unit tag:
//!
//! | tag            | meaning                                        |
//! |----------------|------------------------------------------------|
//! | `MHz_over_2pi` | value is f in MHz; stored as 2π·f rad/μs       |
//! | `rad_per_us`   | angular frequency or rate, stored as is        |
//! | `per_us`       | decay rate in 1/μs (rates only)                |
//! | `MHz`          | decay rate quoted "in MHz" (rates only); read per `--kappa-convention` |
//! | `us`           | time in μs                                     |
//! | `rad`          | phase                                          |

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::path::PathBuf;

use dqrm_core::params::{derive_effective, solve_constraint, DeviceParams, EffectiveParams};
use dqrm_core::C64;

use crate::error::{CliError, Context, Result};

/// How a κ tagged `MHz` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum KappaConvention {
    /// κ = value (1/μs).
    #[default]
    Rate,
    /// κ = 2π·value.
    Over2pi,
}

impl KappaConvention {
    pub fn factor(self) -> f64 {
        match self {
            Self::Rate => 1.0,
            Self::Over2pi => TAU,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Rate => "rate",
            Self::Over2pi => "over2pi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    LabFrame,
    Interaction,
    Rotated,
    Rabi,
    RabiUnitary,
}

impl Model {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "lab_frame" => Self::LabFrame,
            "interaction" => Self::Interaction,
            "rotated" => Self::Rotated,
            "rabi" => Self::Rabi,
            "rabi_unitary" => Self::RabiUnitary,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::LabFrame => "lab_frame",
            Self::Interaction => "interaction",
            Self::Rotated => "rotated",
            Self::Rabi => "rabi",
            Self::RabiUnitary => "rabi_unitary",
        }
    }

    pub fn is_rabi(self) -> bool {
        matches!(self, Self::Rabi | Self::RabiUnitary)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Ground,
    Excited,
    PlusVacuum,
    /// Amplitudes over qubit ⊗ field, qubit index major; normalized on use.
    Custom(Vec<C64>),
}

impl InitialState {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ground => "ground",
            Self::Excited => "excited",
            Self::PlusVacuum => "plus_vacuum",
            Self::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulation {
    Explicit {
        epsilon: f64,
        nu1: f64,
    },
    /// Solve the sweet-spot constraint for this η.
    TargetEta(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transverse {
    Drive2(f64),
    /// Pick Ω_2 so that Ω_2 J_0(μ) equals this.
    EffectiveOmega(f64),
}

/// Device block before the modulation and the second drive are resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceTemplate {
    pub omega_r: f64,
    pub omega_s: f64,
    pub omega_q: Option<f64>,
    pub lambda: f64,
    pub modulation: Modulation,
    pub drive1: f64,
    pub transverse: Transverse,
    pub phi1: f64,
    pub phi2: f64,
    pub delta: f64,
    pub kappa: f64,
}

impl DeviceTemplate {
    /// Concrete device parameters, optionally for another η. When η is
    /// solved for, ω_q is placed on the sideband resonance.
    pub fn resolve(&self, eta: Option<f64>) -> Result<DeviceParams> {
        let mut dev = DeviceParams {
            omega_r: self.omega_r,
            omega_s: self.omega_s,
            omega_q: 0.0,
            lambda: self.lambda,
            epsilon: 0.0,
            nu1: self.omega_r - self.omega_s,
            drive1: self.drive1,
            drive2: 0.0,
            phi1: self.phi1,
            phi2: self.phi2,
            delta: self.delta,
            kappa: self.kappa,
        };
        let target = match (eta, self.modulation) {
            (Some(eta), _) | (None, Modulation::TargetEta(eta)) => Some(eta),
            (None, Modulation::Explicit { epsilon, nu1 }) => {
                dev.epsilon = epsilon;
                dev.nu1 = nu1;
                None
            }
        };
        if let Some(eta) = target {
            if self.omega_q.is_some() {
                return Err(CliError::config("device.omega_q", "cannot be set when eta is solved for"));
            }
            dev = solve_constraint(&dev, eta).context(|| format!("solving the modulation for eta = {eta} rad/us"))?;
        }
        dev.omega_q = self.omega_q.unwrap_or(dev.omega_r - dev.delta - dev.nu1);
        dev = match self.transverse {
            Transverse::Drive2(v) => DeviceParams { drive2: v, ..dev },
            Transverse::EffectiveOmega(w) => dev.with_effective_omega(w),
        };
        dev.validate().context(|| "device parameters".into())?;
        Ok(dev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveBlock {
    pub omega: f64,
    pub delta: f64,
    pub eta: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamBlock {
    Device(DeviceTemplate),
    Effective(EffectiveBlock),
}

impl ParamBlock {
    pub fn kappa(&self) -> f64 {
        match self {
            Self::Device(d) => d.kappa,
            Self::Effective(e) => e.kappa,
        }
    }

    /// `(Ω, δ, η)` of the effective Rabi model, optionally for another η.
    pub fn rabi_parameters(&self, eta: Option<f64>) -> Result<(f64, f64, f64)> {
        match self {
            Self::Device(_) => {
                let eff = self.effective(eta)?.expect("device block");
                Ok((eff.omega, eff.delta, eff.eta))
            }
            Self::Effective(e) => Ok((e.omega, e.delta, eta.unwrap_or(e.eta))),
        }
    }

    /// Effective parameters derived from a device block.
    pub fn effective(&self, eta: Option<f64>) -> Result<Option<EffectiveParams>> {
        match self {
            Self::Device(d) => {
                let dev = d.resolve(eta)?;
                Ok(Some(derive_effective(&dev).context(|| "deriving effective parameters".into())?))
            }
            Self::Effective(_) => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    /// η values in rad/μs.
    pub eta_grid: Vec<f64>,
    pub t_probe: f64,
    pub slope_window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographySection {
    pub g: Option<f64>,
    pub kappa: Option<f64>,
    pub t_final: Option<f64>,
    pub points: usize,
    pub n_fit: usize,
    pub noise: f64,
    pub ridge: Option<f64>,
    pub signal_csv: Option<PathBuf>,
    /// Synthesize from this distribution instead of simulating the scenario.
    pub truth: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: Model,
    pub params: ParamBlock,
    pub initial_state: InitialState,
    pub t_final: f64,
    pub sample_dt: f64,
    pub n_max: usize,
    pub observables: Vec<String>,
    pub seed: u64,
    /// Add fast-oscillation envelopes and effective-model references.
    pub envelopes: bool,
    pub sweep: Option<SweepSection>,
    pub tomography: Option<TomographySection>,
    pub kappa_convention: KappaConvention,
    /// The text the configuration was parsed from.
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    MhzOver2pi,
    RadPerUs,
    PerUs,
    Mhz,
    Us,
    Rad,
}

impl Unit {
    fn parse(tag: &str) -> Option<Self> {
        Some(match tag {
            "MHz_over_2pi" => Self::MhzOver2pi,
            "rad_per_us" => Self::RadPerUs,
            "per_us" => Self::PerUs,
            "MHz" => Self::Mhz,
            "us" => Self::Us,
            "rad" => Self::Rad,
            _ => return None,
        })
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MhzOver2pi => "MHz_over_2pi",
            Self::RadPerUs => "rad_per_us",
            Self::PerUs => "per_us",
            Self::Mhz => "MHz",
            Self::Us => "us",
            Self::Rad => "rad",
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Frequency,
    Rate,
    Time,
    Phase,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

struct Section {
    name: String,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn take(&mut self, key: &str) -> Option<(String, Entry)> {
        self.entries.remove(key).map(|e| (self.path(key), e))
    }

    fn required(&mut self, key: &str) -> Result<(String, Entry)> {
        self.take(key).ok_or_else(|| CliError::config(self.path(key), "missing"))
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            Some((key, e)) => {
                Err(CliError::config(format!("{}.{key}", self.name), format!("unknown key (line {})", e.line)))
            }
            None => Ok(()),
        }
    }
}

fn field_err(path: &str, e: &Entry, msg: impl fmt::Display) -> CliError {
    CliError::config(path, format!("{msg} (line {})", e.line))
}

/// Numbers and the optional trailing unit tag.
fn split_values(path: &str, e: &Entry) -> Result<(Vec<f64>, Option<Unit>)> {
    let text = e.value.trim();
    let (body, unit) = match text.rsplit_once(char::is_whitespace) {
        Some((body, last)) if last.parse::<f64>().is_err() && !last.ends_with(',') => {
            let unit = Unit::parse(last).ok_or_else(|| field_err(path, e, format!("unknown unit tag `{last}`")))?;
            (body, Some(unit))
        }
        _ if text.parse::<f64>().is_err() && Unit::parse(text).is_some() => {
            return Err(field_err(path, e, "missing value"));
        }
        _ => (text, None),
    };
    let values = body
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().map_err(|_| field_err(path, e, format!("`{s}` is not a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((values, unit))
}

fn convert(path: &str, e: &Entry, unit: Option<Unit>, kind: Kind, conv: KappaConvention) -> Result<f64> {
    let unit = unit.ok_or_else(|| field_err(path, e, "unit tag is mandatory"))?;
    let factor = match (kind, unit) {
        (Kind::Frequency | Kind::Rate, Unit::MhzOver2pi) => TAU,
        (Kind::Frequency | Kind::Rate, Unit::RadPerUs) => 1.0,
        (Kind::Rate, Unit::PerUs) => 1.0,
        (Kind::Rate, Unit::Mhz) => conv.factor(),
        (Kind::Time, Unit::Us) => 1.0,
        (Kind::Phase, Unit::Rad) => 1.0,
        _ => {
            let allowed = match kind {
                Kind::Frequency => "MHz_over_2pi or rad_per_us",
                Kind::Rate => "per_us, MHz, MHz_over_2pi or rad_per_us",
                Kind::Time => "us",
                Kind::Phase => "rad",
            };
            return Err(field_err(path, e, format!("unit `{unit}` not allowed here; use {allowed}")));
        }
    };
    Ok(factor)
}

struct Reader {
    conv: KappaConvention,
}

impl Reader {
    fn quantity(&self, (path, e): &(String, Entry), kind: Kind) -> Result<f64> {
        let (v, unit) = split_values(path, e)?;
        if v.len() != 1 {
            return Err(field_err(path, e, "expected a single value"));
        }
        let x = v[0] * convert(path, e, unit, kind, self.conv)?;
        if !x.is_finite() {
            return Err(field_err(path, e, "must be finite"));
        }
        Ok(x)
    }

    fn list(&self, (path, e): &(String, Entry), kind: Kind) -> Result<Vec<f64>> {
        let (v, unit) = split_values(path, e)?;
        let f = convert(path, e, unit, kind, self.conv)?;
        Ok(v.into_iter().map(|x| x * f).collect())
    }
}

fn plain_number(entry: &(String, Entry)) -> Result<f64> {
    let (path, e) = entry;
    let (v, unit) = split_values(path, e)?;
    if unit.is_some() || v.len() != 1 {
        return Err(field_err(path, e, "expected a single dimensionless number"));
    }
    Ok(v[0])
}

fn plain_list(entry: &(String, Entry)) -> Result<Vec<f64>> {
    let (path, e) = entry;
    let (v, unit) = split_values(path, e)?;
    if unit.is_some() {
        return Err(field_err(path, e, "expected dimensionless numbers"));
    }
    Ok(v)
}

fn integer(entry: &(String, Entry)) -> Result<u64> {
    let (path, e) = entry;
    e.value.trim().parse::<u64>().map_err(|_| field_err(path, e, "expected a non-negative integer"))
}

fn boolean(entry: &(String, Entry)) -> Result<bool> {
    let (path, e) = entry;
    match e.value.trim() {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(field_err(path, e, "expected true or false")),
    }
}

fn sections(text: &str) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !["scenario", "device", "effective", "sweep", "tomography"].contains(&name) {
                return Err(CliError::config(name, format!("unknown section (line {line})")));
            }
            if out.iter().any(|s| s.name == name) {
                return Err(CliError::config(name, format!("duplicate section (line {line})")));
            }
            out.push(Section { name: name.to_string(), entries: BTreeMap::new() });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {line}"), "expected `key = value`"))?;
        let key = key.trim();
        let section =
            out.last_mut().ok_or_else(|| CliError::config(key, format!("key outside a section (line {line})")))?;
        if section.entries.contains_key(key) {
            return Err(CliError::config(section.path(key), format!("duplicate key (line {line})")));
        }
        section.entries.insert(key.to_string(), Entry { value: value.trim().to_string(), line });
    }
    Ok(out)
}

pub fn parse_config(text: &str, conv: KappaConvention) -> Result<ScenarioConfig> {
    let mut by_name: BTreeMap<String, Section> = sections(text)?.into_iter().map(|s| (s.name.clone(), s)).collect();
    let r = Reader { conv };

    let mut sc = by_name.remove("scenario").ok_or_else(|| CliError::config("scenario", "section is missing"))?;
    let name = sc.required("name")?.1.value;
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.') {
        return Err(CliError::config("scenario.name", "must be non-empty and use only [A-Za-z0-9_.-]"));
    }
    let model = {
        let (path, e) = sc.required("model")?;
        Model::parse(&e.value)
            .ok_or_else(|| field_err(&path, &e, "expected lab_frame, interaction, rotated, rabi or rabi_unitary"))?
    };
    let initial_state = match sc.take("initial_state") {
        None => InitialState::PlusVacuum,
        Some((path, e)) => match e.value.as_str() {
            "ground" => InitialState::Ground,
            "excited" => InitialState::Excited,
            "plus_vacuum" => InitialState::PlusVacuum,
            "custom" => {
                let (path, e) = sc.take("initial_vector").ok_or_else(|| {
                    CliError::config("scenario.initial_vector", "required for a custom initial state")
                })?;
                InitialState::Custom(parse_amplitudes(&path, &e)?)
            }
            _ => return Err(field_err(&path, &e, "expected ground, excited, plus_vacuum or custom")),
        },
    };
    if !matches!(initial_state, InitialState::Custom(_)) {
        if let Some((path, e)) = sc.take("initial_vector") {
            return Err(field_err(&path, &e, "only allowed with initial_state = custom"));
        }
    }
    let t_final = r.quantity(&sc.required("t_final")?, Kind::Time)?;
    let sample_dt = r.quantity(&sc.required("sample_dt")?, Kind::Time)?;
    if !(t_final > 0.0) || !(sample_dt > 0.0) || sample_dt > t_final {
        return Err(CliError::config("scenario.sample_dt", "need 0 < sample_dt <= t_final"));
    }
    let n_max = match sc.take("n_max") {
        Some(e) => integer(&e)? as usize,
        None => 20,
    };
    let observables = match sc.take("observables") {
        Some((_, e)) => e.value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        None => vec!["p_e".to_string(), "n".to_string()],
    };
    let seed = match sc.take("seed") {
        Some(e) => integer(&e)?,
        None => 0,
    };
    let envelopes = match sc.take("envelopes") {
        Some(e) => boolean(&e)?,
        None => false,
    };
    sc.finish()?;

    let params = match (by_name.remove("device"), by_name.remove("effective")) {
        (Some(_), Some(_)) => return Err(CliError::config("device", "give either [device] or [effective], not both")),
        (None, None) => return Err(CliError::config("device", "a [device] or [effective] section is required")),
        (Some(mut d), None) => {
            let t = parse_device(&mut d, &r)?;
            d.finish()?;
            ParamBlock::Device(t)
        }
        (None, Some(mut e)) => {
            let b = EffectiveBlock {
                omega: r.quantity(&e.required("omega")?, Kind::Frequency)?,
                delta: r.quantity(&e.required("delta")?, Kind::Frequency)?,
                eta: r.quantity(&e.required("eta")?, Kind::Frequency)?,
                kappa: r.quantity(&e.required("kappa")?, Kind::Rate)?,
            };
            e.finish()?;
            ParamBlock::Effective(b)
        }
    };

    let sweep = match by_name.remove("sweep") {
        None => None,
        Some(mut s) => {
            let eta_grid = r.list(&s.required("eta_grid")?, Kind::Frequency)?;
            let t_probe = match s.take("t_probe") {
                Some(e) => r.quantity(&e, Kind::Time)?,
                None => t_final,
            };
            let slope_window = match s.take("slope_window") {
                Some(e) => {
                    let w = r.list(&e, Kind::Time)?;
                    if w.len() != 2 || !(w[0] < w[1]) {
                        return Err(field_err(&e.0, &e.1, "expected `start, end` with start < end"));
                    }
                    (w[0], w[1])
                }
                None => ((t_probe - 1.0).max(0.0), t_probe),
            };
            s.finish()?;
            Some(SweepSection { eta_grid, t_probe, slope_window })
        }
    };

    let tomography = match by_name.remove("tomography") {
        None => None,
        Some(mut s) => {
            let g = s.take("g").map(|e| r.quantity(&e, Kind::Frequency)).transpose()?;
            let kappa = s.take("kappa").map(|e| r.quantity(&e, Kind::Rate)).transpose()?;
            let t_final = s.take("t_final").map(|e| r.quantity(&e, Kind::Time)).transpose()?;
            let points = s.take("points").map(|e| integer(&e)).transpose()?.unwrap_or(200) as usize;
            let n_fit = s.take("n_fit").map(|e| integer(&e)).transpose()?.unwrap_or(8) as usize;
            let noise = s.take("noise").map(|e| plain_number(&e)).transpose()?.unwrap_or(0.0);
            let ridge = s.take("ridge").map(|e| plain_number(&e)).transpose()?;
            let signal_csv = s.take("signal_csv").map(|(_, e)| PathBuf::from(e.value));
            let truth = s.take("truth").map(|e| plain_list(&e)).transpose()?;
            s.finish()?;
            if !(noise >= 0.0) {
                return Err(CliError::config("tomography.noise", "must be >= 0"));
            }
            Some(TomographySection { g, kappa, t_final, points, n_fit, noise, ridge, signal_csv, truth })
        }
    };

    let cfg = ScenarioConfig {
        name,
        model,
        params,
        initial_state,
        t_final,
        sample_dt,
        n_max,
        observables,
        seed,
        envelopes,
        sweep,
        tomography,
        kappa_convention: conv,
        source: text.to_string(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn parse_device(d: &mut Section, r: &Reader) -> Result<DeviceTemplate> {
    let f = |d: &mut Section, key: &str| -> Result<f64> { r.quantity(&d.required(key)?, Kind::Frequency) };
    let omega_r = f(d, "omega_r")?;
    let omega_s = f(d, "omega_s")?;
    let omega_q = d.take("omega_q").map(|e| r.quantity(&e, Kind::Frequency)).transpose()?;
    let lambda = f(d, "lambda")?;
    let modulation = match (d.take("eta"), d.take("epsilon"), d.take("nu1")) {
        (Some(e), None, None) => Modulation::TargetEta(r.quantity(&e, Kind::Frequency)?),
        (None, Some(eps), Some(nu)) => {
            Modulation::Explicit { epsilon: r.quantity(&eps, Kind::Frequency)?, nu1: r.quantity(&nu, Kind::Frequency)? }
        }
        _ => return Err(CliError::config("device.eta", "give either eta, or both epsilon and nu1")),
    };
    let drive1 = f(d, "drive1")?;
    let transverse = match (d.take("drive2"), d.take("omega")) {
        (Some(e), None) => Transverse::Drive2(r.quantity(&e, Kind::Frequency)?),
        (None, Some(e)) => Transverse::EffectiveOmega(r.quantity(&e, Kind::Frequency)?),
        _ => return Err(CliError::config("device.drive2", "give exactly one of drive2 and omega")),
    };
    let phi1 = d.take("phi1").map(|e| r.quantity(&e, Kind::Phase)).transpose()?.unwrap_or(0.0);
    let phi2 = d.take("phi2").map(|e| r.quantity(&e, Kind::Phase)).transpose()?.unwrap_or(FRAC_PI_2);
    let delta = f(d, "delta")?;
    let kappa = r.quantity(&d.required("kappa")?, Kind::Rate)?;
    Ok(DeviceTemplate { omega_r, omega_s, omega_q, lambda, modulation, drive1, transverse, phi1, phi2, delta, kappa })
}

/// `re im, re im, …`
fn parse_amplitudes(path: &str, e: &Entry) -> Result<Vec<C64>> {
    e.value
        .split(',')
        .map(|pair| {
            let parts: Vec<&str> = pair.split_whitespace().collect();
            let num = |s: &str| s.parse::<f64>().map_err(|_| field_err(path, e, format!("`{s}` is not a number")));
            match parts.as_slice() {
                [re] => Ok(C64::new(num(re)?, 0.0)),
                [re, im] => Ok(C64::new(num(re)?, num(im)?)),
                _ => Err(field_err(path, e, "amplitudes are `re im` pairs separated by commas")),
            }
        })
        .collect()
}

impl ScenarioConfig {
    fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(CliError::config("scenario.n_max", "must be at least 1"));
        }
        if let InitialState::Custom(v) = &self.initial_state {
            let dim = 2 * (self.n_max + 1);
            if v.len() != dim {
                return Err(CliError::config(
                    "scenario.initial_vector",
                    format!("needs {dim} amplitudes, got {}", v.len()),
                ));
            }
        }
        if !self.model.is_rabi() && !matches!(self.params, ParamBlock::Device(_)) {
            return Err(CliError::config("scenario.model", format!("{} needs a [device] section", self.model.name())));
        }
        if self.envelopes && !matches!(self.model, Model::LabFrame | Model::Interaction) {
            return Err(CliError::config("scenario.envelopes", "only available for lab_frame and interaction"));
        }
        for o in &self.observables {
            crate::runner::observable_is_known(o, self.n_max)
                .then_some(())
                .ok_or_else(|| CliError::config("scenario.observables", format!("unknown observable `{o}`")))?;
        }
        if let Some(s) = &self.sweep {
            if s.eta_grid.iter().any(|&e| !(e > 0.0)) {
                return Err(CliError::config("sweep.eta_grid", "values must be positive"));
            }
            if s.t_probe > self.t_final + 1e-12 || s.slope_window.1 > self.t_final + 1e-12 || s.slope_window.0 < 0.0 {
                return Err(CliError::config("sweep.t_probe", "t_probe and slope_window must lie within [0, t_final]"));
            }
        }
        if let Some(t) = &self.tomography {
            if t.n_fit == 0 {
                return Err(CliError::config("tomography.n_fit", "must be at least 1"));
            }
            if t.points < 2 {
                return Err(CliError::config("tomography.points", "need at least 2"));
            }
        }
        Ok(())
    }

    /// η values to run: the sweep grid, or the scenario's own η.
    pub fn eta_points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.eta_grid.iter().map(|&e| Some(e)).collect(),
            None => vec![None],
        }
    }
}
