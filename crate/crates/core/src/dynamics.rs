//! Lindblad evolution with photon loss `κ D[a]`, unitary evolution, and
//! steady states.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::{self, on_field, DensityMatrix, FockBasis, Operator, Qubit, C64, I, ONE, ZERO};
use crate::models::TimeDependentHamiltonian;

/// Static or explicitly time-dependent Hamiltonian.
#[derive(Debug, Clone)]
pub enum Hamiltonian {
    Static(Operator),
    TimeDependent(TimeDependentHamiltonian),
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        match self {
            Self::Static(h) => h.dim(),
            Self::TimeDependent(h) => h.dim(),
        }
    }

    pub fn at(&self, t: f64) -> Operator {
        match self {
            Self::Static(h) => h.clone(),
            Self::TimeDependent(h) => h.eval(t),
        }
    }

    pub fn fast_frequency(&self) -> Option<f64> {
        match self {
            Self::Static(_) => None,
            Self::TimeDependent(h) => h.fast_frequency(),
        }
    }

    fn is_static(&self) -> bool {
        matches!(self, Self::Static(_))
    }

    /// Largest `‖H(t)‖∞` over a handful of probe times in `[0, t_final]`.
    fn norm_bound(&self, t_final: f64) -> f64 {
        match self {
            Self::Static(h) => h.inf_norm(),
            Self::TimeDependent(h) => {
                let span = match h.fast_frequency() {
                    Some(f) if f > 0.0 => (TAU / f).min(t_final),
                    _ => t_final,
                };
                let mut probes: Vec<f64> = (0..16).map(|k| span * k as f64 / 16.0).collect();
                probes.push(0.5 * t_final);
                probes.push(t_final);
                probes.into_iter().map(|t| h.eval(t).inf_norm()).fold(0.0, f64::max)
            }
        }
    }
}

impl From<Operator> for Hamiltonian {
    fn from(h: Operator) -> Self {
        Self::Static(h)
    }
}

impl From<TimeDependentHamiltonian> for Hamiltonian {
    fn from(h: TimeDependentHamiltonian) -> Self {
        Self::TimeDependent(h)
    }
}

/// Everything needed to integrate one trajectory.
#[derive(Debug, Clone)]
pub struct LindbladProblem {
    hamiltonian: Hamiltonian,
    kappa: f64,
    basis: FockBasis,
    initial: DensityMatrix,
    sample_times: Vec<f64>,
    observables: Vec<(String, Operator)>,
}

impl LindbladProblem {
    pub fn new(
        hamiltonian: impl Into<Hamiltonian>,
        kappa: f64,
        basis: FockBasis,
        initial: DensityMatrix,
        t_final: f64,
    ) -> Result<Self> {
        let hamiltonian = hamiltonian.into();
        let dim = basis.composite_dim();
        if hamiltonian.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: hamiltonian.dim() });
        }
        if initial.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: initial.dim() });
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("must be finite and >= 0, got {kappa}"),
            });
        }
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t_final",
                reason: format!("must be finite and > 0, got {t_final}"),
            });
        }
        Ok(Self { hamiltonian, kappa, basis, initial, sample_times: vec![0.0, t_final], observables: Vec::new() })
    }

    /// Samples at `0, dt, 2dt, …` up to `t_final` (which is always included).
    pub fn with_sample_step(mut self, dt: f64) -> Result<Self> {
        let t_final = self.t_final();
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::TimeGrid);
        }
        let n = (t_final / dt * (1.0 + 1e-12)).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        if t_final - times[n] > 1e-9 * dt {
            times.push(t_final);
        } else {
            times[n] = t_final;
        }
        self.sample_times = times;
        Ok(self)
    }

    /// Arbitrary strictly increasing sample times `>= 0`; the last one
    /// becomes the final time.
    pub fn with_sample_times(mut self, times: Vec<f64>) -> Result<Self> {
        validate_grid(&times)?;
        if times[times.len() - 1] <= 0.0 {
            return Err(Error::TimeGrid);
        }
        self.sample_times = times;
        Ok(self)
    }

    pub fn observe(mut self, label: impl Into<String>, op: Operator) -> Result<Self> {
        if op.dim() != self.basis.composite_dim() {
            return Err(Error::DimensionMismatch { expected: self.basis.composite_dim(), found: op.dim() });
        }
        self.observables.push((label.into(), op));
        Ok(self)
    }

    pub fn t_final(&self) -> f64 {
        self.sample_times[self.sample_times.len() - 1]
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn sample_times(&self) -> &[f64] {
        &self.sample_times
    }
}

pub(crate) fn validate_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) || times[0] < 0.0 {
        return Err(Error::TimeGrid);
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::TimeGrid);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// `min(0.02·2π/ω_fast, 0.01/κ, 0.1/(2‖H‖∞ + κ n_max))`
    Auto,
    /// Upper bound on the step; each sampling interval is split evenly.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub step: StepSize,
    /// Largest tolerated population of the top Fock level.
    pub tail_limit: f64,
    /// Track the minimum eigenvalue of ρ at every sample time.
    pub check_positivity: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { step: StepSize::Auto, tail_limit: 1e-4, check_positivity: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub steps: usize,
    pub dt_max: f64,
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: Option<f64>,
    pub min_purity: f64,
    pub max_purity: f64,
    pub renormalizations: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// One series per observable, aligned with `times`.
    pub values: Vec<Vec<f64>>,
    /// Largest top-level population seen at the sample times.
    pub truncation_tail: f64,
    pub final_state: DensityMatrix,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn series(&self, label: &str) -> Result<&[f64]> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.values[i].as_slice())
            .ok_or_else(|| Error::UnknownObservable(label.to_string()))
    }
}

/// Row-compressed copy of a dense operator, used only as a product kernel.
#[derive(Debug, Clone)]
struct RowSparse {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl RowSparse {
    fn from_dense(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for k in 0..dim {
                let v = m[(i, k)];
                if v != ZERO {
                    cols.push(k);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    /// `out = self · x` for column-major `x` with any number of columns.
    fn mul_into(&self, x: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        let d = self.dim;
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for j in 0..x.ncols() {
            let xc = &xs[j * d..(j + 1) * d];
            let oc = &mut os[j * d..(j + 1) * d];
            for (i, o) in oc.iter_mut().enumerate() {
                let mut acc = ZERO;
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.vals[p] * xc[self.cols[p]];
                }
                *o = acc;
            }
        }
    }
}

/// Right-hand side `−i(H_eff ρ − ρ H_eff†) + κ a ρ a†` with
/// `H_eff = H − iκ/2 a†a`.
struct Generator {
    heff: RowSparse,
    a: RowSparse,
    kappa: f64,
}

struct Scratch {
    y: DMatrix<C64>,
    z: DMatrix<C64>,
    zt: DMatrix<C64>,
}

impl Scratch {
    fn new(d: usize) -> Self {
        Self { y: DMatrix::zeros(d, d), z: DMatrix::zeros(d, d), zt: DMatrix::zeros(d, d) }
    }
}

impl Generator {
    fn new(h: &Operator, kappa: f64, a: &DMatrix<C64>, n_op: &DMatrix<C64>) -> Self {
        let heff = h.matrix() - n_op * C64::new(0.0, 0.5 * kappa);
        Self { heff: RowSparse::from_dense(&heff), a: RowSparse::from_dense(a), kappa }
    }

    fn apply(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>, s: &mut Scratch) {
        let d = self.heff.dim;
        self.heff.mul_into(rho, &mut s.y);
        for j in 0..d {
            for i in 0..d {
                out[(i, j)] = -I * (s.y[(i, j)] - s.y[(j, i)].conj());
            }
        }
        if self.kappa > 0.0 {
            // a ρ a† = (a (a ρ)†)†
            self.a.mul_into(rho, &mut s.z);
            s.z.adjoint_to(&mut s.zt);
            self.a.mul_into(&s.zt, &mut s.z);
            // averaging with the transpose keeps the output exactly Hermitian
            let k = 0.5 * self.kappa;
            for j in 0..d {
                for i in 0..d {
                    out[(i, j)] += (s.z[(j, i)].conj() + s.z[(i, j)]) * k;
                }
            }
        }
    }
}

/// `L[ρ]` for a static Hamiltonian and collapse operator `a`.
pub fn liouvillian_apply(h: &Operator, kappa: f64, a: &Operator, rho: &Operator) -> Result<Operator> {
    let d = h.dim();
    for op in [a, rho] {
        if op.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.dim() });
        }
    }
    let n_op = a.adjoint().matrix() * a.matrix();
    let g = Generator::new(h, kappa, a.matrix(), &n_op);
    let mut out = DMatrix::zeros(d, d);
    g.apply(rho.matrix(), &mut out, &mut Scratch::new(d));
    Operator::from_matrix(out)
}

fn collapse(basis: FockBasis) -> Operator {
    on_field(&hilbert::annihilation(basis))
}

fn top_level_population(m: &DMatrix<C64>, basis: FockBasis) -> f64 {
    let n = basis.n_max();
    m[(basis.index(Qubit::Ground, n), basis.index(Qubit::Ground, n))].re
        + m[(basis.index(Qubit::Excited, n), basis.index(Qubit::Excited, n))].re
}

/// `y += alpha·x`
fn axpy(y: &mut DMatrix<C64>, alpha: C64, x: &DMatrix<C64>) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += alpha * xi;
    }
}

fn trace_product(rho: &DMatrix<C64>, obs: &DMatrix<C64>) -> C64 {
    let d = rho.nrows();
    let mut acc = ZERO;
    for j in 0..d {
        for i in 0..d {
            acc += rho[(i, j)] * obs[(j, i)];
        }
    }
    acc
}

fn step_bound(problem: &LindbladProblem, opts: &EvolveOptions) -> Result<f64> {
    match opts.step {
        StepSize::Fixed(dt) if dt > 0.0 && dt.is_finite() => Ok(dt),
        StepSize::Fixed(dt) => {
            Err(Error::InvalidParameter { name: "dt", reason: format!("must be finite and > 0, got {dt}") })
        }
        StepSize::Auto => {
            let mut dt = f64::INFINITY;
            if let Some(f) = problem.hamiltonian.fast_frequency().filter(|f| *f > 0.0) {
                dt = dt.min(0.02 * TAU / f);
            }
            if problem.kappa > 0.0 {
                dt = dt.min(0.01 / problem.kappa);
            }
            let scale =
                2.0 * problem.hamiltonian.norm_bound(problem.t_final()) + problem.kappa * problem.basis.n_max() as f64;
            if scale > 0.0 {
                dt = dt.min(0.1 / scale);
            }
            if !dt.is_finite() {
                // nothing drives the state: one step per sampling interval
                dt = problem.t_final();
            }
            Ok(dt)
        }
    }
}

struct Recorder {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    tail: f64,
    max_hermiticity: f64,
    min_eigenvalue: Option<f64>,
    min_purity: f64,
    max_purity: f64,
}

impl Recorder {
    fn new(n_obs: usize, positivity: bool) -> Self {
        Self {
            times: Vec::new(),
            values: vec![Vec::new(); n_obs],
            tail: 0.0,
            max_hermiticity: 0.0,
            min_eigenvalue: positivity.then_some(f64::INFINITY),
            min_purity: f64::INFINITY,
            max_purity: 0.0,
        }
    }

    fn record(&mut self, t: f64, rho: &DMatrix<C64>, problem: &LindbladProblem) -> Result<()> {
        self.times.push(t);
        for (k, (_, op)) in problem.observables.iter().enumerate() {
            let v = trace_product(rho, op.matrix());
            if v.im.abs() >= 1e-8 {
                return Err(Error::NonHermitianExpectation(v.im));
            }
            self.values[k].push(v.re);
        }
        self.tail = self.tail.max(top_level_population(rho, problem.basis));
        self.max_hermiticity = self.max_hermiticity.max(hilbert::max_abs(&(rho - rho.adjoint())));
        let purity: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
        self.min_purity = self.min_purity.min(purity);
        self.max_purity = self.max_purity.max(purity);
        if let Some(m) = self.min_eigenvalue.as_mut() {
            *m = m.min(hilbert::hermitian_eigenvalues(rho)[0]);
        }
        Ok(())
    }
}

const RENORM_THRESHOLD: f64 = 1e-10;

/// Integrates the master equation with classical RK4 and records the
/// observables at the problem's sample times.
pub fn evolve(problem: &LindbladProblem, opts: &EvolveOptions) -> Result<Trajectory> {
    let basis = problem.basis;
    let d = basis.composite_dim();
    let dt_max = step_bound(problem, opts)?;
    let a = collapse(basis);
    let n_op = a.adjoint().matrix() * a.matrix();
    let kappa = problem.kappa;
    let make = |t: f64| Generator::new(&problem.hamiltonian.at(t), kappa, a.matrix(), &n_op);
    let fixed = problem.hamiltonian.is_static().then(|| make(0.0));

    let mut rho = problem.initial.matrix().clone();
    let mut rec = Recorder::new(problem.observables.len(), opts.check_positivity);
    let mut scratch = Scratch::new(d);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (DMatrix::zeros(d, d), DMatrix::zeros(d, d), DMatrix::zeros(d, d), DMatrix::zeros(d, d), DMatrix::zeros(d, d));
    let mut steps = 0usize;
    let mut max_drift = 0.0f64;
    let mut renorms = 0usize;
    let mut t = 0.0;
    let mut gen_start = if fixed.is_none() { Some(make(0.0)) } else { None };

    for &target in &problem.sample_times {
        let span = target - t;
        if span > 0.0 {
            let n = ((span / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for s in 0..n {
                let t0 = t + s as f64 * h;
                let (g_mid, g_end);
                let (g0, gm, ge) = match &fixed {
                    Some(g) => (g, g, g),
                    None => {
                        g_mid = make(t0 + 0.5 * h);
                        g_end = make(t0 + h);
                        (gen_start.as_ref().expect("set for time-dependent"), &g_mid, &g_end)
                    }
                };
                g0.apply(&rho, &mut k1, &mut scratch);
                tmp.copy_from(&rho);
                axpy(&mut tmp, C64::new(0.5 * h, 0.0), &k1);
                gm.apply(&tmp, &mut k2, &mut scratch);
                tmp.copy_from(&rho);
                axpy(&mut tmp, C64::new(0.5 * h, 0.0), &k2);
                gm.apply(&tmp, &mut k3, &mut scratch);
                tmp.copy_from(&rho);
                axpy(&mut tmp, C64::new(h, 0.0), &k3);
                ge.apply(&tmp, &mut k4, &mut scratch);
                let c = C64::new(h / 6.0, 0.0);
                axpy(&mut rho, c, &k1);
                axpy(&mut rho, c * 2.0, &k2);
                axpy(&mut rho, c * 2.0, &k3);
                axpy(&mut rho, c, &k4);
                if fixed.is_none() {
                    gen_start = Some(make(t0 + h));
                }
                steps += 1;

                let tr = rho.trace();
                if !tr.re.is_finite() || !tr.im.is_finite() {
                    return Err(Error::NonFinite(t0 + h));
                }
                let drift = (tr - ONE).norm();
                max_drift = max_drift.max(drift);
                if drift > RENORM_THRESHOLD {
                    log::debug!("trace drift {drift:.3e} at t = {:.6} us; renormalizing", t0 + h);
                    rho /= C64::new(tr.re, 0.0);
                    renorms += 1;
                }
            }
            t = target;
        }
        rec.record(target, &rho, problem)?;
    }
    if renorms > 0 {
        log::warn!("trace renormalized {renorms} times (max drift {max_drift:.3e})");
    }
    if rec.tail > opts.tail_limit {
        return Err(Error::Truncation { tail: rec.tail, limit: opts.tail_limit });
    }
    let herm = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    Ok(Trajectory {
        times: rec.times,
        labels: problem.observables.iter().map(|(l, _)| l.clone()).collect(),
        values: rec.values,
        truncation_tail: rec.tail,
        final_state: DensityMatrix::from_matrix_unchecked(herm),
        diagnostics: Diagnostics {
            steps,
            dt_max,
            max_trace_drift: max_drift,
            max_hermiticity_error: rec.max_hermiticity,
            min_eigenvalue: rec.min_eigenvalue,
            min_purity: rec.min_purity,
            max_purity: rec.max_purity,
            renormalizations: renorms,
        },
    })
}

/// Closed-system evolution (`κ` must be zero). Pure initial states are
/// propagated as state vectors, which allows much larger truncations.
pub fn evolve_unitary(problem: &LindbladProblem, opts: &EvolveOptions) -> Result<Trajectory> {
    if problem.kappa != 0.0 {
        return Err(Error::InvalidParameter { name: "kappa", reason: "unitary evolution requires kappa = 0".into() });
    }
    if problem.initial.purity() < 1.0 - 1e-10 {
        return evolve(problem, opts);
    }
    let basis = problem.basis;
    let d = basis.composite_dim();
    let dt_max = step_bound(problem, opts)?;
    let make = |t: f64| RowSparse::from_dense(&(problem.hamiltonian.at(t).matrix() * (-I)));
    let fixed = problem.hamiltonian.is_static().then(|| make(0.0));

    // column of the largest diagonal entry of ψψ†, rescaled, is ψ up to phase
    let r = problem.initial.matrix();
    let j = (0..d).max_by(|&x, &y| r[(x, x)].re.total_cmp(&r[(y, y)].re)).expect("non-empty");
    let mut psi = DMatrix::from_column_slice(d, 1, r.column(j).as_slice()) / C64::new(r[(j, j)].re.sqrt(), 0.0);

    let mut rec = Recorder::new(problem.observables.len(), opts.check_positivity);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (DMatrix::zeros(d, 1), DMatrix::zeros(d, 1), DMatrix::zeros(d, 1), DMatrix::zeros(d, 1), DMatrix::zeros(d, 1));
    let mut steps = 0usize;
    let mut max_drift = 0.0f64;
    let mut renorms = 0usize;
    let mut t = 0.0;
    let mut gen_start = if fixed.is_none() { Some(make(0.0)) } else { None };
    let mut obs_values = vec![Vec::new(); problem.observables.len()];

    let record = |rec: &mut Recorder, obs_values: &mut Vec<Vec<f64>>, tt: f64, psi: &DMatrix<C64>| -> Result<()> {
        rec.times.push(tt);
        let v = DVector::from_column_slice(psi.as_slice());
        for (k, (_, op)) in problem.observables.iter().enumerate() {
            let e = v.dotc(&(op.matrix() * &v));
            if e.im.abs() >= 1e-8 {
                return Err(Error::NonHermitianExpectation(e.im));
            }
            obs_values[k].push(e.re);
        }
        let n = basis.n_max();
        let tail = psi[basis.index(Qubit::Ground, n)].norm_sqr() + psi[basis.index(Qubit::Excited, n)].norm_sqr();
        rec.tail = rec.tail.max(tail);
        let purity = v.norm_squared().powi(2);
        rec.min_purity = rec.min_purity.min(purity);
        rec.max_purity = rec.max_purity.max(purity);
        if let Some(m) = rec.min_eigenvalue.as_mut() {
            *m = m.min(0.0);
        }
        Ok(())
    };

    for &target in &problem.sample_times {
        let span = target - t;
        if span > 0.0 {
            let n = ((span / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let h = span / n as f64;
            let hc = C64::new(h, 0.0);
            for s in 0..n {
                let t0 = t + s as f64 * h;
                let (g_mid, g_end);
                let (g0, gm, ge) = match &fixed {
                    Some(g) => (g, g, g),
                    None => {
                        g_mid = make(t0 + 0.5 * h);
                        g_end = make(t0 + h);
                        (gen_start.as_ref().expect("set for time-dependent"), &g_mid, &g_end)
                    }
                };
                g0.mul_into(&psi, &mut k1);
                tmp.copy_from(&psi);
                axpy(&mut tmp, hc * 0.5, &k1);
                gm.mul_into(&tmp, &mut k2);
                tmp.copy_from(&psi);
                axpy(&mut tmp, hc * 0.5, &k2);
                gm.mul_into(&tmp, &mut k3);
                tmp.copy_from(&psi);
                axpy(&mut tmp, hc, &k3);
                ge.mul_into(&tmp, &mut k4);
                let c = hc / 6.0;
                axpy(&mut psi, c, &k1);
                axpy(&mut psi, c * 2.0, &k2);
                axpy(&mut psi, c * 2.0, &k3);
                axpy(&mut psi, c, &k4);
                if fixed.is_none() {
                    gen_start = Some(make(t0 + h));
                }
                steps += 1;
                let norm2 = psi.norm_squared();
                if !norm2.is_finite() {
                    return Err(Error::NonFinite(t0 + h));
                }
                let drift = (norm2 - 1.0).abs();
                max_drift = max_drift.max(drift);
                if drift > RENORM_THRESHOLD {
                    log::debug!("norm drift {drift:.3e} at t = {:.6} us; renormalizing", t0 + h);
                    psi /= C64::new(norm2.sqrt(), 0.0);
                    renorms += 1;
                }
            }
            t = target;
        }
        record(&mut rec, &mut obs_values, target, &psi)?;
    }
    if renorms > 0 {
        log::warn!("state norm renormalized {renorms} times (max drift {max_drift:.3e})");
    }
    if rec.tail > opts.tail_limit {
        return Err(Error::Truncation { tail: rec.tail, limit: opts.tail_limit });
    }
    let norm2 = psi.norm_squared();
    let final_state = &psi * psi.adjoint() / C64::new(norm2, 0.0);
    Ok(Trajectory {
        times: rec.times,
        labels: problem.observables.iter().map(|(l, _)| l.clone()).collect(),
        values: obs_values,
        truncation_tail: rec.tail,
        final_state: DensityMatrix::from_matrix_unchecked(final_state),
        diagnostics: Diagnostics {
            steps,
            dt_max,
            max_trace_drift: max_drift,
            max_hermiticity_error: 0.0,
            min_eigenvalue: rec.min_eigenvalue,
            min_purity: rec.min_purity,
            max_purity: rec.max_purity,
            renormalizations: renorms,
        },
    })
}

/// Unique fixed point of the Liouvillian.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub state: DensityMatrix,
    /// `‖L[ρ_ss]‖_F`
    pub residual: f64,
}

/// Real coordinates of a Hermitian matrix: diagonal entries, then
/// `(Re ρ_ij, Im ρ_ij)` for `i < j`.
struct HermitianCoords {
    d: usize,
    pairs: Vec<(usize, usize)>,
}

impl HermitianCoords {
    fn new(d: usize) -> Self {
        let pairs = (0..d).flat_map(|i| ((i + 1)..d).map(move |j| (i, j))).collect();
        Self { d, pairs }
    }

    fn len(&self) -> usize {
        self.d * self.d
    }

    fn basis_element(&self, k: usize) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.d, self.d);
        if k < self.d {
            m[(k, k)] = ONE;
        } else {
            let p = k - self.d;
            let (i, j) = self.pairs[p / 2];
            if p.is_multiple_of(2) {
                m[(i, j)] = ONE;
                m[(j, i)] = ONE;
            } else {
                m[(i, j)] = I;
                m[(j, i)] = -I;
            }
        }
        m
    }

    fn coords(&self, m: &DMatrix<C64>, out: &mut [f64]) {
        for i in 0..self.d {
            out[i] = m[(i, i)].re;
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            out[self.d + 2 * p] = m[(i, j)].re;
            out[self.d + 2 * p + 1] = m[(i, j)].im;
        }
    }

    fn matrix(&self, x: &[f64]) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.d, self.d);
        for i in 0..self.d {
            m[(i, i)] = C64::new(x[i], 0.0);
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let z = C64::new(x[self.d + 2 * p], x[self.d + 2 * p + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
        m
    }
}

const PIVOT_RATIO: f64 = 1e-12;
const NULL_RATIO: f64 = 1e-9;

/// Solves `L[ρ] = 0`, `Tr ρ = 1` for a static Hamiltonian on qubit ⊗ field
/// with photon loss. A non-unique solution is reported together with a
/// basis of the Liouvillian null space.
pub fn steady_state(h: &Operator, kappa: f64, basis: FockBasis) -> Result<SteadyState> {
    let d = basis.composite_dim();
    if h.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: h.dim() });
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter { name: "kappa", reason: format!("must be finite and >= 0, got {kappa}") });
    }
    let a = collapse(basis);
    let n_op = a.adjoint().matrix() * a.matrix();
    let gen = Generator::new(h, kappa, a.matrix(), &n_op);
    let coords = HermitianCoords::new(d);
    let dim = coords.len();
    let mut lmat = DMatrix::<f64>::zeros(dim, dim);
    let mut scratch = Scratch::new(d);
    let mut image = DMatrix::zeros(d, d);
    let mut col = vec![0.0; dim];
    for k in 0..dim {
        gen.apply(&coords.basis_element(k), &mut image, &mut scratch);
        coords.coords(&image, &mut col);
        lmat.column_mut(k).copy_from_slice(&col);
    }

    // the diagonal equations sum to zero; swap one for the trace condition
    let mut system = lmat.clone();
    for k in 0..dim {
        system[(0, k)] = if k < d { 1.0 } else { 0.0 };
    }
    let mut rhs = DVector::<f64>::zeros(dim);
    rhs[0] = 1.0;
    let lu = system.lu();
    let u = lu.u();
    let diag: Vec<f64> = u.diagonal().iter().map(|v| v.abs()).collect();
    let umax = diag.iter().copied().fold(0.0, f64::max);
    let umin = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(umax > 0.0) || umin <= PIVOT_RATIO * umax {
        return Err(Error::DegenerateSteadyState(null_space(&lmat, &coords)));
    }
    let x = lu.solve(&rhs).ok_or_else(|| Error::Solver("singular steady-state system".into()))?;
    let rho = coords.matrix(x.as_slice());
    gen.apply(&rho, &mut image, &mut scratch);
    let residual = image.norm();
    let state =
        DensityMatrix::new(rho).map_err(|e| Error::Solver(format!("steady state is not a valid state: {e}")))?;
    Ok(SteadyState { state, residual })
}

fn null_space(lmat: &DMatrix<f64>, coords: &HermitianCoords) -> Vec<Operator> {
    let svd = lmat.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= NULL_RATIO * smax)
        .map(|(k, _)| {
            let row: Vec<f64> = v_t.row(k).iter().copied().collect();
            Operator::from_matrix(coords.matrix(&row)).expect("finite")
        })
        .collect()
}
