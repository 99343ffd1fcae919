//! Dense operator algebra on the qubit ⊗ truncated-Fock space.
//!
//! Conventions: the qubit basis is `{|g⟩, |e⟩}` with `|g⟩` at index 0, the
//! qubit factor is leftmost in every tensor product, and `σ− = |g⟩⟨e|`.
//! With these, `σz = |e⟩⟨e| − |g⟩⟨g|` and the Pauli algebra
//! `σx σy = i σz` holds cyclically.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest dense operator dimension accepted by [`tensor`].
pub const MAX_DIM: usize = 1 << 14;

pub(crate) const I: C64 = C64::new(0.0, 1.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

/// Photonic mode truncated at Fock level `n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockBasis {
    n_max: usize,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidTruncation(n_max));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Dimension of the field factor, `n_max + 1`.
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Dimension of qubit ⊗ field.
    pub fn composite_dim(&self) -> usize {
        2 * self.dim()
    }

    /// Row index of `|q⟩ ⊗ |n⟩` in the composite space.
    pub fn index(&self, qubit: Qubit, n: usize) -> usize {
        debug_assert!(n <= self.n_max);
        qubit.index() * self.dim() + n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    Ground,
    Excited,
}

impl Qubit {
    pub fn index(self) -> usize {
        match self {
            Qubit::Ground => 0,
            Qubit::Excited => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
    /// `σ− = |g⟩⟨e|`
    Minus,
    /// `σ+ = |e⟩⟨g|`
    Plus,
}

/// Square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct Operator {
    m: DMatrix<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator({}x{}){}", self.dim(), self.dim(), self.m)
    }
}

impl Operator {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteEntries);
        }
        Ok(Self { m })
    }

    /// Builds a real matrix from row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { rows: n, cols: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = C64::new(v, 0.0);
            }
        }
        Self::from_matrix(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::zeros(dim, dim) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = DMatrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Self { m }
    }

    /// `|i⟩⟨j|` in a space of dimension `dim`.
    pub fn projector(dim: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] = ONE;
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { m: &self.m * c }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        Self { m: &self.m * &other.m - &other.m * &self.m }
    }

    /// Largest entrywise modulus of `A − A†`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.m - self.m.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    /// Maximum absolute row sum (induced ∞-norm).
    pub fn inf_norm(&self) -> f64 {
        self.m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Eigenvalues of a Hermitian operator in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.m)
    }

    /// `exp(−i·self·t)` for a Hermitian operator, via eigendecomposition.
    pub fn unitary_exp(&self, t: f64) -> Operator {
        let sym = (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        let phases = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            eig.eigenvalues.iter().map(|&e| (-I * e * t).exp()),
        ));
        let v = &eig.eigenvectors;
        Operator { m: v * phases * v.adjoint() }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m + &rhs.m }
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        Operator { m: self.m + rhs.m }
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        self.m += &rhs.m;
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m - &rhs.m }
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        Operator { m: self.m - rhs.m }
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { m: -self.m }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m * &rhs.m }
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        Operator { m: self.m * rhs.m }
    }
}

impl Mul<&Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale_real(self)
    }
}

impl Mul<Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        rhs.scale_real(self)
    }
}

impl Mul<&Operator> for C64 {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        rhs.scale(self)
    }
}

impl Mul<Operator> for C64 {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        rhs.scale(self)
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Photon annihilation operator `a` on the truncated field.
pub fn annihilation(basis: FockBasis) -> Operator {
    let d = basis.dim();
    let mut m = DMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator { m }
}

pub fn creation(basis: FockBasis) -> Operator {
    annihilation(basis).adjoint()
}

/// `a†a` on the field factor.
pub fn number(basis: FockBasis) -> Operator {
    let values: Vec<f64> = (0..basis.dim()).map(|n| n as f64).collect();
    Operator::diagonal(&values)
}

/// `X = a† + a` on the field factor.
pub fn quadrature_x(basis: FockBasis) -> Operator {
    let a = annihilation(basis);
    &a.adjoint() + &a
}

/// `Y = i(a† − a)` on the field factor.
pub fn quadrature_y(basis: FockBasis) -> Operator {
    let a = annihilation(basis);
    (&a.adjoint() - &a).scale(I)
}

pub fn qubit_pauli(which: Pauli) -> Operator {
    let m = match which {
        Pauli::X => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        // σy = i(σ− − σ+)
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[ZERO, I, -I, ZERO]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE]),
        Pauli::Minus => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]),
        Pauli::Plus => DMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO]),
    };
    Operator { m }
}

/// `|q⟩⟨q|` on the qubit.
pub fn qubit_projector(q: Qubit) -> Operator {
    Operator::projector(2, q.index(), q.index())
}

/// Kronecker product, qubit (left) factor first.
pub fn tensor(left: &Operator, right: &Operator) -> Result<Operator> {
    let dim = left.dim().checked_mul(right.dim()).ok_or(Error::DimensionOverflow(usize::MAX))?;
    if dim > MAX_DIM {
        return Err(Error::DimensionOverflow(dim));
    }
    Ok(Operator { m: left.m.kronecker(&right.m) })
}

/// `q ⊗ I_field`.
pub fn on_qubit(basis: FockBasis, q: &Operator) -> Operator {
    Operator { m: q.m.kronecker(&DMatrix::<C64>::identity(basis.dim(), basis.dim())) }
}

/// `I_2 ⊗ f`.
pub fn on_field(f: &Operator) -> Operator {
    Operator { m: DMatrix::<C64>::identity(2, 2).kronecker(&f.m) }
}

/// The representation change `S = (1/√2)[[1, i], [i, 1]]` on the qubit.
pub fn representation_s() -> Operator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Operator {
        m: DMatrix::from_row_slice(2, 2, &[C64::new(s, 0.0), C64::new(0.0, s), C64::new(0.0, s), C64::new(s, 0.0)]),
    }
}

/// Conjugates the qubit factor: `op ↦ (S ⊗ I)† op (S ⊗ I)`.
///
/// With the conventions of this module `S† σy S = +σz` and `S† σx S = σx`.
/// Accepts a bare qubit operator or any operator on qubit ⊗ field.
pub fn basis_change_s(op: &Operator) -> Result<Operator> {
    let d = op.dim();
    if d < 2 || !d.is_multiple_of(2) {
        return Err(Error::DimensionMismatch { expected: 2 * (d / 2).max(1), found: d });
    }
    let s = representation_s();
    let full = Operator { m: s.m.kronecker(&DMatrix::<C64>::identity(d / 2, d / 2)) };
    Ok(&(&full.adjoint() * op) * &full)
}

/// Inverse of [`basis_change_s`]: `op ↦ (S ⊗ I) op (S ⊗ I)†`.
pub fn basis_change_s_inverse(op: &Operator) -> Result<Operator> {
    let d = op.dim();
    if d < 2 || !d.is_multiple_of(2) {
        return Err(Error::DimensionMismatch { expected: 2 * (d / 2).max(1), found: d });
    }
    let s = representation_s();
    let full = Operator { m: s.m.kronecker(&DMatrix::<C64>::identity(d / 2, d / 2)) };
    Ok(&(&full * op) * &full.adjoint())
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    pub const NORM_TOL: f64 = 1e-10;

    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amps);
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amps: v })
    }

    /// Normalizes before validating.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amps);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        Self::new((v / C64::new(norm, 0.0)).iter().copied().collect())
    }

    /// `|q⟩ ⊗ |n⟩`.
    pub fn basis(basis: FockBasis, q: Qubit, n: usize) -> Result<Self> {
        if n > basis.n_max() {
            return Err(Error::InvalidState(format!("Fock level {n} exceeds n_max {}", basis.n_max())));
        }
        let mut v = vec![ZERO; basis.composite_dim()];
        v[basis.index(q, n)] = ONE;
        Ok(Self { amps: DVector::from_vec(v) })
    }

    /// `(c_g|g⟩ + c_e|e⟩) ⊗ |0⟩`, normalized.
    pub fn qubit_superposition_vacuum(basis: FockBasis, c_g: C64, c_e: C64) -> Result<Self> {
        let mut v = vec![ZERO; basis.composite_dim()];
        v[basis.index(Qubit::Ground, 0)] = c_g;
        v[basis.index(Qubit::Excited, 0)] = c_e;
        Self::normalized(v)
    }

    /// `(|g⟩ + |e⟩) ⊗ |0⟩ / √2`.
    pub fn plus_vacuum(basis: FockBasis) -> Self {
        Self::qubit_superposition_vacuum(basis, ONE, ONE).expect("finite nonzero amplitudes")
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { m: &self.amps * self.amps.adjoint() }
    }
}

/// Hermitian, unit-trace, positive semidefinite state.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix({}x{}){}", self.dim(), self.dim(), self.m)
    }
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-8;
    pub const POSITIVITY_TOL: f64 = 1e-8;

    /// Validates all three density-matrix invariants.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let op = Operator::from_matrix(m)?;
        let herm = op.hermiticity_error();
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eigenvalues(&op.m)[0];
        if min < -Self::POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { m: op.m })
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        Self { m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0) }
    }

    /// `ρ_qubit ⊗ ρ_field`.
    pub fn product(qubit: &DensityMatrix, field: &DensityMatrix) -> Result<Self> {
        if qubit.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: qubit.dim() });
        }
        let dim = 2 * field.dim();
        if dim > MAX_DIM {
            return Err(Error::DimensionOverflow(dim));
        }
        Ok(Self { m: qubit.m.kronecker(&field.m) })
    }

    /// Diagonal state `Σ p_i |i⟩⟨i|`; `p` must be a probability vector.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        let mut m = DMatrix::zeros(p.len(), p.len());
        for (i, &v) in p.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.m - self.m.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.m)[0]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.m)
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let diff = &self.m - &other.m;
        Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>())
    }

    /// Photon-number populations `P_n = Tr(ρ |n⟩⟨n|)` of the field factor.
    pub fn field_populations(&self, basis: FockBasis) -> Result<Vec<f64>> {
        if self.dim() != basis.composite_dim() {
            return Err(Error::DimensionMismatch { expected: basis.composite_dim(), found: self.dim() });
        }
        Ok((0..basis.dim())
            .map(|n| {
                let g = basis.index(Qubit::Ground, n);
                let e = basis.index(Qubit::Excited, n);
                self.m[(g, g)].re + self.m[(e, e)].re
            })
            .collect())
    }

    /// Reduced field state `Tr_qubit ρ`.
    pub fn field_reduced(&self, basis: FockBasis) -> Result<DensityMatrix> {
        if self.dim() != basis.composite_dim() {
            return Err(Error::DimensionMismatch { expected: basis.composite_dim(), found: self.dim() });
        }
        let d = basis.dim();
        let m = self.m.view((0, 0), (d, d)) + self.m.view((d, d), (d, d));
        Ok(Self { m })
    }
}

/// `Tr(ρ·obs)` for a Hermitian observable.
pub fn expectation(rho: &DensityMatrix, obs: &Operator) -> Result<f64> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: obs.dim() });
    }
    // Tr(ρA) = Σ_ij ρ_ij A_ji
    let mut acc = ZERO;
    for j in 0..rho.dim() {
        for i in 0..rho.dim() {
            acc += rho.m[(i, j)] * obs.m[(j, i)];
        }
    }
    if acc.im.abs() >= 1e-8 {
        return Err(Error::NonHermitianExpectation(acc.im));
    }
    Ok(acc.re)
}
