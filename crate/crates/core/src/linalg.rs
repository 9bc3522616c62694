//! Dense complex linear algebra on registers of up to twelve qubits.
//!
//! Qubit ordering: qubit 0 is the system and qubits `1..=n` are ancillas in
//! collision order. Tensor products follow index order, so qubit 0 is the most
//! significant bit of a basis index. A two-qubit gate written in the basis
//! `|s a⟩` therefore has the system as its left factor.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported matrix dimension (twelve qubits).
pub const MAX_DIM: usize = 1 << 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Validation tolerances for density matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-10,
            trace: 1e-10,
            psd: 1e-9,
        }
    }
}

/// Square complex matrix whose dimension is a power of two in `[2, 4096]`.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

fn check_dim(dim: usize) -> Result<()> {
    if dim >= 2 && dim <= MAX_DIM && dim.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::BadDimension(dim))
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(dim: usize, entries: &[Complex64]) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Self::from_nalgebra(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(dim, &c)
    }

    pub fn from_nalgebra(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        check_dim(m.nrows())?;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix(m))
    }

    /// Internal constructor for results of closed operations on valid matrices.
    pub(crate) fn wrap(m: DMatrix<Complex64>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows().is_power_of_two());
        ComplexMatrix(m)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(ComplexMatrix(DMatrix::identity(dim, dim)))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(ComplexMatrix(DMatrix::zeros(dim, dim)))
    }

    /// Diagonal matrix.
    pub fn diagonal(diag: &[Complex64]) -> Result<Self> {
        check_dim(diag.len())?;
        Ok(ComplexMatrix(DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(diag),
        )))
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        check_dim(a.len())?;
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                actual: b.len(),
            });
        }
        let n = a.len();
        Ok(ComplexMatrix(DMatrix::from_fn(n, n, |i, j| a[i] * b[j].conj())))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix(&self.0 * s)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `A·B·A†`.
    pub fn conjugate_by(&self, a: &ComplexMatrix) -> Self {
        ComplexMatrix(&a.0 * &self.0 * a.0.adjoint())
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(v.len(), n, "vector length must match matrix dimension");
        (0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `|Tr(A†B)| / dim`; equals 1 exactly when the two unitaries agree up to
    /// a global phase.
    pub fn phase_insensitive_overlap(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let t: Complex64 = self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        t.norm() / self.dim() as f64
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = self.0.adjoint() * &self.0;
        let id = DMatrix::<Complex64>::identity(self.dim(), self.dim());
        prod.iter()
            .zip(id.iter())
            .all(|(a, b)| (a - b).norm() <= tol)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (i..n).all(|j| (self.0[(i, j)] - self.0[(j, i)].conj()).norm() <= tol))
    }

    /// Eigenvalues of the Hermitian part `(A + A†)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Eigen-decomposition of the Hermitian part: ascending eigenvalues and
    /// the matching orthonormal eigenvectors.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, Vec<Vec<Complex64>>) {
        let h = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let mut idx: Vec<usize> = (0..self.dim()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = idx
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect();
        (values, vectors)
    }

    /// `f(A)` for Hermitian `A` through its spectral decomposition.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> Complex64) -> Self {
        let (values, vectors) = self.hermitian_eigen();
        let n = self.dim();
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for (lambda, v) in values.iter().zip(&vectors) {
            let w = f(*lambda);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += w * v[i] * v[j].conj();
                }
            }
        }
        ComplexMatrix(out)
    }

    /// `exp(iA)` for Hermitian `A`.
    pub fn exp_i_hermitian(&self) -> Self {
        self.hermitian_function(|x| Complex64::from_polar(1.0, x))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| format!("{:+.4}{:+.4}i", self.0[(i, j)].re, self.0[(i, j)].im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                &self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a.dim() * b.dim();
    if dim > MAX_DIM {
        return Err(Error::DimensionOverflow(dim));
    }
    Ok(ComplexMatrix(a.0.kronecker(&b.0)))
}

/// Tensor product of a list of factors, left to right.
pub fn tensor_all(factors: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty tensor product".into()))?;
    rest.iter()
        .try_fold((*first).clone(), |acc, f| tensor(&acc, f))
}

/// Kronecker product of state vectors.
pub fn tensor_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Partial trace keeping the qubits in `keep`; kept qubits retain their
/// relative order.
pub fn partial_trace(m: &ComplexMatrix, keep: &[usize]) -> Result<ComplexMatrix> {
    let n = m.num_qubits();
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange {
            index: bad,
            qubits: n,
        });
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let compose = |k: usize, t: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in kept.iter().enumerate() {
            let bit = (k >> (kept.len() - 1 - pos)) & 1;
            idx |= bit << (n - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            let bit = (t >> (traced.len() - 1 - pos)) & 1;
            idx |= bit << (n - 1 - q);
        }
        idx
    };
    let kd = 1usize << kept.len();
    let td = 1usize << traced.len();
    let mut out = DMatrix::<Complex64>::zeros(kd, kd);
    for i in 0..kd {
        for j in 0..kd {
            out[(i, j)] = (0..td).map(|t| m.0[(compose(i, t), compose(j, t))]).sum();
        }
    }
    Ok(ComplexMatrix(out))
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::wrap(DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
}

pub fn sigma_y() -> ComplexMatrix {
    let i = Complex64::i();
    ComplexMatrix::wrap(DMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]))
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::wrap(DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]))
}

/// `|b⟩⟨b|` for a single qubit.
pub fn projector(b: u8) -> ComplexMatrix {
    let mut m = DMatrix::zeros(2, 2);
    m[(b as usize & 1, b as usize & 1)] = ONE;
    ComplexMatrix::wrap(m)
}

/// Computational basis ket on `qubits` qubits.
pub fn basis_ket(qubits: usize, index: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; 1 << qubits];
    v[index] = ONE;
    v
}

/// Single-qubit pure state from Bloch angles: `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
pub fn bloch_ket(theta: f64, phi: f64) -> [Complex64; 2] {
    [
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ]
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(m, Tolerances::default())
    }

    pub fn with_tolerances(m: ComplexMatrix, tol: Tolerances) -> Result<Self> {
        if !m.is_hermitian(tol.herm) {
            return Err(Error::InvalidDensity("not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > tol.trace {
            return Err(Error::InvalidDensity(format!("trace {tr} != 1")));
        }
        let min_ev = m.hermitian_eigenvalues()[0];
        if min_ev < -tol.psd {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_ev:e}"
            )));
        }
        Ok(DensityMatrix(m))
    }

    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(DensityMatrix(ComplexMatrix::outer(&v, &v)?))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Ok(DensityMatrix(
            ComplexMatrix::identity(dim)?.scale(Complex64::new(1.0 / dim as f64, 0.0)),
        ))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn num_qubits(&self) -> usize {
        self.0.num_qubits()
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        Ok(DensityMatrix(partial_trace(&self.0, keep)?))
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &ComplexMatrix) -> DensityMatrix {
        DensityMatrix(self.0.conjugate_by(u))
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix(tensor(&self.0, &other.0)?))
    }
}

pub fn validate_density(m: &ComplexMatrix, tol: Tolerances) -> bool {
    DensityMatrix::with_tolerances(m.clone(), tol).is_ok()
}

pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    u.is_unitary(tol)
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let diff = rho.matrix() - sigma.matrix();
    0.5 * diff.hermitian_eigenvalues().iter().map(|x| x.abs()).sum::<f64>()
}

/// `⟨ψ|σ|ψ⟩` for a normalized pure state `ψ`.
pub fn fidelity(psi: &[Complex64], sigma: &DensityMatrix) -> f64 {
    let s = sigma.matrix().apply(psi);
    let f: Complex64 = psi.iter().zip(&s).map(|(a, b)| a.conj() * b).sum();
    f.re.clamp(0.0, 1.0)
}

/// Single-qubit state `d·P₀ + (1−d)·P₁ + k|0⟩⟨1| + k*|1⟩⟨0|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    d: f64,
    k: Complex64,
}

impl QubitState {
    pub fn new(d: f64, k: Complex64) -> Result<Self> {
        const TOL: f64 = 1e-12;
        if !d.is_finite() || !k.re.is_finite() || !k.im.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        if !(-TOL..=1.0 + TOL).contains(&d) {
            return Err(Error::InvalidState(format!("population {d} outside [0, 1]")));
        }
        if k.norm_sqr() > d * (1.0 - d) + TOL {
            return Err(Error::InvalidState(format!(
                "coherence |k| = {} exceeds sqrt(d(1-d)) = {}",
                k.norm(),
                (d * (1.0 - d)).max(0.0).sqrt()
            )));
        }
        Ok(QubitState { d, k })
    }

    /// No validation; only for states produced by a channel from valid input.
    pub(crate) fn unchecked(d: f64, k: Complex64) -> Self {
        QubitState { d, k }
    }

    pub fn ground() -> Self {
        QubitState::unchecked(1.0, ZERO)
    }

    pub fn excited() -> Self {
        QubitState::unchecked(0.0, ZERO)
    }

    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        let [a, b] = bloch_ket(theta, phi);
        QubitState::unchecked(a.norm_sqr(), a * b.conj())
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn k(&self) -> Complex64 {
        self.k
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::wrap(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(self.d, 0.0),
                self.k,
                self.k.conj(),
                Complex64::new(1.0 - self.d, 0.0),
            ],
        ))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix(self.to_matrix())
    }

    /// Reads `(d, k)` off a 2×2 density matrix.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: m.dim(),
            });
        }
        QubitState::new(m[(0, 0)].re, m[(0, 1)])
    }
}
