//! Complex dense linear algebra substrate: validated operator types,
//! Hermitian eigendecomposition, matrix functions, quasi-inverses, trace
//! norm, polar decomposition and the Lyapunov-type cotangent solver.
//!
//! All types are immutable after construction; every operation is a pure
//! function and deterministic (same input bits, same output bits).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{CoreError, Result};

pub(crate) type CMat = DMatrix<Complex64>;

pub(crate) fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Entrywise max |z| of a matrix; 0 for empty matrices.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Entrywise max |a − b|.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b))
}

pub(crate) fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// ‖U†U − I‖_max; zero for exactly unitary U.
pub(crate) fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.ncols();
    max_abs_diff(&(u.adjoint() * u), &CMat::identity(n, n))
}

fn check_finite(m: &CMat) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(CoreError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// ComplexMatrix
// ---------------------------------------------------------------------------

/// A dense complex matrix with finite entries.
///
/// Most of the crate works with square matrices; rectangular shapes are
/// allowed because Kraus operators of dimension-changing channels are
/// dim_out × dim_in. Operations that need squareness check it.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    m: CMat,
}

impl ComplexMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        check_finite(&m)?;
        Ok(Self { m })
    }

    /// Builds from a row-major list of entries.
    pub fn from_row_major(nrows: usize, ncols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != nrows * ncols {
            return Err(CoreError::InvalidInput(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                nrows * ncols,
                nrows,
                ncols,
                entries.len()
            )));
        }
        let m = CMat::from_row_iterator(nrows, ncols, entries);
        Self::new(m)
    }

    pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        Self::new(CMat::from_fn(nrows, ncols, f))
    }

    /// Square diagonal matrix with the given real diagonal.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            m: CMat::from_fn(n, n, |i, j| if i == j { cx(diag[i], 0.0) } else { cx(0.0, 0.0) }),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: CMat::identity(n, n) }
    }

    pub fn nrows(&self) -> usize {
        self.m.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.m.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.m.nrows() == self.m.ncols()
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self { m: self.m.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.m.diagonal().iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }

    pub(crate) fn require_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(CoreError::NotSquare { rows: self.m.nrows(), cols: self.m.ncols() });
        }
        Ok(())
    }

    pub(crate) fn from_raw(m: CMat) -> Self {
        Self { m }
    }
}

// ---------------------------------------------------------------------------
// Eigensystem
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian matrix: `M = V diag(values) V†` with
/// eigenvalues ascending and `V` unitary (columns are eigenvectors).
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigensystem {
    /// `V f(diag) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, lambda) in self.values.iter().enumerate() {
            let fv = cx(f(*lambda), 0.0);
            for i in 0..n {
                scaled[(i, k)] *= fv;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMat {
        self.reconstruct_with(|x| x)
    }

    pub fn lambda_min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn lambda_max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Hermitian eigendecomposition of a raw matrix assumed Hermitian.
pub(crate) fn eig_hermitian_raw(m: &CMat) -> Result<Eigensystem> {
    let n = m.nrows();
    if n == 0 {
        return Err(CoreError::InvalidInput("empty matrix".into()));
    }
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 100_000)
        .ok_or(CoreError::ConvergenceFailure)?;
    // sort ascending, permuting eigenvector columns to match
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Eigensystem { values, vectors })
}

/// Singular values of a raw matrix, descending (nalgebra's order).
pub(crate) fn singular_values_raw(m: &CMat) -> Vec<f64> {
    m.clone().singular_values().iter().copied().collect()
}

/// `e^{scale·H}` for Hermitian `H`.
pub(crate) fn herm_exp(h: &CMat, scale: f64) -> Result<CMat> {
    let eig = eig_hermitian_raw(h)?;
    Ok(eig.reconstruct_with(|l| (scale * l).exp()))
}

/// Unitary polar factor of a square matrix, `U_left · U_right†` from the SVD.
/// Deterministic on singular input (kernel completion comes from the SVD).
pub(crate) fn polar_unitary_raw(w: &CMat) -> Result<CMat> {
    let svd = w.clone().try_svd(true, true, f64::EPSILON, 100_000).ok_or(CoreError::ConvergenceFailure)?;
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V^T");
    Ok(u * vt)
}

// ---------------------------------------------------------------------------
// HermitianMatrix
// ---------------------------------------------------------------------------

/// A square matrix with `max |M − M†| ≤ hermiticity_tol`, stored in exactly
/// Hermitian form `(M + M†)/2`.
#[derive(Clone, Debug)]
pub struct HermitianMatrix {
    m: CMat,
}

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        m.require_square()?;
        let defect = max_abs_diff(m.matrix(), &m.matrix().adjoint());
        if defect > tol.hermiticity_tol {
            return Err(CoreError::NonHermitian { defect, tol: tol.hermiticity_tol });
        }
        Ok(Self { m: hermitian_part(m.matrix()) })
    }

    /// Wraps a matrix that is Hermitian by construction.
    pub(crate) fn from_raw_unchecked(m: CMat) -> Self {
        Self { m: hermitian_part(&m) }
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(ComplexMatrix::new(m)?)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    /// Hermitian eigendecomposition, eigenvalues ascending.
    pub fn eig(&self) -> Result<Eigensystem> {
        eig_hermitian_raw(&self.m)
    }

    pub fn as_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_raw(self.m.clone())
    }
}

// ---------------------------------------------------------------------------
// PositiveOperator
// ---------------------------------------------------------------------------

/// A positive semidefinite operator.
///
/// Construction eigendecomposes the matrix once; eigenvalues in
/// `(−psd_tol, 0)` are clamped to 0 (numerical noise must not poison matrix
/// functions) and anything more negative is rejected. The decomposition is
/// cached so that matrix functions and quasi-inverses reuse it.
#[derive(Clone, Debug)]
pub struct PositiveOperator {
    m: CMat,
    eig: Eigensystem,
    eigenvalue_floor: f64,
}

impl PositiveOperator {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        Self::with_tolerances(h, &Tolerances::default())
    }

    pub fn with_tolerances(h: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        let eig = h.eig()?;
        let floor = eig.lambda_min();
        if floor < -tol.psd_tol {
            return Err(CoreError::NotPositive { min_eigenvalue: floor, tol: tol.psd_tol });
        }
        let values: Vec<f64> = eig.values.iter().map(|l| l.max(0.0)).collect();
        let eig = Eigensystem { values, vectors: eig.vectors };
        let m = eig.reconstruct();
        Ok(Self { m, eig, eigenvalue_floor: floor })
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(HermitianMatrix::from_matrix(m)?)
    }

    pub fn from_matrix_with(m: CMat, tol: &Tolerances) -> Result<Self> {
        Self::with_tolerances(HermitianMatrix::with_tolerances(ComplexMatrix::new(m)?, tol)?, tol)
    }

    /// Diagonal operator with non-negative entries.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_matrix(ComplexMatrix::from_real_diagonal(diag).into_matrix())
    }

    /// Builds directly from eigenvalues and eigenvectors; negative values
    /// are clamped to 0 and the pairs re-sorted ascending.
    pub(crate) fn from_eigen_parts(values: Vec<f64>, vectors: CMat) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let sorted: Vec<f64> = order.iter().map(|&k| values[k].max(0.0)).collect();
        let mut v = CMat::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            v.set_column(dst, &vectors.column(src));
        }
        let eig = Eigensystem { values: sorted, vectors: v };
        let m = eig.reconstruct();
        Self { m, eig, eigenvalue_floor: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn eigensystem(&self) -> &Eigensystem {
        &self.eig
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    /// Most negative raw eigenvalue seen at construction (≤ 0 when clamping
    /// occurred, the raw λ_min otherwise).
    pub fn eigenvalue_floor(&self) -> f64 {
        self.eigenvalue_floor
    }

    pub fn trace(&self) -> f64 {
        self.eig.values.iter().sum()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eig.lambda_max()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eig.lambda_min()
    }

    /// Number of eigenvalues above the relative support cut.
    pub fn rank(&self, tol: &Tolerances) -> usize {
        let cut = tol.rank_tol(self.lambda_max());
        self.eig.values.iter().filter(|l| **l > cut).count()
    }

    pub fn is_invertible(&self, tol: &Tolerances) -> bool {
        self.rank(tol) == self.dim()
    }

    /// `V f(Λ) V†` for a scalar function defined on the spectrum.
    pub fn matrix_function(&self, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        for &l in &self.eig.values {
            if !f(l).is_finite() {
                return Err(CoreError::DomainError { eigenvalue: l });
            }
        }
        Ok(HermitianMatrix::from_raw_unchecked(self.eig.reconstruct_with(&f)))
    }

    /// Principal square root.
    pub fn sqrt(&self) -> PositiveOperator {
        let values = self.eig.values.iter().map(|l| l.sqrt()).collect();
        Self::from_eigen_parts(values, self.eig.vectors.clone())
    }

    /// `P^s` through the spectral calculus. Errors if `λ^s` is undefined at
    /// some eigenvalue (e.g. negative powers of singular operators).
    pub fn power(&self, s: f64) -> Result<PositiveOperator> {
        let mut values = Vec::with_capacity(self.eig.values.len());
        for &l in &self.eig.values {
            let p = l.powf(s);
            if !p.is_finite() {
                return Err(CoreError::DomainError { eigenvalue: l });
            }
            values.push(p);
        }
        Ok(Self::from_eigen_parts(values, self.eig.vectors.clone()))
    }

    /// Quasi-power: eigenvalues above the support cut are raised to `s`,
    /// the rest go to 0 (so `0^s = 0`, and `s = 0` yields the support
    /// projector).
    pub fn quasi_power(&self, s: f64, tol: &Tolerances) -> PositiveOperator {
        let cut = tol.rank_tol(self.lambda_max());
        let values = self
            .eig
            .values
            .iter()
            .map(|&l| if l > cut { l.powf(s) } else { 0.0 })
            .collect();
        Self::from_eigen_parts(values, self.eig.vectors.clone())
    }

    /// Quasi-inverse `P^{[power]}`: same eigenvectors, eigenvalues above the
    /// support cut mapped to `λ^power`, kernel left at 0. The interesting
    /// powers are −1 and −1/2.
    pub fn quasi_inverse(&self, power: f64, tol: &Tolerances) -> PositiveOperator {
        self.quasi_power(power, tol)
    }

    /// Projector onto the support (range) of the operator.
    pub fn support_projector(&self, tol: &Tolerances) -> PositiveOperator {
        self.quasi_power(0.0, tol)
    }

    /// `λ·P` for λ > 0.
    pub fn scale(&self, lambda: f64) -> Result<PositiveOperator> {
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(CoreError::NonPositiveScale(lambda));
        }
        let values = self.eig.values.iter().map(|l| l * lambda).collect();
        Ok(Self::from_eigen_parts(values, self.eig.vectors.clone()))
    }

    pub fn as_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_raw(self.m.clone())
    }

    pub fn as_hermitian(&self) -> HermitianMatrix {
        HermitianMatrix::from_raw_unchecked(self.m.clone())
    }
}

// ---------------------------------------------------------------------------
// DensityOperator
// ---------------------------------------------------------------------------

/// A positive operator with trace bookkeeping. `new` demands unit trace;
/// `unnormalized` admits any positive operator (the scaling extension of the
/// transition probability needs those).
#[derive(Clone, Debug)]
pub struct DensityOperator {
    p: PositiveOperator,
    normalized: bool,
}

impl DensityOperator {
    pub fn new(p: PositiveOperator) -> Result<Self> {
        Self::with_tolerances(p, &Tolerances::default())
    }

    pub fn with_tolerances(p: PositiveOperator, tol: &Tolerances) -> Result<Self> {
        let trace = p.trace();
        if (trace - 1.0).abs() > tol.trace_tol {
            return Err(CoreError::NotNormalized { trace, tol: tol.trace_tol });
        }
        Ok(Self { p, normalized: true })
    }

    pub fn unnormalized(p: PositiveOperator) -> Self {
        Self { p, normalized: false }
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(PositiveOperator::from_matrix(m)?)
    }

    pub fn from_matrix_with(m: CMat, tol: &Tolerances) -> Result<Self> {
        Self::with_tolerances(PositiveOperator::from_matrix_with(m, tol)?, tol)
    }

    /// Diagonal density operator from a probability vector.
    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(PositiveOperator::from_diagonal(probs)?)
    }

    /// Rank-1 projector |ψ⟩⟨ψ| of a unit vector.
    pub fn from_pure(psi: &nalgebra::DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(CoreError::NotUnitVector(norm));
        }
        let m = psi * psi.adjoint();
        Self::from_matrix(m)
    }

    pub fn positive(&self) -> &PositiveOperator {
        &self.p
    }

    pub fn into_positive(self) -> PositiveOperator {
        self.p
    }

    pub fn matrix(&self) -> &CMat {
        self.p.matrix()
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn trace(&self) -> f64 {
        self.p.trace()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn sqrt(&self) -> PositiveOperator {
        self.p.sqrt()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.p.eigenvalues()
    }
}

// ---------------------------------------------------------------------------
// Norms and decompositions
// ---------------------------------------------------------------------------

/// Trace norm ‖M‖₁ = sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    trace_norm_raw(m.matrix())
}

pub(crate) fn trace_norm_raw(m: &CMat) -> f64 {
    singular_values_raw(m).iter().sum()
}

/// Trace distance ½‖ρ − σ‖₁ between two states.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(CoreError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(0.5 * trace_norm_raw(&(a.matrix() - b.matrix())))
}

/// Polar decomposition `W = P·U` with `P = (WW†)^{1/2}` positive and `U`
/// unitary. On singular `W` the unitary is completed on the kernel through
/// the SVD (`U = U_left·U_right†`), which is deterministic.
pub fn polar_decompose(w: &ComplexMatrix) -> Result<(PositiveOperator, ComplexMatrix)> {
    w.require_square()?;
    let svd = w
        .matrix()
        .clone()
        .try_svd(true, true, f64::EPSILON, 100_000)
        .ok_or(CoreError::ConvergenceFailure)?;
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let p = PositiveOperator::from_eigen_parts(sigma, u.clone());
    let unitary = ComplexMatrix::from_raw(u * vt);
    Ok((p, unitary))
}

/// Solution of `Gρ + ρG = X` on the support of ρ.
#[derive(Clone, Debug)]
pub struct LyapunovSolution {
    /// The Hermitian cotangent G.
    pub g: HermitianMatrix,
    /// ‖Gρ + ρG − X‖_max. Nonzero when X has weight outside the support.
    pub residual: f64,
    /// Set when the residual exceeds `residual_tol` — the curve is leaving
    /// the support of ρ and the solution is only partial.
    pub singular_support: bool,
}

/// Solves `Gρ + ρG = X` for Hermitian `G` in the eigenbasis of ρ:
/// `G_ij = X_ij / (λ_i + λ_j)` wherever `λ_i + λ_j` is above the support
/// cut, 0 elsewhere. Rank-deficient ρ yields a residual report instead of a
/// hard failure; rank-changing curves are the caller's problem to
/// regularize.
pub fn lyapunov_solve(
    rho: &DensityOperator,
    x: &HermitianMatrix,
    tol: &Tolerances,
) -> Result<LyapunovSolution> {
    let n = rho.dim();
    if x.dim() != n {
        return Err(CoreError::DimensionMismatch { left: n, right: x.dim() });
    }
    let eig = rho.positive().eigensystem();
    let v = &eig.vectors;
    let cut = tol.rank_tol(rho.positive().lambda_max());
    let x_tilde = v.adjoint() * x.matrix() * v;
    let mut g_tilde = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let denom = eig.values[i] + eig.values[j];
            if denom > cut {
                g_tilde[(i, j)] = x_tilde[(i, j)] / cx(denom, 0.0);
            }
        }
    }
    let g = v * g_tilde * v.adjoint();
    let residual = max_abs(&(&g * rho.matrix() + rho.matrix() * &g - x.matrix()));
    Ok(LyapunovSolution {
        g: HermitianMatrix::from_raw_unchecked(g),
        residual,
        singular_support: residual > tol.residual_tol,
    })
}

// ---------------------------------------------------------------------------
// Tensor products and partial traces
// ---------------------------------------------------------------------------

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_raw(a.matrix().kronecker(b.matrix()))
}

/// Traces out the right factor of an operator on `H_left ⊗ H_right`
/// (index convention: row `i·dim_right + j` is `|i⟩⊗|j⟩`).
pub fn partial_trace_right(m: &ComplexMatrix, dim_left: usize, dim_right: usize) -> Result<ComplexMatrix> {
    check_bipartite(m, dim_left, dim_right)?;
    let mut out = CMat::zeros(dim_left, dim_left);
    for i in 0..dim_left {
        for i2 in 0..dim_left {
            let mut acc = cx(0.0, 0.0);
            for j in 0..dim_right {
                acc += m.matrix()[(i * dim_right + j, i2 * dim_right + j)];
            }
            out[(i, i2)] = acc;
        }
    }
    Ok(ComplexMatrix::from_raw(out))
}

/// Traces out the left factor of an operator on `H_left ⊗ H_right`.
pub fn partial_trace_left(m: &ComplexMatrix, dim_left: usize, dim_right: usize) -> Result<ComplexMatrix> {
    check_bipartite(m, dim_left, dim_right)?;
    let mut out = CMat::zeros(dim_right, dim_right);
    for j in 0..dim_right {
        for j2 in 0..dim_right {
            let mut acc = cx(0.0, 0.0);
            for i in 0..dim_left {
                acc += m.matrix()[(i * dim_right + j, i * dim_right + j2)];
            }
            out[(j, j2)] = acc;
        }
    }
    Ok(ComplexMatrix::from_raw(out))
}

fn check_bipartite(m: &ComplexMatrix, dim_left: usize, dim_right: usize) -> Result<()> {
    let d = dim_left * dim_right;
    if m.nrows() != d || m.ncols() != d {
        return Err(CoreError::DimensionMismatch { left: m.nrows(), right: d });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn eig_sorts_ascending_for_diagonal() {
        let h = HermitianMatrix::from_matrix(ComplexMatrix::from_real_diagonal(&[2.0, 1.0]).into_matrix()).unwrap();
        let eig = h.eig().unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 2.0).abs() < 1e-12);
        // eigenvectors form a permutation
        assert!((eig.vectors[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((eig.vectors[(0, 1)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_pauli_x() {
        let m = CMat::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)]);
        let eig = HermitianMatrix::from_matrix(m).unwrap().eig().unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 1.0).abs() < 1e-12);
        let s = 0.5_f64.sqrt();
        for k in 0..2 {
            let col = eig.vectors.column(k);
            assert!((col[0].norm() - s).abs() < 1e-10);
            assert!((col[1].norm() - s).abs() < 1e-10);
        }
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random::random_hermitian(5, &mut rng);
        let eig = h.eig().unwrap();
        assert!(max_abs_diff(&eig.reconstruct(), h.matrix()) < 1e-10);
        assert!(unitarity_defect(&eig.vectors) < 1e-9);
    }

    #[test]
    fn matrix_sqrt_of_diagonal() {
        let p = PositiveOperator::from_diagonal(&[4.0, 9.0]).unwrap();
        let s = p.sqrt();
        assert!((s.matrix()[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((s.matrix()[(1, 1)].re - 3.0).abs() < 1e-12);
        let id = PositiveOperator::from_matrix(CMat::identity(3, 3)).unwrap();
        assert!(max_abs_diff(id.sqrt().matrix(), &CMat::identity(3, 3)) < 1e-12);
    }

    #[test]
    fn matrix_sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2usize, 4, 8] {
            let p = random::random_positive(dim, &mut rng);
            let s = p.sqrt();
            let sq = s.matrix() * s.matrix();
            assert!(max_abs_diff(&sq, p.matrix()) < 1e-10, "dim {dim}");
        }
    }

    #[test]
    fn matrix_function_domain_error() {
        let p = PositiveOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let err = p.matrix_function(|l| 1.0 / l).unwrap_err();
        assert!(matches!(err, CoreError::DomainError { .. }));
    }

    #[test]
    fn quasi_inverse_inverts_support_only() {
        let p = PositiveOperator::from_diagonal(&[2.0, 0.0]).unwrap();
        let qi = p.quasi_inverse(-1.0, &tol());
        assert!((qi.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!(qi.matrix()[(1, 1)].norm() < 1e-12);

        let id = PositiveOperator::from_matrix(CMat::identity(4, 4)).unwrap();
        assert!(max_abs_diff(id.quasi_inverse(-1.0, &tol()).matrix(), &CMat::identity(4, 4)) < 1e-12);
    }

    #[test]
    fn quasi_inverse_product_is_support_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        // rank-2 operator in dim 4
        let g = random::complex_ginibre(4, 2, &mut rng);
        let p = PositiveOperator::from_matrix(&g * g.adjoint()).unwrap();
        let qi = p.quasi_inverse(-1.0, &tol());
        let proj = p.matrix() * qi.matrix();
        // idempotent within 1e-9
        assert!(max_abs_diff(&(&proj * &proj), &proj) < 1e-9);
        // agrees with the support projector
        assert!(max_abs_diff(&proj, p.support_projector(&tol()).matrix()) < 1e-9);
        // double quasi-inverse restores P on its support
        let back = qi.quasi_inverse(-1.0, &tol());
        assert!(max_abs_diff(back.matrix(), p.matrix()) < 1e-9);
    }

    #[test]
    fn trace_norm_examples() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, -2.0]);
        assert!((trace_norm(&m) - 3.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random::haar_unitary(4, &mut rng);
        assert!((trace_norm(&u) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn trace_norm_matches_eig_oracle() {
        // independent route: sqrt of eigenvalues of M†M
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let m = random::complex_ginibre(5, 5, &mut rng);
        let gram = m.adjoint() * &m;
        let eig = eig_hermitian_raw(&hermitian_part(&gram)).unwrap();
        let oracle: f64 = eig.values.iter().map(|l| l.max(0.0).sqrt()).sum();
        let got = trace_norm_raw(&m);
        assert!((got - oracle).abs() < 1e-9, "got {got}, oracle {oracle}");
    }

    #[test]
    fn polar_of_psd_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let rho = random::random_density(3, &mut rng);
        let w = rho.sqrt().as_complex();
        let (p, u) = polar_decompose(&w).unwrap();
        assert!(max_abs_diff(p.matrix(), w.matrix()) < 1e-9);
        assert!(max_abs_diff(u.matrix(), &CMat::identity(3, 3)) < 1e-8);
    }

    #[test]
    fn polar_of_unitary_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let w = random::haar_unitary(3, &mut rng);
        let (p, u) = polar_decompose(&w).unwrap();
        assert!(max_abs_diff(p.matrix(), &CMat::identity(3, 3)) < 1e-9);
        assert!(max_abs_diff(u.matrix(), w.matrix()) < 1e-9);
    }

    #[test]
    fn polar_reconstructs_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let w = ComplexMatrix::new(random::complex_ginibre(4, 4, &mut rng)).unwrap();
        let (p, u) = polar_decompose(&w).unwrap();
        assert!(max_abs_diff(&(p.matrix() * u.matrix()), w.matrix()) < 1e-9);
        assert!(unitarity_defect(u.matrix()) < 1e-9);
    }

    #[test]
    fn polar_of_singular_matrix_completes_the_unitary() {
        // rank-1 input: the kernel completion still yields an exact unitary
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let col = random::complex_ginibre(3, 1, &mut rng);
        let row = random::complex_ginibre(1, 3, &mut rng);
        let w = ComplexMatrix::new(&col * &row).unwrap();
        let (p, u) = polar_decompose(&w).unwrap();
        assert!(unitarity_defect(u.matrix()) < 1e-10);
        assert!(max_abs_diff(&(p.matrix() * u.matrix()), w.matrix()) < 1e-10);
        // deterministic: same input gives the same completion
        let (_, u2) = polar_decompose(&w).unwrap();
        assert_eq!(u.matrix(), u2.matrix());
    }

    #[test]
    fn lyapunov_maximally_mixed_returns_x() {
        let rho = DensityOperator::from_diagonal(&[0.5, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let x = random::random_hermitian(2, &mut rng);
        let sol = lyapunov_solve(&rho, &x, &tol()).unwrap();
        assert!(max_abs_diff(sol.g.matrix(), x.matrix()) < 1e-10);
        assert!(!sol.singular_support);
    }

    #[test]
    fn lyapunov_diagonal_formula() {
        let (a, b) = (0.7, 0.3);
        let rho = DensityOperator::from_diagonal(&[a, b]).unwrap();
        let x = HermitianMatrix::from_matrix(CMat::from_row_slice(
            2,
            2,
            &[cx(0.2, 0.0), cx(0.1, -0.4), cx(0.1, 0.4), cx(-0.2, 0.0)],
        ))
        .unwrap();
        let sol = lyapunov_solve(&rho, &x, &tol()).unwrap();
        let g = sol.g.matrix();
        assert!((g[(0, 0)].re - 0.2 / (2.0 * a)).abs() < 1e-12);
        assert!((g[(1, 1)].re + 0.2 / (2.0 * b)).abs() < 1e-12);
        let expected01 = cx(0.1, -0.4) / cx(a + b, 0.0);
        assert!((g[(0, 1)] - expected01).norm() < 1e-12);
    }

    #[test]
    fn lyapunov_full_rank_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let rho = random::random_density(4, &mut rng);
        let x = random::random_hermitian(4, &mut rng);
        let sol = lyapunov_solve(&rho, &x, &tol()).unwrap();
        assert!(sol.residual < 1e-9);
        assert!(!sol.singular_support);
    }

    #[test]
    fn lyapunov_flags_singular_support() {
        // rank-1 rho, X with weight off the support
        let rho = DensityOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let x = HermitianMatrix::from_matrix(CMat::from_row_slice(
            2,
            2,
            &[cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)],
        ))
        .unwrap();
        let sol = lyapunov_solve(&rho, &x, &tol()).unwrap();
        assert!(sol.singular_support);
        assert!(sol.residual > 0.5);
    }

    #[test]
    fn psd_clamping_and_rejection() {
        let near = ComplexMatrix::from_real_diagonal(&[1.0, -5e-11]);
        let p = PositiveOperator::from_matrix(near.into_matrix()).unwrap();
        assert!(p.eigenvalues()[0] >= 0.0);
        assert!(p.eigenvalue_floor() < 0.0);

        let bad = ComplexMatrix::from_real_diagonal(&[1.0, -1e-5]);
        assert!(matches!(
            PositiveOperator::from_matrix(bad.into_matrix()),
            Err(CoreError::NotPositive { .. })
        ));
    }

    #[test]
    fn density_trace_check() {
        assert!(DensityOperator::from_diagonal(&[0.6, 0.5]).is_err());
        let rho = DensityOperator::from_diagonal(&[0.6, 0.4]).unwrap();
        assert!(rho.is_normalized());
        let un = DensityOperator::unnormalized(PositiveOperator::from_diagonal(&[2.0, 1.0]).unwrap());
        assert!(!un.is_normalized());
        assert!((un.trace() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_rejects_crooked_input() {
        let m = CMat::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(1.0, 0.0), cx(0.5, 0.0), cx(0.0, 0.0)]);
        assert!(matches!(
            HermitianMatrix::from_matrix(m),
            Err(CoreError::NonHermitian { .. })
        ));
    }

    #[test]
    fn partial_traces_of_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let a = random::random_density(2, &mut rng);
        let b = random::random_density(3, &mut rng);
        let ab = kron(&a.positive().as_complex(), &b.positive().as_complex());
        let left = partial_trace_right(&ab, 2, 3).unwrap();
        let right = partial_trace_left(&ab, 2, 3).unwrap();
        assert!(max_abs_diff(left.matrix(), a.matrix()) < 1e-12);
        assert!(max_abs_diff(right.matrix(), b.matrix()) < 1e-12);
    }
}
