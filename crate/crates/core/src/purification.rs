//! Purification of density operators into `H ⊗ H`, the ν₁₂ operator, the
//! Cauchy–Schwarz admissibility constraint, and the maximization over
//! purifications that defines the transition probability.
//!
//! The maximally entangled reference `|φ⟩ = Σ_i |i⟩⊗|i⟩` is kept
//! unnormalized so that `Tr′ (W⊗1)|φ⟩⟨φ|(W†⊗1) = WW†` holds without any
//! dimension factor; an amplitude `W` of a normalized state then purifies
//! to a unit vector `(W⊗1)|φ⟩` directly. Both factors are indexed
//! identically (`|i⟩⊗|j⟩ ↦ i·d + j`), which makes right partial traces
//! produce transposed operators — a documented consequence of the basis
//! convention, tested rather than silently corrected.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{CoreError, Result};
use crate::fidelity::{fidelity_positive, Method};
use crate::operator::{cx, CMat, ComplexMatrix, DensityOperator};
use crate::random;
use crate::transport::{make_parallel_pair, Amplitude};
use crate::variational::OptimizerOptions;

// ---------------------------------------------------------------------------
// PureVector
// ---------------------------------------------------------------------------

/// A vector in `H_left ⊗ H_right` with the flat index `i·dim_right + j`.
#[derive(Clone, Debug)]
pub struct PureVector {
    dim_left: usize,
    dim_right: usize,
    entries: DVector<Complex64>,
    normalized: bool,
}

impl PureVector {
    pub fn new(dim_left: usize, dim_right: usize, entries: DVector<Complex64>) -> Result<Self> {
        if entries.len() != dim_left * dim_right {
            return Err(CoreError::InvalidInput(format!(
                "expected {} entries for a {}x{} bipartite vector, got {}",
                dim_left * dim_right,
                dim_left,
                dim_right,
                entries.len()
            )));
        }
        let norm = entries.norm();
        if !norm.is_finite() {
            return Err(CoreError::NotUnitVector(norm));
        }
        let normalized = (norm - 1.0).abs() <= 1e-10;
        Ok(Self { dim_left, dim_right, entries, normalized })
    }

    pub fn dim_left(&self) -> usize {
        self.dim_left
    }

    pub fn dim_right(&self) -> usize {
        self.dim_right
    }

    pub fn entries(&self) -> &DVector<Complex64> {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `⟨self, other⟩` (conjugate-linear in `self`).
    pub fn overlap(&self, other: &PureVector) -> Result<Complex64> {
        if self.entries.len() != other.entries.len() {
            return Err(CoreError::DimensionMismatch {
                left: self.entries.len(),
                right: other.entries.len(),
            });
        }
        Ok(self.entries.dotc(&other.entries))
    }

    /// The projector |self⟩⟨self| on the doubled space.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::from_raw(&self.entries * self.entries.adjoint())
    }
}

/// `Tr′ |a⟩⟨b|`: partial trace of the outer product over the right factor.
pub fn outer_partial_trace_right(a: &PureVector, b: &PureVector) -> Result<ComplexMatrix> {
    if a.dim_left != b.dim_left || a.dim_right != b.dim_right {
        return Err(CoreError::DimensionMismatch { left: a.entries.len(), right: b.entries.len() });
    }
    let (dl, dr) = (a.dim_left, a.dim_right);
    let mut out = CMat::zeros(dl, dl);
    for i in 0..dl {
        for i2 in 0..dl {
            let mut acc = cx(0.0, 0.0);
            for j in 0..dr {
                acc += a.entries[i * dr + j] * b.entries[i2 * dr + j].conj();
            }
            out[(i, i2)] = acc;
        }
    }
    Ok(ComplexMatrix::from_raw(out))
}

/// `Tr |a⟩⟨b|` over the left factor.
pub fn outer_partial_trace_left(a: &PureVector, b: &PureVector) -> Result<ComplexMatrix> {
    if a.dim_left != b.dim_left || a.dim_right != b.dim_right {
        return Err(CoreError::DimensionMismatch { left: a.entries.len(), right: b.entries.len() });
    }
    let (dl, dr) = (a.dim_left, a.dim_right);
    let mut out = CMat::zeros(dr, dr);
    for j in 0..dr {
        for j2 in 0..dr {
            let mut acc = cx(0.0, 0.0);
            for i in 0..dl {
                acc += a.entries[i * dr + j] * b.entries[i * dr + j2].conj();
            }
            out[(j, j2)] = acc;
        }
    }
    Ok(ComplexMatrix::from_raw(out))
}

/// The unnormalized maximally entangled reference `Σ_i |i⟩⊗|i⟩`; its left
/// partial trace is the identity.
pub fn max_entangled(d: usize) -> PureVector {
    let mut entries = DVector::zeros(d * d);
    for i in 0..d {
        entries[i * d + i] = cx(1.0, 0.0);
    }
    PureVector { dim_left: d, dim_right: d, entries, normalized: d == 1 }
}

/// `|φ_W⟩ = (W ⊗ 1)|φ⟩`: purifies `WW†` (left partial trace of the
/// projector), while the right partial trace is `transpose(W†W)` in this
/// basis convention.
pub fn purify(w: &Amplitude) -> PureVector {
    let d = w.dim();
    let m = w.matrix();
    let mut entries = DVector::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            entries[i * d + j] = m[(i, j)];
        }
    }
    let norm = entries.norm();
    PureVector { dim_left: d, dim_right: d, entries, normalized: (norm - 1.0).abs() <= 1e-10 }
}

// ---------------------------------------------------------------------------
// ν₁₂
// ---------------------------------------------------------------------------

/// `ν₁₂ = Tr′ |φ₂⟩⟨φ₁| = W₂W₁†`, the object whose trace the purification
/// overlap computes. Admissibility is the Cauchy–Schwarz family
/// `|Tr ν₁₂A₁†A₂|² ≤ (Tr A₁†A₁ρ₁)(Tr A₂†A₂ρ₂)`, certified on sampled
/// probes.
#[derive(Clone, Debug)]
pub struct Nu12 {
    pub matrix: ComplexMatrix,
}

impl Nu12 {
    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }
}

/// `ν₁₂` from a pair of amplitudes.
pub fn nu12(w1: &Amplitude, w2: &Amplitude) -> Result<Nu12> {
    if w1.dim() != w2.dim() {
        return Err(CoreError::DimensionMismatch { left: w1.dim(), right: w2.dim() });
    }
    Ok(Nu12 { matrix: ComplexMatrix::from_raw(w2.matrix() * w1.matrix().adjoint()) })
}

// ---------------------------------------------------------------------------
// Overlap maximization over purifications
// ---------------------------------------------------------------------------

/// Result of the purification-overlap ascent.
#[derive(Clone, Debug)]
pub struct MaxOverlap {
    /// `max |⟨φ₁, φ₂⟩|²` found; converges to `Pr(ρ₁,ρ₂)`.
    pub value: f64,
    pub u1: ComplexMatrix,
    pub u2: ComplexMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step (non-decreasing).
    pub objective_history: Vec<f64>,
}

fn skew_part(m: &CMat) -> CMat {
    (m - m.adjoint()).scale(0.5)
}

// exp(ξ) for anti-Hermitian ξ, through the Hermitian eigendecomposition of
// −iξ
fn exp_anti_hermitian(xi: &CMat) -> Result<CMat> {
    let h = xi * cx(0.0, -1.0);
    let eig = crate::operator::eig_hermitian_raw(&crate::operator::hermitian_part(&h))?;
    let n = h.nrows();
    let mut scaled = eig.vectors.clone();
    for (k, l) in eig.values.iter().enumerate() {
        let phase = Complex64::new(0.0, *l).exp();
        for r in 0..n {
            scaled[(r, k)] *= phase;
        }
    }
    Ok(&scaled * eig.vectors.adjoint())
}

/// Maximizes `|⟨φ₁, φ₂⟩|²` over purifications
/// `φ_j = (√ρ_j U_j ⊗ 1)|φ⟩` by Riemannian ascent over the unitary pair:
/// the overlap equals `Tr(U₁†√ρ₁√ρ₂U₂)`, the gradient comes from the
/// skew projection of the trace-linear terms, and steps retract along
/// geodesics `U ← U·exp(ξ)`. The maximum is the transition probability.
pub fn max_overlap(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    opts: &OptimizerOptions,
) -> Result<MaxOverlap> {
    if rho1.dim() != rho2.dim() {
        return Err(CoreError::DimensionMismatch { left: rho1.dim(), right: rho2.dim() });
    }
    let n = rho1.dim();
    let m = rho1.sqrt().matrix() * rho2.sqrt().matrix();
    let mut u1 = CMat::identity(n, n);
    let mut u2 = CMat::identity(n, n);

    let overlap = |u1: &CMat, u2: &CMat| -> Complex64 {
        (u1.adjoint() * &m * u2).diagonal().iter().sum()
    };

    let mut z = overlap(&u1, &u2);
    let mut value = z.norm_sqr();
    let mut history = vec![value];
    let mut step = 1.0_f64;
    let mut stalled = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;
    // stall threshold below the accuracy target, as in the cone optimizer
    let stall_tol = opts.tol * 1e-3;

    while iterations < opts.max_iter {
        iterations += 1;
        // ascent directions: ξ_j = skew of the adjoint trace-linear factor
        let a2 = u1.adjoint() * &m; // z = Tr(A₂U₂)
        let xi2 = skew_part(&(a2 * &u2).map(|v| v * z.conj()).adjoint());
        let b1 = u2.adjoint() * m.adjoint(); // z̄ = Tr(B₁U₁)
        let xi1 = skew_part(&(b1 * &u1).map(|v| v * z).adjoint());

        let grad_sq: f64 = xi1.iter().map(|v| v.norm_sqr()).sum::<f64>()
            + xi2.iter().map(|v| v.norm_sqr()).sum::<f64>();
        if grad_sq.sqrt() < 1e-14 {
            converged = true;
            break;
        }

        let mut t = step;
        let mut accepted = None;
        for _ in 0..60 {
            let c1 = &u1 * exp_anti_hermitian(&xi1.scale(t))?;
            let c2 = &u2 * exp_anti_hermitian(&xi2.scale(t))?;
            let zc = overlap(&c1, &c2);
            let vc = zc.norm_sqr();
            if vc >= value + 1e-4 * t * grad_sq {
                accepted = Some((c1, c2, zc, vc));
                break;
            }
            t *= 0.5;
        }
        let Some((c1, c2, zc, vc)) = accepted else {
            converged = true;
            break;
        };
        let rel_change = (vc - value).abs() / value.abs().max(1e-300);
        u1 = c1;
        u2 = c2;
        z = zc;
        value = vc;
        history.push(value);
        step = (t * 2.0).min(10.0);

        if rel_change <= stall_tol {
            stalled += 1;
            if stalled >= 5 {
                converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
    }

    Ok(MaxOverlap {
        value,
        u1: ComplexMatrix::from_raw(u1),
        u2: ComplexMatrix::from_raw(u2),
        iterations,
        converged,
        objective_history: history,
    })
}

/// Fidelity through the purification route (square root of the maximal
/// overlap).
pub fn fidelity_via_purification(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    opts: &OptimizerOptions,
) -> Result<crate::fidelity::FidelityReport> {
    let res = max_overlap(rho1, rho2, opts)?;
    Ok(crate::fidelity::FidelityReport::from_probability(res.value, Method::Purification))
}

// ---------------------------------------------------------------------------
// Supremum over admissible ν₁₂
// ---------------------------------------------------------------------------

/// Report of the sampled supremum `sup |Tr ν₁₂|²` over admissible ν₁₂.
#[derive(Clone, Debug)]
pub struct SupNuReport {
    /// Best `|Tr ν₁₂|²` over the random samples.
    pub best_sampled: f64,
    /// `|Tr ν₁₂|²` of the parallel-amplitude choice, which attains the
    /// supremum.
    pub parallel_value: f64,
    /// The transition probability the supremum equals.
    pub bound: f64,
}

/// Samples admissible `ν₁₂ = W₂UW₁†` over Haar-random gauges and compares
/// against the parallel-pair value and the closed-form bound.
pub fn sup_nu_check(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<SupNuReport> {
    if rho1.dim() != rho2.dim() {
        return Err(CoreError::DimensionMismatch { left: rho1.dim(), right: rho2.dim() });
    }
    let f = fidelity_positive(rho1.positive(), rho2.positive())?;
    let bound = f * f;

    let s1 = rho1.sqrt();
    let s2 = rho2.sqrt();
    let mut rng = random::rng_from_seed(seed);
    let mut best_sampled = 0.0_f64;
    for _ in 0..samples.max(1) {
        let u = random::haar_unitary(rho1.dim(), &mut rng);
        let nu = s2.matrix() * u.matrix() * s1.matrix();
        let t: Complex64 = nu.diagonal().iter().sum();
        best_sampled = best_sampled.max(t.norm_sqr());
    }

    let pair = make_parallel_pair(rho1, rho2, tol)?;
    let nu = nu12(&pair.w1, &pair.w2)?;
    let parallel_value = nu.trace().norm_sqr();

    Ok(SupNuReport { best_sampled, parallel_value, bound })
}
