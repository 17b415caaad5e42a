//! Amplitudes `W` with `ρ = WW†`, parallel pairs, gauge invariants,
//! parallel transport along discretized curves of density operators, Bures
//! length and distance, the gauge potential, and holonomy of closed curves.
//!
//! The transport integrator solves `Ẇ_s = G_s W_s` with the Hermitian
//! cotangent `G_s` from `ρ̇ = Gρ + ρG`: per step it forms `ρ̇` by a finite
//! difference (midpoint by default), solves for `G_k` and advances
//! `W_{k+1} = exp(G_k Δs) W_k`. The Hermitian exponential keeps `W`
//! invertible exactly and makes the scheme second order.
//!
//! Parallelity of the discrete lift is reported per step as
//! `‖Ŵ_k†Ŵ_{k+1} − Ŵ_{k+1}†Ŵ_k‖_max` where `Ŵ_j = √ρ_j · polar(W_j)`
//! re-projects each computed amplitude onto an exact amplitude of its curve
//! state while keeping the transported gauge. (The raw defect of the
//! integrator's own iterates vanishes identically because `e^{GΔs}` is
//! Hermitian, so it would measure nothing.)

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{CoreError, Result};
use crate::fidelity::{fidelity_positive, geometric_mean_quasi};
use crate::operator::{
    herm_exp, max_abs, max_abs_diff, polar_unitary_raw, trace_norm_raw, CMat, ComplexMatrix,
    DensityOperator, HermitianMatrix, PositiveOperator,
};

/// Max ‖WW† − ρ‖_max accepted when validating an amplitude against its
/// state.
pub const AMPLITUDE_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Amplitude
// ---------------------------------------------------------------------------

/// An amplitude `W` of a density operator: any operator with `WW† = ρ`.
/// The square root is one of them; the rest differ by a right unitary
/// gauge `W → WU`.
#[derive(Clone, Debug)]
pub struct Amplitude {
    w: ComplexMatrix,
    rho: DensityOperator,
    defect: f64,
}

impl Amplitude {
    pub fn new(w: ComplexMatrix, rho: DensityOperator) -> Result<Self> {
        w.require_square()?;
        if w.dim() != rho.dim() {
            return Err(CoreError::DimensionMismatch { left: w.dim(), right: rho.dim() });
        }
        let defect = max_abs(&(w.matrix() * w.matrix().adjoint() - rho.matrix()));
        if defect > AMPLITUDE_TOL {
            return Err(CoreError::NotAnAmplitude { defect, tol: AMPLITUDE_TOL });
        }
        Ok(Self { w, rho, defect })
    }

    /// The canonical amplitude `W = √ρ`.
    pub fn from_sqrt(rho: &DensityOperator) -> Self {
        let w = rho.sqrt().as_complex();
        let defect = max_abs(&(w.matrix() * w.matrix().adjoint() - rho.matrix()));
        Self { w, rho: rho.clone(), defect }
    }

    /// Gauge transform `W → WU`. `WW†` is untouched by a right unitary, so
    /// the recorded defect carries over instead of being re-gated (lifts
    /// produced by the integrator are only O(Δs²) amplitudes).
    pub fn gauge(&self, u: &ComplexMatrix) -> Result<Self> {
        u.require_square()?;
        if u.dim() != self.dim() {
            return Err(CoreError::DimensionMismatch { left: self.dim(), right: u.dim() });
        }
        Ok(Amplitude::from_parts(self.w.matrix() * u.matrix(), self.rho.clone()))
    }

    /// Wraps a transported iterate, recording (instead of validating) how
    /// far it is from an exact amplitude of `rho`.
    pub(crate) fn from_parts(w: CMat, rho: DensityOperator) -> Self {
        let defect = max_abs(&(&w * w.adjoint() - rho.matrix()));
        Self { w: ComplexMatrix::from_raw(w), rho, defect }
    }

    pub fn matrix(&self) -> &CMat {
        self.w.matrix()
    }

    pub fn complex_matrix(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn state(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    /// ‖WW† − ρ‖_max recorded at construction.
    pub fn defect(&self) -> f64 {
        self.defect
    }
}

// ---------------------------------------------------------------------------
// DensityCurve
// ---------------------------------------------------------------------------

/// A sampled curve `s → ρ_s` on a strictly increasing parameter grid.
#[derive(Clone, Debug)]
pub struct DensityCurve {
    grid: Vec<f64>,
    states: Vec<DensityOperator>,
}

impl DensityCurve {
    pub fn new(grid: Vec<f64>, states: Vec<DensityOperator>) -> Result<Self> {
        Self::with_tolerances(grid, states, &Tolerances::default())
    }

    pub fn with_tolerances(
        grid: Vec<f64>,
        states: Vec<DensityOperator>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if states.len() < 2 {
            return Err(CoreError::CurveTooShort { needed: 2, got: states.len() });
        }
        if grid.len() != states.len() {
            return Err(CoreError::LengthMismatch { left: grid.len(), right: states.len() });
        }
        let dim = states[0].dim();
        for s in &states {
            if s.dim() != dim {
                return Err(CoreError::DimensionMismatch { left: dim, right: s.dim() });
            }
        }
        for k in 0..grid.len() - 1 {
            let increasing = grid[k + 1].partial_cmp(&grid[k]) == Some(std::cmp::Ordering::Greater);
            if !increasing {
                return Err(CoreError::GridNotIncreasing(k + 1));
            }
            let distance = 0.5 * trace_norm_raw(&(states[k + 1].matrix() - states[k].matrix()));
            if distance > tol.curve_step_tol {
                return Err(CoreError::CurveStepTooLarge { step: k, distance, tol: tol.curve_step_tol });
            }
        }
        Ok(Self { grid, states })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// Trace distance between the endpoints.
    pub fn closure_defect(&self) -> f64 {
        0.5 * trace_norm_raw(&(self.states[self.states.len() - 1].matrix() - self.states[0].matrix()))
    }

    pub fn is_closed(&self, tol: &Tolerances) -> bool {
        self.closure_defect() <= tol.closure_tol
    }
}

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

/// Finite-difference scheme for ρ̇ along the curve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TransportScheme {
    /// Evaluate ρ and G at the interval midpoint (second order).
    #[default]
    Midpoint,
    /// Evaluate at the left endpoint (first order, for comparisons).
    Forward,
}

#[derive(Clone, Debug, Default)]
pub struct TransportOptions {
    pub scheme: TransportScheme,
}

/// Lifted amplitude curve with its cotangents, Bures length, per-step
/// diagnostics and, for closed curves, holonomy data.
#[derive(Clone, Debug)]
pub struct TransportResult {
    /// `W_k`, one per grid point; `amplitudes[0]` is the initial amplitude.
    pub amplitudes: Vec<Amplitude>,
    /// Cotangents `G_k`, one per step.
    pub cotangents: Vec<HermitianMatrix>,
    /// Quadrature of `∫ (Tr G_s ρ_s G_s)^{1/2} ds`.
    pub bures_length: f64,
    /// `W_0^{-1} W_N` for closed curves with invertible start amplitude.
    pub holonomy: Option<ComplexMatrix>,
    /// `arg Tr(W_0† W_N)` for closed curves.
    pub phase: Option<f64>,
    /// ‖V†V − I‖_max of the holonomy, when present.
    pub holonomy_unitarity_defect: Option<f64>,
    /// Per-step parallelity defect of the re-projected lift.
    pub parallelity_defects: Vec<f64>,
    /// Per-step residual of the Lyapunov solve.
    pub lyapunov_residuals: Vec<f64>,
    /// Steps whose Lyapunov residual exceeded `residual_tol`.
    pub singular_steps: Vec<usize>,
}

impl TransportResult {
    /// Summed per-step parallelity defect; shrinks as O(Δs²).
    pub fn total_parallelity_defect(&self) -> f64 {
        self.parallelity_defects.iter().sum()
    }

    /// Largest ‖W_kW_k† − ρ_k‖_max over the lift.
    pub fn max_amplitude_defect(&self) -> f64 {
        self.amplitudes.iter().map(Amplitude::defect).fold(0.0, f64::max)
    }
}

/// Parallel-transports `w0` along the curve.
pub fn transport(
    curve: &DensityCurve,
    w0: &Amplitude,
    opts: &TransportOptions,
    tol: &Tolerances,
) -> Result<TransportResult> {
    if w0.dim() != curve.dim() {
        return Err(CoreError::DimensionMismatch { left: w0.dim(), right: curve.dim() });
    }
    if max_abs_diff(w0.state().matrix(), curve.states()[0].matrix()) > AMPLITUDE_TOL {
        return Err(CoreError::NotAnAmplitude { defect: w0.defect(), tol: AMPLITUDE_TOL });
    }
    let n_steps = curve.len() - 1;
    let mut amplitudes = Vec::with_capacity(curve.len());
    amplitudes.push(Amplitude::from_parts(w0.matrix().clone(), curve.states()[0].clone()));
    let mut cotangents = Vec::with_capacity(n_steps);
    let mut lyapunov_residuals = Vec::with_capacity(n_steps);
    let mut singular_steps = Vec::new();
    let mut bures_length = 0.0;

    let mut w = w0.matrix().clone();
    for k in 0..n_steps {
        let ds = curve.grid()[k + 1] - curve.grid()[k];
        let rho_k = &curve.states()[k];
        let rho_next = &curve.states()[k + 1];
        let rho_dot =
            HermitianMatrix::from_raw_unchecked((rho_next.matrix() - rho_k.matrix()).scale(1.0 / ds));
        let rho_eval = match opts.scheme {
            TransportScheme::Midpoint => DensityOperator::unnormalized(PositiveOperator::from_matrix(
                (rho_k.matrix() + rho_next.matrix()).scale(0.5),
            )?),
            TransportScheme::Forward => rho_k.clone(),
        };
        let sol = crate::operator::lyapunov_solve(&rho_eval, &rho_dot, tol)?;
        if sol.singular_support {
            singular_steps.push(k);
        }
        lyapunov_residuals.push(sol.residual);

        let g = sol.g.matrix();
        let speed_sq: f64 =
            (g * rho_eval.matrix() * g).diagonal().iter().map(|z| z.re).sum::<f64>().max(0.0);
        bures_length += speed_sq.sqrt() * ds;

        w = herm_exp(g, ds)? * w;
        amplitudes.push(Amplitude::from_parts(w.clone(), rho_next.clone()));
        cotangents.push(sol.g);
    }

    let parallelity_defects = lift_parallelity_defects(&amplitudes)?;

    let (holonomy, phase, holonomy_unitarity_defect) = if curve.is_closed(tol) {
        let w0m = w0.matrix();
        let wn = amplitudes[n_steps].matrix();
        let phase = {
            let t = (w0m.adjoint() * wn).diagonal().iter().sum::<Complex64>();
            Some(t.arg())
        };
        match w0m.clone().try_inverse() {
            Some(w0_inv) => {
                let v = w0_inv * wn;
                let defect = crate::operator::unitarity_defect(&v);
                (Some(ComplexMatrix::from_raw(v)), phase, Some(defect))
            }
            None => (None, phase, None),
        }
    } else {
        (None, None, None)
    };

    Ok(TransportResult {
        amplitudes,
        cotangents,
        bures_length,
        holonomy,
        phase,
        holonomy_unitarity_defect,
        parallelity_defects,
        lyapunov_residuals,
        singular_steps,
    })
}

/// Re-projects each amplitude onto an exact amplitude of its state (same
/// gauge, snapped radial part) and measures the pairwise parallelity defect
/// `‖Ŵ_k†Ŵ_{k+1} − Ŵ_{k+1}†Ŵ_k‖_max` per step.
fn lift_parallelity_defects(lift: &[Amplitude]) -> Result<Vec<f64>> {
    let mut snapped = Vec::with_capacity(lift.len());
    for a in lift {
        let u = polar_unitary_raw(a.matrix())?;
        snapped.push(a.state().sqrt().matrix() * u);
    }
    let mut defects = Vec::with_capacity(lift.len().saturating_sub(1));
    for pair in snapped.windows(2) {
        let cross = pair[0].adjoint() * &pair[1];
        defects.push(max_abs(&(&cross - cross.adjoint())));
    }
    Ok(defects)
}

// ---------------------------------------------------------------------------
// Pure-state transport (independent rank-1 oracle)
// ---------------------------------------------------------------------------

/// Lift of a pure-state curve with the accumulated geometric phase.
#[derive(Clone, Debug)]
pub struct PureTransport {
    /// Phase-corrected vectors; adjacent overlaps are real and positive.
    pub vectors: Vec<nalgebra::DVector<Complex64>>,
    /// `arg ⟨χ_0, χ_N⟩` — the Berry phase when the curve is closed.
    pub phase: f64,
}

/// Parallel (adiabatic) transport of a curve of unit vectors: each vector
/// is phase-corrected so that `⟨χ_k, χ_{k+1}⟩` is real and positive, the
/// discrete version of `⟨ψ|ψ̇⟩ = 0`. Serves as the independent oracle for
/// rank-1 limits of [`transport`].
pub fn pure_state_transport(states: &[nalgebra::DVector<Complex64>]) -> Result<PureTransport> {
    if states.len() < 2 {
        return Err(CoreError::CurveTooShort { needed: 2, got: states.len() });
    }
    for psi in states {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(CoreError::NotUnitVector(norm));
        }
    }
    let mut vectors = Vec::with_capacity(states.len());
    vectors.push(states[0].clone());
    for (k, psi) in states.iter().enumerate().skip(1) {
        let prev = &vectors[k - 1];
        let overlap: Complex64 = prev.dotc(psi);
        if overlap.norm() < 1e-12 {
            return Err(CoreError::VanishingOverlap(k - 1));
        }
        let correction = overlap.conj() / overlap.norm();
        vectors.push(psi * correction);
    }
    let closing: Complex64 = vectors[0].dotc(&vectors[vectors.len() - 1]);
    Ok(PureTransport { vectors, phase: closing.arg() })
}

// ---------------------------------------------------------------------------
// Parallel pairs and gauge invariants
// ---------------------------------------------------------------------------

/// A gauge-aligned amplitude pair with `0 ≤ W₁†W₂ = W₂†W₁`.
#[derive(Clone, Debug)]
pub struct ParallelPair {
    pub w1: Amplitude,
    pub w2: Amplitude,
    /// ε of the `ρ + εI` shift applied when ρ₁ was singular.
    pub regularization: Option<f64>,
}

/// Builds the parallel pair `W₁ = √ρ₁`, `W₂ = (ρ₂ # ρ₁^{[-1]})·√ρ₁`.
/// Then `W₁†W₂ ≥ 0` and `Tr W₁†W₂ = F(ρ₁,ρ₂)`. A singular ρ₁ is shifted by
/// `εI` (reported) before the geometric mean is formed.
pub fn make_parallel_pair(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    tol: &Tolerances,
) -> Result<ParallelPair> {
    if rho1.dim() != rho2.dim() {
        return Err(CoreError::DimensionMismatch { left: rho1.dim(), right: rho2.dim() });
    }
    let (p1, regularization) = if rho1.positive().is_invertible(tol) {
        (rho1.positive().clone(), None)
    } else {
        let eps = 1e-9 * rho1.trace();
        let eig = rho1.positive().eigensystem();
        let shifted = PositiveOperator::from_eigen_parts(
            eig.values.iter().map(|l| l + eps).collect(),
            eig.vectors.clone(),
        );
        (shifted, Some(eps))
    };
    let mean = geometric_mean_quasi(rho2.positive(), &p1, tol)?;
    let w1 = Amplitude::from_sqrt(rho1);
    let w2m = mean.matrix() * p1.sqrt().matrix();
    let w2 = Amplitude::from_parts(w2m, rho2.clone());
    Ok(ParallelPair { w1, w2, regularization })
}

/// The gauge invariant `W₂W₁^{-1}`: unchanged under the simultaneous gauge
/// `W_j → W_jU`, and equal to `ρ₂ # ρ₁^{[-1]}` (psd) for parallel pairs.
pub fn gauge_ratio(w1: &Amplitude, w2: &Amplitude) -> Result<ComplexMatrix> {
    if w1.dim() != w2.dim() {
        return Err(CoreError::DimensionMismatch { left: w1.dim(), right: w2.dim() });
    }
    let svals = crate::operator::singular_values_raw(w1.matrix());
    let smax = svals.first().copied().unwrap_or(0.0);
    let smin = svals.last().copied().unwrap_or(0.0);
    if smin <= smax * 1e-12 {
        return Err(CoreError::SingularAmplitude(smin));
    }
    let inv = w1.matrix().clone().try_inverse().ok_or(CoreError::SingularAmplitude(smin))?;
    Ok(ComplexMatrix::from_raw(w2.matrix() * inv))
}

// ---------------------------------------------------------------------------
// Gauge potential
// ---------------------------------------------------------------------------

/// Discrete gauge potential of a lift: per step
/// `A_k = W̄^{-1}(Ẇ − G_k W̄)` with the midpoint average `W̄` and finite
/// difference `Ẇ`, and `G_k` recomputed from the curve. Approximately
/// anti-Hermitian; `A_k = O(Δs²)` exactly when the lift is parallel. Under
/// a gauge `W_k → W_k U_k` the reported potential transforms as
/// `A → Ū^{-1}AŪ + Ū^{-1}U̇`.
pub fn gauge_potential(
    curve: &DensityCurve,
    lift: &[Amplitude],
    tol: &Tolerances,
) -> Result<Vec<ComplexMatrix>> {
    if lift.len() != curve.len() {
        return Err(CoreError::LengthMismatch { left: lift.len(), right: curve.len() });
    }
    let mut potentials = Vec::with_capacity(curve.len() - 1);
    for k in 0..curve.len() - 1 {
        let ds = curve.grid()[k + 1] - curve.grid()[k];
        let rho_mid = DensityOperator::unnormalized(PositiveOperator::from_matrix(
            (curve.states()[k].matrix() + curve.states()[k + 1].matrix()).scale(0.5),
        )?);
        let rho_dot = HermitianMatrix::from_raw_unchecked(
            (curve.states()[k + 1].matrix() - curve.states()[k].matrix()).scale(1.0 / ds),
        );
        let g = crate::operator::lyapunov_solve(&rho_mid, &rho_dot, tol)?.g;

        let w_mid = (lift[k].matrix() + lift[k + 1].matrix()).scale(0.5);
        let w_dot = (lift[k + 1].matrix() - lift[k].matrix()).scale(1.0 / ds);
        let svals = crate::operator::singular_values_raw(&w_mid);
        let smin = svals.last().copied().unwrap_or(0.0);
        let inv = w_mid.clone().try_inverse().ok_or(CoreError::SingularAmplitude(smin))?;
        let a = inv * (w_dot - g.matrix() * w_mid);
        potentials.push(ComplexMatrix::from_raw(a));
    }
    Ok(potentials)
}

// ---------------------------------------------------------------------------
// Lengths and distance
// ---------------------------------------------------------------------------

/// Discretization of `∫ (Tr Ẇ_s Ẇ_s†)^{1/2} ds`: the polygonal Frobenius
/// length `Σ ‖W_{k+1} − W_k‖_F` of the lift. Parallel lifts minimize it
/// over all gaugings.
pub fn bures_length_of_lift(lift: &[Amplitude], grid: &[f64]) -> Result<f64> {
    if lift.len() != grid.len() {
        return Err(CoreError::LengthMismatch { left: lift.len(), right: grid.len() });
    }
    if lift.len() < 2 {
        return Err(CoreError::CurveTooShort { needed: 2, got: lift.len() });
    }
    let mut total = 0.0;
    for pair in lift.windows(2) {
        let diff = pair[1].matrix() - pair[0].matrix();
        total += diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    Ok(total)
}

/// Bures distance `√(2 − 2F(ρ₁,ρ₂))` between normalized states; short
/// curve segments have Bures length ≈ distance to second order.
pub fn bures_distance(rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    let f = fidelity_positive(rho1.positive(), rho2.positive())?;
    Ok((2.0 - 2.0 * f).max(0.0).sqrt())
}
