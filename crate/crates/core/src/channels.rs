//! Quantum channels in Kraus form, positive trace-preserving maps built as
//! transpose compositions, adjoints, Choi's inequality, and the
//! monotonicity / functor-condition test battery.
//!
//! Monotonicity of the transition probability needs only positivity and
//! trace preservation, not complete positivity; the `StochasticMap` enum
//! carries both CPTP channels and transpose-composed positive maps so the
//! sweeps exercise the stronger claim.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{CoreError, Result};
use crate::fidelity::{fidelity_positive, trace_norm_bound_value, transition_probability};
use crate::operator::{
    eig_hermitian_raw, hermitian_part, max_abs_diff, CMat, ComplexMatrix, DensityOperator,
    HermitianMatrix, PositiveOperator,
};
use crate::random;

/// Max completeness defect `‖Σ K†K − I‖_max` accepted by channel
/// constructors.
pub const COMPLETENESS_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// KrausChannel
// ---------------------------------------------------------------------------

/// A completely positive trace-preserving map `ρ ↦ Σ K_i ρ K_i†` with
/// `Σ K_i†K_i = I`. Kraus operators are `dim_out × dim_in`.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    kraus: Vec<ComplexMatrix>,
    dim_in: usize,
    dim_out: usize,
    completeness_defect: f64,
}

impl KrausChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(CoreError::InvalidInput("a channel needs at least one Kraus operator".into()));
        }
        let dim_out = kraus[0].nrows();
        let dim_in = kraus[0].ncols();
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(CoreError::DimensionMismatch { left: k.nrows(), right: dim_out });
            }
        }
        let mut sum = CMat::zeros(dim_in, dim_in);
        for k in &kraus {
            sum += k.matrix().adjoint() * k.matrix();
        }
        let completeness_defect = max_abs_diff(&sum, &CMat::identity(dim_in, dim_in));
        if completeness_defect > COMPLETENESS_TOL {
            return Err(CoreError::NotTracePreserving { defect: completeness_defect });
        }
        Ok(Self { kraus, dim_in, dim_out, completeness_defect })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![ComplexMatrix::identity(dim)],
            dim_in: dim,
            dim_out: dim,
            completeness_defect: 0.0,
        }
    }

    pub fn from_unitary(u: ComplexMatrix) -> Result<Self> {
        u.require_square()?;
        Self::new(vec![u])
    }

    /// Fully depolarizing channel `ρ ↦ (Tr ρ) I/d`, Kraus set
    /// `{|i⟩⟨j|/√d}`.
    pub fn depolarizing(dim: usize) -> Self {
        let scale = 1.0 / (dim as f64).sqrt();
        let mut kraus = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut m = CMat::zeros(dim, dim);
                m[(i, j)] = Complex64::new(scale, 0.0);
                kraus.push(ComplexMatrix::from_raw(m));
            }
        }
        Self { kraus, dim_in: dim, dim_out: dim, completeness_defect: 0.0 }
    }

    /// Partial trace over the right factor of `H_left ⊗ H_right` as a
    /// channel: Kraus operators `I ⊗ ⟨j|`.
    pub fn partial_trace_right(dim_left: usize, dim_right: usize) -> Self {
        let dim_in = dim_left * dim_right;
        let mut kraus = Vec::with_capacity(dim_right);
        for j in 0..dim_right {
            let mut m = CMat::zeros(dim_left, dim_in);
            for i in 0..dim_left {
                m[(i, i * dim_right + j)] = Complex64::new(1.0, 0.0);
            }
            kraus.push(ComplexMatrix::from_raw(m));
        }
        Self { kraus, dim_in, dim_out: dim_left, completeness_defect: 0.0 }
    }

    pub fn kraus_operators(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    pub(crate) fn apply_raw(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k.matrix() * m * k.matrix().adjoint();
        }
        out
    }
}

/// `Φ(ρ) = Σ K_i ρ K_i†`. Preserves trace within the channel's
/// completeness defect and normalization status of the input.
pub fn apply(phi: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    if rho.dim() != phi.dim_in {
        return Err(CoreError::DimensionMismatch { left: rho.dim(), right: phi.dim_in });
    }
    let out = phi.apply_raw(rho.matrix());
    let p = PositiveOperator::from_matrix_with(
        out,
        &Tolerances { psd_tol: 1e-9, hermiticity_tol: 1e-9, ..Tolerances::default() },
    )?;
    if rho.is_normalized() {
        DensityOperator::with_tolerances(p, &Tolerances { trace_tol: 1e-9, ..Tolerances::default() })
    } else {
        Ok(DensityOperator::unnormalized(p))
    }
}

/// Draws a Haar-random isometry `dim_in → dim_out·kraus_count` and slices
/// it into Kraus operators; bit-reproducible per seed.
pub fn random_cptp(dim_in: usize, dim_out: usize, kraus_count: usize, seed: u64) -> Result<KrausChannel> {
    if kraus_count == 0 {
        return Err(CoreError::InvalidInput("kraus_count must be at least 1".into()));
    }
    let env = dim_out * kraus_count;
    if env < dim_in {
        return Err(CoreError::InvalidInput(format!(
            "no isometry from dimension {dim_in} into {dim_out}x{kraus_count}"
        )));
    }
    let mut rng = random::rng_from_seed(seed);
    let u = random::haar_unitary(env, &mut rng);
    let mut kraus = Vec::with_capacity(kraus_count);
    for i in 0..kraus_count {
        let mut k = CMat::zeros(dim_out, dim_in);
        for r in 0..dim_out {
            for c in 0..dim_in {
                k[(r, c)] = u.matrix()[(i * dim_out + r, c)];
            }
        }
        kraus.push(ComplexMatrix::from_raw(k));
    }
    KrausChannel::new(kraus)
}

// ---------------------------------------------------------------------------
// Adjoint (dual, unital) map
// ---------------------------------------------------------------------------

/// The adjoint `Ψ(A) = Σ K_i†AK_i` of a channel: positive and unital,
/// dual under `Tr Φ(ρ)A = Tr ρΨ(A)`.
#[derive(Clone, Debug)]
pub struct AdjointMap {
    kraus: Vec<ComplexMatrix>,
    dim_in: usize,
    dim_out: usize,
}

impl AdjointMap {
    pub fn apply_raw(&self, a: &CMat) -> Result<CMat> {
        if a.nrows() != self.dim_in || a.ncols() != self.dim_in {
            return Err(CoreError::DimensionMismatch { left: a.nrows(), right: self.dim_in });
        }
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k.matrix().adjoint() * a * k.matrix();
        }
        Ok(out)
    }

    pub fn apply(&self, a: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(HermitianMatrix::from_raw_unchecked(self.apply_raw(a.matrix())?))
    }

    /// Dimension of the operators the map accepts (the channel's output
    /// side).
    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }
}

/// Adjoint of a channel; `Ψ(I) = I` within the completeness defect.
pub fn adjoint(phi: &KrausChannel) -> AdjointMap {
    AdjointMap { kraus: phi.kraus.clone(), dim_in: phi.dim_out, dim_out: phi.dim_in }
}

/// Outcome of a Choi-inequality check `Ψ(A⁻¹) ≥ Ψ(A)⁻¹`.
#[derive(Clone, Debug)]
pub struct ChoiReport {
    pub lhs: HermitianMatrix,
    pub rhs: HermitianMatrix,
    /// Smallest eigenvalue of `lhs − rhs`; the inequality holds when it is
    /// above `−tol`.
    pub min_gap: f64,
    pub holds: bool,
}

/// Checks Choi's inequality for a unital positive map and strictly
/// positive `A`.
pub fn choi_inequality_check(
    psi: &AdjointMap,
    a: &PositiveOperator,
    tol: &Tolerances,
) -> Result<ChoiReport> {
    if !a.is_invertible(tol) {
        return Err(CoreError::SingularOperator(a.lambda_min()));
    }
    let a_inv = a.quasi_inverse(-1.0, tol);
    let lhs = HermitianMatrix::from_raw_unchecked(psi.apply_raw(a_inv.matrix())?);
    let psi_a = PositiveOperator::from_matrix_with(
        psi.apply_raw(a.matrix())?,
        &Tolerances { psd_tol: 1e-8, hermiticity_tol: 1e-8, ..tol.clone() },
    )?;
    if !psi_a.is_invertible(tol) {
        return Err(CoreError::SingularOperator(psi_a.lambda_min()));
    }
    let rhs = psi_a.quasi_inverse(-1.0, tol).as_hermitian();
    let gap = eig_hermitian_raw(&hermitian_part(&(lhs.matrix() - rhs.matrix())))?;
    let min_gap = gap.lambda_min();
    Ok(ChoiReport { lhs, rhs, min_gap, holds: min_gap >= -tol.inequality_tol })
}

// ---------------------------------------------------------------------------
// Positive trace-preserving maps and monotonicity
// ---------------------------------------------------------------------------

/// A stochastic (trace-preserving positive) map: either a CPTP channel or
/// a transpose-composed channel, which is positive but not completely
/// positive. General positive maps are out of scope; transpose
/// compositions suffice to exercise the claim that monotonicity does not
/// need complete positivity.
#[derive(Clone, Debug)]
pub enum StochasticMap {
    Channel(KrausChannel),
    /// `ρ ↦ Φ(ρ)ᵀ`.
    TransposedChannel(KrausChannel),
}

impl StochasticMap {
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        match self {
            StochasticMap::Channel(phi) => apply(phi, rho),
            StochasticMap::TransposedChannel(phi) => {
                let out = apply(phi, rho)?;
                let transposed = out.matrix().transpose();
                let p = PositiveOperator::from_matrix_with(
                    transposed,
                    &Tolerances { psd_tol: 1e-9, hermiticity_tol: 1e-9, ..Tolerances::default() },
                )?;
                if rho.is_normalized() {
                    DensityOperator::with_tolerances(
                        p,
                        &Tolerances { trace_tol: 1e-9, ..Tolerances::default() },
                    )
                } else {
                    Ok(DensityOperator::unnormalized(p))
                }
            }
        }
    }

    pub fn is_completely_positive(&self) -> bool {
        matches!(self, StochasticMap::Channel(_))
    }
}

/// Fidelity before and after a stochastic map; monotonicity says `after`
/// can never drop below `before`.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub before: f64,
    pub after: f64,
    pub slack: f64,
    pub holds: bool,
}

pub fn monotonicity_check(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    map: &StochasticMap,
    tol: &Tolerances,
) -> Result<MonotonicityReport> {
    let before = fidelity_positive(rho1.positive(), rho2.positive())?;
    let after = fidelity_positive(map.apply(rho1)?.positive(), map.apply(rho2)?.positive())?;
    let slack = after - before;
    Ok(MonotonicityReport { before, after, slack, holds: slack >= -tol.inequality_tol })
}

// ---------------------------------------------------------------------------
// Functor conditions
// ---------------------------------------------------------------------------

/// Candidate functionals `Q(ρ₁,ρ₂)` for the functor conditions. The
/// transition probability itself is the infimum over everything passing
/// the conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QFunctional {
    /// `Pr(ρ₁,ρ₂)` — passes everything by construction.
    TransitionProbability,
    /// `Tr ρ₁^s ρ₂^{1-s}` (quasi-powers).
    PowerTrace(f64),
    /// `¼[(Tr ρ₁ + Tr ρ₂)² − ‖ρ₁ − ρ₂‖₁²]`.
    TraceNormBound,
    /// `Tr ρ₁ · Tr ρ₂` — constant 1 on density pairs; a control that must
    /// fail the pure-state agreement condition.
    ProductOfTraces,
}

impl QFunctional {
    pub fn eval(&self, rho1: &DensityOperator, rho2: &DensityOperator, tol: &Tolerances) -> Result<f64> {
        match self {
            QFunctional::TransitionProbability => {
                transition_probability(rho1.positive(), rho2.positive())
            }
            QFunctional::PowerTrace(s) => {
                let p1 = rho1.positive().quasi_power(*s, tol);
                let p2 = rho2.positive().quasi_power(1.0 - *s, tol);
                Ok((p1.matrix() * p2.matrix()).diagonal().iter().map(|z| z.re).sum())
            }
            QFunctional::TraceNormBound => {
                Ok(trace_norm_bound_value(rho1.positive(), rho2.positive()))
            }
            QFunctional::ProductOfTraces => Ok(rho1.trace() * rho2.trace()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            QFunctional::TransitionProbability => "transition_probability".into(),
            QFunctional::PowerTrace(s) => format!("power_trace(s={s})"),
            QFunctional::TraceNormBound => "trace_norm_bound".into(),
            QFunctional::ProductOfTraces => "product_of_traces".into(),
        }
    }
}

/// Sampling plan for the functor-condition battery.
#[derive(Clone, Debug, Serialize)]
pub struct FunctorPlan {
    pub dims: Vec<usize>,
    pub pure_samples: usize,
    pub channel_samples: usize,
    pub domination_samples: usize,
    pub seed: u64,
}

impl Default for FunctorPlan {
    fn default() -> Self {
        Self { dims: vec![2, 3], pure_samples: 50, channel_samples: 50, domination_samples: 50, seed: 7 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctorCondition {
    PureAgreement,
    ChannelMonotonicity,
    Domination,
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctorViolation {
    pub condition: FunctorCondition,
    pub dim: usize,
    pub sample: usize,
    pub got: f64,
    pub expected: f64,
    pub slack: f64,
}

/// Report of the functor-condition battery for one candidate functional.
#[derive(Clone, Debug, Serialize)]
pub struct FunctorReport {
    pub functional: String,
    pub checks_run: usize,
    pub violations: Vec<FunctorViolation>,
    pub passed: bool,
}

/// Spot-checks the functor conditions on random samples: (a) agreement
/// with `Tr π₁π₂` on pure pairs, (b) monotonicity under random channels,
/// (c) domination `Q ≥ Pr`. Sampling, not proof.
pub fn functor_conditions_check(
    q: &QFunctional,
    plan: &FunctorPlan,
    tol: &Tolerances,
) -> Result<FunctorReport> {
    let mut violations = Vec::new();
    let mut checks_run = 0usize;

    for (di, &dim) in plan.dims.iter().enumerate() {
        let mut rng = random::rng_stream(plan.seed, di as u64 + 1);
        // (a) pure-state agreement
        for sample in 0..plan.pure_samples {
            let p1 = random::random_pure(dim, &mut rng);
            let p2 = random::random_pure(dim, &mut rng);
            let got = q.eval(&p1, &p2, tol)?;
            let expected: f64 = (p1.matrix() * p2.matrix()).diagonal().iter().map(|z| z.re).sum();
            checks_run += 1;
            let slack = (got - expected).abs();
            if slack > tol.inequality_tol {
                violations.push(FunctorViolation {
                    condition: FunctorCondition::PureAgreement,
                    dim,
                    sample,
                    got,
                    expected,
                    slack,
                });
            }
        }
        // (b) channel monotonicity
        for sample in 0..plan.channel_samples {
            let r1 = random::random_density(dim, &mut rng);
            let r2 = random::random_density(dim, &mut rng);
            let kraus_count = 1 + rng.random_range(0..3);
            let phi = random_cptp(dim, dim, kraus_count, rng.random::<u64>())?;
            let before = q.eval(&r1, &r2, tol)?;
            let after = q.eval(&apply(&phi, &r1)?, &apply(&phi, &r2)?, tol)?;
            checks_run += 1;
            let slack = after - before;
            if slack < -tol.inequality_tol {
                violations.push(FunctorViolation {
                    condition: FunctorCondition::ChannelMonotonicity,
                    dim,
                    sample,
                    got: after,
                    expected: before,
                    slack,
                });
            }
        }
        // (c) domination Q ≥ Pr
        for sample in 0..plan.domination_samples {
            let r1 = random::random_density(dim, &mut rng);
            let r2 = random::random_density(dim, &mut rng);
            let got = q.eval(&r1, &r2, tol)?;
            let pr = transition_probability(r1.positive(), r2.positive())?;
            checks_run += 1;
            let slack = got - pr;
            if slack < -tol.inequality_tol {
                violations.push(FunctorViolation {
                    condition: FunctorCondition::Domination,
                    dim,
                    sample,
                    got,
                    expected: pr,
                    slack,
                });
            }
        }
    }

    Ok(FunctorReport {
        functional: q.label(),
        checks_run,
        passed: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::fidelity;
    use crate::operator::kron;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_and_depolarizing() {
        let mut rng = random::rng_from_seed(501);
        let rho = random::random_density(2, &mut rng);
        let id = KrausChannel::identity(2);
        let out = apply(&id, &rho).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-12);

        let dep = KrausChannel::depolarizing(2);
        let out = apply(&dep, &rho).unwrap();
        assert!(max_abs_diff(out.matrix(), &CMat::identity(2, 2).scale(0.5)) < 1e-12);
    }

    #[test]
    fn random_channel_preserves_trace_and_positivity() {
        let mut rng = random::rng_from_seed(503);
        for _ in 0..10 {
            let rho = random::random_density(3, &mut rng);
            let phi = random_cptp(3, 3, 2, rng.random::<u64>()).unwrap();
            assert!(phi.completeness_defect() < 1e-10);
            let out = apply(&phi, &rho).unwrap();
            assert!((out.trace() - 1.0).abs() < 1e-9);
            assert!(out.eigenvalues().iter().all(|l| *l >= 0.0));
        }
    }

    #[test]
    fn random_cptp_is_deterministic_per_seed() {
        let a = random_cptp(2, 2, 3, 42).unwrap();
        let b = random_cptp(2, 2, 3, 42).unwrap();
        for (ka, kb) in a.kraus_operators().iter().zip(b.kraus_operators()) {
            assert_eq!(ka.matrix(), kb.matrix());
        }
    }

    #[test]
    fn single_kraus_random_channel_is_unitary() {
        let phi = random_cptp(3, 3, 1, 9).unwrap();
        let k = &phi.kraus_operators()[0];
        assert!(crate::operator::unitarity_defect(k.matrix()) < 1e-10);
    }

    #[test]
    fn adjoint_duality_and_unitality() {
        let mut rng = random::rng_from_seed(507);
        let phi = random_cptp(3, 2, 2, 11).unwrap();
        let psi = adjoint(&phi);
        // Ψ(I) = I
        let unital = psi.apply_raw(&CMat::identity(2, 2)).unwrap();
        assert!(max_abs_diff(&unital, &CMat::identity(3, 3)) < 1e-9);
        // duality on random probes
        for _ in 0..20 {
            let rho = random::random_density(3, &mut rng);
            let a = random::random_hermitian(2, &mut rng);
            let lhs: f64 =
                (apply(&phi, &rho).unwrap().matrix() * a.matrix()).diagonal().iter().map(|z| z.re).sum();
            let rhs: f64 =
                (rho.matrix() * psi.apply_raw(a.matrix()).unwrap()).diagonal().iter().map(|z| z.re).sum();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn adjoint_of_unitary_channel_conjugates_backwards() {
        let mut rng = random::rng_from_seed(509);
        let u = random::haar_unitary(2, &mut rng);
        let phi = KrausChannel::from_unitary(u.clone()).unwrap();
        let psi = adjoint(&phi);
        let a = random::random_hermitian(2, &mut rng);
        let got = psi.apply_raw(a.matrix()).unwrap();
        let expected = u.matrix().adjoint() * a.matrix() * u.matrix();
        assert!(max_abs_diff(&got, &expected) < 1e-12);
    }

    #[test]
    fn choi_inequality_trivial_equalities() {
        let id = adjoint(&KrausChannel::identity(3));
        let mut rng = random::rng_from_seed(511);
        let a = random::random_positive(3, &mut rng);
        let rep = choi_inequality_check(&id, &a, &tol()).unwrap();
        assert!(rep.holds);
        assert!(rep.min_gap.abs() < 1e-9);

        let phi = random_cptp(3, 3, 2, 21).unwrap();
        let psi = adjoint(&phi);
        let eye = PositiveOperator::from_matrix(CMat::identity(3, 3)).unwrap();
        let rep = choi_inequality_check(&psi, &eye, &tol()).unwrap();
        assert!(rep.holds);
        assert!(rep.min_gap.abs() < 1e-8);
    }

    #[test]
    fn choi_inequality_random_sweep() {
        let mut rng = random::rng_from_seed(513);
        for k in 0..50 {
            let phi = random_cptp(2, 2, 2, 1000 + k).unwrap();
            let psi = adjoint(&phi);
            let a = random::random_positive(2, &mut rng);
            let rep = choi_inequality_check(&psi, &a, &tol()).unwrap();
            assert!(rep.holds, "violated at sample {k}: min gap {}", rep.min_gap);
        }
    }

    #[test]
    fn choi_rejects_singular_argument() {
        let id = adjoint(&KrausChannel::identity(2));
        let a = PositiveOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(
            choi_inequality_check(&id, &a, &tol()),
            Err(CoreError::SingularOperator(_))
        ));
    }

    #[test]
    fn monotonicity_examples() {
        let mut rng = random::rng_from_seed(517);
        let r1 = random::random_density(2, &mut rng);
        let r2 = random::random_density(2, &mut rng);

        let dep = StochasticMap::Channel(KrausChannel::depolarizing(2));
        let rep = monotonicity_check(&r1, &r2, &dep, &tol()).unwrap();
        assert!(rep.holds);
        assert!((rep.after - 1.0).abs() < 1e-10);

        let u = random::haar_unitary(2, &mut rng);
        let uni = StochasticMap::Channel(KrausChannel::from_unitary(u).unwrap());
        let rep = monotonicity_check(&r1, &r2, &uni, &tol()).unwrap();
        assert!((rep.after - rep.before).abs() < 1e-10);
    }

    #[test]
    fn monotonicity_under_partial_trace() {
        let mut rng = random::rng_from_seed(519);
        let ptr = StochasticMap::Channel(KrausChannel::partial_trace_right(2, 2));
        for _ in 0..20 {
            let a1 = random::random_density(2, &mut rng);
            let b1 = random::random_density(2, &mut rng);
            let a2 = random::random_density(2, &mut rng);
            let b2 = random::random_density(2, &mut rng);
            let r1 = DensityOperator::from_matrix(
                kron(&a1.positive().as_complex(), &b1.positive().as_complex()).into_matrix(),
            )
            .unwrap();
            let r2 = DensityOperator::from_matrix(
                kron(&a2.positive().as_complex(), &b2.positive().as_complex()).into_matrix(),
            )
            .unwrap();
            let rep = monotonicity_check(&r1, &r2, &ptr, &tol()).unwrap();
            assert!(rep.holds, "partial trace decreased fidelity: {}", rep.slack);
            // and the reduced fidelity equals the left-factor fidelity
            let f_left = fidelity(&a1, &a2).unwrap().fidelity;
            assert!((rep.after - f_left).abs() < 1e-9);
        }
    }

    #[test]
    fn monotonicity_for_transpose_composed_maps() {
        let mut rng = random::rng_from_seed(523);
        for k in 0..20 {
            let r1 = random::random_density(3, &mut rng);
            let r2 = random::random_density(3, &mut rng);
            let phi = random_cptp(3, 3, 2, 2000 + k).unwrap();
            let map = StochasticMap::TransposedChannel(phi);
            assert!(!map.is_completely_positive());
            let rep = monotonicity_check(&r1, &r2, &map, &tol()).unwrap();
            assert!(rep.holds, "transpose-composed map violated monotonicity: {}", rep.slack);
        }
    }

    #[test]
    fn functor_conditions_pass_for_genuine_candidates() {
        let plan = FunctorPlan::default();
        for q in [
            QFunctional::TransitionProbability,
            QFunctional::PowerTrace(0.5),
            QFunctional::TraceNormBound,
        ] {
            let rep = functor_conditions_check(&q, &plan, &tol()).unwrap();
            assert!(rep.passed, "{} failed: {:?}", rep.functional, rep.violations.first());
        }
    }

    #[test]
    fn functor_conditions_flag_the_control() {
        let plan = FunctorPlan::default();
        let rep = functor_conditions_check(&QFunctional::ProductOfTraces, &plan, &tol()).unwrap();
        assert!(!rep.passed);
        assert!(rep
            .violations
            .iter()
            .all(|v| v.condition == FunctorCondition::PureAgreement));
        assert!(!rep.violations.is_empty());
    }
}
