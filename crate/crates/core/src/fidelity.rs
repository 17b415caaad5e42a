//! Closed-form fidelity and transition probability, the operator geometric
//! mean, the scaling extension to unnormalized positive operators, and the
//! two classical inequality bounds.
//!
//! Fidelity here is the positive square root of the transition probability:
//! `F(ρ₁,ρ₂) = Tr (ρ₁^{1/2} ρ₂ ρ₁^{1/2})^{1/2}`. Unnormalized operators go
//! through the same formula without renormalization, so the homogeneity law
//! `Pr(λ₁ω₁, λ₂ω₂) = λ₁λ₂ Pr(ω₁,ω₂)` is a verified theorem rather than a
//! built-in.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{CoreError, Result};
use crate::operator::{
    eig_hermitian_raw, hermitian_part, trace_norm_raw, CMat, DensityOperator, PositiveOperator,
};

/// The route a fidelity value was computed by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    GeometricMean,
    Variational,
    Purification,
}

/// Fidelity together with the transition probability it squares to.
#[derive(Clone, Debug, Serialize)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub transition_probability: f64,
    pub method: Method,
}

impl FidelityReport {
    pub fn from_fidelity(fidelity: f64, method: Method) -> Self {
        Self { fidelity, transition_probability: fidelity * fidelity, method }
    }

    pub fn from_probability(probability: f64, method: Method) -> Self {
        let p = probability.max(0.0);
        Self { fidelity: p.sqrt(), transition_probability: p, method }
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(CoreError::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

// Eigenvalues of a computed psd product below this relative level are
// eigensolver noise; the square root would amplify them from ~1e-16 to
// ~1e-8, so they are cut to exactly 0 before rooting.
fn noise_cut(lambda_max: f64, n: usize) -> f64 {
    lambda_max.abs() * (n as f64) * 32.0 * f64::EPSILON
}

/// Principal square root of a Hermitian psd matrix given as a raw product
/// (symmetrizes, then cuts negative and noise-level eigenvalues to 0).
pub(crate) fn psd_sqrt_raw(m: &CMat) -> Result<CMat> {
    let eig = eig_hermitian_raw(&hermitian_part(m))?;
    let cut = noise_cut(eig.lambda_max(), m.nrows());
    Ok(eig.reconstruct_with(|l| if l > cut { l.sqrt() } else { 0.0 }))
}

/// Sum of square roots of the eigenvalues of a Hermitian psd product.
fn trace_psd_sqrt(m: &CMat) -> Result<f64> {
    let eig = eig_hermitian_raw(&hermitian_part(m))?;
    let cut = noise_cut(eig.lambda_max(), m.nrows());
    Ok(eig.values.iter().filter(|l| **l > cut).map(|l| l.sqrt()).sum())
}

/// Fidelity of two positive operators by the closed form.
pub(crate) fn fidelity_positive(p1: &PositiveOperator, p2: &PositiveOperator) -> Result<f64> {
    check_same_dim(p1.dim(), p2.dim())?;
    let s1 = p1.sqrt();
    let inner = s1.matrix() * p2.matrix() * s1.matrix();
    trace_psd_sqrt(&inner)
}

/// Transition probability `Pr(ω₁, ω₂) = F(ω₁, ω₂)²` for positive operators,
/// normalized or not.
pub fn transition_probability(w1: &PositiveOperator, w2: &PositiveOperator) -> Result<f64> {
    let f = fidelity_positive(w1, w2)?;
    Ok(f * f)
}

/// `F(ρ₁,ρ₂) = Tr (ρ₁^{1/2} ρ₂ ρ₁^{1/2})^{1/2}`.
pub fn fidelity(rho1: &DensityOperator, rho2: &DensityOperator) -> Result<FidelityReport> {
    let f = fidelity_positive(rho1.positive(), rho2.positive())?;
    Ok(FidelityReport::from_fidelity(f, Method::ClosedForm))
}

/// Operator geometric mean `ω # ρ`, the extension of `√(ωρ)` from commuting
/// pairs to general positive operators:
/// `ρ^{1/2} (ρ^{[-1/2]} ω ρ^{[-1/2]})^{1/2} ρ^{1/2}` with quasi-inverses
/// supplying the support convention for singular ρ.
pub fn geometric_mean(
    omega: &PositiveOperator,
    rho: &PositiveOperator,
    tol: &Tolerances,
) -> Result<PositiveOperator> {
    check_same_dim(omega.dim(), rho.dim())?;
    let r_half = rho.sqrt();
    let r_qihalf = rho.quasi_inverse(-0.5, tol);
    let inner = r_qihalf.matrix() * omega.matrix() * r_qihalf.matrix();
    let root = psd_sqrt_raw(&inner)?;
    let m = r_half.matrix() * root * r_half.matrix();
    PositiveOperator::from_matrix_with(m, &loose_psd(tol))
}

/// `ω # ρ^{[-1]} = ρ^{[-1/2]} (ρ^{1/2} ω ρ^{1/2})^{1/2} ρ^{[-1/2]}`,
/// well defined for singular ρ. For invertible ρ the result `M` solves
/// `M ρ M = ω`.
pub fn geometric_mean_quasi(
    omega: &PositiveOperator,
    rho: &PositiveOperator,
    tol: &Tolerances,
) -> Result<PositiveOperator> {
    check_same_dim(omega.dim(), rho.dim())?;
    let r_half = rho.sqrt();
    let r_qihalf = rho.quasi_inverse(-0.5, tol);
    let inner = r_half.matrix() * omega.matrix() * r_half.matrix();
    let root = psd_sqrt_raw(&inner)?;
    let m = r_qihalf.matrix() * root * r_qihalf.matrix();
    PositiveOperator::from_matrix_with(m, &loose_psd(tol))
}

// Products of roots and quasi-inverses accumulate more rounding noise than
// freshly validated inputs carry; widen only the construction clamps.
fn loose_psd(tol: &Tolerances) -> Tolerances {
    Tolerances {
        psd_tol: tol.psd_tol.max(1e-8),
        hermiticity_tol: tol.hermiticity_tol.max(1e-8),
        ..tol.clone()
    }
}

/// Fidelity by the geometric-mean route `F = Tr (ρ₂ # ρ₁^{[-1]}) ρ₁`.
pub fn fidelity_via_geometric_mean(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    tol: &Tolerances,
) -> Result<FidelityReport> {
    let mean = geometric_mean_quasi(rho2.positive(), rho1.positive(), tol)?;
    let f: f64 = (mean.matrix() * rho1.matrix()).diagonal().iter().map(|z| z.re).sum();
    Ok(FidelityReport::from_fidelity(f, Method::GeometricMean))
}

/// `Pr(λ₁ω₁, λ₂ω₂)` by direct evaluation on the scaled operators. The
/// homogeneity identity `= λ₁λ₂ Pr(ω₁,ω₂)` is a tested invariant, not an
/// implementation shortcut.
pub fn scaled_transition_probability(
    omega1: &PositiveOperator,
    lambda1: f64,
    omega2: &PositiveOperator,
    lambda2: f64,
) -> Result<f64> {
    for lambda in [lambda1, lambda2] {
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(CoreError::NonPositiveScale(lambda));
        }
    }
    transition_probability(&omega1.scale(lambda1)?, &omega2.scale(lambda2)?)
}

/// Outcome of an inequality check.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    /// Margin by which the inequality holds; negative means violated.
    pub slack: f64,
    pub holds: bool,
}

/// Power-mean bound: `(Tr ω₁)^{1-s} (Tr ω₂)^s · Tr ω₁^s ω₂^{1-s} ≥ Pr(ω₁,ω₂)`
/// for `s ∈ [0,1]`. Powers of singular operators use the quasi-power
/// convention `0^s = 0`.
pub fn bound_power_mean(
    omega1: &PositiveOperator,
    omega2: &PositiveOperator,
    s: f64,
    tol: &Tolerances,
) -> Result<BoundReport> {
    check_same_dim(omega1.dim(), omega2.dim())?;
    if !(0.0..=1.0).contains(&s) {
        return Err(CoreError::DomainError { eigenvalue: s });
    }
    let p1 = omega1.quasi_power(s, tol);
    let p2 = omega2.quasi_power(1.0 - s, tol);
    let cross: f64 = (p1.matrix() * p2.matrix()).diagonal().iter().map(|z| z.re).sum();
    let lhs = omega1.trace().powf(1.0 - s) * omega2.trace().powf(s) * cross;
    let rhs = transition_probability(omega1, omega2)?;
    let slack = lhs - rhs;
    Ok(BoundReport { lhs, rhs, slack, holds: slack >= -tol.inequality_tol })
}

/// `¼[(Tr ω₁ + Tr ω₂)² − ‖ω₁ − ω₂‖₁²]` — the right-hand side of the
/// trace-norm bound scaled to dominate `Pr` directly.
pub fn trace_norm_bound_value(omega1: &PositiveOperator, omega2: &PositiveOperator) -> f64 {
    let t1 = trace_norm_raw(&(omega1.matrix() - omega2.matrix()));
    let sum = omega1.trace() + omega2.trace();
    0.25 * (sum * sum - t1 * t1)
}

/// Trace-norm bound: `4 Pr(ω₁,ω₂) ≤ (Tr ω₁ + Tr ω₂)² − ‖ω₁ − ω₂‖₁²`.
pub fn bound_trace_norm(
    omega1: &PositiveOperator,
    omega2: &PositiveOperator,
    tol: &Tolerances,
) -> Result<BoundReport> {
    check_same_dim(omega1.dim(), omega2.dim())?;
    let lhs = 4.0 * transition_probability(omega1, omega2)?;
    let t1 = trace_norm_raw(&(omega1.matrix() - omega2.matrix()));
    let sum = omega1.trace() + omega2.trace();
    let rhs = sum * sum - t1 * t1;
    let slack = rhs - lhs;
    Ok(BoundReport { lhs, rhs, slack, holds: slack >= -tol.inequality_tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{cx, kron, max_abs_diff, trace_norm, ComplexMatrix};
    use crate::random;
    use nalgebra::DVector;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn fidelity_of_state_with_itself_is_trace() {
        let mut rng = random::rng_from_seed(101);
        let rho = random::random_density(3, &mut rng);
        let rep = fidelity(&rho, &rho).unwrap();
        assert!((rep.fidelity - 1.0).abs() < 1e-10);
        assert!((rep.transition_probability - rep.fidelity * rep.fidelity).abs() < 1e-12);

        // unnormalized: F(ω, ω) = Tr ω
        let omega = random::random_positive(3, &mut rng);
        let f = fidelity_positive(&omega, &omega).unwrap();
        assert!((f - omega.trace()).abs() < 1e-9);
    }

    #[test]
    fn fidelity_of_pure_states_is_overlap() {
        // |0⟩ vs |+⟩
        let zero = DensityOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let plus = DensityOperator::from_matrix(CMat::from_row_slice(
            2,
            2,
            &[cx(0.5, 0.0), cx(0.5, 0.0), cx(0.5, 0.0), cx(0.5, 0.0)],
        ))
        .unwrap();
        let rep = fidelity(&zero, &plus).unwrap();
        assert!((rep.fidelity - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn fidelity_commuting_closed_form() {
        // oracle: Σ √(p_i q_i) for commuting diagonals
        let p = [0.5_f64, 0.5];
        let q = [0.9_f64, 0.1];
        let oracle: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a * b).sqrt()).sum();
        assert!((oracle - 0.8944271909999159).abs() < 1e-15);

        let r1 = DensityOperator::from_diagonal(&p).unwrap();
        let r2 = DensityOperator::from_diagonal(&q).unwrap();
        let rep = fidelity(&r1, &r2).unwrap();
        assert!((rep.fidelity - oracle).abs() < 1e-10);
    }

    #[test]
    fn fidelity_is_symmetric() {
        let mut rng = random::rng_from_seed(103);
        for _ in 0..20 {
            let a = random::random_density(3, &mut rng);
            let b = random::random_density(3, &mut rng);
            let fab = fidelity(&a, &b).unwrap().fidelity;
            let fba = fidelity(&b, &a).unwrap().fidelity;
            assert!((fab - fba).abs() < 1e-9);
        }
    }

    #[test]
    fn fidelity_matches_trace_norm_identity() {
        // independent oracle: F = ‖√ρ₁ √ρ₂‖₁
        let mut rng = random::rng_from_seed(107);
        for _ in 0..10 {
            let a = random::random_density(4, &mut rng);
            let b = random::random_density(4, &mut rng);
            let f = fidelity(&a, &b).unwrap().fidelity;
            let prod = a.sqrt().matrix() * b.sqrt().matrix();
            let oracle = trace_norm(&ComplexMatrix::new(prod).unwrap());
            assert!((f - oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn fidelity_multiplicative_over_tensor_products() {
        let mut rng = random::rng_from_seed(109);
        for _ in 0..5 {
            let a1 = random::random_density(2, &mut rng);
            let a2 = random::random_density(2, &mut rng);
            let b1 = random::random_density(2, &mut rng);
            let b2 = random::random_density(2, &mut rng);
            let left = DensityOperator::from_matrix(
                kron(&a1.positive().as_complex(), &b1.positive().as_complex()).into_matrix(),
            )
            .unwrap();
            let right = DensityOperator::from_matrix(
                kron(&a2.positive().as_complex(), &b2.positive().as_complex()).into_matrix(),
            )
            .unwrap();
            let f_joint = fidelity(&left, &right).unwrap().fidelity;
            let f_parts =
                fidelity(&a1, &a2).unwrap().fidelity * fidelity(&b1, &b2).unwrap().fidelity;
            assert!((f_joint - f_parts).abs() < 1e-9);
        }
    }

    #[test]
    fn pure_state_reduction() {
        let mut rng = random::rng_from_seed(113);
        for _ in 0..10 {
            let v1: DVector<_> = random::random_pure_vector(3, &mut rng);
            let v2 = random::random_pure_vector(3, &mut rng);
            let p1 = DensityOperator::from_pure(&v1).unwrap();
            let p2 = DensityOperator::from_pure(&v2).unwrap();
            let rep = fidelity(&p1, &p2).unwrap();
            let overlap: f64 = (p1.matrix() * p2.matrix()).diagonal().iter().map(|z| z.re).sum();
            assert!((rep.transition_probability - overlap).abs() < 1e-10);
        }
    }

    #[test]
    fn geometric_mean_commuting_and_idempotent() {
        let omega = PositiveOperator::from_diagonal(&[4.0, 1.0]).unwrap();
        let rho = PositiveOperator::from_diagonal(&[1.0, 4.0]).unwrap();
        let mean = geometric_mean(&omega, &rho, &tol()).unwrap();
        assert!(max_abs_diff(mean.matrix(), &CMat::identity(2, 2).scale(2.0)) < 1e-10);

        let mut rng = random::rng_from_seed(127);
        let w = random::random_positive(3, &mut rng);
        let m = geometric_mean(&w, &w, &tol()).unwrap();
        assert!(max_abs_diff(m.matrix(), w.matrix()) < 1e-9);
    }

    #[test]
    fn geometric_mean_is_symmetric() {
        let mut rng = random::rng_from_seed(131);
        for _ in 0..10 {
            let a = random::random_positive(3, &mut rng);
            let b = random::random_positive(3, &mut rng);
            let ab = geometric_mean(&a, &b, &tol()).unwrap();
            let ba = geometric_mean(&b, &a, &tol()).unwrap();
            assert!(max_abs_diff(ab.matrix(), ba.matrix()) < 1e-9);
        }
    }

    #[test]
    fn geometric_mean_solves_its_riccati_equation() {
        // M = ω#ρ is the psd solution of M ρ⁻¹ M = ω for invertible ρ
        let mut rng = random::rng_from_seed(133);
        let omega = random::random_positive(3, &mut rng);
        let rho = random::random_positive(3, &mut rng);
        let m = geometric_mean(&omega, &rho, &tol()).unwrap();
        let rho_inv = rho.quasi_inverse(-1.0, &tol());
        let back = m.matrix() * rho_inv.matrix() * m.matrix();
        assert!(max_abs_diff(&back, omega.matrix()) < 1e-8);
    }

    #[test]
    fn geometric_mean_quasi_solves_riccati() {
        let mut rng = random::rng_from_seed(137);
        let omega = random::random_positive(3, &mut rng);
        let rho = random::random_positive(3, &mut rng);
        let m = geometric_mean_quasi(&omega, &rho, &tol()).unwrap();
        let back = m.matrix() * rho.matrix() * m.matrix();
        assert!(max_abs_diff(&back, omega.matrix()) < 1e-8);
    }

    #[test]
    fn geometric_mean_quasi_of_self_is_support_projector() {
        // rank-2 operator in dim 3
        let mut rng = random::rng_from_seed(139);
        let g = random::complex_ginibre(3, 2, &mut rng);
        let rho = PositiveOperator::from_matrix(&g * g.adjoint()).unwrap();
        let m = geometric_mean_quasi(&rho, &rho, &tol()).unwrap();
        let proj = rho.support_projector(&tol());
        assert!(max_abs_diff(m.matrix(), proj.matrix()) < 1e-8);
    }

    #[test]
    fn geometric_mean_quasi_commuting_diagonals() {
        let p = PositiveOperator::from_diagonal(&[0.5, 0.25, 0.0]).unwrap();
        let q = PositiveOperator::from_diagonal(&[0.125, 1.0, 0.0]).unwrap();
        // M = diag(√(q_i/p_i)) on the support of p
        let m = geometric_mean_quasi(&q, &p, &tol()).unwrap();
        assert!((m.matrix()[(0, 0)].re - 0.5).abs() < 1e-10);
        assert!((m.matrix()[(1, 1)].re - 2.0).abs() < 1e-10);
        assert!(m.matrix()[(2, 2)].norm() < 1e-10);
    }

    #[test]
    fn geometric_mean_route_agrees_with_closed_form() {
        let mut rng = random::rng_from_seed(149);
        for dim in [2usize, 3] {
            for _ in 0..25 {
                let a = random::random_density(dim, &mut rng);
                let b = random::random_density(dim, &mut rng);
                let f1 = fidelity(&a, &b).unwrap().fidelity;
                let f2 = fidelity_via_geometric_mean(&a, &b, &tol()).unwrap().fidelity;
                assert!((f1 - f2).abs() < 1e-8, "dim {dim}: {f1} vs {f2}");
            }
        }
    }

    #[test]
    fn geometric_mean_route_handles_singular_first_argument() {
        let mut rng = random::rng_from_seed(151);
        for _ in 0..10 {
            let pure = random::random_pure(3, &mut rng);
            let mixed = random::random_density(3, &mut rng);
            let f1 = fidelity(&pure, &mixed).unwrap().fidelity;
            let f2 = fidelity_via_geometric_mean(&pure, &mixed, &tol()).unwrap().fidelity;
            assert!((f1 - f2).abs() < 1e-8, "{f1} vs {f2}");
        }
    }

    #[test]
    fn fidelity_via_gmean_orthogonal_pure_states() {
        let a = DensityOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let b = DensityOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let rep = fidelity_via_geometric_mean(&a, &b, &tol()).unwrap();
        assert!(rep.fidelity.abs() < 1e-10);
        let same = fidelity_via_geometric_mean(&a, &a, &tol()).unwrap();
        assert!((same.fidelity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn scaling_homogeneity() {
        let mut rng = random::rng_from_seed(157);
        let w1 = random::random_positive(3, &mut rng);
        let w2 = random::random_positive(3, &mut rng);
        let base = transition_probability(&w1, &w2).unwrap();

        let direct = scaled_transition_probability(&w1, 4.0, &w2, 9.0).unwrap();
        assert!((direct - 36.0 * base).abs() < 1e-9 * (1.0 + 36.0 * base));

        for _ in 0..10 {
            let l1 = 0.1 + 9.9 * rand::Rng::random::<f64>(&mut rng);
            let l2 = 0.1 + 9.9 * rand::Rng::random::<f64>(&mut rng);
            let scaled = scaled_transition_probability(&w1, l1, &w2, l2).unwrap();
            let residual = (scaled - l1 * l2 * base).abs() / (1.0 + scaled.abs());
            assert!(residual < 1e-9, "homogeneity residual {residual}");
        }

        assert!(matches!(
            scaled_transition_probability(&w1, 0.0, &w2, 1.0),
            Err(CoreError::NonPositiveScale(_))
        ));
    }

    #[test]
    fn power_mean_bound_examples() {
        let mut rng = random::rng_from_seed(163);
        let rho = random::random_density(3, &mut rng);
        let rep = bound_power_mean(rho.positive(), rho.positive(), 0.5, &tol()).unwrap();
        assert!(rep.holds);
        assert!((rep.lhs - 1.0).abs() < 1e-9);
        assert!((rep.rhs - 1.0).abs() < 1e-9);

        // orthogonal pure states: both sides vanish
        let a = PositiveOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let b = PositiveOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let rep = bound_power_mean(&a, &b, 0.5, &tol()).unwrap();
        assert!(rep.lhs.abs() < 1e-12 && rep.rhs.abs() < 1e-12 && rep.holds);

        assert!(bound_power_mean(&a, &b, 1.5, &tol()).is_err());
    }

    #[test]
    fn power_mean_bound_random_sweep() {
        let mut rng = random::rng_from_seed(167);
        for _ in 0..50 {
            let w1 = random::random_positive(3, &mut rng);
            let w2 = random::random_positive(3, &mut rng);
            for k in 1..10 {
                let s = k as f64 / 10.0;
                let rep = bound_power_mean(&w1, &w2, s, &tol()).unwrap();
                assert!(rep.holds, "violated at s={s}: slack {}", rep.slack);
            }
        }
    }

    #[test]
    fn trace_norm_bound_examples() {
        let a = PositiveOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let b = PositiveOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let rep = bound_trace_norm(&a, &b, &tol()).unwrap();
        assert!(rep.lhs.abs() < 1e-12);
        assert!(rep.rhs.abs() < 1e-12);
        assert!(rep.holds);

        let mut rng = random::rng_from_seed(173);
        let rho = random::random_density(3, &mut rng);
        let rep = bound_trace_norm(rho.positive(), rho.positive(), &tol()).unwrap();
        assert!((rep.lhs - 4.0).abs() < 1e-9);
        assert!((rep.rhs - 4.0).abs() < 1e-9);
        assert!(rep.holds);
    }

    #[test]
    fn trace_norm_bound_random_sweep() {
        let mut rng = random::rng_from_seed(179);
        for _ in 0..50 {
            let w1 = random::random_positive(2, &mut rng).scale(1.7).unwrap();
            let w2 = random::random_positive(2, &mut rng).scale(0.4).unwrap();
            let rep = bound_trace_norm(&w1, &w2, &tol()).unwrap();
            assert!(rep.holds, "violated: slack {}", rep.slack);
        }
    }
}
