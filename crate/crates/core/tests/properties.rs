//! Property tests: the crate's algebraic invariants under seeded random
//! ensembles. Strategies draw (dim, seed) pairs and generate operators
//! through the crate's own deterministic generators, so shrinking walks
//! over ensembles rather than raw matrix entries.

use bures_core::fidelity::{
    fidelity, fidelity_via_geometric_mean, geometric_mean, scaled_transition_probability,
    transition_probability,
};
use bures_core::operator::{max_abs, max_abs_diff, trace_norm, ComplexMatrix};
use bures_core::purification::{outer_partial_trace_right, purify};
use bures_core::random;
use bures_core::transport::Amplitude;
use bures_core::{DMatrix, Tolerances};
use proptest::prelude::*;

type CMat = DMatrix<bures_core::Complex64>;

fn dims() -> impl Strategy<Value = usize> {
    1usize..=8
}

fn small_dims() -> impl Strategy<Value = usize> {
    1usize..=6
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sqrt_squares_back_to_the_operator(dim in dims(), seed in any::<u64>()) {
        let mut rng = random::rng_from_seed(seed);
        let p = random::random_positive(dim, &mut rng);
        let s = p.sqrt();
        let back = s.matrix() * s.matrix();
        prop_assert!(max_abs_diff(&back, p.matrix()) < 1e-9 * (1.0 + p.lambda_max()));
    }

    #[test]
    fn positive_operators_have_nonnegative_spectra(dim in dims(), seed in any::<u64>()) {
        let mut rng = random::rng_from_seed(seed);
        let p = random::random_positive(dim, &mut rng);
        prop_assert!(p.eigenvalues().iter().all(|l| *l >= 0.0));
        // a fresh decomposition of the stored matrix stays within psd_tol
        let fresh = p.as_hermitian().eig().unwrap();
        prop_assert!(fresh.lambda_min() >= -Tolerances::default().psd_tol);
    }

    #[test]
    fn quasi_inverse_is_an_involution_on_the_support(dim in dims(), seed in any::<u64>()) {
        let tol = Tolerances::default();
        let mut rng = random::rng_from_seed(seed);
        // random rank deficiency
        let rank = 1 + (seed as usize) % dim.max(1);
        let g = random::complex_ginibre(dim, rank.min(dim), &mut rng);
        let p = bures_core::PositiveOperator::from_matrix(&g * g.adjoint()).unwrap();
        let back = p.quasi_inverse(-1.0, &tol).quasi_inverse(-1.0, &tol);
        prop_assert!(max_abs_diff(back.matrix(), p.matrix()) < 1e-9 * (1.0 + p.lambda_max()));
    }

    #[test]
    fn trace_norm_is_a_norm(dim in dims(), seed in any::<u64>(), scale in -4.0f64..4.0) {
        let mut rng = random::rng_from_seed(seed);
        let a = random::complex_ginibre(dim, dim, &mut rng);
        let b = random::complex_ginibre(dim, dim, &mut rng);
        let na = trace_norm(&ComplexMatrix::new(a.clone()).unwrap());
        let nb = trace_norm(&ComplexMatrix::new(b.clone()).unwrap());
        let nab = trace_norm(&ComplexMatrix::new(&a + &b).unwrap());
        prop_assert!(nab <= na + nb + 1e-9 * (1.0 + na + nb), "triangle: {nab} > {na} + {nb}");
        let scaled = trace_norm(&ComplexMatrix::new(a.scale(scale)).unwrap());
        prop_assert!((scaled - scale.abs() * na).abs() < 1e-9 * (1.0 + scaled));
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(dim in small_dims(), seed in any::<u64>()) {
        let mut rng = random::rng_from_seed(seed);
        let a = random::random_density(dim, &mut rng);
        let b = random::random_density(dim, &mut rng);
        let fab = fidelity(&a, &b).unwrap().fidelity;
        let fba = fidelity(&b, &a).unwrap().fidelity;
        prop_assert!((fab - fba).abs() < 1e-9);
        prop_assert!(fab >= 0.0);
        prop_assert!(fab <= 1.0 + 1e-10);
    }

    #[test]
    fn fidelity_agrees_with_the_trace_norm_identity(dim in small_dims(), seed in any::<u64>()) {
        let mut rng = random::rng_from_seed(seed);
        let a = random::random_density(dim, &mut rng);
        let b = random::random_density(dim, &mut rng);
        let f = fidelity(&a, &b).unwrap().fidelity;
        let oracle = trace_norm(&ComplexMatrix::new(a.sqrt().matrix() * b.sqrt().matrix()).unwrap());
        prop_assert!((f - oracle).abs() < 1e-9);
    }

    #[test]
    fn transition_probability_is_homogeneous(
        dim in small_dims(),
        seed in any::<u64>(),
        l1 in 0.1f64..10.0,
        l2 in 0.1f64..10.0,
    ) {
        let mut rng = random::rng_from_seed(seed);
        let w1 = random::random_positive(dim, &mut rng);
        let w2 = random::random_positive(dim, &mut rng);
        let base = transition_probability(&w1, &w2).unwrap();
        let scaled = scaled_transition_probability(&w1, l1, &w2, l2).unwrap();
        let residual = (scaled - l1 * l2 * base).abs() / (1.0 + scaled.abs());
        prop_assert!(residual < 1e-9, "homogeneity residual {residual}");
    }

    #[test]
    fn geometric_mean_is_symmetric_and_idempotent(dim in small_dims(), seed in any::<u64>()) {
        let tol = Tolerances::default();
        let mut rng = random::rng_from_seed(seed);
        let a = random::random_positive(dim, &mut rng);
        let b = random::random_positive(dim, &mut rng);
        let ab = geometric_mean(&a, &b, &tol).unwrap();
        let ba = geometric_mean(&b, &a, &tol).unwrap();
        let scale = 1.0 + a.lambda_max().max(b.lambda_max());
        prop_assert!(max_abs_diff(ab.matrix(), ba.matrix()) < 1e-8 * scale);
        let aa = geometric_mean(&a, &a, &tol).unwrap();
        prop_assert!(max_abs_diff(aa.matrix(), a.matrix()) < 1e-9 * scale);
    }

    #[test]
    fn quasi_route_matches_closed_form_even_for_singular_states(seed in any::<u64>()) {
        // rank-deficient first argument exercises the support convention
        let tol = Tolerances::default();
        let mut rng = random::rng_from_seed(seed);
        let pure = random::random_pure(3, &mut rng);
        let mixed = random::random_density(3, &mut rng);
        let closed = fidelity(&pure, &mixed).unwrap().fidelity;
        let quasi = fidelity_via_geometric_mean(&pure, &mixed, &tol).unwrap().fidelity;
        prop_assert!((closed - quasi).abs() < 1e-8, "closed {closed} vs quasi {quasi}");
    }

    #[test]
    fn purification_round_trip(dim in small_dims().prop_filter("dim>=2", |d| *d >= 2), seed in any::<u64>()) {
        let mut rng = random::rng_from_seed(seed);
        let rho = random::random_density(dim, &mut rng);
        let u = random::haar_unitary(dim, &mut rng);
        let w = Amplitude::from_sqrt(&rho).gauge(&u).unwrap();
        let phi = purify(&w);
        let reduced = outer_partial_trace_right(&phi, &phi).unwrap();
        prop_assert!(max_abs_diff(reduced.matrix(), rho.matrix()) < 1e-10);
    }

    #[test]
    fn haar_unitaries_preserve_density_spectra(dim in small_dims(), seed in any::<u64>()) {
        let mut rng = random::rng_from_seed(seed);
        let rho = random::random_density(dim, &mut rng);
        let u = random::haar_unitary(dim, &mut rng);
        let rotated = bures_core::DensityOperator::from_matrix(
            u.matrix() * rho.matrix() * u.matrix().adjoint(),
        )
        .unwrap();
        for (a, b) in rho.eigenvalues().iter().zip(rotated.eigenvalues()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        // and fidelity with a fixed partner is invariant under joint rotation
        let sigma = random::random_density(dim, &mut rng);
        let sigma_rot = bures_core::DensityOperator::from_matrix(
            u.matrix() * sigma.matrix() * u.matrix().adjoint(),
        )
        .unwrap();
        let f = fidelity(&rho, &sigma).unwrap().fidelity;
        let f_rot = fidelity(&rotated, &sigma_rot).unwrap().fidelity;
        prop_assert!((f - f_rot).abs() < 1e-9);
    }

    #[test]
    fn lyapunov_solution_solves_on_full_rank(dim in small_dims(), seed in any::<u64>()) {
        let tol = Tolerances::default();
        let mut rng = random::rng_from_seed(seed);
        let rho = random::random_density(dim, &mut rng);
        let x = random::random_hermitian(dim, &mut rng);
        let sol = bures_core::operator::lyapunov_solve(&rho, &x, &tol).unwrap();
        let lhs: CMat = sol.g.matrix() * rho.matrix() + rho.matrix() * sol.g.matrix();
        prop_assert!(max_abs(&(lhs - x.matrix())) < 1e-9 * (1.0 + max_abs(x.matrix())));
    }
}
