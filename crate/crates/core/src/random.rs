//! Seeded random ensembles: Ginibre matrices, Haar unitaries, random
//! densities and pure states.
//!
//! All randomness in the crate flows from explicit seeds through ChaCha8,
//! which is portable and stable; sweeps split deterministic streams off a
//! base seed with [`rng_stream`].

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator::{cx, CMat, ComplexMatrix, DensityOperator, HermitianMatrix, PositiveOperator};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent deterministic stream `stream` of the generator seeded with
/// `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Matrix of iid standard complex Gaussians (variance 1 per entry).
pub fn complex_ginibre(nrows: usize, ncols: usize, rng: &mut impl Rng) -> CMat {
    let scale = 0.5_f64.sqrt();
    CMat::from_fn(nrows, ncols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        cx(re * scale, im * scale)
    })
}

/// Haar-random unitary via QR of a Ginibre matrix with the R-diagonal phase
/// fix.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = complex_ginibre(dim, dim, rng);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_raw(u)
}

pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> HermitianMatrix {
    let g = complex_ginibre(dim, dim, rng);
    HermitianMatrix::from_raw_unchecked((&g + g.adjoint()).scale(0.5))
}

/// Unnormalized positive operator `GG†`, full rank almost surely.
pub fn random_positive(dim: usize, rng: &mut impl Rng) -> PositiveOperator {
    let g = complex_ginibre(dim, dim, rng);
    PositiveOperator::from_matrix(&g * g.adjoint()).expect("GG† is psd")
}

/// Random density operator `GG†/Tr(GG†)` (Hilbert–Schmidt ensemble).
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = complex_ginibre(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    DensityOperator::from_matrix(m.scale(1.0 / tr)).expect("normalized psd")
}

/// Haar-random unit vector.
pub fn random_pure_vector(dim: usize, rng: &mut impl Rng) -> DVector<Complex64> {
    let mut v = DVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        cx(re, im)
    });
    let norm = v.norm();
    v /= Complex64::new(norm, 0.0);
    v
}

/// Haar-random pure state |ψ⟩⟨ψ|.
pub fn random_pure(dim: usize, rng: &mut impl Rng) -> DensityOperator {
    let v = random_pure_vector(dim, rng);
    DensityOperator::from_pure(&v).expect("unit vector")
}
