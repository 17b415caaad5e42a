//! Computes the fidelity of a random qutrit pair along three routes and
//! checks they agree. Run with `cargo run -p bures-core --example
//! fidelity_routes`.

use bures_core::fidelity::{fidelity, fidelity_via_geometric_mean};
use bures_core::variational::{inf_sum, OptimizerOptions};
use bures_core::{random, CoreError, Tolerances};

fn main() -> Result<(), CoreError> {
    let tol = Tolerances::default();
    let mut rng = random::rng_from_seed(7);
    let rho = random::random_density(3, &mut rng);
    let sigma = random::random_density(3, &mut rng);

    let closed = fidelity(&rho, &sigma)?.fidelity;
    let mean = fidelity_via_geometric_mean(&rho, &sigma, &tol)?.fidelity;
    let variational = inf_sum(&rho, &sigma, &OptimizerOptions::default())?.value;
    assert!((closed - mean).abs() < 1e-8);
    assert!((closed - variational).abs() < 1e-6);

    println!("closed form      F = {closed:.12}");
    println!("geometric mean   F = {mean:.12}");
    println!("variational      F = {variational:.12}");
    Ok(())
}
