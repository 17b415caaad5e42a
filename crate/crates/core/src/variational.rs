//! Variational characterizations of the transition probability as infima
//! over the positive-definite cone:
//!
//! - product form: `Pr(ρ₁,ρ₂) = inf_{A>0} (Tr ρ₁A)(Tr ρ₂A⁻¹)`,
//! - sum form: `F(ρ₁,ρ₂) = ½ inf_{A>0} (Tr ρ₁A + Tr ρ₂A⁻¹)`,
//!
//! together with the analytically optimal witness `A* = ρ₂ # ρ₁^{[-1]}`
//! that saturates both without any optimization, and the concavity check
//! these infima of linear functions imply.
//!
//! The optimizer parameterizes `A = exp(H)` over Hermitian `H` (interior of
//! the cone, unconstrained) and runs gradient descent with a
//! Barzilai–Borwein initial step and Armijo backtracking. For the sum
//! objective every accepted iterate is rescaled `A ← cA` with
//! `c = √(Tr ρ₂A⁻¹ / Tr ρ₁A)`, the exact 1-D minimizer along the scaling
//! direction; at the optimum the two summands are equal.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{CoreError, Result};
use crate::fidelity::{fidelity_positive, geometric_mean_quasi};
use crate::operator::{
    eig_hermitian_raw, max_abs, CMat, DensityOperator, PositiveOperator,
};

/// Settings for the cone optimizers.
#[derive(Clone, Debug)]
pub struct OptimizerOptions {
    pub max_iter: usize,
    /// Relative objective change below which a step counts as stalled;
    /// five consecutive stalled accepted steps terminate the run.
    pub tol: f64,
    /// Start from `H = log A*` instead of `H = 0`.
    pub warm_start: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self { max_iter: 10_000, tol: 1e-6, warm_start: false }
    }
}

/// Outcome of a variational minimization.
#[derive(Clone, Debug)]
pub struct WitnessResult {
    /// The optimizing `A = exp(H)`, strictly positive definite.
    pub witness: PositiveOperator,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step (non-increasing).
    pub objective_history: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
enum Objective {
    Product,
    Sum,
}

// divided difference of exp, the entrywise kernel of the Fréchet derivative
fn dd_exp(x: f64, y: f64) -> f64 {
    if (x - y).abs() < 1e-9 {
        (0.5 * (x + y)).exp()
    } else {
        (x.exp() - y.exp()) / (x - y)
    }
}

struct Evaluation {
    value: f64,
    a_term: f64,
    b_term: f64,
    gradient: CMat,
}

/// Value and Hermitian gradient of the objective at `H`.
fn evaluate(h: &CMat, rho1: &CMat, rho2: &CMat, objective: Objective) -> Result<Evaluation> {
    let n = h.nrows();
    let eig = eig_hermitian_raw(h)?;
    let v = &eig.vectors;
    let r1 = v.adjoint() * rho1 * v;
    let r2 = v.adjoint() * rho2 * v;

    let mut a_term = 0.0;
    let mut b_term = 0.0;
    for i in 0..n {
        a_term += r1[(i, i)].re * eig.values[i].exp();
        b_term += r2[(i, i)].re * (-eig.values[i]).exp();
    }

    // d Tr(ρ₁ e^H) = V (Γ⁺ ∘ ρ̃₁) V†,  d Tr(ρ₂ e^{-H}) = −V (Γ⁻ ∘ ρ̃₂) V†
    let mut ga = CMat::zeros(n, n);
    let mut gb = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let li = eig.values[i];
            let lj = eig.values[j];
            ga[(i, j)] = r1[(i, j)].scale(dd_exp(li, lj));
            gb[(i, j)] = r2[(i, j)].scale(-dd_exp(-li, -lj));
        }
    }
    let grad_a = v * ga * v.adjoint();
    let grad_b = v * gb * v.adjoint();

    let (value, gradient) = match objective {
        Objective::Product => (a_term * b_term, grad_a.scale(b_term) + grad_b.scale(a_term)),
        Objective::Sum => (0.5 * (a_term + b_term), (grad_a + grad_b).scale(0.5)),
    };
    Ok(Evaluation { value, a_term, b_term, gradient })
}

fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

fn minimize(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    opts: &OptimizerOptions,
    objective: Objective,
) -> Result<WitnessResult> {
    if rho1.dim() != rho2.dim() {
        return Err(CoreError::DimensionMismatch { left: rho1.dim(), right: rho2.dim() });
    }
    let n = rho1.dim();
    let r1 = rho1.matrix();
    let r2 = rho2.matrix();

    let mut h = if opts.warm_start {
        let witness = optimal_witness(rho1, rho2, &Tolerances::default())?;
        log_of_positive(&witness.operator)
    } else {
        CMat::zeros(n, n)
    };
    // rescaling A ← cA moves along the identity direction and, for the sum
    // objective, drops the value to the geometric mean of the two terms
    let equalize = |h: &mut CMat, eval: &Evaluation| {
        if objective == Objective::Sum && eval.a_term > 0.0 && eval.b_term > 0.0 {
            let shift = 0.5 * (eval.b_term.ln() - eval.a_term.ln());
            for i in 0..n {
                h[(i, i)] += num_complex::Complex64::new(shift, 0.0);
            }
        }
    };

    let mut eval = evaluate(&h, r1, r2, objective)?;
    equalize(&mut h, &eval);
    eval = evaluate(&h, r1, r2, objective)?;

    let mut history = vec![eval.value];
    let mut step = 1.0_f64;
    let mut prev: Option<(CMat, CMat)> = None; // (H, gradient) of last accepted step
    let mut stalled = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;
    // the per-step stall threshold sits three orders below the accuracy
    // target: stopping at rel-change = tol leaves a tail error well above
    // tol for slowly contracting descent directions
    let stall_tol = opts.tol * 1e-3;

    while iterations < opts.max_iter {
        iterations += 1;
        let grad_sq = frobenius_sq(&eval.gradient);
        if grad_sq.sqrt() < 1e-12 {
            converged = true;
            break;
        }

        // Barzilai–Borwein step from the last accepted pair
        if let Some((ph, pg)) = &prev {
            let dh = &h - ph;
            let dg = &eval.gradient - pg;
            let denom = dh.iter().zip(dg.iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
            let numer = frobenius_sq(&dh);
            if denom > 0.0 && numer > 0.0 {
                step = (numer / denom).clamp(1e-12, 1e3);
            }
        }

        // Armijo backtracking
        let mut t = step;
        let mut accepted = None;
        for _ in 0..60 {
            let candidate = &h - eval.gradient.scale(t);
            let cand_eval = evaluate(&candidate, r1, r2, objective)?;
            if cand_eval.value <= eval.value - 1e-4 * t * grad_sq {
                accepted = Some((candidate, cand_eval));
                break;
            }
            t *= 0.5;
        }
        let Some((mut new_h, mut new_eval)) = accepted else {
            // no descent direction at working precision
            converged = true;
            break;
        };
        equalize(&mut new_h, &new_eval);
        if objective == Objective::Sum {
            new_eval = evaluate(&new_h, r1, r2, objective)?;
        }

        let rel_change = (eval.value - new_eval.value).abs() / eval.value.abs().max(1e-300);
        prev = Some((h.clone(), eval.gradient.clone()));
        h = new_h;
        eval = new_eval;
        history.push(eval.value);

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

    let witness_eig = eig_hermitian_raw(&h)?;
    let witness = PositiveOperator::from_eigen_parts(
        witness_eig.values.iter().map(|l| l.exp()).collect(),
        witness_eig.vectors,
    );
    Ok(WitnessResult { witness, value: eval.value, iterations, converged, objective_history: history })
}

fn log_of_positive(p: &PositiveOperator) -> CMat {
    let eig = p.eigensystem();
    // floor tiny eigenvalues so the log stays finite
    let floor = p.lambda_max().max(1e-300) * 1e-15;
    eig.reconstruct_with(|l| l.max(floor).ln())
}

/// Minimizes `(Tr ρ₁A)(Tr ρ₂A⁻¹)` over `A > 0`; the infimum is
/// `Pr(ρ₁,ρ₂)`, reached within `opts.tol` for invertible states.
pub fn inf_product(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    opts: &OptimizerOptions,
) -> Result<WitnessResult> {
    minimize(rho1, rho2, opts, Objective::Product)
}

/// Minimizes `½(Tr ρ₁A + Tr ρ₂A⁻¹)` over `A > 0`; the infimum is
/// `F(ρ₁,ρ₂)`, with equal summands at the optimum.
pub fn inf_sum(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    opts: &OptimizerOptions,
) -> Result<WitnessResult> {
    minimize(rho1, rho2, opts, Objective::Sum)
}

/// The analytically optimal witness together with the regularization that
/// was needed to form it.
#[derive(Clone, Debug)]
pub struct OptimalWitness {
    pub operator: PositiveOperator,
    /// ε of the `ρ + εI` shift applied to singular inputs, when any.
    pub regularization: Option<f64>,
}

/// `A* = ρ₂ # ρ₁^{[-1]}`: plugging it into either variational objective
/// yields `F(ρ₁,ρ₂)` exactly, since `Tr ρ₁A* = Tr ρ₂A*⁻¹ = F`. Singular
/// states are shifted by `εI` with `ε = 1e-9·Tr ρ` (degenerate cases settle
/// by continuity); the shift is reported.
pub fn optimal_witness(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    tol: &Tolerances,
) -> Result<OptimalWitness> {
    if rho1.dim() != rho2.dim() {
        return Err(CoreError::DimensionMismatch { left: rho1.dim(), right: rho2.dim() });
    }
    let mut regularization: Option<f64> = None;
    let mut shifted = |rho: &DensityOperator| -> PositiveOperator {
        if rho.positive().is_invertible(tol) {
            rho.positive().clone()
        } else {
            let eps = 1e-9 * rho.trace();
            regularization = Some(regularization.map_or(eps, |e: f64| e.max(eps)));
            let eig = rho.positive().eigensystem();
            PositiveOperator::from_eigen_parts(
                eig.values.iter().map(|l| l + eps).collect(),
                eig.vectors.clone(),
            )
        }
    };
    let p1 = shifted(rho1);
    let p2 = shifted(rho2);
    let operator = geometric_mean_quasi(&p2, &p1, tol)?;
    Ok(OptimalWitness { operator, regularization })
}

/// Result of the concavity inequality
/// `F(Σλ_jρ_j, Σμ_kω_k) ≥ Σ √(λ_jμ_j) F(ρ_j, ω_j)`.
#[derive(Clone, Debug, Serialize)]
pub struct ConcavityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    /// Whether `ρ_j ω_k = 0` for all `j ≠ k` — the equality condition.
    pub cross_orthogonal: bool,
    /// Set when the equality condition is met; the report then also claims
    /// `lhs = rhs` within tolerance.
    pub equality_expected: bool,
}

/// Checks concavity of fidelity for two mixtures. Both lists must pair up
/// (the bound couples the j-th term of each).
pub fn concavity_check(
    terms1: &[(f64, DensityOperator)],
    terms2: &[(f64, DensityOperator)],
    tol: &Tolerances,
) -> Result<ConcavityReport> {
    if terms1.len() != terms2.len() || terms1.is_empty() {
        return Err(CoreError::LengthMismatch { left: terms1.len(), right: terms2.len() });
    }
    for (w, _) in terms1.iter().chain(terms2.iter()) {
        if *w < 0.0 {
            return Err(CoreError::NegativeWeight(*w));
        }
    }
    let dim = terms1[0].1.dim();
    let mix = |terms: &[(f64, DensityOperator)]| -> Result<PositiveOperator> {
        let mut acc = CMat::zeros(dim, dim);
        for (w, rho) in terms {
            if rho.dim() != dim {
                return Err(CoreError::DimensionMismatch { left: dim, right: rho.dim() });
            }
            acc += rho.matrix().scale(*w);
        }
        PositiveOperator::from_matrix(acc)
    };
    let mix1 = mix(terms1)?;
    let mix2 = mix(terms2)?;
    let lhs = fidelity_positive(&mix1, &mix2)?;

    let mut rhs = 0.0;
    for ((l, rho), (m, omega)) in terms1.iter().zip(terms2.iter()) {
        rhs += (l * m).sqrt() * fidelity_positive(rho.positive(), omega.positive())?;
    }

    let mut cross_orthogonal = true;
    for (j, (_, rho)) in terms1.iter().enumerate() {
        for (k, (_, omega)) in terms2.iter().enumerate() {
            if j != k && max_abs(&(rho.matrix() * omega.matrix())) > tol.inequality_tol {
                cross_orthogonal = false;
            }
        }
    }

    let slack = lhs - rhs;
    Ok(ConcavityReport {
        lhs,
        rhs,
        slack,
        holds: slack >= -tol.inequality_tol,
        cross_orthogonal,
        equality_expected: cross_orthogonal,
    })
}

/// Substitutes a positive probe into the variational objectives, returning
/// `(Tr ρ₁A, Tr ρ₂A^{[-1]})`. By the variational principle the product of
/// the two can never undercut `Pr(ρ₁,ρ₂)`.
pub fn product_objective(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    witness: &PositiveOperator,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    if rho1.dim() != witness.dim() || rho2.dim() != witness.dim() {
        return Err(CoreError::DimensionMismatch { left: rho1.dim(), right: witness.dim() });
    }
    let a: f64 = (rho1.matrix() * witness.matrix()).diagonal().iter().map(|z| z.re).sum();
    let inv = witness.quasi_inverse(-1.0, tol);
    let b: f64 = (rho2.matrix() * inv.matrix()).diagonal().iter().map(|z| z.re).sum();
    Ok((a, b))
}
