//! Numerical tolerances shared across the crate.

use serde::{Deserialize, Serialize};

/// Tolerance knobs used by type constructors, quasi-inverse support cuts,
/// the Lyapunov solver and the transport machinery.
///
/// The defaults are calibrated for double precision at desk scale
/// (dimensions up to ~64). Every report that depends on a tolerance carries
/// the value that was used.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Max entrywise |M − M†| accepted by `HermitianMatrix`.
    pub hermiticity_tol: f64,
    /// Eigenvalues of a `PositiveOperator` must be ≥ −psd_tol; negatives
    /// within tolerance are clamped to 0 at construction.
    pub psd_tol: f64,
    /// |trace − 1| bound for normalized `DensityOperator`s.
    pub trace_tol: f64,
    /// Support cut for quasi-inverses and the Lyapunov solver, relative to
    /// the largest eigenvalue: eigenvalues ≤ rank_tol_factor·λ_max count as
    /// kernel.
    pub rank_tol_factor: f64,
    /// Residual ‖Gρ + ρG − X‖_max above which the Lyapunov solver flags
    /// the singular-support case.
    pub residual_tol: f64,
    /// Convergence tolerance for the variational and purification
    /// optimizers.
    pub opt_tol: f64,
    /// Trace distance between curve endpoints below which a curve counts
    /// as closed.
    pub closure_tol: f64,
    /// Max adjacent-state trace distance accepted by `DensityCurve`; keeps
    /// discretizations from under-resolving the curve.
    pub curve_step_tol: f64,
    /// Slack allowed when checking the paper's inequalities.
    pub inequality_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity_tol: 1e-10,
            psd_tol: 1e-10,
            trace_tol: 1e-10,
            rank_tol_factor: 1e-9,
            residual_tol: 1e-8,
            opt_tol: 1e-6,
            closure_tol: 1e-8,
            curve_step_tol: 0.25,
            inequality_tol: 1e-9,
        }
    }
}

impl Tolerances {
    /// Absolute support cut for an operator with largest eigenvalue
    /// `lambda_max`.
    pub fn rank_tol(&self, lambda_max: f64) -> f64 {
        self.rank_tol_factor * lambda_max.abs()
    }
}
