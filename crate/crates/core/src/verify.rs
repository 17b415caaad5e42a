//! Randomized verification sweeps: monotonicity, concavity, the inequality
//! bounds, the functor-condition battery and transport convergence checks,
//! all driven by one seeded configuration so a report is reproducible
//! bit-for-bit.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::channels::{
    self, functor_conditions_check, monotonicity_check, FunctorPlan, KrausChannel, QFunctional,
    StochasticMap,
};
use crate::config::Tolerances;
use crate::error::{CoreError, Result};
use crate::fidelity::{
    bound_power_mean, bound_trace_norm, scaled_transition_probability, transition_probability,
};
use crate::operator::{cx, CMat, DensityOperator};
use crate::random;
use crate::transport::{
    pure_state_transport, transport, Amplitude, DensityCurve, TransportOptions,
};
use crate::variational::concavity_check;

/// Configuration for the sweep suites.
#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    pub seed: u64,
    /// Samples per dimension per check family.
    pub samples: usize,
    pub dims: Vec<usize>,
    /// Base grid size for the transport convergence checks.
    pub grid_resolution: usize,
    pub tolerances: Tolerances,
    /// Restrict the functor suite to one functional (the CLI's
    /// `--functional` flag); `None` runs the catalog with the
    /// negative-control logic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional: Option<QFunctional>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            samples: 200,
            dims: vec![2, 3, 4],
            grid_resolution: 100,
            tolerances: Tolerances::default(),
            functional: None,
        }
    }
}

/// One failed check inside a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub check: String,
    pub dim: usize,
    pub sample: usize,
    pub slack: f64,
}

/// Outcome of one suite.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks_run: usize,
    pub violations: Vec<Violation>,
    /// Smallest margin observed across all checks (negative = violated).
    pub worst_slack: f64,
    pub passed: bool,
}

struct SuiteBuilder {
    suite: String,
    checks_run: usize,
    violations: Vec<Violation>,
    worst_slack: f64,
}

impl SuiteBuilder {
    fn new(suite: &str) -> Self {
        Self { suite: suite.into(), checks_run: 0, violations: Vec::new(), worst_slack: f64::INFINITY }
    }

    fn record(&mut self, check: &str, dim: usize, sample: usize, slack: f64, holds: bool) {
        self.checks_run += 1;
        self.worst_slack = self.worst_slack.min(slack);
        if !holds {
            self.violations.push(Violation { check: check.into(), dim, sample, slack });
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.suite,
            checks_run: self.checks_run,
            passed: self.violations.is_empty(),
            worst_slack: if self.worst_slack.is_finite() { self.worst_slack } else { 0.0 },
            violations: self.violations,
        }
    }
}

/// The named verification suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Monotonicity,
    Concavity,
    Bounds,
    Functor,
    Transport,
    All,
}

impl FromStr for Suite {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monotonicity" => Ok(Suite::Monotonicity),
            "concavity" => Ok(Suite::Concavity),
            "bounds" => Ok(Suite::Bounds),
            "functor" => Ok(Suite::Functor),
            "transport" => Ok(Suite::Transport),
            "all" => Ok(Suite::All),
            other => Err(CoreError::InvalidInput(format!(
                "unknown suite '{other}' (expected monotonicity, concavity, bounds, functor, transport or all)"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Monotonicity => "monotonicity",
            Suite::Concavity => "concavity",
            Suite::Bounds => "bounds",
            Suite::Functor => "functor",
            Suite::Transport => "transport",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

/// Runs a suite (or all of them), returning one report per suite.
pub fn run(suite: Suite, cfg: &SweepConfig) -> Result<Vec<SuiteReport>> {
    match suite {
        Suite::Monotonicity => Ok(vec![run_monotonicity(cfg)?]),
        Suite::Concavity => Ok(vec![run_concavity(cfg)?]),
        Suite::Bounds => Ok(vec![run_bounds(cfg)?]),
        Suite::Functor => Ok(vec![run_functor(cfg)?]),
        Suite::Transport => Ok(vec![run_transport(cfg)?]),
        Suite::All => Ok(vec![
            run_monotonicity(cfg)?,
            run_concavity(cfg)?,
            run_bounds(cfg)?,
            run_functor(cfg)?,
            run_transport(cfg)?,
        ]),
    }
}

/// Fidelity monotonicity under random CPTP channels, transpose-composed
/// positive maps and partial-trace channels.
pub fn run_monotonicity(cfg: &SweepConfig) -> Result<SuiteReport> {
    let mut b = SuiteBuilder::new("monotonicity");
    let tol = &cfg.tolerances;
    for (di, &dim) in cfg.dims.iter().enumerate() {
        let mut rng = random::rng_stream(cfg.seed, 100 + di as u64);
        for sample in 0..cfg.samples {
            match sample % 3 {
                0 => {
                    let r1 = random::random_density(dim, &mut rng);
                    let r2 = random::random_density(dim, &mut rng);
                    let kraus = 1 + rng.random_range(0..3);
                    let map = StochasticMap::Channel(channels::random_cptp(
                        dim,
                        dim,
                        kraus,
                        rng.random::<u64>(),
                    )?);
                    let rep = monotonicity_check(&r1, &r2, &map, tol)?;
                    b.record("cptp channel", dim, sample, rep.slack, rep.holds);
                }
                1 => {
                    let r1 = random::random_density(dim, &mut rng);
                    let r2 = random::random_density(dim, &mut rng);
                    let kraus = 1 + rng.random_range(0..3);
                    let map = StochasticMap::TransposedChannel(channels::random_cptp(
                        dim,
                        dim,
                        kraus,
                        rng.random::<u64>(),
                    )?);
                    let rep = monotonicity_check(&r1, &r2, &map, tol)?;
                    b.record("transpose-composed positive map", dim, sample, rep.slack, rep.holds);
                }
                _ => {
                    // joint states on H ⊗ C², reduced to the left factor
                    let r1 = random::random_density(dim * 2, &mut rng);
                    let r2 = random::random_density(dim * 2, &mut rng);
                    let map = StochasticMap::Channel(KrausChannel::partial_trace_right(dim, 2));
                    let rep = monotonicity_check(&r1, &r2, &map, tol)?;
                    b.record("partial trace", dim, sample, rep.slack, rep.holds);
                }
            }
        }
    }
    Ok(b.finish())
}

/// Concavity of fidelity for random mixtures plus the block-orthogonal
/// equality case.
pub fn run_concavity(cfg: &SweepConfig) -> Result<SuiteReport> {
    let mut b = SuiteBuilder::new("concavity");
    let tol = &cfg.tolerances;
    for (di, &dim) in cfg.dims.iter().enumerate() {
        let mut rng = random::rng_stream(cfg.seed, 200 + di as u64);
        for sample in 0..cfg.samples {
            let terms = 2 + sample % 2;
            let mut t1 = Vec::new();
            let mut t2 = Vec::new();
            for _ in 0..terms {
                t1.push((rng.random::<f64>(), random::random_density(dim, &mut rng)));
                t2.push((rng.random::<f64>(), random::random_density(dim, &mut rng)));
            }
            let rep = concavity_check(&t1, &t2, tol)?;
            b.record("random mixture", dim, sample, rep.slack, rep.holds);
        }
        // block-orthogonal equality on H ⊕ H
        let embed = |m: &CMat, offset: usize| {
            let mut out = CMat::zeros(2 * dim, 2 * dim);
            for i in 0..dim {
                for j in 0..dim {
                    out[(offset + i, offset + j)] = m[(i, j)];
                }
            }
            DensityOperator::from_matrix(out).expect("psd block embedding")
        };
        let t1 = vec![
            (0.4, embed(random::random_density(dim, &mut rng).matrix(), 0)),
            (0.6, embed(random::random_density(dim, &mut rng).matrix(), dim)),
        ];
        let t2 = vec![
            (0.5, embed(random::random_density(dim, &mut rng).matrix(), 0)),
            (0.5, embed(random::random_density(dim, &mut rng).matrix(), dim)),
        ];
        let rep = concavity_check(&t1, &t2, tol)?;
        let equality_slack = tol.inequality_tol - (rep.lhs - rep.rhs).abs();
        b.record(
            "block-orthogonal equality",
            dim,
            cfg.samples,
            equality_slack,
            rep.cross_orthogonal && equality_slack >= 0.0,
        );
    }
    Ok(b.finish())
}

/// The power-mean and trace-norm bounds on possibly-unnormalized pairs,
/// plus the scaling law.
pub fn run_bounds(cfg: &SweepConfig) -> Result<SuiteReport> {
    let mut b = SuiteBuilder::new("bounds");
    let tol = &cfg.tolerances;
    for (di, &dim) in cfg.dims.iter().enumerate() {
        let mut rng = random::rng_stream(cfg.seed, 300 + di as u64);
        for sample in 0..cfg.samples {
            let scale1 = 0.25 + 3.75 * rng.random::<f64>();
            let scale2 = 0.25 + 3.75 * rng.random::<f64>();
            let w1 = random::random_positive(dim, &mut rng).scale(scale1)?;
            let w2 = random::random_positive(dim, &mut rng).scale(scale2)?;

            for k in 1..10 {
                let s = k as f64 / 10.0;
                let rep = bound_power_mean(&w1, &w2, s, tol)?;
                b.record("power-mean bound", dim, sample, rep.slack, rep.holds);
            }

            let rep = bound_trace_norm(&w1, &w2, tol)?;
            b.record("trace-norm bound", dim, sample, rep.slack, rep.holds);

            let l1 = 0.1 + 9.9 * rng.random::<f64>();
            let l2 = 0.1 + 9.9 * rng.random::<f64>();
            let base = transition_probability(&w1, &w2)?;
            let scaled = scaled_transition_probability(&w1, l1, &w2, l2)?;
            let residual = (scaled - l1 * l2 * base).abs() / (1.0 + scaled.abs());
            let slack = tol.inequality_tol - residual;
            b.record("scaling law", dim, sample, slack, slack >= 0.0);
        }
    }
    Ok(b.finish())
}

/// Functor-condition battery over the candidate catalog. In catalog mode
/// the control functional (product of traces) must fail the pure-state
/// agreement — the suite flags it if it unexpectedly passes.
pub fn run_functor(cfg: &SweepConfig) -> Result<SuiteReport> {
    let mut b = SuiteBuilder::new("functor");
    let tol = &cfg.tolerances;
    let plan = FunctorPlan {
        dims: cfg.dims.clone(),
        pure_samples: cfg.samples / 2,
        channel_samples: cfg.samples / 2,
        domination_samples: cfg.samples / 2,
        seed: cfg.seed,
    };

    if let Some(q) = &cfg.functional {
        let rep = functor_conditions_check(q, &plan, tol)?;
        b.checks_run += rep.checks_run;
        for v in &rep.violations {
            b.worst_slack = b.worst_slack.min(-v.slack.abs());
            b.violations.push(Violation {
                check: format!("{} / {:?}", rep.functional, v.condition),
                dim: v.dim,
                sample: v.sample,
                slack: -v.slack.abs(),
            });
        }
        return Ok(b.finish());
    }

    for q in [
        QFunctional::TransitionProbability,
        QFunctional::PowerTrace(0.5),
        QFunctional::TraceNormBound,
    ] {
        let rep = functor_conditions_check(&q, &plan, tol)?;
        b.checks_run += rep.checks_run;
        for v in &rep.violations {
            b.worst_slack = b.worst_slack.min(-v.slack.abs());
            b.violations.push(Violation {
                check: format!("{} / {:?}", rep.functional, v.condition),
                dim: v.dim,
                sample: v.sample,
                slack: -v.slack.abs(),
            });
        }
    }
    // negative control: must fail pure-state agreement
    let control = functor_conditions_check(&QFunctional::ProductOfTraces, &plan, tol)?;
    b.record(
        "negative control fails pure agreement",
        plan.dims.first().copied().unwrap_or(2),
        0,
        if control.passed { -1.0 } else { 1.0 },
        !control.passed,
    );
    Ok(b.finish())
}

fn bloch_state(r: [f64; 3]) -> DensityOperator {
    let m = CMat::from_row_slice(
        2,
        2,
        &[
            cx(0.5 * (1.0 + r[2]), 0.0),
            cx(0.5 * r[0], -0.5 * r[1]),
            cx(0.5 * r[0], 0.5 * r[1]),
            cx(0.5 * (1.0 - r[2]), 0.0),
        ],
    );
    DensityOperator::from_matrix(m).expect("valid Bloch state")
}

pub(crate) fn bloch_circle_curve(n: usize, radius: f64, theta: f64) -> DensityCurve {
    let mut grid = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let s = 2.0 * PI * (k as f64) / (n as f64);
        grid.push(s);
        let phi = if k == n { 0.0 } else { s };
        states.push(bloch_state([
            radius * theta.sin() * phi.cos(),
            radius * theta.sin() * phi.sin(),
            radius * theta.cos(),
        ]));
    }
    DensityCurve::new(grid, states).expect("valid Bloch circle")
}

/// Transport smoke checks: second-order convergence of the parallelity
/// defect and holonomy unitarity on a fixed closed qubit curve, plus the
/// pure-state Berry-phase oracle at one latitude.
pub fn run_transport(cfg: &SweepConfig) -> Result<SuiteReport> {
    let mut b = SuiteBuilder::new("transport");
    let tol = &cfg.tolerances;

    let run_at = |n: usize| -> Result<(f64, f64)> {
        let curve = bloch_circle_curve(n, 0.7, 1.0);
        let w0 = Amplitude::from_sqrt(&curve.states()[0].clone());
        let res = transport(&curve, &w0, &TransportOptions::default(), tol)?;
        Ok((
            res.total_parallelity_defect(),
            res.holonomy_unitarity_defect.unwrap_or(f64::NAN),
        ))
    };
    let base = cfg.grid_resolution.max(50);
    let (p1, u1) = run_at(base)?;
    let (p2, u2) = run_at(2 * base)?;
    let ratio_p = p1 / p2;
    let ratio_u = u1 / u2;
    b.record("parallelity defect halving ratio in [3,5]", 2, 0, ratio_p - 3.0, (3.0..=5.0).contains(&ratio_p));
    b.record("unitarity defect halving ratio in [3,5]", 2, 1, ratio_u - 3.0, (3.0..=5.0).contains(&ratio_u));

    // pure-state Berry phase at latitude 1.0
    let theta = 1.0_f64;
    let n = 1000;
    let mut vectors = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let phi = if k == n { 0.0 } else { 2.0 * PI * (k as f64) / (n as f64) };
        vectors.push(nalgebra::DVector::from_vec(vec![
            cx((theta / 2.0).cos(), 0.0),
            cx((theta / 2.0).sin(), 0.0) * num_complex::Complex64::new(phi.cos(), phi.sin()),
        ]));
    }
    let pure = pure_state_transport(&vectors)?;
    let expected = -PI * (1.0 - theta.cos());
    let err = (pure.phase - expected).abs();
    b.record("pure Berry phase matches −Ω/2", 2, 2, 1e-3 - err, err <= 1e-3);

    Ok(b.finish())
}
