//! Outer loops: the exact-subdifferential baseline and tPLDCA.
//!
//! Both loops pick `u_k` near `∂h(x_k)`, then scan the inner solver's iterates
//! `z₋₁ = x_k, z₀, z₁, …` for the first one passing a descent test and a
//! subdifferential-distance test. tPLDCA measures the distance to the
//! ε-strict subdifferential `∂̂_{ζ_k} g(z)` (or to a caller-supplied set),
//! the baseline to the exact subdifferential `∂g(z)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{DcError, Result};
use crate::inner::{build_subproblem, InnerSolver};
use crate::problem::{
    dc_value, ensure_dim, ensure_finite_vec, ConvexOracle, DcProblem, MaxSmoothFunction,
};
use crate::subdiff::{abs_eps_distance, active_set, dist_to_strict_subdiff};
use crate::Vector;

/// Number of leading indices on which a ζ schedule is checked.
const ZETA_PROBES: usize = 1000;

/// `k ↦ ζ_k`, the active-set tolerance at outer iteration `k`.
#[derive(Clone)]
pub enum ZetaSchedule {
    /// `1/(k+1)²`.
    InverseSquare,
    Constant(f64),
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl ZetaSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            ZetaSchedule::InverseSquare => {
                let d = (k as f64) + 1.0;
                1.0 / (d * d)
            }
            ZetaSchedule::Constant(z) => *z,
            ZetaSchedule::Custom(f) => f(k),
        }
    }

    fn validate(&self) -> Result<()> {
        let mut prev = f64::INFINITY;
        for k in 0..ZETA_PROBES {
            let z = self.at(k);
            if !(z.is_finite() && z > 0.0) {
                return Err(DcError::InvalidConfig(format!(
                    "ζ_{k} = {z} must be positive and finite"
                )));
            }
            if z > prev {
                return Err(DcError::InvalidConfig(format!(
                    "ζ schedule increases at k = {k}"
                )));
            }
            prev = z;
        }
        Ok(())
    }
}

impl fmt::Debug for ZetaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZetaSchedule::InverseSquare => f.write_str("InverseSquare"),
            ZetaSchedule::Constant(z) => write!(f, "Constant({z})"),
            ZetaSchedule::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Validated solver parameters. Build with [`SolverConfig::builder`].
#[derive(Clone, Debug)]
pub struct SolverConfig {
    sigma: f64,
    lambda: f64,
    theta: f64,
    rho: f64,
    gamma: f64,
    zeta: ZetaSchedule,
    outer_tol: f64,
    max_outer: usize,
    inner_cap: usize,
    noise_radius: f64,
    seed: u64,
    record_inner: bool,
}

#[derive(Clone, Debug)]
pub struct SolverConfigBuilder {
    cfg: SolverConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma: 0.01,
            lambda: 1.0,
            theta: 1.1,
            rho: 0.0,
            gamma: 0.0,
            zeta: ZetaSchedule::InverseSquare,
            outer_tol: 1e-10,
            max_outer: 1000,
            inner_cap: 1_000_000,
            noise_radius: 0.0,
            seed: 0,
            record_inner: false,
        }
    }
}

macro_rules! setter {
    ($name:ident: $ty:ty) => {
        pub fn $name(mut self, v: $ty) -> Self {
            self.cfg.$name = v;
            self
        }
    };
}

impl SolverConfigBuilder {
    setter!(sigma: f64);
    setter!(lambda: f64);
    setter!(theta: f64);
    setter!(rho: f64);
    setter!(gamma: f64);
    setter!(zeta: ZetaSchedule);
    setter!(outer_tol: f64);
    setter!(max_outer: usize);
    setter!(inner_cap: usize);
    setter!(noise_radius: f64);
    setter!(seed: u64);
    setter!(record_inner: bool);

    pub fn build(self) -> Result<SolverConfig> {
        self.cfg.validate()?;
        Ok(self.cfg)
    }
}

fn bad(msg: String) -> DcError {
    DcError::InvalidConfig(msg)
}

impl SolverConfig {
    pub fn builder() -> SolverConfigBuilder {
        SolverConfigBuilder {
            cfg: SolverConfig::default(),
        }
    }

    /// Reopens a validated config for modification.
    pub fn to_builder(&self) -> SolverConfigBuilder {
        SolverConfigBuilder { cfg: self.clone() }
    }

    /// Range checks shared by both algorithms. `θ > 1/λ` is checked by [`tpldca_solve`] only,
    /// since the baseline and its counterexample use `θ ≤ 1/λ`.
    fn validate(&self) -> Result<()> {
        let Self {
            sigma,
            lambda,
            theta,
            rho,
            gamma,
            ..
        } = *self;
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(bad(format!("σ must lie in (0, 1), got {sigma}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(bad(format!("λ must be > 0, got {lambda}")));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(bad(format!("θ must be > 0, got {theta}")));
        }
        let rho_max = (1.0 - sigma) / lambda;
        if !(rho >= 0.0 && rho < rho_max) {
            return Err(bad(format!("ρ must lie in [0, {rho_max}), got {rho}")));
        }
        let gamma_max = rho_max - rho;
        if !(gamma >= 0.0 && gamma < gamma_max) {
            return Err(bad(format!("γ must lie in [0, {gamma_max}), got {gamma}")));
        }
        if !(self.outer_tol.is_finite() && self.outer_tol > 0.0) {
            return Err(bad(format!(
                "outer_tol must be > 0, got {}",
                self.outer_tol
            )));
        }
        if self.max_outer == 0 {
            return Err(bad("max_outer must be >= 1".into()));
        }
        if self.inner_cap == 0 {
            return Err(bad("inner_cap must be >= 1".into()));
        }
        if !(self.noise_radius.is_finite() && self.noise_radius >= 0.0) {
            return Err(bad(format!(
                "noise_radius must be >= 0, got {}",
                self.noise_radius
            )));
        }
        self.zeta.validate()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn zeta(&self) -> &ZetaSchedule {
        &self.zeta
    }
    pub fn outer_tol(&self) -> f64 {
        self.outer_tol
    }
    pub fn max_outer(&self) -> usize {
        self.max_outer
    }
    pub fn inner_cap(&self) -> usize {
        self.inner_cap
    }
    pub fn noise_radius(&self) -> f64 {
        self.noise_radius
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    /// `θ > 1/λ`, the extra condition tPLDCA places on top of [`SolverConfig::builder`]'s checks.
    pub fn admits_tpldca(&self) -> bool {
        self.theta * self.lambda > 1.0
    }

    pub fn record_inner(&self) -> bool {
        self.record_inner
    }
}

/// One row of a per-inner-iteration gap series. `gap_strict` is NaN where it was not evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerSample {
    pub i: i64,
    pub gap_descent: f64,
    pub gap_strict: f64,
}

/// Outcome of outer iteration `k`, started at `x`.
#[derive(Clone, Debug)]
pub struct IterateRecord {
    pub k: usize,
    pub x: Vector,
    pub u: Vector,
    pub f_value: f64,
    /// `f(x_k) + (γ/2 + ρ)‖x_k − x_{k−1}‖²`.
    pub merit: f64,
    /// `‖x_{k+1} − x_k‖`; zero when the inner loop did not accept.
    pub step_norm: f64,
    /// Accepted inner index `N_k ≥ −1`, or the last index scanned when nothing was accepted.
    pub inner_iterations: i64,
    pub accepted: bool,
    pub gap_descent: f64,
    /// NaN when the distance test was skipped because the descent test failed.
    pub gap_strict: f64,
    pub zeta: f64,
    pub series: Option<Vec<InnerSample>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveStatus {
    Converged,
    MaxOuterReached,
    /// No inner iterate in `−1..inner_cap` passed both tests at outer iteration `k`.
    InnerCapHit {
        k: usize,
        iterates: usize,
        descent_unmet: usize,
        strict_unmet: usize,
        strict_checked: usize,
    },
    OracleFault {
        k: usize,
        message: String,
    },
}

impl SolveStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxOuterReached => "max_outer_reached",
            SolveStatus::InnerCapHit { .. } => "inner_cap_hit",
            SolveStatus::OracleFault { .. } => "oracle_fault",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveTrace {
    pub algorithm: &'static str,
    pub records: Vec<IterateRecord>,
    pub status: SolveStatus,
    pub final_x: Vector,
    pub warnings: Vec<String>,
}

impl SolveTrace {
    pub fn record(&self, k: usize) -> Option<&IterateRecord> {
        self.records.iter().find(|r| r.k == k)
    }
}

/// Distance from `u` to the relaxed subdifferential used in the second acceptance test.
pub trait SubdiffDistance: Send + Sync {
    fn distance(&self, g: &MaxSmoothFunction, z: &Vector, zeta: f64, u: &Vector) -> Result<f64>;
}

/// `dist(u, ∂̂_ζ g(z))`, the computable choice.
#[derive(Clone, Copy, Debug, Default)]
pub struct StrictDistance;

impl SubdiffDistance for StrictDistance {
    fn distance(&self, g: &MaxSmoothFunction, z: &Vector, zeta: f64, u: &Vector) -> Result<f64> {
        dist_to_strict_subdiff(g, z, zeta, u)
    }
}

/// `dist(u, ∂_ζ|·|(z))` from the closed form; valid only when `g = |·|` on ℝ.
#[derive(Clone, Copy, Debug, Default)]
pub struct AbsEpsDistance;

impl SubdiffDistance for AbsEpsDistance {
    fn distance(&self, g: &MaxSmoothFunction, z: &Vector, zeta: f64, u: &Vector) -> Result<f64> {
        if g.dim() != 1 || z.len() != 1 || u.len() != 1 {
            return Err(DcError::InvalidArgument(
                "the |·| interval oracle is one-dimensional".into(),
            ));
        }
        abs_eps_distance(z[0], zeta, u[0])
    }
}

/// Step 1: `u_k = s + δ` with `s ∈ ∂_{ε_k}h(x_k)`, `ε_k = ρ‖x_k − x_prev‖²` and a
/// seeded perturbation `‖δ‖ ≤ min(noise_radius, γ‖x_k − x_prev‖)`.
pub fn select_u(
    h: &ConvexOracle,
    x_k: &Vector,
    x_prev: &Vector,
    rho: f64,
    gamma: f64,
    noise_radius: f64,
    rng_seed: u64,
) -> Result<Vector> {
    ensure_dim(h.dim(), x_k)?;
    ensure_dim(h.dim(), x_prev)?;
    let gap = (x_k - x_prev).norm();
    let s = h.eps_subgradient(x_k, rho * gap * gap)?;
    let radius = noise_radius.min(gamma * gap);
    if !(radius > 0.0) {
        return Ok(s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let dir = Vector::from_fn(x_k.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = dir.norm();
    if !(norm > 0.0) {
        return Ok(s);
    }
    let scale = radius * rng.random_range(0.0..1.0) / norm;
    Ok(s + dir * scale)
}

/// `g(x_k) − g(z) − ⟨u_k, x_k − z⟩ − ((1−σ)/λ)‖z − x_k‖²`.
pub fn descent_gap(
    g: &MaxSmoothFunction,
    x_k: &Vector,
    u_k: &Vector,
    z: &Vector,
    sigma: f64,
    lambda: f64,
) -> Result<f64> {
    descent_gap_with(g, x_k, u_k, z, (1.0 - sigma) / lambda)
}

/// Baseline descent test: as [`descent_gap`] with coefficient `(1−σ)/(2λ)`.
pub fn souza_descent_gap(
    g: &MaxSmoothFunction,
    x_k: &Vector,
    u_k: &Vector,
    z: &Vector,
    sigma: f64,
    lambda: f64,
) -> Result<f64> {
    descent_gap_with(g, x_k, u_k, z, (1.0 - sigma) / (2.0 * lambda))
}

fn descent_gap_with(
    g: &MaxSmoothFunction,
    x_k: &Vector,
    u_k: &Vector,
    z: &Vector,
    coeff: f64,
) -> Result<f64> {
    Ok(descent_terms(g, x_k, u_k, z, coeff)?.0)
}

/// Units of roundoff granted to the descent test, relative to the magnitude of its terms.
const DESCENT_ROUNDING: f64 = 16.0 * f64::EPSILON;

/// The descent gap and the rounding error its evaluation may carry.
fn descent_terms(
    g: &MaxSmoothFunction,
    x_k: &Vector,
    u_k: &Vector,
    z: &Vector,
    coeff: f64,
) -> Result<(f64, f64)> {
    ensure_dim(g.dim(), x_k)?;
    ensure_dim(g.dim(), u_k)?;
    ensure_dim(g.dim(), z)?;
    let d = x_k - z;
    let (gx, gz, lin) = (g.value(x_k)?, g.value(z)?, u_k.dot(&d));
    let quad = coeff * d.norm_squared();
    let noise = DESCENT_ROUNDING * (gx.abs() + gz.abs() + lin.abs() + quad);
    Ok((gx - gz - lin - quad, noise))
}

/// `θ‖z − x_k‖ − dist(u_k, ∂̂_ζ g(z))`. With `ζ = 0` this is the exact-subdifferential test.
pub fn strict_gap(
    g: &MaxSmoothFunction,
    x_k: &Vector,
    u_k: &Vector,
    z: &Vector,
    zeta: f64,
    theta: f64,
) -> Result<f64> {
    ensure_dim(g.dim(), x_k)?;
    Ok(theta * (z - x_k).norm() - dist_to_strict_subdiff(g, z, zeta, u_k)?)
}

/// `dist(s, ∂g(x))` with `s` the exact subgradient returned by the `h` oracle.
pub fn criticality_residual(problem: &DcProblem, x: &Vector) -> Result<f64> {
    let s = problem.h().eps_subgradient(x, 0.0)?;
    dist_to_strict_subdiff(problem.g(), x, 0.0, &s)
}

enum Variant<'a> {
    Tpldca(&'a dyn SubdiffDistance),
    Souza,
}

/// Seed of the Step-1 perturbation at outer iteration `k`.
fn step_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (k as u64)
}

/// tPLDCA with the ε-strict subdifferential. Requires `θ > 1/λ`.
pub fn tpldca_solve(
    problem: &DcProblem,
    config: &SolverConfig,
    inner: &dyn InnerSolver,
    x0: &Vector,
    x_minus1: Option<&Vector>,
) -> Result<SolveTrace> {
    tpldca_solve_with_distance(problem, config, inner, x0, x_minus1, &StrictDistance)
}

/// tPLDCA with a caller-supplied subdifferential-distance oracle.
pub fn tpldca_solve_with_distance(
    problem: &DcProblem,
    config: &SolverConfig,
    inner: &dyn InnerSolver,
    x0: &Vector,
    x_minus1: Option<&Vector>,
    distance: &dyn SubdiffDistance,
) -> Result<SolveTrace> {
    if !config.admits_tpldca() {
        return Err(bad(format!(
            "tPLDCA requires θ > 1/λ, got θ = {} and λ = {}",
            config.theta, config.lambda
        )));
    }
    run(
        problem,
        config,
        inner,
        x0,
        x_minus1,
        Variant::Tpldca(distance),
    )
}

/// The exact-subdifferential baseline. Step 1 uses an exact subgradient of `h`.
pub fn souza_solve(
    problem: &DcProblem,
    config: &SolverConfig,
    inner: &dyn InnerSolver,
    x0: &Vector,
) -> Result<SolveTrace> {
    run(problem, config, inner, x0, None, Variant::Souza)
}

enum Scan {
    Accepted {
        i: i64,
        z: Vector,
        gd: f64,
        gs: f64,
        settled: bool,
    },
    Exhausted {
        i: i64,
        gd: f64,
        gs: f64,
        descent_unmet: usize,
        strict_unmet: usize,
        strict_checked: usize,
    },
}

fn run(
    problem: &DcProblem,
    config: &SolverConfig,
    inner: &dyn InnerSolver,
    x0: &Vector,
    x_minus1: Option<&Vector>,
    variant: Variant<'_>,
) -> Result<SolveTrace> {
    config.validate()?;
    ensure_dim(problem.dim(), x0)?;
    ensure_finite_vec("x0", x0, x0)?;
    if let Some(xm) = x_minus1 {
        ensure_dim(problem.dim(), xm)?;
        ensure_finite_vec("x_-1", xm, xm)?;
    }
    let algorithm = match variant {
        Variant::Tpldca(_) => "tpldca",
        Variant::Souza => "souza",
    };
    let mut trace = SolveTrace {
        algorithm,
        records: Vec::new(),
        status: SolveStatus::MaxOuterReached,
        final_x: x0.clone(),
        warnings: Vec::new(),
    };
    let mut x_prev = x_minus1.unwrap_or(x0).clone();
    let mut x_k = x0.clone();

    for k in 0..config.max_outer {
        match outer_step(
            problem, config, inner, &variant, k, &x_k, &x_prev, &mut trace,
        ) {
            Ok((record, settled)) => {
                let accepted = record.accepted;
                trace.records.push(record);
                if !accepted {
                    break;
                }
                x_prev = std::mem::replace(&mut x_k, trace.final_x.clone());
                if settled {
                    trace.status = SolveStatus::Converged;
                    break;
                }
            }
            Err(DcError::OracleFault { what, x }) => {
                trace.status = SolveStatus::OracleFault {
                    k,
                    message: format!("{what} is not finite at x = {x:?}"),
                };
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(trace)
}

/// Whether a null step accepted at `i = −1` ends the run.
///
/// The null step shows `u_k ∈ ∂̂_{ζ_k} g(x_k)`, which says little while `ζ_k` is
/// large. The run stops only if `u_k` also lies in `∂̂_η g(x_k)`, where
/// `η = 2·outer_tol·max‖∇g_i(x_k)‖` bounds the piece-value gaps that a move of
/// length `outer_tol` can close.
fn null_step_settles(
    g: &MaxSmoothFunction,
    x_k: &Vector,
    u: &Vector,
    zeta: f64,
    config: &SolverConfig,
) -> Result<bool> {
    let active = active_set(g, x_k, zeta)?;
    let mut grad_max = 0.0_f64;
    for &i in active.indices() {
        grad_max = grad_max.max(g.piece_gradient(i, x_k)?.norm());
    }
    let eta = (2.0 * config.outer_tol * grad_max).min(zeta);
    Ok(dist_to_strict_subdiff(g, x_k, eta, u)? <= config.theta * config.outer_tol)
}

#[allow(clippy::too_many_arguments)]
fn outer_step(
    problem: &DcProblem,
    config: &SolverConfig,
    inner: &dyn InnerSolver,
    variant: &Variant<'_>,
    k: usize,
    x_k: &Vector,
    x_prev: &Vector,
    trace: &mut SolveTrace,
) -> Result<(IterateRecord, bool)> {
    let g = problem.g();
    let u = match variant {
        Variant::Tpldca(_) => select_u(
            problem.h(),
            x_k,
            x_prev,
            config.rho,
            config.gamma,
            config.noise_radius,
            step_seed(config.seed, k),
        )?,
        Variant::Souza => problem.h().eps_subgradient(x_k, 0.0)?,
    };
    ensure_finite_vec("u_k", x_k, &u)?;
    let f_value = dc_value(problem, x_k)?;
    let prev_gap = (x_k - x_prev).norm_squared();
    let merit = f_value + (config.gamma / 2.0 + config.rho) * prev_gap;
    let zeta = match variant {
        Variant::Tpldca(_) => config.zeta.at(k),
        Variant::Souza => 0.0,
    };

    let sub = build_subproblem(problem, x_k.clone(), u.clone(), config.lambda)?;
    for w in inner.warnings(&sub) {
        if !trace.warnings.contains(&w) {
            trace.warnings.push(w);
        }
    }
    let coeff = match variant {
        Variant::Tpldca(_) => (1.0 - config.sigma) / config.lambda,
        Variant::Souza => (1.0 - config.sigma) / (2.0 * config.lambda),
    };
    let descent = |z: &Vector| descent_terms(g, x_k, &u, z, coeff);
    let strict = |z: &Vector| -> Result<f64> {
        let dist = match variant {
            Variant::Tpldca(d) => d.distance(g, z, zeta, &u)?,
            Variant::Souza => dist_to_strict_subdiff(g, z, 0.0, &u)?,
        };
        Ok(config.theta * (z - x_k).norm() - dist)
    };

    let mut series = config.record_inner.then(Vec::new);
    let scan = {
        let mut descent_unmet = 0;
        let mut strict_unmet = 0;
        let mut strict_checked = 0;
        let mut last = (-1i64, f64::NAN, f64::NAN);
        let mut found = None;
        for (idx, z) in inner
            .iterates(&sub, x_k.clone())?
            .take(config.inner_cap + 1)
            .enumerate()
        {
            let z = z?;
            ensure_dim(problem.dim(), &z)?;
            ensure_finite_vec("inner iterate", x_k, &z)?;
            let i = idx as i64 - 1;
            // Near convergence the true margin σ‖z − x_k‖²/λ drops below the
            // roundoff of g(x_k) − g(z); a gap within that roundoff counts as met.
            let (gd, noise) = descent(&z)?;
            let ok_d = gd >= -noise;
            if !ok_d {
                descent_unmet += 1;
            }
            let gs = if ok_d || series.is_some() {
                strict_checked += 1;
                let gs = strict(&z)?;
                if gs < 0.0 {
                    strict_unmet += 1;
                }
                gs
            } else {
                f64::NAN
            };
            if let Some(s) = series.as_mut() {
                s.push(InnerSample {
                    i,
                    gap_descent: gd,
                    gap_strict: gs,
                });
            }
            last = (i, gd, gs);
            if ok_d && gs >= 0.0 {
                let settled = if i >= 0 {
                    (&z - x_k).norm() <= config.outer_tol
                } else {
                    null_step_settles(g, x_k, &u, zeta, config)?
                };
                found = Some(Scan::Accepted {
                    i,
                    z,
                    gd,
                    gs,
                    settled,
                });
                break;
            }
        }
        found.unwrap_or(Scan::Exhausted {
            i: last.0,
            gd: last.1,
            gs: last.2,
            descent_unmet,
            strict_unmet,
            strict_checked,
        })
    };

    let record =
        |step_norm, inner_iterations, accepted, gap_descent, gap_strict, series| IterateRecord {
            k,
            x: x_k.clone(),
            u: u.clone(),
            f_value,
            merit,
            step_norm,
            inner_iterations,
            accepted,
            gap_descent,
            gap_strict,
            zeta,
            series,
        };
    Ok(match scan {
        Scan::Accepted {
            i,
            z,
            gd,
            gs,
            settled,
        } => {
            let step = (&z - x_k).norm();
            trace.final_x = z;
            (record(step, i, true, gd, gs, series), settled)
        }
        Scan::Exhausted {
            i,
            gd,
            gs,
            descent_unmet,
            strict_unmet,
            strict_checked,
        } => {
            trace.final_x = x_k.clone();
            trace.status = SolveStatus::InnerCapHit {
                k,
                iterates: (i + 2) as usize,
                descent_unmet,
                strict_unmet,
                strict_checked,
            };
            (record(0.0, i, false, gd, gs, series), false)
        }
    })
}
