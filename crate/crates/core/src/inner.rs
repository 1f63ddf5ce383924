//! Proximal subproblem model and the inner iterative solvers.
//!
//! At outer iterate `x_k` with linearisation `u_k` the subproblem is
//!
//! ```text
//! f̃_k(z) = g(z) − ⟨u_k, z − x_k⟩ + ‖z − x_k‖² / (2λ)
//! ```
//!
//! which is `1/λ`-strongly convex. Every solver yields `z₋₁ = start` first and
//! then its own iterates `z₀, z₁, …`, which must converge to the unique minimiser.

use std::sync::Arc;

use crate::error::{DcError, Result};
use crate::problem::{ensure_dim, ensure_finite, ensure_finite_vec, DcProblem, GSplit};
use crate::Vector;

/// The strongly convex proximal subproblem at `(x_k, u_k, λ)`.
#[derive(Clone, Debug)]
pub struct Subproblem<'a> {
    problem: &'a DcProblem,
    x_k: Vector,
    u_k: Vector,
    lambda: f64,
}

/// Builds `f̃_k`. A smooth/proximable split is available whenever the problem carries one.
pub fn build_subproblem(
    problem: &DcProblem,
    x_k: Vector,
    u_k: Vector,
    lambda: f64,
) -> Result<Subproblem<'_>> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(DcError::InvalidArgument(format!(
            "λ must be > 0, got {lambda}"
        )));
    }
    ensure_dim(problem.dim(), &x_k)?;
    ensure_dim(problem.dim(), &u_k)?;
    ensure_finite_vec("x_k", &x_k, &x_k)?;
    ensure_finite_vec("u_k", &x_k, &u_k)?;
    Ok(Subproblem {
        problem,
        x_k,
        u_k,
        lambda,
    })
}

impl<'a> Subproblem<'a> {
    pub fn problem(&self) -> &'a DcProblem {
        self.problem
    }

    pub fn x_k(&self) -> &Vector {
        &self.x_k
    }

    pub fn u_k(&self) -> &Vector {
        &self.u_k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Modulus of strong convexity, `1/λ`.
    pub fn strong_convexity(&self) -> f64 {
        1.0 / self.lambda
    }

    /// The part of `f̃_k` that does not involve `g`.
    fn model_terms(&self, z: &Vector) -> f64 {
        let d = z - &self.x_k;
        -self.u_k.dot(&d) + d.norm_squared() / (2.0 * self.lambda)
    }

    pub fn value(&self, z: &Vector) -> Result<f64> {
        let g = self.problem.g().value(z)?;
        ensure_finite("subproblem value", z, g + self.model_terms(z))
    }

    /// A subgradient of `f̃_k`: max-piece gradient − `u_k` + `(z − x_k)/λ`.
    pub fn subgradient(&self, z: &Vector) -> Result<Vector> {
        let s = self.problem.g().subgradient(z)?;
        Ok(s - &self.u_k + (z - &self.x_k) / self.lambda)
    }

    fn split(&self) -> Result<&'a GSplit> {
        self.problem
            .split()
            .ok_or_else(|| DcError::MissingSplit(self.problem.name().to_string()))
    }

    pub fn has_split(&self) -> bool {
        self.problem.split().is_some()
    }

    /// Smooth part: smooth share of `g` plus the linear and proximal terms.
    pub fn smooth_value(&self, z: &Vector) -> Result<f64> {
        let s = self.split()?;
        ensure_finite(
            "smooth part value",
            z,
            s.smooth.value(z) + self.model_terms(z),
        )
    }

    pub fn smooth_gradient(&self, z: &Vector) -> Result<Vector> {
        let s = self.split()?;
        let grad = s.smooth.gradient(z) - &self.u_k + (z - &self.x_k) / self.lambda;
        ensure_finite_vec("smooth part gradient", z, &grad)?;
        Ok(grad)
    }

    /// Lipschitz constant of the smooth part's gradient, `L + 1/λ`.
    pub fn smooth_lipschitz(&self) -> Result<f64> {
        Ok(self.split()?.smooth_lipschitz() + 1.0 / self.lambda)
    }

    pub fn nonsmooth_value(&self, z: &Vector) -> Result<f64> {
        let s = self.split()?;
        ensure_finite("nonsmooth part value", z, (s.nonsmooth)(z))
    }

    /// `argmin_y nonsmooth(y) + ‖y − v‖²/(2τ)`.
    pub fn prox_nonsmooth(&self, tau: f64, v: &Vector) -> Result<Vector> {
        let s = self.split()?;
        let out = (s.prox)(tau, v);
        ensure_dim(self.problem.dim(), &out)?;
        ensure_finite_vec("prox", v, &out)?;
        Ok(out)
    }
}

pub type InnerIter<'s> = Box<dyn Iterator<Item = Result<Vector>> + 's>;

/// An iterative method for the proximal subproblem.
///
/// `iterates` yields `start` first (the `z₋₁` slot) and then `z₀, z₁, …`.
pub trait InnerSolver: Send + Sync {
    fn name(&self) -> &'static str;

    fn iterates<'s>(&'s self, sub: &'s Subproblem<'s>, start: Vector) -> Result<InnerIter<'s>>;

    /// Configuration problems worth recording in a trace (never fatal).
    fn warnings(&self, _sub: &Subproblem<'_>) -> Vec<String> {
        Vec::new()
    }
}

/// ISTA step-size rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepPolicy {
    /// `τ = 1/(L + 1/λ)`.
    Auto,
    Fixed(f64),
}

/// Proximal gradient: `z_i = prox_{τ·nonsmooth}(z_{i−1} − τ ∇smooth(z_{i−1}))`.
#[derive(Clone, Debug)]
pub struct Ista {
    step: StepPolicy,
}

pub fn ista_solver(step: StepPolicy) -> Ista {
    Ista { step }
}

impl Ista {
    pub fn step_size(&self, sub: &Subproblem<'_>) -> Result<f64> {
        let l_total = sub.smooth_lipschitz()?;
        match self.step {
            StepPolicy::Auto => Ok(1.0 / l_total),
            StepPolicy::Fixed(tau) if tau.is_finite() && tau > 0.0 => Ok(tau),
            StepPolicy::Fixed(tau) => Err(DcError::InvalidArgument(format!(
                "ISTA step must be > 0, got {tau}"
            ))),
        }
    }
}

impl InnerSolver for Ista {
    fn name(&self) -> &'static str {
        "ista"
    }

    fn iterates<'s>(&'s self, sub: &'s Subproblem<'s>, start: Vector) -> Result<InnerIter<'s>> {
        let tau = self.step_size(sub)?;
        let mut z = start;
        let mut first = true;
        Ok(Box::new(std::iter::from_fn(move || {
            if first {
                first = false;
                return Some(Ok(z.clone()));
            }
            let next = sub
                .smooth_gradient(&z)
                .and_then(|grad| sub.prox_nonsmooth(tau, &(&z - grad * tau)));
            match next {
                Ok(n) => {
                    z = n;
                    Some(Ok(z.clone()))
                }
                Err(e) => Some(Err(e)),
            }
        })))
    }

    fn warnings(&self, sub: &Subproblem<'_>) -> Vec<String> {
        match (self.step, sub.smooth_lipschitz()) {
            (StepPolicy::Fixed(tau), Ok(l)) if tau * l > 1.0 => vec![format!(
                "ISTA step τ = {tau} exceeds 1/L = {} (L = {l}); monotone descent is not guaranteed",
                1.0 / l
            )],
            _ => Vec::new(),
        }
    }
}

/// Subgradient descent with steps `t_i = 2/(μ(i + c))`, yielding the best iterate so far.
///
/// `c = 2` is the textbook strongly convex rule. Larger offsets avoid the
/// initial overshoot when `L/μ` is large.
#[derive(Clone, Debug)]
pub struct SubgradientSolver {
    offset: Offset,
}

#[derive(Clone, Copy, Debug)]
enum Offset {
    Fixed(f64),
    /// `c = max(2, 2·(L_g + 1/λ)/μ)`, using the problem's piece Lipschitz bounds.
    Lipschitz,
}

/// Relative roundoff within which two subproblem values are treated as equal.
const VALUE_ROUNDING: f64 = 4.0 * f64::EPSILON;

pub fn subgradient_solver(step_c: f64) -> Result<SubgradientSolver> {
    if !(step_c.is_finite() && step_c > 0.0) {
        return Err(DcError::InvalidArgument(format!(
            "subgradient step offset must be > 0, got {step_c}"
        )));
    }
    Ok(SubgradientSolver {
        offset: Offset::Fixed(step_c),
    })
}

impl SubgradientSolver {
    pub fn lipschitz_scaled() -> Self {
        Self {
            offset: Offset::Lipschitz,
        }
    }

    fn offset_for(&self, sub: &Subproblem<'_>) -> f64 {
        match self.offset {
            Offset::Fixed(c) => c,
            Offset::Lipschitz => {
                let mu = sub.strong_convexity();
                match sub.problem().g().lipschitz_bound() {
                    Some(l) => (2.0 * (l + mu) / mu).max(2.0),
                    None => 2.0,
                }
            }
        }
    }
}

impl InnerSolver for SubgradientSolver {
    fn name(&self) -> &'static str {
        "subgradient"
    }

    fn iterates<'s>(&'s self, sub: &'s Subproblem<'s>, start: Vector) -> Result<InnerIter<'s>> {
        let mu = sub.strong_convexity();
        if !(mu > 0.0) {
            return Err(DcError::InvalidArgument(
                "subgradient solver needs μ > 0".into(),
            ));
        }
        let c = self.offset_for(sub);
        let best_val = sub.value(&start)?;
        let mut state = (start.clone(), start, best_val);
        let mut i: usize = 0;
        let mut first = true;
        Ok(Box::new(std::iter::from_fn(move || {
            if first {
                first = false;
                return Some(Ok(state.1.clone()));
            }
            let (cur, best, best_val) = &mut state;
            let step = 2.0 / (mu * (i as f64 + c));
            i += 1;
            let res = sub.subgradient(cur).and_then(|s| {
                cur.axpy(-step, &s, 1.0);
                sub.value(cur)
            });
            match res {
                Ok(val) => {
                    // Once improvements fall below roundoff of the value, the value can no
                    // longer rank iterates; the later (closer) iterate is kept.
                    if val <= *best_val + VALUE_ROUNDING * best_val.abs() {
                        *best_val = val;
                        best.copy_from(cur);
                    }
                    Some(Ok(best.clone()))
                }
                Err(e) => Some(Err(e)),
            }
        })))
    }
}

pub type SequenceRule = Arc<dyn Fn(&Vector, usize) -> Vector + Send + Sync>;

/// Replays a prescribed sequence `z_i = rule(x_k, i)`.
///
/// Only meaningful when the rule's limit is the subproblem minimiser.
#[derive(Clone)]
pub struct ScriptedSolver {
    rule: SequenceRule,
}

pub fn scripted_solver(
    rule: impl Fn(&Vector, usize) -> Vector + Send + Sync + 'static,
) -> ScriptedSolver {
    ScriptedSolver {
        rule: Arc::new(rule),
    }
}

/// Smallest positive double.
const TINY: f64 = 5e-324;

/// `x · 2^{−i}`, entrywise, saturating at the smallest subnormal so that a
/// nonzero entry never rounds to zero.
pub fn halving_term(x: f64, i: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let z = x * 0.5f64.powi(i.min(2000) as i32);
    if z == 0.0 {
        TINY.copysign(x)
    } else {
        z
    }
}

impl ScriptedSolver {
    /// `z_i = x_k / 2^i`.
    pub fn halving() -> Self {
        scripted_solver(|x, i| x.map(|e| halving_term(e, i)))
    }

    /// `z_i = x_k`.
    pub fn constant() -> Self {
        scripted_solver(|x, _| x.clone())
    }
}

impl std::fmt::Debug for ScriptedSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ScriptedSolver")
    }
}

impl InnerSolver for ScriptedSolver {
    fn name(&self) -> &'static str {
        "scripted"
    }

    fn iterates<'s>(&'s self, sub: &'s Subproblem<'s>, start: Vector) -> Result<InnerIter<'s>> {
        let x_k = sub.x_k().clone();
        let rule = Arc::clone(&self.rule);
        Ok(Box::new(
            std::iter::once(Ok(start)).chain((0..).map(move |i| Ok(rule(&x_k, i)))),
        ))
    }
}
