//! The DC objective `f = g - h`.
//!
//! `g` is a pointwise maximum of smooth convex pieces, `h` is any finite convex
//! function exposed through a value oracle and an ε-subgradient oracle. The
//! domain is all of ℝⁿ.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{DcError, Result};

/// Dense real vector. Every operation that accepts or returns one checks that
/// its entries are finite.
pub type Vector = DVector<f64>;

pub type ValueFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type EpsSubgradientFn = Arc<dyn Fn(&Vector, f64) -> Vector + Send + Sync>;
pub type ProxFn = Arc<dyn Fn(f64, &Vector) -> Vector + Send + Sync>;

pub(crate) fn ensure_dim(expected: usize, x: &Vector) -> Result<()> {
    if x.len() != expected {
        return Err(DcError::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

pub(crate) fn ensure_finite_vec(what: &str, at: &Vector, v: &Vector) -> Result<()> {
    if v.iter().all(|e| e.is_finite()) {
        Ok(())
    } else {
        Err(DcError::fault(what, at))
    }
}

pub(crate) fn ensure_finite(what: &str, at: &Vector, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DcError::fault(what, at))
    }
}

/// A differentiable convex function with an optional Lipschitz bound on its gradient.
#[derive(Clone)]
pub struct SmoothConvexPiece {
    value: ValueFn,
    gradient: GradientFn,
    lipschitz: Option<f64>,
}

impl SmoothConvexPiece {
    pub fn new(
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            lipschitz: None,
        }
    }

    /// Attaches a Lipschitz constant for the gradient (used for ISTA step sizing).
    pub fn with_lipschitz(mut self, l: f64) -> Self {
        assert!(
            l.is_finite() && l >= 0.0,
            "lipschitz bound must be finite and >= 0"
        );
        self.lipschitz = Some(l);
        self
    }

    /// The identically-zero piece on ℝⁿ.
    pub fn zero(dim: usize) -> Self {
        Self::new(|_| 0.0, move |_| Vector::zeros(dim)).with_lipschitz(0.0)
    }

    pub fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        (self.gradient)(x)
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}

impl fmt::Debug for SmoothConvexPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothConvexPiece")
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

/// `g(x) = max_i g_i(x)` over a nonempty list of smooth convex pieces.
#[derive(Clone, Debug)]
pub struct MaxSmoothFunction {
    dim: usize,
    pieces: Vec<SmoothConvexPiece>,
}

impl MaxSmoothFunction {
    pub fn new(dim: usize, pieces: Vec<SmoothConvexPiece>) -> Result<Self> {
        if dim == 0 {
            return Err(DcError::InvalidArgument(
                "dimension must be positive".into(),
            ));
        }
        if pieces.is_empty() {
            return Err(DcError::InvalidArgument(
                "a max-of-smooth function needs at least one piece".into(),
            ));
        }
        Ok(Self { dim, pieces })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[SmoothConvexPiece] {
        &self.pieces
    }

    pub fn num_pieces(&self) -> usize {
        self.pieces.len()
    }

    /// Values of every piece at `x`, checked for finiteness.
    pub fn piece_values(&self, x: &Vector) -> Result<Vec<f64>> {
        ensure_dim(self.dim, x)?;
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| ensure_finite(&format!("g_{} value", i + 1), x, p.value(x)))
            .collect()
    }

    /// `max_i g_i(x)`.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        let vals = self.piece_values(x)?;
        Ok(vals.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn piece_gradient(&self, i: usize, x: &Vector) -> Result<Vector> {
        ensure_dim(self.dim, x)?;
        let grad = self.pieces[i].gradient(x);
        ensure_dim(self.dim, &grad)?;
        ensure_finite_vec(&format!("g_{} gradient", i + 1), x, &grad)?;
        Ok(grad)
    }

    /// Gradient of the first piece attaining the maximum; an element of `∂g(x)`.
    pub fn subgradient(&self, x: &Vector) -> Result<Vector> {
        let vals = self.piece_values(x)?;
        let best = argmax(&vals);
        self.piece_gradient(best, x)
    }

    /// Largest gradient Lipschitz bound among the pieces, if all pieces carry one.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        self.pieces
            .iter()
            .map(|p| p.lipschitz())
            .try_fold(0.0_f64, |acc, l| l.map(|l| acc.max(l)))
    }
}

pub(crate) fn argmax(vals: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[best] {
            best = i;
        }
    }
    best
}

/// A finite convex function with a value oracle and an ε-subgradient oracle.
///
/// `eps_subgradient(x, ε)` must return one element of `∂_ε h(x)`. For a
/// differentiable `h` the gradient is a valid answer for every `ε ≥ 0`.
#[derive(Clone)]
pub struct ConvexOracle {
    dim: usize,
    value: ValueFn,
    eps_subgradient: EpsSubgradientFn,
}

impl ConvexOracle {
    pub fn new(
        dim: usize,
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        eps_subgradient: impl Fn(&Vector, f64) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            value: Arc::new(value),
            eps_subgradient: Arc::new(eps_subgradient),
        }
    }

    pub fn differentiable(
        dim: usize,
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self::new(dim, value, move |x, _| gradient(x))
    }

    pub fn zero(dim: usize) -> Self {
        Self::differentiable(dim, |_| 0.0, move |_| Vector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        ensure_dim(self.dim, x)?;
        ensure_finite("h value", x, (self.value)(x))
    }

    pub fn eps_subgradient(&self, x: &Vector, eps: f64) -> Result<Vector> {
        ensure_dim(self.dim, x)?;
        let s = (self.eps_subgradient)(x, eps);
        ensure_dim(self.dim, &s)?;
        ensure_finite_vec("h eps-subgradient", x, &s)?;
        Ok(s)
    }
}

impl fmt::Debug for ConvexOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexOracle")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

/// Decomposition `g = smooth + nonsmooth` with a closed-form prox for the
/// nonsmooth part, used by proximal-gradient inner solvers.
#[derive(Clone)]
pub struct GSplit {
    pub smooth: SmoothConvexPiece,
    pub nonsmooth: ValueFn,
    /// `prox(τ, v) = argmin_z nonsmooth(z) + ‖z − v‖² / (2τ)`.
    pub prox: ProxFn,
}

impl GSplit {
    /// Panics if `smooth` has no Lipschitz bound: ISTA step sizing needs one.
    pub fn new(
        smooth: SmoothConvexPiece,
        nonsmooth: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        prox: impl Fn(f64, &Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        assert!(
            smooth.lipschitz().is_some(),
            "the smooth part of a split needs a Lipschitz bound"
        );
        Self {
            smooth,
            nonsmooth: Arc::new(nonsmooth),
            prox: Arc::new(prox),
        }
    }

    pub fn smooth_lipschitz(&self) -> f64 {
        self.smooth.lipschitz().unwrap_or(0.0)
    }
}

impl fmt::Debug for GSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GSplit")
            .field("smooth", &self.smooth)
            .finish_non_exhaustive()
    }
}

/// `minimize g(x) − h(x)` over ℝⁿ.
#[derive(Clone, Debug)]
pub struct DcProblem {
    name: String,
    g: MaxSmoothFunction,
    h: ConvexOracle,
    split: Option<GSplit>,
    known_optimum: Option<(Vector, f64)>,
    default_start: Vector,
}

impl DcProblem {
    pub fn new(name: impl Into<String>, g: MaxSmoothFunction, h: ConvexOracle) -> Result<Self> {
        if g.dim() != h.dim() {
            return Err(DcError::DimensionMismatch {
                expected: g.dim(),
                got: h.dim(),
            });
        }
        let dim = g.dim();
        Ok(Self {
            name: name.into(),
            g,
            h,
            split: None,
            known_optimum: None,
            default_start: Vector::zeros(dim),
        })
    }

    pub fn with_split(mut self, split: GSplit) -> Self {
        self.split = Some(split);
        self
    }

    pub fn with_known_optimum(mut self, x: Vector, f: f64) -> Result<Self> {
        ensure_dim(self.dim(), &x)?;
        self.known_optimum = Some((x, f));
        Ok(self)
    }

    pub fn with_default_start(mut self, x: Vector) -> Result<Self> {
        ensure_dim(self.dim(), &x)?;
        self.default_start = x;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn g(&self) -> &MaxSmoothFunction {
        &self.g
    }

    pub fn h(&self) -> &ConvexOracle {
        &self.h
    }

    pub fn split(&self) -> Option<&GSplit> {
        self.split.as_ref()
    }

    pub fn known_optimum(&self) -> Option<(&Vector, f64)> {
        self.known_optimum.as_ref().map(|(x, f)| (x, *f))
    }

    pub fn default_start(&self) -> &Vector {
        &self.default_start
    }
}

/// `f(x) = g(x) − h(x)`.
pub fn dc_value(problem: &DcProblem, x: &Vector) -> Result<f64> {
    ensure_dim(problem.dim(), x)?;
    let g = problem.g().value(x)?;
    let h = problem.h().value(x)?;
    ensure_finite("f value", x, g - h)
}
