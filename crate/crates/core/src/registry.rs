//! Built-in problem instances.
//!
//! | name                | g                                              | h               |
//! |---------------------|------------------------------------------------|-----------------|
//! | `paper2d`           | `max(a²+b²+ab−a, a²+b²+ab)`                    | `½(b−1)²`       |
//! | `abs1d`             | `max(x, −x)`                                   | `0`             |
//! | `rand_maxquad(n,p)` | `max_i ½xᵀQ_i x + b_iᵀx`, `Q_i = A_iᵀA_i + 1.1·I` | `½‖x − c‖²`  |
//!
//! `rand_maxquad` draws `A_i`, `b_i` from a ChaCha8 stream seeded with the
//! caller's seed, then plants a minimiser: a point `x°` where one piece wins
//! by a clear margin is drawn and `c` is chosen so that `∇h(x°) = ∇g(x°)`.
//! Since every `q_i − h` has Hessian `⪰ 0.1·I`, `f` is strongly convex and
//! `x°` is its unique minimiser.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{DcError, Result};
use crate::problem::{ConvexOracle, DcProblem, GSplit, MaxSmoothFunction, SmoothConvexPiece};
use crate::quadmax::{prox_max_quadratics, QuadPiece};
use crate::Vector;

/// Names accepted by [`registry_get`], as shown in CLI help.
pub const REGISTRY_NAMES: &[&str] = &["paper2d", "abs1d", "rand_maxquad(n,p)"];

const RAND_REGULARIZER: f64 = 1.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemName {
    Paper2d,
    Abs1d,
    RandMaxQuad { n: usize, p: usize },
}

impl ProblemName {
    /// Parses `paper2d`, `abs1d`, `rand_maxquad(n,p)` or `rand_maxquad:n:p`.
    pub fn parse(name: &str) -> Result<Self> {
        let trimmed: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        match trimmed.as_str() {
            "paper2d" => return Ok(Self::Paper2d),
            "abs1d" => return Ok(Self::Abs1d),
            _ => {}
        }
        let args = trimmed
            .strip_prefix("rand_maxquad(")
            .and_then(|s| s.strip_suffix(')'))
            .or_else(|| trimmed.strip_prefix("rand_maxquad:"))
            .ok_or_else(|| DcError::UnknownProblem(name.to_string()))?;
        let parts: Vec<&str> = args.split([',', ':']).collect();
        if parts.len() != 2 {
            return Err(DcError::InvalidArgument(format!(
                "rand_maxquad expects two arguments (n, p), got `{name}`"
            )));
        }
        let parse = |s: &str, what: &str| -> Result<usize> {
            s.parse::<usize>().ok().filter(|v| *v >= 1).ok_or_else(|| {
                DcError::InvalidArgument(format!(
                    "rand_maxquad: {what} must be a positive integer, got `{s}`"
                ))
            })
        };
        Ok(Self::RandMaxQuad {
            n: parse(parts[0], "n")?,
            p: parse(parts[1], "p")?,
        })
    }
}

/// Looks up a registry problem. `seed` only affects `rand_maxquad` (default 0).
pub fn registry_get(name: &str, seed: Option<u64>) -> Result<DcProblem> {
    match ProblemName::parse(name)? {
        ProblemName::Paper2d => Ok(paper2d()),
        ProblemName::Abs1d => Ok(abs1d()),
        ProblemName::RandMaxQuad { n, p } => rand_maxquad(n, p, seed.unwrap_or(0)),
    }
}

fn v2(a: f64, b: f64) -> Vector {
    Vector::from_column_slice(&[a, b])
}

/// `g = x_a² + x_b² + x_a x_b + max(−x_a, 0)`, `h = ½(x_b − 1)²`; minimiser `(1, −2)`, `f* = −1.5`.
pub fn paper2d() -> DcProblem {
    let quad = |x: &Vector| x[0] * x[0] + x[1] * x[1] + x[0] * x[1];
    let quad_grad = |x: &Vector| v2(2.0 * x[0] + x[1], 2.0 * x[1] + x[0]);
    let g1 = SmoothConvexPiece::new(
        move |x| quad(x) - x[0],
        move |x| v2(2.0 * x[0] + x[1] - 1.0, 2.0 * x[1] + x[0]),
    )
    .with_lipschitz(3.0);
    let g2 = SmoothConvexPiece::new(quad, quad_grad).with_lipschitz(3.0);
    let g = MaxSmoothFunction::new(2, vec![g1, g2]).expect("two pieces");
    let h =
        ConvexOracle::differentiable(2, |x| 0.5 * (x[1] - 1.0).powi(2), |x| v2(0.0, x[1] - 1.0));

    // prox of t·max(−a, 0) acts on the first coordinate only
    let split = GSplit::new(
        SmoothConvexPiece::new(quad, quad_grad).with_lipschitz(3.0),
        |x| (-x[0]).max(0.0),
        |t, v| {
            let mut out = v.clone();
            out[0] = if v[0] < -t {
                v[0] + t
            } else if v[0] <= 0.0 {
                0.0
            } else {
                v[0]
            };
            out
        },
    );
    DcProblem::new("paper2d", g, h)
        .expect("dimensions agree")
        .with_split(split)
        .with_known_optimum(v2(1.0, -2.0), -1.5)
        .and_then(|p| p.with_default_start(v2(2.5, 1.5)))
        .expect("dimensions agree")
}

/// `g = |x| = max(x, −x)`, `h ≡ 0`.
pub fn abs1d() -> DcProblem {
    let one = |s: f64| Vector::from_element(1, s);
    let g = MaxSmoothFunction::new(
        1,
        vec![
            SmoothConvexPiece::new(|x| x[0], move |_| one(1.0)).with_lipschitz(0.0),
            SmoothConvexPiece::new(|x| -x[0], move |_| one(-1.0)).with_lipschitz(0.0),
        ],
    )
    .expect("two pieces");
    let split = GSplit::new(
        SmoothConvexPiece::zero(1),
        |x| x[0].abs(),
        |t, v| Vector::from_element(1, v[0].signum() * (v[0].abs() - t).max(0.0)),
    );
    DcProblem::new("abs1d", g, ConvexOracle::zero(1))
        .expect("dimensions agree")
        .with_split(split)
        .with_known_optimum(Vector::zeros(1), 0.0)
        .and_then(|p| p.with_default_start(one(0.5)))
        .expect("dimensions agree")
}

fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Random max-of-quadratics instance, deterministic in `(n, p, seed)`.
pub fn rand_maxquad(n: usize, p: usize, seed: u64) -> Result<DcProblem> {
    if n == 0 || p == 0 {
        return Err(DcError::InvalidArgument(format!(
            "rand_maxquad needs n >= 1 and p >= 1, got n = {n}, p = {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quads: Vec<QuadPiece> = (0..p)
        .map(|_| {
            let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            QuadPiece {
                q: a.transpose() * &a + DMatrix::identity(n, n) * RAND_REGULARIZER,
                b: normal_vec(&mut rng, n),
            }
        })
        .collect();

    // plant the minimiser where one piece dominates by a clear margin
    let margin_of = |x: &Vector| -> (usize, f64) {
        let vals: Vec<f64> = quads.iter().map(|q| q.value(x)).collect();
        let top = crate::problem::argmax(&vals);
        let second = vals
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != top)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        (top, vals[top] - second)
    };
    let mut best: Option<(Vector, usize, f64)> = None;
    for _ in 0..200 {
        let cand = normal_vec(&mut rng, n);
        let (top, margin) = margin_of(&cand);
        if best.as_ref().is_none_or(|b| margin > b.2) {
            best = Some((cand, top, margin));
        }
        if margin >= 0.5 {
            break;
        }
    }
    let (x_star, top, _) = best.expect("at least one candidate");
    let grad_star = quads[top].gradient(&x_star);
    let center = &x_star - &grad_star;
    let f_star = quads[top].value(&x_star) - 0.5 * grad_star.norm_squared();
    let start = &x_star + normal_vec(&mut rng, n) * 2.0;

    let pieces: Vec<SmoothConvexPiece> = quads
        .iter()
        .map(|q| {
            let (qv, qg) = (q.clone(), q.clone());
            SmoothConvexPiece::new(move |x| qv.value(x), move |x| qg.gradient(x))
                .with_lipschitz(q.lipschitz())
        })
        .collect();
    let g = MaxSmoothFunction::new(n, pieces)?;
    let (c1, c2) = (center.clone(), center);
    let h =
        ConvexOracle::differentiable(n, move |x| 0.5 * (x - &c1).norm_squared(), move |x| x - &c2);

    let (qs_val, qs_prox) = (quads.clone(), quads);
    let split = GSplit::new(
        SmoothConvexPiece::zero(n),
        move |x| {
            qs_val
                .iter()
                .map(|q| q.value(x))
                .fold(f64::NEG_INFINITY, f64::max)
        },
        move |t, v| prox_max_quadratics(&qs_prox, t, v),
    );
    DcProblem::new(format!("rand_maxquad({n},{p})"), g, h)?
        .with_split(split)
        .with_known_optimum(x_star, f_star)?
        .with_default_start(start)
}
