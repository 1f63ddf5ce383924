//! ε-strict subdifferentials of max-of-smooth functions, polytope projection,
//! and the closed-form ε-subdifferential of `|·|`.
//!
//! For `g = max_i g_i` the ε-strict subdifferential at `x` is the polytope
//! `conv{∇g_i(x) : g_i(x) ≥ g(x) − ε}`. It satisfies `∂g ⊂ ∂̂_ε g ⊂ ∂_ε g`, and
//! distances to it reduce to a minimum-norm-point query.

mod wolfe;

pub use wolfe::{min_norm_point, MinNormPoint};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{DcError, Result};
use crate::problem::{ensure_dim, MaxSmoothFunction};
use crate::Vector;

/// Relative slack added to the active-set comparison, scaled by `max_i |g_i(x)|`.
pub const ACTIVE_SLACK: f64 = 1e-12;

/// Convex hull of a nonempty list of same-dimension finite points.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vector>,
}

impl Polytope {
    pub fn new(vertices: Vec<Vector>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| DcError::InvalidArgument("polytope needs at least one vertex".into()))?;
        let dim = first.len();
        for v in &vertices {
            ensure_dim(dim, v)?;
            if !v.iter().all(|e| e.is_finite()) {
                return Err(DcError::InvalidArgument(format!(
                    "polytope vertex {:?} is not finite",
                    v.as_slice()
                )));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    /// The polytope translated by `−u`.
    pub fn shifted(&self, u: &Vector) -> Result<Self> {
        ensure_dim(self.dim(), u)?;
        Self::new(self.vertices.iter().map(|v| v - u).collect())
    }

    /// Euclidean distance from `u` to the polytope.
    pub fn distance(&self, u: &Vector) -> Result<f64> {
        Ok(min_norm_point(&self.shifted(u)?).norm)
    }
}

/// Indices (0-based) of the pieces within `ε` of the maximum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveSet {
    indices: Vec<usize>,
}

impl ActiveSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }

    pub fn is_subset_of(&self, other: &ActiveSet) -> bool {
        self.indices.iter().all(|i| other.contains(*i))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(())
    } else {
        Err(DcError::InvalidArgument(format!(
            "ε must be finite and >= 0, got {eps}"
        )))
    }
}

/// `{ i : g_i(x) ≥ g(x) − ε − slack }`, always containing an argmax.
pub fn active_set(g: &MaxSmoothFunction, x: &Vector, eps: f64) -> Result<ActiveSet> {
    check_eps(eps)?;
    let vals = g.piece_values(x)?;
    let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let threshold = top - eps - ACTIVE_SLACK * scale;
    let indices = vals
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= threshold)
        .map(|(i, _)| i)
        .collect();
    Ok(ActiveSet { indices })
}

/// `conv{∇g_i(x) : i ∈ active_set(g, x, ε)}`. Duplicate gradients are kept.
pub fn strict_subdiff(g: &MaxSmoothFunction, x: &Vector, eps: f64) -> Result<Polytope> {
    let act = active_set(g, x, eps)?;
    let vertices = act
        .indices()
        .iter()
        .map(|&i| g.piece_gradient(i, x))
        .collect::<Result<Vec<_>>>()?;
    Polytope::new(vertices)
}

/// `dist(u, ∂̂_ε g(x))`.
pub fn dist_to_strict_subdiff(
    g: &MaxSmoothFunction,
    x: &Vector,
    eps: f64,
    u: &Vector,
) -> Result<f64> {
    ensure_dim(g.dim(), u)?;
    strict_subdiff(g, x, eps)?.distance(u)
}

/// Closed real interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "interval bounds out of order: [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn contains(&self, s: f64) -> bool {
        self.lo <= s && s <= self.hi
    }

    pub fn distance(&self, s: f64) -> f64 {
        if s < self.lo {
            self.lo - s
        } else if s > self.hi {
            s - self.hi
        } else {
            0.0
        }
    }
}

/// `∂_ε|·|(z)` for `ε > 0`.
///
/// For `z < −ε/2` the interval is `[−1, −1 − ε/z]`; this is the mirror image of
/// the `z > ε/2` branch and is the set cut out by the defining inequality.
pub fn abs_eps_subdiff(z: f64, eps: f64) -> Result<Interval> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(DcError::InvalidArgument(format!(
            "ε must be > 0, got {eps}"
        )));
    }
    if !z.is_finite() {
        return Err(DcError::InvalidArgument(format!(
            "z must be finite, got {z}"
        )));
    }
    Ok(if z > eps / 2.0 {
        Interval::new(1.0 - eps / z, 1.0)
    } else if z < -eps / 2.0 {
        Interval::new(-1.0, -1.0 - eps / z)
    } else {
        Interval::new(-1.0, 1.0)
    })
}

/// `dist(u, ∂_ε|·|(z))`; `ε = 0` gives the exact subdifferential.
pub fn abs_eps_distance(z: f64, eps: f64, u: f64) -> Result<f64> {
    if eps == 0.0 {
        let set = if z > 0.0 {
            Interval::new(1.0, 1.0)
        } else if z < 0.0 {
            Interval::new(-1.0, -1.0)
        } else {
            Interval::new(-1.0, 1.0)
        };
        return Ok(set.distance(u));
    }
    Ok(abs_eps_subdiff(z, eps)?.distance(u))
}

const PROBE_SEED: u64 = 0x5eed_d15c;

/// Deterministic probe points around `x`: the origin, axis and `s`-direction
/// ladders over radii `10^-6 … 10^6`, then seeded Gaussian points at random scales.
fn probe_points(x: &Vector, s: &Vector, count: usize) -> Vec<Vector> {
    let n = x.len();
    let mut out = Vec::with_capacity(count);
    out.push(Vector::zeros(n));
    let s_norm = s.norm();
    let radii: Vec<f64> = (-12..=12).map(|k| 10f64.powf(k as f64 / 2.0)).collect();
    for &r in &radii {
        for j in 0..n {
            let mut e = Vector::zeros(n);
            e[j] = r;
            out.push(x + &e);
            out.push(x - &e);
        }
        if s_norm > 0.0 {
            out.push(x + s * (r / s_norm));
            out.push(x - s * (r / s_norm));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    while out.len() < count {
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let d = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        out.push(x + d * scale);
    }
    out.truncate(count);
    out
}

/// Sampled necessary condition for `s ∈ ∂_ε φ(x)`:
/// `φ(y) ≥ φ(x) + ⟨s, y − x⟩ − ε` at `sample_count` deterministic probes.
///
/// A relative tolerance of `1e-10` absorbs rounding. Returns `false` on any
/// non-finite evaluation.
pub fn check_eps_subgradient(
    phi: &dyn Fn(&Vector) -> f64,
    x: &Vector,
    s: &Vector,
    eps: f64,
    sample_count: usize,
) -> bool {
    assert!(sample_count >= 1, "need at least one probe");
    if x.len() != s.len() || !(eps >= 0.0) {
        return false;
    }
    let fx = phi(x);
    if !fx.is_finite() {
        return false;
    }
    probe_points(x, s, sample_count).iter().all(|y| {
        let fy = phi(y);
        let lin = s.dot(&(y - x));
        let tol = 1e-10 * (1.0 + fy.abs() + fx.abs() + lin.abs());
        fy.is_finite() && fy >= fx + lin - eps - tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{abs1d, paper2d};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn active_sets_on_registry_examples() {
        let p = paper2d();
        assert_eq!(
            active_set(p.g(), &v(&[0.0, 0.0]), 0.5).unwrap().indices(),
            &[0, 1]
        );
        // g1(1,0) = 0, g2(1,0) = 1: 0 ≥ 0.5 fails
        assert_eq!(
            active_set(p.g(), &v(&[1.0, 0.0]), 0.5).unwrap().indices(),
            &[1]
        );
        let a = abs1d();
        assert_eq!(active_set(a.g(), &v(&[0.25]), 0.0).unwrap().indices(), &[0]);
        assert!(active_set(a.g(), &v(&[0.25]), -1.0).is_err());
    }

    #[test]
    fn tiny_positive_point_keeps_a_single_active_piece() {
        let a = abs1d();
        for z in [1e-13, 1e-200, 5e-324] {
            assert_eq!(
                active_set(a.g(), &v(&[z]), 0.0).unwrap().indices(),
                &[0],
                "z = {z}"
            );
        }
        assert_eq!(
            active_set(a.g(), &v(&[0.0]), 0.0).unwrap().indices(),
            &[0, 1]
        );
    }

    #[test]
    fn strict_subdiff_vertices() {
        let p = paper2d();
        let poly = strict_subdiff(p.g(), &v(&[0.0, 0.0]), 0.5).unwrap();
        assert_eq!(poly.vertices(), &[v(&[-1.0, 0.0]), v(&[0.0, 0.0])]);
        let poly = strict_subdiff(p.g(), &v(&[1.0, 0.0]), 0.5).unwrap();
        assert_eq!(poly.vertices(), &[v(&[2.0, 1.0])]);
        let poly = strict_subdiff(abs1d().g(), &v(&[0.25]), 0.0).unwrap();
        assert_eq!(poly.vertices(), &[v(&[1.0])]);
    }

    #[test]
    fn distances_to_strict_subdiff() {
        let a = abs1d();
        assert_eq!(
            dist_to_strict_subdiff(a.g(), &v(&[0.25]), 0.0, &v(&[0.0])).unwrap(),
            1.0
        );
        assert_eq!(
            dist_to_strict_subdiff(a.g(), &v(&[0.25]), 1.0, &v(&[0.0])).unwrap(),
            0.0
        );
        assert!(abs_eps_subdiff(0.25, 1.0).unwrap().contains(0.0));
        let p = paper2d();
        assert_eq!(
            dist_to_strict_subdiff(p.g(), &v(&[0.0, 0.0]), 0.5, &v(&[0.0, 0.0])).unwrap(),
            0.0
        );
    }

    #[test]
    fn abs_eps_subdiff_branches() {
        assert_eq!(abs_eps_subdiff(0.0, 0.3).unwrap(), Interval::new(-1.0, 1.0));
        assert_eq!(abs_eps_subdiff(1.0, 1.0).unwrap(), Interval::new(0.0, 1.0));
        assert_eq!(
            abs_eps_subdiff(-2.0, 1.0).unwrap(),
            Interval::new(-1.0, -0.5)
        );
        assert!(abs_eps_subdiff(1.0, 0.0).is_err());
        assert!(abs_eps_subdiff(1.0, -1.0).is_err());
    }

    #[test]
    fn negative_branch_matches_defining_inequality_on_dense_grid() {
        // |y| ≥ |z| + s(y − z) − ε for all y on a dense grid, for s at and just past the endpoints
        let (z, eps) = (-2.0_f64, 1.0_f64);
        let holds = |s: f64| {
            (-400_000..=400_000).all(|k| {
                let y = k as f64 * 1e-2;
                y.abs() >= z.abs() + s * (y - z) - eps - 1e-12
            })
        };
        assert!(holds(-1.0) && holds(-0.5) && holds(-0.75));
        assert!(!holds(-0.5 + 1e-3));
        assert!(!holds(-1.0 - 1e-3));
    }

    #[test]
    fn eps_subgradient_checks_for_abs() {
        let abs = |y: &Vector| y[0].abs();
        assert!(check_eps_subgradient(
            &abs,
            &v(&[0.0]),
            &v(&[0.5]),
            0.0,
            200
        ));
        assert!(!check_eps_subgradient(
            &abs,
            &v(&[1.0]),
            &v(&[0.0]),
            0.5,
            200
        ));
        assert!(check_eps_subgradient(
            &abs,
            &v(&[1.0]),
            &v(&[0.0]),
            1.0,
            200
        ));
    }

    #[test]
    fn polytope_rejects_bad_input() {
        assert!(Polytope::new(vec![]).is_err());
        assert!(Polytope::new(vec![v(&[1.0]), v(&[1.0, 2.0])]).is_err());
        assert!(Polytope::new(vec![v(&[f64::NAN])]).is_err());
    }
}
