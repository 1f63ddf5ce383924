//! Wolfe's minimum-norm-point algorithm over the convex hull of finitely many points.
//!
//! Maintains a corral `S` of affinely independent vertices and a point `x` in
//! `conv(S)` with positive weights. Major cycles add the vertex minimising
//! `⟨x, v⟩`; minor cycles move toward the affine minimiser of `S`, dropping
//! vertices whose weight hits zero.

use nalgebra::{DMatrix, DVector};

use super::Polytope;
use crate::Vector;

/// Relative tolerance of the major-cycle stopping test.
const STOP_TOL: f64 = 1e-12;
/// Squared pivot threshold (relative) below which a corral is treated as affinely dependent.
const DEPENDENCE_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct MinNormPoint {
    pub point: Vector,
    /// Convex weights, one per polytope vertex (zero outside the final corral).
    pub weights: Vec<f64>,
    pub norm: f64,
}

/// Minimiser of `‖v_0 + Σ β_i (v_i − v_0)‖` over the affine hull; `None` when dependent.
fn affine_minimizer(vertices: &[Vector], corral: &[usize]) -> Option<Vec<f64>> {
    let k = corral.len();
    if k == 1 {
        return Some(vec![1.0]);
    }
    let base = &vertices[corral[0]];
    let n = base.len();
    let mut d = DMatrix::<f64>::zeros(n, k - 1);
    for (col, &i) in corral[1..].iter().enumerate() {
        d.set_column(col, &(&vertices[i] - base));
    }
    let gram = d.transpose() * &d;
    let chol = gram.clone().cholesky()?;
    let l = chol.l();
    for i in 0..k - 1 {
        if l[(i, i)] * l[(i, i)] <= DEPENDENCE_TOL * gram[(i, i)].max(f64::MIN_POSITIVE) {
            return None;
        }
    }
    let rhs: DVector<f64> = -(d.transpose() * base);
    let beta = chol.solve(&rhs);
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter().copied());
    Some(alpha)
}

fn combine(vertices: &[Vector], corral: &[usize], weights: &[f64]) -> Vector {
    let mut x = Vector::zeros(vertices[0].len());
    for (&i, &w) in corral.iter().zip(weights) {
        x.axpy(w, &vertices[i], 1.0);
    }
    x
}

/// Point of `conv(P)` closest to the origin, with convex weights certifying membership.
///
/// Deterministic for a fixed vertex order: ties are broken toward the lowest index.
pub fn min_norm_point(poly: &Polytope) -> MinNormPoint {
    let vs = poly.vertices();
    let m = vs.len();
    let max_sq = vs.iter().map(|v| v.norm_squared()).fold(0.0_f64, f64::max);
    let max_norm = max_sq.sqrt();

    let start = (0..m)
        .min_by(|&a, &b| {
            vs[a]
                .norm_squared()
                .total_cmp(&vs[b].norm_squared())
                .then(a.cmp(&b))
        })
        .expect("polytope is nonempty");
    let mut corral = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = vs[start].clone();

    let max_major = 50 * m + 50;
    for _ in 0..max_major {
        let xx = x.norm_squared();
        let (j, best) =
            (0..m)
                .map(|i| (i, x.dot(&vs[i])))
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                );
        if xx - best <= STOP_TOL * (1.0 + x.norm() * max_norm) || corral.contains(&j) {
            break;
        }
        corral.push(j);
        weights.push(0.0_f64);

        // minor cycles
        for _ in 0..=corral.len() + m {
            match affine_minimizer(vs, &corral) {
                None => {
                    // drop the oldest-smallest vertex other than the one just added
                    let newest = corral.len() - 1;
                    let drop = (0..newest)
                        .min_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)))
                        .unwrap_or(0);
                    corral.remove(drop);
                    weights.remove(drop);
                    let total: f64 = weights.iter().sum();
                    if total > 0.0 {
                        weights.iter_mut().for_each(|w| *w /= total);
                    } else {
                        let k = weights.len() as f64;
                        weights.iter_mut().for_each(|w| *w = 1.0 / k);
                    }
                    x = combine(vs, &corral, &weights);
                }
                Some(alpha) => {
                    if alpha.iter().all(|&a| a > 0.0) {
                        weights = alpha;
                        x = combine(vs, &corral, &weights);
                        break;
                    }
                    // largest step from weights toward alpha that keeps weights nonnegative
                    let mut theta = f64::INFINITY;
                    let mut blocking = None;
                    for (i, (&w, &a)) in weights.iter().zip(&alpha).enumerate() {
                        if a <= 0.0 {
                            let t = if w - a > 0.0 { w / (w - a) } else { 0.0 };
                            if t < theta {
                                theta = t;
                                blocking = Some(i);
                            }
                        }
                    }
                    let theta = theta.min(1.0);
                    for (w, &a) in weights.iter_mut().zip(&alpha) {
                        *w = (1.0 - theta) * *w + theta * a;
                    }
                    if let Some(b) = blocking {
                        weights[b] = 0.0;
                    }
                    let mut idx = 0;
                    while idx < corral.len() {
                        if weights[idx] <= 1e-15 && corral.len() > 1 {
                            corral.remove(idx);
                            weights.remove(idx);
                        } else {
                            idx += 1;
                        }
                    }
                    let total: f64 = weights.iter().sum();
                    weights.iter_mut().for_each(|w| *w /= total);
                    x = combine(vs, &corral, &weights);
                }
            }
        }
    }

    let mut full = vec![0.0; m];
    for (&i, &w) in corral.iter().zip(&weights) {
        full[i] += w;
    }
    let norm = x.norm();
    MinNormPoint {
        point: x,
        weights: full,
        norm,
    }
}
