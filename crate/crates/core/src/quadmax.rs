//! Proximal operator of `τ · max_i q_i` for convex quadratics `q_i(z) = ½ zᵀQ_i z + b_iᵀz`.
//!
//! The prox is computed through its dual over the probability simplex:
//!
//! ```text
//! ψ(w) = min_z Σ w_i q_i(z) + ‖z − v‖² / (2τ),   z(w) = (Σ w_i Q_i + I/τ)⁻¹ (v/τ − Σ w_i b_i)
//! ```
//!
//! `ψ` is concave with `∂ψ/∂w_i = q_i(z(w))` and Hessian `−Jᵀ H⁻¹ J`, `J = [∇q_i(z(w))]`.
//! Faces of the simplex are visited by increasing size; on each face `ψ` is
//! maximised over the affine hull by damped Newton and the first face whose
//! maximiser has nonnegative weights and dominates the inactive pieces is the
//! optimum.

use nalgebra::{DMatrix, DVector};

use crate::Vector;

const FACE_TOL: f64 = 1e-13;
const LOOSE_TOL: f64 = 1e-9;
const MAX_NEWTON: usize = 100;

#[derive(Clone, Debug)]
pub struct QuadPiece {
    pub q: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl QuadPiece {
    pub fn value(&self, z: &Vector) -> f64 {
        0.5 * z.dot(&(&self.q * z)) + self.b.dot(z)
    }

    pub fn gradient(&self, z: &Vector) -> Vector {
        &self.q * z + &self.b
    }

    /// Spectral norm of `Q` (the gradient's Lipschitz constant).
    pub fn lipschitz(&self) -> f64 {
        self.q
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0_f64, |acc, e| acc.max(e.abs()))
    }
}

struct FacePoint {
    z: Vector,
    psi: f64,
}

fn face_point(
    pieces: &[QuadPiece],
    face: &[usize],
    w: &[f64],
    tau: f64,
    v: &Vector,
) -> Option<FacePoint> {
    let n = v.len();
    let mut h = DMatrix::<f64>::identity(n, n) / tau;
    let mut r = v / tau;
    for (&i, &wi) in face.iter().zip(w) {
        h += &pieces[i].q * wi;
        r -= &pieces[i].b * wi;
    }
    let chol = h.cholesky()?;
    let z = chol.solve(&r);
    let psi = face
        .iter()
        .zip(w)
        .map(|(&i, &wi)| wi * pieces[i].value(&z))
        .sum::<f64>()
        + (&z - v).norm_squared() / (2.0 * tau);
    if !psi.is_finite() {
        return None;
    }
    Some(FacePoint { z, psi })
}

/// Relative spread of the piece values over `face` at `z`.
fn face_spread(pieces: &[QuadPiece], face: &[usize], z: &Vector) -> f64 {
    let vals: Vec<f64> = face.iter().map(|&i| pieces[i].value(z)).collect();
    let scale = 1.0 + vals.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
    spread(&vals) / scale
}

fn spread(vals: &[f64]) -> f64 {
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Maximises ψ over the affine hull of `face`. Returns weights and the primal point.
fn solve_face(
    pieces: &[QuadPiece],
    face: &[usize],
    tau: f64,
    v: &Vector,
) -> Option<(Vec<f64>, Vector, bool)> {
    let k = face.len();
    let mut w = vec![1.0 / k as f64; k];
    let mut cur = face_point(pieces, face, &w, tau, v)?;
    if k == 1 {
        return Some((w, cur.z, true));
    }
    let n = v.len();
    for _ in 0..MAX_NEWTON {
        let grad: Vec<f64> = face.iter().map(|&i| pieces[i].value(&cur.z)).collect();
        let scale = 1.0 + grad.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
        if spread(&grad) <= FACE_TOL * scale {
            return Some((w, cur.z, true));
        }
        // M = Jᵀ H⁻¹ J
        let mut hmat = DMatrix::<f64>::identity(n, n) / tau;
        for (&i, &wi) in face.iter().zip(&w) {
            hmat += &pieces[i].q * wi;
        }
        let chol = hmat.cholesky()?;
        let mut jac = DMatrix::<f64>::zeros(n, k);
        for (col, &i) in face.iter().enumerate() {
            jac.set_column(col, &pieces[i].gradient(&cur.z));
        }
        let hinv_j = chol.solve(&jac);
        let m = jac.transpose() * hinv_j;
        let reg = 1e-14 * (1.0 + m.trace().abs());
        let mut kkt = DMatrix::<f64>::zeros(k + 1, k + 1);
        for a in 0..k {
            for b in 0..k {
                kkt[(a, b)] = m[(a, b)];
            }
            kkt[(a, a)] += reg;
            kkt[(a, k)] = 1.0;
            kkt[(k, a)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(k + 1);
        for a in 0..k {
            rhs[a] = grad[a];
        }
        let sol = kkt.lu().solve(&rhs)?;
        let dir: Vec<f64> = (0..k).map(|a| sol[a]).collect();
        let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if !(slope > 0.0) {
            break;
        }
        let mut step = 1.0;
        let mut moved = false;
        while step > 1e-14 {
            let trial: Vec<f64> = w.iter().zip(&dir).map(|(wi, di)| wi + step * di).collect();
            if let Some(p) = face_point(pieces, face, &trial, tau, v) {
                if p.psi >= cur.psi + 1e-4 * step * slope {
                    w = trial;
                    cur = p;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let grad: Vec<f64> = face.iter().map(|&i| pieces[i].value(&cur.z)).collect();
    let scale = 1.0 + grad.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
    let ok = spread(&grad) <= LOOSE_TOL * scale;
    Some((w, cur.z, ok))
}

/// Newton on the primal optimality system `Σ w_i ∇q_i(z) + (z − v)/τ = 0`,
/// `q_i(z) = t` on the face, `Σ w_i = 1`. The dual stopping rule leaves `z`
/// off by up to the square root of the dual conditioning.
fn polish(
    pieces: &[QuadPiece],
    face: &[usize],
    tau: f64,
    v: &Vector,
    z: Vector,
    w: Vec<f64>,
) -> (Vec<f64>, Vector) {
    let (n, k) = (v.len(), face.len());
    if k == 1 {
        return (w, z);
    }
    let residual = |z: &Vector, w: &[f64], t: f64| -> DVector<f64> {
        let mut r = DVector::<f64>::zeros(n + k + 1);
        let mut stat = (z - v) / tau;
        for (&i, &wi) in face.iter().zip(w) {
            stat += pieces[i].gradient(z) * wi;
        }
        r.rows_mut(0, n).copy_from(&stat);
        for (a, &i) in face.iter().enumerate() {
            r[n + a] = pieces[i].value(z) - t;
        }
        r[n + k] = w.iter().sum::<f64>() - 1.0;
        r
    };
    let mut z = z;
    let mut w = w;
    let mut t = face.iter().map(|&i| pieces[i].value(&z)).sum::<f64>() / k as f64;
    let mut res = residual(&z, &w, t);
    for _ in 0..3 {
        let mut jac = DMatrix::<f64>::zeros(n + k + 1, n + k + 1);
        let mut h = DMatrix::<f64>::identity(n, n) / tau;
        for (&i, &wi) in face.iter().zip(&w) {
            h += &pieces[i].q * wi;
        }
        jac.view_mut((0, 0), (n, n)).copy_from(&h);
        for (a, &i) in face.iter().enumerate() {
            let grad = pieces[i].gradient(&z);
            jac.view_mut((0, n + a), (n, 1)).copy_from(&grad);
            jac.view_mut((n + a, 0), (1, n))
                .copy_from(&grad.transpose());
            jac[(n + a, n + k)] = -1.0;
            jac[(n + k, n + a)] = 1.0;
        }
        let Some(step) = jac.lu().solve(&(-&res)) else {
            break;
        };
        let z_new = &z + step.rows(0, n);
        let w_new: Vec<f64> = (0..k).map(|a| w[a] + step[n + a]).collect();
        let t_new = t + step[n + k];
        let res_new = residual(&z_new, &w_new, t_new);
        if !(res_new.norm() < res.norm()) {
            break;
        }
        z = z_new;
        w = w_new;
        t = t_new;
        res = res_new;
    }
    (w, z)
}

fn primal(pieces: &[QuadPiece], tau: f64, v: &Vector, z: &Vector) -> f64 {
    let m = pieces
        .iter()
        .map(|p| p.value(z))
        .fold(f64::NEG_INFINITY, f64::max);
    m + (z - v).norm_squared() / (2.0 * tau)
}

fn faces_of_size(p: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, p: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..p {
            cur.push(i);
            rec(i + 1, p, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, p, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// `argmin_z max_i q_i(z) + ‖z − v‖² / (2τ)`.
pub fn prox_max_quadratics(pieces: &[QuadPiece], tau: f64, v: &Vector) -> Vector {
    assert!(!pieces.is_empty() && tau > 0.0);
    let p = pieces.len();
    let mut fallback: Option<(f64, Vector)> = None;
    for k in 1..=p {
        for face in faces_of_size(p, k) {
            let Some((w, z, converged)) = solve_face(pieces, &face, tau, v) else {
                continue;
            };
            // the dual line search can stall on a flat ψ before the face is solved
            let (w, z) = polish(pieces, &face, tau, v, z, w);
            let converged = converged || face_spread(pieces, &face, &z) <= FACE_TOL;
            let obj = primal(pieces, tau, v, &z);
            if fallback.as_ref().is_none_or(|(best, _)| obj < *best) {
                fallback = Some((obj, z.clone()));
            }
            if !converged || w.iter().any(|&wi| wi < -1e-10) {
                continue;
            }
            let top = face
                .iter()
                .map(|&i| pieces[i].value(&z))
                .fold(f64::NEG_INFINITY, f64::max);
            let tol = 1e-12 * (1.0 + top.abs());
            let dominated = (0..p)
                .filter(|j| !face.contains(j))
                .all(|j| pieces[j].value(&z) <= top + tol);
            if dominated {
                return z;
            }
        }
    }
    // Only reachable under severe ill-conditioning.
    fallback.map(|(_, z)| z).unwrap_or_else(|| v.clone())
}
