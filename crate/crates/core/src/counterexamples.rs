//! The two `|·|` pathologies: an approximate-subdifferential relaxation whose
//! solution set jumps from `{0}` to `ℝ`, and a halving inner sequence on which
//! the exact-subdifferential acceptance test never passes.

use crate::dca::{descent_gap, strict_gap};
use crate::error::{DcError, Result};
use crate::inner::halving_term;
use crate::registry::abs1d;
use crate::subdiff::{abs_eps_distance, abs_eps_subdiff, dist_to_strict_subdiff, strict_subdiff};
use crate::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApSolutionSet {
    SingletonZero,
    AllReals,
}

impl ApSolutionSet {
    pub fn label(&self) -> &'static str {
        match self {
            ApSolutionSet::SingletonZero => "singleton_zero",
            ApSolutionSet::AllReals => "all_reals",
        }
    }
}

/// Solution set of `dist(0, ∂|·|(z)) ≤ ε`, the approximate optimality test for `min |z|`.
///
/// The distance is 1 for `z ≠ 0` and 0 at the origin, so the set is `{0}` for
/// `ε < 1` and all of `ℝ` for `ε ≥ 1`.
pub fn ap_solution_set_abs(eps: f64) -> Result<ApSolutionSet> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(DcError::InvalidArgument(format!(
            "ε must be a positive real, got {eps}"
        )));
    }
    Ok(if eps >= 1.0 {
        ApSolutionSet::AllReals
    } else {
        ApSolutionSet::SingletonZero
    })
}

/// One scanned inner iterate `z_i = x_k / 2^i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Example32Row {
    pub i: usize,
    pub z: f64,
    /// `dist(0, ∂|·|(z_i))`.
    pub dist_exact: f64,
    /// `θ|z_i − x_k|`.
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonTerminationReport {
    pub theta: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub x_k: f64,
    pub i_max: usize,
    pub zeta_used: f64,
    /// Every row for `i ≤ 100`, geometrically thinned beyond, always including `i_max`.
    pub series: Vec<Example32Row>,
    /// `dist_exact > rhs` at every `i ≤ i_max` (all rows, not only the stored ones).
    pub baseline_failed_all: bool,
    /// `dist_exact = 1 > 1/2 ≥ rhs` at every `i ≤ i_max`.
    pub chain_holds: bool,
    /// First `i ≥ −1` passing the descent test and `dist(0, ∂_ζ|·|(z_i)) ≤ θ|z_i − x_k|`.
    pub tpldca_accept_index: Option<i64>,
    /// Same scan with the ε-strict subdifferential in place of `∂_ζ|·|`.
    pub strict_accept_index: Option<i64>,
    /// Whether `∂̂_ζ g(z)` equals the interval `∂_ζ|·|(z)` at the strict acceptance point.
    pub strict_matches_interval: Option<bool>,
}

/// Upper bound on the acceptance scans; the saturated halving sequence settles
/// well before this.
const SCAN_LIMIT: i64 = 4096;

const SIGMA: f64 = 0.01;

fn sample_rows(i_max: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..=i_max.min(100)).collect();
    let thinned = std::iter::successors(Some(110.0_f64), |x| Some(x * 1.1))
        .map(|x| x.floor() as usize)
        .take_while(|&i| i < i_max);
    for i in thinned {
        if rows.last() != Some(&i) {
            rows.push(i);
        }
    }
    if rows.last() != Some(&i_max) {
        rows.push(i_max);
    }
    rows
}

/// Runs the halving counterexample at `x_k = min(1/(2θ), λ)`, `u_k = 0`.
pub fn run_example_32(
    theta: f64,
    lambda: f64,
    i_max: usize,
    zeta: f64,
) -> Result<NonTerminationReport> {
    for (name, v) in [("θ", theta), ("λ", lambda), ("ζ", zeta)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(DcError::InvalidArgument(format!(
                "{name} must be > 0, got {v}"
            )));
        }
    }
    if i_max < 1 {
        return Err(DcError::InvalidArgument("i_max must be >= 1".into()));
    }
    let problem = abs1d();
    let g = problem.g();
    let x_k = (1.0 / (2.0 * theta)).min(lambda);
    let xv = Vector::from_element(1, x_k);
    let u = Vector::zeros(1);
    let z_at = |i: i64| -> f64 {
        if i < 0 {
            x_k
        } else {
            halving_term(x_k, i as usize)
        }
    };

    let keep = sample_rows(i_max);
    let mut keep_iter = keep.iter().peekable();
    let mut series = Vec::with_capacity(keep.len());
    let mut baseline_failed_all = true;
    let mut chain_holds = true;
    // θ·x_k may exceed 1/2 by rounding when x_k = 1/(2θ)
    let half = 0.5 * (1.0 + 4.0 * f64::EPSILON);
    for i in 0..=i_max {
        let z = z_at(i as i64);
        let zv = Vector::from_element(1, z);
        let dist_exact = dist_to_strict_subdiff(g, &zv, 0.0, &u)?;
        let rhs = theta * (z - x_k).abs();
        baseline_failed_all &= dist_exact > rhs;
        chain_holds &= dist_exact == 1.0 && rhs <= half;
        if keep_iter.peek() == Some(&&i) {
            keep_iter.next();
            series.push(Example32Row {
                i,
                z,
                dist_exact,
                rhs,
            });
        }
    }

    let descent_ok = |z: f64| -> Result<bool> {
        Ok(descent_gap(g, &xv, &u, &Vector::from_element(1, z), SIGMA, lambda)? >= 0.0)
    };
    let mut tpldca_accept_index = None;
    for i in -1..SCAN_LIMIT {
        let z = z_at(i);
        if descent_ok(z)? && abs_eps_distance(z, zeta, 0.0)? <= theta * (z - x_k).abs() {
            tpldca_accept_index = Some(i);
            break;
        }
    }
    let mut strict_accept_index = None;
    for i in -1..SCAN_LIMIT {
        let z = z_at(i);
        let zv = Vector::from_element(1, z);
        if descent_ok(z)? && strict_gap(g, &xv, &u, &zv, zeta, theta)? >= 0.0 {
            strict_accept_index = Some(i);
            break;
        }
    }
    let strict_matches_interval = match strict_accept_index {
        Some(i) => {
            let z = z_at(i);
            let poly = strict_subdiff(g, &Vector::from_element(1, z), zeta)?;
            let lo = poly
                .vertices()
                .iter()
                .map(|v| v[0])
                .fold(f64::INFINITY, f64::min);
            let hi = poly
                .vertices()
                .iter()
                .map(|v| v[0])
                .fold(f64::NEG_INFINITY, f64::max);
            let interval = abs_eps_subdiff(z, zeta)?;
            Some(lo == interval.lo && hi == interval.hi)
        }
        None => None,
    };

    Ok(NonTerminationReport {
        theta,
        lambda,
        sigma: SIGMA,
        x_k,
        i_max,
        zeta_used: zeta,
        series,
        baseline_failed_all,
        chain_holds,
        tpldca_accept_index,
        strict_accept_index,
        strict_matches_interval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ap_classifier_examples() {
        assert_eq!(
            ap_solution_set_abs(0.5).unwrap(),
            ApSolutionSet::SingletonZero
        );
        assert_eq!(ap_solution_set_abs(1.0).unwrap(), ApSolutionSet::AllReals);
        assert_eq!(
            ap_solution_set_abs(0.999999).unwrap(),
            ApSolutionSet::SingletonZero
        );
        assert!(ap_solution_set_abs(0.0).is_err());
        assert!(ap_solution_set_abs(-1.0).is_err());
    }

    #[test]
    fn unit_instance() {
        let r = run_example_32(1.0, 1.0, 10_000, 0.1).unwrap();
        assert_eq!(r.x_k, 0.5);
        assert!(r.baseline_failed_all && r.chain_holds);
        assert!(r
            .series
            .iter()
            .all(|row| row.dist_exact == 1.0 && row.rhs < 1.0));
        assert_eq!(r.tpldca_accept_index, Some(2));
        assert_eq!(r.strict_accept_index, Some(4));
        assert_eq!(r.strict_matches_interval, Some(true));
    }

    #[test]
    fn large_theta() {
        let r = run_example_32(10.0, 1.0, 1000, 0.1).unwrap();
        assert_eq!(r.x_k, 0.05);
        assert!(r.baseline_failed_all);
    }

    #[test]
    fn series_is_thinned() {
        let r = run_example_32(1.0, 1.0, 10_000, 0.1).unwrap();
        assert!(r.series.len() < 200);
        assert_eq!(r.series[100].i, 100);
        assert_eq!(r.series.last().unwrap().i, 10_000);
        assert!(r.series.windows(2).all(|w| w[0].i < w[1].i));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(run_example_32(0.0, 1.0, 10, 0.1).is_err());
        assert!(run_example_32(1.0, 1.0, 0, 0.1).is_err());
        assert!(run_example_32(1.0, 1.0, 10, 0.0).is_err());
    }
}
