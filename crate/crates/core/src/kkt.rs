//! Objectives, residuals, the relative termination test and the
//! primal-weighted KKT error used to pick restart points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::PreparedLp;
use crate::linalg::{dot, norm2, proj_lambda};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceInfo {
    /// Reduced costs `proj_Lambda(c - K'y)`.
    pub lambda: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap_abs: f64,
    pub primal_residual_norm: f64,
    pub dual_residual_norm: f64,
}

impl ConvergenceInfo {
    /// `dual_objective - primal_objective`.
    pub fn gap(&self) -> f64 {
        self.dual_objective - self.primal_objective
    }
}

/// Evaluates `(x, y)` against `lp`. Costs one product with `K` and one with `K'`.
pub fn convergence_info(lp: &PreparedLp, x: &[f64], y: &[f64]) -> ConvergenceInfo {
    let kx = lp.k.mul(x);
    let kty = lp.k.mul_t(y);
    convergence_info_from_products(lp, x, y, &kx, &kty)
}

/// Same as [`convergence_info`] with `Kx` and `K'y` supplied by the caller.
pub fn convergence_info_from_products(
    lp: &PreparedLp,
    x: &[f64],
    y: &[f64],
    kx: &[f64],
    kty: &[f64],
) -> ConvergenceInfo {
    let p = &lp.problem;
    let m1 = lp.m1();

    let mut primal_sq = 0.0;
    for (j, &kxj) in kx.iter().enumerate() {
        let r = if j < m1 {
            (lp.q[j] - kxj).max(0.0)
        } else {
            kxj - lp.q[j]
        };
        primal_sq += r * r;
    }

    let reduced: Vec<f64> = p.c.iter().zip(kty).map(|(c, k)| c - k).collect();
    let lambda = proj_lambda(&reduced, &lp.classes);
    let dual_residual_norm = reduced
        .iter()
        .zip(&lambda)
        .map(|(r, l)| (r - l) * (r - l))
        .sum::<f64>()
        .sqrt();

    let dual_objective = dot(&lp.q, y) + bound_term(&p.lower, &p.upper, &lambda);
    let primal_objective = dot(&p.c, x);

    ConvergenceInfo {
        primal_objective,
        dual_objective,
        gap_abs: (dual_objective - primal_objective).abs(),
        primal_residual_norm: primal_sq.sqrt(),
        dual_residual_norm,
        lambda,
    }
}

/// `l'lambda+ + u'lambda-` with `(+-inf) * 0 = 0`.
pub(crate) fn bound_term(lower: &[f64], upper: &[f64], lambda: &[f64]) -> f64 {
    let mut total = 0.0;
    for ((&l, &u), &v) in lower.iter().zip(upper).zip(lambda) {
        if v > 0.0 {
            total += l * v;
        } else if v < 0.0 {
            total += u * v;
        }
    }
    total
}

/// Relative optimality test on the gap and both residuals. All three
/// inequalities are inclusive.
pub fn check_termination(info: &ConvergenceInfo, q_norm: f64, c_norm: f64, eps: f64) -> bool {
    debug_assert!(eps > 0.0);
    let gap_ok = info.gap_abs
        <= eps * (1.0 + info.dual_objective.abs() + info.primal_objective.abs());
    let primal_ok = info.primal_residual_norm <= eps * (1.0 + q_norm);
    let dual_ok = info.dual_residual_norm <= eps * (1.0 + c_norm);
    gap_ok && primal_ok && dual_ok
}

/// `sqrt(w^2 |primal res|^2 + |dual res|^2 / w^2 + gap^2)`.
pub fn kkt_error(info: &ConvergenceInfo, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!(
            "primal weight must be positive, got {omega}"
        )));
    }
    let w2 = omega * omega;
    let gap = info.gap();
    Ok((w2 * info.primal_residual_norm.powi(2)
        + info.dual_residual_norm.powi(2) / w2
        + gap * gap)
        .sqrt())
}

/// Norms `(||q||, ||c||)` used by the relative termination test.
pub fn problem_norms(lp: &PreparedLp) -> (f64, f64) {
    (norm2(&lp.q), norm2(lp.c()))
}
