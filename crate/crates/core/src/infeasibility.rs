//! Infeasibility certificates read off differences of iterates.
//!
//! On an infeasible or unbounded problem the PDHG iterates drift along a
//! ray. The normalized difference between two snapshots approximates that
//! ray, and its primal part (for unboundedness) or dual part (for primal
//! infeasibility) is tested as a certificate. Dual-infeasibility is tested
//! first.
//!
//! Both tests are relative to the certificate's own objective: a primal
//! infeasibility certificate needs a strictly positive dual ray objective
//! `psi` with every residual at most `tol * psi`, and likewise for the
//! primal ray. On a feasible, bounded problem these ray objectives are
//! nonpositive up to the residuals, so vanishing steps near an optimum
//! never certify.

use serde::{Deserialize, Serialize};

use crate::instance::PreparedLp;
use crate::linalg::{dot, norm2, omega_norm};
use crate::model::BoundClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfeasibilityStatus {
    None,
    PrimalInfeasible,
    DualInfeasible,
}

/// Unscaled `(x, y, lambda)` at one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Two snapshots taken one evaluation interval apart.
#[derive(Debug, Clone)]
pub struct DeltaWindow<'a> {
    pub previous: &'a Snapshot,
    pub current: &'a Snapshot,
}

impl DeltaWindow<'_> {
    fn deltas(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u - v).collect::<Vec<_>>();
        (
            diff(&self.current.x, &self.previous.x),
            diff(&self.current.y, &self.previous.y),
            diff(&self.current.lambda, &self.previous.lambda),
        )
    }
}

/// Tests the window for a dual-infeasibility (unbounded ray) and then a
/// primal-infeasibility certificate. Deltas are normalized by their joint
/// `omega`-norm first.
pub fn detect(window: &DeltaWindow<'_>, lp: &PreparedLp, omega: f64, tol: f64) -> InfeasibilityStatus {
    debug_assert!(tol > 0.0);
    let (mut dx, mut dy, mut dl) = window.deltas();
    let scale = omega_norm(&dx, &dy, omega);
    if !(scale > 0.0) || !scale.is_finite() {
        return InfeasibilityStatus::None;
    }
    for v in dx.iter_mut().chain(dy.iter_mut()).chain(dl.iter_mut()) {
        *v /= scale;
    }

    if certifies_unbounded(&dx, lp, tol) {
        return InfeasibilityStatus::DualInfeasible;
    }
    if certifies_primal_infeasible(&dy, &dl, lp, tol) {
        return InfeasibilityStatus::PrimalInfeasible;
    }
    InfeasibilityStatus::None
}

/// `G d >= 0`, `A d = 0`, `c'd < 0` and `d_i` in the recession cone of the
/// bounds.
pub fn certifies_unbounded(dx: &[f64], lp: &PreparedLp, tol: f64) -> bool {
    let objective = dot(lp.c(), dx);
    if !(objective <= -tol) {
        return false;
    }
    let budget = tol * -objective;
    let kd = lp.k.mul(dx);
    let m1 = lp.m1();
    let ineq_violation = kd[..m1].iter().fold(0.0f64, |m, v| m.max(-v));
    let eq_violation = norm2(&kd[m1..]);
    let bound_violation = dx
        .iter()
        .zip(&lp.classes)
        .map(|(&d, class)| match class {
            BoundClass::Free => 0.0,
            BoundClass::UpperOnly => d.max(0.0),
            BoundClass::LowerOnly => (-d).max(0.0),
            BoundClass::Boxed => d.abs(),
        })
        .fold(0.0f64, f64::max);
    ineq_violation <= budget && eq_violation <= budget && bound_violation <= budget
}

/// `K'dy + dl = 0`, `dy_ineq >= 0`, `dl` in the cone allowed by the bound
/// classes, and a positive ray objective `q'dy + l'dl+ + u'dl-` where only
/// finite bounds contribute.
pub fn certifies_primal_infeasible(dy: &[f64], dl: &[f64], lp: &PreparedLp, tol: f64) -> bool {
    let p = &lp.problem;
    let mut psi = dot(&lp.q, dy);
    for ((&d, &l), &u) in dl.iter().zip(&p.lower).zip(&p.upper) {
        if d > 0.0 && l.is_finite() {
            psi += l * d;
        } else if d < 0.0 && u.is_finite() {
            psi += u * d;
        }
    }
    if !(psi >= tol) {
        return false;
    }
    let budget = tol * psi;
    let kty = lp.k.mul_t(dy);
    let residual = kty
        .iter()
        .zip(dl)
        .map(|(k, d)| (k + d) * (k + d))
        .sum::<f64>()
        .sqrt();
    let cone_violation = dy[..lp.m1()].iter().fold(0.0f64, |m, v| m.max(-v));
    let lambda_violation = dl
        .iter()
        .zip(&p.lower)
        .zip(&p.upper)
        .map(|((&d, &l), &u)| {
            let mut v = 0.0f64;
            if !l.is_finite() {
                v = v.max(d);
            }
            if !u.is_finite() {
                v = v.max(-d);
            }
            v
        })
        .fold(0.0f64, f64::max);
    residual <= budget && cone_violation <= budget && lambda_violation <= budget
}
