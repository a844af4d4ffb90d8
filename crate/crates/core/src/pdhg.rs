//! Single PDHG iterations.
//!
//! With `K = (G; A)` the primal update descends along `c - K'y` and the
//! dual update ascends along `q - K x_bar`, so that `c - K'y` is exactly
//! the reduced-cost expression the dual problem constrains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::PreparedLp;
use crate::linalg::{dot, omega_norm, proj_box_in_place, proj_dual_cone_in_place};

/// Maximum number of step-size trials inside one adaptive step.
pub const ADAPTIVE_RETRY_CAP: usize = 60;

/// Step size `eta` and primal weight `omega`, with `tau = eta / omega` and
/// `sigma = eta * omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    pub eta: f64,
    pub omega: f64,
}

impl StepSizes {
    pub fn new(eta: f64, omega: f64) -> Self {
        StepSizes { eta, omega }
    }

    pub fn tau(&self) -> f64 {
        self.eta / self.omega
    }

    pub fn sigma(&self) -> f64 {
        self.eta * self.omega
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalDualIterate {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PrimalDualIterate {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        PrimalDualIterate { x, y }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        PrimalDualIterate {
            x: vec![0.0; n],
            y: vec![0.0; m],
        }
    }

    /// The origin pushed into the primal box; the dual part stays zero.
    pub fn projected_origin(lp: &PreparedLp) -> Self {
        let mut it = Self::zeros(lp.n(), lp.m());
        proj_box_in_place(&mut it.x, lp.lower(), lp.upper());
        it
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }
}

/// One fixed-step PDHG iteration with extrapolation `theta`.
pub fn pdhg_step(
    it: &PrimalDualIterate,
    steps: StepSizes,
    theta: f64,
    lp: &PreparedLp,
) -> PrimalDualIterate {
    let kty = lp.k.mul_t(&it.y);
    pdhg_step_cached(it, &kty, steps, theta, lp).0
}

/// Fixed step given `K'y` for the current dual iterate. Returns the new
/// iterate and `K'y` for the new dual iterate.
pub(crate) fn pdhg_step_cached(
    it: &PrimalDualIterate,
    kty: &[f64],
    steps: StepSizes,
    theta: f64,
    lp: &PreparedLp,
) -> (PrimalDualIterate, Vec<f64>) {
    let tau = steps.tau();
    let sigma = steps.sigma();
    let c = lp.c();

    let mut x = it.x.clone();
    for ((xi, ci), ki) in x.iter_mut().zip(c).zip(kty) {
        *xi -= tau * (ci - ki);
    }
    proj_box_in_place(&mut x, lp.lower(), lp.upper());

    let x_bar: Vec<f64> = x
        .iter()
        .zip(&it.x)
        .map(|(new, old)| new + theta * (new - old))
        .collect();
    let k_xbar = lp.k.mul(&x_bar);

    let mut y = it.y.clone();
    for ((yj, qj), kj) in y.iter_mut().zip(&lp.q).zip(&k_xbar) {
        *yj += sigma * (qj - kj);
    }
    proj_dual_cone_in_place(&mut y, lp.m1());

    let kty_new = lp.k.mul_t(&y);
    (PrimalDualIterate { x, y }, kty_new)
}

/// Outcome of an adaptive step.
#[derive(Debug, Clone)]
pub struct AdaptiveOutcome {
    pub iterate: PrimalDualIterate,
    /// Step size the accepted iterate was produced with.
    pub eta_used: f64,
    /// Proposed step size for the next iteration.
    pub eta_next: f64,
    /// Number of candidate steps tried (1 when the first one is accepted).
    pub trials: usize,
    /// `K'y` for the accepted dual iterate.
    pub kty: Vec<f64>,
}

/// Adaptive PDHG step.
///
/// `k` is the 1-based count of the step being taken; it drives the
/// growth and shrink factors `(k + 1)^-0.6` and `1 - (k + 1)^-0.3`.
pub fn adaptive_step(
    it: &PrimalDualIterate,
    omega: f64,
    eta_hat: f64,
    k: u64,
    lp: &PreparedLp,
) -> Result<AdaptiveOutcome> {
    let kty = lp.k.mul_t(&it.y);
    adaptive_step_cached(it, &kty, omega, eta_hat, k, lp)
}

pub(crate) fn adaptive_step_cached(
    it: &PrimalDualIterate,
    kty: &[f64],
    omega: f64,
    eta_hat: f64,
    k: u64,
    lp: &PreparedLp,
) -> Result<AdaptiveOutcome> {
    if !(eta_hat > 0.0) || !eta_hat.is_finite() {
        return Err(Error::InvalidInput(format!(
            "adaptive step needs a positive finite step size, got {eta_hat}"
        )));
    }
    let kk = (k + 1) as f64;
    let shrink = 1.0 - kk.powf(-0.3);
    let grow = 1.0 + kk.powf(-0.6);
    let c = lp.c();

    let mut eta = eta_hat;
    for trial in 1..=ADAPTIVE_RETRY_CAP {
        let tau = eta / omega;
        let sigma = eta * omega;

        let mut x = it.x.clone();
        for ((xi, ci), ki) in x.iter_mut().zip(c).zip(kty) {
            *xi -= tau * (ci - ki);
        }
        proj_box_in_place(&mut x, lp.lower(), lp.upper());

        let x_bar: Vec<f64> = x.iter().zip(&it.x).map(|(n, o)| 2.0 * n - o).collect();
        let k_xbar = lp.k.mul(&x_bar);

        let mut y = it.y.clone();
        for ((yj, qj), kj) in y.iter_mut().zip(&lp.q).zip(&k_xbar) {
            *yj += sigma * (qj - kj);
        }
        proj_dual_cone_in_place(&mut y, lp.m1());
        let kty_new = lp.k.mul_t(&y);

        let dx: Vec<f64> = x.iter().zip(&it.x).map(|(n, o)| n - o).collect();
        let dy: Vec<f64> = y.iter().zip(&it.y).map(|(n, o)| n - o).collect();
        let k_t_dy: Vec<f64> = kty_new.iter().zip(kty).map(|(n, o)| n - o).collect();
        let interaction = 2.0 * dot(&k_t_dy, &dx).abs();
        let movement = omega_norm(&dx, &dy, omega).powi(2);

        let eta_bar = if interaction == 0.0 {
            f64::INFINITY
        } else {
            movement / interaction
        };
        let eta_next = if eta_bar.is_infinite() {
            grow * eta
        } else {
            (shrink * eta_bar).min(grow * eta)
        };
        if !movement.is_finite() || eta_bar.is_nan() || !eta_next.is_finite() {
            return Err(Error::NumericalFailure(
                "non-finite value inside adaptive step".into(),
            ));
        }
        if eta <= eta_bar {
            return Ok(AdaptiveOutcome {
                iterate: PrimalDualIterate { x, y },
                eta_used: eta,
                eta_next,
                trials: trial,
                kty: kty_new,
            });
        }
        if !(eta_next > 0.0) {
            return Err(Error::NumericalFailure(
                "adaptive step size collapsed to zero".into(),
            ));
        }
        eta = eta_next;
    }
    Err(Error::NumericalFailure(format!(
        "adaptive step not accepted after {ADAPTIVE_RETRY_CAP} trials"
    )))
}
